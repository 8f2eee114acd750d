use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, Vector3};
use serde::Deserialize;

use crate::error::{Error, Result};

const BUNDLED_H2O: &str = include_str!("../../data/h2o.model");

const ORTHONORMALITY_TOL: f64 = 1e-10;
const ECKART_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub symbol: String,
    pub mass_u: f64,
    /// Equilibrium position in bohr, components along (a, b, c).
    pub position: Vector3<f64>,
}

/// A reduced anharmonic constant keyed by sorted 0-based mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceConstant {
    pub modes: Vec<usize>,
    pub value_cm1: f64,
}

impl ForceConstant {
    /// Number of distinct orderings of `modes`.
    pub fn multiplicity(&self) -> f64 {
        let n = self.modes.len();
        let mut count = factorial(n);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && self.modes[j] == self.modes[i] {
                j += 1;
            }
            count /= factorial(j - i);
            i = j;
        }
        count as f64
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeModel {
    pub name: String,
    pub atoms: Vec<Atom>,
    /// Harmonic wavenumbers in cm^-1.
    pub omega_cm1: Vec<f64>,
    /// Normal-mode matrix, rows (atom, axis), one column per mode.
    pub normal_modes: DMatrix<f64>,
    pub cubic: Vec<ForceConstant>,
    pub quartic: Vec<ForceConstant>,
    pub vmax: usize,
    /// Modes whose vibrational quanta are odd under exchange of identical nuclei.
    pub exchange_odd_modes: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    axes: Option<Vec<String>>,
    vmax: usize,
    #[serde(default)]
    exchange_odd_modes: Vec<usize>,
    atoms: Vec<AtomEntry>,
    modes: ModesEntry,
    #[serde(default)]
    cubic: BTreeMap<String, f64>,
    #[serde(default)]
    quartic: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    symbol: String,
    mass_u: f64,
    re_bohr: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModesEntry {
    omega_cm1: Vec<f64>,
    #[serde(rename = "L")]
    l: Vec<Vec<f64>>,
}

impl MoleculeModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The bundled water model.
    pub fn h2o() -> Self {
        Self::from_toml_str(BUNDLED_H2O).expect("bundled model is valid")
    }

    pub fn bundled_h2o_text() -> &'static str {
        BUNDLED_H2O
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse {
            what: "molecule model".into(),
            detail: e.to_string(),
        })?;
        let model = Self::from_file(file)?;
        model.validate()?;
        Ok(model)
    }

    fn from_file(file: ModelFile) -> Result<Self> {
        let order = axis_permutation(file.axes.as_deref())?;
        let n_atoms = file.atoms.len();
        let n_modes = file.modes.omega_cm1.len();
        if n_atoms < 3 {
            return Err(Error::Validation {
                invariant: "at least three atoms",
                detail: format!("found {n_atoms}"),
            });
        }
        if file.modes.l.len() != 3 * n_atoms {
            return Err(Error::Validation {
                invariant: "L has 3 rows per atom",
                detail: format!("{} rows for {} atoms", file.modes.l.len(), n_atoms),
            });
        }
        if let Some(row) = file.modes.l.iter().find(|r| r.len() != n_modes) {
            return Err(Error::Validation {
                invariant: "L has one column per harmonic frequency",
                detail: format!("row of length {} for {} modes", row.len(), n_modes),
            });
        }

        let atoms = file
            .atoms
            .into_iter()
            .map(|a| Atom {
                symbol: a.symbol,
                mass_u: a.mass_u,
                position: Vector3::from_fn(|i, _| a.re_bohr[order[i]]),
            })
            .collect();
        let normal_modes = DMatrix::from_fn(3 * n_atoms, n_modes, |row, k| {
            let (atom, axis) = (row / 3, row % 3);
            file.modes.l[3 * atom + order[axis]][k]
        });

        let cubic = parse_force_constants(&file.cubic, 3, n_modes)?;
        let quartic = parse_force_constants(&file.quartic, 4, n_modes)?;

        let mut exchange_odd_modes = Vec::new();
        for &m in &file.exchange_odd_modes {
            if m == 0 || m > n_modes {
                return Err(Error::Validation {
                    invariant: "exchange-odd modes refer to existing modes",
                    detail: format!("mode {m} of {n_modes}"),
                });
            }
            exchange_odd_modes.push(m - 1);
        }
        exchange_odd_modes.sort_unstable();
        exchange_odd_modes.dedup();

        Ok(MoleculeModel {
            name: file.name.unwrap_or_default(),
            atoms,
            omega_cm1: file.modes.omega_cm1,
            normal_modes,
            cubic,
            quartic,
            vmax: file.vmax,
            exchange_odd_modes,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_modes(&self) -> usize {
        self.omega_cm1.len()
    }

    pub fn masses_u(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.mass_u).collect()
    }

    /// Displacement pattern of mode `k` on atom `n`.
    pub fn mode_vector(&self, atom: usize, k: usize) -> Vector3<f64> {
        Vector3::from_fn(|axis, _| self.normal_modes[(3 * atom + axis, k)])
    }

    /// Checks every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.atoms.iter().find(|a| !(a.mass_u > 0.0 && a.mass_u.is_finite())) {
            return Err(Error::Validation {
                invariant: "atomic masses positive",
                detail: format!("{} has mass {}", a.symbol, a.mass_u),
            });
        }
        if let Some((k, w)) = self
            .omega_cm1
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::Validation {
                invariant: "harmonic frequencies positive",
                detail: format!("omega_{} = {}", k + 1, w),
            });
        }
        if self.n_modes() == 0 || self.n_modes() > 3 * self.n_atoms() - 6 {
            return Err(Error::Validation {
                invariant: "number of modes between 1 and 3N-6",
                detail: format!("{} modes for {} atoms", self.n_modes(), self.n_atoms()),
            });
        }

        let l = &self.normal_modes;
        let gram = l.transpose() * l;
        let dev = (gram - DMatrix::identity(self.n_modes(), self.n_modes())).amax();
        if dev > ORTHONORMALITY_TOL {
            return Err(Error::Validation {
                invariant: "columns of L orthonormal",
                detail: format!("max |L^T L - 1| = {dev:.3e}"),
            });
        }

        let masses = self.masses_u();
        let total: f64 = masses.iter().sum();
        let com = self
            .atoms
            .iter()
            .fold(Vector3::zeros(), |acc, a| acc + a.position * a.mass_u)
            / total;
        if com.amax() > ECKART_TOL {
            return Err(Error::Validation {
                invariant: "geometry centred on the centre of mass",
                detail: format!("centre of mass at {:?}", com.as_slice()),
            });
        }

        for k in 0..self.n_modes() {
            let mut translation = Vector3::zeros();
            let mut rotation = Vector3::zeros();
            for (n, atom) in self.atoms.iter().enumerate() {
                let w = atom.mass_u.sqrt() * self.mode_vector(n, k);
                translation += w;
                rotation += atom.position.cross(&w);
            }
            if translation.amax() > ECKART_TOL {
                return Err(Error::Validation {
                    invariant: "translational Eckart condition",
                    detail: format!("mode {} residual {:.3e}", k + 1, translation.amax()),
                });
            }
            if rotation.amax() > ECKART_TOL {
                return Err(Error::Validation {
                    invariant: "rotational Eckart condition",
                    detail: format!("mode {} residual {:.3e}", k + 1, rotation.amax()),
                });
            }
        }

        if self.vmax > 255 {
            return Err(Error::Validation {
                invariant: "vmax at most 255",
                detail: format!("vmax = {}", self.vmax),
            });
        }
        Ok(())
    }

    /// Same model with the modes reordered so that new mode `i` is old mode `perm[i]`.
    pub fn with_modes_permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid(format!("{perm:?} is not a permutation of {n} modes")));
        }
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let remap = |fc: &ForceConstant| {
            let mut modes: Vec<usize> = fc.modes.iter().map(|&m| inverse[m]).collect();
            modes.sort_unstable();
            ForceConstant {
                modes,
                value_cm1: fc.value_cm1,
            }
        };
        let mut odd: Vec<usize> = self.exchange_odd_modes.iter().map(|&m| inverse[m]).collect();
        odd.sort_unstable();
        Ok(MoleculeModel {
            name: self.name.clone(),
            atoms: self.atoms.clone(),
            omega_cm1: perm.iter().map(|&p| self.omega_cm1[p]).collect(),
            normal_modes: DMatrix::from_fn(self.normal_modes.nrows(), n, |r, c| {
                self.normal_modes[(r, perm[c])]
            }),
            cubic: self.cubic.iter().map(remap).collect(),
            quartic: self.quartic.iter().map(remap).collect(),
            vmax: self.vmax,
            exchange_odd_modes: odd,
        })
    }
}

fn axis_permutation(axes: Option<&[String]>) -> Result<[usize; 3]> {
    let Some(axes) = axes else {
        return Ok([0, 1, 2]);
    };
    let bad = || Error::Validation {
        invariant: "axes are a permutation of a, b, c",
        detail: format!("{axes:?}"),
    };
    if axes.len() != 3 {
        return Err(bad());
    }
    // order[internal axis] = column in the file
    let mut order = [usize::MAX; 3];
    for (col, name) in axes.iter().enumerate() {
        let internal = match name.trim().to_ascii_lowercase().as_str() {
            "a" => 0,
            "b" => 1,
            "c" => 2,
            _ => return Err(bad()),
        };
        if order[internal] != usize::MAX {
            return Err(bad());
        }
        order[internal] = col;
    }
    Ok(order)
}

fn parse_force_constants(
    table: &BTreeMap<String, f64>,
    rank: usize,
    n_modes: usize,
) -> Result<Vec<ForceConstant>> {
    let mut seen: BTreeMap<Vec<usize>, String> = BTreeMap::new();
    let mut out = Vec::with_capacity(table.len());
    for (key, &value) in table {
        let parsed: std::result::Result<Vec<usize>, _> =
            key.split_whitespace().map(str::parse::<usize>).collect();
        let mut modes = parsed.map_err(|_| Error::Parse {
            what: "force-constant key".into(),
            detail: format!("{key:?} is not a list of mode numbers"),
        })?;
        if modes.len() != rank {
            return Err(Error::Parse {
                what: "force-constant key".into(),
                detail: format!("{key:?} must name {rank} modes"),
            });
        }
        if modes.iter().any(|&m| m == 0 || m > n_modes) {
            return Err(Error::Validation {
                invariant: "force constants refer to existing modes",
                detail: format!("{key:?} with {n_modes} modes"),
            });
        }
        if !value.is_finite() {
            return Err(Error::Validation {
                invariant: "force constants finite",
                detail: format!("{key:?} = {value}"),
            });
        }
        modes.iter_mut().for_each(|m| *m -= 1);
        modes.sort_unstable();
        if let Some(previous) = seen.insert(modes.clone(), key.clone()) {
            return Err(Error::Validation {
                invariant: "force constants symmetric under index permutation",
                detail: format!("{previous:?} and {key:?} name the same constant"),
            });
        }
        out.push(ForceConstant {
            modes,
            value_cm1: value,
        });
    }
    out.sort_by(|a, b| a.modes.cmp(&b.modes));
    Ok(out)
}

/// Projects `l` onto the complement of the mass-weighted translations and
/// rotations about `positions`, then Lowdin-orthonormalizes its columns.
/// Restores the Eckart conditions and `L^T L = 1` for a rounded table.
pub fn project_normal_modes(
    masses_u: &[f64],
    positions: &[Vector3<f64>],
    l: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = masses_u.len();
    if positions.len() != n || l.nrows() != 3 * n {
        return Err(Error::invalid("mass, position and L shapes disagree"));
    }
    let mut external: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(6);
    for axis in 0..3 {
        let e = Vector3::ith(axis, 1.0);
        let trans = nalgebra::DVector::from_fn(3 * n, |row, _| {
            if row % 3 == axis {
                masses_u[row / 3].sqrt()
            } else {
                0.0
            }
        });
        let rot = nalgebra::DVector::from_fn(3 * n, |row, _| {
            let v = e.cross(&positions[row / 3]);
            masses_u[row / 3].sqrt() * v[row % 3]
        });
        external.push(trans);
        external.push(rot);
    }
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    for mut v in external {
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            basis.push(v / norm);
        }
    }
    let mut projected = l.clone();
    for b in &basis {
        let coeffs = b.transpose() * &projected;
        projected -= b * coeffs;
    }
    let gram = projected.transpose() * &projected;
    let eig = nalgebra::SymmetricEigen::new(gram);
    if eig.eigenvalues.min() <= 1e-12 {
        return Err(Error::Validation {
            invariant: "normal modes linearly independent",
            detail: "projected L is rank deficient".into(),
        });
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|w| w.powf(-0.5)))
        * eig.eigenvectors.transpose();
    Ok(projected * inv_sqrt)
}
