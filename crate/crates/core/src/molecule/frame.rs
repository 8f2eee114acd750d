use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3};

use super::model::MoleculeModel;
use crate::error::{Error, Result};
use crate::units::{ELECTRON_MASS_PER_DALTON, HARTREE_PER_WAVENUMBER};

/// Coefficients of (1 + x)^-2 in powers of b = 2x.
pub const MU_SERIES: [f64; 5] = [1.0, -1.0, 0.75, -0.5, 0.3125];

pub const MAX_MU_ORDER: usize = 4;

const PRINCIPAL_AXIS_TOL: f64 = 1e-8;

/// Symmetric-3x3-valued homogeneous polynomial in the normal coordinates Q
/// (atomic units). Monomials are keyed by sorted mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MuPolynomial {
    pub order: usize,
    pub terms: BTreeMap<Vec<usize>, Matrix3<f64>>,
}

impl MuPolynomial {
    pub fn evaluate(&self, q: &[f64]) -> Matrix3<f64> {
        self.terms
            .iter()
            .map(|(modes, coeff)| coeff * modes.iter().map(|&k| q[k]).product::<f64>())
            .sum()
    }

    pub fn trace_terms(&self) -> BTreeMap<Vec<usize>, f64> {
        self.terms.iter().map(|(m, c)| (m.clone(), c.trace())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InertiaFrame {
    /// Equilibrium inertia tensor in m_e bohr^2.
    pub inertia: Matrix3<f64>,
    /// A_e, B_e, C_e in cm^-1, in (a, b, c) order.
    pub rotational_constants_cm1: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFrame {
    pub inertia: Matrix3<f64>,
    pub rotational_constants_cm1: [f64; 3],
    /// One antisymmetric matrix per axis a, b, c.
    pub zeta: [DMatrix<f64>; 3],
    /// dI/dQ_k per mode.
    pub a_matrices: Vec<Matrix3<f64>>,
    /// mu_0 .. mu_4.
    pub mu: Vec<MuPolynomial>,
}

impl DerivedFrame {
    pub fn new(model: &MoleculeModel) -> Result<Self> {
        let InertiaFrame {
            inertia,
            rotational_constants_cm1,
        } = equilibrium_inertia(model)?;
        let a = a_matrices(model);
        let mu = (0..=MAX_MU_ORDER)
            .map(|order| mu_expansion(&inertia, &a, order))
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivedFrame {
            inertia,
            rotational_constants_cm1,
            zeta: coriolis_coefficients(model),
            a_matrices: a,
            mu,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.a_matrices.len()
    }
}

fn masses_au(model: &MoleculeModel) -> Vec<f64> {
    model
        .atoms
        .iter()
        .map(|a| a.mass_u * ELECTRON_MASS_PER_DALTON)
        .collect()
}

pub fn equilibrium_inertia(model: &MoleculeModel) -> Result<InertiaFrame> {
    let mut inertia = Matrix3::zeros();
    for (atom, m) in model.atoms.iter().zip(masses_au(model)) {
        let r = atom.position;
        inertia += m * (Matrix3::identity() * r.norm_squared() - r * r.transpose());
    }
    let largest = inertia.diagonal().max();
    let smallest = inertia.diagonal().min();
    if smallest <= 1e-10 * largest {
        return Err(Error::NonLinear);
    }
    let off = (0..3)
        .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| inertia[(i, j)].abs())
        .fold(0.0, f64::max);
    if off > PRINCIPAL_AXIS_TOL * largest {
        return Err(Error::Validation {
            invariant: "geometry in the principal-axis frame",
            detail: format!("off-diagonal inertia {off:.3e} vs diagonal {largest:.3e}"),
        });
    }
    let constants = [0, 1, 2].map(|i| 1.0 / (2.0 * inertia[(i, i)]) / HARTREE_PER_WAVENUMBER);
    Ok(InertiaFrame {
        inertia,
        rotational_constants_cm1: constants,
    })
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn coriolis_coefficients(model: &MoleculeModel) -> [DMatrix<f64>; 3] {
    let n = model.n_modes();
    [0, 1, 2].map(|alpha| {
        let mut z = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in (k + 1)..n {
                let mut sum = 0.0;
                for atom in 0..model.n_atoms() {
                    let lk = model.mode_vector(atom, k);
                    let ll = model.mode_vector(atom, l);
                    for beta in 0..3 {
                        for gamma in 0..3 {
                            sum += levi_civita(alpha, beta, gamma) * lk[beta] * ll[gamma];
                        }
                    }
                }
                // Symmetry-forbidden couplings cancel only up to roundoff.
                let sum = if sum.abs() < 1e-12 { 0.0 } else { sum };
                z[(k, l)] = sum;
                z[(l, k)] = -sum;
            }
        }
        z
    })
}

/// First derivatives of the inertia tensor along each normal coordinate.
pub fn a_matrices(model: &MoleculeModel) -> Vec<Matrix3<f64>> {
    let masses = masses_au(model);
    let mut out: Vec<Matrix3<f64>> = (0..model.n_modes())
        .map(|k| {
            let mut a = Matrix3::zeros();
            for (n, atom) in model.atoms.iter().enumerate() {
                let r = atom.position;
                let l = model.mode_vector(n, k);
                a += masses[n].sqrt()
                    * (Matrix3::identity() * (2.0 * r.dot(&l)) - r * l.transpose() - l * r.transpose());
            }
            a
        })
        .collect();
    let scale = out.iter().map(|a| a.amax()).fold(0.0, f64::max);
    for a in &mut out {
        a.iter_mut().filter(|x| x.abs() < 1e-12 * scale).for_each(|x| *x = 0.0);
    }
    out
}

/// mu_order as a polynomial in Q: c_order I^-1/2 b^order I^-1/2 with
/// b = sum_k I^-1/2 a_k I^-1/2 Q_k.
pub fn mu_expansion(
    inertia: &Matrix3<f64>,
    a: &[Matrix3<f64>],
    order: usize,
) -> Result<MuPolynomial> {
    if order > MAX_MU_ORDER {
        return Err(Error::invalid(format!("mu expansion order {order} outside 0..=4")));
    }
    let inv_sqrt = Matrix3::from_diagonal(&inertia.diagonal().map(|i| i.powf(-0.5)));
    let b: Vec<Matrix3<f64>> = a.iter().map(|ak| inv_sqrt * ak * inv_sqrt).collect();

    // Ordered products summed into their sorted monomial.
    let mut powers: BTreeMap<Vec<usize>, Matrix3<f64>> = BTreeMap::new();
    powers.insert(Vec::new(), Matrix3::identity());
    for _ in 0..order {
        let mut next: BTreeMap<Vec<usize>, Matrix3<f64>> = BTreeMap::new();
        for (modes, m) in &powers {
            for (k, bk) in b.iter().enumerate() {
                let mut key = modes.clone();
                key.push(k);
                key.sort_unstable();
                *next.entry(key).or_insert_with(Matrix3::zeros) += m * bk;
            }
        }
        powers = next;
    }
    let mut terms: BTreeMap<Vec<usize>, Matrix3<f64>> = powers
        .into_iter()
        .map(|(modes, m)| {
            let c = MU_SERIES[order] * inv_sqrt * m * inv_sqrt;
            (modes, (c + c.transpose()) * 0.5)
        })
        .collect();
    // Symmetry-forbidden entries come out as roundoff; make them exact zeros.
    let scale = terms.values().map(|c| c.amax()).fold(0.0, f64::max);
    for c in terms.values_mut() {
        c.iter_mut().filter(|x| x.abs() < 1e-12 * scale).for_each(|x| *x = 0.0);
    }
    Ok(MuPolynomial { order, terms })
}
