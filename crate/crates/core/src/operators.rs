//! Single-mode oscillator operators in the dimensionless harmonic basis and
//! molecule-fixed angular momentum in the |J, K> basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::molecule::DerivedFrame;
use crate::C64;

/// Factor acting on one vibrational mode: q = (a + a^dagger)/sqrt2 or
/// p = i(a^dagger - a)/sqrt2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeOp {
    Q,
    P,
}

/// Molecule-fixed axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    A,
    B,
    C,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::A, Axis::B, Axis::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    pub matrix: DMatrix<C64>,
    pub bandwidth: usize,
    pub hermitian: bool,
}

/// Applies the rightmost factor first to a ket stored densely with room to grow.
fn apply_mode_op(op: ModeOp, ket: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); ket.len() + 1];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (v, &c) in ket.iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let up = ((v + 1) as f64).sqrt() * s;
        let down = (v as f64).sqrt() * s;
        match op {
            ModeOp::Q => {
                out[v + 1] += c * up;
                if v > 0 {
                    out[v - 1] += c * down;
                }
            }
            ModeOp::P => {
                out[v + 1] += c * C64::new(0.0, up);
                if v > 0 {
                    out[v - 1] += c * C64::new(0.0, -down);
                }
            }
        }
    }
    out
}

/// <v|w_1 w_2 ... w_n|v'> for v, v' < d, computed without truncating the
/// intermediate states.
pub fn mode_word_matrix(word: &[ModeOp], d: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    for col in 0..d {
        let mut ket = vec![C64::new(0.0, 0.0); col + 1];
        ket[col] = C64::new(1.0, 0.0);
        for &op in word.iter().rev() {
            ket = apply_mode_op(op, &ket);
        }
        for (row, &c) in ket.iter().enumerate().take(d) {
            m[(row, col)] = c;
        }
    }
    m
}

pub fn q_power_matrix(d: usize, power: usize) -> Result<ModeOperator> {
    if !(1..=4).contains(&power) {
        return Err(Error::invalid(format!("q power {power} outside 1..=4")));
    }
    if d == 0 {
        return Err(Error::invalid("oscillator dimension must be positive"));
    }
    Ok(ModeOperator {
        matrix: mode_word_matrix(&vec![ModeOp::Q; power], d),
        bandwidth: power,
        hermitian: true,
    })
}

/// (p, p^2) in dimension d.
pub fn momentum_matrices(d: usize) -> (ModeOperator, ModeOperator) {
    (
        ModeOperator {
            matrix: mode_word_matrix(&[ModeOp::P], d),
            bandwidth: 1,
            hermitian: true,
        },
        ModeOperator {
            matrix: mode_word_matrix(&[ModeOp::P, ModeOp::P], d),
            bandwidth: 2,
            hermitian: true,
        },
    )
}

/// J_a, J_b, J_c in units of hbar, basis index m = K + J.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentumSet {
    pub j: u32,
    pub ja: DMatrix<C64>,
    pub jb: DMatrix<C64>,
    pub jc: DMatrix<C64>,
}

impl AngularMomentumSet {
    pub fn component(&self, axis: Axis) -> &DMatrix<C64> {
        match axis {
            Axis::A => &self.ja,
            Axis::B => &self.jb,
            Axis::C => &self.jc,
        }
    }

    /// J^+ = J_a + i J_b, which lowers K.
    pub fn lowering(&self) -> DMatrix<C64> {
        &self.ja + &self.jb * C64::new(0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        2 * self.j as usize + 1
    }

    /// Product of components in the given order.
    pub fn word(&self, axes: &[Axis]) -> DMatrix<C64> {
        let mut m = DMatrix::identity(self.dim(), self.dim());
        for &a in axes {
            m *= self.component(a);
        }
        m
    }
}

pub fn angular_momentum(j: i64) -> Result<AngularMomentumSet> {
    if j < 0 {
        return Err(Error::invalid(format!("negative J = {j}")));
    }
    if j > 1 << 12 {
        return Err(Error::invalid(format!("J = {j} is unreasonably large")));
    }
    let d = (2 * j + 1) as usize;
    let jj = (j * (j + 1)) as f64;
    let mut lower = DMatrix::<C64>::zeros(d, d);
    let mut jc = DMatrix::<C64>::zeros(d, d);
    for m in 0..d {
        let k = m as i64 - j;
        jc[(m, m)] = C64::new(k as f64, 0.0);
        if m > 0 {
            // <K-1| J^+ |K>
            lower[(m - 1, m)] = C64::new((jj - (k * (k - 1)) as f64).sqrt(), 0.0);
        }
    }
    let raise = lower.adjoint();
    let ja = (&lower + &raise) * C64::new(0.5, 0.0);
    let jb = (&lower - &raise) * C64::new(0.0, -0.5);
    Ok(AngularMomentumSet {
        j: j as u32,
        ja,
        jb,
        jc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotorLabel {
    pub j: u32,
    pub ka: u32,
    pub kc: u32,
}

impl std::fmt::Display for RotorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}_{}{}", self.j, self.ka, self.kc)
    }
}

#[derive(Debug, Clone)]
pub struct RotorLevel {
    pub label: RotorLabel,
    pub energy_cm1: f64,
    /// Coefficients over K = -J..J.
    pub vector: nalgebra::DVector<C64>,
}

/// Rigid-rotor levels A J_a^2 + B J_b^2 + C J_c^2, ascending and labeled
/// J_{0J}, J_{1J}, J_{1,J-1}, J_{2,J-1}, ..., J_{J0}.
pub fn asymmetric_top_solve(frame: &DerivedFrame, j: u32) -> Vec<RotorLevel> {
    let am = angular_momentum(j as i64).expect("non-negative J");
    let [a, b, c] = frame.rotational_constants_cm1;
    let h = am.word(&[Axis::A, Axis::A]) * C64::new(a, 0.0)
        + am.word(&[Axis::B, Axis::B]) * C64::new(b, 0.0)
        + am.word(&[Axis::C, Axis::C]) * C64::new(c, 0.0);
    let eig = hermitian_eigen(&h);
    (0..eig.len())
        .map(|i| RotorLevel {
            label: RotorLabel {
                j,
                ka: ((i + 1) / 2) as u32,
                kc: j - (i / 2) as u32,
            },
            energy_cm1: eig.values[i],
            vector: eig.vector(i),
        })
        .collect()
}
