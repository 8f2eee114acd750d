use rayon::prelude::*;

use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, QubitLayout};
use crate::C64;

/// Below this many amplitudes a rotation runs on one thread.
const PARALLEL_MIN_DIM: usize = 1 << 14;

/// Amplitudes over the 2^N computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        if n_qubits > 40 {
            return Err(Error::DimensionLimit { dim: n_qubits, limit: 40 });
        }
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(Error::invalid(format!("basis index {index} outside 2^{n_qubits}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index as usize] = C64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Normalizes; fails on a zero vector or a length that is not a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::invalid(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero statevector"));
        }
        Ok(Statevector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// |<self|other>|^2
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

pub fn prepare_basis_state(layout: &QubitLayout, b: &RovibBasisState) -> Result<Statevector> {
    Statevector::basis(layout.n_qubits(), layout.encode(b)?)
}

/// exp(-i theta P) applied in place.
pub fn apply_pauli_rotation(s: &mut Statevector, p: &PauliString, theta: f64) {
    assert_eq!(p.n_qubits(), s.n_qubits, "Pauli string width differs from the register");
    let (c, sn) = (theta.cos(), theta.sin());
    let x = p.x();
    let z = p.z();
    let y_phase = p.y_phase();
    // P|col> = y_phase (-1)^{|z & col|} |col ^ x>, so (P s)[r] = phase(r ^ x) s[r ^ x].
    let minus_i_sin = C64::new(0.0, -sn);
    if x == 0 {
        let update = |(r, a): (usize, &mut C64)| {
            let sign = if (z & r as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *a *= C64::new(c, 0.0) + minus_i_sin * y_phase * sign;
        };
        if s.amps.len() >= PARALLEL_MIN_DIM {
            s.amps.par_iter_mut().enumerate().for_each(update);
        } else {
            s.amps.iter_mut().enumerate().for_each(update);
        }
        return;
    }
    let old = &s.amps;
    let rotated = |r: usize| {
        let src = r ^ x as usize;
        let sign = if (z & src as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        old[r] * c + minus_i_sin * y_phase * sign * old[src]
    };
    let new: Vec<C64> = if old.len() >= PARALLEL_MIN_DIM {
        (0..old.len()).into_par_iter().map(rotated).collect()
    } else {
        (0..old.len()).map(rotated).collect()
    };
    s.amps = new;
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
        let amps = (0..1 << n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        Statevector::from_amplitudes(amps).unwrap()
    }

    /// exp(-i theta P) by eigendecomposition of the dense Pauli matrix.
    fn dense_rotation(p: &PauliString, theta: f64) -> DMatrix<C64> {
        let eig = crate::linalg::hermitian_eigen(&p.to_matrix());
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            eig.len(),
            eig.values.iter().map(|&l| C64::new(0.0, -theta * l).exp()),
        ));
        &eig.vectors * phases * eig.vectors.adjoint()
    }

    #[test]
    fn zero_angle_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = random_state(4, &mut rng);
        let mut s = s0.clone();
        apply_pauli_rotation(&mut s, &"XYZI".parse().unwrap(), 0.0);
        assert_eq!(s, s0);
    }

    #[test]
    fn z_half_turn_on_zero_gives_minus_i() {
        let mut s = Statevector::basis(1, 0).unwrap();
        apply_pauli_rotation(&mut s, &"Z".parse().unwrap(), std::f64::consts::FRAC_PI_2);
        assert!((s.amplitudes()[0] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_dense_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in ["XYZX", "IYYZ", "ZZZZ", "XIIY", "YXZI"] {
            let p: PauliString = format!("II{s}").parse().unwrap();
            let theta = rng.random_range(-2.0..2.0);
            let s0 = random_state(6, &mut rng);
            let mut got = s0.clone();
            apply_pauli_rotation(&mut got, &p, theta);
            let want = dense_rotation(&p, theta) * DVector::from_column_slice(s0.amplitudes());
            let err = got.amplitudes().iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{p}: {err}");
        }
    }

    #[test]
    fn parallel_path_agrees_with_serial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 15;
        let s0 = random_state(n, &mut rng);
        let p = PauliString::new(n, 0b101000000001001, 0b100000010001100);
        let mut big = s0.clone();
        apply_pauli_rotation(&mut big, &p, 0.37);
        for r in [0usize, 17, 4095, 30000] {
            let src = r ^ p.x() as usize;
            let (row, phase) = p.apply_to_index(src as u64);
            assert_eq!(row as usize, r);
            let want = s0.amplitudes()[r] * 0.37f64.cos() + C64::new(0.0, -0.37f64.sin()) * phase * s0.amplitudes()[src];
            assert!((big.amplitudes()[r] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn norm_survives_many_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = random_state(6, &mut rng);
        for _ in 0..10_000 {
            let p = PauliString::new(6, rng.random_range(0..64), rng.random_range(0..64));
            apply_pauli_rotation(&mut s, &p, rng.random_range(-3.0..3.0));
        }
        assert!((s.norm() - 1.0).abs() < 1e-10, "{}", s.norm());
    }

    #[test]
    fn basis_preparation() {
        let layout = QubitLayout::new(3, 3, 0).unwrap();
        let s = prepare_basis_state(&layout, &RovibBasisState::vibrational(&[0, 0, 0])).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        let s = prepare_basis_state(&layout, &RovibBasisState::vibrational(&[0, 1, 0])).unwrap();
        assert_eq!(s.amplitudes()[0b000100], C64::new(1.0, 0.0));
        assert_eq!(s.norm(), 1.0);
        assert!(prepare_basis_state(&layout, &RovibBasisState::vibrational(&[4, 0, 0])).is_err());
    }
}
