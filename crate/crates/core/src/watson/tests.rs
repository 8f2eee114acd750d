use super::*;
use crate::linalg::hermitian_eigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn h2o() -> (MoleculeModel, DerivedFrame) {
    let m = MoleculeModel::h2o();
    let f = DerivedFrame::new(&m).unwrap();
    (m, f)
}

fn lowest(h: &SparseHamiltonian, n: usize) -> Vec<f64> {
    dense_spectrum(h, n).unwrap().values
}

#[test]
fn harmonic_ground_state() {
    let (m, f) = h2o();
    let h = build_group(&m, &f, 3, 0, TermGroup::Harmonic).unwrap();
    assert!(h.triplets().iter().all(|&(i, j, _)| i == j));
    let zpe: f64 = m.omega_cm1.iter().sum::<f64>() / 2.0;
    assert!((h.get(0, 0).re - zpe).abs() < 1e-10);
    assert!((zpe - 4710.5).abs() < 0.05);
    let w = WatsonHamiltonian::new(&m, &f, 3, 0).unwrap();
    let g = RovibBasisState::vibrational(&[0, 0, 0]);
    let e = w.element_masked(&g, &g, GroupMask::only(TermGroup::Harmonic)).unwrap();
    assert!((e.re - zpe).abs() < 1e-10);
}

#[test]
fn rovib_vanishes_without_rotation() {
    let (m, f) = h2o();
    assert_eq!(build_group(&m, &f, 3, 0, TermGroup::Rovib).unwrap().nnz(), 0);
    assert_eq!(build_group(&m, &f, 3, 0, TermGroup::RigidRotor).unwrap().nnz(), 0);
}

#[test]
fn vibrational_coriolis_shift_of_001() {
    let (m, f) = h2o();
    let w = WatsonHamiltonian::new(&m, &f, 3, 0).unwrap();
    let without = GroupMask::FULL.without(TermGroup::VibCoriolis).without(TermGroup::Rovib);
    let a = lowest(&w.build(without).unwrap(), 5);
    let b = lowest(&w.build(GroupMask::FULL).unwrap(), 5);
    assert!((a[4] - a[0] - 3782.6).abs() < 0.2, "{}", a[4] - a[0]);
    assert!((b[4] - b[0] - 3797.0).abs() < 0.2, "{}", b[4] - b[0]);
}

#[test]
fn full_spectrum_vmax3() {
    let (m, f) = h2o();
    let e = lowest(&build_full(&m, &f, 3, 0).unwrap(), 5);
    assert!((e[0] - 4641.5).abs() < 0.1, "{}", e[0]);
    for (got, want) in e[1..].iter().map(|x| x - e[0]).zip([1590.2, 3162.0, 3715.8, 3797.0]) {
        assert!((got - want).abs() < 0.1, "{got} vs {want}");
    }
}

#[test]
fn groups_sum_to_full() {
    let (m, f) = h2o();
    let w = WatsonHamiltonian::new(&m, &f, 3, 1).unwrap();
    let full = w.build(GroupMask::FULL).unwrap().to_dense();
    let mut sum = DMatrix::<C64>::zeros(full.nrows(), full.ncols());
    for g in TermGroup::ALL {
        sum += w.build(GroupMask::only(g)).unwrap().to_dense();
    }
    assert!((full - sum).camax() < 1e-12 * 1e4);
}

#[test]
fn hermitian_with_rotation() {
    let (m, f) = h2o();
    for j in 1..=3 {
        let h = build_full(&m, &f, 3, j).unwrap();
        assert!(h.hermiticity_residual() < HERMITICITY_TOL);
    }
}

#[test]
fn element_matches_full_matrix() {
    let (m, f) = h2o();
    let w = WatsonHamiltonian::new(&m, &f, 3, 1).unwrap();
    let h = w.build(GroupMask::FULL).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = w.space().clone();
    for _ in 0..500 {
        let i = rng.random_range(0..s.dim());
        let j = rng.random_range(0..s.dim());
        let e = w.element(&s.state(i), &s.state(j)).unwrap();
        assert!((e - h.get(i, j)).norm() < 1e-10);
    }
    let a = s.state(3);
    let b = RovibBasisState::vibrational(&[0, 0, 0]);
    assert!(w.element(&a, &b).is_err());
    let mut m3 = m.clone();
    m3.vmax = 3;
    let e = matrix_element(&s.state(5), &s.state(17), &m3, &f).unwrap();
    assert!((e - h.get(5, 17)).norm() < 1e-10);
}

#[test]
fn selection_rules_give_exact_zeros() {
    let (m, f) = h2o();
    let w = WatsonHamiltonian::new(&m, &f, 7, 3).unwrap();
    let s = w.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 1000 {
        let a = s.state(rng.random_range(0..s.dim()));
        let b = s.state(rng.random_range(0..s.dim()));
        let dk = (a.k - b.k).abs();
        let dv = a.v.iter().zip(&b.v).map(|(x, y)| x.abs_diff(*y)).max().unwrap();
        if dk > 2 || dv > 4 {
            assert_eq!(w.element(&a, &b).unwrap(), C64::new(0.0, 0.0), "{a} {b}");
            checked += 1;
        }
    }
}

#[test]
fn parity_blocks_decouple() {
    let (m, f) = h2o();
    let h = build_full(&m, &f, 3, 2).unwrap();
    for &(i, j, v) in h.triplets() {
        let (a, b) = (h.space.state(i), h.space.state(j));
        assert_eq!(h.space.parity(&a), h.space.parity(&b), "{a} {b} {v}");
    }
    let w = WatsonHamiltonian::new(&m, &f, 3, 0).unwrap();
    let odd = RovibBasisState::vibrational(&[0, 0, 1]);
    let even = RovibBasisState::vibrational(&[0, 0, 0]);
    assert_eq!(w.element(&odd, &even).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn larger_basis_lowers_ground_state() {
    let (m, f) = h2o();
    let e3 = lowest(&build_full(&m, &f, 3, 0).unwrap(), 1)[0];
    let e5 = lowest(&build_full(&m, &f, 5, 0).unwrap(), 1)[0];
    assert!(e5 <= e3);
}

#[test]
fn dense_limit_is_enforced() {
    let (m, f) = h2o();
    let h = build_full(&m, &f, 1, 0).unwrap();
    assert!(matches!(dense_spectrum_with_limit(&h, 1, 4), Err(Error::DimensionLimit { .. })));
}

#[test]
fn eigenvectors_orthonormal() {
    let (m, f) = h2o();
    let eig = dense_spectrum(&build_full(&m, &f, 3, 1).unwrap(), 192).unwrap();
    let gram = eig.vectors.adjoint() * &eig.vectors;
    assert!((gram - DMatrix::identity(192, 192)).camax() < 1e-10);
}

#[test]
fn dump_round_trip() {
    let (m, f) = h2o();
    let h = build_full(&m, &f, 1, 1).unwrap();
    let mut buf = Vec::new();
    h.write_dump(&mut buf).unwrap();
    let back = SparseHamiltonian::read_dump(std::io::Cursor::new(buf), &m.exchange_odd_modes).unwrap();
    assert_eq!(back, h);
}

#[test]
fn subspace_matrix_is_submatrix() {
    let (m, f) = h2o();
    let w = WatsonHamiltonian::new(&m, &f, 3, 0).unwrap();
    let h = w.build(GroupMask::FULL).unwrap();
    let idx = [0usize, 5, 9, 40, 63];
    let states: Vec<_> = idx.iter().map(|&i| w.space().state(i)).collect();
    let sub = w.subspace_matrix(&states, GroupMask::FULL).unwrap();
    assert!((sub - h.submatrix(&idx)).camax() < 1e-10);
    let eig = hermitian_eigen(&h.submatrix(&idx));
    assert!(eig.values[0] >= lowest(&h, 1)[0] - 1e-9);
}
