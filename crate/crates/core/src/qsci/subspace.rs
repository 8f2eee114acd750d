use nalgebra::{DMatrix, DVector};

use super::basis_set::{union_basis, BasisSet};
use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::linalg::{davidson, hermitian_eigen, DavidsonOptions, EigenPairs};
use crate::watson::{GroupMask, WatsonHamiltonian};
use crate::C64;

/// Subspaces up to this size are diagonalized densely.
pub const DENSE_SUBSPACE_LIMIT: usize = 2000;

/// Overlap eigenvalues below this are dropped in canonical orthogonalization.
pub const CANONICAL_CUTOFF: f64 = 1e-8;

/// Overlaps closer than this count as a tie.
const OVERLAP_TIE: f64 = 1e-12;

/// H restricted to `omega`, element by element.
pub fn subspace_hamiltonian(w: &WatsonHamiltonian, omega: &BasisSet) -> Result<DMatrix<C64>> {
    if omega.is_empty() {
        return Err(Error::invalid("empty basis set"));
    }
    let j = omega.states()[0].j;
    if let Some(s) = omega.states().iter().find(|s| s.j != j) {
        return Err(Error::invalid(format!("basis set mixes J = {j} with {s}")));
    }
    w.subspace_matrix(omega.states(), GroupMask::FULL)
}

/// All eigenpairs for small subspaces, otherwise the lowest `n_roots` by Davidson.
pub fn solve_subspace(h: &DMatrix<C64>, n_roots: usize) -> Result<EigenPairs> {
    if h.nrows() <= DENSE_SUBSPACE_LIMIT {
        return Ok(hermitian_eigen(h));
    }
    let diagonal: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
    let opts = DavidsonOptions {
        n_roots: n_roots.min(h.nrows()),
        ..DavidsonOptions::default()
    };
    davidson(|v| h * v, &diagonal, &opts)
}

/// Index of the eigenvector with the largest |<reference|phi>|; ties go to
/// the lower energy.
pub fn pick_by_overlap(eig: &EigenPairs, reference_pos: usize) -> usize {
    pick_by_manifold(eig, &[reference_pos], 1)[0]
}

/// The `count` eigenvectors with the most weight on the basis positions
/// `positions`, returned in ascending energy.
pub fn pick_by_manifold(eig: &EigenPairs, positions: &[usize], count: usize) -> Vec<usize> {
    let weight = |c: usize| positions.iter().map(|&p| eig.vectors[(p, c)].norm_sqr()).sum::<f64>();
    let weights: Vec<f64> = (0..eig.len()).map(weight).collect();
    let mut order: Vec<usize> = (0..eig.len()).collect();
    order.sort_by(|&a, &b| {
        if (weights[a] - weights[b]).abs() <= OVERLAP_TIE {
            a.cmp(&b)
        } else {
            weights[b].total_cmp(&weights[a])
        }
    });
    let mut picked: Vec<usize> = order.into_iter().take(count).collect();
    picked.sort_unstable();
    picked
}

/// An eigenstate of one subspace problem.
#[derive(Debug, Clone)]
pub struct PickedState {
    pub reference: RovibBasisState,
    pub energy_cm1: f64,
    pub basis: BasisSet,
    pub coefficients: DVector<C64>,
}

impl PickedState {
    fn in_basis(&self, target: &BasisSet) -> DVector<C64> {
        let mut v = DVector::zeros(target.len());
        for (s, c) in self.basis.states().iter().zip(self.coefficients.iter()) {
            v[target.position(s).expect("target contains every source state")] = *c;
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct Combination {
    /// Ascending.
    pub energies_cm1: Vec<f64>,
    /// Union of the input bases; the coordinates of `vectors`.
    pub basis: BasisSet,
    /// One column per energy.
    pub vectors: DMatrix<C64>,
    /// Share of each level (row) carried by each input state (column).
    pub weights: DMatrix<f64>,
    /// Largest |<phi_a|phi_b>| over a != b.
    pub max_offdiag_overlap: f64,
}

/// Canonical orthogonalization of the picked states followed by
/// diagonalization of H in their span.
pub fn combine_references(picked: &[PickedState], w: &WatsonHamiltonian) -> Result<Combination> {
    let n = picked.len();
    if n == 0 {
        return Err(Error::invalid("nothing to combine"));
    }
    let basis = union_basis(picked.iter().map(|p| &p.basis));
    let phi = DMatrix::from_columns(&picked.iter().map(|p| p.in_basis(&basis)).collect::<Vec<_>>());
    let h_union = subspace_hamiltonian(w, &basis)?;
    let s = phi.adjoint() * &phi;
    let h = phi.adjoint() * h_union * &phi;

    let mut max_offdiag_overlap: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                max_offdiag_overlap = max_offdiag_overlap.max(s[(a, b)].norm());
            }
        }
    }

    let s_eig = hermitian_eigen(&s);
    let kept: Vec<usize> = (0..n).filter(|&i| s_eig.values[i] > CANONICAL_CUTOFF).collect();
    if kept.len() < n {
        return Err(Error::RankDeficient { rank: kept.len(), requested: n });
    }
    let x = DMatrix::from_columns(
        &kept
            .iter()
            .map(|&i| s_eig.vector(i) / C64::new(s_eig.values[i].sqrt(), 0.0))
            .collect::<Vec<_>>(),
    );
    let h_orth = x.adjoint() * &h * &x;
    let h_orth = (&h_orth + h_orth.adjoint()) * C64::new(0.5, 0.0);
    let eig = hermitian_eigen(&h_orth);
    // Coefficients of each level on the picked states.
    let y = &x * &eig.vectors;
    let sy = &s * &y;
    let weights = DMatrix::from_fn(n, n, |level, a| (y[(a, level)].conj() * sy[(a, level)]).re);
    Ok(Combination {
        energies_cm1: eig.values.clone(),
        vectors: &phi * y,
        basis,
        weights,
        max_offdiag_overlap,
    })
}

/// One-to-one assignment of levels (rows of `weights`) to groups of input
/// states, largest weights first; `group_of[a]` is the group of column a and
/// each group takes as many levels as it has columns.
pub fn assign_levels(weights: &DMatrix<f64>, group_of: &[usize]) -> Vec<usize> {
    let n_groups = group_of.iter().max().map_or(0, |g| g + 1);
    let mut capacity = vec![0usize; n_groups];
    for &g in group_of {
        capacity[g] += 1;
    }
    let mut by_group = DMatrix::<f64>::zeros(weights.nrows(), n_groups);
    for level in 0..weights.nrows() {
        for (a, &g) in group_of.iter().enumerate() {
            by_group[(level, g)] += weights[(level, a)];
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..weights.nrows()).flat_map(|l| (0..n_groups).map(move |g| (l, g))).collect();
    pairs.sort_by(|a, b| by_group[(b.0, b.1)].total_cmp(&by_group[(a.0, a.1)]).then(a.cmp(b)));
    let mut out = vec![usize::MAX; weights.nrows()];
    for (l, g) in pairs {
        if out[l] == usize::MAX && capacity[g] > 0 {
            out[l] = g;
            capacity[g] -= 1;
        }
    }
    out
}
