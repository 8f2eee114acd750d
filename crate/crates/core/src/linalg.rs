//! Hermitian eigensolvers: dense for small problems, Davidson for the lowest
//! few eigenpairs of large ones.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// One normalized eigenvector per column.
    pub vectors: DMatrix<C64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }
}

/// Rotates each column so its largest-magnitude component is real and positive.
fn fix_phases(vectors: &mut DMatrix<C64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (i, z) in col.iter().enumerate() {
            // Prefer the first index among near-equal magnitudes.
            if z.norm() > best_norm * (1.0 + 1e-9) {
                best = i;
                best_norm = z.norm();
            }
        }
        if best_norm > 0.0 {
            let phase = col[best].conj() / best_norm;
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

fn sorted(values: Vec<f64>, vectors: DMatrix<C64>) -> EigenPairs {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut v = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    fix_phases(&mut v);
    EigenPairs {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: v,
    }
}

/// Full eigendecomposition of a Hermitian matrix; real arithmetic when the
/// imaginary part vanishes.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> EigenPairs {
    assert_eq!(m.nrows(), m.ncols(), "square matrix expected");
    if m.nrows() == 0 {
        return EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        sorted(
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(m.clone());
        sorted(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

/// Largest entrywise |M - M^dagger|.
pub fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub struct DavidsonOptions {
    pub n_roots: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_subspace: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            n_roots: 4,
            tolerance: 1e-10,
            max_iterations: 500,
            max_subspace: 64,
        }
    }
}

fn orthonormalize_against(v: &mut DVector<C64>, basis: &[DVector<C64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(v);
            *v -= b * c;
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        *v /= C64::new(norm, 0.0);
    }
    norm
}

/// Lowest eigenpairs of a Hermitian operator given by its action and its
/// diagonal. Converged when every residual norm is below
/// `tolerance * max(1, |theta|)`.
pub fn davidson<F>(apply: F, diagonal: &[f64], opts: &DavidsonOptions) -> Result<EigenPairs>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let n = diagonal.len();
    let roots = opts.n_roots.min(n);
    if roots == 0 {
        return Err(Error::invalid("Davidson needs at least one root"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diagonal[a].total_cmp(&diagonal[b]).then(a.cmp(&b)));

    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut images: Vec<DVector<C64>> = Vec::new();
    for &i in order.iter().take((2 * roots).min(n)) {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        if orthonormalize_against(&mut v, &basis) > 1e-8 {
            images.push(apply(&v));
            basis.push(v);
        }
    }

    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let k = basis.len();
        let small = DMatrix::from_fn(k, k, |i, j| basis[i].dotc(&images[j]));
        let small = (&small + small.adjoint()) * C64::new(0.5, 0.0);
        let eig = hermitian_eigen(&small);

        let mut ritz = Vec::with_capacity(roots);
        let mut corrections = Vec::new();
        worst = 0.0f64;
        for r in 0..roots {
            let y = eig.vectors.column(r);
            let mut x = DVector::<C64>::zeros(n);
            let mut ax = DVector::<C64>::zeros(n);
            for j in 0..k {
                x += &basis[j] * y[j];
                ax += &images[j] * y[j];
            }
            let theta = eig.values[r];
            let residual = &ax - &x * C64::new(theta, 0.0);
            let rnorm = residual.norm();
            let scaled = rnorm / theta.abs().max(1.0);
            worst = worst.max(scaled);
            if scaled > opts.tolerance {
                // Olsen correction: t = M^-1 r - eps M^-1 x, orthogonal to x in the M metric.
                let inv = |i: usize| {
                    let denom = diagonal[i] - theta;
                    if denom.abs() < 1e-8 {
                        1e8f64.copysign(denom)
                    } else {
                        1.0 / denom
                    }
                };
                let mr = DVector::from_fn(n, |i, _| residual[i] * inv(i));
                let mx = DVector::from_fn(n, |i, _| x[i] * inv(i));
                let eps = x.dotc(&mr) / x.dotc(&mx);
                corrections.push(&mr - &mx * eps);
            }
            ritz.push((theta, x, ax));
        }
        if corrections.is_empty() {
            let values = ritz.iter().map(|r| r.0).collect();
            let vectors = DMatrix::from_columns(&ritz.iter().map(|r| r.1.clone()).collect::<Vec<_>>());
            return Ok(sorted(values, vectors));
        }
        if basis.len() + corrections.len() > opts.max_subspace.max(3 * roots) {
            let mut fresh = Vec::new();
            for (_, v, _) in &ritz {
                let mut v = v.clone();
                if orthonormalize_against(&mut v, &fresh) > 1e-10 {
                    fresh.push(v);
                }
            }
            images = fresh.iter().map(&apply).collect();
            basis = fresh;
        }
        let mut added = false;
        for mut t in corrections {
            let norm = t.norm();
            if norm == 0.0 || !norm.is_finite() {
                continue;
            }
            t /= C64::new(norm, 0.0);
            if orthonormalize_against(&mut t, &basis) > 1e-6 {
                images.push(apply(&t));
                basis.push(t);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut h = &a + a.adjoint();
        for i in 0..n {
            h[(i, i)] += C64::new(i as f64, 0.0);
        }
        h
    }

    #[test]
    fn identity_spectrum() {
        let eig = hermitian_eigen(&DMatrix::identity(5, 5));
        assert!(eig.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_reconstruct() {
        let h = random_hermitian(12, 3);
        let eig = hermitian_eigen(&h);
        let v = &eig.vectors;
        let gram = v.adjoint() * v;
        assert!((gram - DMatrix::identity(12, 12)).camax() < 1e-10);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(12, eig.values.iter().map(|&x| C64::new(x, 0.0))));
        assert!((v * d * v.adjoint() - &h).camax() < 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn davidson_matches_dense() {
        let h = random_hermitian(300, 7);
        let diag: Vec<f64> = (0..300).map(|i| h[(i, i)].re).collect();
        let opts = DavidsonOptions {
            n_roots: 3,
            ..Default::default()
        };
        let it = davidson(|x| &h * x, &diag, &opts).unwrap();
        let dense = hermitian_eigen(&h);
        for r in 0..3 {
            assert!((it.values[r] - dense.values[r]).abs() < 1e-8, "{} vs {}", it.values[r], dense.values[r]);
            let overlap = dense.vector(r).dotc(&it.vector(r)).norm();
            assert!((overlap - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn residual_detects_asymmetry() {
        let mut m = DMatrix::<C64>::identity(3, 3);
        assert_eq!(hermiticity_residual(&m), 0.0);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        assert!((hermiticity_residual(&m) - 2.0).abs() < 1e-15);
    }
}
