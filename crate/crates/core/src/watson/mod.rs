//! Matrix representation of the Watson Hamiltonian over the product basis.

mod sparse;
mod terms;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use sparse::{dense_spectrum, dense_spectrum_with_limit, SparseHamiltonian, DEFAULT_DENSE_LIMIT};
pub use terms::{watson_terms, GroupMask, OperatorTerm, TermGroup};

use crate::basis::{BasisSpace, RovibBasisState};
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::operators::{angular_momentum, mode_word_matrix, Axis, ModeOp};
use crate::C64;

pub const HERMITICITY_TOL: f64 = 1e-9;

/// A term with its factors resolved to indices into per-register tables.
#[derive(Debug, Clone)]
pub struct FactorTerm {
    pub group: TermGroup,
    pub coefficient_cm1: f64,
    /// Mode words first (mode 1 first), rotation word last.
    pub factors: Vec<usize>,
}

/// Compiled Hamiltonian for a fixed (vmax, J).
#[derive(Debug, Clone)]
pub struct WatsonHamiltonian {
    space: BasisSpace,
    terms: Vec<OperatorTerm>,
    mode_words: Vec<Vec<ModeOp>>,
    mode_matrices: Vec<DMatrix<C64>>,
    rotation_words: Vec<Vec<Axis>>,
    rotation_matrices: Vec<DMatrix<C64>>,
    compiled: Vec<FactorTerm>,
}

impl WatsonHamiltonian {
    pub fn new(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, j: u32) -> Result<Self> {
        if frame.n_modes() != model.n_modes() {
            return Err(Error::invalid("frame and model disagree on the number of modes"));
        }
        let space = BasisSpace::new(model.n_modes(), vmax, j, &model.exchange_odd_modes);
        let terms = watson_terms(model, frame);

        let mut mode_index: BTreeMap<Vec<ModeOp>, usize> = BTreeMap::new();
        let mut rot_index: BTreeMap<Vec<Axis>, usize> = BTreeMap::new();
        for t in &terms {
            for w in &t.modes {
                let next = mode_index.len();
                mode_index.entry(w.clone()).or_insert(next);
            }
            let next = rot_index.len();
            rot_index.entry(t.rotation.clone()).or_insert(next);
        }
        let mut mode_words = vec![Vec::new(); mode_index.len()];
        for (w, &i) in &mode_index {
            mode_words[i] = w.clone();
        }
        let mut rotation_words = vec![Vec::new(); rot_index.len()];
        for (w, &i) in &rot_index {
            rotation_words[i] = w.clone();
        }
        let d = vmax + 1;
        let mode_matrices = mode_words.iter().map(|w| mode_word_matrix(w, d)).collect();
        let am = angular_momentum(j as i64)?;
        let rotation_matrices = rotation_words.iter().map(|w| am.word(w)).collect();

        let compiled = terms
            .iter()
            .map(|t| {
                let mut factors: Vec<usize> = t.modes.iter().map(|w| mode_index[w]).collect();
                factors.push(rot_index[&t.rotation]);
                FactorTerm {
                    group: t.group,
                    coefficient_cm1: t.coefficient_cm1,
                    factors,
                }
            })
            .collect();

        Ok(WatsonHamiltonian {
            space,
            terms,
            mode_words,
            mode_matrices,
            rotation_words,
            rotation_matrices,
            compiled,
        })
    }

    pub fn space(&self) -> &BasisSpace {
        &self.space
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn factor_terms(&self) -> &[FactorTerm] {
        &self.compiled
    }

    pub fn mode_words(&self) -> &[Vec<ModeOp>] {
        &self.mode_words
    }

    pub fn rotation_words(&self) -> &[Vec<Axis>] {
        &self.rotation_words
    }

    /// Table of factor matrices for register `r` (modes first, rotation last).
    pub fn register_table(&self, r: usize) -> &[DMatrix<C64>] {
        if r < self.space.n_modes {
            &self.mode_matrices
        } else {
            &self.rotation_matrices
        }
    }

    pub fn register_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.space.vmax + 1; self.space.n_modes];
        dims.push(self.space.rot_dim());
        dims
    }

    /// <b|H_mask|b'> in cm^-1.
    pub fn element_masked(&self, b: &RovibBasisState, bp: &RovibBasisState, mask: GroupMask) -> Result<C64> {
        if b.j != bp.j {
            return Err(Error::invalid(format!("mismatched J: {} vs {}", b.j, bp.j)));
        }
        self.space.check(b)?;
        self.space.check(bp)?;
        Ok(self.element_unchecked(b, bp, mask))
    }

    pub fn element(&self, b: &RovibBasisState, bp: &RovibBasisState) -> Result<C64> {
        self.element_masked(b, bp, GroupMask::FULL)
    }

    pub(crate) fn element_unchecked(&self, b: &RovibBasisState, bp: &RovibBasisState, mask: GroupMask) -> C64 {
        let n = self.space.n_modes;
        let row_m = (b.k + b.j as i32) as usize;
        let col_m = (bp.k + bp.j as i32) as usize;
        let mut sum = C64::new(0.0, 0.0);
        'terms: for t in &self.compiled {
            if !mask.contains(t.group) {
                continue;
            }
            let mut value = self.rotation_matrices[t.factors[n]][(row_m, col_m)];
            if value == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let f = self.mode_matrices[t.factors[k]][(b.v[k] as usize, bp.v[k] as usize)];
                if f == C64::new(0.0, 0.0) {
                    continue 'terms;
                }
                value *= f;
            }
            sum += value * t.coefficient_cm1;
        }
        sum
    }

    /// Sparse matrix of the selected groups, assembled by Kronecker products
    /// of the per-register factors.
    pub fn build(&self, mask: GroupMask) -> Result<SparseHamiltonian> {
        let selected: Vec<&FactorTerm> = self.compiled.iter().filter(|t| mask.contains(t.group)).collect();
        let dims = self.register_dims();
        let triplets = assemble(&selected, &dims, |r, f| &self.register_table(r)[f]);
        let h = SparseHamiltonian::from_triplets(self.space.clone(), mask, triplets);
        let residue = h.hermiticity_residual();
        if residue > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residue });
        }
        Ok(h)
    }

    pub fn subspace_matrix(&self, states: &[RovibBasisState], mask: GroupMask) -> Result<DMatrix<C64>> {
        for s in states {
            self.space.check(s)?;
        }
        let n = states.len();
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.element_unchecked(&states[i], &states[j], mask)).collect())
            .collect();
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

type Triplets = Vec<(usize, usize, C64)>;

fn nonzeros(m: &DMatrix<C64>) -> Triplets {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                out.push((i, j, m[(i, j)]));
            }
        }
    }
    out
}

/// Sum over terms of coefficient * kron(factor_0, ..., factor_last), as sorted
/// triplets. Terms sharing a leading factor are summed below it first.
pub(crate) fn assemble<'a, F>(terms: &[&FactorTerm], dims: &[usize], table: F) -> Triplets
where
    F: Fn(usize, usize) -> &'a DMatrix<C64> + Sync,
{
    fn level<'a, F>(terms: &[&FactorTerm], r: usize, dims: &[usize], table: &F) -> Triplets
    where
        F: Fn(usize, usize) -> &'a DMatrix<C64> + Sync,
    {
        let last = dims.len() - 1;
        if r == last {
            let mut m = DMatrix::<C64>::zeros(dims[r], dims[r]);
            for t in terms {
                m += table(r, t.factors[r]) * C64::new(t.coefficient_cm1, 0.0);
            }
            return nonzeros(&m);
        }
        let mut groups: BTreeMap<usize, Vec<&FactorTerm>> = BTreeMap::new();
        for t in terms {
            groups.entry(t.factors[r]).or_default().push(t);
        }
        let sub_dim: usize = dims[r + 1..].iter().product();
        let groups: Vec<(usize, Vec<&FactorTerm>)> = groups.into_iter().collect();
        let parts: Vec<(usize, Triplets)> = if r == 0 {
            groups
                .par_iter()
                .map(|(f, g)| (*f, level(g, r + 1, dims, table)))
                .collect()
        } else {
            groups.iter().map(|(f, g)| (*f, level(g, r + 1, dims, table))).collect()
        };
        let mut acc: std::collections::HashMap<(usize, usize), C64> = std::collections::HashMap::new();
        for (f, sub) in &parts {
            for (i, j, fv) in nonzeros(table(r, *f)) {
                for &(a, b, sv) in sub {
                    *acc.entry((i * sub_dim + a, j * sub_dim + b)).or_insert(C64::new(0.0, 0.0)) += fv * sv;
                }
            }
        }
        let mut out: Triplets = acc.into_iter().filter(|(_, v)| *v != C64::new(0.0, 0.0)).map(|((i, j), v)| (i, j, v)).collect();
        out.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        out
    }
    if terms.is_empty() {
        return Vec::new();
    }
    level(terms, 0, dims, &table)
}

pub fn build_group(
    model: &MoleculeModel,
    frame: &DerivedFrame,
    vmax: usize,
    j: u32,
    group: TermGroup,
) -> Result<SparseHamiltonian> {
    WatsonHamiltonian::new(model, frame, vmax, j)?.build(GroupMask::only(group))
}

pub fn build_full(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, j: u32) -> Result<SparseHamiltonian> {
    WatsonHamiltonian::new(model, frame, vmax, j)?.build(GroupMask::FULL)
}

/// Single element of the full Hamiltonian at the model's vmax.
pub fn matrix_element(
    b: &RovibBasisState,
    bp: &RovibBasisState,
    model: &MoleculeModel,
    frame: &DerivedFrame,
) -> Result<C64> {
    if b.j != bp.j {
        return Err(Error::invalid(format!("mismatched J: {} vs {}", b.j, bp.j)));
    }
    let vmax = model.vmax.max(b.v.iter().chain(&bp.v).copied().max().unwrap_or(0) as usize);
    WatsonHamiltonian::new(model, frame, vmax, b.j)?.element(b, bp)
}

#[cfg(test)]
mod tests;
