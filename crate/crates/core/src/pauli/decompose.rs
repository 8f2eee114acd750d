use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::encoding::QubitLayout;
use super::string::{i_power, PauliString};
use super::sum::PauliSum;
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::watson::{FactorTerm, GroupMask, WatsonHamiltonian};
use crate::C64;

/// Largest register the trace method accepts (4^N coefficients).
pub const MAX_TRACE_QUBITS: usize = 10;

/// Coefficients with |h| at or below this many cm^-1 (about 1.0e-10 E_h) are dropped.
pub const DEFAULT_DROP_CM1: f64 = 2.2e-5;

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub sum: PauliSum,
    /// Largest |Im h| encountered before taking real parts.
    pub max_imaginary: f64,
}

type PauliMap = Vec<((u64, u64), C64)>;

fn log2_exact(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

fn walsh_hadamard(f: &mut [C64]) {
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// All 4^N coefficients h(x, z) = 2^-N tr(P_{x,z} M), via one Walsh-Hadamard
/// transform per X mask: tr(P M) = i^{|x&z|} sum_r (-1)^{z.r} M[r, r^x].
fn trace_coefficients(m: &DMatrix<C64>, n: usize) -> Vec<(u64, Vec<C64>)> {
    let dim = 1usize << n;
    let scale = 1.0 / dim as f64;
    (0..dim as u64)
        .into_par_iter()
        .map(|x| {
            let mut f: Vec<C64> = (0..dim).map(|r| m[(r, r ^ x as usize)]).collect();
            walsh_hadamard(&mut f);
            for (z, c) in f.iter_mut().enumerate() {
                *c *= i_power((x & z as u64).count_ones()) * scale;
            }
            (x, f)
        })
        .collect()
}

/// Exact Pauli map of a small matrix; entries below 1e-13 of the largest are
/// treated as roundoff.
fn small_map(m: &DMatrix<C64>) -> PauliMap {
    let n = log2_exact(m.nrows()).expect("padded factor");
    let all = trace_coefficients(m, n);
    let largest = all.iter().flat_map(|(_, f)| f.iter()).map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for (x, f) in all {
        for (z, c) in f.into_iter().enumerate() {
            if c.norm() > 1e-13 * largest {
                out.push(((x, z as u64), c));
            }
        }
    }
    out
}

fn finish(n_qubits: usize, map: impl IntoIterator<Item = ((u64, u64), C64)>, drop_tol: f64) -> Decomposition {
    let mut max_imaginary: f64 = 0.0;
    let mut terms = Vec::new();
    for ((x, z), c) in map {
        max_imaginary = max_imaginary.max(c.im.abs());
        if c.re.abs() > drop_tol {
            terms.push((c.re, PauliString::new(n_qubits, x, z)));
        }
    }
    terms.sort_by(|a, b| a.1.cmp(&b.1));
    Decomposition {
        sum: PauliSum::from_sorted(n_qubits, terms),
        max_imaginary,
    }
}

pub fn pauli_decompose_trace(m: &DMatrix<C64>) -> Result<Decomposition> {
    pauli_decompose_trace_with(m, DEFAULT_DROP_CM1)
}

/// Reference decomposition of a 2^N x 2^N matrix, N <= MAX_TRACE_QUBITS.
pub fn pauli_decompose_trace_with(m: &DMatrix<C64>, drop_tol: f64) -> Result<Decomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let n = log2_exact(m.nrows())
        .ok_or_else(|| Error::invalid(format!("dimension {} is not a power of two", m.nrows())))?;
    if n > MAX_TRACE_QUBITS {
        return Err(Error::DimensionLimit {
            dim: n,
            limit: MAX_TRACE_QUBITS,
        });
    }
    let map = trace_coefficients(m, n)
        .into_iter()
        .flat_map(|(x, f)| f.into_iter().enumerate().map(move |(z, c)| ((x, z as u64), c)));
    Ok(finish(n, map, drop_tol))
}

/// Places `m` on a 2^bits register, row/column i going to codes[i].
fn pad(m: &DMatrix<C64>, bits: usize, codes: &[usize]) -> DMatrix<C64> {
    let dim = 1usize << bits;
    let mut out = DMatrix::zeros(dim, dim);
    for (r, &cr) in codes.iter().enumerate() {
        for (c, &cc) in codes.iter().enumerate() {
            out[(cr, cc)] = m[(r, c)];
        }
    }
    out
}

/// Decomposes each Hamiltonian term register by register and combines the
/// small Pauli maps with tensor products; never forms the 2^N matrix.
pub fn factored_decomposition(w: &WatsonHamiltonian, mask: GroupMask, drop_tol: f64) -> Result<Decomposition> {
    factored_decomposition_on(w, &QubitLayout::for_space(w.space())?, mask, drop_tol)
}

pub fn factored_decomposition_on(
    w: &WatsonHamiltonian,
    layout: &QubitLayout,
    mask: GroupMask,
    drop_tol: f64,
) -> Result<Decomposition> {
    let space = w.space();
    if (layout.n_modes, layout.vmax, layout.j) != (space.n_modes, space.vmax, space.j) {
        return Err(Error::invalid("qubit layout does not match the Hamiltonian basis"));
    }
    let bits = layout.register_bits();
    let n_registers = bits.len();
    let selected: Vec<&FactorTerm> = w.factor_terms().iter().filter(|t| mask.contains(t.group)).collect();

    // Mode registers share one table; decompose each used word once.
    let mode_codes = layout.register_codes(0);
    let used_modes: BTreeSet<usize> = selected.iter().flat_map(|t| t.factors[..n_registers - 1].iter().copied()).collect();
    let mode_maps: HashMap<usize, PauliMap> = used_modes
        .into_iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&f| (f, small_map(&pad(&w.register_table(0)[f], layout.mode_bits, &mode_codes))))
        .collect();
    let rot_codes = layout.register_codes(n_registers - 1);

    fn level(
        terms: &[&FactorTerm],
        r: usize,
        bits: &[usize],
        w: &WatsonHamiltonian,
        mode_maps: &HashMap<usize, PauliMap>,
        rot_codes: &[usize],
    ) -> PauliMap {
        let last = bits.len() - 1;
        if r == last {
            let table = w.register_table(r);
            let mut m = DMatrix::<C64>::zeros(table[0].nrows(), table[0].ncols());
            for t in terms {
                m += &table[t.factors[r]] * C64::new(t.coefficient_cm1, 0.0);
            }
            return small_map(&pad(&m, bits[r], rot_codes));
        }
        let mut groups: BTreeMap<usize, Vec<&FactorTerm>> = BTreeMap::new();
        for t in terms {
            groups.entry(t.factors[r]).or_default().push(t);
        }
        let groups: Vec<(usize, Vec<&FactorTerm>)> = groups.into_iter().collect();
        let sub_bits: usize = bits[r + 1..].iter().sum();
        let parts: Vec<(usize, PauliMap)> = if r == 0 {
            groups.par_iter().map(|(f, g)| (*f, level(g, r + 1, bits, w, mode_maps, rot_codes))).collect()
        } else {
            groups.iter().map(|(f, g)| (*f, level(g, r + 1, bits, w, mode_maps, rot_codes))).collect()
        };
        let mut acc: HashMap<(u64, u64), C64> = HashMap::new();
        for (f, sub) in &parts {
            for &((xf, zf), cf) in &mode_maps[f] {
                for &((xs, zs), cs) in sub {
                    *acc.entry(((xf << sub_bits) | xs, (zf << sub_bits) | zs)).or_insert(C64::new(0.0, 0.0)) += cf * cs;
                }
            }
        }
        let mut out: PauliMap = acc.into_iter().filter(|(_, c)| *c != C64::new(0.0, 0.0)).collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    let map = if selected.is_empty() {
        Vec::new()
    } else {
        level(&selected, 0, &bits, w, &mode_maps, &rot_codes)
    };
    Ok(finish(layout.n_qubits(), map, drop_tol))
}

/// Qubit Hamiltonian of the full Watson Hamiltonian at (vmax, J).
pub fn pauli_decompose_factored(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, j: u32) -> Result<PauliSum> {
    let w = WatsonHamiltonian::new(model, frame, vmax, j)?;
    Ok(factored_decomposition(&w, GroupMask::FULL, DEFAULT_DROP_CM1)?.sum)
}
