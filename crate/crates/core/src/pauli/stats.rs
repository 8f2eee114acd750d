use std::collections::BTreeMap;

use super::decompose::{factored_decomposition, DEFAULT_DROP_CM1};
use super::encoding::bits_for;
use super::sum::PauliSum;
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::watson::{GroupMask, WatsonHamiltonian};

#[derive(Debug, Clone, PartialEq)]
pub struct TermStatistics {
    /// Number of terms per weight; index 0 is the identity string.
    pub by_weight: Vec<usize>,
    /// |h| in descending order.
    pub magnitudes: Vec<f64>,
    /// |h| at the 0%, 10%, ..., 100% quantiles of the descending list.
    pub deciles: Vec<f64>,
}

impl TermStatistics {
    pub fn non_identity(&self) -> usize {
        self.by_weight.iter().skip(1).sum()
    }
}

pub fn term_statistics(sum: &PauliSum) -> Result<TermStatistics> {
    if sum.is_empty() {
        return Err(Error::invalid("term statistics of an empty Pauli sum"));
    }
    let mut by_weight = vec![0; sum.n_qubits() + 1];
    for (_, p) in sum.iter() {
        by_weight[p.weight()] += 1;
    }
    let mut magnitudes: Vec<f64> = sum.iter().map(|t| t.0.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let last = magnitudes.len() - 1;
    let deciles = (0..=10).map(|d| magnitudes[(d * last + 5) / 10]).collect();
    Ok(TermStatistics {
        by_weight,
        magnitudes,
        deciles,
    })
}

/// sqrt(n) for n = product of the step factors, as (s, f) with sqrt(n) = s sqrt(f)
/// and f square-free.
fn split_square(factors: &[u64]) -> (i128, u64) {
    let mut exponents: BTreeMap<u64, u32> = BTreeMap::new();
    for &n in factors {
        let mut n = n;
        let mut p = 2;
        while p * p <= n {
            while n % p == 0 {
                *exponents.entry(p).or_insert(0) += 1;
                n /= p;
            }
            p += 1;
        }
        if n > 1 {
            *exponents.entry(n).or_insert(0) += 1;
        }
    }
    let mut s = 1i128;
    let mut f = 1u64;
    for (p, e) in exponents {
        s *= (p as i128).pow(e / 2);
        if e % 2 == 1 {
            f *= p;
        }
    }
    (s, f)
}

/// 2^(ell/2) <row|q^ell|col> as integer coefficients of square roots of
/// square-free numbers, summed over ladder paths.
fn exact_q_power_element(ell: usize, row: usize, col: usize) -> BTreeMap<u64, i128> {
    let mut out: BTreeMap<u64, i128> = BTreeMap::new();
    for path in 0..(1u32 << ell) {
        let mut v = col as i64;
        let mut factors = Vec::with_capacity(ell);
        let mut alive = true;
        for step in 0..ell {
            if (path >> step) & 1 == 1 {
                v += 1;
                factors.push(v as u64);
            } else {
                if v == 0 {
                    alive = false;
                    break;
                }
                factors.push(v as u64);
                v -= 1;
            }
        }
        if alive && v == row as i64 {
            let (s, f) = split_square(&factors);
            *out.entry(f).or_insert(0) += s;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Number of Pauli strings in the binary-encoded q^ell on 2^eta levels,
/// decided in exact arithmetic: square roots of distinct square-free
/// integers are linearly independent over the rationals, so a coefficient
/// vanishes only if every square-free component does.
pub fn q_power_term_count(ell: usize, eta: usize) -> Result<usize> {
    if !(1..=4).contains(&ell) {
        return Err(Error::invalid(format!("power {ell} outside 1..=4")));
    }
    if eta == 0 || eta > 16 {
        return Err(Error::invalid(format!("register width {eta} outside 1..=16")));
    }
    let dim = 1usize << eta;
    let mut count = 0;
    for x in 0..dim {
        let mut components: BTreeMap<u64, Vec<i128>> = BTreeMap::new();
        for r in 0..dim {
            let c = r ^ x;
            if r.abs_diff(c) > ell {
                continue;
            }
            for (f, v) in exact_q_power_element(ell, r, c) {
                components.entry(f).or_insert_with(|| vec![0; dim])[r] += v;
            }
        }
        if components.is_empty() {
            continue;
        }
        let mut nonzero = vec![false; dim];
        for mut f in components.into_values() {
            let mut h = 1;
            while h < dim {
                for block in f.chunks_mut(2 * h) {
                    let (lo, hi) = block.split_at_mut(h);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (u, w) = (*a, *b);
                        *a = u + w;
                        *b = u - w;
                    }
                }
                h *= 2;
            }
            for (z, v) in f.into_iter().enumerate() {
                nonzero[z] |= v != 0;
            }
        }
        count += nonzero.into_iter().filter(|&b| b).count();
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub ell: usize,
    /// (eta, L_q) pairs.
    pub counts: Vec<(usize, usize)>,
    /// Least-squares (b, c) in L_q / 2^eta = b eta + c over eta > 1.
    pub fit: Option<(f64, f64)>,
}

pub fn scaling_study(ell: usize, etas: &[usize]) -> Result<ScalingStudy> {
    let counts = etas
        .iter()
        .map(|&eta| Ok((eta, q_power_term_count(ell, eta)?)))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(eta, _)| *eta > 1)
        .map(|&(eta, l)| (eta as f64, l as f64 / (1u64 << eta) as f64))
        .collect();
    let fit = (points.len() >= 2).then(|| linear_fit(&points));
    Ok(ScalingStudy { ell, counts, fit })
}

/// Ordinary least squares y = slope x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares fit of L = c J^kappa on log-log axes; returns (c, kappa).
pub fn power_law_fit(points: &[(u32, usize)]) -> Result<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0)
        .map(|&(j, l)| ((j as f64).ln(), (l as f64).ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::invalid("a power-law fit needs at least two points with J > 0"));
    }
    let (kappa, ln_c) = linear_fit(&logs);
    Ok((ln_c.exp(), kappa))
}

/// L_q of the full qubit Hamiltonian at each J.
pub fn term_counts_vs_j(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, js: &[u32]) -> Result<Vec<(u32, usize)>> {
    js.iter()
        .map(|&j| {
            let w = WatsonHamiltonian::new(model, frame, vmax, j)?;
            Ok((j, factored_decomposition(&w, GroupMask::FULL, DEFAULT_DROP_CM1)?.sum.len()))
        })
        .collect()
}

/// The largest J filling each rotational register width: 2^(n-1) - 1.
pub fn register_filling_js(max_j: u32) -> Vec<u32> {
    (1..32).map(|n| (1u32 << (n - 1)) - 1).filter(|&j| j >= 1 && j <= max_j).collect()
}

pub fn fit_lq_vs_j(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, js: &[u32]) -> Result<(f64, f64)> {
    if js.len() < 2 {
        return Err(Error::invalid("a power-law fit needs at least two J values"));
    }
    power_law_fit(&term_counts_vs_j(model, frame, vmax, js)?)
}

/// Rotational qubits used at J.
pub fn rotational_qubits(j: u32) -> usize {
    bits_for(2 * j as usize + 1)
}
