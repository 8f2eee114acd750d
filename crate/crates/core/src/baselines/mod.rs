//! Classical comparison methods: perturbation theory, perturbative basis
//! selection, greedily optimized bases and random bases.

mod greedy;
mod perturbation;
mod random;

use std::fmt;
use std::str::FromStr;

pub use greedy::{greedy_combined, optimal_greedy, GreedyCurve, GREEDY_TIE_CM1};
pub use perturbation::{pt1_distribution, pt2_energies, PerturbationProblem, Pt2Level, RESONANCE_LIMIT_CM1};
pub use random::{random_baseline, RandomStats};

use crate::basis::RovibBasisState;
use crate::error::{Error, Result};
use crate::molecule::{DerivedFrame, MoleculeModel};
use crate::operators::asymmetric_top_solve;
use crate::qsci::{select_basis, solve_bases, BasisSet, PointSolution};
use crate::watson::WatsonHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Pt2,
    /// Bases selected from the first-order distribution.
    Pt1,
    Greedy,
    Random,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 4] = [BaselineMethod::Pt2, BaselineMethod::Pt1, BaselineMethod::Greedy, BaselineMethod::Random];

    pub fn tag(self) -> &'static str {
        match self {
            BaselineMethod::Pt2 => "pt2",
            BaselineMethod::Pt1 => "pt1",
            BaselineMethod::Greedy => "greedy",
            BaselineMethod::Random => "random",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::invalid(format!("unknown baseline method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub reference: RovibBasisState,
    pub basis_size: usize,
    pub energy_cm1: f64,
    pub std_cm1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub method: BaselineMethod,
    pub rows: Vec<BaselineRow>,
}

impl BaselineReport {
    pub fn new(method: BaselineMethod, rows: Vec<BaselineRow>) -> Result<Self> {
        for row in &rows {
            if !row.energy_cm1.is_finite() {
                return Err(Error::invalid(format!("non-finite energy for {}", row.reference)));
            }
            if let Some(s) = row.std_cm1 {
                if !(s >= 0.0) {
                    return Err(Error::invalid(format!("standard deviation {s} for {}", row.reference)));
                }
            }
        }
        Ok(BaselineReport { method, rows })
    }

    pub fn from_pt2(levels: &[Pt2Level], vmax: usize) -> Result<Self> {
        let full = (vmax + 1).pow(3);
        let rows = levels
            .iter()
            .map(|l| BaselineRow {
                reference: l.reference.clone(),
                basis_size: full,
                energy_cm1: l.energy_cm1(),
                std_cm1: None,
            })
            .collect();
        BaselineReport::new(BaselineMethod::Pt2, rows)
    }

    /// One row per level of a combined solution, sized by its reference's basis.
    pub fn from_solution(method: BaselineMethod, solution: &PointSolution) -> Result<Self> {
        let rows = solution
            .levels
            .iter()
            .map(|l| BaselineRow {
                reference: l.reference.clone(),
                basis_size: l.omega_size,
                energy_cm1: l.combined_energy_cm1,
                std_cm1: None,
            })
            .collect();
        BaselineReport::new(method, rows)
    }

    pub fn from_random(stats: &RandomStats) -> Result<Self> {
        let rows = stats
            .references
            .iter()
            .enumerate()
            .map(|(i, r)| BaselineRow {
                reference: r.clone(),
                basis_size: stats.size,
                energy_cm1: stats.mean_cm1[i],
                std_cm1: Some(stats.std_cm1[i]),
            })
            .collect();
        BaselineReport::new(BaselineMethod::Random, rows)
    }
}

/// Bases of first-order weights above `epsilon`, combined as in the
/// sampling pipeline.
pub fn pt1_sampling(model: &MoleculeModel, frame: &DerivedFrame, vmax: usize, references: &[RovibBasisState], epsilon: f64) -> Result<PointSolution> {
    let problem = PerturbationProblem::new(model, frame, vmax)?;
    let layout = crate::pauli::QubitLayout::new(model.n_modes(), vmax, 0)?;
    let bases = references
        .iter()
        .map(|r| {
            let weights = problem
                .first_order_weights(r)?
                .into_iter()
                .map(|(i, p)| Ok((layout.encode(&problem.space().state(i))?, p)))
                .collect::<Result<Vec<_>>>()?;
            let d = crate::trotter::Distribution::from_weights(&layout, weights)?;
            Ok(select_basis(&d, epsilon, &BasisSet::from_states([r.clone()])))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = WatsonHamiltonian::new(model, frame, vmax, 0)?;
    solve_bases(&w, &asymmetric_top_solve(frame, 0), references, &bases, None)
}
