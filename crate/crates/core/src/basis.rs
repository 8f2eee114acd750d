//! Product basis |v_1 ... v_N> |J, K> and its linear indexing.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RovibBasisState {
    pub v: Vec<u8>,
    pub j: u32,
    pub k: i32,
}

impl RovibBasisState {
    pub fn new(v: Vec<u8>, j: u32, k: i32) -> Result<Self> {
        if k.unsigned_abs() > j {
            return Err(Error::invalid(format!("|K| = {} exceeds J = {j}", k.abs())));
        }
        Ok(RovibBasisState { v, j, k })
    }

    pub fn vibrational(v: &[u8]) -> Self {
        RovibBasisState {
            v: v.to_vec(),
            j: 0,
            k: 0,
        }
    }

    /// Parses "v1v2v3" digits, e.g. "010".
    pub fn from_label(label: &str) -> Result<Self> {
        let v: Option<Vec<u8>> = label.chars().map(|c| c.to_digit(10).map(|d| d as u8)).collect();
        match v {
            Some(v) if !v.is_empty() => Ok(Self::vibrational(&v)),
            _ => Err(Error::invalid(format!("{label:?} is not a vibrational label"))),
        }
    }

    /// +1 or -1 under exchange of identical nuclei: (-1)^(sum of odd-mode quanta + K).
    pub fn parity(&self, exchange_odd_modes: &[usize]) -> i8 {
        let odd: u32 = exchange_odd_modes.iter().map(|&m| self.v[m] as u32).sum::<u32>()
            + self.k.unsigned_abs();
        if odd % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn vib_label(&self) -> String {
        self.v.iter().map(|d| d.to_string()).collect()
    }

    pub fn with_k(&self, j: u32, k: i32) -> Self {
        RovibBasisState {
            v: self.v.clone(),
            j,
            k,
        }
    }
}

impl fmt::Display for RovibBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.j == 0 {
            write!(f, "{}", self.vib_label())
        } else {
            write!(f, "{}|{},{}>", self.vib_label(), self.j, self.k)
        }
    }
}

/// All states with v_k <= vmax for a fixed J. Index layout: mode 1 most
/// significant, m = K + J least significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisSpace {
    pub n_modes: usize,
    pub vmax: usize,
    pub j: u32,
    pub exchange_odd_modes: Vec<usize>,
}

impl BasisSpace {
    pub fn new(n_modes: usize, vmax: usize, j: u32, exchange_odd_modes: &[usize]) -> Self {
        BasisSpace {
            n_modes,
            vmax,
            j,
            exchange_odd_modes: exchange_odd_modes.to_vec(),
        }
    }

    pub fn vib_dim(&self) -> usize {
        (self.vmax + 1).pow(self.n_modes as u32)
    }

    pub fn rot_dim(&self) -> usize {
        2 * self.j as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.vib_dim() * self.rot_dim()
    }

    pub fn check(&self, b: &RovibBasisState) -> Result<()> {
        if b.j != self.j {
            return Err(Error::invalid(format!("state {b} has J = {}, space has J = {}", b.j, self.j)));
        }
        if b.v.len() != self.n_modes || b.v.iter().any(|&v| v as usize > self.vmax) {
            return Err(Error::invalid(format!("state {b} outside vmax = {}", self.vmax)));
        }
        if b.k.unsigned_abs() > b.j {
            return Err(Error::invalid(format!("state {b} has |K| > J")));
        }
        Ok(())
    }

    pub fn index(&self, b: &RovibBasisState) -> usize {
        let d = self.vmax + 1;
        let vib = b.v.iter().fold(0usize, |acc, &v| acc * d + v as usize);
        vib * self.rot_dim() + (b.k + self.j as i32) as usize
    }

    pub fn state(&self, index: usize) -> RovibBasisState {
        let d = self.vmax + 1;
        let m = index % self.rot_dim();
        let mut vib = index / self.rot_dim();
        let mut v = vec![0u8; self.n_modes];
        for slot in v.iter_mut().rev() {
            *slot = (vib % d) as u8;
            vib /= d;
        }
        RovibBasisState {
            v,
            j: self.j,
            k: m as i32 - self.j as i32,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = RovibBasisState> + '_ {
        (0..self.dim()).map(|i| self.state(i))
    }

    pub fn parity(&self, b: &RovibBasisState) -> i8 {
        b.parity(&self.exchange_odd_modes)
    }

    /// Indices of the states with the given parity, ascending.
    pub fn parity_block(&self, parity: i8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parity(&self.state(i)) == parity).collect()
    }
}
