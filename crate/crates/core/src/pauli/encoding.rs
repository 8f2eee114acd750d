use nalgebra::DMatrix;

use crate::basis::{BasisSpace, RovibBasisState};
use crate::error::{Error, Result};
use crate::watson::SparseHamiltonian;
use crate::C64;

/// How K is written into the rotational register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationMapping {
    /// m = K + J in plain binary.
    #[default]
    Shifted,
    /// K modulo 2^n (two's complement).
    TwosComplement,
    /// Highest bit holds the sign of K, the rest |K|.
    SignMagnitude,
}

impl RotationMapping {
    pub const ALL: [RotationMapping; 3] = [
        RotationMapping::Shifted,
        RotationMapping::TwosComplement,
        RotationMapping::SignMagnitude,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RotationMapping::Shifted => "m=K+J",
            RotationMapping::TwosComplement => "twos-complement",
            RotationMapping::SignMagnitude => "sign-magnitude",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        RotationMapping::ALL.into_iter().find(|m| m.tag() == tag)
    }

    fn bits(self, j: u32) -> usize {
        match self {
            RotationMapping::Shifted => bits_for(2 * j as usize + 1),
            _ if j == 0 => 0,
            _ => 1 + bits_for(j as usize + 1),
        }
    }
}

pub(crate) fn bits_for(levels: usize) -> usize {
    if levels <= 1 {
        0
    } else {
        (usize::BITS - (levels - 1).leading_zeros()) as usize
    }
}

/// Binary registers: one per mode holding v_k, then the rotational register.
/// Mode 1 occupies the most significant bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    pub n_modes: usize,
    pub vmax: usize,
    pub j: u32,
    pub mode_bits: usize,
    pub rot_bits: usize,
    pub mapping: RotationMapping,
}

impl QubitLayout {
    pub fn new(n_modes: usize, vmax: usize, j: u32) -> Result<Self> {
        QubitLayout::with_mapping(n_modes, vmax, j, RotationMapping::Shifted)
    }

    pub fn with_mapping(n_modes: usize, vmax: usize, j: u32, mapping: RotationMapping) -> Result<Self> {
        let layout = QubitLayout {
            n_modes,
            vmax,
            j,
            mode_bits: bits_for(vmax + 1),
            rot_bits: mapping.bits(j),
            mapping,
        };
        if layout.n_qubits() > 63 {
            return Err(Error::DimensionLimit {
                dim: layout.n_qubits(),
                limit: 63,
            });
        }
        Ok(layout)
    }

    pub fn for_space(space: &BasisSpace) -> Result<Self> {
        QubitLayout::new(space.n_modes, space.vmax, space.j)
    }

    /// Register code of m = K + J.
    pub fn rotation_code(&self, m: usize) -> u64 {
        let k = m as i64 - self.j as i64;
        match self.mapping {
            RotationMapping::Shifted => m as u64,
            RotationMapping::TwosComplement => (k.rem_euclid(1i64 << self.rot_bits)) as u64,
            RotationMapping::SignMagnitude if k < 0 => (1u64 << (self.rot_bits - 1)) | k.unsigned_abs(),
            RotationMapping::SignMagnitude => k as u64,
        }
    }

    fn rotation_index(&self, code: u64) -> Option<usize> {
        (0..=2 * self.j as usize).find(|&m| self.rotation_code(m) == code)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_modes * self.mode_bits + self.rot_bits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits()
    }

    /// Qubit counts per register, most significant first.
    pub fn register_bits(&self) -> Vec<usize> {
        let mut bits = vec![self.mode_bits; self.n_modes];
        bits.push(self.rot_bits);
        bits
    }

    pub fn encode(&self, b: &RovibBasisState) -> Result<u64> {
        if b.v.len() != self.n_modes {
            return Err(Error::invalid(format!("state {b} has {} modes, expected {}", b.v.len(), self.n_modes)));
        }
        if b.j != self.j {
            return Err(Error::invalid(format!("state {b} has J={}, layout has J={}", b.j, self.j)));
        }
        if b.k.unsigned_abs() > self.j {
            return Err(Error::invalid(format!("|K| > J in {b}")));
        }
        let mut index = 0u64;
        for &v in &b.v {
            if v as usize > self.vmax {
                return Err(Error::invalid(format!("v={v} exceeds vmax={} in {b}", self.vmax)));
            }
            index = (index << self.mode_bits) | v as u64;
        }
        Ok((index << self.rot_bits) | self.rotation_code((b.k + self.j as i32) as usize))
    }

    /// Inverse of `encode`; `None` for padding states.
    pub fn decode(&self, index: u64) -> Option<RovibBasisState> {
        if index >= self.dim() as u64 {
            return None;
        }
        let m = self.rotation_index(index & ((1u64 << self.rot_bits) - 1))? as i64;
        let mut rest = index >> self.rot_bits;
        let mut v = vec![0u8; self.n_modes];
        for k in (0..self.n_modes).rev() {
            let vk = (rest & ((1u64 << self.mode_bits) - 1)) as usize;
            if vk > self.vmax {
                return None;
            }
            v[k] = vk as u8;
            rest >>= self.mode_bits;
        }
        Some(RovibBasisState {
            v,
            j: self.j,
            k: (m - self.j as i64) as i32,
        })
    }

    /// Qubit bitstring, highest qubit first.
    pub fn bitstring(&self, index: u64) -> String {
        (0..self.n_qubits()).rev().map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect()
    }

    /// Qubit index of each basis index of a single register.
    pub fn register_codes(&self, register: usize) -> Vec<usize> {
        if register < self.n_modes {
            (0..=self.vmax).collect()
        } else {
            (0..=2 * self.j as usize).map(|m| self.rotation_code(m) as usize).collect()
        }
    }

    /// Map from the dense basis index of `space` to qubit index.
    pub fn embedding(&self, space: &BasisSpace) -> Result<Vec<u64>> {
        space.states().map(|b| self.encode(&b)).collect()
    }

    /// H_q: the Hamiltonian on 2^N_q states, zero on padding states.
    pub fn padded_matrix(&self, h: &SparseHamiltonian) -> Result<DMatrix<C64>> {
        let embed = self.embedding(&h.space)?;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for &(i, j, v) in h.triplets() {
            m[(embed[i] as usize, embed[j] as usize)] = v;
        }
        Ok(m)
    }
}
