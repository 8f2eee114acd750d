use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::terms::GroupMask;
use crate::basis::BasisSpace;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, EigenPairs};
use crate::C64;

pub const DEFAULT_DENSE_LIMIT: usize = 8192;

/// Coordinate-format Hermitian matrix, triplets sorted by (row, col).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    pub space: BasisSpace,
    pub mask: GroupMask,
    triplets: Vec<(usize, usize, C64)>,
}

impl SparseHamiltonian {
    pub fn from_triplets(space: BasisSpace, mask: GroupMask, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        SparseHamiltonian { space, mask, triplets }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, C64)] {
        &self.triplets
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self.triplets.binary_search_by(|t| (t.0, t.1).cmp(&(i, j))) {
            Ok(pos) => self.triplets[pos].2,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.triplets
            .iter()
            .map(|&(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in &self.triplets {
            m[(i, j)] = v;
        }
        m
    }

    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |a, b| self.get(indices[a], indices[b]))
    }

    /// y = H x.
    pub fn apply(&self, x: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        let mut y = nalgebra::DVector::zeros(self.dim());
        for &(i, j, v) in &self.triplets {
            y[i] += v * x[j];
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    /// Entrywise sum; both operands must share a basis space.
    pub fn add(&self, other: &SparseHamiltonian) -> Result<SparseHamiltonian> {
        if self.space != other.space {
            return Err(Error::invalid("cannot add Hamiltonians over different spaces"));
        }
        let mut merged = std::collections::BTreeMap::new();
        for &(i, j, v) in self.triplets.iter().chain(&other.triplets) {
            *merged.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let mask = GroupMask::from_bits(self.mask.bits() | other.mask.bits()).unwrap_or(GroupMask::FULL);
        Ok(SparseHamiltonian::from_triplets(
            self.space.clone(),
            mask,
            merged.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
        ))
    }

    /// Text dump: a header line "# vmax J S mask" followed by "row col re im" lines.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# vmax={} J={} S={} mask={} modes={}",
            self.space.vmax,
            self.space.j,
            self.dim(),
            self.mask,
            self.space.n_modes
        )?;
        for &(i, j, v) in &self.triplets {
            writeln!(w, "{} {} {:.17e} {:.17e}", i, j, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R, exchange_odd_modes: &[usize]) -> Result<Self> {
        let parse_err = |detail: String| Error::Parse {
            what: "matrix dump".into(),
            detail,
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err("empty file".into()))?
            .map_err(|e| parse_err(e.to_string()))?;
        let mut fields = std::collections::HashMap::new();
        for part in header.trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                fields.insert(k.to_owned(), v.to_owned());
            }
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| parse_err(format!("header lacks {k}")));
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| parse_err(format!("bad {k}"))) };
        let space = BasisSpace::new(num("modes")?, num("vmax")?, num("J")? as u32, exchange_odd_modes);
        if space.dim() != num("S")? {
            return Err(parse_err("S disagrees with vmax and J".into()));
        }
        let mask = GroupMask::parse(get("mask")?).ok_or_else(|| parse_err("bad mask".into()))?;
        let mut triplets = Vec::new();
        for line in lines {
            let line = line.map_err(|e| parse_err(e.to_string()))?;
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.is_empty() {
                continue;
            }
            if cols.len() != 4 {
                return Err(parse_err(format!("line {line:?}")));
            }
            let i: usize = cols[0].parse().map_err(|_| parse_err(format!("line {line:?}")))?;
            let j: usize = cols[1].parse().map_err(|_| parse_err(format!("line {line:?}")))?;
            let re: f64 = cols[2].parse().map_err(|_| parse_err(format!("line {line:?}")))?;
            let im: f64 = cols[3].parse().map_err(|_| parse_err(format!("line {line:?}")))?;
            triplets.push((i, j, C64::new(re, im)));
        }
        Ok(SparseHamiltonian::from_triplets(space, mask, triplets))
    }
}

pub fn dense_spectrum(h: &SparseHamiltonian, n_lowest: usize) -> Result<EigenPairs> {
    dense_spectrum_with_limit(h, n_lowest, DEFAULT_DENSE_LIMIT)
}

pub fn dense_spectrum_with_limit(h: &SparseHamiltonian, n_lowest: usize, limit: usize) -> Result<EigenPairs> {
    if h.dim() > limit {
        return Err(Error::DimensionLimit { dim: h.dim(), limit });
    }
    let blocks: Vec<Vec<usize>> = [1, -1]
        .iter()
        .map(|&p| h.space.parity_block(p))
        .filter(|b| !b.is_empty())
        .collect();
    let decoupled = blocks.len() == 2 && h.triplets.iter().all(|&(i, j, _)| h.space.parity(&h.space.state(i)) == h.space.parity(&h.space.state(j)));
    if !decoupled {
        let eig = hermitian_eigen(&h.to_dense());
        let n = n_lowest.min(eig.len());
        return Ok(EigenPairs {
            values: eig.values[..n].to_vec(),
            vectors: eig.vectors.columns(0, n).into_owned(),
        });
    }
    let mut pairs: Vec<(f64, nalgebra::DVector<C64>)> = Vec::new();
    for block in &blocks {
        let eig = hermitian_eigen(&h.submatrix(block));
        for (c, &value) in eig.values.iter().enumerate() {
            let mut v = nalgebra::DVector::zeros(h.dim());
            for (r, &i) in block.iter().enumerate() {
                v[i] = eig.vectors[(r, c)];
            }
            pairs.push((value, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(n_lowest);
    let columns: Vec<_> = pairs.iter().map(|p| p.1.clone()).collect();
    Ok(EigenPairs {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: if columns.is_empty() {
            DMatrix::zeros(h.dim(), 0)
        } else {
            DMatrix::from_columns(&columns)
        },
    })
}
