use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use super::string::PauliString;
use crate::error::{Error, Result};
use crate::C64;

/// Metadata carried in the header of a Pauli-sum file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliHeader {
    pub n_qubits: usize,
    pub vmax: usize,
    pub j: u32,
    pub mapping: String,
}

/// Real-coefficient Pauli expansion in canonical string order, no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffDirection {
    /// Keep |h| > lambda.
    Above,
    /// Keep |h| < lambda.
    Below,
}

impl std::str::FromStr for CutoffDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "above" => Ok(CutoffDirection::Above),
            "below" => Ok(CutoffDirection::Below),
            _ => Err(Error::invalid(format!("cutoff direction must be above or below, got {s:?}"))),
        }
    }
}

impl PauliSum {
    /// Merges repeated strings and drops exact zeros.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for (h, p) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::invalid(format!("{p} does not act on {n_qubits} qubits")));
            }
            *merged.entry(p).or_insert(0.0) += h;
        }
        Ok(PauliSum {
            n_qubits,
            terms: merged.into_iter().filter(|(_, h)| *h != 0.0).map(|(p, h)| (h, p)).collect(),
        })
    }

    pub(crate) fn from_sorted(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].1 < w[1].1));
        PauliSum { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// L_q, the number of stored terms including any identity term.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn non_identity_len(&self) -> usize {
        self.terms.iter().filter(|(_, p)| !p.is_identity()).count()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, PauliString)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        match self.terms.binary_search_by(|t| t.1.cmp(p)) {
            Ok(i) => self.terms[i].0,
            Err(_) => 0.0,
        }
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.coefficient(&PauliString::identity(self.n_qubits))
    }

    pub fn max_abs_difference(&self, other: &PauliSum) -> f64 {
        let mut worst: f64 = 0.0;
        for (h, p) in self.iter() {
            worst = worst.max((h - other.coefficient(p)).abs());
        }
        for (h, p) in other.iter() {
            worst = worst.max((h - self.coefficient(p)).abs());
        }
        worst
    }

    /// Keeps terms with |h| strictly above or below `lambda`.
    pub fn cutoff(&self, lambda: f64, direction: CutoffDirection) -> Result<PauliSum> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::invalid(format!("cutoff must be non-negative, got {lambda}")));
        }
        let keep = |h: f64| match direction {
            CutoffDirection::Above => h.abs() > lambda,
            CutoffDirection::Below => h.abs() < lambda,
        };
        Ok(PauliSum::from_sorted(
            self.n_qubits,
            self.terms.iter().copied().filter(|t| keep(t.0)).collect(),
        ))
    }

    /// Dense 2^N x 2^N matrix; intended for small N.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for &(h, p) in &self.terms {
            for col in 0..dim as u64 {
                let (row, phase) = p.apply_to_index(col);
                m[(row as usize, col as usize)] += phase * h;
            }
        }
        m
    }

    pub fn write<W: Write>(&self, mut w: W, header: &PauliHeader) -> std::io::Result<()> {
        writeln!(
            w,
            "# N_q={} vmax={} J={} mapping={} L_q={}",
            header.n_qubits,
            header.vmax,
            header.j,
            header.mapping,
            self.len()
        )?;
        for (h, p) in &self.terms {
            writeln!(w, "{h} {p}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<(PauliSum, PauliHeader)> {
        let parse_err = |detail: String| Error::Parse {
            what: "Pauli sum".into(),
            detail,
        };
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| parse_err("empty file".into()))?
            .map_err(|e| parse_err(e.to_string()))?;
        let mut fields = BTreeMap::new();
        for part in first.trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                fields.insert(k.to_owned(), v.to_owned());
            }
        }
        let get = |k: &str| fields.get(k).cloned().ok_or_else(|| parse_err(format!("header lacks {k}")));
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| parse_err(format!("bad {k}"))) };
        let header = PauliHeader {
            n_qubits: num("N_q")?,
            vmax: num("vmax")?,
            j: num("J")? as u32,
            mapping: get("mapping")?,
        };
        let mut terms = Vec::new();
        for line in lines {
            let line = line.map_err(|e| parse_err(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (h, p) = line.split_once(' ').ok_or_else(|| parse_err(format!("line {line:?}")))?;
            let h: f64 = h.parse().map_err(|_| parse_err(format!("coefficient in {line:?}")))?;
            let p: PauliString = p.trim().parse()?;
            terms.push((h, p));
        }
        let sum = PauliSum::new(header.n_qubits, terms)?;
        if let Some(l) = fields.get("L_q") {
            if l.parse::<usize>().ok() != Some(sum.len()) {
                return Err(parse_err(format!("header says L_q={l}, found {}", sum.len())));
            }
        }
        Ok((sum, header))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PauliSum {
        let t = |h: f64, s: &str| (h, s.parse::<PauliString>().unwrap());
        PauliSum::new(3, [t(2.0, "ZZI"), t(-150.5, "XII"), t(1.0, "III"), t(0.5, "ZZI"), t(-1822.17, "IXY")]).unwrap()
    }

    #[test]
    fn merges_and_orders() {
        let s = sample();
        assert_eq!(s.len(), 4);
        assert_eq!(s.non_identity_len(), 3);
        assert_eq!(s.coefficient(&"ZZI".parse().unwrap()), 2.5);
        let names: Vec<String> = s.iter().map(|t| t.1.to_string()).collect();
        assert_eq!(names, ["III", "IXY", "XII", "ZZI"]);
    }

    #[test]
    fn cutoff_directions() {
        let s = sample();
        assert_eq!(s.cutoff(0.0, CutoffDirection::Above).unwrap(), s);
        assert!(s.cutoff(f64::INFINITY, CutoffDirection::Above).unwrap().is_empty());
        assert_eq!(s.cutoff(100.0, CutoffDirection::Above).unwrap().len(), 2);
        assert_eq!(s.cutoff(100.0, CutoffDirection::Below).unwrap().len(), 2);
        assert!(s.cutoff(-1.0, CutoffDirection::Above).is_err());
    }

    #[test]
    fn file_round_trip() {
        let s = sample();
        let header = PauliHeader {
            n_qubits: 3,
            vmax: 1,
            j: 0,
            mapping: "m=K+J".into(),
        };
        let mut buf = Vec::new();
        s.write(&mut buf, &header).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("-1822.17 IXY"));
        let (back, h) = PauliSum::read(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, s);
        assert_eq!(h, header);
    }

    #[test]
    fn rejects_wrong_width() {
        let p: PauliString = "XX".parse().unwrap();
        assert!(PauliSum::new(3, [(1.0, p)]).is_err());
    }
}
