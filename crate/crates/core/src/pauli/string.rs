use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::C64;

pub const MAX_QUBITS: usize = 64;

/// Tensor product of single-qubit Paulis stored as X and Z bit masks
/// (bit q is qubit q); `P = i^{|x&z|} X^x Z^z`, so a set bit in both masks is Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        assert!(x & !mask(n_qubits) == 0 && z & !mask(n_qubits) == 0, "mask exceeds qubit count");
        PauliString {
            n_qubits: n_qubits as u8,
            x,
            z,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString::new(n_qubits, 0, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Letter acting on qubit `q` (qubit 0 is the rightmost character).
    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    /// `P|col> = phase |row>`.
    pub fn apply_to_index(&self, col: u64) -> (u64, C64) {
        let sign = if (self.z & col).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (col ^ self.x, self.y_phase() * sign)
    }

    /// i^{|x & z|}, the phase from writing each Y as i X Z.
    pub fn y_phase(&self) -> C64 {
        i_power(self.y_count())
    }

    pub(crate) fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `self ⊗ low`, with `self` on the higher qubits.
    pub fn tensor(&self, low: &PauliString) -> PauliString {
        let shift = low.n_qubits();
        let shifted = |m: u64| if self.n_qubits == 0 { 0 } else { m << shift };
        PauliString::new(self.n_qubits() + shift, shifted(self.x) | low.x, shifted(self.z) | low.z)
    }

    /// Sort key: letters from the leftmost character, I < X < Y < Z.
    fn sort_key(&self) -> u128 {
        let mut key = 0u128;
        for q in (0..self.n_qubits()).rev() {
            let code = match self.letter(q) {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                _ => 3,
            };
            key = (key << 2) | code;
        }
        key
    }

    pub fn to_matrix(&self) -> nalgebra::DMatrix<C64> {
        let dim = 1usize << self.n_qubits();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for col in 0..dim as u64 {
            let (row, phase) = self.apply_to_index(col);
            m[(row as usize, col as usize)] = phase;
        }
        m
    }
}

pub(crate) fn i_power(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits
            .cmp(&other.n_qubits)
            .then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits()).rev() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let n = s.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Parse {
                what: "Pauli string".into(),
                detail: format!("length {n} outside 1..={MAX_QUBITS}"),
            });
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (i, c) in s.chars().enumerate() {
            let q = n - 1 - i;
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => {
                    return Err(Error::Parse {
                        what: "Pauli string".into(),
                        detail: format!("unexpected letter {other:?} in {s:?}"),
                    })
                }
            }
        }
        Ok(PauliString::new(n, x, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single(c: char) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match c {
            'I' => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            'X' => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            'Y' => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            _ => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    #[test]
    fn matrix_matches_kronecker_of_letters() {
        for s in ["XYZ", "ZIY", "YYX", "IIZ"] {
            let p: PauliString = s.parse().unwrap();
            let mut want = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
            for c in s.chars() {
                want = want.kronecker(&single(c));
            }
            assert!((p.to_matrix() - want).camax() < 1e-15, "{s}");
        }
    }

    #[test]
    fn display_round_trip_and_weight() {
        let p: PauliString = "IXYZI".parse().unwrap();
        assert_eq!(p.to_string(), "IXYZI");
        assert_eq!(p.weight(), 3);
        assert_eq!(p.letter(0), 'I');
        assert_eq!(p.letter(3), 'X');
        assert!("IXQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let mut v: Vec<PauliString> = ["ZI", "IX", "XY", "II", "YZ", "XI"].iter().map(|s| s.parse().unwrap()).collect();
        v.sort();
        let names: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["II", "IX", "XI", "XY", "YZ", "ZI"]);
    }

    #[test]
    fn tensor_places_left_factor_high() {
        let a: PauliString = "XY".parse().unwrap();
        let b: PauliString = "Z".parse().unwrap();
        assert_eq!(a.tensor(&b).to_string(), "XYZ");
        assert_eq!(PauliString::identity(0).tensor(&b), b);
    }
}
