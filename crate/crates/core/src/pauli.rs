//! Phase-free Pauli strings and complex-weighted Pauli sums.
//!
//! A string is stored as two bitmasks over at most 64 qubits: the `x` bit
//! marks X or Y, the `z` bit marks Z or Y. String order is lexicographic in
//! the letters `I < X < Y < Z`, reading qubit 0 first.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::basis::{Axis, MeasurementBasis};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are pruned after algebraic operations.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

pub const MAX_QUBITS: usize = 64;

/// Powers of `i` indexed by exponent mod 4.
pub(crate) const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn from_masks(x: u64, z: u64) -> Self {
        Self { x, z }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        let bit = 1u64 << qubit;
        match p {
            Pauli::I => Self::IDENTITY,
            Pauli::X => Self { x: bit, z: 0 },
            Pauli::Y => Self { x: bit, z: bit },
            Pauli::Z => Self { x: 0, z: bit },
        }
    }

    /// Product of Z over qubits `0..qubit`.
    pub fn z_string_below(qubit: usize) -> Self {
        Self { x: 0, z: (1u64 << qubit) - 1 }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string contains only I and Z.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        let s = Self::single(qubit, p);
        self.x |= s.x;
        self.z |= s.z;
    }

    /// Product `self * other = i^k * result`; returns `(k mod 4, result)`.
    pub fn mul(&self, other: &PauliString) -> (u8, PauliString) {
        let ax = self.x & !self.z;
        let ay = self.x & self.z;
        let az = !self.x & self.z;
        let bx = other.x & !other.z;
        let by = other.x & other.z;
        let bz = !other.x & other.z;
        let plus = ((ax & by) | (ay & bz) | (az & bx)).count_ones();
        let minus = ((ay & bx) | (az & by) | (ax & bz)).count_ones();
        let k = ((plus + 3 * minus) % 4) as u8;
        (k, PauliString { x: self.x ^ other.x, z: self.z ^ other.z })
    }

    /// Qubit-wise compatibility: at every qubit where both act, they act
    /// with the same letter.
    pub fn qubitwise_compatible(&self, other: &PauliString) -> bool {
        let both = self.support() & other.support();
        ((self.x ^ other.x) | (self.z ^ other.z)) & both == 0
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    #[inline]
    pub fn apply(&self, bits: u64) -> (u64, Complex64) {
        let n_y = (self.x & self.z).count_ones();
        let n_minus = (bits & self.z).count_ones();
        (bits ^ self.x, I_POW[((n_y + 2 * n_minus) % 4) as usize])
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.get(q).as_char()).collect()
    }

    fn letter_code(&self, qubit: usize) -> u8 {
        match self.get(qubit) {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = (self.x ^ other.x) | (self.z ^ other.z);
        if diff == 0 {
            return Ordering::Equal;
        }
        let q = diff.trailing_zeros() as usize;
        self.letter_code(q).cmp(&other.letter_code(q))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_QUBITS {
            return Err(Error::Capacity(format!("Pauli strings are limited to {MAX_QUBITS} qubits")));
        }
        let mut p = PauliString::IDENTITY;
        for (q, c) in s.chars().enumerate() {
            let letter = match c.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::InvalidArgument(format!("invalid Pauli letter '{other}'"))),
            };
            p.set(q, letter);
        }
        Ok(p)
    }
}

/// Weighted sum of Pauli strings over a fixed qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        let mut s = Self::new(n_qubits);
        s.add_term(PauliString::IDENTITY, Complex64::new(coeff, 0.0));
        s
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut s = Self::new(n_qubits);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s.prune(PRUNE_THRESHOLD);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Accumulates without pruning; call [`PauliSum::prune`] afterwards.
    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_default() += c;
    }

    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out.prune(PRUNE_THRESHOLD);
        out
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.prune(PRUNE_THRESHOLD);
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new(self.n_qubits.max(other.n_qubits));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (k, p) = a.mul(b);
                out.add_term(p, ca * cb * I_POW[k as usize]);
            }
        }
        out.prune(PRUNE_THRESHOLD);
        out
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&PauliString::IDENTITY)
    }

    /// The sum without its identity term.
    pub fn without_identity(&self) -> PauliSum {
        let mut out = self.clone();
        out.terms.remove(&PauliString::IDENTITY);
        out
    }

    /// Conjugates by the measurement rotation `U` of `basis`, returning
    /// `U P U†`. X qubits use `H`; Y qubits use `S†` followed by `H`, which
    /// sends `Y` to `+Z`; Z qubits are untouched.
    pub fn conjugate_by_basis(&self, basis: &MeasurementBasis) -> Result<PauliSum> {
        basis.check_len(self.n_qubits)?;
        let mut out = PauliSum::new(self.n_qubits);
        for (p, c) in &self.terms {
            let (sign, q) = conjugate_string(p, basis);
            out.add_term(q, c * sign);
        }
        Ok(out)
    }

    /// Text dump: one `<coeff> <IXYZ-string>` line per term, in string order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                out.push_str(&format!("{:e} {}\n", c.re, p.label(self.n_qubits)));
            } else {
                out.push_str(&format!("{:e}{:+e}i {}\n", c.re, c.im, p.label(self.n_qubits)));
            }
        }
        out
    }
}

/// Image of a single string under the basis rotation, with its sign.
pub(crate) fn conjugate_string(p: &PauliString, basis: &MeasurementBasis) -> (f64, PauliString) {
    let mut sign = 1.0;
    let mut out = *p;
    for (q, axis) in basis.axes().iter().enumerate() {
        let letter = p.get(q);
        let (s, image) = match (axis, letter) {
            (_, Pauli::I) | (Axis::Z, _) => (1.0, letter),
            // H X H = Z, H Y H = -Y, H Z H = X
            (Axis::X, Pauli::X) => (1.0, Pauli::Z),
            (Axis::X, Pauli::Y) => (-1.0, Pauli::Y),
            (Axis::X, Pauli::Z) => (1.0, Pauli::X),
            // (H S†) X (S H) = Y, (H S†) Y (S H) = Z, (H S†) Z (S H) = X
            (Axis::Y, Pauli::X) => (1.0, Pauli::Y),
            (Axis::Y, Pauli::Y) => (1.0, Pauli::Z),
            (Axis::Y, Pauli::Z) => (1.0, Pauli::X),
        };
        sign *= s;
        out.set(q, image);
    }
    (sign, out)
}

/// Free-function form of [`PauliSum::conjugate_by_basis`].
pub fn conjugate_by_basis(p: &PauliSum, basis: &MeasurementBasis) -> Result<PauliSum> {
    p.conjugate_by_basis(basis)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
