//! Pauli strings, weighted Pauli Hamiltonians and their dense realization.
//!
//! A string on `n` qubits is stored as a pair of bitmasks `(x, z)` with bit
//! `q` describing qubit `q` (the `q`-th letter of the text form):
//!
//! | letter | x | z |
//! |--------|---|---|
//! | I      | 0 | 0 |
//! | X      | 1 | 0 |
//! | Z      | 0 | 1 |
//! | Y      | 1 | 1 |
//!
//! so that `P = i^{|x & z|} X^x Z^z`. Two strings commute iff the symplectic
//! form `|x1 & z2| + |z1 & x2|` is even, which is the same as counting the
//! positions where both letters are non-identity and different.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<Complex64>;

/// Largest register the bitmask representation supports.
pub const MAX_QUBITS: usize = 64;

/// Default cap on the register size for dense 2^n x 2^n work.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

static DENSE_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_LIMIT);

/// Current process-wide dense limit (qubits).
pub fn dense_limit() -> usize {
    DENSE_LIMIT.load(Ordering::Relaxed)
}

pub fn set_dense_limit(n: usize) {
    DENSE_LIMIT.store(n, Ordering::Relaxed);
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    let limit = dense_limit();
    if n > limit {
        return Err(Error::DenseLimit { n, limit });
    }
    Ok(())
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A fourth root of unity, stored as the exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// Tensor product of single-qubit Paulis on `n` qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_masks(n, 0, 0)
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "Pauli string length {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let mask = mask(n);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidArgument("bitmask exceeds string length".into()));
        }
        Ok(PauliString { n, x, z })
    }

    /// String with `letter` on each listed qubit and identity elsewhere.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n)?;
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::InvalidArgument(format!("qubit {q} >= {n}")));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let mut s = Self::identity(letters.len())?;
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        Ok(s)
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let (xb, zb) = p.bits();
        let bit = 1u64 << q;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(|q| self.get(q))
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let m = self.x | self.z;
        (0..self.n).filter(|q| m >> q & 1 == 1).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string contains only I and Z letters.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// `self * other = phase * product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_len(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> (Phase, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let product = PauliString { n: self.n, x, z };
        // i^{y1} X^{x1} Z^{z1} i^{y2} X^{x2} Z^{z2}; moving Z^{z1} past X^{x2}
        // costs (-1)^{|z1 & x2|}, then rebase onto i^{y3}.
        let swaps = (self.z & other.x).count_ones() as i64;
        let k = self.y_count() as i64 + other.y_count() as i64 - product.y_count() as i64 + 2 * swaps;
        (Phase::from_power(k), product)
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    ///
    /// Qubit 0 is the most significant bit of the basis index.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let (xr, zr) = (reverse_bits(self.x, self.n), reverse_bits(self.z, self.n));
        self.apply_reversed(xr, zr, b)
    }

    /// Masks laid out in basis-index bit order (qubit 0 = MSB).
    #[inline]
    pub(crate) fn index_masks(&self) -> (usize, usize) {
        (reverse_bits(self.x, self.n) as usize, reverse_bits(self.z, self.n) as usize)
    }

    #[inline]
    fn apply_reversed(&self, xr: u64, zr: u64, b: usize) -> (Complex64, usize) {
        let k = self.y_count() as i64 + 2 * ((zr & b as u64).count_ones() as i64);
        (Phase::from_power(k).to_complex(), b ^ xr as usize)
    }

    /// Dense 2^n x 2^n matrix (Kronecker product in qubit order).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_dense(self.n)?;
        let dim = 1usize << self.n;
        let (xr, zr) = (reverse_bits(self.x, self.n), reverse_bits(self.z, self.n));
        let mut m = DenseMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (ph, row) = self.apply_reversed(xr, zr, b);
            m[(row, b)] = ph;
        }
        Ok(m)
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn reverse_bits(v: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        v.reverse_bits() >> (64 - n)
    }
}

/// Parses the letter form, e.g. `"XYZI"`.
pub fn parse_pauli(text: &str) -> Result<PauliString> {
    if text.is_empty() {
        return Err(Error::PauliParse { position: 0, message: "empty string".into() });
    }
    let mut letters = Vec::with_capacity(text.len());
    for (pos, ch) in text.chars().enumerate() {
        letters.push(match ch {
            'I' => Pauli::I,
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            other => {
                return Err(Error::PauliParse {
                    position: pos,
                    message: format!("unexpected character {other:?}"),
                })
            }
        });
    }
    if letters.len() > MAX_QUBITS {
        return Err(Error::PauliParse {
            position: MAX_QUBITS,
            message: format!("longer than {MAX_QUBITS} qubits"),
        });
    }
    PauliString::from_letters(&letters)
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_pauli(s)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.letters() {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_pauli(&s).map_err(serde::de::Error::custom)
    }
}

/// A real-weighted Pauli string `coeff * string`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coeff: f64,
}

impl PauliTerm {
    pub fn new(string: PauliString, coeff: f64) -> Self {
        PauliTerm { string, coeff }
    }
}

/// Canonical term order: descending |coeff|, ties by string text.
pub fn canonical_cmp(a: &PauliTerm, b: &PauliTerm) -> std::cmp::Ordering {
    b.coeff
        .abs()
        .total_cmp(&a.coeff.abs())
        .then_with(|| a.string.to_string().cmp(&b.string.to_string()))
}

/// `offset * I + sum_k h_k P_k` with real coefficients.
///
/// Terms are merged by string, zero coefficients dropped, identity strings
/// folded into `offset`, and the remainder kept in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    offset: f64,
    lambda_one_norm: f64,
    lambda_max: f64,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>, offset: f64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("n_qubits {n_qubits} out of range")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidArgument("offset is not finite".into()));
        }
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        let mut offset = offset;
        for t in terms {
            if t.string.num_qubits() != n_qubits {
                return Err(Error::LengthMismatch { left: n_qubits, right: t.string.num_qubits() });
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("coefficient of {} is not finite", t.string)));
            }
            if t.string.is_identity() {
                offset += t.coeff;
            } else {
                *merged.entry(t.string).or_insert(0.0) += t.coeff;
            }
        }
        let mut terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(s, c)| PauliTerm::new(s, c))
            .collect();
        terms.sort_by(canonical_cmp);
        let lambda_one_norm = terms.iter().map(|t| t.coeff.abs()).sum();
        let lambda_max = terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
        Ok(PauliHamiltonian { n_qubits, terms, offset, lambda_one_norm, lambda_max })
    }

    /// Parses `[(coeff, "XYZ"), ...]`.
    pub fn from_pairs(pairs: &[(f64, &str)]) -> Result<Self> {
        let first = pairs.first().ok_or(Error::EmptyHamiltonian)?;
        let n = first.1.len();
        let terms = pairs
            .iter()
            .map(|(c, s)| Ok(PauliTerm::new(parse_pauli(s)?, *c)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms, 0.0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// λ = Σ|h_j|, identity offset excluded.
    pub fn lambda_one_norm(&self) -> f64 {
        self.lambda_one_norm
    }

    /// Λ = max|h_j|.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn coeff_of(&self, s: &PauliString) -> f64 {
        self.terms.iter().find(|t| t.string == *s).map_or(0.0, |t| t.coeff)
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        let mut h = self.clone();
        h.offset = offset;
        h
    }

    /// Dense matrix of the traceless part (offset excluded).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_dense(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut m = DenseMatrix::zeros(dim, dim);
        for t in &self.terms {
            let (xr, zr) = t.string.index_masks();
            for b in 0..dim {
                let (ph, row) = t.string.apply_reversed(xr as u64, zr as u64, b);
                m[(row, b)] += ph * t.coeff;
            }
        }
        Ok(m)
    }

    /// Dense matrix including `offset * I`.
    pub fn to_dense_with_offset(&self) -> Result<DenseMatrix> {
        let mut m = self.to_dense()?;
        for i in 0..m.nrows() {
            m[(i, i)] += Complex64::new(self.offset, 0.0);
        }
        Ok(m)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(HamiltonianFile::from(self)).expect("plain data serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&HamiltonianFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: HamiltonianFile = serde_json::from_str(text)?;
        let terms = file
            .terms
            .into_iter()
            .map(|t| Ok(PauliTerm::new(parse_pauli(&t.string)?, t.coeff)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.n_qubits, terms, file.offset)
    }
}

#[derive(Serialize, Deserialize)]
struct HamiltonianFile {
    n_qubits: usize,
    #[serde(default)]
    offset: f64,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    string: String,
    coeff: f64,
}

impl From<&PauliHamiltonian> for HamiltonianFile {
    fn from(h: &PauliHamiltonian) -> Self {
        HamiltonianFile {
            n_qubits: h.n_qubits,
            offset: h.offset,
            terms: h
                .terms
                .iter()
                .map(|t| TermRecord { string: t.string.to_string(), coeff: t.coeff })
                .collect(),
        }
    }
}

/// Sparse complex combination of Pauli strings, used while building
/// operators symbolically (fermion mapping, commutators).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PauliSum {
    pub(crate) terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(s: PauliString, c: Complex64) -> Self {
        let mut sum = Self::new();
        sum.add(s, c);
        sum
    }

    pub fn add(&mut self, s: PauliString, c: Complex64) {
        *self.terms.entry(s).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add_sum(&mut self, other: &PauliSum, scale: Complex64) {
        for (s, c) in &other.terms {
            self.add(*s, c * scale);
        }
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (ph, p) = a.mul_unchecked(b);
                out.add(p, ph.to_complex() * ca * cb);
            }
        }
        out
    }

    /// `self*other - other*self`.
    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.commutes_unchecked(b) {
                    let (ph, p) = a.mul_unchecked(b);
                    out.add(p, ph.to_complex() * ca * cb * 2.0);
                }
            }
        }
        out
    }

    /// Drops entries with modulus at or below `tol`.
    pub fn pruned(mut self, tol: f64) -> PauliSum {
        self.terms.retain(|_, c| c.norm() > tol);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}
