//! Second-quantized electronic Hamiltonians, the Jordan–Wigner mapping and
//! the particle-conserving term groups sampled by physDrift.
//!
//! Conventions:
//! * spin orbitals are interleaved, `2*m` is spatial orbital `m` spin up and
//!   `2*m + 1` spin down;
//! * `H = Σ h_pq a†_p a_q + ½ Σ h_pqrs a†_p a†_q a_r a_s + core`, with
//!   `h_pqrs` in physicist order, i.e. `h_pqrs = (ps|qr)` in the chemist
//!   notation used by FCIDUMP files;
//! * `a†_j = Z_0 … Z_{j-1} (X_j − iY_j)/2`.

use std::collections::BTreeMap;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliHamiltonian, PauliString, PauliSum, PauliTerm};

/// Integrals with modulus at or below this are treated as absent.
pub const INTEGRAL_CUTOFF: f64 = 1e-12;
/// Pauli coefficients at or below this are dropped after mapping.
pub const PAULI_CUTOFF: f64 = 1e-12;
/// Largest imaginary part tolerated on a mapped Hermitian operator.
pub const IMAG_TOLERANCE: f64 = 1e-10;
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Dense rank-4 real tensor indexed `[p][q][r][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    /// Nonzero entries `(p, q, r, s, value)` in lexicographic index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().filter(|(_, v)| v.abs() > INTEGRAL_CUTOFF).map(move |(i, &v)| {
            (i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n, v)
        })
    }
}

/// Electronic Hamiltonian over spin orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondQuantizedHamiltonian {
    n_orbitals: usize,
    /// `h_pq`, row-major `n x n`.
    one_body: Vec<f64>,
    /// `h_pqrs`, physicist order.
    two_body: Tensor4,
    core_constant: f64,
}

impl SecondQuantizedHamiltonian {
    pub fn new(n_orbitals: usize, one_body: Vec<f64>, two_body: Tensor4, core_constant: f64) -> Result<Self> {
        if n_orbitals == 0 || n_orbitals > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("{n_orbitals} spin orbitals")));
        }
        if one_body.len() != n_orbitals * n_orbitals || two_body.dim() != n_orbitals {
            return Err(Error::InvalidArgument("integral shapes do not match n_orbitals".into()));
        }
        let n = n_orbitals;
        for p in 0..n {
            for q in 0..p {
                let (a, b) = (one_body[p * n + q], one_body[q * n + p]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Symmetry(format!("h[{p}][{q}] = {a} but h[{q}][{p}] = {b}")));
                }
            }
        }
        for (p, q, r, s, v) in two_body.nonzero() {
            for (label, w) in [("h_qpsr", two_body.get(q, p, s, r)), ("h_srqp", two_body.get(s, r, q, p))] {
                if (v - w).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Symmetry(format!("h_{p}{q}{r}{s} = {v} but {label} = {w}")));
                }
            }
        }
        Ok(SecondQuantizedHamiltonian { n_orbitals, one_body, two_body, core_constant })
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_orbitals + q]
    }

    pub fn two_body(&self) -> &Tensor4 {
        &self.two_body
    }

    pub fn core_constant(&self) -> f64 {
        self.core_constant
    }
}

/// Raw FCIDUMP contents in spatial orbitals (chemist notation).
#[derive(Debug, Clone, PartialEq)]
pub struct FcidumpData {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    /// Spatial `h_ij`, row-major `norb x norb`.
    pub one_body: Vec<f64>,
    /// Spatial `(ij|kl)`.
    pub two_body: Tensor4,
    pub core_constant: f64,
}

impl FcidumpData {
    /// Expands to interleaved spin orbitals and converts to physicist order.
    pub fn to_spin_orbitals(&self) -> Result<SecondQuantizedHamiltonian> {
        let m = self.norb;
        let n = 2 * m;
        let mut one = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                if p % 2 == q % 2 {
                    one[p * n + q] = self.one_body[(p / 2) * m + q / 2];
                }
            }
        }
        let mut two = Tensor4::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        if p % 2 == s % 2 && q % 2 == r % 2 {
                            // h_pqrs = (ps|qr)
                            let v = self.two_body.get(p / 2, s / 2, q / 2, r / 2);
                            if v != 0.0 {
                                two.set(p, q, r, s, v);
                            }
                        }
                    }
                }
            }
        }
        SecondQuantizedHamiltonian::new(n, one, two, self.core_constant)
    }
}

fn fcidump_err(line: usize, message: impl Into<String>) -> Error {
    Error::Fcidump { line, message: message.into() }
}

/// Parses an FCIDUMP stream without spin expansion.
pub fn parse_fcidump<R: BufRead>(source: R) -> Result<FcidumpData> {
    let mut lines = source.lines().enumerate();
    let mut header = String::new();
    let mut header_end = 0;
    let mut closed = false;
    for (i, line) in lines.by_ref() {
        let line = line?;
        header.push_str(&line);
        header.push(' ');
        header_end = i + 1;
        let upper = line.to_ascii_uppercase();
        if upper.contains("&END") || upper.trim() == "/" || upper.trim_end().ends_with('/') {
            closed = true;
            break;
        }
    }
    if !closed {
        return Err(fcidump_err(header_end.max(1), "header is missing &END"));
    }
    let upper = header.to_ascii_uppercase();
    let body = upper
        .trim()
        .strip_prefix("&FCI")
        .ok_or_else(|| fcidump_err(1, "header must start with &FCI"))?;
    let body = body.replace("&END", " ").replace('/', " ");
    let norb = header_int(&body, "NORB")?.ok_or_else(|| fcidump_err(1, "NORB missing"))?;
    let nelec = header_int(&body, "NELEC")?.ok_or_else(|| fcidump_err(1, "NELEC missing"))?;
    let ms2 = header_int(&body, "MS2")?.unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(fcidump_err(1, format!("invalid NORB={norb} or NELEC={nelec}")));
    }
    let norb = norb as usize;
    if nelec as usize > 2 * norb {
        return Err(fcidump_err(1, format!("NELEC={nelec} exceeds 2*NORB")));
    }

    let mut one = vec![None::<f64>; norb * norb];
    let mut two: BTreeMap<[usize; 4], f64> = BTreeMap::new();
    let mut core = 0.0;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(fcidump_err(lineno, format!("expected 5 fields, found {}", toks.len())));
        }
        let value: f64 = toks[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| fcidump_err(lineno, format!("invalid number {:?}", toks[0])))?;
        let mut idx = [0usize; 4];
        for (k, t) in toks[1..].iter().enumerate() {
            let v: usize = t.parse().map_err(|_| fcidump_err(lineno, format!("invalid index {t:?}")))?;
            if v > norb {
                return Err(fcidump_err(lineno, format!("index {v} out of range 0..={norb}")));
            }
            idx[k] = v;
        }
        match idx {
            [0, 0, 0, 0] => core += value,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                for (a, b) in [(i - 1, j - 1), (j - 1, i - 1)] {
                    let slot = &mut one[a * norb + b];
                    if let Some(old) = *slot {
                        if (old - value).abs() > SYMMETRY_TOLERANCE {
                            return Err(fcidump_err(
                                lineno,
                                format!("one-body ({i},{j}) = {value} conflicts with earlier {old}"),
                            ));
                        }
                    }
                    *slot = Some(value);
                }
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                let perms = [
                    [i, j, k, l],
                    [j, i, k, l],
                    [i, j, l, k],
                    [j, i, l, k],
                    [k, l, i, j],
                    [l, k, i, j],
                    [k, l, j, i],
                    [l, k, j, i],
                ];
                for key in perms {
                    if let Some(&old) = two.get(&key) {
                        if (old - value).abs() > SYMMETRY_TOLERANCE {
                            return Err(fcidump_err(
                                lineno,
                                format!("two-body {:?} = {value} conflicts with earlier {old}", [i + 1, j + 1, k + 1, l + 1]),
                            ));
                        }
                    }
                    two.insert(key, value);
                }
            }
            // orbital-energy lines "e i 0 0 0" carry no Hamiltonian data
            [_, 0, 0, 0] => {}
            _ => return Err(fcidump_err(lineno, format!("unrecognised index pattern {idx:?}"))),
        }
    }
    let one_body = one.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    let mut two_body = Tensor4::zeros(norb);
    for ([i, j, k, l], v) in two {
        two_body.set(i, j, k, l, v);
    }
    Ok(FcidumpData { norb, nelec: nelec as usize, ms2, one_body, two_body, core_constant: core })
}

fn header_int(body: &str, key: &str) -> Result<Option<i64>> {
    // Keys are separated by commas and/or whitespace: "NORB=  2,NELEC= 2,MS2=0,"
    let mut rest = body;
    while let Some(pos) = rest.find(key) {
        let before_ok = pos == 0 || !rest.as_bytes()[pos - 1].is_ascii_alphanumeric();
        let after = rest[pos + key.len()..].trim_start();
        if before_ok {
            if let Some(v) = after.strip_prefix('=') {
                let v = v.trim_start();
                let end = v.find(|c: char| !(c.is_ascii_digit() || c == '-' || c == '+')).unwrap_or(v.len());
                return v[..end]
                    .parse()
                    .map(Some)
                    .map_err(|_| fcidump_err(1, format!("malformed {key} value")));
            }
        }
        rest = &rest[pos + key.len()..];
    }
    Ok(None)
}

/// Reads an FCIDUMP stream into a spin-orbital Hamiltonian.
pub fn load_fcidump<R: BufRead>(source: R) -> Result<SecondQuantizedHamiltonian> {
    parse_fcidump(source)?.to_spin_orbitals()
}

/// Open-chain spinful Fermi–Hubbard model.
pub fn build_hubbard(sites: usize, t_hop: f64, u: f64) -> Result<SecondQuantizedHamiltonian> {
    if sites == 0 {
        return Err(Error::InvalidArgument("Hubbard chain needs at least one site".into()));
    }
    let n = 2 * sites;
    let mut one = vec![0.0; n * n];
    for i in 0..sites.saturating_sub(1) {
        for spin in 0..2 {
            let (a, b) = (2 * i + spin, 2 * (i + 1) + spin);
            one[a * n + b] = -t_hop;
            one[b * n + a] = -t_hop;
        }
    }
    let mut two = Tensor4::zeros(n);
    if u != 0.0 {
        for i in 0..sites {
            let (up, dn) = (2 * i, 2 * i + 1);
            // U n_up n_dn = ½ U (a†_up a†_dn a_dn a_up + a†_dn a†_up a_up a_dn)
            two.set(up, dn, dn, up, u);
            two.set(dn, up, up, dn, u);
        }
    }
    SecondQuantizedHamiltonian::new(n, one, two, 0.0)
}

/// Physical class of a second-quantized term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum ClassTag {
    NumberCounting,
    Excitation,
    Coulomb,
    CorrelatedExcitation,
    Scatter,
}

impl ClassTag {
    pub fn name(self) -> &'static str {
        match self {
            ClassTag::NumberCounting => "number_counting",
            ClassTag::Excitation => "excitation",
            ClassTag::Coulomb => "coulomb",
            ClassTag::CorrelatedExcitation => "correlated_excitation",
            ClassTag::Scatter => "scatter",
        }
    }
}

/// Particle-conserving bundle of mutually commuting Pauli terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGroup {
    pub class_tag: ClassTag,
    /// `[p]`, `[p, q]`, `[p, q, r]` (q the spectator) or `[p, q, r, s]`.
    pub orbital_indices: Vec<usize>,
    pub terms: Vec<PauliTerm>,
    /// 𝒜 = Σ|h_i|.
    pub abs_weight: f64,
    /// ℳ = Σ h_i.
    pub mean_weight: f64,
}

impl PhysicalGroup {
    fn new(class_tag: ClassTag, orbital_indices: Vec<usize>, mut terms: Vec<PauliTerm>) -> Self {
        terms.sort_by(crate::pauli::canonical_cmp);
        let abs_weight = terms.iter().map(|t| t.coeff.abs()).sum();
        let mean_weight = terms.iter().map(|t| t.coeff).sum();
        PhysicalGroup { class_tag, orbital_indices, terms, abs_weight, mean_weight }
    }

    /// Builds a group from explicit terms (weights derived).
    pub fn from_terms(class_tag: ClassTag, orbital_indices: Vec<usize>, terms: Vec<PauliTerm>) -> Self {
        Self::new(class_tag, orbital_indices, terms)
    }

    pub fn label(&self) -> String {
        let idx: Vec<String> = self.orbital_indices.iter().map(|i| i.to_string()).collect();
        format!("{}({})", self.class_tag.name(), idx.join(","))
    }

    pub fn to_hamiltonian(&self) -> Result<PauliHamiltonian> {
        let n = self.terms.first().ok_or(Error::EmptyHamiltonian)?.string.num_qubits();
        PauliHamiltonian::new(n, self.terms.iter().copied(), 0.0)
    }

    pub fn all_pairs_commute(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, a)| {
            self.terms[i + 1..].iter().all(|b| a.string.commutes_unchecked(&b.string))
        })
    }

    /// Largest coefficient of `[G, N]` with `N` the total particle number,
    /// evaluated symbolically.
    pub fn number_commutator_residue(&self) -> f64 {
        let Some(first) = self.terms.first() else { return 0.0 };
        let n = first.string.num_qubits();
        let mut g = PauliSum::new();
        for t in &self.terms {
            g.add(t.string, Complex64::new(t.coeff, 0.0));
        }
        let number = ParticleNumberOperator::total(n).expect("n >= 1").pauli_sum();
        g.commutator(&number).pruned(0.0).max_abs()
    }
}

/// Ladder operator as a Pauli sum.
fn ladder(n: usize, j: usize, dagger: bool) -> PauliSum {
    let mut ops: Vec<(usize, Pauli)> = (0..j).map(|k| (k, Pauli::Z)).collect();
    ops.push((j, Pauli::X));
    let xs = PauliString::from_sparse(n, &ops).expect("index checked by caller");
    ops.pop();
    ops.push((j, Pauli::Y));
    let ys = PauliString::from_sparse(n, &ops).expect("index checked by caller");
    let mut sum = PauliSum::new();
    sum.add(xs, Complex64::new(0.5, 0.0));
    sum.add(ys, Complex64::new(0.0, if dagger { -0.5 } else { 0.5 }));
    sum
}

struct Ladders {
    create: Vec<PauliSum>,
    annihilate: Vec<PauliSum>,
}

impl Ladders {
    fn new(n: usize) -> Self {
        Ladders {
            create: (0..n).map(|j| ladder(n, j, true)).collect(),
            annihilate: (0..n).map(|j| ladder(n, j, false)).collect(),
        }
    }
}

/// One additive piece of the second-quantized Hamiltonian.
#[derive(Debug, Clone)]
struct SqTerm {
    class: ClassTag,
    key: Vec<usize>,
    coeff: f64,
    /// Creation indices then annihilation indices, e.g. `[p, q]` for a†_p a_q.
    creators: Vec<usize>,
    annihilators: Vec<usize>,
}

impl SqTerm {
    fn to_pauli(&self, ladders: &Ladders) -> PauliSum {
        let mut acc: Option<PauliSum> = None;
        for &c in &self.creators {
            let op = &ladders.create[c];
            acc = Some(match acc {
                None => op.clone(),
                Some(a) => a.mul(op),
            });
        }
        for &a in &self.annihilators {
            let op = &ladders.annihilate[a];
            acc = Some(match acc {
                None => op.clone(),
                Some(x) => x.mul(op),
            });
        }
        let mut out = PauliSum::new();
        if let Some(sum) = acc {
            out.add_sum(&sum, Complex64::new(self.coeff, 0.0));
        }
        out
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn second_quantized_terms(h: &SecondQuantizedHamiltonian) -> Vec<SqTerm> {
    let n = h.n_orbitals;
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let v = h.one_body(p, q);
            if v.abs() <= INTEGRAL_CUTOFF {
                continue;
            }
            let (class, key) = if p == q {
                (ClassTag::NumberCounting, vec![p])
            } else {
                (ClassTag::Excitation, sorted(vec![p, q]))
            };
            out.push(SqTerm { class, key, coeff: v, creators: vec![p], annihilators: vec![q] });
        }
    }
    for (p, q, r, s, v) in h.two_body.nonzero() {
        if p == q || r == s {
            continue;
        }
        let cre = sorted(vec![p, q]);
        let ann = sorted(vec![r, s]);
        let shared: Vec<usize> = cre.iter().copied().filter(|i| ann.contains(i)).collect();
        let (class, key) = match shared.len() {
            2 => (ClassTag::Coulomb, cre.clone()),
            1 => {
                let c = shared[0];
                let a = if p == c { q } else { p };
                let b = if r == c { s } else { r };
                (ClassTag::CorrelatedExcitation, vec![a.min(b), c, a.max(b)])
            }
            _ => (ClassTag::Scatter, sorted(vec![p, q, r, s])),
        };
        out.push(SqTerm { class, key, coeff: 0.5 * v, creators: vec![p, q], annihilators: vec![r, s] });
    }
    out
}

fn split_identity(n: usize, sum: &mut PauliSum) -> Complex64 {
    let id = PauliString::identity(n).expect("n >= 1");
    sum.terms.remove(&id).unwrap_or_default()
}

fn real_terms(sum: &PauliSum, what: &str) -> Result<Vec<PauliTerm>> {
    let residue = sum.max_imag();
    if residue > IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue { what: what.to_string(), residue });
    }
    Ok(sum
        .iter()
        .filter(|(_, c)| c.re.abs() > PAULI_CUTOFF)
        .map(|(s, c)| PauliTerm::new(*s, c.re))
        .collect())
}

/// Maps to Pauli form; the identity component and core constant become the offset.
pub fn jordan_wigner(h: &SecondQuantizedHamiltonian) -> Result<PauliHamiltonian> {
    let n = h.n_orbitals;
    let ladders = Ladders::new(n);
    let mut total = PauliSum::new();
    for term in second_quantized_terms(h) {
        total.add_sum(&term.to_pauli(&ladders), Complex64::new(1.0, 0.0));
    }
    let id = split_identity(n, &mut total);
    if id.im.abs() > IMAG_TOLERANCE {
        return Err(Error::ImaginaryResidue { what: "identity component".into(), residue: id.im.abs() });
    }
    let terms = real_terms(&total, "Jordan-Wigner image")?;
    PauliHamiltonian::new(n, terms, id.re + h.core_constant)
}

/// Groups the mapped Hamiltonian into particle-conserving commuting bundles.
///
/// Every second-quantized term lands in exactly one group keyed by its class
/// and orbital indices (exchange `h_pqpq` shares the `{p,q}` Coulomb group).
/// A Pauli string produced by several groups is owned, with its total
/// coefficient, by the first of them in (class, indices) order, so the groups
/// partition the mapped Hamiltonian's terms exactly.
pub fn classify_groups(h: &SecondQuantizedHamiltonian) -> Result<Vec<PhysicalGroup>> {
    let n = h.n_orbitals;
    let ladders = Ladders::new(n);
    let mut raw: BTreeMap<(ClassTag, Vec<usize>), PauliSum> = BTreeMap::new();
    for term in second_quantized_terms(h) {
        raw.entry((term.class, term.key.clone()))
            .or_default()
            .add_sum(&term.to_pauli(&ladders), Complex64::new(1.0, 0.0));
    }
    let mut owner: BTreeMap<PauliString, (ClassTag, Vec<usize>)> = BTreeMap::new();
    let mut totals: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    for (key, sum) in raw.iter_mut() {
        split_identity(n, sum);
        for (s, c) in sum.iter() {
            owner.entry(*s).or_insert_with(|| key.clone());
            *totals.entry(*s).or_default() += c;
        }
    }
    let mut per_group: BTreeMap<(ClassTag, Vec<usize>), PauliSum> = BTreeMap::new();
    for (s, c) in totals {
        per_group.entry(owner[&s].clone()).or_default().add(s, c);
    }
    let mut groups = Vec::new();
    for ((class, key), sum) in per_group {
        let what = format!("{}({:?})", class.name(), key);
        let terms = real_terms(&sum, &what)?;
        if !terms.is_empty() {
            groups.push(PhysicalGroup::new(class, key, terms));
        }
    }
    Ok(groups)
}

/// Σ_p n_p over a set of qubits, with per-molecular-orbital pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleNumberOperator {
    pub pauli_form: PauliHamiltonian,
    /// One operator per spatial orbital `m` (qubits `2m`, `2m+1` within the subset).
    pub per_orbital: Vec<PauliHamiltonian>,
    qubits: Vec<usize>,
}

impl ParticleNumberOperator {
    pub fn total(n_qubits: usize) -> Result<Self> {
        particle_number(n_qubits, None)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    fn pauli_sum(&self) -> PauliSum {
        let mut s = PauliSum::new();
        for t in self.pauli_form.terms() {
            s.add(t.string, Complex64::new(t.coeff, 0.0));
        }
        s
    }
}

fn number_form(n: usize, qubits: &[usize]) -> Result<PauliHamiltonian> {
    let terms = qubits
        .iter()
        .map(|&q| Ok(PauliTerm::new(PauliString::from_sparse(n, &[(q, Pauli::Z)])?, -0.5)))
        .collect::<Result<Vec<_>>>()?;
    PauliHamiltonian::new(n, terms, 0.5 * qubits.len() as f64)
}

/// `Σ_{p∈subset} ½(I − Z_p)`; whole register when `subset` is `None`.
pub fn particle_number(n_qubits: usize, subset: Option<&[usize]>) -> Result<ParticleNumberOperator> {
    let qubits: Vec<usize> = match subset {
        None => (0..n_qubits).collect(),
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::InvalidArgument(format!("orbital index {bad} >= {n_qubits}")));
            }
            let mut v = s.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        }
    };
    let pauli_form = number_form(n_qubits, &qubits)?;
    let mut per_orbital = Vec::new();
    for m in 0..n_qubits.div_ceil(2) {
        let members: Vec<usize> = qubits.iter().copied().filter(|q| q / 2 == m).collect();
        if !members.is_empty() {
            per_orbital.push(number_form(n_qubits, &members)?);
        }
    }
    Ok(ParticleNumberOperator { pauli_form, per_orbital, qubits })
}
