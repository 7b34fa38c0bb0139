//! Compilation of a Pauli Hamiltonian into an ordered list of Pauli
//! exponentials `exp(-i * angle * P)` under deterministic product formulas
//! and randomized sampling protocols.

use std::collections::BTreeMap;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fermion::PhysicalGroup;
use crate::pauli::{Pauli, PauliHamiltonian, PauliString, PauliTerm};

/// Deterministic RNG used by every protocol.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub string: PauliString,
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerKind {
    TrotterStepEnd,
    SampleStepEnd,
    GroupEnd,
}

impl MarkerKind {
    pub fn name(self) -> &'static str {
        match self {
            MarkerKind::TrotterStepEnd => "trotter_step_end",
            MarkerKind::SampleStepEnd => "sample_step_end",
            MarkerKind::GroupEnd => "group_end",
        }
    }
}

/// Marks the boundary after `index` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub index: usize,
    pub kind: MarkerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Trotter1,
    Trotter2,
    Suzuki,
    Qdrift,
    Physdrift,
    RandomPermutation,
    Sparsto,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Trotter1 => "trotter1",
            Protocol::Trotter2 => "trotter2",
            Protocol::Suzuki => "suzuki",
            Protocol::Qdrift => "qdrift",
            Protocol::Physdrift => "physdrift",
            Protocol::RandomPermutation => "random_permutation",
            Protocol::Sparsto => "sparsto",
        }
    }

    pub fn is_randomized(self) -> bool {
        !matches!(self, Protocol::Trotter1 | Protocol::Trotter2 | Protocol::Suzuki)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trotter1" => Protocol::Trotter1,
            "trotter2" => Protocol::Trotter2,
            "suzuki" => Protocol::Suzuki,
            "qdrift" => Protocol::Qdrift,
            "physdrift" => Protocol::Physdrift,
            "random_permutation" => Protocol::RandomPermutation,
            "sparsto" => Protocol::Sparsto,
            other => return Err(Error::Config(format!("unknown protocol {other:?}"))),
        })
    }
}

/// How a sequence was produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub protocol: Option<Protocol>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Random-permutation coin flips, `true` = forward order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coins: Vec<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Ordered schedule of Pauli exponentials with step boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub n_qubits: usize,
    pub entries: Vec<Entry>,
    pub markers: Vec<Marker>,
    pub provenance: Provenance,
}

impl GateSequence {
    pub fn new(n_qubits: usize) -> Self {
        GateSequence { n_qubits, entries: Vec::new(), markers: Vec::new(), provenance: Provenance::default() }
    }

    fn push(&mut self, string: PauliString, angle: f64) {
        self.entries.push(Entry { string, angle });
    }

    /// Appends a marker unless it would not advance past the previous one.
    fn mark(&mut self, kind: MarkerKind) {
        let index = self.entries.len();
        if self.markers.last().is_none_or(|m| m.index < index) {
            self.markers.push(Marker { index, kind });
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn markers_of(&self, kind: MarkerKind) -> impl Iterator<Item = &Marker> {
        self.markers.iter().filter(move |m| m.kind == kind)
    }

    /// Half-open entry ranges delimited by markers of `kind`.
    pub fn segments(&self, kind: MarkerKind) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        let mut out = Vec::new();
        for m in self.markers_of(kind) {
            out.push(start..m.index);
            start = m.index;
        }
        out
    }

    pub fn total_abs_angle(&self) -> f64 {
        self.entries.iter().map(|e| e.angle.abs()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = None;
        for m in &self.markers {
            if m.index > self.entries.len() || prev.is_some_and(|p| p >= m.index) {
                return Err(invalid(format!("marker at {} out of order", m.index)));
            }
            prev = Some(m.index);
        }
        if let Some(e) = self.entries.iter().find(|e| e.string.num_qubits() != self.n_qubits) {
            return Err(Error::LengthMismatch { left: self.n_qubits, right: e.string.num_qubits() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SequenceFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SequenceFile = serde_json::from_str(text)?;
        let seq = GateSequence {
            n_qubits: f.n_qubits,
            entries: f.entries,
            markers: f.markers,
            provenance: Provenance { protocol: f.protocol, seed: f.seed, ..f.provenance.unwrap_or_default() },
        };
        seq.validate()?;
        Ok(seq)
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    n_qubits: usize,
    protocol: Option<Protocol>,
    seed: Option<u64>,
    entries: Vec<Entry>,
    markers: Vec<Marker>,
    #[serde(default)]
    provenance: Option<Provenance>,
}

impl From<&GateSequence> for SequenceFile {
    fn from(s: &GateSequence) -> Self {
        SequenceFile {
            n_qubits: s.n_qubits,
            protocol: s.provenance.protocol,
            seed: s.provenance.seed,
            entries: s.entries.clone(),
            markers: s.markers.clone(),
            provenance: Some(s.provenance.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    QdriftAbs,
    PhysAbs,
    PhysMean,
    Importance,
}

/// Normalized probability vector over terms or groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    pub weights: Vec<f64>,
    pub scheme: SchemeTag,
}

impl SamplingDistribution {
    /// Normalizes nonnegative raw weights.
    pub fn from_raw(raw: &[f64], scheme: SchemeTag) -> Result<Self> {
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("sampling weights must be finite and nonnegative"));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(invalid("sampling weights sum to zero"));
        }
        Ok(SamplingDistribution { weights: raw.iter().map(|w| w / total).collect(), scheme })
    }

    fn sampler(&self) -> Result<WeightedIndex<f64>> {
        WeightedIndex::new(&self.weights).map_err(|e| invalid(format!("sampling distribution: {e}")))
    }
}

fn require_terms(h: &PauliHamiltonian) -> Result<()> {
    if h.is_empty() {
        return Err(Error::EmptyHamiltonian);
    }
    Ok(())
}

fn require_steps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("step/sample count must be at least 1"));
    }
    Ok(())
}

fn provenance(protocol: Protocol, seed: Option<u64>, params: &[(&str, f64)]) -> Provenance {
    Provenance {
        protocol: Some(protocol),
        seed,
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        ..Default::default()
    }
}

/// First-order product formula, `N` repetitions of the canonical term order.
pub fn compile_trotter1(h: &PauliHamiltonian, t: f64, steps: usize) -> Result<GateSequence> {
    require_terms(h)?;
    require_steps(steps)?;
    let mut seq = GateSequence::new(h.n_qubits());
    let dt = t / steps as f64;
    for _ in 0..steps {
        for term in h.terms() {
            seq.push(term.string, term.coeff * dt);
        }
        seq.mark(MarkerKind::TrotterStepEnd);
    }
    seq.provenance = provenance(Protocol::Trotter1, None, &[("t", t), ("steps", steps as f64)]);
    Ok(seq)
}

fn symmetric_step(seq: &mut GateSequence, terms: &[PauliTerm], tau: f64) {
    for term in terms {
        seq.push(term.string, term.coeff * tau / 2.0);
    }
    for term in terms.iter().rev() {
        seq.push(term.string, term.coeff * tau / 2.0);
    }
}

/// Symmetric second-order formula.
pub fn compile_trotter2(h: &PauliHamiltonian, t: f64, steps: usize) -> Result<GateSequence> {
    let mut seq = compile_suzuki(h, t, steps, 2)?;
    seq.provenance = provenance(Protocol::Trotter2, None, &[("t", t), ("steps", steps as f64)]);
    Ok(seq)
}

/// Suzuki recursion coefficient `p_k = 1 / (4 - 4^{1/(2k-1)})`.
pub fn suzuki_p(k: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

fn suzuki_step(seq: &mut GateSequence, terms: &[PauliTerm], tau: f64, k: u32) {
    if k == 1 {
        symmetric_step(seq, terms, tau);
        return;
    }
    let p = suzuki_p(k);
    suzuki_step(seq, terms, p * tau, k - 1);
    suzuki_step(seq, terms, p * tau, k - 1);
    suzuki_step(seq, terms, (1.0 - 4.0 * p) * tau, k - 1);
    suzuki_step(seq, terms, p * tau, k - 1);
    suzuki_step(seq, terms, p * tau, k - 1);
}

/// Order-`2k` Suzuki formula; `order` must be even.
pub fn compile_suzuki(h: &PauliHamiltonian, t: f64, steps: usize, order: u32) -> Result<GateSequence> {
    require_terms(h)?;
    require_steps(steps)?;
    if order == 0 || order % 2 == 1 {
        return Err(invalid(format!("Suzuki formulas exist only for even orders, got {order}")));
    }
    let k = order / 2;
    let mut seq = GateSequence::new(h.n_qubits());
    let dt = t / steps as f64;
    for _ in 0..steps {
        suzuki_step(&mut seq, h.terms(), dt, k);
        seq.mark(MarkerKind::TrotterStepEnd);
    }
    seq.provenance =
        provenance(Protocol::Suzuki, None, &[("t", t), ("steps", steps as f64), ("order", order as f64)]);
    Ok(seq)
}

/// qDrift distribution `p_j = |h_j| / λ` over the canonical term order.
pub fn qdrift_distribution(h: &PauliHamiltonian) -> Result<SamplingDistribution> {
    require_terms(h)?;
    let raw: Vec<f64> = h.terms().iter().map(|t| t.coeff.abs()).collect();
    SamplingDistribution::from_raw(&raw, SchemeTag::QdriftAbs)
}

/// qDrift: `N` i.i.d. draws, each applied with angle `sign(h_j) λ t / N`.
pub fn sample_qdrift(h: &PauliHamiltonian, t: f64, samples: usize, seed: u64) -> Result<GateSequence> {
    let dist = qdrift_distribution(h)?;
    let mut seq = sample_qdrift_with(h, t, samples, &dist, seed)?;
    seq.provenance.notes.push("angles carry sign(h_j) so negative coefficients evolve correctly".into());
    Ok(seq)
}

/// qDrift with an arbitrary term distribution `q`; angle `h_j / q_j * t / N`.
pub fn sample_qdrift_with(
    h: &PauliHamiltonian,
    t: f64,
    samples: usize,
    dist: &SamplingDistribution,
    seed: u64,
) -> Result<GateSequence> {
    require_terms(h)?;
    require_steps(samples)?;
    if dist.weights.len() != h.len() {
        return Err(invalid("distribution length differs from term count"));
    }
    if let Some((j, _)) = h.terms().iter().enumerate().find(|(j, _)| dist.weights[*j] == 0.0) {
        return Err(invalid(format!("term {j} has zero sampling probability")));
    }
    let sampler = dist.sampler()?;
    let mut rng = seeded_rng(seed);
    let mut seq = GateSequence::new(h.n_qubits());
    let scale = t / samples as f64;
    for _ in 0..samples {
        let j = sampler.sample(&mut rng);
        let term = &h.terms()[j];
        seq.push(term.string, term.coeff / dist.weights[j] * scale);
        seq.mark(MarkerKind::SampleStepEnd);
    }
    seq.provenance = provenance(Protocol::Qdrift, Some(seed), &[("t", t), ("samples", samples as f64)]);
    if dist.scheme == SchemeTag::Importance {
        seq.provenance.notes.push("importance-sampled term distribution".into());
    }
    Ok(seq)
}

/// Group weighting for physDrift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupScheme {
    /// 𝒜_j = Σ|h_i|
    Abs,
    /// |ℳ_j| = |Σ h_i|
    Mean,
}

impl std::str::FromStr for GroupScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(GroupScheme::Abs),
            "mean" => Ok(GroupScheme::Mean),
            other => Err(Error::Config(format!("unknown physdrift scheme {other:?}"))),
        }
    }
}

pub fn group_weight(g: &PhysicalGroup, scheme: GroupScheme) -> f64 {
    match scheme {
        GroupScheme::Abs => g.abs_weight,
        GroupScheme::Mean => g.mean_weight.abs(),
    }
}

/// Normalized group-draw probabilities.
pub fn physdrift_distribution(groups: &[PhysicalGroup], scheme: GroupScheme) -> Result<SamplingDistribution> {
    let raw: Vec<f64> = groups.iter().map(|g| group_weight(g, scheme)).collect();
    let tag = match scheme {
        GroupScheme::Abs => SchemeTag::PhysAbs,
        GroupScheme::Mean => SchemeTag::PhysMean,
    };
    SamplingDistribution::from_raw(&raw, tag).map_err(|_| {
        invalid(format!("every group weight is zero under the {scheme:?} scheme"))
    })
}

/// Angles `(string, angle)` of one drawn group in the physDrift schedule.
pub fn physdrift_block(g: &PhysicalGroup, scheme: GroupScheme, lambda_s: f64, t: f64, samples: usize) -> Vec<Entry> {
    let w = group_weight(g, scheme);
    g.terms
        .iter()
        .map(|term| Entry { string: term.string, angle: term.coeff / w * lambda_s * t / samples as f64 })
        .collect()
}

/// physDrift: `N` group draws; every string of a drawn group is emitted.
pub fn sample_physdrift(
    groups: &[PhysicalGroup],
    t: f64,
    samples: usize,
    scheme: GroupScheme,
    seed: u64,
) -> Result<GateSequence> {
    require_steps(samples)?;
    let first = groups.iter().find_map(|g| g.terms.first()).ok_or(Error::EmptyHamiltonian)?;
    let n = first.string.num_qubits();
    let dist = physdrift_distribution(groups, scheme)?;
    let lambda_s: f64 = groups.iter().map(|g| group_weight(g, scheme)).sum();
    let blocks: Vec<Vec<Entry>> =
        groups.iter().map(|g| physdrift_block(g, scheme, lambda_s, t, samples)).collect();
    let sampler = dist.sampler()?;
    let mut rng = seeded_rng(seed);
    let mut seq = GateSequence::new(n);
    for _ in 0..samples {
        let j = sampler.sample(&mut rng);
        seq.entries.extend_from_slice(&blocks[j]);
        seq.mark(MarkerKind::GroupEnd);
    }
    seq.provenance = provenance(
        Protocol::Physdrift,
        Some(seed),
        &[
            ("t", t),
            ("samples", samples as f64),
            ("scheme_mean", if scheme == GroupScheme::Mean { 1.0 } else { 0.0 }),
            ("lambda_s", lambda_s),
        ],
    );
    Ok(seq)
}

/// Random permutation: each step runs the canonical order forward or
/// reversed on a fair coin.
pub fn sample_random_permutation(h: &PauliHamiltonian, t: f64, steps: usize, seed: u64) -> Result<GateSequence> {
    require_terms(h)?;
    require_steps(steps)?;
    let mut rng = seeded_rng(seed);
    let mut seq = GateSequence::new(h.n_qubits());
    let dt = t / steps as f64;
    let mut coins = Vec::with_capacity(steps);
    for _ in 0..steps {
        let forward: bool = rng.random();
        coins.push(forward);
        if forward {
            for term in h.terms() {
                seq.push(term.string, term.coeff * dt);
            }
        } else {
            for term in h.terms().iter().rev() {
                seq.push(term.string, term.coeff * dt);
            }
        }
        seq.mark(MarkerKind::TrotterStepEnd);
    }
    seq.provenance = provenance(Protocol::RandomPermutation, Some(seed), &[("t", t), ("steps", steps as f64)]);
    seq.provenance.coins = coins;
    Ok(seq)
}

/// Default SparSto keep probabilities `min(1, |h_i| / Λ)`.
pub fn sparsto_default_keep(h: &PauliHamiltonian) -> Vec<f64> {
    let lmax = h.lambda_max();
    h.terms().iter().map(|t| (t.coeff.abs() / lmax).min(1.0)).collect()
}

/// SparSto: per step a fresh random permutation and its reverse, each
/// half of duration `t / 2N`; term `i` survives each pass with probability
/// `keep_i` and is rescaled by `1 / keep_i`.
pub fn sample_sparsto(
    h: &PauliHamiltonian,
    t: f64,
    steps: usize,
    keep: Option<&[f64]>,
    seed: u64,
) -> Result<GateSequence> {
    require_terms(h)?;
    require_steps(steps)?;
    let keep: Vec<f64> = match keep {
        Some(k) => k.to_vec(),
        None => sparsto_default_keep(h),
    };
    if keep.len() != h.len() {
        return Err(invalid("keep-probability vector length differs from term count"));
    }
    if let Some((i, k)) = keep.iter().enumerate().find(|(_, k)| !(**k > 0.0 && **k <= 1.0)) {
        return Err(invalid(format!("keep probability {k} for term {i} must lie in (0, 1]")));
    }
    let mut rng = seeded_rng(seed);
    let mut seq = GateSequence::new(h.n_qubits());
    let half = t / (2.0 * steps as f64);
    let mut order: Vec<usize> = (0..h.len()).collect();
    for _ in 0..steps {
        order.shuffle(&mut rng);
        for pass in [false, true] {
            let iter: Box<dyn Iterator<Item = &usize>> =
                if pass { Box::new(order.iter().rev()) } else { Box::new(order.iter()) };
            for &i in iter {
                let x: f64 = rng.random();
                if x < keep[i] {
                    let term = &h.terms()[i];
                    seq.push(term.string, term.coeff * half / keep[i]);
                }
            }
        }
        // an empty step leaves no marker
        seq.mark(MarkerKind::SampleStepEnd);
    }
    seq.provenance = provenance(Protocol::Sparsto, Some(seed), &[("t", t), ("steps", steps as f64)]);
    for (i, k) in keep.iter().enumerate() {
        seq.provenance.parameters.insert(format!("keep_{i}"), *k);
    }
    Ok(seq)
}

/// Protection phase distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtectionPhases {
    /// φ uniform on [0, 2π).
    #[default]
    Continuous,
    /// φ ∈ {0, π}.
    Discrete,
}

/// Wraps every Trotter step as `P† S P` with `P = Π_p exp(iφ Z_p)` and a
/// fresh φ per step.
pub fn apply_symmetric_protection(seq: &GateSequence, seed: u64) -> Result<GateSequence> {
    apply_symmetric_protection_with(seq, seed, ProtectionPhases::Continuous)
}

pub fn apply_symmetric_protection_with(
    seq: &GateSequence,
    seed: u64,
    phases: ProtectionPhases,
) -> Result<GateSequence> {
    let segments = seq.segments(MarkerKind::TrotterStepEnd);
    if segments.is_empty() {
        return Err(Error::MissingMarkers(MarkerKind::TrotterStepEnd.name().into()));
    }
    let mut rng = seeded_rng(seed);
    let n = seq.n_qubits;
    let zs: Vec<PauliString> =
        (0..n).map(|q| PauliString::from_sparse(n, &[(q, Pauli::Z)]).expect("q < n")).collect();
    let mut out = GateSequence::new(n);
    for range in segments {
        let phi = match phases {
            ProtectionPhases::Continuous => rng.random::<f64>() * std::f64::consts::TAU,
            ProtectionPhases::Discrete => {
                if rng.random::<bool>() {
                    std::f64::consts::PI
                } else {
                    0.0
                }
            }
        };
        for z in &zs {
            out.push(*z, -phi);
        }
        out.entries.extend_from_slice(&seq.entries[range]);
        for z in &zs {
            out.push(*z, phi);
        }
        out.mark(MarkerKind::TrotterStepEnd);
    }
    out.provenance = seq.provenance.clone();
    out.provenance.parameters.insert("protection_seed".into(), seed as f64);
    out.provenance.notes.push("symmetric particle-number protection".into());
    Ok(out)
}

/// Importance distribution `q_c(j) = |h_j| / (C_j λ_c)`.
pub fn importance_distribution(h: &PauliHamiltonian, cost: &[f64]) -> Result<SamplingDistribution> {
    require_terms(h)?;
    if cost.len() != h.len() {
        return Err(invalid("cost vector length differs from term count"));
    }
    if let Some(c) = cost.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(invalid(format!("cost {c} must be positive")));
    }
    let raw: Vec<f64> = h.terms().iter().zip(cost).map(|(t, c)| t.coeff.abs() / c).collect();
    SamplingDistribution::from_raw(&raw, SchemeTag::Importance)
}
