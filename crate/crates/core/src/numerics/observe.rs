//! Observable time series and shot-noise accounting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{hermitian_eigen, spectral_function, PauliAction};
use super::state::{expectation, NoiseConfig, StateVector};
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliHamiltonian;
use crate::schedule::{GateSequence, MarkerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checkpoint {
    EveryEntry,
    SampleStepEnd,
    GroupEnd,
    TrotterStepEnd,
}

impl Checkpoint {
    fn marker(self) -> Option<MarkerKind> {
        match self {
            Checkpoint::EveryEntry => None,
            Checkpoint::SampleStepEnd => Some(MarkerKind::SampleStepEnd),
            Checkpoint::GroupEnd => Some(MarkerKind::GroupEnd),
            Checkpoint::TrotterStepEnd => Some(MarkerKind::TrotterStepEnd),
        }
    }
}

impl std::str::FromStr for Checkpoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "every_entry" => Checkpoint::EveryEntry,
            "sample_step_end" => Checkpoint::SampleStepEnd,
            "group_end" => Checkpoint::GroupEnd,
            "trotter_step_end" => Checkpoint::TrotterStepEnd,
            other => return Err(Error::Config(format!("unknown checkpoint kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesRow {
    pub checkpoint: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Observable values at successive checkpoints; row 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub names: Vec<String>,
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["checkpoint".to_string(), "time".to_string()];
        h.extend(self.names.iter().cloned());
        h
    }
}

/// Named observable.
pub type Observable = (String, PauliHamiltonian);

fn values(state: &StateVector, observables: &[Observable]) -> Result<Vec<f64>> {
    observables.iter().map(|(_, o)| expectation(state, o)).collect()
}

/// Evolves `initial` through `seq`, recording the observables at every
/// checkpoint. Checkpoint `k` of `K` is stamped with time `t·k/K`.
pub fn track_observables(
    seq: &GateSequence,
    t: f64,
    initial: &StateVector,
    observables: &[Observable],
    checkpoint: Checkpoint,
) -> Result<TimeSeries> {
    if seq.n_qubits != initial.num_qubits() {
        return Err(Error::LengthMismatch { left: initial.num_qubits(), right: seq.n_qubits });
    }
    let ends: Vec<usize> = match checkpoint.marker() {
        None => (1..=seq.len()).collect(),
        Some(kind) => seq.markers_of(kind).map(|m| m.index).collect(),
    };
    if ends.is_empty() {
        return Err(match checkpoint.marker() {
            Some(kind) => Error::MissingMarkers(kind.name().into()),
            None => invalid("empty sequence has no checkpoints"),
        });
    }
    let total = ends.len() as f64;
    let mut state = initial.clone();
    let mut rows = vec![TimeSeriesRow { checkpoint: 0, time: 0.0, values: values(&state, observables)? }];
    let mut cursor = 0;
    for (k, &end) in ends.iter().enumerate() {
        for e in &seq.entries[cursor..end] {
            PauliAction::new(&e.string).apply_exp(e.angle, state.amplitudes_mut());
        }
        cursor = end;
        let idx = k + 1;
        rows.push(TimeSeriesRow { checkpoint: idx, time: t * idx as f64 / total, values: values(&state, observables)? });
    }
    Ok(TimeSeries { names: observables.iter().map(|(n, _)| n.clone()).collect(), rows })
}

/// Exact evolution sampled at `checkpoints` evenly spaced times in `(0, t]`.
pub fn track_exact(
    h: &PauliHamiltonian,
    t: f64,
    initial: &StateVector,
    observables: &[Observable],
    checkpoints: usize,
) -> Result<TimeSeries> {
    if checkpoints == 0 {
        return Err(invalid("need at least one checkpoint"));
    }
    let (vals, vecs) = hermitian_eigen(h)?;
    let dt = t / checkpoints as f64;
    let step = spectral_function(&vals, &vecs, |e| Complex64::from_polar(1.0, -e * dt));
    let mut state = initial.clone();
    let mut rows = vec![TimeSeriesRow { checkpoint: 0, time: 0.0, values: values(&state, observables)? }];
    for k in 1..=checkpoints {
        state = state.apply_matrix(&step)?;
        rows.push(TimeSeriesRow { checkpoint: k, time: dt * k as f64, values: values(&state, observables)? });
    }
    Ok(TimeSeries { names: observables.iter().map(|(n, _)| n.clone()).collect(), rows })
}

/// Attenuated expectation values and shots needed for precision `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotNoise {
    pub attenuation: f64,
    pub values: Vec<f64>,
    pub shots_required: u64,
}

/// `value · e^{-α·count}` and `ceil(1 / (ε² e^{-2α·count}))`.
pub fn shot_noise(values: &[f64], exponential_count: usize, cfg: &NoiseConfig, epsilon: f64) -> Result<ShotNoise> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("shot precision must be positive, got {epsilon}")));
    }
    if !(cfg.shot_alpha >= 0.0) {
        return Err(Error::Config(format!("shot_alpha {} is negative", cfg.shot_alpha)));
    }
    let exponent = cfg.shot_alpha * exponential_count as f64;
    let attenuation = (-exponent).exp();
    let shots = (2.0 * exponent).exp() / (epsilon * epsilon);
    Ok(ShotNoise {
        attenuation,
        values: values.iter().map(|v| v * attenuation).collect(),
        shots_required: shots.ceil() as u64,
    })
}
