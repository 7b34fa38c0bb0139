//! Sweeps, time series and single compilations driven by an experiment config.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GridUnit, InitialState, Metric, ObservableKind, Problem, ProtocolChoice};
use crate::error::{Error, Result};
use crate::fermion::particle_number;
use crate::gadget::{synthesize_sequence, tally, GateTally, PrimitiveCircuit};
use crate::numerics::channel::derived_seeds;
use crate::numerics::dense::{apply_sequence, hermitian_eigen, spectral_error};
use crate::numerics::{
    channel_mean_unitary, exact_unitary, expectation, inject_noise, mixing_bound, sector_ground_state, sequence_unitary,
    shot_noise, spectral_error_aligned, ChannelSource, Checkpoint, MeanMode, NoiseConfig, StateVector,
};
use crate::pauli::{DenseMatrix, PauliHamiltonian};
use crate::schedule::{
    apply_symmetric_protection_with, compile_suzuki, compile_trotter1, compile_trotter2, physdrift_distribution,
    sample_physdrift, sample_qdrift, sample_random_permutation, sample_sparsto, seeded_rng, sparsto_default_keep,
    GateSequence, MarkerKind,
};

/// Monte Carlo draws for channel means without a closed form.
const MONTE_CARLO_MEAN_SAMPLES: usize = 200;

/// Compiles one schedule for `choice`, wrapped in protection when enabled.
pub fn compile(
    problem: &Problem,
    cfg: &ExperimentConfig,
    choice: ProtocolChoice,
    t: f64,
    steps: usize,
    seed: u64,
) -> Result<GateSequence> {
    let h = &problem.hamiltonian;
    let seq = match choice {
        ProtocolChoice::Trotter1 => compile_trotter1(h, t, steps)?,
        ProtocolChoice::Trotter2 => compile_trotter2(h, t, steps)?,
        ProtocolChoice::Suzuki => compile_suzuki(h, t, steps, cfg.protocol.order)?,
        ProtocolChoice::Qdrift => sample_qdrift(h, t, steps, seed)?,
        ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => {
            let scheme = choice.group_scheme().expect("physDrift choice");
            sample_physdrift(problem.groups()?, t, steps, scheme, seed)?
        }
        ProtocolChoice::RandomPermutation => sample_random_permutation(h, t, steps, seed)?,
        ProtocolChoice::Sparsto => sample_sparsto(h, t, steps, None, seed)?,
    };
    if !cfg.protocol.protection {
        return Ok(seq);
    }
    if choice.protocol().is_randomized() {
        return Err(Error::Unsupported(format!("symmetric protection is defined for deterministic protocols, not {choice}")));
    }
    apply_symmetric_protection_with(&seq, seed, cfg.protocol.protection_phases)
}

/// Expected exponentials per step (or per draw).
pub fn entries_per_step(problem: &Problem, cfg: &ExperimentConfig, choice: ProtocolChoice) -> Result<f64> {
    Ok(match choice {
        ProtocolChoice::Qdrift => 1.0,
        ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => {
            let groups = problem.groups()?;
            let dist = physdrift_distribution(groups, choice.group_scheme().expect("physDrift choice"))?;
            groups.iter().zip(&dist.weights).map(|(g, w)| w * g.terms.len() as f64).sum()
        }
        ProtocolChoice::Sparsto => 2.0 * sparsto_default_keep(&problem.hamiltonian).iter().sum::<f64>(),
        _ => compile(problem, cfg, choice, 1.0, 1, 0)?.len() as f64,
    })
}

/// Step counts for `choice`, converting exponential-count targets when asked.
pub fn resolve_steps(problem: &Problem, cfg: &ExperimentConfig, choice: ProtocolChoice) -> Result<Vec<usize>> {
    match cfg.protocol.grid_unit {
        GridUnit::Steps => Ok(cfg.protocol.grid.clone()),
        GridUnit::ExponentialCount => {
            let per = entries_per_step(problem, cfg, choice)?;
            let mut steps: Vec<usize> =
                cfg.protocol.grid.iter().map(|c| ((*c as f64 / per).round() as usize).max(1)).collect();
            steps.dedup();
            Ok(steps)
        }
    }
}

/// Noise settings of one trial: the configured stream offset by the trial seed.
pub fn trial_noise(cfg: &ExperimentConfig, seed: u64) -> NoiseConfig {
    NoiseConfig { seed: cfg.noise.seed.wrapping_add(seed), ..cfg.noise }
}

/// Mean unitary of `count` orderings of the group blocks of a physDrift
/// sequence; the first ordering is the sampled one.
pub fn block_reorder_mean(seq: &GateSequence, count: usize, seed: u64) -> Result<DenseMatrix> {
    let blocks = seq.segments(MarkerKind::GroupEnd);
    if blocks.is_empty() {
        return Err(Error::MissingMarkers(MarkerKind::GroupEnd.name().into()));
    }
    let mut sum = sequence_unitary(seq)?;
    for s in derived_seeds(seed, count.saturating_sub(1)) {
        let mut order = blocks.clone();
        order.shuffle(&mut seeded_rng(s));
        let mut shuffled = seq.clone();
        shuffled.entries = order.into_iter().flat_map(|r| seq.entries[r].iter().copied()).collect();
        sum += sequence_unitary(&shuffled)?;
    }
    Ok(sum / Complex64::new(count as f64, 0.0))
}

/// `2‖U - E[V]‖` over the protocol's own randomness; `None` for deterministic
/// schedules, whose bound is per sequence.
pub fn channel_mixing_bound(
    problem: &Problem,
    cfg: &ExperimentConfig,
    choice: ProtocolChoice,
    exact: &DenseMatrix,
    t: f64,
    steps: usize,
) -> Result<Option<f64>> {
    let h = &problem.hamiltonian;
    let source = match choice {
        ProtocolChoice::Qdrift => ChannelSource::Qdrift { h, t, samples: steps },
        ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => ChannelSource::Physdrift {
            groups: problem.groups()?,
            scheme: choice.group_scheme().expect("physDrift choice"),
            t,
            samples: steps,
        },
        ProtocolChoice::RandomPermutation => ChannelSource::RandomPermutation { h, t, steps },
        ProtocolChoice::Sparsto => ChannelSource::Sparsto { h, t, steps },
        _ => return Ok(None),
    };
    let mode = match choice {
        ProtocolChoice::Sparsto => MeanMode::MonteCarlo { samples: MONTE_CARLO_MEAN_SAMPLES, seed: cfg.trials.base_seed },
        _ => MeanMode::Analytic,
    };
    Ok(Some(mixing_bound(exact, &channel_mean_unitary(&source, mode)?)?))
}

/// One line of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub protocol: ProtocolChoice,
    pub seed: u64,
    pub t: f64,
    pub n: usize,
    pub exponential_count: usize,
    pub cnot_count: usize,
    pub spectral_error: Option<f64>,
    pub mixing_bound: Option<f64>,
    /// Values in the order of [`observable_columns`].
    pub observables: Vec<f64>,
    #[serde(skip)]
    pub tally: GateTally,
}

/// Names of the observable columns, shots column included when attenuating.
pub fn observable_columns(cfg: &ExperimentConfig) -> Vec<String> {
    let mut cols: Vec<String> = cfg.observables.names.iter().map(|k| k.name().to_string()).collect();
    if cfg.noise.shot_alpha > 0.0 {
        cols.push("shots_required".into());
    }
    cols
}

/// Precomputed quantities shared by every trial of a study.
pub struct StudyContext<'a> {
    pub problem: &'a Problem,
    pub cfg: &'a ExperimentConfig,
    pub initial: Option<StateVector>,
    pub initial_energy: f64,
    number: PauliHamiltonian,
}

impl<'a> StudyContext<'a> {
    pub fn new(problem: &'a Problem, cfg: &'a ExperimentConfig, needs_state: bool) -> Result<Self> {
        let n = problem.n_qubits();
        let initial = if needs_state { Some(initial_state(problem, &cfg.observables.initial)?) } else { None };
        let initial_energy = match &initial {
            Some(s) => expectation(s, &problem.hamiltonian)?,
            None => 0.0,
        };
        Ok(StudyContext { problem, cfg, initial, initial_energy, number: particle_number(n, None)?.pauli_form })
    }

    fn observable_values(&self, state: &StateVector, exact: Option<&StateVector>, exponentials: usize) -> Result<Vec<f64>> {
        let cfg = self.cfg;
        let energy = expectation(state, &self.problem.hamiltonian)?;
        let number = expectation(state, &self.number)?;
        let attenuation = shot_noise(&[], exponentials, &cfg.noise, cfg.observables.shot_epsilon)?;
        let mut values = Vec::with_capacity(cfg.observables.names.len() + 1);
        for kind in &cfg.observables.names {
            values.push(match kind {
                ObservableKind::Energy => energy * attenuation.attenuation,
                ObservableKind::EnergyError => (energy * attenuation.attenuation - self.initial_energy).abs(),
                ObservableKind::ParticleNumber => number * attenuation.attenuation,
                ObservableKind::StateError => {
                    state.distance_aligned(exact.ok_or_else(|| Error::InvalidArgument("no exact state".into()))?)
                }
            });
        }
        if cfg.noise.shot_alpha > 0.0 {
            values.push(attenuation.shots_required as f64);
        }
        Ok(values)
    }
}

/// Builds the configured initial state.
pub fn initial_state(problem: &Problem, initial: &InitialState) -> Result<StateVector> {
    let n = problem.n_qubits();
    let electrons = || {
        problem
            .electrons
            .filter(|e| *e <= n)
            .ok_or_else(|| Error::Config("electron count missing or larger than the register".into()))
    };
    match initial {
        InitialState::HartreeFock => {
            let k = electrons()?;
            let bits: String = (0..n).map(|q| if q < k { '1' } else { '0' }).collect();
            StateVector::from_bits(&bits)
        }
        InitialState::Ground => Ok(sector_ground_state(&problem.hamiltonian, electrons()?)?.1),
        InitialState::Bits(bits) => {
            if bits.len() != n {
                return Err(Error::LengthMismatch { left: n, right: bits.len() });
            }
            StateVector::from_bits(bits)
        }
    }
}

struct GridPoint {
    choice: ProtocolChoice,
    t_index: usize,
    steps: usize,
    mixing: Option<f64>,
}

struct TimeData {
    t: f64,
    exact: Option<DenseMatrix>,
    exact_state: Option<StateVector>,
}

fn run_trial(ctx: &StudyContext<'_>, point: &GridPoint, times: &[TimeData], seed: u64) -> Result<ResultRow> {
    let cfg = ctx.cfg;
    let td = &times[point.t_index];
    let seq = compile(ctx.problem, cfg, point.choice, td.t, point.steps, seed)?;
    let circuit = synthesize_sequence(&seq)?;
    let counts = tally(&circuit);
    let noisy: Option<PrimitiveCircuit> = if cfg.noise.depol_p > 0.0 {
        Some(inject_noise(&circuit, &trial_noise(cfg, seed))?)
    } else {
        None
    };

    let mut spectral = None;
    let mut mixing = point.mixing;
    if let Some(u) = &td.exact {
        let ideal = || -> Result<DenseMatrix> {
            match point.choice {
                ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean if cfg.protocol.permutation_average > 1 => {
                    block_reorder_mean(&seq, cfg.protocol.permutation_average, seed)
                }
                _ => sequence_unitary(&seq),
            }
        };
        if cfg.wants(Metric::SpectralError) {
            let v = match &noisy {
                Some(c) => c.to_dense()?,
                None => ideal()?,
            };
            spectral = Some(spectral_error_aligned(u, &v)?);
        }
        if cfg.wants(Metric::MixingBound) && mixing.is_none() {
            // a deterministic schedule is its own mean
            mixing = Some(2.0 * spectral_error(u, &sequence_unitary(&seq)?)?);
        }
    }
    if !cfg.wants(Metric::MixingBound) {
        mixing = None;
    }

    let observables = match &ctx.initial {
        Some(initial) => {
            let mut state = initial.clone();
            match &noisy {
                Some(c) => c.apply(state.amplitudes_mut()),
                None => apply_sequence(&seq, state.amplitudes_mut()),
            }
            ctx.observable_values(&state, td.exact_state.as_ref(), seq.len())?
        }
        None => Vec::new(),
    };

    Ok(ResultRow {
        protocol: point.choice,
        seed,
        t: td.t,
        n: point.steps,
        exponential_count: seq.len(),
        cnot_count: counts.cnot_count,
        spectral_error: spectral,
        mixing_bound: mixing,
        observables,
        tally: counts,
    })
}

/// Every (protocol, t, N, trial) combination, in that nesting order.
pub fn sweep(problem: &Problem, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let ctx = StudyContext::new(problem, cfg, cfg.wants(Metric::Observables))?;
    let dense = cfg.wants(Metric::SpectralError)
        || cfg.wants(Metric::MixingBound)
        || cfg.observables.names.contains(&ObservableKind::StateError);
    let times: Vec<TimeData> = cfg
        .protocol
        .times
        .iter()
        .map(|&t| {
            let exact = if dense { Some(exact_unitary(&problem.hamiltonian, t)?) } else { None };
            let exact_state = match (&exact, &ctx.initial) {
                (Some(u), Some(s)) => Some(s.apply_matrix(u)?),
                _ => None,
            };
            Ok(TimeData { t, exact, exact_state })
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for &choice in &cfg.protocol.names {
        let steps = resolve_steps(problem, cfg, choice)?;
        for t_index in 0..times.len() {
            for &s in &steps {
                points.push(GridPoint { choice, t_index, steps: s, mixing: None });
            }
        }
    }
    if cfg.wants(Metric::MixingBound) {
        let bounds: Vec<Option<f64>> = points
            .par_iter()
            .map(|p| {
                let td = &times[p.t_index];
                channel_mixing_bound(problem, cfg, p.choice, td.exact.as_ref().expect("dense data"), td.t, p.steps)
            })
            .collect::<Result<_>>()?;
        for (p, b) in points.iter_mut().zip(bounds) {
            p.mixing = b;
        }
    }

    let seeds: Vec<u64> = (0..cfg.trials.count as u64).map(|i| cfg.trials.base_seed.wrapping_add(i)).collect();
    let jobs: Vec<(&GridPoint, u64)> = points.iter().flat_map(|p| seeds.iter().map(move |s| (p, *s))).collect();
    jobs.par_iter().map(|(p, s)| run_trial(&ctx, p, &times, *s)).collect()
}

/// Mean and standard error of a column over the trials of each grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub protocol: ProtocolChoice,
    pub t: f64,
    pub n: usize,
    pub trials: usize,
    pub mean_exponential_count: f64,
    pub mean_spectral_error: Option<f64>,
    pub stderr_spectral_error: Option<f64>,
    pub mixing_bound: Option<f64>,
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups consecutive rows sharing (protocol, t, N); rows from [`sweep`] are
/// already in that order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    rows.chunk_by(|a, b| a.protocol == b.protocol && a.t == b.t && a.n == b.n)
        .map(|chunk| {
            let errs: Vec<f64> = chunk.iter().filter_map(|r| r.spectral_error).collect();
            let (mean, se) = mean_and_stderr(&errs);
            let has = !errs.is_empty();
            let mixing: Vec<f64> = chunk.iter().filter_map(|r| r.mixing_bound).collect();
            SummaryRow {
                protocol: chunk[0].protocol,
                t: chunk[0].t,
                n: chunk[0].n,
                trials: chunk.len(),
                mean_exponential_count: chunk.iter().map(|r| r.exponential_count as f64).sum::<f64>() / chunk.len() as f64,
                mean_spectral_error: has.then_some(mean),
                stderr_spectral_error: has.then_some(se),
                mixing_bound: (!mixing.is_empty()).then(|| mean_and_stderr(&mixing).0),
            }
        })
        .collect()
}

/// Observable values at one checkpoint of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    /// Protocol name, or `exact`.
    pub protocol: String,
    pub seed: Option<u64>,
    pub t_max: f64,
    pub n: Option<usize>,
    pub checkpoint: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Natural checkpoint of each protocol.
pub fn default_checkpoint(choice: ProtocolChoice) -> Checkpoint {
    match choice {
        ProtocolChoice::Qdrift | ProtocolChoice::Sparsto => Checkpoint::SampleStepEnd,
        ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => Checkpoint::GroupEnd,
        _ => Checkpoint::TrotterStepEnd,
    }
}

fn checkpoint_ends(seq: &GateSequence, checkpoint: Checkpoint) -> Result<Vec<usize>> {
    let kind = match checkpoint {
        Checkpoint::EveryEntry => return Ok((1..=seq.len()).collect()),
        Checkpoint::SampleStepEnd => MarkerKind::SampleStepEnd,
        Checkpoint::GroupEnd => MarkerKind::GroupEnd,
        Checkpoint::TrotterStepEnd => MarkerKind::TrotterStepEnd,
    };
    let ends: Vec<usize> = seq.markers_of(kind).map(|m| m.index).collect();
    if ends.is_empty() {
        return Err(Error::MissingMarkers(kind.name().into()));
    }
    Ok(ends)
}

/// Exact evolution `e^{-iHτ}|ψ>` evaluated cheaply at many times.
struct ExactEvolution {
    vectors: DenseMatrix,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl ExactEvolution {
    fn new(h: &PauliHamiltonian, initial: &StateVector) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(h)?;
        let psi = nalgebra::DVector::from_column_slice(initial.amplitudes());
        let coeffs = (vectors.adjoint() * psi).iter().copied().collect();
        Ok(ExactEvolution { vectors, values: values.iter().copied().collect(), coeffs })
    }

    fn at(&self, time: f64) -> Result<StateVector> {
        let phased = nalgebra::DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().zip(&self.values).map(|(c, e)| c * Complex64::from_polar(1.0, -e * time)),
        );
        StateVector::from_amplitudes((&self.vectors * phased).iter().copied().collect())
    }
}

/// Number of checkpoints on the exact reference curve.
const EXACT_CHECKPOINTS: usize = 100;

/// Observable time series for every protocol, time, step count and trial,
/// followed by the exact reference curve for each time.
pub fn simulate(problem: &Problem, cfg: &ExperimentConfig) -> Result<Vec<SeriesRow>> {
    let ctx = StudyContext::new(problem, cfg, true)?;
    let initial = ctx.initial.clone().expect("state requested");
    let exact = ExactEvolution::new(&problem.hamiltonian, &initial)?;
    let seeds: Vec<u64> = (0..cfg.trials.count as u64).map(|i| cfg.trials.base_seed.wrapping_add(i)).collect();

    let mut jobs = Vec::new();
    for &choice in &cfg.protocol.names {
        for &steps in &resolve_steps(problem, cfg, choice)? {
            for &t in &cfg.protocol.times {
                for &seed in &seeds {
                    jobs.push((choice, t, steps, seed));
                }
            }
        }
    }
    let traces: Vec<Vec<SeriesRow>> = jobs
        .par_iter()
        .map(|&(choice, t, steps, seed)| {
            let seq = compile(problem, cfg, choice, t, steps, seed)?;
            let checkpoint = cfg.observables.checkpoint.unwrap_or_else(|| default_checkpoint(choice));
            let ends = checkpoint_ends(&seq, checkpoint)?;
            let circuit = synthesize_sequence(&seq)?;
            let circuit = if cfg.noise.depol_p > 0.0 { inject_noise(&circuit, &trial_noise(cfg, seed))? } else { circuit };
            let mut state = initial.clone();
            let mut rows = Vec::with_capacity(ends.len() + 1);
            let mut push = |k: usize, time: f64, state: &StateVector, applied: usize| -> Result<()> {
                let reference = exact.at(time)?;
                rows.push(SeriesRow {
                    protocol: choice.name().into(),
                    seed: Some(seed),
                    t_max: t,
                    n: Some(steps),
                    checkpoint: k,
                    time,
                    values: ctx.observable_values(state, Some(&reference), applied)?,
                });
                Ok(())
            };
            push(0, 0.0, &state, 0)?;
            let mut gate = 0;
            for (k, &end) in ends.iter().enumerate() {
                while gate < circuit.gates.len() && circuit.source_entry[gate] < end {
                    crate::gadget::apply_gate(circuit.n_qubits, state.amplitudes_mut(), &circuit.gates[gate]);
                    gate += 1;
                }
                push(k + 1, t * (k + 1) as f64 / ends.len() as f64, &state, end)?;
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SeriesRow> = traces.into_iter().flatten().collect();
    for &t in &cfg.protocol.times {
        for k in 0..=EXACT_CHECKPOINTS {
            let time = t * k as f64 / EXACT_CHECKPOINTS as f64;
            let state = exact.at(time)?;
            rows.push(SeriesRow {
                protocol: "exact".into(),
                seed: None,
                t_max: t,
                n: None,
                checkpoint: k,
                time,
                values: ctx.observable_values(&state, Some(&state), 0)?,
            });
        }
    }
    Ok(rows)
}
