//! Draw histograms and measured-versus-theoretical bound tables.

use std::collections::HashMap;

use serde::Serialize;

use super::config::{ExperimentConfig, Problem, ProtocolChoice};
use super::study::{channel_mixing_bound, compile};
use crate::bounds::{qdrift_error_with_prefactor, random_perm_bound};
use crate::error::{Error, Result};
use crate::numerics::{exact_unitary, sequence_unitary, spectral_error};
use crate::pauli::PauliString;
use crate::schedule::{physdrift_distribution, qdrift_distribution, sparsto_default_keep, MarkerKind};

/// Draw count of one sampling index next to its expectation `N·p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub index: usize,
    pub label: String,
    pub count: u64,
    pub expected: f64,
}

/// Draw counts of the first configured protocol at the first time, with the
/// first grid value as the number of draws.
pub fn histogram(problem: &Problem, cfg: &ExperimentConfig) -> Result<Vec<HistogramRow>> {
    let choice = cfg.protocol.names[0];
    let draws = cfg.protocol.grid[0];
    let n = draws as f64;
    let seq = compile(problem, cfg, choice, cfg.protocol.times[0], draws, cfg.trials.base_seed)?;
    let h = &problem.hamiltonian;
    let term_index: HashMap<PauliString, usize> = h.terms().iter().enumerate().map(|(i, t)| (t.string, i)).collect();
    let per_term = |counts: &mut Vec<u64>| {
        for e in &seq.entries {
            counts[term_index[&e.string]] += 1;
        }
    };
    let term_label = |i: usize| h.terms()[i].string.to_string();
    let rows = match choice {
        ProtocolChoice::Qdrift => {
            let mut counts = vec![0; h.len()];
            per_term(&mut counts);
            let p = qdrift_distribution(h)?.weights;
            (0..h.len()).map(|i| HistogramRow { index: i, label: term_label(i), count: counts[i], expected: n * p[i] }).collect()
        }
        ProtocolChoice::Sparsto => {
            let mut counts = vec![0; h.len()];
            per_term(&mut counts);
            let keep = sparsto_default_keep(h);
            (0..h.len())
                .map(|i| HistogramRow { index: i, label: term_label(i), count: counts[i], expected: 2.0 * n * keep[i] })
                .collect()
        }
        ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => {
            let groups = problem.groups()?;
            let owner: HashMap<PauliString, usize> =
                groups.iter().enumerate().flat_map(|(j, g)| g.terms.iter().map(move |t| (t.string, j))).collect();
            let mut counts = vec![0; groups.len()];
            for r in seq.segments(MarkerKind::GroupEnd) {
                counts[owner[&seq.entries[r.start].string]] += 1;
            }
            let p = physdrift_distribution(groups, choice.group_scheme().expect("physDrift choice"))?.weights;
            groups
                .iter()
                .enumerate()
                .map(|(j, g)| HistogramRow { index: j, label: g.label(), count: counts[j], expected: n * p[j] })
                .collect()
        }
        ProtocolChoice::RandomPermutation => {
            let forward = seq.provenance.coins.iter().filter(|c| **c).count() as u64;
            vec![
                HistogramRow { index: 0, label: "forward".into(), count: forward, expected: n / 2.0 },
                HistogramRow { index: 1, label: "reverse".into(), count: draws as u64 - forward, expected: n / 2.0 },
            ]
        }
        deterministic => {
            return Err(Error::Unsupported(format!("{deterministic} draws nothing; histograms need a randomized protocol")))
        }
    };
    Ok(rows)
}

/// Measured error next to the closed-form estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub protocol: ProtocolChoice,
    pub t: f64,
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    /// `measured <= bound`; only reported for rigorous inequalities.
    pub within_bound: Option<bool>,
    /// `inequality` or `up_to_constant`.
    pub kind: &'static str,
}

/// One row per (protocol, t, N). Randomized rows compare the mixing bound of
/// the analytic mean channel; deterministic rows the sequence error.
pub fn compare_bounds(problem: &Problem, cfg: &ExperimentConfig) -> Result<Vec<BoundComparison>> {
    let h = &problem.hamiltonian;
    let (terms, lambda_max, lambda_one) = (h.len(), h.lambda_max(), h.lambda_one_norm());
    let mut rows = Vec::new();
    for &choice in &cfg.protocol.names {
        for &t in &cfg.protocol.times {
            let u = exact_unitary(h, t)?;
            for &n in &cfg.protocol.grid {
                let scale = t * terms as f64 * lambda_max;
                let (measured, bound, kind) = match choice {
                    ProtocolChoice::Qdrift => (
                        channel_mixing_bound(problem, cfg, choice, &u, t, n)?.expect("randomized"),
                        qdrift_error_with_prefactor(lambda_one, t, n)?,
                        "inequality",
                    ),
                    ProtocolChoice::RandomPermutation => (
                        channel_mixing_bound(problem, cfg, choice, &u, t, n)?.expect("randomized"),
                        random_perm_bound(lambda_max, t, terms, n)?,
                        "inequality",
                    ),
                    ProtocolChoice::Trotter1 | ProtocolChoice::Trotter2 | ProtocolChoice::Suzuki => {
                        let order = match choice {
                            ProtocolChoice::Trotter1 => 1,
                            ProtocolChoice::Trotter2 => 2,
                            _ => cfg.protocol.order as i32,
                        };
                        let seq = compile(problem, cfg, choice, t, n, cfg.trials.base_seed)?;
                        let measured = spectral_error(&u, &sequence_unitary(&seq)?)?;
                        (measured, scale.powi(order + 1) / (n as f64).powi(order), "up_to_constant")
                    }
                    other => {
                        return Err(Error::Unsupported(format!("no closed-form error bound for {other}")));
                    }
                };
                rows.push(BoundComparison {
                    protocol: choice,
                    t,
                    n,
                    measured,
                    bound,
                    ratio: measured / bound,
                    within_bound: (kind == "inequality").then_some(measured <= bound),
                    kind,
                });
            }
        }
    }
    Ok(rows)
}
