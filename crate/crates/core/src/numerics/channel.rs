//! Mixed-unitary channels: per-step mixtures, mean unitaries and the
//! mixing-lemma bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::dense::{matrix_power, sequence_unitary};
use crate::error::{invalid, Error, Result};
use crate::fermion::PhysicalGroup;
use crate::pauli::{check_dense, DenseMatrix, PauliHamiltonian};
use crate::schedule::{
    group_weight, physdrift_block, qdrift_distribution, sample_physdrift, sample_qdrift,
    sample_random_permutation, sample_sparsto, Entry, GateSequence, GroupScheme,
};

const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// `ρ ↦ Σ p_k U_k ρ U_k†`.
#[derive(Debug, Clone)]
pub struct MixedUnitaryChannel {
    pub components: Vec<(f64, DenseMatrix)>,
}

impl MixedUnitaryChannel {
    pub fn new(components: Vec<(f64, DenseMatrix)>) -> Result<Self> {
        let first = components.first().ok_or_else(|| invalid("channel needs at least one component"))?;
        let shape = first.1.shape();
        if components.iter().any(|(p, u)| *p < 0.0 || !p.is_finite() || u.shape() != shape) {
            return Err(invalid("channel components need nonnegative weights and equal shapes"));
        }
        let total: f64 = components.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(invalid(format!("channel probabilities sum to {total}")));
        }
        Ok(MixedUnitaryChannel { components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.nrows()
    }

    /// `Σ p_k U_k`, in general not unitary.
    pub fn mean(&self) -> DenseMatrix {
        let dim = self.dim();
        self.components
            .iter()
            .fold(DenseMatrix::zeros(dim, dim), |acc, (p, u)| acc + u * Complex64::new(*p, 0.0))
    }

    pub fn apply(&self, rho: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim();
        self.components.iter().fold(DenseMatrix::zeros(dim, dim), |acc, (p, u)| {
            acc + u * rho * u.adjoint() * Complex64::new(*p, 0.0)
        })
    }
}

fn block_unitary(n: usize, entries: &[Entry]) -> Result<DenseMatrix> {
    let mut seq = GateSequence::new(n);
    seq.entries.extend_from_slice(entries);
    sequence_unitary(&seq)
}

/// Randomized protocol whose mean channel is requested.
#[derive(Debug, Clone, Copy)]
pub enum ChannelSource<'a> {
    Qdrift { h: &'a PauliHamiltonian, t: f64, samples: usize },
    Physdrift { groups: &'a [PhysicalGroup], scheme: GroupScheme, t: f64, samples: usize },
    RandomPermutation { h: &'a PauliHamiltonian, t: f64, steps: usize },
    Sparsto { h: &'a PauliHamiltonian, t: f64, steps: usize },
}

impl ChannelSource<'_> {
    pub fn n_qubits(&self) -> Result<usize> {
        match self {
            ChannelSource::Qdrift { h, .. }
            | ChannelSource::RandomPermutation { h, .. }
            | ChannelSource::Sparsto { h, .. } => Ok(h.n_qubits()),
            ChannelSource::Physdrift { groups, .. } => groups
                .iter()
                .find_map(|g| g.terms.first())
                .map(|t| t.string.num_qubits())
                .ok_or(Error::EmptyHamiltonian),
        }
    }

    /// Number of i.i.d. steps the sampled sequence is made of.
    pub fn repetitions(&self) -> usize {
        match *self {
            ChannelSource::Qdrift { samples, .. } | ChannelSource::Physdrift { samples, .. } => samples,
            ChannelSource::RandomPermutation { steps, .. } | ChannelSource::Sparsto { steps, .. } => steps,
        }
    }

    /// Single-step mixture; unavailable for SparSto.
    pub fn step_channel(&self) -> Result<MixedUnitaryChannel> {
        let n = self.n_qubits()?;
        check_dense(n)?;
        let components = match *self {
            ChannelSource::Qdrift { h, t, samples } => {
                let p = qdrift_distribution(h)?;
                let angle = h.lambda_one_norm() * t / samples as f64;
                h.terms()
                    .iter()
                    .zip(&p.weights)
                    .map(|(term, w)| {
                        let e = Entry { string: term.string, angle: angle * term.coeff.signum() };
                        Ok((*w, block_unitary(n, &[e])?))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            ChannelSource::Physdrift { groups, scheme, t, samples } => {
                let lambda_s: f64 = groups.iter().map(|g| group_weight(g, scheme)).sum();
                if lambda_s <= 0.0 {
                    return Err(invalid("every group weight is zero"));
                }
                groups
                    .iter()
                    .filter(|g| group_weight(g, scheme) > 0.0)
                    .map(|g| {
                        let block = physdrift_block(g, scheme, lambda_s, t, samples);
                        Ok((group_weight(g, scheme) / lambda_s, block_unitary(n, &block)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            ChannelSource::RandomPermutation { h, t, steps } => {
                let dt = t / steps as f64;
                let forward: Vec<Entry> =
                    h.terms().iter().map(|x| Entry { string: x.string, angle: x.coeff * dt }).collect();
                let reverse: Vec<Entry> = forward.iter().rev().copied().collect();
                vec![(0.5, block_unitary(n, &forward)?), (0.5, block_unitary(n, &reverse)?)]
            }
            ChannelSource::Sparsto { .. } => {
                return Err(Error::Unsupported(
                    "analytic mean for SparSto: the per-step mixture has exponentially many branches".into(),
                ))
            }
        };
        MixedUnitaryChannel::new(components)
    }

    /// One full sampled sequence.
    pub fn sample(&self, seed: u64) -> Result<GateSequence> {
        match *self {
            ChannelSource::Qdrift { h, t, samples } => sample_qdrift(h, t, samples, seed),
            ChannelSource::Physdrift { groups, scheme, t, samples } => sample_physdrift(groups, t, samples, scheme, seed),
            ChannelSource::RandomPermutation { h, t, steps } => sample_random_permutation(h, t, steps, seed),
            ChannelSource::Sparsto { h, t, steps } => sample_sparsto(h, t, steps, None, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    /// `(Σ p_j V_j)^N`.
    Analytic,
    /// Average of `samples` independently sampled sequence unitaries.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Derived per-sample seeds, stable under changes to the sample count.
pub fn derived_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..count).map(|_| rng.random()).collect()
}

pub fn channel_mean_unitary(source: &ChannelSource<'_>, mode: MeanMode) -> Result<DenseMatrix> {
    match mode {
        MeanMode::Analytic => Ok(matrix_power(&source.step_channel()?.mean(), source.repetitions())),
        MeanMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(invalid("Monte Carlo mean needs at least one sample"));
            }
            let unitaries = derived_seeds(seed, samples)
                .into_par_iter()
                .map(|s| sequence_unitary(&source.sample(s)?))
                .collect::<Result<Vec<_>>>()?;
            let dim = unitaries[0].nrows();
            let sum = unitaries.iter().fold(DenseMatrix::zeros(dim, dim), |acc, u| acc + u);
            Ok(sum / Complex64::new(samples as f64, 0.0))
        }
    }
}

/// `2 ‖U - E[V]‖`, an upper bound on the diamond distance of the mixture.
pub fn mixing_bound(u: &DenseMatrix, mean_v: &DenseMatrix) -> Result<f64> {
    Ok(2.0 * super::dense::spectral_error(u, mean_v)?)
}

/// Half the trace norm of a Hermitian matrix.
pub fn trace_distance(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a - b;
    let eig = nalgebra::SymmetricEigen::new(diff);
    0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Largest sampled trace distance between `UρU†` and the channel output,
/// over Haar-like random pure states; a lower bound on the diamond distance.
pub fn sampled_trace_distance(u: &DenseMatrix, channel: &MixedUnitaryChannel, states: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = channel.dim();
    (0..states)
        .map(|_| {
            let mut psi = nalgebra::DVector::<Complex64>::from_fn(dim, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let norm = psi.norm();
            psi /= Complex64::new(norm, 0.0);
            let rho = &psi * psi.adjoint();
            trace_distance(&(u * &rho * u.adjoint()), &channel.apply(&rho))
        })
        .fold(0.0, f64::max)
}

/// Single-step generator `Σ angle · P` averaged over sampled steps, as a dense matrix.
pub fn mean_step_generator(seqs: &[GateSequence]) -> Result<DenseMatrix> {
    let first = seqs.first().ok_or_else(|| invalid("no sequences"))?;
    check_dense(first.n_qubits)?;
    let dim = 1usize << first.n_qubits;
    let mut acc = DenseMatrix::zeros(dim, dim);
    for s in seqs {
        for e in &s.entries {
            acc += e.string.to_dense()? * Complex64::new(e.angle, 0.0);
        }
    }
    Ok(acc / Complex64::new(seqs.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{build_hubbard, classify_groups, jordan_wigner};
    use crate::numerics::dense::{exact_unitary, spectral_error};
    use crate::pauli::PauliString;

    fn hubbard2() -> (PauliHamiltonian, Vec<PhysicalGroup>) {
        let sq = build_hubbard(2, 1.0, 4.0).unwrap();
        (jordan_wigner(&sq).unwrap(), classify_groups(&sq).unwrap())
    }

    #[test]
    fn single_term_mean_is_exact() {
        let h = PauliHamiltonian::from_pairs(&[(-0.6, "XZ")]).unwrap();
        let u = exact_unitary(&h, 0.8).unwrap();
        let mean = channel_mean_unitary(&ChannelSource::Qdrift { h: &h, t: 0.8, samples: 7 }, MeanMode::Analytic).unwrap();
        assert!(spectral_error(&u, &mean).unwrap() < 1e-12);
    }

    #[test]
    fn qdrift_mean_obeys_bound() {
        let h = PauliHamiltonian::from_pairs(&[(1.0, "X"), (1.0, "Z")]).unwrap();
        let (t, n) = (0.5, 20);
        let lambda = h.lambda_one_norm();
        let mean = channel_mean_unitary(&ChannelSource::Qdrift { h: &h, t, samples: n }, MeanMode::Analytic).unwrap();
        let measured = mixing_bound(&exact_unitary(&h, t).unwrap(), &mean).unwrap();
        let nf = n as f64;
        let bound = 2.0 * lambda * lambda * t * t / nf * (2.0 * lambda * t / nf).exp();
        assert!(measured <= bound, "{measured} > {bound}");
        assert!(measured > 0.0);
    }

    #[test]
    fn monte_carlo_converges_to_analytic() {
        let (h, _) = hubbard2();
        let src = ChannelSource::Qdrift { h: &h, t: 0.4, samples: 4 };
        let analytic = channel_mean_unitary(&src, MeanMode::Analytic).unwrap();
        let r = 4000;
        let mc = channel_mean_unitary(&src, MeanMode::MonteCarlo { samples: r, seed: 17 }).unwrap();
        let diff = spectral_error(&analytic, &mc).unwrap();
        assert!(diff < 5.0 / (r as f64).sqrt(), "{diff}");

        let src = ChannelSource::RandomPermutation { h: &h, t: 0.4, steps: 3 };
        let analytic = channel_mean_unitary(&src, MeanMode::Analytic).unwrap();
        let mc = channel_mean_unitary(&src, MeanMode::MonteCarlo { samples: r, seed: 3 }).unwrap();
        assert!(spectral_error(&analytic, &mc).unwrap() < 5.0 / (r as f64).sqrt());
    }

    #[test]
    fn physdrift_and_sparsto_means() {
        let (h, groups) = hubbard2();
        let src = ChannelSource::Physdrift { groups: &groups, scheme: GroupScheme::Abs, t: 0.3, samples: 3 };
        let analytic = channel_mean_unitary(&src, MeanMode::Analytic).unwrap();
        let mc = channel_mean_unitary(&src, MeanMode::MonteCarlo { samples: 3000, seed: 1 }).unwrap();
        assert!(spectral_error(&analytic, &mc).unwrap() < 5.0 / 3000f64.sqrt());
        let sp = ChannelSource::Sparsto { h: &h, t: 0.3, steps: 2 };
        assert!(matches!(channel_mean_unitary(&sp, MeanMode::Analytic), Err(Error::Unsupported(_))));
        assert!(channel_mean_unitary(&sp, MeanMode::MonteCarlo { samples: 10, seed: 1 }).is_ok());
    }

    #[test]
    fn mixing_bound_examples() {
        let (h, _) = hubbard2();
        let u = exact_unitary(&h, 0.5).unwrap();
        assert_eq!(mixing_bound(&u, &u).unwrap(), 0.0);
        let mean = channel_mean_unitary(&ChannelSource::Qdrift { h: &h, t: 0.5, samples: 5 }, MeanMode::Analytic).unwrap();
        let b1 = mixing_bound(&u, &mean).unwrap();
        let doubled = &u + (&mean - &u) * Complex64::new(2.0, 0.0);
        let b2 = mixing_bound(&u, &doubled).unwrap();
        assert!((b2 - 2.0 * b1).abs() < 1e-12);
    }

    #[test]
    fn dephasing_mixture_respects_lemma() {
        let z = PauliString::from_sparse(1, &[(0, crate::pauli::Pauli::Z)]).unwrap();
        for theta in [0.01, 0.3, 1.0] {
            let plus = block_unitary(1, &[Entry { string: z, angle: theta }]).unwrap();
            let minus = block_unitary(1, &[Entry { string: z, angle: -theta }]).unwrap();
            let ch = MixedUnitaryChannel::new(vec![(0.5, plus), (0.5, minus)]).unwrap();
            let id = DenseMatrix::identity(2, 2);
            let bound = mixing_bound(&id, &ch.mean()).unwrap();
            let lower = sampled_trace_distance(&id, &ch, 500, 4);
            assert!(lower <= bound + 1e-9);
            // |+> dephases by sin²θ in trace distance
            assert!(lower <= theta.sin().powi(2) + 1e-12);
            assert!(lower > 0.5 * theta.sin().powi(2));
        }
    }

    #[test]
    fn channel_validation() {
        let id = DenseMatrix::identity(2, 2);
        assert!(MixedUnitaryChannel::new(vec![(0.4, id.clone()), (0.4, id.clone())]).is_err());
        assert!(MixedUnitaryChannel::new(vec![(-0.5, id.clone()), (1.5, id.clone())]).is_err());
        assert!(MixedUnitaryChannel::new(vec![]).is_err());
    }
}
