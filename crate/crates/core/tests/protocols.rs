//! End-to-end protocol behaviour on the bundled Hamiltonians.

mod common;

use std::collections::HashMap;

use common::{aligned_error_oracle, expm_oracle, h2, log_slope, mean_and_se};
use hamsim_core::gadget::synthesize_sequence;
use hamsim_core::numerics::{
    channel_mean_unitary, exact_unitary, run_statevector, sequence_unitary, spectral_error, ChannelSource, MeanMode,
    NoiseConfig, StateVector,
};
use hamsim_core::schedule::{
    apply_symmetric_protection, apply_symmetric_protection_with, compile_trotter1, sample_physdrift, GroupScheme, MarkerKind,
    ProtectionPhases,
};
use hamsim_core::{PauliHamiltonian, PauliString};

#[test]
fn random_permutation_average_is_third_order() {
    let h = PauliHamiltonian::from_pairs(&[(1.0, "X"), (0.7, "Z")]).unwrap();
    let dense = h.to_dense().unwrap();
    let ts = [0.02, 0.04, 0.08, 0.16];
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let mean = channel_mean_unitary(&ChannelSource::RandomPermutation { h: &h, t, steps: 1 }, MeanMode::Analytic)
                .unwrap();
            common::norm_oracle(&(mean - expm_oracle(&dense, t)))
        })
        .collect();
    let slope = log_slope(&ts, &errs);
    assert!((slope - 3.0).abs() < 0.15, "slope {slope}, errors {errs:?}");
    let forward: Vec<f64> = ts
        .iter()
        .map(|&t| aligned_error_oracle(&expm_oracle(&dense, t), &sequence_unitary(&compile_trotter1(&h, t, 1).unwrap()).unwrap()))
        .collect();
    assert!((log_slope(&ts, &forward) - 2.0).abs() < 0.15);
}

#[test]
fn protection_never_hurts_trotter1_on_h2() {
    let f = h2();
    for t in [0.5, 1.0, 2.0] {
        let u = exact_unitary(&f.hamiltonian, t).unwrap();
        let seq = compile_trotter1(&f.hamiltonian, t, 10).unwrap();
        let plain = spectral_error(&u, &sequence_unitary(&seq).unwrap()).unwrap();
        for seed in 0..5 {
            let protected = apply_symmetric_protection(&seq, seed).unwrap();
            let e = spectral_error(&u, &sequence_unitary(&protected).unwrap()).unwrap();
            assert!(e <= plain + 1e-9, "t={t} seed={seed}: {e} > {plain}");
        }
    }
}

#[test]
fn discrete_protection_leaves_unitary_unchanged() {
    let f = h2();
    let seq = compile_trotter1(&f.hamiltonian, 1.0, 4).unwrap();
    let plain = sequence_unitary(&seq).unwrap();
    let protected = apply_symmetric_protection_with(&seq, 9, ProtectionPhases::Discrete).unwrap();
    assert_eq!(protected.len(), seq.len() + 4 * 2 * 4);
    assert!(aligned_error_oracle(&plain, &sequence_unitary(&protected).unwrap()) < 1e-12);
}

#[test]
fn reordering_strings_inside_a_group_is_free() {
    let f = h2();
    let seq = sample_physdrift(&f.groups, 1.0, 40, GroupScheme::Abs, 5).unwrap();
    let mut shuffled = seq.clone();
    for range in seq.segments(MarkerKind::GroupEnd) {
        shuffled.entries[range].reverse();
    }
    let a = sequence_unitary(&seq).unwrap();
    let b = sequence_unitary(&shuffled).unwrap();
    assert!(common::norm_oracle(&(a - b)) < 1e-12);
}

#[test]
fn abs_physdrift_group_counts_follow_aggregated_qdrift() {
    let f = h2();
    let draws = 100_000;
    let seq = sample_physdrift(&f.groups, 1.0, draws, GroupScheme::Abs, 11).unwrap();
    let owner: HashMap<PauliString, usize> =
        f.groups.iter().enumerate().flat_map(|(j, g)| g.terms.iter().map(move |t| (t.string, j))).collect();
    let mut counts = vec![0.0; f.groups.len()];
    for range in seq.segments(MarkerKind::GroupEnd) {
        counts[owner[&seq.entries[range.start].string]] += 1.0;
    }
    assert_eq!(counts.iter().sum::<f64>(), draws as f64);
    let lambda = f.hamiltonian.lambda_one_norm();
    let l1: f64 = f
        .groups
        .iter()
        .zip(&counts)
        .map(|(g, c)| {
            let aggregated: f64 = g.terms.iter().map(|t| t.coeff.abs() / lambda).sum();
            (c / draws as f64 - aggregated).abs()
        })
        .sum();
    assert!(l1 < 0.05, "L1 {l1}");
}

#[test]
fn depolarizing_noise_raises_mean_state_error() {
    let f = h2();
    let t = 1.0;
    let seq = compile_trotter1(&f.hamiltonian, t, 10).unwrap();
    let circuit = synthesize_sequence(&seq).unwrap();
    let init = StateVector::from_bits("1100").unwrap();
    let exact = init.apply_matrix(&exact_unitary(&f.hamiltonian, t).unwrap()).unwrap();
    let noiseless = run_statevector(&circuit, &init, &NoiseConfig::noiseless()).unwrap().distance_aligned(&exact);
    let noisy: Vec<f64> = (0..20)
        .map(|seed| {
            let cfg = NoiseConfig { depol_p: 0.001, shot_alpha: 0.0, seed };
            run_statevector(&circuit, &init, &cfg).unwrap().distance_aligned(&exact)
        })
        .collect();
    let (mean, _) = mean_and_se(&noisy);
    assert!(mean >= noiseless, "{mean} < {noiseless}");
}
