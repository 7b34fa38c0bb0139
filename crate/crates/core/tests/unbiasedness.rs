//! Single-step samples of every randomized schedule average to `H t / N`.

use std::collections::HashMap;

use hamsim_core::fermion::{build_hubbard, classify_groups, jordan_wigner};
use hamsim_core::schedule::{
    sample_physdrift, sample_qdrift, sample_random_permutation, sample_sparsto, GateSequence, GroupScheme,
};
use hamsim_core::{PauliHamiltonian, PauliString};
use proptest::prelude::*;

/// Per-string running sums of the total angle a sample assigns to that string.
#[derive(Default)]
struct Moments {
    sum: HashMap<PauliString, f64>,
    sum_sq: HashMap<PauliString, f64>,
    count: usize,
}

impl Moments {
    fn add(&mut self, seq: &GateSequence) {
        let mut per: HashMap<PauliString, f64> = HashMap::new();
        for e in &seq.entries {
            *per.entry(e.string).or_default() += e.angle;
        }
        for (s, a) in per {
            *self.sum.entry(s).or_default() += a;
            *self.sum_sq.entry(s).or_default() += a * a;
        }
        self.count += 1;
    }

    /// Largest deviation from `h t / n`, in units of the standard error.
    fn worst_z(&self, h: &PauliHamiltonian, t: f64, n: usize) -> f64 {
        let c = self.count as f64;
        for s in self.sum.keys() {
            assert!(h.coeff_of(s) != 0.0, "sampled string {s} is not in the Hamiltonian");
        }
        h.terms()
            .iter()
            .map(|term| {
                let target = term.coeff * t / n as f64;
                let mean = self.sum.get(&term.string).copied().unwrap_or(0.0) / c;
                let var = self.sum_sq.get(&term.string).copied().unwrap_or(0.0) / c - mean * mean;
                let se = (var.max(0.0) / c).sqrt();
                let dev = (mean - target).abs();
                if dev < 1e-12 { 0.0 } else { dev / se.max(1e-300) }
            })
            .fold(0.0, f64::max)
    }
}

fn hubbard2() -> (PauliHamiltonian, Vec<hamsim_core::fermion::PhysicalGroup>) {
    let sq = build_hubbard(2, 1.0, 4.0).unwrap();
    (jordan_wigner(&sq).unwrap(), classify_groups(&sq).unwrap())
}

const SAMPLES: u64 = 100_000;

#[test]
fn qdrift_single_sample_is_unbiased() {
    let (h, _) = hubbard2();
    let mut m = Moments::default();
    for seed in 0..SAMPLES {
        m.add(&sample_qdrift(&h, 0.7, 1, seed).unwrap());
    }
    let z = m.worst_z(&h, 0.7, 1);
    assert!(z < 4.5, "z = {z}");
}

#[test]
fn physdrift_single_draw_is_unbiased() {
    let (h, groups) = hubbard2();
    for scheme in [GroupScheme::Abs, GroupScheme::Mean] {
        let mut m = Moments::default();
        for seed in 0..SAMPLES {
            m.add(&sample_physdrift(&groups, 0.7, 1, scheme, seed).unwrap());
        }
        let z = m.worst_z(&h, 0.7, 1);
        assert!(z < 4.5, "{scheme:?}: z = {z}");
    }
}

#[test]
fn random_permutation_step_is_exact_on_average() {
    let (h, _) = hubbard2();
    let mut m = Moments::default();
    for seed in 0..100 {
        m.add(&sample_random_permutation(&h, 0.7, 1, seed).unwrap());
    }
    assert_eq!(m.worst_z(&h, 0.7, 1), 0.0);
}

#[test]
fn sparsto_single_step_is_unbiased() {
    let (h, _) = hubbard2();
    let mut m = Moments::default();
    for seed in 0..SAMPLES {
        m.add(&sample_sparsto(&h, 0.7, 1, None, seed).unwrap());
    }
    let z = m.worst_z(&h, 0.7, 1);
    assert!(z < 4.5, "z = {z}");
}

fn small_hamiltonian() -> impl Strategy<Value = PauliHamiltonian> {
    let term = (prop::sample::select(vec!["IX", "ZZ", "XY", "YI", "ZX", "YY", "XI"]), -2.0f64..2.0);
    prop::collection::vec(term, 2..6).prop_filter_map("needs a nonzero term", |pairs| {
        let pairs: Vec<(f64, &str)> = pairs.into_iter().map(|(s, c)| (c, s)).collect();
        PauliHamiltonian::from_pairs(&pairs).ok().filter(|h| h.len() > 0 && h.lambda_one_norm() > 1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn qdrift_and_sparsto_unbiased_on_random_hamiltonians(h in small_hamiltonian(), t in 0.1f64..2.0, base in 0u64..1000) {
        let mut q = Moments::default();
        let mut s = Moments::default();
        for k in 0..20_000u64 {
            q.add(&sample_qdrift(&h, t, 1, base * 100_000 + k).unwrap());
            s.add(&sample_sparsto(&h, t, 1, None, base * 100_000 + k).unwrap());
        }
        prop_assert!(q.worst_z(&h, t, 1) < 5.0);
        prop_assert!(s.worst_z(&h, t, 1) < 5.0);
    }
}
