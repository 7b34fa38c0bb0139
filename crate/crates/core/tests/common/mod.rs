//! Shared helpers and independent oracles for the integration suites.
#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use hamsim_core::fermion::{classify_groups, jordan_wigner, load_fcidump, PhysicalGroup, SecondQuantizedHamiltonian};
use hamsim_core::pauli::DenseMatrix;
use hamsim_core::PauliHamiltonian;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub struct Fixture {
    pub name: &'static str,
    pub second_quantized: SecondQuantizedHamiltonian,
    pub hamiltonian: PauliHamiltonian,
    pub groups: Vec<PhysicalGroup>,
    pub electrons: usize,
    pub reference_energy: f64,
}

pub fn fixture_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(file)
}

pub fn fixture(name: &'static str) -> Fixture {
    let file = File::open(fixture_path(&format!("{name}.fcidump"))).unwrap();
    let sq = load_fcidump(BufReader::new(file)).unwrap();
    let meta: serde_json::Value =
        serde_json::from_reader(File::open(fixture_path(&format!("{name}.ref.json"))).unwrap()).unwrap();
    Fixture {
        name,
        hamiltonian: jordan_wigner(&sq).unwrap(),
        groups: classify_groups(&sq).unwrap(),
        second_quantized: sq,
        electrons: meta["n_electrons"].as_u64().unwrap() as usize,
        reference_energy: meta["fci_energy"].as_f64().unwrap(),
    }
}

pub fn h2() -> Fixture {
    fixture("h2_sto3g")
}

pub fn h3() -> Fixture {
    fixture("h3_chain")
}

/// `exp(-i t A)` by Taylor series with scaling and squaring.
pub fn expm_oracle(a: &DenseMatrix, t: f64) -> DenseMatrix {
    let dim = a.nrows();
    let scaled = a * Complex64::new(0.0, -t);
    let norm: f64 = scaled.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm.log2().ceil() as i32 + 4).max(0) as u32;
    let m = scaled / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &m / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Largest singular value via power iteration on `M† M`.
pub fn norm_oracle(m: &DenseMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut v = nalgebra::DVector::<Complex64>::from_fn(g.nrows(), |i, _| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w = &g * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        lambda = n / v.norm();
        v = w / Complex64::new(n, 0.0);
    }
    lambda.sqrt()
}

/// `min_φ ‖U − e^{iφ} V‖` by a dense scan of φ followed by local refinement.
pub fn aligned_error_oracle(u: &DenseMatrix, v: &DenseMatrix) -> f64 {
    let at = |phi: f64| norm_oracle(&(u - v * Complex64::from_polar(1.0, phi)));
    let mut best = (0.0, f64::INFINITY);
    for k in 0..256 {
        let phi = std::f64::consts::TAU * k as f64 / 256.0;
        let e = at(phi);
        if e < best.1 {
            best = (phi, e);
        }
    }
    let mut step = std::f64::consts::TAU / 256.0;
    for _ in 0..40 {
        for cand in [best.0 - step, best.0 + step] {
            let e = at(cand);
            if e < best.1 {
                best = (cand, e);
            }
        }
        step *= 0.5;
    }
    best.1
}

/// Lowest eigenvalue of the full matrix restricted to basis states of weight `k`.
pub fn sector_energy_oracle(h: &PauliHamiltonian, k: usize) -> f64 {
    let full = h.to_dense_with_offset().unwrap();
    let idx: Vec<usize> = (0..full.nrows()).filter(|b| b.count_ones() as usize == k).collect();
    let sub = DMatrix::<Complex64>::from_fn(idx.len(), idx.len(), |i, j| full[(idx[i], idx[j])]);
    sub.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}
