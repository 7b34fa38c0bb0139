//! Exact evolution, sequence unitaries and spectral-norm error metrics.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_dense, DenseMatrix, PauliHamiltonian, PauliString};
use crate::schedule::GateSequence;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Precomputed action `P|b> = phase(b) |b ^ flip>` in basis-index order.
#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    flip: usize,
    sign_mask: usize,
    base: Complex64,
}

impl PauliAction {
    pub fn new(p: &PauliString) -> Self {
        let (flip, sign_mask) = p.index_masks();
        let (base, _) = p.apply_to_basis(0);
        PauliAction { flip, sign_mask, base }
    }

    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        if (b & self.sign_mask).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }

    #[inline]
    pub fn flip(&self) -> usize {
        self.flip
    }

    /// `amps <- exp(-i * angle * P) amps`.
    pub fn apply_exp(&self, angle: f64, amps: &mut [Complex64]) {
        let (c, s) = (angle.cos(), angle.sin());
        let mis = Complex64::new(0.0, -s);
        if self.flip == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= c + mis * self.phase(b);
            }
            return;
        }
        for b in 0..amps.len() {
            let d = b ^ self.flip;
            if b < d {
                let (x, y) = (amps[b], amps[d]);
                amps[b] = x * c + mis * self.phase(d) * y;
                amps[d] = y * c + mis * self.phase(b) * x;
            }
        }
    }

    /// `<psi| P |psi>`.
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        amps.iter()
            .enumerate()
            .map(|(b, a)| amps[b ^ self.flip].conj() * self.phase(b) * a)
            .sum()
    }

    /// `out += coeff * P psi`.
    pub fn accumulate(&self, coeff: Complex64, amps: &[Complex64], out: &mut [Complex64]) {
        for (b, a) in amps.iter().enumerate() {
            out[b ^ self.flip] += coeff * self.phase(b) * a;
        }
    }
}

/// Dense `H` with its residual anti-Hermitian part checked.
fn hermitian_dense(h: &PauliHamiltonian) -> Result<DenseMatrix> {
    let m = h.to_dense()?;
    let residue = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residue > HERMITIAN_TOLERANCE {
        return Err(Error::ImaginaryResidue { what: "Hamiltonian assembly".into(), residue });
    }
    Ok(m)
}

/// Eigenvalues and eigenvectors of the dense Hamiltonian (offset excluded).
pub fn hermitian_eigen(h: &PauliHamiltonian) -> Result<(DVector<f64>, DenseMatrix)> {
    let eig = SymmetricEigen::new(hermitian_dense(h)?);
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// `f(H)` for a real spectral function `f`.
pub fn spectral_function(values: &DVector<f64>, vectors: &DenseMatrix, f: impl Fn(f64) -> Complex64) -> DenseMatrix {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= f(values[j]);
    }
    scaled * vectors.adjoint()
}

/// `exp(-iHt)` with the scalar offset excluded.
pub fn exact_unitary(h: &PauliHamiltonian, t: f64) -> Result<DenseMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    Ok(spectral_function(&values, &vectors, |e| Complex64::from_polar(1.0, -e * t)))
}

/// Applies every entry of `seq` to `amps`.
pub fn apply_sequence(seq: &GateSequence, amps: &mut [Complex64]) {
    for e in &seq.entries {
        PauliAction::new(&e.string).apply_exp(e.angle, amps);
    }
}

/// Ordered product of the entry exponentials, first entry rightmost.
pub fn sequence_unitary(seq: &GateSequence) -> Result<DenseMatrix> {
    check_dense(seq.n_qubits)?;
    seq.validate()?;
    let dim = 1usize << seq.n_qubits;
    let mut u = DenseMatrix::identity(dim, dim);
    let actions: Vec<(PauliAction, f64)> =
        seq.entries.iter().map(|e| (PauliAction::new(&e.string), e.angle)).collect();
    for j in 0..dim {
        let mut col = u.column_mut(j);
        let amps = col.as_mut_slice();
        for (a, angle) in &actions {
            a.apply_exp(*angle, amps);
        }
    }
    Ok(u)
}

pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

fn check_dims(u: &DenseMatrix, v: &DenseMatrix) -> Result<()> {
    if u.shape() != v.shape() {
        return Err(Error::LengthMismatch { left: u.nrows(), right: v.nrows() });
    }
    Ok(())
}

/// `‖u - v‖₂`.
pub fn spectral_error(u: &DenseMatrix, v: &DenseMatrix) -> Result<f64> {
    check_dims(u, v)?;
    Ok(spectral_norm(&(u - v)))
}

/// `min_φ ‖u - e^{iφ} v‖₂`.
pub fn spectral_error_aligned(u: &DenseMatrix, v: &DenseMatrix) -> Result<f64> {
    check_dims(u, v)?;
    if unitarity_residue(u) < UNITARY_TOLERANCE && unitarity_residue(v) < UNITARY_TOLERANCE {
        if let Some(e) = aligned_from_spectrum(u, v) {
            return Ok(e);
        }
    }
    Ok(aligned_by_search(u, v))
}

const UNITARY_TOLERANCE: f64 = 1e-10;

/// For unitaries, `‖u - e^{iφ} v‖ = max_k |1 - e^{i(φ + θ_k)}|` over the
/// eigenphases of `w = u† v`; the best `φ` centres the shortest arc holding them.
///
/// `w` is normal, so a generic real combination of its Hermitian and
/// anti-Hermitian parts shares its eigenvectors. `None` when near-degenerate
/// eigenvalues of that combination mix the vectors.
fn aligned_from_spectrum(u: &DenseMatrix, v: &DenseMatrix) -> Option<f64> {
    const MIX: f64 = 0.754_877_666_246_692_7;
    let w = u.adjoint() * v;
    let wd = w.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let c = (&w + &wd) * half + (&w - &wd) * Complex64::new(0.0, -0.5 * MIX);
    let vectors = c.symmetric_eigen().eigenvectors;
    let mut phases = Vec::with_capacity(w.nrows());
    for col in vectors.column_iter() {
        let z = (col.adjoint() * &w * col)[(0, 0)];
        if (z.norm() - 1.0).abs() > 1e-10 {
            return None;
        }
        phases.push(z.arg());
    }
    phases.sort_by(f64::total_cmp);
    let tau = std::f64::consts::TAU;
    let wrap = phases[0] + tau - phases[phases.len() - 1];
    let largest_gap = phases.windows(2).map(|p| p[1] - p[0]).fold(wrap, f64::max);
    let width = (tau - largest_gap).max(0.0);
    Some(2.0 * (width / 4.0).sin())
}

/// Grid scan plus golden-section refinement; works for any pair.
fn aligned_by_search(u: &DenseMatrix, v: &DenseMatrix) -> f64 {
    let cost = |phi: f64| spectral_norm(&(u - v * Complex64::from_polar(1.0, phi)));
    let overlap = (v.adjoint() * u).trace();
    let mut best = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let mut best_cost = cost(best);
    const GRID: usize = 16;
    let step = std::f64::consts::TAU / GRID as f64;
    for k in 0..GRID {
        let phi = k as f64 * step;
        let c = cost(phi);
        if c < best_cost {
            best = phi;
            best_cost = c;
        }
    }
    // golden-section refinement on the bracket around the best candidate
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best - step, best + step);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    best_cost.min(fc).min(fd)
}

/// Raw and phase-aligned spectral errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub raw: f64,
    pub aligned: f64,
}

pub fn error_report(u: &DenseMatrix, v: &DenseMatrix) -> Result<ErrorReport> {
    Ok(ErrorReport { raw: spectral_error(u, v)?, aligned: spectral_error_aligned(u, v)? })
}

/// `‖M†M - I‖` max-entry residue.
pub fn unitarity_residue(m: &DenseMatrix) -> f64 {
    let dim = m.nrows();
    (m.adjoint() * m - DenseMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(m: &DenseMatrix, mut k: usize) -> DenseMatrix {
    let dim = m.nrows();
    let mut result = DenseMatrix::identity(dim, dim);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{build_hubbard, jordan_wigner};
    use crate::pauli::parse_pauli;
    use crate::schedule::{compile_suzuki, compile_trotter1, compile_trotter2, Entry};

    /// Scaling-and-squaring Taylor exponential of `-iHt`.
    fn expm_oracle(h: &DenseMatrix, t: f64) -> DenseMatrix {
        let a = h * Complex64::new(0.0, -t);
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0) as u32;
        let scaled = &a / Complex64::new(2f64.powi(squarings as i32), 0.0);
        let dim = h.nrows();
        let mut term = DenseMatrix::identity(dim, dim);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn max_entry(m: &DenseMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn hubbard2() -> PauliHamiltonian {
        jordan_wigner(&build_hubbard(2, 1.0, 4.0).unwrap()).unwrap()
    }

    #[test]
    fn exact_unitary_examples() {
        let h = PauliHamiltonian::from_pairs(&[(1.0, "Z")]).unwrap();
        let u = exact_unitary(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
        let h = hubbard2();
        assert!(max_entry(&(exact_unitary(&h, 0.0).unwrap() - DenseMatrix::identity(16, 16))) < 1e-13);
        let u = exact_unitary(&h, 1.0).unwrap();
        assert!(max_entry(&(&u - expm_oracle(&h.to_dense().unwrap(), 1.0))) < 1e-10);
        assert!(unitarity_residue(&u) < 1e-10);
    }

    #[test]
    fn sequence_unitary_examples() {
        assert_eq!(sequence_unitary(&GateSequence::new(2)).unwrap(), DenseMatrix::identity(4, 4));
        let mut seq = GateSequence::new(1);
        seq.entries.push(Entry { string: parse_pauli("X").unwrap(), angle: 0.3 });
        let v = sequence_unitary(&seq).unwrap();
        let x = parse_pauli("X").unwrap().to_dense().unwrap();
        let want = DenseMatrix::identity(2, 2) * Complex64::new(0.3f64.cos(), 0.0) - x * Complex64::new(0.0, 0.3f64.sin());
        assert!(max_entry(&(v - want)) < 1e-15);
    }

    #[test]
    fn sequence_unitary_matches_dense_products() {
        let h = PauliHamiltonian::from_pairs(&[(0.3, "XYZ"), (-0.7, "ZZI"), (0.2, "IYX"), (0.5, "YII")]).unwrap();
        let seq = compile_trotter2(&h, 0.8, 3).unwrap();
        let mut want = DenseMatrix::identity(8, 8);
        for e in &seq.entries {
            want = expm_oracle(&(e.string.to_dense().unwrap() * Complex64::new(e.angle, 0.0)), 1.0) * want;
        }
        assert!(max_entry(&(sequence_unitary(&seq).unwrap() - want)) < 1e-12);
    }

    #[test]
    fn single_term_and_commuting_are_exact() {
        let h = PauliHamiltonian::from_pairs(&[(0.9, "XY")]).unwrap();
        let u = exact_unitary(&h, 1.3).unwrap();
        for n in [1, 4] {
            assert!(spectral_error(&u, &sequence_unitary(&compile_trotter1(&h, 1.3, n).unwrap()).unwrap()).unwrap() < 1e-12);
        }
        let h = PauliHamiltonian::from_pairs(&[(0.9, "ZZ"), (0.4, "ZI"), (-0.3, "IZ")]).unwrap();
        let u = exact_unitary(&h, 2.0).unwrap();
        for n in [1, 3] {
            assert!(spectral_error(&u, &sequence_unitary(&compile_trotter2(&h, 2.0, n).unwrap()).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn trotter_examples() {
        // X + Z at t = 1, one step: compare with the closed-form 2x2 oracle
        let h = PauliHamiltonian::from_pairs(&[(1.0, "X"), (1.0, "Z")]).unwrap();
        let s = 2f64.sqrt();
        let x = parse_pauli("X").unwrap().to_dense().unwrap();
        let z = parse_pauli("Z").unwrap().to_dense().unwrap();
        let id = DenseMatrix::identity(2, 2);
        let exact = &id * Complex64::new(s.cos(), 0.0) - (&x + &z) * Complex64::new(0.0, s.sin() / s);
        let ez = &id * Complex64::new(1f64.cos(), 0.0) - &z * Complex64::new(0.0, 1f64.sin());
        let ex = &id * Complex64::new(1f64.cos(), 0.0) - &x * Complex64::new(0.0, 1f64.sin());
        let oracle = spectral_norm(&(&exact - ez * ex));
        let v = sequence_unitary(&compile_trotter1(&h, 1.0, 1).unwrap()).unwrap();
        assert!((spectral_error(&exact_unitary(&h, 1.0).unwrap(), &v).unwrap() - oracle).abs() < 1e-12);
        assert!(oracle > 0.1);

        let u = exact_unitary(&h, 0.5).unwrap();
        let e1 = spectral_error(&u, &sequence_unitary(&compile_trotter1(&h, 0.5, 4).unwrap()).unwrap()).unwrap();
        let e2 = spectral_error(&u, &sequence_unitary(&compile_trotter2(&h, 0.5, 4).unwrap()).unwrap()).unwrap();
        assert!(e2 < e1);

        let h = hubbard2();
        let u = exact_unitary(&h, 1.0).unwrap();
        let e10 = spectral_error(&u, &sequence_unitary(&compile_trotter1(&h, 1.0, 10).unwrap()).unwrap()).unwrap();
        let e50 = spectral_error(&u, &sequence_unitary(&compile_trotter1(&h, 1.0, 50).unwrap()).unwrap()).unwrap();
        assert!(e50 < e10);
        let e4 = spectral_error(&u, &sequence_unitary(&compile_suzuki(&h, 1.0, 10, 4).unwrap()).unwrap()).unwrap();
        assert!(e4 < e10);
    }

    #[test]
    fn spectral_error_examples() {
        let h = hubbard2();
        let u = exact_unitary(&h, 0.7).unwrap();
        assert!(spectral_error(&u, &u).unwrap() < 1e-14);
        assert!(spectral_error_aligned(&u, &u).unwrap() < 1e-7);
        let t = 0.9;
        let id = DenseMatrix::identity(2, 2);
        let v = exact_unitary(&PauliHamiltonian::from_pairs(&[(1.0, "Z")]).unwrap(), t).unwrap();
        let raw = spectral_error(&id, &v).unwrap();
        assert!((raw - (Complex64::from_polar(1.0, -t) - 1.0).norm()).abs() < 1e-14);
        let aligned = spectral_error_aligned(&id, &v).unwrap();
        assert!((aligned - 2.0 * (t / 2.0).sin().abs()).abs() < 1e-9, "{aligned}");
        let w = sequence_unitary(&compile_trotter1(&h, 0.7, 3).unwrap()).unwrap();
        assert!((spectral_error(&u, &w).unwrap() - spectral_error(&w, &u).unwrap()).abs() < 1e-14);
        assert!(spectral_error_aligned(&u, &w).unwrap() <= spectral_error(&u, &w).unwrap() + 1e-12);
        let phased = &u * Complex64::from_polar(1.0, 1.234);
        assert!(spectral_error_aligned(&u, &phased).unwrap() < 1e-8);
        assert!(spectral_error(&u, &DenseMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn spectral_and_search_alignment_agree() {
        let h = hubbard2();
        let u = exact_unitary(&h, 1.3).unwrap();
        for n in [1, 2, 5, 20] {
            let v = sequence_unitary(&compile_trotter1(&h, 1.3, n).unwrap()).unwrap();
            let fast = aligned_from_spectrum(&u, &v).unwrap();
            let slow = aligned_by_search(&u, &v);
            assert!((fast - slow).abs() < 1e-8, "n={n}: {fast} vs {slow}");
        }
        // a mixture is not unitary and takes the search path
        let v1 = sequence_unitary(&compile_trotter1(&h, 1.3, 2).unwrap()).unwrap();
        let mix = (&u + &v1) * Complex64::new(0.5, 0.0);
        assert!((spectral_error_aligned(&u, &mix).unwrap() - aligned_by_search(&u, &mix)).abs() < 1e-15);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let u = exact_unitary(&hubbard2(), 0.1).unwrap();
        let mut want = DenseMatrix::identity(16, 16);
        for _ in 0..13 {
            want = &want * &u;
        }
        assert!(max_entry(&(matrix_power(&u, 13) - want)) < 1e-12);
    }
}
