//! State vectors, noisy gate-level trajectories and expectation values.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::PauliAction;
use crate::error::{invalid, Error, Result};
use crate::gadget::{Gate, PrimitiveCircuit};
use crate::pauli::{DenseMatrix, Pauli, PauliHamiltonian, MAX_QUBITS};
use crate::schedule::GateSequence;

const NORM_TOLERANCE: f64 = 1e-10;
const IMAG_TOLERANCE: f64 = 1e-10;
/// Largest register simulated as a state vector.
pub const STATE_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|b>`, qubit 0 the most significant bit.
    pub fn basis(n: usize, b: usize) -> Result<Self> {
        if n > STATE_LIMIT {
            return Err(Error::DenseLimit { n, limit: STATE_LIMIT });
        }
        let dim = 1usize << n;
        if b >= dim {
            return Err(invalid(format!("basis index {b} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[b] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Basis state from occupation text such as `"1100"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.chars().count();
        let mut b = 0usize;
        for (i, c) in bits.chars().enumerate() {
            b = (b << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(invalid(format!("occupation text has {c:?} at position {i}"))),
                };
        }
        Self::basis(n, b)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(invalid("amplitude count must be a power of two"));
        }
        let n = dim.trailing_zeros() as usize;
        let s = StateVector { n, amps };
        if (s.norm() - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `min_φ ‖ψ - e^{iφ} φ‖`.
    pub fn distance_aligned(&self, other: &StateVector) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - phase * b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_matrix(&self, m: &DenseMatrix) -> Result<StateVector> {
        if m.ncols() != self.amps.len() {
            return Err(Error::LengthMismatch { left: self.n, right: m.ncols().trailing_zeros() as usize });
        }
        let v = m * nalgebra::DVector::from_column_slice(&self.amps);
        Ok(StateVector { n: self.n, amps: v.as_slice().to_vec() })
    }

    pub fn apply_sequence(&mut self, seq: &GateSequence) -> Result<()> {
        if seq.n_qubits != self.n {
            return Err(Error::LengthMismatch { left: self.n, right: seq.n_qubits });
        }
        super::dense::apply_sequence(seq, &mut self.amps);
        Ok(())
    }

}

/// Gate-level noise and readout attenuation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Probability of one random Pauli after each primitive gate.
    pub depol_p: f64,
    /// Amplitude decay rate per exponential.
    pub shot_alpha: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { depol_p: 0.001, shot_alpha: 0.0, seed: 0 }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        NoiseConfig { depol_p: 0.0, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depol_p) {
            return Err(Error::Config(format!("depol_p {} outside [0, 1]", self.depol_p)));
        }
        if !(self.shot_alpha >= 0.0) {
            return Err(Error::Config(format!("shot_alpha {} is negative", self.shot_alpha)));
        }
        Ok(())
    }
}

/// Copy of `circuit` with sampled noise: after every gate, with probability
/// `depol_p`, a Pauli drawn uniformly from {X, Y, Z} on one of the gate's qubits.
///
/// Every gate consumes the same three random numbers whatever `depol_p` is,
/// so for a fixed seed the injection sets grow monotonically with `depol_p`.
pub fn inject_noise(circuit: &PrimitiveCircuit, noise: &NoiseConfig) -> Result<PrimitiveCircuit> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut out = PrimitiveCircuit::new(circuit.n_qubits);
    out.exponential_count = circuit.exponential_count;
    for (gate, src) in circuit.gates.iter().zip(&circuit.source_entry) {
        out.gates.push(*gate);
        out.source_entry.push(*src);
        let u: f64 = rng.random();
        let pauli = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
        let second: bool = rng.random();
        if u < noise.depol_p {
            let qubit = match gate.qubits() {
                (_, Some(b)) if second => b,
                (a, _) => a,
            };
            out.gates.push(Gate::Pauli { qubit, pauli });
            out.source_entry.push(*src);
        }
    }
    Ok(out)
}

/// One noisy trajectory of `circuit` applied to `initial`.
pub fn run_statevector(circuit: &PrimitiveCircuit, initial: &StateVector, noise: &NoiseConfig) -> Result<StateVector> {
    if circuit.n_qubits != initial.n {
        return Err(Error::LengthMismatch { left: initial.n, right: circuit.n_qubits });
    }
    let noisy = inject_noise(circuit, noise)?;
    let mut state = initial.clone();
    noisy.apply(&mut state.amps);
    Ok(state)
}

/// `<ψ|O|ψ> + offset`.
pub fn expectation(state: &StateVector, observable: &PauliHamiltonian) -> Result<f64> {
    if observable.n_qubits() != state.n {
        return Err(Error::LengthMismatch { left: state.n, right: observable.n_qubits() });
    }
    let mut total = Complex64::new(observable.offset(), 0.0);
    for t in observable.terms() {
        total += PauliAction::new(&t.string).expectation(&state.amps) * t.coeff;
    }
    let scale = 1.0 + observable.lambda_one_norm();
    if total.im.abs() > IMAG_TOLERANCE * scale {
        return Err(Error::ImaginaryResidue { what: "expectation value".into(), residue: total.im });
    }
    Ok(total.re)
}

/// Lowest eigenpair of `h` (offset included) within the fixed-particle-number
/// sector, assembled directly on the sector basis.
pub fn sector_ground_state(h: &PauliHamiltonian, particles: usize) -> Result<(f64, StateVector)> {
    let n = h.n_qubits();
    if n > STATE_LIMIT.min(MAX_QUBITS) {
        return Err(Error::DenseLimit { n, limit: STATE_LIMIT });
    }
    if particles > n {
        return Err(invalid(format!("{particles} particles do not fit in {n} modes")));
    }
    let basis: Vec<usize> = (0..1usize << n).filter(|b| b.count_ones() as usize == particles).collect();
    let index: std::collections::HashMap<usize, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let dim = basis.len();
    let mut m = DenseMatrix::identity(dim, dim) * Complex64::new(h.offset(), 0.0);
    for t in h.terms() {
        let a = PauliAction::new(&t.string);
        for (col, &b) in basis.iter().enumerate() {
            if let Some(&row) = index.get(&(b ^ a.flip())) {
                m[(row, col)] += a.phase(b) * t.coeff;
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let (k, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| invalid("empty sector"))?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (i, &b) in basis.iter().enumerate() {
        amps[b] = eig.eigenvectors[(i, k)];
    }
    Ok((*e, StateVector { n, amps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{build_hubbard, jordan_wigner, particle_number};
    use crate::gadget::{synthesize_gadget, synthesize_sequence};
    use crate::numerics::dense::{exact_unitary, hermitian_eigen, sequence_unitary};
    use crate::pauli::parse_pauli;
    use crate::schedule::{compile_trotter1, Entry};
    use proptest::prelude::*;

    fn phase_free(a: &StateVector, b: &StateVector) -> f64 {
        a.distance_aligned(b)
    }

    #[test]
    fn basis_and_bits() {
        let s = StateVector::from_bits("10").unwrap();
        assert_eq!(s.amplitudes()[2], Complex64::new(1.0, 0.0));
        assert!(StateVector::from_bits("12").is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let n2 = particle_number(2, None).unwrap();
        assert!((expectation(&StateVector::from_bits("11").unwrap(), &n2.pauli_form).unwrap() - 2.0).abs() < 1e-12);
        let n6 = particle_number(6, None).unwrap();
        let hf = StateVector::from_bits("111000").unwrap();
        assert!((expectation(&hf, &n6.pauli_form).unwrap() - 3.0).abs() < 1e-12);

        let h = jordan_wigner(&build_hubbard(2, 1.0, 4.0).unwrap()).unwrap();
        let (e, psi) = sector_ground_state(&h, 2).unwrap();
        assert!((expectation(&psi, &h).unwrap() - e).abs() < 1e-10);
        let evolved = psi.apply_matrix(&exact_unitary(&h, 1.7).unwrap()).unwrap();
        assert!((expectation(&evolved, &h).unwrap() - e).abs() < 1e-10);
        // half filling ground energy of the two-site model: (U - sqrt(U² + 16 t²)) / 2
        assert!((e - (4.0 - 32f64.sqrt()) / 2.0).abs() < 1e-10, "{e}");
    }

    #[test]
    fn sector_ground_state_is_global_minimum_at_right_filling() {
        let h = jordan_wigner(&build_hubbard(2, 1.0, 4.0).unwrap()).unwrap();
        let (values, _) = hermitian_eigen(&h).unwrap();
        let global = values.iter().copied().fold(f64::INFINITY, f64::min) + h.offset();
        let best = (0..=4).map(|k| sector_ground_state(&h, k).unwrap().0).fold(f64::INFINITY, f64::min);
        assert!((best - global).abs() < 1e-10);
    }

    #[test]
    fn forced_injection_hits_once() {
        let c = synthesize_gadget(&parse_pauli("Z").unwrap(), 0.3).unwrap();
        let init = StateVector::from_bits("0").unwrap();
        let noisy = run_statevector(&c, &init, &NoiseConfig { depol_p: 1.0, shot_alpha: 0.0, seed: 5 }).unwrap();
        let ideal = run_statevector(&c, &init, &NoiseConfig::noiseless()).unwrap();
        let hits: Vec<f64> = [Pauli::X, Pauli::Y, Pauli::Z]
            .iter()
            .map(|p| {
                let mut s = ideal.clone();
                crate::gadget::apply_gate(1, s.amplitudes_mut(), &Gate::Pauli { qubit: 0, pauli: *p });
                phase_free(&s, &noisy)
            })
            .collect();
        assert!(hits.iter().any(|d| *d < 1e-12), "{hits:?}");
    }

    #[test]
    fn noiseless_circuit_matches_sequence() {
        let h = jw_h();
        let seq = compile_trotter1(&h, 1.0, 3).unwrap();
        let init = StateVector::from_bits("1100").unwrap();
        let gates = run_statevector(&synthesize_sequence(&seq).unwrap(), &init, &NoiseConfig::noiseless()).unwrap();
        let dense = init.apply_matrix(&sequence_unitary(&seq).unwrap()).unwrap();
        assert!(phase_free(&gates, &dense) < 1e-10);
    }

    fn jw_h() -> PauliHamiltonian {
        jordan_wigner(&build_hubbard(2, 1.0, 4.0).unwrap()).unwrap()
    }

    #[test]
    fn norm_preserved_over_many_gates() {
        let h = jw_h();
        let seq = compile_trotter1(&h, 3.0, 800).unwrap();
        let c = synthesize_sequence(&seq).unwrap();
        assert!(c.len() >= 10_000);
        let out = run_statevector(&c, &StateVector::from_bits("1010").unwrap(), &NoiseConfig::noiseless()).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn injection_sets_are_nested() {
        let h = jw_h();
        let c = synthesize_sequence(&compile_trotter1(&h, 1.0, 20).unwrap()).unwrap();
        let count = |p: f64| {
            let noisy = inject_noise(&c, &NoiseConfig { depol_p: p, shot_alpha: 0.0, seed: 3 }).unwrap();
            noisy.gates.iter().filter(|g| matches!(g, Gate::Pauli { .. })).count()
        };
        assert_eq!(count(0.0), 0);
        let counts: Vec<usize> = [0.01, 0.02, 0.05, 0.2].iter().map(|p| count(*p)).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        assert!(counts[3] > 0);
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseConfig { depol_p: 1.5, ..Default::default() }.validate().is_err());
        assert!(NoiseConfig { shot_alpha: -1.0, ..Default::default() }.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn gate_path_equals_matrix_path(
            n in 1usize..=6,
            raw in proptest::collection::vec((any::<u64>(), any::<u64>(), -3.0f64..3.0), 1..8),
            start in any::<usize>(),
        ) {
            let mask = (1u64 << n) - 1;
            let mut seq = GateSequence::new(n);
            for (x, z, a) in raw {
                let s = crate::pauli::PauliString::from_masks(n, x & mask, z & mask).unwrap();
                if !s.is_identity() {
                    seq.entries.push(Entry { string: s, angle: a });
                }
            }
            let init = StateVector::basis(n, start % (1 << n)).unwrap();
            let gates = run_statevector(&synthesize_sequence(&seq).unwrap(), &init, &NoiseConfig::noiseless()).unwrap();
            let dense = init.apply_matrix(&sequence_unitary(&seq).unwrap()).unwrap();
            prop_assert!(phase_free(&gates, &dense) < 1e-10);
        }
    }
}
