//! Lowering of Pauli exponentials to basis changes, CNOT ladders and Z
//! rotations, with gate accounting and OpenQASM 2 export.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::pauli::{check_dense, DenseMatrix, Pauli, PauliString};
use crate::schedule::GateSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz { qubit: usize, theta: f64 },
    /// Bare Pauli, used for injected noise.
    Pauli { qubit: usize, pauli: Pauli },
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) => (q, None),
            Gate::Rz { qubit, .. } | Gate::Pauli { qubit, .. } => (qubit, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub fn to_qasm(&self) -> String {
        match *self {
            Gate::H(q) => format!("h q[{q}];"),
            Gate::S(q) => format!("s q[{q}];"),
            Gate::Sdg(q) => format!("sdg q[{q}];"),
            Gate::Cnot { control, target } => format!("cx q[{control}],q[{target}];"),
            Gate::Rz { qubit, theta } => format!("rz({theta:.17e}) q[{qubit}];"),
            Gate::Pauli { qubit, pauli } => format!("{} q[{qubit}];", pauli.letter().to_ascii_lowercase()),
        }
    }
}

#[inline]
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Applies one gate in place to an `n`-qubit amplitude vector.
pub fn apply_gate(n: usize, amps: &mut [Complex64], gate: &Gate) {
    const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        Gate::H(q) => {
            let m = bit(n, q);
            for b in 0..amps.len() {
                if b & m == 0 {
                    let (a0, a1) = (amps[b], amps[b | m]);
                    amps[b] = (a0 + a1) * FRAC;
                    amps[b | m] = (a0 - a1) * FRAC;
                }
            }
        }
        Gate::S(q) | Gate::Sdg(q) => {
            let m = bit(n, q);
            let ph = if matches!(gate, Gate::S(_)) { Complex64::i() } else { -Complex64::i() };
            for (b, a) in amps.iter_mut().enumerate() {
                if b & m != 0 {
                    *a *= ph;
                }
            }
        }
        Gate::Cnot { control, target } => {
            let (c, t) = (bit(n, control), bit(n, target));
            for b in 0..amps.len() {
                if b & c != 0 && b & t == 0 {
                    amps.swap(b, b | t);
                }
            }
        }
        Gate::Rz { qubit, theta } => {
            let m = bit(n, qubit);
            let lo = Complex64::from_polar(1.0, -theta / 2.0);
            let hi = Complex64::from_polar(1.0, theta / 2.0);
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= if b & m != 0 { hi } else { lo };
            }
        }
        Gate::Pauli { qubit, pauli } => {
            let m = bit(n, qubit);
            if matches!(pauli, Pauli::X | Pauli::Y) {
                for b in 0..amps.len() {
                    if b & m == 0 {
                        amps.swap(b, b | m);
                    }
                }
            }
            // after the swap, Y = iXZ contributes -i on |0> and +i on |1>
            let (lo, hi) = match pauli {
                Pauli::I | Pauli::X => return,
                Pauli::Y => (-Complex64::i(), Complex64::i()),
                Pauli::Z => (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)),
            };
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= if b & m != 0 { hi } else { lo };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PrimitiveCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Entry index of the sequence each gate came from, parallel to `gates`.
    pub source_entry: Vec<usize>,
    pub exponential_count: usize,
}

impl PrimitiveCircuit {
    pub fn new(n_qubits: usize) -> Self {
        PrimitiveCircuit { n_qubits, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn append(&mut self, other: PrimitiveCircuit, source: usize) {
        self.source_entry.extend(std::iter::repeat_n(source, other.gates.len()));
        self.gates.extend(other.gates);
        self.exponential_count += other.exponential_count;
    }

    pub fn apply(&self, amps: &mut [Complex64]) {
        for g in &self.gates {
            apply_gate(self.n_qubits, amps, g);
        }
    }

    /// Dense unitary built column by column.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        check_dense(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut out = DenseMatrix::zeros(dim, dim);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            self.apply(&mut col);
            for (i, a) in col.iter().enumerate() {
                out[(i, j)] = *a;
            }
        }
        Ok(out)
    }

    pub fn to_qasm(&self) -> String {
        let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(s, "qreg q[{}];", self.n_qubits);
        for g in &self.gates {
            s.push_str(&g.to_qasm());
            s.push('\n');
        }
        s
    }
}

/// Circuit for `exp(-i * angle * P)`: basis changes, CNOT ladder onto the
/// last active qubit, `Rz(2 * angle)`, mirrored ladder, inverse basis changes.
pub fn synthesize_gadget(string: &PauliString, angle: f64) -> Result<PrimitiveCircuit> {
    let active = string.support();
    let Some(&last) = active.last() else {
        return Err(invalid("identity string has no gadget; fold it into the offset"));
    };
    let mut gates = Vec::with_capacity(4 * active.len() + 1);
    for &q in &active {
        match string.get(q) {
            Pauli::X => gates.push(Gate::H(q)),
            Pauli::Y => {
                gates.push(Gate::Sdg(q));
                gates.push(Gate::H(q));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> =
        active.windows(2).map(|w| Gate::Cnot { control: w[0], target: w[1] }).collect();
    gates.extend_from_slice(&ladder);
    gates.push(Gate::Rz { qubit: last, theta: 2.0 * angle });
    gates.extend(ladder.iter().rev());
    for &q in active.iter().rev() {
        match string.get(q) {
            Pauli::X => gates.push(Gate::H(q)),
            Pauli::Y => {
                gates.push(Gate::H(q));
                gates.push(Gate::S(q));
            }
            _ => {}
        }
    }
    let source_entry = vec![0; gates.len()];
    Ok(PrimitiveCircuit { n_qubits: string.num_qubits(), gates, source_entry, exponential_count: 1 })
}

/// Concatenates the gadgets of every entry in order.
pub fn synthesize_sequence(seq: &GateSequence) -> Result<PrimitiveCircuit> {
    let mut out = PrimitiveCircuit::new(seq.n_qubits);
    for (i, e) in seq.entries.iter().enumerate() {
        out.append(synthesize_gadget(&e.string, e.angle)?, i);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GateTally {
    pub cnot_count: usize,
    pub rz_count: usize,
    pub single_qubit_clifford_count: usize,
    pub exponential_count: usize,
    pub depth: usize,
}

/// Gate counts and ASAP depth over qubit-disjoint layers.
pub fn tally(c: &PrimitiveCircuit) -> GateTally {
    let mut t = GateTally { exponential_count: c.exponential_count, ..Default::default() };
    let mut frontier = vec![0usize; c.n_qubits];
    for g in &c.gates {
        match g {
            Gate::Cnot { .. } => t.cnot_count += 1,
            Gate::Rz { .. } => t.rz_count += 1,
            _ => t.single_qubit_clifford_count += 1,
        }
        let layer = match g.qubits() {
            (a, None) => {
                frontier[a] += 1;
                frontier[a]
            }
            (a, Some(b)) => {
                let l = frontier[a].max(frontier[b]) + 1;
                frontier[a] = l;
                frontier[b] = l;
                l
            }
        };
        t.depth = t.depth.max(layer);
    }
    t
}
