//! Dense statevector simulation for the small gate set used by the annealer.
//!
//! Qubit `q` is bit `q` of the basis index (qubit 0 is least significant).
//! Bitstrings are printed qubit 0 first, so basis index 1 on two qubits is
//! `"10"`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 20;

static PEAK_QUBITS: AtomicUsize = AtomicUsize::new(0);
static STATES_ALLOCATED: AtomicUsize = AtomicUsize::new(0);

/// Largest register allocated by any [`QuantumState`] in this process since
/// the last [`reset_instrumentation`].
pub fn peak_qubits() -> usize {
    PEAK_QUBITS.load(Ordering::Relaxed)
}

/// Number of [`QuantumState`]s allocated since the last
/// [`reset_instrumentation`]. Every annealing run allocates exactly one.
pub fn states_allocated() -> usize {
    STATES_ALLOCATED.load(Ordering::Relaxed)
}

/// Zero both instrumentation counters. The counters are process-wide, so
/// concurrent simulations elsewhere in the process also register.
pub fn reset_instrumentation() {
    PEAK_QUBITS.store(0, Ordering::Relaxed);
    STATES_ALLOCATED.store(0, Ordering::Relaxed);
}

fn record_allocation(num_qubits: usize) {
    PEAK_QUBITS.fetch_max(num_qubits, Ordering::Relaxed);
    STATES_ALLOCATED.fetch_add(1, Ordering::Relaxed);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    PauliX(usize),
    /// `exp(-i θ X / 2)`
    RotX(usize, f64),
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    RotZ(usize, f64),
    CNot {
        control: usize,
        target: usize,
    },
    /// `exp(-i θ Z⊗Z / 2)`, equivalent to `CNot · RotZ(target) · CNot`.
    RotZZ(usize, usize, f64),
}

impl Gate {
    fn check(&self, num_qubits: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(Error::Index(format!(
                    "qubit {q} out of range for {num_qubits}-qubit register"
                )))
            }
        };
        match *self {
            Gate::Hadamard(q) | Gate::PauliX(q) | Gate::RotX(q, _) | Gate::RotZ(q, _) => {
                in_range(q)
            }
            Gate::CNot {
                control: a,
                target: b,
            }
            | Gate::RotZZ(a, b, _) => {
                in_range(a)?;
                in_range(b)?;
                if a == b {
                    return Err(Error::Index(format!(
                        "two-qubit gate on repeated qubit {a}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Rewrite into the primitive gates a hardware device would run.
    pub fn decompose(&self) -> Vec<Gate> {
        match *self {
            Gate::RotZZ(a, b, theta) => vec![
                Gate::CNot {
                    control: a,
                    target: b,
                },
                Gate::RotZ(b, theta),
                Gate::CNot {
                    control: a,
                    target: b,
                },
            ],
            g => vec![g],
        }
    }
}

/// An ordered gate sequence on a fixed register size.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append every gate of `other`, which must act on the same register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// Pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// The all-zero basis state `|0…0⟩`.
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_register(num_qubits)?;
        record_allocation(num_qubits);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            num_qubits,
            amplitudes,
        })
    }

    /// Wrap an explicit amplitude vector. The vector is normalized; a zero
    /// vector is rejected.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::Size(format!(
                "{len} amplitudes is not a power of two"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_register(num_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Argument(
                "amplitude vector has zero or non-finite norm".into(),
            ));
        }
        record_allocation(num_qubits);
        Ok(QuantumState {
            num_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check(self.num_qubits)?;
        let amps = &mut self.amplitudes;
        match *gate {
            Gate::Hadamard(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for_each_pair(amps, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * h;
                    *b = (x - y) * h;
                });
            }
            Gate::PauliX(q) => for_each_pair(amps, q, std::mem::swap),
            Gate::RotX(q, theta) => {
                let c = (theta / 2.0).cos();
                let s = Complex64::new(0.0, -(theta / 2.0).sin());
                for_each_pair(amps, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * s;
                    *b = x * s + y * c;
                });
            }
            Gate::RotZ(q, theta) => {
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = lo.conj();
                let mask = 1usize << q;
                for (i, a) in amps.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { lo } else { hi };
                }
            }
            Gate::CNot { control, target } => {
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for i in 0..amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        amps.swap(i, i | tmask);
                    }
                }
            }
            Gate::RotZZ(a, b, theta) => {
                let even = Complex64::from_polar(1.0, -theta / 2.0);
                let odd = even.conj();
                let (ma, mb) = (1usize << a, 1usize << b);
                for (i, amp) in amps.iter_mut().enumerate() {
                    let parity = ((i & ma) != 0) ^ ((i & mb) != 0);
                    *amp *= if parity { odd } else { even };
                }
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits != self.num_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit circuit applied to {}-qubit state",
                circuit.num_qubits, self.num_qubits
            )));
        }
        for gate in &circuit.gates {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// Draw `shots` computational-basis measurements. Equal seeds give equal
    /// histograms.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(Histogram {
            num_qubits: self.num_qubits,
            counts,
        })
    }

    /// Basis index with the largest probability, lowest index on ties.
    pub fn most_probable(&self) -> usize {
        let mut best = 0;
        let mut best_p = f64::NEG_INFINITY;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best_p {
                best = i;
                best_p = p;
            }
        }
        best
    }

    pub fn most_probable_bitstring(&self) -> String {
        bitstring(self.most_probable(), self.num_qubits)
    }
}

fn check_register(num_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "{num_qubits} qubits requested; supported range is 1..={MAX_QUBITS}"
        )))
    }
}

/// Visit every amplitude pair that differs only in bit `q`, low member first.
fn for_each_pair(
    amps: &mut [Complex64],
    q: usize,
    mut f: impl FnMut(&mut Complex64, &mut Complex64),
) {
    let stride = 1usize << q;
    for block in amps.chunks_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// Render basis index `index` as a bitstring, qubit 0 first.
pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse a qubit-0-first bitstring back into a basis index.
pub fn parse_bitstring(bits: &str) -> Result<usize> {
    bits.chars()
        .enumerate()
        .try_fold(0usize, |acc, (q, c)| match c {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << q),
            other => Err(Error::Argument(format!(
                "invalid bit {other:?} in {bits:?}"
            ))),
        })
}

/// Measurement outcome counts keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    num_qubits: usize,
    counts: BTreeMap<usize, u64>,
}

impl Histogram {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Observed outcomes in ascending basis-index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    /// Most frequent outcome, lowest basis index on ties.
    pub fn mode(&self) -> usize {
        let mut best = (0, 0);
        for (i, c) in self.iter() {
            if c > best.1 {
                best = (i, c);
            }
        }
        best.0
    }

    pub fn to_bitstrings(&self) -> BTreeMap<String, u64> {
        self.iter()
            .map(|(i, c)| (bitstring(i, self.num_qubits), c))
            .collect()
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.iter() {
            writeln!(f, "{} {c}", bitstring(i, self.num_qubits))?;
        }
        Ok(())
    }
}
