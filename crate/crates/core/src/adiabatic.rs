//! Ising problems and their Trotterized adiabatic solution.
//!
//! The annealing Hamiltonian interpolates from a transverse driver to the
//! target Ising energy,
//!
//! ```text
//! H(s) = s · [ Σ_{i<j} W_ij Z_i Z_j + Σ_i h_i Z_i ] − (1 − s) · h_x Σ_i X_i
//! ```
//!
//! with `s = t / t_f`. The circuit starts in `|+…+⟩`, the ground state of the
//! driver for `h_x > 0`, and applies one first-order Trotter step of
//! `exp(-i H(s_m) Δt)` per schedule point. A basis bit of 0 reads out as spin
//! +1 and a bit of 1 as spin −1, matching the eigenvalues of `Z`.

use std::collections::BTreeMap;
use std::fmt;

use crate::qsim::{Circuit, Gate, Histogram, QuantumState, MAX_QUBITS};
use crate::{Error, Result};

/// Default transverse field strength.
pub const DEFAULT_FIELD_X: f64 = 1.0;
/// Default number of measurement shots per solve.
pub const DEFAULT_SHOTS: u64 = 1024;

/// Pairwise couplings plus longitudinal and transverse fields.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    num_spins: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields_z: Vec<f64>,
    field_x: f64,
}

impl IsingProblem {
    /// Problem with no couplings. The number of spins is `fields_z.len()`.
    pub fn new(fields_z: Vec<f64>, field_x: f64) -> Result<Self> {
        if fields_z.is_empty() {
            return Err(Error::Size(
                "an Ising problem needs at least one spin".into(),
            ));
        }
        Ok(IsingProblem {
            num_spins: fields_z.len(),
            couplings: BTreeMap::new(),
            fields_z,
            field_x,
        })
    }

    /// Set `W_ij`; the pair is stored with `i < j`.
    pub fn set_coupling(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        let key = (i.min(j), i.max(j));
        if key.0 == key.1 {
            return Err(Error::Index(format!("self-coupling on spin {i}")));
        }
        if key.1 >= self.num_spins {
            return Err(Error::Index(format!(
                "coupling ({i}, {j}) out of range for {} spins",
                self.num_spins
            )));
        }
        self.couplings.insert(key, weight);
        Ok(())
    }

    pub fn with_couplings(
        mut self,
        couplings: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        for ((i, j), w) in couplings {
            self.set_coupling(i, j, w)?;
        }
        Ok(self)
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn fields_z(&self) -> &[f64] {
        &self.fields_z
    }

    pub fn field_x(&self) -> f64 {
        self.field_x
    }

    /// Classical energy of the basis state `index`, skipping the spin
    /// conversion.
    fn energy_of_index(&self, index: usize) -> f64 {
        let spin = |i: usize| if index >> i & 1 == 0 { 1.0 } else { -1.0 };
        let pair: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), &w)| w * spin(i) * spin(j))
            .sum();
        let field: f64 = self
            .fields_z
            .iter()
            .enumerate()
            .map(|(i, h)| h * spin(i))
            .sum();
        pair + field
    }
}

/// A configuration of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Argument(format!("spin value {bad} is not ±1")));
        }
        Ok(SpinConfig(spins))
    }

    /// Spins from a basis index: bit 0 → +1, bit 1 → −1.
    pub fn from_index(index: usize, num_spins: usize) -> Self {
        SpinConfig(
            (0..num_spins)
                .map(|i| if index >> i & 1 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &s)| if s < 0 { acc | 1 << i } else { acc })
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Discretized annealing schedule: `num_steps` Trotter steps over `total_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    num_steps: usize,
    total_time: f64,
}

impl Schedule {
    pub fn new(num_steps: usize, total_time: f64) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::Argument("schedule needs at least one step".into()));
        }
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::Argument(format!(
                "total annealing time must be positive, got {total_time}"
            )));
        }
        Ok(Schedule {
            num_steps,
            total_time,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn time_step(&self) -> f64 {
        self.total_time / self.num_steps as f64
    }

    /// Interpolation parameter `s = m / M` at step `m` (1-based).
    pub fn progress(&self, step: usize) -> f64 {
        step as f64 / self.num_steps as f64
    }
}

/// 60 steps over `t_f = 45`: `Δt·h_x = 0.75` keeps each Trotter step well
/// below the aliasing regime, and the total time is long enough that about
/// 85% of random 9-spin torus problems end in their exact ground state.
impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            num_steps: 60,
            total_time: 45.0,
        }
    }
}

/// `Σ_{i<j} W_ij s_i s_j + Σ_i h_i s_i`. The transverse field does not
/// contribute.
pub fn classical_energy(problem: &IsingProblem, config: &SpinConfig) -> Result<f64> {
    if config.len() != problem.num_spins {
        return Err(Error::Dimension(format!(
            "{} spins given for a {}-spin problem",
            config.len(),
            problem.num_spins
        )));
    }
    let s = config.spins();
    let pair: f64 = problem
        .couplings
        .iter()
        .map(|(&(i, j), &w)| w * f64::from(s[i]) * f64::from(s[j]))
        .sum();
    let field: f64 = problem
        .fields_z
        .iter()
        .zip(s)
        .map(|(h, &si)| h * f64::from(si))
        .sum();
    Ok(pair + field)
}

/// Exhaustive minimum over all `2^n` configurations. Configurations are
/// enumerated lexicographically (spin 0 first, +1 before −1) and ties go to
/// the earliest one.
pub fn brute_force_ground_state(problem: &IsingProblem) -> Result<(SpinConfig, f64)> {
    if problem.num_spins > MAX_QUBITS {
        return Err(Error::Size(format!(
            "brute force limited to {MAX_QUBITS} spins, got {}",
            problem.num_spins
        )));
    }
    let n = problem.num_spins;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..1usize << n {
        // Spin 0 is the most significant digit of the enumeration counter.
        let index = k.reverse_bits() >> (usize::BITS as usize - n);
        let e = problem.energy_of_index(index);
        if e < best.1 {
            best = (index, e);
        }
    }
    Ok((SpinConfig::from_index(best.0, n), best.1))
}

/// All distinct classical energy levels in ascending order (exact
/// enumeration; for verification only).
pub fn energy_levels(problem: &IsingProblem, tolerance: f64) -> Result<Vec<f64>> {
    if problem.num_spins > MAX_QUBITS {
        return Err(Error::Size(format!(
            "enumeration limited to {MAX_QUBITS} spins, got {}",
            problem.num_spins
        )));
    }
    let mut energies: Vec<f64> = (0..1usize << problem.num_spins)
        .map(|i| problem.energy_of_index(i))
        .collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() <= tolerance);
    Ok(energies)
}

/// Gate sequence for the annealing evolution.
///
/// Hadamard on every qubit, then for each step `m = 1..=M` with `s = m/M`:
/// every `RotZZ(i, j, 2 s W_ij Δt)` in ascending pair order, every
/// `RotZ(i, 2 s h_i Δt)`, and every `RotX(i, −2 (1 − s) h_x Δt)`.
pub fn build_adiabatic_circuit(problem: &IsingProblem, schedule: &Schedule) -> Result<Circuit> {
    let n = problem.num_spins;
    if n > MAX_QUBITS {
        return Err(Error::Size(format!(
            "circuit limited to {MAX_QUBITS} qubits, got {n}"
        )));
    }
    let dt = schedule.time_step();
    let mut circuit = Circuit::new(n);
    for q in 0..n {
        circuit.push(Gate::Hadamard(q))?;
    }
    for m in 1..=schedule.num_steps {
        let s = schedule.progress(m);
        for (&(i, j), &w) in &problem.couplings {
            circuit.push(Gate::RotZZ(i, j, 2.0 * s * w * dt))?;
        }
        for (i, &h) in problem.fields_z.iter().enumerate() {
            circuit.push(Gate::RotZ(i, 2.0 * s * h * dt))?;
        }
        for i in 0..n {
            circuit.push(Gate::RotX(i, -2.0 * (1.0 - s) * problem.field_x * dt))?;
        }
    }
    Ok(circuit)
}

/// Result of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Spins of the most frequently measured bitstring.
    pub config: SpinConfig,
    pub histogram: Histogram,
}

/// Build the annealing circuit, run it from `|0…0⟩`, sample `shots` times
/// and read out the modal bitstring.
pub fn solve(
    problem: &IsingProblem,
    schedule: &Schedule,
    shots: u64,
    seed: u64,
) -> Result<Solution> {
    let state = evolve(problem, schedule)?;
    let histogram = state.sample(shots, seed)?;
    Ok(Solution {
        config: SpinConfig::from_index(histogram.mode(), problem.num_spins),
        histogram,
    })
}

/// Final annealed state, before measurement.
pub fn evolve(problem: &IsingProblem, schedule: &Schedule) -> Result<QuantumState> {
    let circuit = build_adiabatic_circuit(problem, schedule)?;
    let mut state = QuantumState::new(problem.num_spins)?;
    state.apply_circuit(&circuit)?;
    Ok(state)
}
