// Copyright 2026 The mipt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex-amplitude simulator for small systems.
//!
//! Serves two roles: a brute-force oracle for the stabilizer engine, and the
//! noisy shot simulator (XX-gate crosstalk and stochastic dephasing) used to
//! model imperfect hardware. Capped at 24 qubits.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, GateOp};
use crate::clifford::{align_to_z_index, inverse, CLIFFORD_1Q_WORDS};
use crate::error::{Error, Result};
use crate::pauli::{MeasurementBasis, Pauli, PauliString};
use crate::tableau::Tableau;

/// Hard cap on dense-simulated qubits.
pub const MAX_DENSE_QUBITS: usize = 24;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense pure state on `n` qubits; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

type Matrix2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_dagger(a: &Matrix2) -> Matrix2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Unitary of a canonical single-qubit Clifford (global phase arbitrary).
pub fn clifford_1q_unitary(c: usize) -> Matrix2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let h: Matrix2 = [
        [Complex64::new(SQRT_HALF, 0.0), Complex64::new(SQRT_HALF, 0.0)],
        [Complex64::new(SQRT_HALF, 0.0), Complex64::new(-SQRT_HALF, 0.0)],
    ];
    let s: Matrix2 = [[one, zero], [zero, Complex64::new(0.0, 1.0)]];
    let mut u: Matrix2 = [[one, zero], [zero, one]];
    for &letter in CLIFFORD_1Q_WORDS[c].as_bytes() {
        let m = if letter == b'H' { &h } else { &s };
        u = mat_mul(m, &u);
    }
    u
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Result<StateVector> {
        if n == 0 {
            return Err(Error::InvalidQubitCount { min: 1, got: 0 });
        }
        if n > MAX_DENSE_QUBITS {
            return Err(Error::QubitBudgetExceeded {
                n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn renormalize(&mut self) {
        let norm = self.norm_squared().sqrt();
        for a in &mut self.amps {
            *a /= norm;
        }
    }

    // ---------------------------------------------------------------- gates

    pub fn apply_1q(&mut self, q: usize, u: &Matrix2) {
        assert!(q < self.n);
        let bq = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bq == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bq];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | bq] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_clifford_1q(&mut self, q: usize, c: usize) {
        self.apply_1q(q, &clifford_1q_unitary(c));
    }

    pub fn apply_h(&mut self, q: usize) {
        self.apply_clifford_1q(q, crate::clifford::C1_H);
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert!(control != target && control < self.n && target < self.n);
        let (bc, bt) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & bc != 0 && i & bt == 0 {
                self.amps.swap(i, i | bt);
            }
        }
    }

    /// exp(−iθ·X_a X_b).
    pub fn apply_xx(&mut self, theta: f64, a: usize, b: usize) {
        assert!(a != b && a < self.n && b < self.n);
        let (ba, bb) = (1usize << a, 1usize << b);
        let mask = ba | bb;
        let c = Complex64::new(theta.cos(), 0.0);
        let ms = Complex64::new(0.0, -theta.sin());
        for i in 0..self.amps.len() {
            if i & ba == 0 {
                let j = i ^ mask;
                let ai = self.amps[i];
                let aj = self.amps[j];
                self.amps[i] = c * ai + ms * aj;
                self.amps[j] = c * aj + ms * ai;
            }
        }
    }

    pub fn apply_pauli_z(&mut self, q: usize) {
        assert!(q < self.n);
        let bq = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bq != 0 {
                *a = -*a;
            }
        }
    }

    /// Applies a signed Pauli string as a unitary.
    pub fn apply_pauli_string(&mut self, p: &PauliString) {
        assert!(p.num_qubits() <= self.n);
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        let mut y_count = 0u32;
        for q in 0..p.num_qubits() {
            let (x, z) = p.get(q).bits();
            if x {
                xmask |= 1 << q;
            }
            if z {
                zmask |= 1 << q;
            }
            if x && z {
                y_count += 1;
            }
        }
        // Global i^(#Y), sign folded in.
        let mut phase = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if p.is_negative() {
            phase = -phase;
        }
        let old = self.amps.clone();
        for (i, &a) in old.iter().enumerate() {
            let parity = ((i & zmask).count_ones() & 1) == 1;
            let factor = if parity { -phase } else { phase };
            self.amps[i ^ xmask] = factor * a;
        }
    }

    /// ⟨ψ|P|ψ⟩ for a signed Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let mut tmp = self.clone();
        tmp.apply_pauli_string(p);
        let val: Complex64 = self
            .amps
            .iter()
            .zip(&tmp.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        val.re
    }

    /// Bloch vector (⟨X⟩, ⟨Y⟩, ⟨Z⟩) of qubit `q`.
    pub fn bloch_vector(&self, q: usize) -> (f64, f64, f64) {
        assert!(q < self.n);
        let bq = 1usize << q;
        let mut x = 0.0;
        let mut y = 0.0;
        let mut z = 0.0;
        for i in 0..self.amps.len() {
            if i & bq == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bq];
                let cross = a0.conj() * a1;
                x += 2.0 * cross.re;
                y += 2.0 * cross.im;
                z += a0.norm_sqr() - a1.norm_sqr();
            }
        }
        (x, y, z)
    }

    // --------------------------------------------------------- measurements

    /// Probability that qubit `q` reads 0 in the z-basis.
    pub fn prob_zero(&self, q: usize) -> f64 {
        assert!(q < self.n);
        let bq = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bq == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto the z-basis value and renormalizes; returns
    /// the branch probability (0 leaves the state zeroed on that branch).
    pub fn project_bit(&mut self, q: usize, value: bool) -> f64 {
        assert!(q < self.n);
        let bq = 1usize << q;
        let keep = if value { bq } else { 0 };
        let mut prob = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bq == keep {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if prob > 1e-300 {
            let norm = prob.sqrt();
            for a in &mut self.amps {
                *a /= norm;
            }
        }
        prob
    }

    /// Born-rule measurement of qubit `q` in the given basis; the state is
    /// projected and renormalized.
    pub fn measure<R: Rng>(
        &mut self,
        q: usize,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> bool {
        let align = align_to_z_index(basis);
        self.apply_clifford_1q(q, align);
        let p0 = self.prob_zero(q);
        // The draw guards against projecting onto a zero-probability branch.
        let outcome = rng.gen::<f64>() >= p0;
        self.project_bit(q, outcome);
        self.apply_clifford_1q(q, inverse(align));
        outcome
    }

    /// Samples a full z-basis readout of all qubits without modifying the
    /// state (one uniform draw, cumulative scan).
    pub fn sample_all_z<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return i;
            }
        }
        self.amps.len() - 1
    }

    /// Projects onto the ±1 eigenspace of a Pauli string; returns the branch
    /// probability and renormalizes when it is nonzero.
    pub fn project_pauli(&mut self, p: &PauliString, eigenvalue: i8) -> f64 {
        let mut rotated = self.clone();
        rotated.apply_pauli_string(p);
        let lambda = f64::from(eigenvalue);
        for (a, b) in self.amps.iter_mut().zip(&rotated.amps) {
            *a = 0.5 * (*a + lambda * *b);
        }
        let prob = self.norm_squared();
        if prob > 1e-12 {
            self.renormalize();
        }
        prob
    }
}

/// Builds the unit vector stabilized by every generator of the tableau.
///
/// Projects |0…0⟩ onto each stabilizer's +1 eigenspace in turn; when a
/// projection annihilates the state, the paired destabilizer flips the
/// eigenvalue and the projection is retried.
pub fn tableau_to_statevector(t: &Tableau) -> Result<StateVector> {
    let n = t.num_qubits();
    let mut s = StateVector::new(n)?;
    for i in 0..n {
        let gen = t.stabilizer(i);
        let mut trial = s.clone();
        let prob = trial.project_pauli(&gen, 1);
        if prob < 1e-9 {
            s.apply_pauli_string(&t.destabilizer(i));
            let prob2 = s.project_pauli(&gen, 1);
            debug_assert!(prob2 > 1e-9);
        } else {
            s = trial;
        }
    }
    Ok(s)
}

// ------------------------------------------------------------------- noise

/// Spectator map for XX-gate crosstalk.
#[derive(Debug, Clone)]
pub enum CrosstalkNeighbors {
    /// Chain-adjacent indices q−1 and q+1, derived from the register size.
    Chain,
    /// Explicit per-qubit spectator lists.
    Explicit(Vec<Vec<usize>>),
}

impl CrosstalkNeighbors {
    fn of(&self, q: usize, n: usize) -> Vec<usize> {
        match self {
            CrosstalkNeighbors::Chain => {
                let mut v = Vec::with_capacity(2);
                if q > 0 {
                    v.push(q - 1);
                }
                if q + 1 < n {
                    v.push(q + 1);
                }
                v
            }
            CrosstalkNeighbors::Explicit(lists) => {
                lists.get(q).cloned().unwrap_or_default()
            }
        }
    }
}

/// Noise model for the dense backend: coherent XX crosstalk onto spectator
/// qubits plus stochastic dephasing on two-qubit-gate participants.
#[derive(Debug, Clone)]
pub struct NoiseParams {
    /// Spurious rotation angle as a fraction of π/4.
    pub crosstalk_fraction: f64,
    /// Spectator qubits per qubit index; the gate partner is never a
    /// spectator even if listed.
    pub crosstalk_neighbors: CrosstalkNeighbors,
    /// Probability of a Z flip on each participant of a two-qubit gate.
    pub dephasing_prob: f64,
    /// Shots per circuit.
    pub shots: usize,
}

impl NoiseParams {
    pub fn noiseless(shots: usize) -> NoiseParams {
        NoiseParams {
            crosstalk_fraction: 0.0,
            crosstalk_neighbors: CrosstalkNeighbors::Chain,
            dephasing_prob: 0.0,
            shots,
        }
    }

    /// Crosstalk onto chain-adjacent spectators (the default map).
    pub fn with_chain_neighbors(epsilon: f64, dephasing_prob: f64, shots: usize) -> NoiseParams {
        NoiseParams {
            crosstalk_fraction: epsilon,
            crosstalk_neighbors: CrosstalkNeighbors::Chain,
            dephasing_prob,
            shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crosstalk_fraction < 0.0 {
            return Err(Error::InvalidConfig(
                "crosstalk fraction must be non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.dephasing_prob) {
            return Err(Error::InvalidConfig(
                "dephasing probability must lie in [0, 1]".into(),
            ));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        Ok(())
    }

    /// True when shot trajectories differ only by the readout draw.
    pub fn is_deterministic_unitary(&self) -> bool {
        self.dephasing_prob == 0.0
    }
}

/// Terminal z-basis readout of every qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub bits: Vec<bool>,
}

impl ShotRecord {
    fn from_index(index: usize, n: usize) -> ShotRecord {
        ShotRecord {
            bits: (0..n).map(|q| (index >> q) & 1 == 1).collect(),
        }
    }

    pub fn bit(&self, q: usize) -> bool {
        self.bits[q]
    }
}

fn apply_op_dense_noisy<R: Rng>(
    s: &mut StateVector,
    op: &GateOp,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<()> {
    let mut dephase_pair = |s: &mut StateVector, a: usize, b: usize, rng: &mut R| {
        if noise.dephasing_prob > 0.0 {
            for q in [a, b] {
                if rng.gen::<f64>() < noise.dephasing_prob {
                    s.apply_pauli_z(q);
                }
            }
        }
    };
    match *op {
        GateOp::Clifford1q { q, c } => s.apply_clifford_1q(q, c),
        GateOp::PauliX { q } => s.apply_1q(
            q,
            &[
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ],
        ),
        GateOp::Align { q, basis } => s.apply_clifford_1q(q, align_to_z_index(basis)),
        GateOp::Xx { a, b } => {
            s.apply_xx(std::f64::consts::FRAC_PI_4, a, b);
            if noise.crosstalk_fraction > 0.0 {
                let theta = noise.crosstalk_fraction * std::f64::consts::FRAC_PI_4;
                let n = s.num_qubits();
                for (g, partner) in [(a, b), (b, a)] {
                    for k in noise.crosstalk_neighbors.of(g, n) {
                        if k != partner && k != g && k < n {
                            s.apply_xx(theta, g, k);
                        }
                    }
                }
            }
            dephase_pair(s, a, b, rng);
        }
        GateOp::Cnot { control, target } => {
            s.apply_cnot(control, target);
            dephase_pair(s, control, target, rng);
        }
        GateOp::DeferredMeasure { q, ancilla, basis } => {
            let align = align_to_z_index(basis);
            s.apply_clifford_1q(q, align);
            s.apply_cnot(q, ancilla);
            s.apply_clifford_1q(q, inverse(align));
            dephase_pair(s, q, ancilla, rng);
        }
        GateOp::MeasureDirect { .. } => {
            return Err(Error::InvalidConfig(
                "noisy shot simulation requires the deferred-measurement form".into(),
            ));
        }
    }
    Ok(())
}

/// Executes a single op without noise (measurements sampled from `rng`).
pub fn apply_op_dense<R: Rng>(s: &mut StateVector, op: &GateOp, rng: &mut R) -> Result<()> {
    match *op {
        GateOp::MeasureDirect { q, basis } => {
            s.measure(q, basis, rng);
            Ok(())
        }
        _ => apply_op_dense_noisy(s, op, &NoiseParams::noiseless(1), rng),
    }
}

/// Runs the deferred-form circuit under the noise model and returns one
/// terminal all-qubit z readout per shot.
///
/// When the noise contains no stochastic element (dephasing off), the
/// evolution is a fixed unitary: it is run once and all shots are sampled
/// from the final distribution.
pub fn run_noisy_circuit<R: Rng>(
    c: &Circuit,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<ShotRecord>> {
    noise.validate()?;
    let n = c.total_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::QubitBudgetExceeded {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let mut shots = Vec::with_capacity(noise.shots);
    if noise.is_deterministic_unitary() {
        let mut s = StateVector::new(n)?;
        for op in &c.ops {
            apply_op_dense_noisy(&mut s, op, noise, rng)?;
        }
        for _ in 0..noise.shots {
            shots.push(ShotRecord::from_index(s.sample_all_z(rng), n));
        }
    } else {
        for _ in 0..noise.shots {
            let mut s = StateVector::new(n)?;
            for op in &c.ops {
                apply_op_dense_noisy(&mut s, op, noise, rng)?;
            }
            shots.push(ShotRecord::from_index(s.sample_all_z(rng), n));
        }
    }
    Ok(shots)
}

/// Binary entropy in bits, with H(0) = H(1) = 0.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Classical entropy of the reference bit over a shot list.
pub fn classical_entropy(shots: &[ShotRecord], reference: usize) -> Result<f64> {
    if shots.is_empty() {
        return Err(Error::EmptyShots);
    }
    let zeros = shots.iter().filter(|s| !s.bit(reference)).count();
    Ok(binary_entropy(zeros as f64 / shots.len() as f64))
}
