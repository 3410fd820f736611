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

//! Ensemble execution: reference-entropy trajectories, thresholded shot
//! ensembles, post-selection error mitigation, and reference tomography.
//!
//! Circuits in an ensemble are independent; each derives its own seed from
//! the master seed and its index, so results are byte-identical regardless
//! of thread count or execution order.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_bell_prep, build_scrambler, generate_circuit, ng_for, Circuit, CircuitParams,
    EvolutionDriver, GateOp,
};
use crate::error::{Error, Result};
use crate::exec::{apply_unitary_op_tableau, enumerate_deferred_branches};
use crate::feedback::purification_profile;
use crate::pauli::MeasurementBasis;
use crate::seed;
use crate::statevector::{
    binary_entropy, classical_entropy, run_noisy_circuit, NoiseParams, ShotRecord, StateVector,
    MAX_DENSE_QUBITS,
};
use crate::tableau::Tableau;

pub(crate) const TAG_CIRCUIT: u64 = 1;
pub(crate) const TAG_SHOTS: u64 = 2;
pub(crate) const TAG_BOOTSTRAP: u64 = 3;
pub(crate) const TAG_TRAJECTORY: u64 = 4;
pub(crate) const TAG_TOMOGRAPHY: u64 = 5;

/// Per-circuit time series of the reference entropy, indexed by two-qubit
/// gate count t = 0..gates. Noiseless stabilizer entries are exactly 0 or 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub seed: u64,
    pub purification_time: Option<usize>,
    pub series: Vec<f64>,
}

/// Ensemble-averaged ⟨S_Q(t)⟩ with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCurve {
    pub l: usize,
    pub p: f64,
    pub p_x: f64,
    pub n_circuits: usize,
    pub horizon_mult: usize,
    pub master_seed: u64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Parameters of a noiseless trajectory ensemble.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    pub l: usize,
    pub p: f64,
    pub p_x: f64,
    pub n_circuits: usize,
    /// Evolution length in units of N_g (1 = the standard circuit).
    pub horizon_mult: usize,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        CircuitParams {
            l: self.l,
            p: self.p,
            p_x: self.p_x,
            seed: 0,
        }
        .validate()?;
        if self.n_circuits == 0 {
            return Err(Error::InvalidConfig("n_circuits must be positive".into()));
        }
        if self.horizon_mult == 0 {
            return Err(Error::InvalidConfig("horizon_mult must be positive".into()));
        }
        Ok(())
    }

    pub fn circuit_seed(&self, index: usize) -> u64 {
        seed::derive_seed_u64(
            self.master_seed,
            &[
                TAG_CIRCUIT,
                self.l as u64,
                self.p.to_bits(),
                self.p_x.to_bits(),
                index as u64,
            ],
        )
    }

    /// Evolution steps simulated per circuit.
    pub fn steps(&self) -> Result<usize> {
        Ok(self.horizon_mult * ng_for(self.l)?)
    }
}

fn entropy_bit(t: &Tableau, reference: usize) -> f64 {
    if t.single_qubit_purity(reference).is_some() {
        0.0
    } else {
        1.0
    }
}

/// Runs one measurement branch of a circuit under direct-measurement
/// semantics, recording the reference entropy after each evolution gate
/// (and its attached measurement).
pub fn run_trajectory<R: Rng>(c: &Circuit, rng: &mut R) -> Result<TrajectoryRecord> {
    let reference = c.reference;
    let mut t = Tableau::new(c.params.l + 1)?;
    for op in &c.ops[..c.segments.scrambler_end] {
        apply_unitary_op_tableau(&mut t, op)?;
    }
    let mut series = Vec::with_capacity(c.evolution_gates() + 1);
    series.push(entropy_bit(&t, reference));
    let mut step_open = false;
    for op in &c.ops[c.segments.scrambler_end..c.segments.evolution_end] {
        match *op {
            GateOp::Xx { a, b } => {
                if step_open {
                    series.push(entropy_bit(&t, reference));
                }
                step_open = true;
                t.apply_xx_pi4(a, b)?;
            }
            GateOp::MeasureDirect { q, basis } | GateOp::DeferredMeasure { q, basis, .. } => {
                t.measure(q, basis, rng);
            }
            ref op => apply_unitary_op_tableau(&mut t, op)?,
        }
    }
    if step_open {
        series.push(entropy_bit(&t, reference));
    }
    let purification_time = series.iter().position(|&s| s == 0.0);
    Ok(TrajectoryRecord {
        index: 0,
        seed: c.params.seed,
        purification_time,
        series,
    })
}

/// Dense-backend trajectory: one Born-sampled branch, with the reference
/// entropy computed from its reduced density matrix.
pub fn run_trajectory_dense<R: Rng>(c: &Circuit, rng: &mut R) -> Result<TrajectoryRecord> {
    let reference = c.reference;
    let n = c.params.l + 1;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::QubitBudgetExceeded {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let mut s = StateVector::new(n)?;
    let mut dummy = seed::rng_from_u64(0);
    for op in &c.ops[..c.segments.scrambler_end] {
        crate::statevector::apply_op_dense(&mut s, op, &mut dummy)?;
    }
    let entropy = |s: &StateVector| {
        let (x, y, z) = s.bloch_vector(reference);
        bloch_entropy(x, y, z)
    };
    let mut series = Vec::with_capacity(c.evolution_gates() + 1);
    series.push(entropy(&s));
    let mut step_open = false;
    for op in &c.ops[c.segments.scrambler_end..c.segments.evolution_end] {
        match *op {
            GateOp::Xx { a, b } => {
                if step_open {
                    series.push(entropy(&s));
                }
                step_open = true;
                s.apply_xx(std::f64::consts::FRAC_PI_4, a, b);
            }
            GateOp::MeasureDirect { q, basis } | GateOp::DeferredMeasure { q, basis, .. } => {
                s.measure(q, basis, rng);
            }
            ref op => crate::statevector::apply_op_dense(&mut s, op, &mut dummy)?,
        }
    }
    if step_open {
        series.push(entropy(&s));
    }
    let purification_time = series.iter().position(|&v| v < 1e-9);
    Ok(TrajectoryRecord {
        index: 0,
        seed: c.params.seed,
        purification_time,
        series,
    })
}

/// Generation and trajectory in one pass, stopping at purification.
///
/// Consumes the random stream exactly as `generate_circuit` does, so for
/// `steps = N_g` it samples the same circuit and the same branch; entropy is
/// monotone non-increasing, so the first zero determines the whole series.
pub fn purification_time_fused(
    l: usize,
    p: f64,
    p_x: f64,
    circuit_seed: u64,
    steps: usize,
) -> Result<Option<u32>> {
    let mut rng = seed::rng_from_u64(circuit_seed);
    let mut live = Tableau::new(l + 1)?;
    for op in build_bell_prep(l, &mut rng) {
        apply_unitary_op_tableau(&mut live, &op)?;
    }
    for op in build_scrambler(l, &mut rng) {
        apply_unitary_op_tableau(&mut live, &op)?;
    }
    let mut driver = EvolutionDriver::new(l, p, p_x);
    let mut ops = Vec::with_capacity(2);
    for t in 1..=steps {
        ops.clear();
        driver.step(&mut live, &mut rng, &mut ops)?;
        if live.single_qubit_purity(l).is_some() {
            return Ok(Some(t as u32));
        }
    }
    Ok(None)
}

/// Purification times for every circuit of an ensemble, in index order.
pub fn collect_purification_times(cfg: &EnsembleConfig) -> Result<Vec<Option<u32>>> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    (0..cfg.n_circuits)
        .into_par_iter()
        .map(|i| purification_time_fused(cfg.l, cfg.p, cfg.p_x, cfg.circuit_seed(i), steps))
        .collect()
}

/// Builds the ensemble curve from per-circuit purification times: the mean
/// at time t is the surviving (still-entangled) fraction.
pub fn curve_from_times(cfg: &EnsembleConfig, times: &[Option<u32>]) -> Result<EnsembleCurve> {
    let steps = cfg.steps()?;
    let n = times.len();
    let mut mean = Vec::with_capacity(steps + 1);
    let mut stderr = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let alive = times
            .iter()
            .filter(|pt| pt.map_or(true, |x| x as usize > t))
            .count();
        let m = alive as f64 / n as f64;
        mean.push(m);
        stderr.push(if n > 1 {
            (m * (1.0 - m) / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        });
    }
    Ok(EnsembleCurve {
        l: cfg.l,
        p: cfg.p,
        p_x: cfg.p_x,
        n_circuits: n,
        horizon_mult: cfg.horizon_mult,
        master_seed: cfg.master_seed,
        mean,
        stderr,
    })
}

/// Independent circuits and branches, averaged per time step.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleCurve> {
    let times = collect_purification_times(cfg)?;
    curve_from_times(cfg, &times)
}

/// Per-circuit trajectory records for an ensemble (staircase series
/// reconstructed from the purification times).
pub fn run_ensemble_records(cfg: &EnsembleConfig) -> Result<Vec<TrajectoryRecord>> {
    let times = collect_purification_times(cfg)?;
    let steps = cfg.steps()?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(index, pt)| {
            let cutoff = pt.map_or(steps + 1, |x| x as usize);
            TrajectoryRecord {
                index,
                seed: cfg.circuit_seed(index),
                purification_time: pt.map(|x| x as usize),
                series: (0..=steps)
                    .map(|t| if t < cutoff { 1.0 } else { 0.0 })
                    .collect(),
            }
        })
        .collect())
}

// ------------------------------------------------------------------- shots

/// Backend for shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotBackend {
    /// Exact stabilizer sampling; valid only for noiseless runs.
    Stabilizer,
    /// Dense statevector with the configured noise model.
    Statevector,
}

/// Parameters of a thresholded shot ensemble.
#[derive(Debug, Clone, Copy)]
pub struct ShotEnsembleConfig {
    pub l: usize,
    pub p: f64,
    pub p_x: f64,
    pub n_circuits: usize,
    pub master_seed: u64,
    /// Classical-entropy threshold; outcomes above count as S_{C,T} = 1.
    pub threshold: f64,
}

/// Per-circuit outcome of a shot ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitShotResult {
    pub index: usize,
    pub seed: u64,
    pub purifies: bool,
    pub num_measurements: usize,
    pub total_qubits: usize,
    pub s_c: f64,
    pub s_ct: u8,
}

/// Thresholded classical entropies over an ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdedResult {
    pub threshold: f64,
    pub per_circuit: Vec<CircuitShotResult>,
    pub mean_sct: f64,
    pub stderr_sct: f64,
    pub mean_sc: f64,
}

/// Samples terminal z readouts of a deferred-form circuit on the stabilizer
/// backend (exact, noiseless).
pub fn sample_shots_stabilizer<R: Rng>(
    c: &Circuit,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<ShotRecord>> {
    let mut base = Tableau::new(c.total_qubits())?;
    for op in &c.ops {
        apply_unitary_op_tableau(&mut base, op)?;
    }
    let n = c.total_qubits();
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut t = base.clone();
        let bits = (0..n)
            .map(|q| t.measure(q, MeasurementBasis::Z, rng).value)
            .collect();
        out.push(ShotRecord { bits });
    }
    Ok(out)
}

/// Runs a circuit ensemble, samples shots per circuit, computes the
/// classical entropy of the reference readout, and thresholds it.
pub fn run_shot_ensemble(
    cfg: &ShotEnsembleConfig,
    noise: &NoiseParams,
    backend: ShotBackend,
) -> Result<ThresholdedResult> {
    noise.validate()?;
    if !(0.0..=1.0).contains(&cfg.threshold) {
        return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
    }
    if backend == ShotBackend::Stabilizer
        && (noise.crosstalk_fraction != 0.0 || noise.dephasing_prob != 0.0)
    {
        return Err(Error::InvalidConfig(
            "stabilizer backend cannot simulate noise; use the statevector backend".into(),
        ));
    }
    let ens = EnsembleConfig {
        l: cfg.l,
        p: cfg.p,
        p_x: cfg.p_x,
        n_circuits: cfg.n_circuits,
        horizon_mult: 1,
        master_seed: cfg.master_seed,
    };
    ens.validate()?;
    let per_circuit: Vec<CircuitShotResult> = (0..cfg.n_circuits)
        .into_par_iter()
        .map(|index| -> Result<CircuitShotResult> {
            let seed = ens.circuit_seed(index);
            let c = generate_circuit(&CircuitParams {
                l: cfg.l,
                p: cfg.p,
                p_x: cfg.p_x,
                seed,
            })?;
            let mut shot_rng =
                seed::rng_for(cfg.master_seed, &[TAG_SHOTS, index as u64]);
            let shots = match backend {
                ShotBackend::Stabilizer => sample_shots_stabilizer(&c, noise.shots, &mut shot_rng)?,
                ShotBackend::Statevector => run_noisy_circuit(&c, noise, &mut shot_rng)?,
            };
            let s_c = classical_entropy(&shots, c.reference)?;
            let purifies = purification_profile(&c)?.purifies;
            Ok(CircuitShotResult {
                index,
                seed,
                purifies,
                num_measurements: c.num_measurements(),
                total_qubits: c.total_qubits(),
                s_c,
                s_ct: u8::from(s_c > cfg.threshold),
            })
        })
        .collect::<Result<_>>()?;

    let n = per_circuit.len() as f64;
    let mean_sct = per_circuit.iter().map(|r| f64::from(r.s_ct)).sum::<f64>() / n;
    let mean_sc = per_circuit.iter().map(|r| r.s_c).sum::<f64>() / n;
    let stderr_sct = if per_circuit.len() > 1 {
        let var = per_circuit
            .iter()
            .map(|r| (f64::from(r.s_ct) - mean_sct).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ThresholdedResult {
        threshold: cfg.threshold,
        per_circuit,
        mean_sct,
        stderr_sct,
        mean_sc,
    })
}

// -------------------------------------------------------------- mitigation

/// Retention counts of one mitigation pass.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MitigationStats {
    pub total: usize,
    pub retained: usize,
}

impl MitigationStats {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.retained as f64 / self.total as f64
        }
    }
}

/// Retained fraction n averaged over tomography bases.
pub fn retained_fraction(per_basis: &[MitigationStats]) -> f64 {
    if per_basis.is_empty() {
        return 0.0;
    }
    per_basis.iter().map(MitigationStats::fraction).sum::<f64>() / per_basis.len() as f64
}

/// Map from ancilla record to the forced z values of deterministic qubits
/// (reference excluded).
pub fn deterministic_readout_map(
    c: &Circuit,
) -> Result<BTreeMap<Vec<bool>, Vec<Option<bool>>>> {
    let n = c.total_qubits();
    let mut map = BTreeMap::new();
    let mut dummy = seed::rng_from_u64(0);
    for branch in enumerate_deferred_branches(c)? {
        let mut state = branch.state;
        let mut forced: Vec<Option<bool>> = vec![None; n];
        for (q, slot) in forced.iter_mut().enumerate() {
            if q != c.reference && state.is_deterministic(q, MeasurementBasis::Z) {
                *slot = Some(state.measure(q, MeasurementBasis::Z, &mut dummy).value);
            }
        }
        map.insert(branch.record, forced);
    }
    Ok(map)
}

/// Discards shots whose deterministic qubits (conditioned on their own
/// ancilla record) disagree with the noiseless simulation, including
/// non-participating qubits that must read zero.
pub fn mitigate_shots(
    c: &Circuit,
    shots: &[ShotRecord],
) -> Result<(Vec<ShotRecord>, MitigationStats)> {
    let map = deterministic_readout_map(c)?;
    let ancillas = c.ancilla_qubits();
    let mut kept = Vec::with_capacity(shots.len());
    for shot in shots {
        let record: Vec<bool> = ancillas.iter().map(|&a| shot.bit(a)).collect();
        let ok = match map.get(&record) {
            Some(forced) => forced
                .iter()
                .enumerate()
                .all(|(q, f)| f.map_or(true, |v| shot.bit(q) == v)),
            // A record that never occurs noiselessly is itself an error.
            None => false,
        };
        if ok {
            kept.push(shot.clone());
        }
    }
    let stats = MitigationStats {
        total: shots.len(),
        retained: kept.len(),
    };
    Ok((kept, stats))
}

// -------------------------------------------------------------- tomography

/// Von Neumann entropy (bits) of the single-qubit state with the given
/// Bloch vector, clamped to the physical ball.
pub fn bloch_entropy(x: f64, y: f64, z: f64) -> f64 {
    let r = (x * x + y * y + z * z).sqrt().min(1.0);
    binary_entropy((1.0 + r) / 2.0)
}

/// Reference-entropy estimates per measurement record.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    /// Record → estimated S_Q, for records observed in all three bases.
    pub per_record: BTreeMap<Vec<bool>, f64>,
    /// Records observed in some basis but missing shots in another.
    pub excluded: Vec<Vec<bool>>,
    /// Mitigation retention per basis (x, y, z), when enabled.
    pub mitigation: Option<[MitigationStats; 3]>,
    /// Record weights (total retained shots across bases).
    pub weights: BTreeMap<Vec<bool>, usize>,
}

impl TomographyResult {
    /// Shot-weighted average of the per-record estimates.
    pub fn weighted_mean(&self) -> Option<f64> {
        let total: usize = self.weights.values().sum();
        if total == 0 {
            return None;
        }
        Some(
            self.per_record
                .iter()
                .map(|(rec, s)| *s * self.weights[rec] as f64)
                .sum::<f64>()
                / total as f64,
        )
    }
}

/// Estimates the reference entropy per measurement record via single-qubit
/// tomography: three readout bases, empirical Bloch vector, clamped density
/// matrix.
///
/// The circuit must be in deferred form without feedback. `noise.shots` is
/// the per-basis shot count.
pub fn tomography_entropy(
    c: &Circuit,
    noise: &NoiseParams,
    mitigate: bool,
    master_seed: u64,
) -> Result<TomographyResult> {
    let reference = c.reference;
    let ancillas = c.ancilla_qubits();
    let bases = [
        MeasurementBasis::X,
        MeasurementBasis::Y,
        MeasurementBasis::Z,
    ];
    // counts[record][basis] = (shots, ones of the reference bit)
    let mut counts: BTreeMap<Vec<bool>, [[usize; 2]; 3]> = BTreeMap::new();
    let mut mitigation_stats = [MitigationStats {
        total: 0,
        retained: 0,
    }; 3];
    for (bi, &basis) in bases.iter().enumerate() {
        let mut variant = c.clone();
        if basis != MeasurementBasis::Z {
            variant.ops.push(GateOp::Align {
                q: reference,
                basis,
            });
        }
        let mut rng = seed::rng_for(
            master_seed,
            &[TAG_TOMOGRAPHY, c.params.seed, bi as u64],
        );
        let mut shots = run_noisy_circuit(&variant, noise, &mut rng)?;
        if mitigate {
            let (kept, stats) = mitigate_shots(&variant, &shots)?;
            shots = kept;
            mitigation_stats[bi] = stats;
        }
        for shot in &shots {
            let record: Vec<bool> = ancillas.iter().map(|&a| shot.bit(a)).collect();
            let entry = counts.entry(record).or_insert([[0; 2]; 3]);
            entry[bi][0] += 1;
            entry[bi][1] += usize::from(shot.bit(reference));
        }
    }

    let mut per_record = BTreeMap::new();
    let mut weights = BTreeMap::new();
    let mut excluded = Vec::new();
    for (record, tally) in &counts {
        if tally.iter().any(|[n, _]| *n == 0) {
            excluded.push(record.clone());
            continue;
        }
        let comp = |bi: usize| {
            let [n, ones] = tally[bi];
            1.0 - 2.0 * ones as f64 / n as f64
        };
        let s = bloch_entropy(comp(0), comp(1), comp(2));
        per_record.insert(record.clone(), s);
        weights.insert(record.clone(), tally.iter().map(|[n, _]| n).sum());
    }
    Ok(TomographyResult {
        per_record,
        excluded,
        mitigation: mitigate.then_some(mitigation_stats),
        weights,
    })
}

// -------------------------------------------------- threshold calibration

/// Fits a two-component Gaussian mixture to entropy outcomes and returns
/// the pdf intersection between the two means, reproducing the procedure
/// that fixes the S_C threshold.
pub fn calibrate_threshold(samples: &[f64]) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::InvalidConfig(
            "threshold calibration needs at least 4 samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |f: f64| sorted[((sorted.len() - 1) as f64 * f) as usize];
    let mut mu = [q(0.1), q(0.9)];
    if (mu[1] - mu[0]).abs() < 1e-9 {
        return Err(Error::InvalidConfig(
            "samples are not bimodal; cannot calibrate a threshold".into(),
        ));
    }
    let global_var = {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / samples.len() as f64
    };
    let mut var = [global_var / 4.0 + 1e-6; 2];
    let mut w = [0.5; 2];

    let pdf = |x: f64, mu: f64, var: f64| {
        (-0.5 * (x - mu).powi(2) / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    };
    for _ in 0..200 {
        let mut sums = [0.0; 2];
        let mut means = [0.0; 2];
        let mut vars = [0.0; 2];
        for &x in samples {
            let p0 = w[0] * pdf(x, mu[0], var[0]);
            let p1 = w[1] * pdf(x, mu[1], var[1]);
            let total = (p0 + p1).max(1e-300);
            let r = [p0 / total, p1 / total];
            for k in 0..2 {
                sums[k] += r[k];
                means[k] += r[k] * x;
                vars[k] += r[k] * x * x;
            }
        }
        for k in 0..2 {
            let s = sums[k].max(1e-12);
            mu[k] = means[k] / s;
            var[k] = (vars[k] / s - mu[k] * mu[k]).max(1e-8);
            w[k] = s / samples.len() as f64;
        }
    }
    if mu[0] > mu[1] {
        mu.swap(0, 1);
        var.swap(0, 1);
        w.swap(0, 1);
    }

    // Solve w0·N(x|mu0,var0) = w1·N(x|mu1,var1) for x between the means.
    let a = 0.5 / var[1] - 0.5 / var[0];
    let b = mu[0] / var[0] - mu[1] / var[1];
    let cterm = 0.5 * (mu[1] * mu[1] / var[1] - mu[0] * mu[0] / var[0])
        + (w[0] / var[0].sqrt()).ln()
        - (w[1] / var[1].sqrt()).ln();
    let intersection = if a.abs() < 1e-12 {
        // Equal variances: linear equation.
        -cterm / b
    } else {
        let disc = b * b - 4.0 * a * cterm;
        if disc < 0.0 {
            (mu[0] + mu[1]) / 2.0
        } else {
            let r1 = (-b + disc.sqrt()) / (2.0 * a);
            let r2 = (-b - disc.sqrt()) / (2.0 * a);
            let in_range = |x: f64| x > mu[0] && x < mu[1];
            if in_range(r1) {
                r1
            } else if in_range(r2) {
                r2
            } else {
                (mu[0] + mu[1]) / 2.0
            }
        }
    };
    Ok(intersection)
}
