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

//! Circuit execution on the stabilizer backend and exhaustive branch
//! enumeration on both backends.
//!
//! Branch enumeration is the workhorse of the cross-backend oracle checks:
//! every measurement fork is followed, so the full joint distribution of
//! (measurement record, conditional state) is available exactly.

use rand::Rng;

use crate::circuit::{Circuit, GateOp};
use crate::clifford::{align_to_z_index, inverse};
use crate::error::{Error, Result};
use crate::pauli::{MeasurementBasis, Pauli, PauliString};
use crate::statevector::{apply_op_dense, StateVector};
use crate::tableau::{MeasurementOutcome, Tableau};

/// Applies a non-measuring op to the tableau. Deferred measurements are
/// unitary (align, CNOT, unalign); direct measurements are rejected.
pub fn apply_unitary_op_tableau(t: &mut Tableau, op: &GateOp) -> Result<()> {
    match *op {
        GateOp::Clifford1q { q, c } => t.apply_clifford_1q(q, c),
        GateOp::Xx { a, b } => t.apply_xx_pi4(a, b),
        GateOp::Cnot { control, target } => t.apply_cnot(control, target),
        GateOp::PauliX { q } => {
            t.apply_pauli_x(q);
            Ok(())
        }
        GateOp::Align { q, basis } => t.apply_clifford_1q(q, align_to_z_index(basis)),
        GateOp::DeferredMeasure { q, ancilla, basis } => {
            let align = align_to_z_index(basis);
            t.apply_clifford_1q(q, align)?;
            t.apply_cnot(q, ancilla)?;
            t.apply_clifford_1q(q, inverse(align))
        }
        GateOp::MeasureDirect { .. } => Err(Error::InvalidConfig(
            "direct measurement in unitary-only execution".into(),
        )),
    }
}

/// Applies any op, sampling measurement outcomes from `rng`; returns the
/// outcome for direct measurements.
pub fn apply_op_tableau<R: Rng>(
    t: &mut Tableau,
    op: &GateOp,
    rng: &mut R,
) -> Result<Option<MeasurementOutcome>> {
    match *op {
        GateOp::MeasureDirect { q, basis } => Ok(Some(t.measure(q, basis, rng))),
        _ => {
            apply_unitary_op_tableau(t, op)?;
            Ok(None)
        }
    }
}

/// Runs a full op list, returning the direct-measurement outcomes in order.
pub fn run_ops_tableau<R: Rng>(t: &mut Tableau, ops: &[GateOp], rng: &mut R) -> Result<Vec<bool>> {
    let mut record = Vec::new();
    for op in ops {
        if let Some(out) = apply_op_tableau(t, op, rng)? {
            record.push(out.value);
        }
    }
    Ok(record)
}

/// Bloch vector of qubit `q` from stabilizer expectations (each component is
/// exactly −1, 0, or +1).
pub fn tableau_bloch(t: &Tableau, q: usize) -> (f64, f64, f64) {
    let n = t.num_qubits();
    let x = t.expectation(&PauliString::single(n, q, Pauli::X));
    let y = t.expectation(&PauliString::single(n, q, Pauli::Y));
    let z = t.expectation(&PauliString::single(n, q, Pauli::Z));
    (f64::from(x), f64::from(y), f64::from(z))
}

/// One measurement branch: the record, its probability, and the conditional
/// post-circuit state.
#[derive(Debug, Clone)]
pub struct Branch {
    pub record: Vec<bool>,
    pub probability: f64,
    pub state: Tableau,
}

/// Dense mirror of [`Branch`].
#[derive(Debug, Clone)]
pub struct DenseBranch {
    pub record: Vec<bool>,
    pub probability: f64,
    pub state: StateVector,
}

fn walk_direct(
    mut t: Tableau,
    ops: &[GateOp],
    mut record: Vec<bool>,
    probability: f64,
    out: &mut Vec<Branch>,
) -> Result<()> {
    let mut i = 0;
    while i < ops.len() {
        match ops[i] {
            GateOp::MeasureDirect { q, basis } => {
                if t.is_deterministic(q, basis) {
                    let outcome = t.measure_forced(q, basis, false).or_else(|_| {
                        t.measure_forced(q, basis, true)
                    })?;
                    record.push(outcome.value);
                } else {
                    for v in [false, true] {
                        let mut t2 = t.clone();
                        t2.measure_forced(q, basis, v)?;
                        let mut rec2 = record.clone();
                        rec2.push(v);
                        walk_direct(t2, &ops[i + 1..], rec2, probability * 0.5, out)?;
                    }
                    return Ok(());
                }
            }
            ref op => {
                apply_unitary_op_tableau(&mut t, op)?;
            }
        }
        i += 1;
    }
    out.push(Branch {
        record,
        probability,
        state: t,
    });
    Ok(())
}

/// Enumerates all measurement branches of a direct-form circuit.
pub fn enumerate_direct_branches(c: &Circuit) -> Result<Vec<Branch>> {
    let t = Tableau::new(c.params.l + 1)?;
    let mut out = Vec::new();
    walk_direct(t, &c.ops, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

/// Forks a state over sequential z readouts of the given qubits.
pub fn readout_branches(t: &Tableau, qubits: &[usize]) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    fn walk(
        t: Tableau,
        qubits: &[usize],
        record: Vec<bool>,
        probability: f64,
        out: &mut Vec<Branch>,
    ) -> Result<()> {
        let Some((&q, rest)) = qubits.split_first() else {
            out.push(Branch {
                record,
                probability,
                state: t,
            });
            return Ok(());
        };
        if t.is_deterministic(q, MeasurementBasis::Z) {
            let mut t2 = t;
            let outcome = t2
                .measure_forced(q, MeasurementBasis::Z, false)
                .or_else(|_| t2.measure_forced(q, MeasurementBasis::Z, true))?;
            let mut rec = record;
            rec.push(outcome.value);
            walk(t2, rest, rec, probability, out)
        } else {
            for v in [false, true] {
                let mut t2 = t.clone();
                t2.measure_forced(q, MeasurementBasis::Z, v)?;
                let mut rec = record.clone();
                rec.push(v);
                walk(t2, rest, rec, probability * 0.5, out)?;
            }
            Ok(())
        }
    }
    walk(t.clone(), qubits, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

/// Enumerates branches of a deferred-form circuit: the ops run unitarily and
/// the fork happens over terminal z readouts of the measurement ancillae.
pub fn enumerate_deferred_branches(c: &Circuit) -> Result<Vec<Branch>> {
    let mut t = Tableau::new(c.total_qubits())?;
    for op in &c.ops {
        apply_unitary_op_tableau(&mut t, op)?;
    }
    readout_branches(&t, &c.ancilla_qubits())
}

// ------------------------------------------------------------- dense mirror

fn dense_measure_project(
    s: &mut StateVector,
    q: usize,
    basis: MeasurementBasis,
    value: bool,
) -> f64 {
    let align = align_to_z_index(basis);
    s.apply_clifford_1q(q, align);
    let prob = s.project_bit(q, value);
    s.apply_clifford_1q(q, inverse(align));
    prob
}

const PROB_FLOOR: f64 = 1e-12;

fn walk_direct_dense(
    mut s: StateVector,
    ops: &[GateOp],
    record: Vec<bool>,
    probability: f64,
    out: &mut Vec<DenseBranch>,
) -> Result<()> {
    use rand_chacha::rand_core::SeedableRng;
    // The rng is never consumed: every measurement fork is explicit.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut i = 0;
    while i < ops.len() {
        match ops[i] {
            GateOp::MeasureDirect { q, basis } => {
                for v in [false, true] {
                    let mut s2 = s.clone();
                    let p = dense_measure_project(&mut s2, q, basis, v);
                    if p > PROB_FLOOR {
                        let mut rec2 = record.clone();
                        rec2.push(v);
                        walk_direct_dense(s2, &ops[i + 1..], rec2, probability * p, out)?;
                    }
                }
                return Ok(());
            }
            ref op => {
                apply_op_dense(&mut s, op, &mut rng)?;
            }
        }
        i += 1;
    }
    out.push(DenseBranch {
        record,
        probability,
        state: s,
    });
    Ok(())
}

/// Dense branch enumeration of a direct-form circuit.
pub fn enumerate_direct_branches_dense(c: &Circuit) -> Result<Vec<DenseBranch>> {
    let s = StateVector::new(c.params.l + 1)?;
    let mut out = Vec::new();
    walk_direct_dense(s, &c.ops, Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

/// Dense branch enumeration of a deferred-form circuit: unitary evolution,
/// then forks over terminal ancilla readouts (zero-probability records are
/// not emitted).
pub fn enumerate_deferred_branches_dense(c: &Circuit) -> Result<Vec<DenseBranch>> {
    use rand_chacha::rand_core::SeedableRng;
    let mut s = StateVector::new(c.total_qubits())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for op in &c.ops {
        if matches!(op, GateOp::MeasureDirect { .. }) {
            return Err(Error::InvalidConfig(
                "deferred enumeration requires the deferred form".into(),
            ));
        }
        apply_op_dense(&mut s, op, &mut rng)?;
    }
    let mut out = Vec::new();
    fn walk(
        s: StateVector,
        qubits: &[usize],
        record: Vec<bool>,
        probability: f64,
        out: &mut Vec<DenseBranch>,
    ) {
        let Some((&q, rest)) = qubits.split_first() else {
            out.push(DenseBranch {
                record,
                probability,
                state: s,
            });
            return;
        };
        for v in [false, true] {
            let mut s2 = s.clone();
            let p = s2.project_bit(q, v);
            if p > PROB_FLOOR {
                let mut rec = record.clone();
                rec.push(v);
                walk(s2, rest, rec, probability * p, out);
            }
        }
    }
    walk(s, &c.ancilla_qubits(), Vec::new(), 1.0, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_circuit, CircuitParams, Segments};
    use crate::clifford::C1_H;

    fn tiny_deferred_x_measurement() -> Circuit {
        // |+⟩ measured in X, deferred onto an ancilla.
        Circuit {
            params: CircuitParams {
                l: 2,
                p: 0.0,
                p_x: 1.0,
                seed: 0,
            },
            reference: 2,
            num_ancillas: 1,
            ops: vec![
                GateOp::Clifford1q { q: 0, c: C1_H },
                GateOp::DeferredMeasure {
                    q: 0,
                    ancilla: 3,
                    basis: MeasurementBasis::X,
                },
            ],
            segments: Segments {
                bell_end: 0,
                scrambler_end: 1,
                evolution_end: 2,
            },
            remeasured: false,
        }
    }

    #[test]
    fn deferred_x_measurement_of_plus_is_deterministic() {
        let c = tiny_deferred_x_measurement();
        let branches = enumerate_deferred_branches(&c).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].record, vec![false]);
        assert!((branches[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_and_deferred_forms_are_branch_equivalent() {
        for seed in 0..10u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.5,
                p_x: 0.5,
                seed,
            })
            .unwrap();
            let deferred = c.without_feedback();
            let direct = c.direct_form();
            let mut db = enumerate_direct_branches(&direct).unwrap();
            let mut fb = enumerate_deferred_branches(&deferred).unwrap();
            db.sort_by(|a, b| a.record.cmp(&b.record));
            fb.sort_by(|a, b| a.record.cmp(&b.record));
            assert_eq!(db.len(), fb.len(), "seed {seed}");
            for (x, y) in db.iter().zip(&fb) {
                assert_eq!(x.record, y.record);
                assert!((x.probability - y.probability).abs() < 1e-12);
                // Conditional reference state must agree.
                assert_eq!(
                    tableau_bloch(&x.state, direct.reference),
                    tableau_bloch(&y.state, deferred.reference),
                );
            }
        }
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for seed in 0..10u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.6,
                p_x: 0.3,
                seed,
            })
            .unwrap();
            let branches = enumerate_deferred_branches(&c).unwrap();
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let m = c.num_measurements();
            assert_eq!(branches.len(), 1 << m);
        }
    }
}
