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

//! Purification profiling and feedback-circuit synthesis.
//!
//! A purifying circuit drives the reference qubit to a pure state along some
//! Pauli axis; which branch value it lands on is an affine GF(2) function of
//! the measurement record. The feedback circuit undoes that dependence with
//! classical logic executed coherently: an alignment rotation on the
//! reference, a CNOT from each mask ancilla, and an optional X, leaving the
//! reference in |0⟩ on every branch.
//!
//! Stabilizer dynamics make the profile branch-independent: measurement
//! outcomes only toggle generator signs, so purification time and basis are
//! properties of the circuit, not of the record.

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::exec::apply_unitary_op_tableau;
use crate::pauli::MeasurementBasis;
use crate::tableau::Tableau;

/// Enumeration cap: feedback synthesis walks all 2^m records.
pub const FEEDBACK_ENUMERATION_CAP: usize = 20;

/// Whether, when, and along which axis the reference purifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PurificationProfile {
    pub purifies: bool,
    /// Evolution gate index at which the reference entropy drops to zero.
    pub time: Option<usize>,
    /// Pauli axis along which the reference is pure at the end of evolution.
    pub basis: Option<MeasurementBasis>,
}

/// The synthesized feedback: reference bit = offset ⊕ (⊕ record[mask]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackPlan {
    pub basis: MeasurementBasis,
    /// Measurement indices whose record bits enter the parity.
    pub mask: Vec<usize>,
    pub offset: bool,
}

/// Replays the circuit on `L+1` qubits with all measurement outcomes forced
/// to the given record bits. Deferred measurements are treated as direct
/// (the system-plus-reference state is identical, ancillae merely carry the
/// record).
fn replay_forced(c: &Circuit, record: usize) -> Result<Tableau> {
    let mut t = Tableau::new(c.params.l + 1)?;
    let mut m = 0usize;
    for op in &c.ops[..c.segments.evolution_end] {
        match *op {
            GateOp::MeasureDirect { q, basis } | GateOp::DeferredMeasure { q, basis, .. } => {
                let forced = (record >> m) & 1 == 1;
                t.measure_forced(q, basis, forced)?;
                m += 1;
            }
            ref op => apply_unitary_op_tableau(&mut t, op)?,
        }
    }
    Ok(t)
}

/// Runs one branch and records when the reference entropy drops to zero,
/// plus the purity axis at the end of evolution.
///
/// The zero branch is representative: entropy and determinism depend only on
/// the generators' Pauli content, which is identical on every branch.
pub fn purification_profile(c: &Circuit) -> Result<PurificationProfile> {
    let reference = c.reference;
    let mut t = Tableau::new(c.params.l + 1)?;
    let mut time = None;
    let mut gate_index = 0usize;
    let prefix = c.segments.scrambler_end;
    for op in &c.ops[..prefix] {
        apply_unitary_op_tableau(&mut t, op)?;
    }
    if t.single_qubit_pure_axis(reference).is_some() {
        time = Some(0);
    }
    let apply_monitored = |t: &mut Tableau, op: &GateOp| -> Result<()> {
        match *op {
            GateOp::MeasureDirect { q, basis } | GateOp::DeferredMeasure { q, basis, .. } => {
                // Deterministic measurements never change the state; for the
                // rest, the zero branch stands in for all of them.
                if !t.is_deterministic(q, basis) {
                    t.measure_forced(q, basis, false)?;
                }
                Ok(())
            }
            ref op => apply_unitary_op_tableau(t, op),
        }
    };
    for op in &c.ops[prefix..c.segments.evolution_end] {
        if matches!(op, GateOp::Xx { .. }) {
            gate_index += 1;
        }
        apply_monitored(&mut t, op)?;
        if time.is_none() && t.single_qubit_pure_axis(reference).is_some() {
            time = Some(gate_index);
        }
    }
    let basis = t.single_qubit_pure_axis(reference).map(|(b, _)| b);
    Ok(PurificationProfile {
        purifies: basis.is_some(),
        time: if basis.is_some() { time } else { None },
        basis,
    })
}

/// The record → reference-bit truth table of a purifying circuit, indexed by
/// the record as a binary number with measurement 0 in the least significant
/// bit.
pub fn truth_table(c: &Circuit) -> Result<Vec<bool>> {
    let profile = purification_profile(c)?;
    let Some(basis) = profile.basis else {
        return Err(Error::NotPurifying);
    };
    let m = c.num_measurements();
    if m > FEEDBACK_ENUMERATION_CAP {
        return Err(Error::TooManyMeasurements {
            m,
            cap: FEEDBACK_ENUMERATION_CAP,
        });
    }
    let reference = c.reference;
    let mut table = Vec::with_capacity(1 << m);
    for record in 0..(1usize << m) {
        let t = replay_forced(c, record)?;
        let (axis, sign) = t
            .single_qubit_pure_axis(reference)
            .ok_or(Error::NotPurifying)?;
        debug_assert_eq!(axis, basis, "purity axis is branch-independent");
        table.push(sign < 0);
    }
    Ok(table)
}

/// Synthesizes the feedback plan and its gate sequence for a purifying
/// deferred-form circuit.
///
/// All 2^m records are enumerated; the resulting truth table must be affine
/// over GF(2) (guaranteed by stabilizer dynamics — a violation signals a
/// bug and is reported as an error rather than silently repaired).
pub fn synthesize_feedback(c: &Circuit) -> Result<(FeedbackPlan, Vec<GateOp>)> {
    let m = c.num_measurements();
    if c.num_ancillas != m {
        return Err(Error::InvalidConfig(
            "feedback synthesis requires the deferred-measurement form".into(),
        ));
    }
    let profile = purification_profile(c)?;
    let Some(basis) = profile.basis else {
        return Err(Error::NotPurifying);
    };
    let table = truth_table(c)?;

    let offset = table[0];
    let mask_bits: Vec<bool> = (0..m).map(|i| table[1 << i] ^ offset).collect();
    for (record, &value) in table.iter().enumerate() {
        let mut parity = offset;
        for (i, &in_mask) in mask_bits.iter().enumerate() {
            if in_mask && (record >> i) & 1 == 1 {
                parity ^= true;
            }
        }
        if parity != value {
            return Err(Error::NonAffineTruthTable);
        }
    }

    let mask: Vec<usize> = (0..m).filter(|&i| mask_bits[i]).collect();
    let reference = c.reference;
    let ancillas = c.ancilla_qubits();
    let mut ops = Vec::new();
    if basis != MeasurementBasis::Z {
        ops.push(GateOp::Align {
            q: reference,
            basis,
        });
    }
    for &i in &mask {
        ops.push(GateOp::Cnot {
            control: ancillas[i],
            target: reference,
        });
    }
    if offset {
        ops.push(GateOp::PauliX { q: reference });
    }
    Ok((
        FeedbackPlan {
            basis,
            mask,
            offset,
        },
        ops,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_circuit, CircuitParams, Segments};
    use crate::exec::{enumerate_deferred_branches, tableau_bloch};
    use crate::pauli::{Pauli, PauliString};

    #[test]
    fn measurement_free_circuit_never_purifies() {
        let c = generate_circuit(&CircuitParams {
            l: 6,
            p: 0.0,
            p_x: 0.0,
            seed: 3,
        })
        .unwrap();
        let profile = purification_profile(&c).unwrap();
        assert!(!profile.purifies);
        assert_eq!(profile.time, None);
        assert_eq!(profile.basis, None);
    }

    #[test]
    fn pure_phase_sample_purifies_once() {
        // Scan a few seeds for a purifying circuit and check the profile.
        let mut found = false;
        for seed in 0..50u64 {
            let c = generate_circuit(&CircuitParams {
                l: 6,
                p: 0.15,
                p_x: 1.0,
                seed,
            })
            .unwrap();
            let profile = purification_profile(&c).unwrap();
            if profile.purifies {
                found = true;
                let t = profile.time.unwrap();
                assert!(t <= c.evolution_gates());
                break;
            }
        }
        assert!(found, "no purifying circuit in 50 seeds at p_x = 1");
    }

    #[test]
    fn purification_time_is_branch_independent() {
        let mut checked = 0;
        for seed in 0..200u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.5,
                p_x: 1.0,
                seed,
            })
            .unwrap();
            let m = c.num_measurements();
            if m == 0 || m > 3 {
                continue;
            }
            let profile = purification_profile(&c).unwrap();
            if !profile.purifies {
                continue;
            }
            checked += 1;
            // Recompute the drop time on every branch by replaying with all
            // possible forced records and scanning entropies.
            for record in 0..(1usize << m) {
                let mut t = Tableau::new(c.params.l + 1).unwrap();
                let mut gate = 0usize;
                let mut k = 0usize;
                let mut drop = None;
                for op in &c.ops[..c.segments.evolution_end] {
                    match *op {
                        GateOp::MeasureDirect { q, basis }
                        | GateOp::DeferredMeasure { q, basis, .. } => {
                            t.measure_forced(q, basis, (record >> k) & 1 == 1).unwrap();
                            k += 1;
                        }
                        ref op => apply_unitary_op_tableau(&mut t, op).unwrap(),
                    }
                    if matches!(op, GateOp::Xx { .. }) {
                        gate += 1;
                    }
                    if drop.is_none() && t.single_qubit_pure_axis(c.reference).is_some() {
                        drop = Some(gate);
                    }
                }
                assert_eq!(drop, profile.time, "seed {seed} record {record}");
            }
            if checked >= 10 {
                break;
            }
        }
        assert!(checked >= 5, "too few purifying small-m circuits");
    }

    #[test]
    fn feedback_disentangles_on_every_branch() {
        let mut verified = 0;
        for seed in 0..400u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.3,
                p_x: 1.0,
                seed,
            })
            .unwrap();
            let profile = purification_profile(&c).unwrap();
            if !profile.purifies {
                continue;
            }
            // generate_circuit already appended feedback; verify behavior.
            for branch in enumerate_deferred_branches(&c).unwrap() {
                let bloch = tableau_bloch(&branch.state, c.reference);
                assert_eq!(bloch, (0.0, 0.0, 1.0), "seed {seed}");
                assert_eq!(
                    branch.state.subsystem_entropy(&[c.reference]).unwrap(),
                    0
                );
            }
            verified += 1;
            if verified >= 50 {
                break;
            }
        }
        assert!(verified >= 20, "only {verified} purifying circuits found");
    }

    #[test]
    fn plan_matches_truth_table() {
        for seed in 0..300u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.4,
                p_x: 0.5,
                seed,
            })
            .unwrap();
            let without = c.without_feedback();
            let profile = purification_profile(&without).unwrap();
            if !profile.purifies || c.num_measurements() == 0 {
                continue;
            }
            let (plan, _ops) = synthesize_feedback(&without).unwrap();
            let table = truth_table(&without).unwrap();
            for (record, &v) in table.iter().enumerate() {
                let mut expect = plan.offset;
                for &i in &plan.mask {
                    if (record >> i) & 1 == 1 {
                        expect ^= true;
                    }
                }
                assert_eq!(v, expect);
            }
            return;
        }
        panic!("no purifying circuit with measurements found");
    }

    /// A hand-built circuit with no measurements whose reference is already
    /// pure: the feedback degenerates to at most an X.
    #[test]
    fn degenerate_feedback_without_measurements() {
        let base = |ops: Vec<GateOp>| Circuit {
            params: CircuitParams {
                l: 2,
                p: 0.0,
                p_x: 0.0,
                seed: 0,
            },
            reference: 2,
            num_ancillas: 0,
            segments: Segments {
                bell_end: 0,
                scrambler_end: 0,
                evolution_end: ops.len(),
            },
            ops,
            remeasured: false,
        };
        // Reference |0⟩: empty plan, no ops.
        let c = base(vec![]);
        let (plan, ops) = synthesize_feedback(&c).unwrap();
        assert_eq!(plan.basis, MeasurementBasis::Z);
        assert!(plan.mask.is_empty());
        assert!(!plan.offset);
        assert!(ops.is_empty());

        // Reference |1⟩: offset 1, a single X.
        let c = base(vec![GateOp::PauliX { q: 2 }]);
        let (plan, ops) = synthesize_feedback(&c).unwrap();
        assert!(plan.offset);
        assert_eq!(ops, vec![GateOp::PauliX { q: 2 }]);

        // Reference |+⟩: x-basis alignment only.
        let c = base(vec![GateOp::Clifford1q {
            q: 2,
            c: crate::clifford::C1_H,
        }]);
        let (plan, ops) = synthesize_feedback(&c).unwrap();
        assert_eq!(plan.basis, MeasurementBasis::X);
        assert_eq!(
            ops,
            vec![GateOp::Align {
                q: 2,
                basis: MeasurementBasis::X
            }]
        );
    }

    #[test]
    fn non_purifying_circuit_is_rejected() {
        let c = generate_circuit(&CircuitParams {
            l: 6,
            p: 0.0,
            p_x: 0.0,
            seed: 9,
        })
        .unwrap();
        assert!(matches!(
            synthesize_feedback(&c),
            Err(Error::NotPurifying)
        ));
        assert!(matches!(truth_table(&c), Err(Error::NotPurifying)));
    }

    #[test]
    fn replay_reproduces_expectations() {
        // Forced replays agree with full deferred enumeration.
        for seed in 0..60u64 {
            let c = generate_circuit(&CircuitParams {
                l: 4,
                p: 0.5,
                p_x: 0.5,
                seed,
            })
            .unwrap()
            .without_feedback();
            let m = c.num_measurements();
            if m == 0 || m > 4 {
                continue;
            }
            let branches = enumerate_deferred_branches(&c).unwrap();
            for branch in branches {
                let record_index: usize = branch
                    .record
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| usize::from(b) << i)
                    .sum();
                let t = replay_forced(&c, record_index).unwrap();
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let op = PauliString::single(c.params.l + 1, c.reference, p);
                    let got = t.expectation(&op);
                    let want = branch
                        .state
                        .expectation(&PauliString::single(c.total_qubits(), c.reference, p));
                    assert_eq!(got, want, "seed {seed} {p:?}");
                }
            }
            return;
        }
        panic!("no suitable circuit found");
    }
}
