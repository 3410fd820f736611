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

use thiserror::Error;

/// Errors produced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count must be at least {min}, got {got}")]
    InvalidQubitCount { min: usize, got: usize },

    #[error("qubit index {q} out of range for {n} qubits")]
    QubitOutOfRange { q: usize, n: usize },

    #[error("clifford index {c} out of range (must be < 24)")]
    CliffordOutOfRange { c: usize },

    #[error("two-qubit gate requires distinct qubits, got {q} twice")]
    SameQubit { q: usize },

    #[error("subsystem must be non-empty")]
    EmptySubset,

    #[error("tableau invariant violated: {0}")]
    InvariantViolated(String),

    #[error("statevector qubit budget exceeded: {n} > {max}")]
    QubitBudgetExceeded { n: usize, max: usize },

    #[error("shot list is empty")]
    EmptyShots,

    #[error("measurement of the reference qubit is not supported")]
    ReferenceMeasured,

    #[error("circuit does not purify; feedback synthesis undefined")]
    NotPurifying,

    #[error("record-to-reference truth table is not affine over GF(2)")]
    NonAffineTruthTable,

    #[error("too many measurements for branch enumeration: {m} > {cap}")]
    TooManyMeasurements { m: usize, cap: usize },

    #[error("branch outcome forced to {forced} but measurement is deterministic with value {actual}")]
    InconsistentForcedOutcome { forced: bool, actual: bool },

    #[error("decay fit failed: {0}")]
    FitFailed(String),

    #[error("crossing analysis failed: {0}")]
    NoCrossing(String),

    #[error("collapse analysis failed: {0}")]
    CollapseFailed(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
