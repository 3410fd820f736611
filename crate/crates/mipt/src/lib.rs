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

//! Simulation and analysis of measurement-induced purification transitions
//! in all-to-all monitored Clifford circuits.
//!
//! The library provides:
//!
//! - a bit-packed stabilizer tableau engine ([`tableau`]) with subsystem
//!   entropies and conditional Pauli expectations;
//! - a dense statevector backend ([`statevector`]) used both as a brute-force
//!   oracle and as the noisy shot simulator (XX-gate crosstalk, dephasing);
//! - the monitored-circuit ensemble ([`circuit`]): Bell-pair injection, a
//!   scrambling unitary, randomly placed XX(π/4) gates with probabilistic
//!   X/Z measurements, measurement deferral onto ancillae, and synthesis of
//!   the reference-disentangling feedback circuit ([`feedback`]);
//! - ensemble execution and error mitigation ([`ensemble`]);
//! - finite-size scaling analysis ([`scaling`]): exponential decay fits,
//!   crossing location, and data collapse for the critical point and
//!   exponents;
//! - a reproducible command-line front end ([`cli`]).
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod circuit;
pub mod cli;
pub mod clifford;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod feedback;
pub mod io;
pub mod pauli;
pub mod scaling;
pub mod seed;
pub mod statevector;
pub mod tableau;

pub use error::{Error, Result};
pub use pauli::{MeasurementBasis, Pauli, PauliString};
pub use tableau::{MeasurementOutcome, Tableau};
