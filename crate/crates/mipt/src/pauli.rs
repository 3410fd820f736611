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

//! Bit-packed n-qubit Pauli operators with sign tracking.
//!
//! A Pauli string is stored as two bit vectors (x and z) plus a sign bit.
//! Qubit `q` carries I/X/Z/Y for bit pairs (0,0)/(1,0)/(0,1)/(1,1); the local
//! operator is the Hermitian `i^(x·z) X^x Z^z`, so Y is stored without an
//! explicit imaginary phase and stored strings are always Hermitian with
//! sign ±1.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// (x, z) bit pair of the operator.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Measurement axis. The circuit grammar draws only X and Z; Y is supported
/// throughout the algebra for reference tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementBasis {
    X,
    Y,
    Z,
}

impl MeasurementBasis {
    pub fn pauli(self) -> Pauli {
        match self {
            MeasurementBasis::X => Pauli::X,
            MeasurementBasis::Y => Pauli::Y,
            MeasurementBasis::Z => Pauli::Z,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MeasurementBasis::X => "X",
            MeasurementBasis::Y => "Y",
            MeasurementBasis::Z => "Z",
        }
    }

    pub fn from_label(s: &str) -> Option<MeasurementBasis> {
        match s {
            "X" | "x" => Some(MeasurementBasis::X),
            "Y" | "y" => Some(MeasurementBasis::Y),
            "Z" | "z" => Some(MeasurementBasis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

pub(crate) const WORD_BITS: usize = 64;

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// A signed n-qubit Pauli operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    neg: bool,
}

impl PauliString {
    /// The identity operator on `n` qubits with sign +1.
    pub fn identity(n: usize) -> PauliString {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            neg: false,
        }
    }

    /// A single-qubit operator `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> PauliString {
        assert!(q < n, "qubit {q} out of range for {n} qubits");
        let mut s = PauliString::identity(n);
        s.set(q, p);
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, q: usize) -> Pauli {
        assert!(q < self.n);
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n);
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        let (x, z) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    /// Sign of the operator: +1 or −1.
    pub fn sign(&self) -> i8 {
        if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn set_negative(&mut self, neg: bool) {
        self.neg = neg;
    }

    /// True when the operator is ±identity.
    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Number of qubits on which the operator acts non-trivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Symplectic product: true iff the two operators commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n);
        symplectic_even(&self.x, &self.z, &other.x, &other.z)
    }

    /// Hermitian product `self · other` for commuting operators.
    ///
    /// Panics if the operators anticommute (the product would carry an
    /// imaginary phase, which stored strings never do).
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        let phase = mul_phase_accumulate(&mut out.x, &mut out.z, &other.x, &other.z);
        let total = (2 * (self.neg as u32) + 2 * (other.neg as u32)).wrapping_add(phase as u32) % 4;
        assert!(
            total % 2 == 0,
            "product of anticommuting Pauli strings is not Hermitian"
        );
        out.neg = total == 2;
        out
    }

    pub(crate) fn raw_parts(&self) -> (&[u64], &[u64], bool) {
        (&self.x, &self.z, self.neg)
    }

    pub(crate) fn from_raw_parts(n: usize, x: Vec<u64>, z: Vec<u64>, neg: bool) -> PauliString {
        debug_assert_eq!(x.len(), words_for(n));
        debug_assert_eq!(z.len(), words_for(n));
        PauliString { n, x, z, neg }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.neg { '-' } else { '+' })?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}

/// Word-parallel symplectic product parity: true iff even (commuting).
pub(crate) fn symplectic_even(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let mut acc = 0u64;
    for i in 0..x1.len() {
        acc ^= (x1[i] & z2[i]) ^ (z1[i] & x2[i]);
    }
    acc.count_ones() % 2 == 0
}

/// Multiplies `(x2, z2)` into `(x1, z1)` in place and returns the power of i
/// (mod 4, as 0..=3) picked up by the product of the Pauli parts.
///
/// Per qubit, the product `W(a)·W(b)` of the Hermitian local operators equals
/// `i^g · W(a⊕b)` with g ∈ {−1, 0, +1}. The ±1 cases are collected into word
/// masks and counted with popcounts, so a row-times-row multiply costs a few
/// word operations per 64 qubits.
pub(crate) fn mul_phase_accumulate(
    x1: &mut [u64],
    z1: &mut [u64],
    x2: &[u64],
    z2: &[u64],
) -> u8 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for i in 0..x1.len() {
        let (a_x, a_z) = (x1[i], z1[i]);
        let (b_x, b_z) = (x2[i], z2[i]);
        // Left operand classes.
        let a_is_y = a_x & a_z;
        let a_is_x = a_x & !a_z;
        let a_is_z = !a_x & a_z;
        // g = +1: Y·Z-part, X·Y, Z·X patterns; g = −1: the transposes.
        let p = (a_is_y & !b_x & b_z) | (a_is_x & b_x & b_z) | (a_is_z & b_x & !b_z);
        let m = (a_is_y & b_x & !b_z) | (a_is_x & !b_x & b_z) | (a_is_z & b_x & b_z);
        plus += p.count_ones();
        minus += m.count_ones();
        x1[i] ^= b_x;
        z1[i] ^= b_z;
    }
    (((plus as i64 - minus as i64) % 4 + 4) % 4) as u8
}
