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

//! Stabilizer tableau simulation of pure stabilizer states.
//!
//! The state of `n` qubits is represented by `2n` generator rows
//! (destabilizers then stabilizers) plus one scratch row, stored in a single
//! flat buffer of bit-packed machine words. Row-times-row multiplication is
//! word-parallel, which is what makes large monitored-circuit ensembles
//! tractable.
//!
//! Conventions follow the standard CHP construction: destabilizer `i`
//! anticommutes with stabilizer `i` and commutes with every other generator.
//! Global phases are discarded throughout.

use rand::Rng;

use crate::clifford::{self, CLIFFORD_1Q_COUNT, TABLES};
use crate::error::{Error, Result};
use crate::pauli::{
    mul_phase_accumulate, symplectic_even, words_for, MeasurementBasis, Pauli, PauliString,
    WORD_BITS,
};

/// Result of a projective single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementOutcome {
    /// Measured bit: `false` for the +1 eigenstate, `true` for −1.
    pub value: bool,
    /// Whether the outcome was forced by the pre-measurement state.
    pub deterministic: bool,
}

/// Pure stabilizer state on `n` qubits.
#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    words: usize,
    /// `(2n + 1)` rows, each `[x words | z words]`.
    bits: Vec<u64>,
    /// Sign bits, one per row (set = negative).
    signs: Vec<u64>,
    /// Reusable copy of a source row for multiplications.
    temp: Vec<u64>,
    temp_neg: bool,
}

impl Tableau {
    /// The all-zeros state |0…0⟩: stabilizers +Z_i, destabilizers +X_i.
    pub fn new(n: usize) -> Result<Tableau> {
        if n == 0 {
            return Err(Error::InvalidQubitCount { min: 1, got: 0 });
        }
        let words = words_for(n);
        let stride = 2 * words;
        let mut t = Tableau {
            n,
            words,
            bits: vec![0; (2 * n + 1) * stride],
            signs: vec![0; words_for(2 * n + 1)],
            temp: vec![0; stride],
            temp_neg: false,
        };
        for q in 0..n {
            let (w, b) = (q / WORD_BITS, q % WORD_BITS);
            // Destabilizer q = X_q.
            t.bits[q * stride + w] |= 1 << b;
            // Stabilizer q = Z_q.
            t.bits[(n + q) * stride + words + w] |= 1 << b;
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn stride(&self) -> usize {
        2 * self.words
    }

    #[inline]
    fn x_bit(&self, row: usize, q: usize) -> bool {
        let off = row * self.stride() + q / WORD_BITS;
        (self.bits[off] >> (q % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn z_bit(&self, row: usize, q: usize) -> bool {
        let off = row * self.stride() + self.words + q / WORD_BITS;
        (self.bits[off] >> (q % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn sign_bit(&self, row: usize) -> bool {
        (self.signs[row / WORD_BITS] >> (row % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn set_sign_bit(&mut self, row: usize, v: bool) {
        let (w, b) = (row / WORD_BITS, row % WORD_BITS);
        self.signs[w] = (self.signs[w] & !(1 << b)) | ((v as u64) << b);
    }

    #[inline]
    fn xor_sign_bit(&mut self, row: usize, v: bool) {
        if v {
            self.signs[row / WORD_BITS] ^= 1 << (row % WORD_BITS);
        }
    }

    /// True iff generator `row` anticommutes with the basis Pauli on `q`.
    #[inline]
    fn row_anticommutes_at(&self, row: usize, q: usize, basis: MeasurementBasis) -> bool {
        match basis {
            MeasurementBasis::Z => self.x_bit(row, q),
            MeasurementBasis::X => self.z_bit(row, q),
            MeasurementBasis::Y => self.x_bit(row, q) ^ self.z_bit(row, q),
        }
    }

    fn copy_row_to_temp(&mut self, src: usize) {
        let s = self.stride();
        let off = src * s;
        self.temp.copy_from_slice(&self.bits[off..off + s]);
        self.temp_neg = self.sign_bit(src);
    }

    /// row ← row · temp, with CHP phase bookkeeping (commuting rows only).
    fn row_mul_from_temp(&mut self, row: usize) {
        let s = self.stride();
        let w = self.words;
        let off = row * s;
        let (rx, rz) = self.bits[off..off + s].split_at_mut(w);
        let (tx, tz) = self.temp.split_at(w);
        let phase = mul_phase_accumulate(rx, rz, tx, tz);
        let total =
            (2 * self.sign_bit(row) as u32 + 2 * self.temp_neg as u32 + phase as u32) % 4;
        debug_assert!(total % 2 == 0, "generator product picked up an i phase");
        self.set_sign_bit(row, total == 2);
    }

    fn row_copy(&mut self, dst: usize, src: usize) {
        let s = self.stride();
        let (d, sr) = (dst * s, src * s);
        self.bits.copy_within(sr..sr + s, d);
        let v = self.sign_bit(src);
        self.set_sign_bit(dst, v);
    }

    /// Sets `row` to the bare basis Pauli on `q` with the given sign.
    fn row_set_single(&mut self, row: usize, q: usize, basis: MeasurementBasis, neg: bool) {
        let s = self.stride();
        let off = row * s;
        self.bits[off..off + s].fill(0);
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        let (x, z) = basis.pauli().bits();
        if x {
            self.bits[off + w] |= 1 << b;
        }
        if z {
            self.bits[off + self.words + w] |= 1 << b;
        }
        self.set_sign_bit(row, neg);
    }

    fn row_clear(&mut self, row: usize) {
        let s = self.stride();
        let off = row * s;
        self.bits[off..off + s].fill(0);
        self.set_sign_bit(row, false);
    }

    /// Extracts generator `row` as a standalone Pauli string.
    fn row_to_pauli(&self, row: usize) -> PauliString {
        let s = self.stride();
        let off = row * s;
        PauliString::from_raw_parts(
            self.n,
            self.bits[off..off + self.words].to_vec(),
            self.bits[off + self.words..off + s].to_vec(),
            self.sign_bit(row),
        )
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        assert!(i < self.n);
        self.row_to_pauli(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        assert!(i < self.n);
        self.row_to_pauli(i)
    }

    // ---------------------------------------------------------------- gates

    /// Hadamard on `q`: X ↔ Z, Y → −Y.
    pub fn apply_h(&mut self, q: usize) {
        assert!(q < self.n);
        let s = self.stride();
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        let zoff = self.words;
        for row in 0..2 * self.n {
            let off = row * s + w;
            let x = (self.bits[off] >> b) & 1;
            let z = (self.bits[off + zoff] >> b) & 1;
            self.xor_sign_bit(row, x & z == 1);
            self.bits[off] ^= (x ^ z) << b;
            self.bits[off + zoff] ^= (x ^ z) << b;
        }
    }

    /// Phase gate on `q`: X → Y, Y → −X.
    pub fn apply_s(&mut self, q: usize) {
        assert!(q < self.n);
        let s = self.stride();
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        let zoff = self.words;
        for row in 0..2 * self.n {
            let off = row * s + w;
            let x = (self.bits[off] >> b) & 1;
            let z = (self.bits[off + zoff] >> b) & 1;
            self.xor_sign_bit(row, x & z == 1);
            self.bits[off + zoff] ^= x << b;
        }
    }

    /// Pauli X on `q` (flips the sign of Z- and Y-type locals).
    pub fn apply_pauli_x(&mut self, q: usize) {
        assert!(q < self.n);
        for row in 0..2 * self.n {
            let z = self.z_bit(row, q);
            self.xor_sign_bit(row, z);
        }
    }

    /// One of the 24 single-qubit Cliffords, by canonical index.
    pub fn apply_clifford_1q(&mut self, q: usize, c: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { q, n: self.n });
        }
        if c >= CLIFFORD_1Q_COUNT {
            return Err(Error::CliffordOutOfRange { c });
        }
        let lut = &TABLES.luts[c];
        let s = self.stride();
        let (w, b) = (q / WORD_BITS, q % WORD_BITS);
        let zoff = self.words;
        for row in 0..2 * self.n {
            let off = row * s + w;
            let x = (self.bits[off] >> b) & 1;
            let z = (self.bits[off + zoff] >> b) & 1;
            let e = lut[(x | (z << 1)) as usize];
            self.bits[off] = (self.bits[off] & !(1 << b)) | ((e.x as u64) << b);
            self.bits[off + zoff] = (self.bits[off + zoff] & !(1 << b)) | ((e.z as u64) << b);
            self.xor_sign_bit(row, e.flip);
        }
        Ok(())
    }

    /// CNOT with the standard sign rule.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::SameQubit { q: control });
        }
        if control >= self.n {
            return Err(Error::QubitOutOfRange {
                q: control,
                n: self.n,
            });
        }
        if target >= self.n {
            return Err(Error::QubitOutOfRange {
                q: target,
                n: self.n,
            });
        }
        let s = self.stride();
        let zoff = self.words;
        let (cw, cb) = (control / WORD_BITS, control % WORD_BITS);
        let (tw, tb) = (target / WORD_BITS, target % WORD_BITS);
        for row in 0..2 * self.n {
            let base = row * s;
            let xc = (self.bits[base + cw] >> cb) & 1;
            let zc = (self.bits[base + zoff + cw] >> cb) & 1;
            let xt = (self.bits[base + tw] >> tb) & 1;
            let zt = (self.bits[base + zoff + tw] >> tb) & 1;
            self.xor_sign_bit(row, xc & zt & (xt ^ zc ^ 1) == 1);
            self.bits[base + tw] ^= (xc as u64) << tb;
            self.bits[base + zoff + cw] ^= (zt as u64) << cb;
        }
        Ok(())
    }

    /// The maximally entangling two-qubit Clifford exp(−i(π/4)·X_a X_b).
    ///
    /// Generators commuting with X_a X_b are untouched; an anticommuting
    /// generator P maps to i·P·X_a X_b. The update matches the Clifford word
    /// (H_a H_b)·CNOT(a,b)·S_b·CNOT(a,b)·(H_a H_b) exactly.
    pub fn apply_xx_pi4(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::SameQubit { q: a });
        }
        if a >= self.n {
            return Err(Error::QubitOutOfRange { q: a, n: self.n });
        }
        if b >= self.n {
            return Err(Error::QubitOutOfRange { q: b, n: self.n });
        }
        let s = self.stride();
        let zoff = self.words;
        let (aw, ab) = (a / WORD_BITS, a % WORD_BITS);
        let (bw, bb) = (b / WORD_BITS, b % WORD_BITS);
        for row in 0..2 * self.n {
            let base = row * s;
            let xa = (self.bits[base + aw] >> ab) & 1;
            let za = (self.bits[base + zoff + aw] >> ab) & 1;
            let xb = (self.bits[base + bw] >> bb) & 1;
            let zb = (self.bits[base + zoff + bw] >> bb) & 1;
            if za ^ zb == 1 {
                // i·P·X_aX_b: the Z-type local gains the sign flip.
                self.xor_sign_bit(row, (za & !xa) | (zb & !xb) == 1);
                self.bits[base + aw] ^= 1 << ab;
                self.bits[base + bw] ^= 1 << bb;
            }
        }
        Ok(())
    }

    // --------------------------------------------------------- measurements

    /// True iff measuring `q` in `basis` has a forced outcome; the state is
    /// never modified.
    pub fn is_deterministic(&self, q: usize, basis: MeasurementBasis) -> bool {
        assert!(q < self.n);
        (self.n..2 * self.n).all(|row| !self.row_anticommutes_at(row, q, basis))
    }

    /// Projective measurement with a random outcome draw when needed.
    pub fn measure<R: Rng>(
        &mut self,
        q: usize,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> MeasurementOutcome {
        assert!(q < self.n);
        match self.find_anticommuting_stabilizer(q, basis) {
            Some(sp) => {
                let value = rng.gen::<bool>();
                self.collapse(q, basis, sp, value);
                MeasurementOutcome {
                    value,
                    deterministic: false,
                }
            }
            None => MeasurementOutcome {
                value: self.deterministic_value(q, basis),
                deterministic: true,
            },
        }
    }

    /// Measurement with a caller-chosen outcome, used for branch enumeration.
    ///
    /// Fails if the outcome is deterministic and disagrees with `forced`
    /// (that branch has probability zero).
    pub fn measure_forced(
        &mut self,
        q: usize,
        basis: MeasurementBasis,
        forced: bool,
    ) -> Result<MeasurementOutcome> {
        assert!(q < self.n);
        match self.find_anticommuting_stabilizer(q, basis) {
            Some(sp) => {
                self.collapse(q, basis, sp, forced);
                Ok(MeasurementOutcome {
                    value: forced,
                    deterministic: false,
                })
            }
            None => {
                let actual = self.deterministic_value(q, basis);
                if actual != forced {
                    return Err(Error::InconsistentForcedOutcome { forced, actual });
                }
                Ok(MeasurementOutcome {
                    value: actual,
                    deterministic: true,
                })
            }
        }
    }

    fn find_anticommuting_stabilizer(&self, q: usize, basis: MeasurementBasis) -> Option<usize> {
        (self.n..2 * self.n).find(|&row| self.row_anticommutes_at(row, q, basis))
    }

    /// CHP random-outcome update: the old stabilizer at `sp` moves to the
    /// destabilizer slot and is multiplied into every other anticommuting
    /// generator; the measured Pauli is installed as stabilizer `sp`.
    fn collapse(&mut self, q: usize, basis: MeasurementBasis, sp: usize, outcome: bool) {
        let dp = sp - self.n;
        self.copy_row_to_temp(sp);
        self.row_copy(dp, sp);
        self.row_set_single(sp, q, basis, outcome);
        for row in 0..2 * self.n {
            if row != dp && self.row_anticommutes_at(row, q, basis) {
                self.row_mul_from_temp(row);
            }
        }
    }

    /// Deterministic outcome via the scratch row: the product of stabilizer
    /// rows paired with anticommuting destabilizers equals ±(basis Pauli).
    fn deterministic_value(&mut self, q: usize, basis: MeasurementBasis) -> bool {
        let scratch = 2 * self.n;
        self.row_clear(scratch);
        for i in 0..self.n {
            if self.row_anticommutes_at(i, q, basis) {
                self.copy_row_to_temp(self.n + i);
                self.row_mul_from_temp(scratch);
            }
        }
        debug_assert!(self.row_anticommutes_at(scratch, q, basis) == false);
        self.sign_bit(scratch)
    }

    // ----------------------------------------------------------- observables

    /// Expectation value of a signed Pauli string: ±1 if ±P is in the
    /// stabilizer group, 0 otherwise. The state is not modified.
    pub fn expectation(&self, p: &PauliString) -> i8 {
        assert!(p.num_qubits() <= self.n, "operator acts on too many qubits");
        let (px_raw, pz_raw, p_neg) = p.raw_parts();
        let mut px = vec![0u64; self.words];
        let mut pz = vec![0u64; self.words];
        px[..px_raw.len()].copy_from_slice(px_raw);
        pz[..pz_raw.len()].copy_from_slice(pz_raw);

        // Commute with every stabilizer, or the expectation vanishes.
        for row in self.n..2 * self.n {
            if !self.row_commutes_words(row, &px, &pz) {
                return 0;
            }
        }

        // P = ± ∏ s_i over the subset selected by anticommuting
        // destabilizers; accumulate the product sign in local scratch.
        let mut ax = vec![0u64; self.words];
        let mut az = vec![0u64; self.words];
        let mut acc: u32 = 0;
        for i in 0..self.n {
            if !self.row_commutes_words(i, &px, &pz) {
                let row = self.n + i;
                let s = self.stride();
                let off = row * s;
                let phase = mul_phase_accumulate(
                    &mut ax,
                    &mut az,
                    &self.bits[off..off + self.words],
                    &self.bits[off + self.words..off + s],
                );
                // Left-multiplying the accumulator keeps the running product
                // Hermitian: generators in the subset pairwise commute.
                acc = (acc + 2 * self.sign_bit(row) as u32 + phase as u32) % 4;
            }
        }
        debug_assert_eq!(ax, px, "commutant element must lie in the group");
        debug_assert_eq!(az, pz, "commutant element must lie in the group");
        let prod_neg = acc == 2;
        if prod_neg == p_neg {
            1
        } else {
            -1
        }
    }

    #[inline]
    fn row_commutes_words(&self, row: usize, px: &[u64], pz: &[u64]) -> bool {
        let s = self.stride();
        let off = row * s;
        symplectic_even(
            &self.bits[off..off + self.words],
            &self.bits[off + self.words..off + s],
            px,
            pz,
        )
    }

    /// Axis along which qubit `q` is pure, if any, without the sign. This is
    /// the fast order-parameter query: one pass over the stabilizer rows
    /// decides purity in each of the three bases.
    pub fn single_qubit_purity(&self, q: usize) -> Option<MeasurementBasis> {
        assert!(q < self.n);
        let mut any_x = false;
        let mut any_z = false;
        let mut any_diff = false;
        for row in self.n..2 * self.n {
            let x = self.x_bit(row, q);
            let z = self.z_bit(row, q);
            any_x |= x;
            any_z |= z;
            any_diff |= x ^ z;
        }
        if !any_x {
            Some(MeasurementBasis::Z)
        } else if !any_z {
            Some(MeasurementBasis::X)
        } else if !any_diff {
            Some(MeasurementBasis::Y)
        } else {
            None
        }
    }

    /// Axis along which qubit `q` is pure, if any, with the eigenvalue sign.
    pub fn single_qubit_pure_axis(&self, q: usize) -> Option<(MeasurementBasis, i8)> {
        let basis = self.single_qubit_purity(q)?;
        let sign = self.expectation(&PauliString::single(self.n, q, basis.pauli()));
        debug_assert!(sign != 0);
        Some((basis, sign))
    }

    /// Entanglement entropy of the subset `a` in bits.
    ///
    /// S(A) = |A| − log2 |G_A| with G_A the stabilizer subgroup supported in
    /// A; computed as |A| + rank(restriction to the complement) − n by GF(2)
    /// elimination. Single-qubit subsets take a linear-time shortcut.
    pub fn subsystem_entropy(&self, a: &[usize]) -> Result<u32> {
        if a.is_empty() {
            return Err(Error::EmptySubset);
        }
        for &q in a {
            assert!(q < self.n, "subsystem qubit {q} out of range");
        }
        let mut subset = a.to_vec();
        subset.sort_unstable();
        subset.dedup();

        if subset.len() == 1 {
            return Ok(match self.single_qubit_pure_axis(subset[0]) {
                Some(_) => 0,
                None => 1,
            });
        }

        let mut in_a = vec![false; self.n];
        for &q in &subset {
            in_a[q] = true;
        }
        let complement: Vec<usize> = (0..self.n).filter(|&q| !in_a[q]).collect();
        let cols = 2 * complement.len();
        let row_words = words_for(cols.max(1));
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(self.n);
        for r in self.n..2 * self.n {
            let mut packed = vec![0u64; row_words];
            for (j, &q) in complement.iter().enumerate() {
                if self.x_bit(r, q) {
                    packed[(2 * j) / WORD_BITS] |= 1 << ((2 * j) % WORD_BITS);
                }
                if self.z_bit(r, q) {
                    packed[(2 * j + 1) / WORD_BITS] |= 1 << ((2 * j + 1) % WORD_BITS);
                }
            }
            rows.push(packed);
        }
        let rank = gf2_rank(&mut rows, cols);
        Ok((subset.len() + rank - self.n) as u32)
    }

    // ---------------------------------------------------------------- audit

    /// Checks the defining invariants of the generator set: commutation
    /// structure and full symplectic rank.
    pub fn verify_invariants(&self) -> Result<()> {
        let n = self.n;
        let pair = |r1: usize, r2: usize| -> bool {
            let s = self.stride();
            let (o1, o2) = (r1 * s, r2 * s);
            symplectic_even(
                &self.bits[o1..o1 + self.words],
                &self.bits[o1 + self.words..o1 + s],
                &self.bits[o2..o2 + self.words],
                &self.bits[o2 + self.words..o2 + s],
            )
        };
        for i in 0..n {
            for j in i..n {
                if !pair(n + i, n + j) {
                    return Err(Error::InvariantViolated(format!(
                        "stabilizers {i} and {j} anticommute"
                    )));
                }
                if !pair(i, j) {
                    return Err(Error::InvariantViolated(format!(
                        "destabilizers {i} and {j} anticommute"
                    )));
                }
            }
            for j in 0..n {
                let expect_commute = i != j;
                if pair(i, n + j) != expect_commute {
                    return Err(Error::InvariantViolated(format!(
                        "destabilizer {i} vs stabilizer {j} has wrong commutator"
                    )));
                }
            }
        }
        // Full GF(2) rank of the 2n × 2n bit matrix.
        let cols = 2 * n;
        let row_words = words_for(cols);
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(2 * n);
        for r in 0..2 * n {
            let mut packed = vec![0u64; row_words];
            for q in 0..n {
                if self.x_bit(r, q) {
                    packed[q / WORD_BITS] |= 1 << (q % WORD_BITS);
                }
                if self.z_bit(r, q) {
                    packed[(n + q) / WORD_BITS] |= 1 << ((n + q) % WORD_BITS);
                }
            }
            rows.push(packed);
        }
        if gf2_rank(&mut rows, cols) != 2 * n {
            return Err(Error::InvariantViolated(
                "generators do not have full symplectic rank".into(),
            ));
        }
        Ok(())
    }
}

impl PartialEq for Tableau {
    /// Logical-state equality: generator bits and signs, scratch excluded.
    fn eq(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let s = self.stride();
        if self.bits[..2 * self.n * s] != other.bits[..2 * self.n * s] {
            return false;
        }
        (0..2 * self.n).all(|r| self.sign_bit(r) == other.sign_bit(r))
    }
}

impl Eq for Tableau {}

/// Rank of a GF(2) bit matrix; destroys `rows`.
fn gf2_rank(rows: &mut [Vec<u64>], cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let (w, b) = (col / WORD_BITS, col % WORD_BITS);
        let Some(pivot) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && (row[w] >> b) & 1 == 1 {
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst ^= src;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Uniform draw over the canonical single-qubit Clifford enumeration.
pub fn sample_clifford_1q<R: Rng>(rng: &mut R) -> usize {
    clifford::sample_clifford_1q(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{C1_H, C1_IDENTITY, C1_S};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> Tableau {
        let mut t = Tableau::new(2).unwrap();
        t.apply_h(0);
        t.apply_cnot(0, 1).unwrap();
        t
    }

    fn ghz3() -> Tableau {
        let mut t = Tableau::new(3).unwrap();
        t.apply_h(0);
        t.apply_cnot(0, 1).unwrap();
        t.apply_cnot(1, 2).unwrap();
        t
    }

    #[test]
    fn new_tableau_is_all_zeros() {
        let t = Tableau::new(1).unwrap();
        assert_eq!(t.stabilizer(0).to_string(), "+Z");
        let t3 = Tableau::new(3).unwrap();
        assert_eq!(t3.stabilizer(0).to_string(), "+ZII");
        assert_eq!(t3.stabilizer(1).to_string(), "+IZI");
        assert_eq!(t3.stabilizer(2).to_string(), "+IIZ");
        let t2 = Tableau::new(2).unwrap();
        assert_eq!(
            t2.expectation(&PauliString::single(2, 0, Pauli::Z)),
            1
        );
        assert!(matches!(
            Tableau::new(0),
            Err(Error::InvalidQubitCount { .. })
        ));
    }

    #[test]
    fn hadamard_and_phase_conjugation() {
        let mut t = Tableau::new(1).unwrap();
        t.apply_clifford_1q(0, C1_H).unwrap();
        assert_eq!(t.stabilizer(0).to_string(), "+X");
        t.apply_clifford_1q(0, C1_S).unwrap();
        assert_eq!(t.stabilizer(0).to_string(), "+Y");
        t.verify_invariants().unwrap();
    }

    #[test]
    fn identity_clifford_is_inert() {
        let mut t = bell();
        let before = t.clone();
        t.apply_clifford_1q(0, C1_IDENTITY).unwrap();
        t.apply_clifford_1q(1, C1_IDENTITY).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn clifford_index_errors() {
        let mut t = Tableau::new(2).unwrap();
        assert!(t.apply_clifford_1q(2, 0).is_err());
        assert!(t.apply_clifford_1q(0, 24).is_err());
    }

    #[test]
    fn cnot_builds_bell_pair() {
        let t = bell();
        assert_eq!(t.stabilizer(0).to_string(), "+XX");
        assert_eq!(t.stabilizer(1).to_string(), "+ZZ");
        t.verify_invariants().unwrap();

        let mut xx = PauliString::identity(2);
        xx.set(0, Pauli::X);
        xx.set(1, Pauli::X);
        assert_eq!(t.expectation(&xx), 1);
        assert_eq!(t.expectation(&PauliString::single(2, 0, Pauli::Z)), 0);
    }

    #[test]
    fn cnot_involution_and_errors() {
        let mut t = ghz3();
        let before = t.clone();
        t.apply_cnot(1, 2).unwrap();
        t.apply_cnot(1, 2).unwrap();
        assert_eq!(t, before);
        assert!(matches!(t.apply_cnot(1, 1), Err(Error::SameQubit { .. })));
    }

    #[test]
    fn cnot_spreads_x() {
        let mut t = Tableau::new(2).unwrap();
        t.apply_h(0);
        assert_eq!(t.stabilizer(0).to_string(), "+XI");
        t.apply_cnot(0, 1).unwrap();
        assert_eq!(t.stabilizer(0).to_string(), "+XX");
    }

    #[test]
    fn xx_pi4_entangles_and_word_matches() {
        let mut t = Tableau::new(2).unwrap();
        t.apply_xx_pi4(0, 1).unwrap();
        assert_eq!(t.subsystem_entropy(&[0]).unwrap(), 1);
        t.verify_invariants().unwrap();

        // +XX stays a stabilizer of any state that has it.
        let mut b = bell();
        let mut xx = PauliString::identity(2);
        xx.set(0, Pauli::X);
        xx.set(1, Pauli::X);
        b.apply_xx_pi4(0, 1).unwrap();
        assert_eq!(b.expectation(&xx), 1);

        // Twice = XX(π/2): |00⟩ goes back to a product state.
        let mut t2 = Tableau::new(2).unwrap();
        t2.apply_xx_pi4(0, 1).unwrap();
        t2.apply_xx_pi4(0, 1).unwrap();
        assert_eq!(t2.subsystem_entropy(&[0]).unwrap(), 0);
        assert_eq!(t2.expectation(&PauliString::single(2, 0, Pauli::Z)), -1);

        assert!(matches!(
            t2.apply_xx_pi4(1, 1),
            Err(Error::SameQubit { .. })
        ));
    }

    /// The direct XX(π/4) update must agree with its defining Clifford word
    /// on random states, bit for bit.
    #[test]
    fn xx_pi4_equals_clifford_word() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = 5;
            let mut t = random_state(n, &mut rng);
            let a = rng.gen_range(0..n);
            let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
            let mut via_word = t.clone();
            t.apply_xx_pi4(a, b).unwrap();
            via_word.apply_h(a);
            via_word.apply_h(b);
            via_word.apply_cnot(a, b).unwrap();
            via_word.apply_s(b);
            via_word.apply_cnot(a, b).unwrap();
            via_word.apply_h(a);
            via_word.apply_h(b);
            assert_eq!(t, via_word);
        }
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Tableau {
        let mut t = Tableau::new(n).unwrap();
        for _ in 0..40 {
            match rng.gen_range(0..3) {
                0 => {
                    let q = rng.gen_range(0..n);
                    let c = sample_clifford_1q(rng);
                    t.apply_clifford_1q(q, c).unwrap();
                }
                1 => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    t.apply_cnot(a, b).unwrap();
                }
                _ => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    t.apply_xx_pi4(a, b).unwrap();
                }
            }
        }
        t
    }

    #[test]
    fn determinism_checks() {
        let t = Tableau::new(1).unwrap();
        assert!(t.is_deterministic(0, MeasurementBasis::Z));
        assert!(!t.is_deterministic(0, MeasurementBasis::X));
        let b = bell();
        assert!(!b.is_deterministic(0, MeasurementBasis::Z));
    }

    #[test]
    fn deterministic_measurement_leaves_state() {
        let mut t = Tableau::new(1).unwrap();
        let before = t.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = t.measure(0, MeasurementBasis::Z, &mut rng);
        assert!(!out.value);
        assert!(out.deterministic);
        assert_eq!(t, before);
    }

    #[test]
    fn born_rule_on_plus_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 10_000;
        let mut ones = 0u32;
        for _ in 0..trials {
            let mut t = Tableau::new(1).unwrap();
            t.apply_h(0);
            let out = t.measure(0, MeasurementBasis::Z, &mut rng);
            assert!(!out.deterministic);
            ones += out.value as u32;
        }
        let mean = trials as f64 * 0.5;
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones as f64 - mean).abs() < 5.0 * sigma);
    }

    #[test]
    fn bell_measurements_correlate() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let mut t = bell();
            let a = t.measure(0, MeasurementBasis::Z, &mut rng);
            let b = t.measure(1, MeasurementBasis::Z, &mut rng);
            assert!(!a.deterministic);
            assert!(b.deterministic);
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn measurement_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..20 {
            let mut state_rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = random_state(4, &mut state_rng);
            for basis in [MeasurementBasis::X, MeasurementBasis::Y, MeasurementBasis::Z] {
                let q = rng.gen_range(0..4);
                let first = t.measure(q, basis, &mut rng);
                let second = t.measure(q, basis, &mut rng);
                assert!(second.deterministic);
                assert_eq!(first.value, second.value);
            }
        }
    }

    #[test]
    fn forced_measurement_contract() {
        let mut t = Tableau::new(1).unwrap();
        // |0⟩ measured in Z cannot be forced to 1.
        assert!(t.measure_forced(0, MeasurementBasis::Z, true).is_err());
        t.apply_h(0);
        let out = t.measure_forced(0, MeasurementBasis::Z, true).unwrap();
        assert!(out.value && !out.deterministic);
        assert_eq!(t.expectation(&PauliString::single(1, 0, Pauli::Z)), -1);
    }

    #[test]
    fn expectation_examples() {
        let t = Tableau::new(1).unwrap();
        assert_eq!(t.expectation(&PauliString::single(1, 0, Pauli::Z)), 1);
        assert_eq!(t.expectation(&PauliString::single(1, 0, Pauli::X)), 0);
        let b = bell();
        let mut zz = PauliString::identity(2);
        zz.set(0, Pauli::Z);
        zz.set(1, Pauli::Z);
        assert_eq!(b.expectation(&zz), 1);
        let mut yy = PauliString::identity(2);
        yy.set(0, Pauli::Y);
        yy.set(1, Pauli::Y);
        // (XX)(ZZ) = -YY, so ⟨YY⟩ = -1 on the Bell pair.
        assert_eq!(b.expectation(&yy), -1);
    }

    #[test]
    fn subsystem_entropy_examples() {
        let t = Tableau::new(3).unwrap();
        assert_eq!(t.subsystem_entropy(&[1]).unwrap(), 0);
        let b = bell();
        assert_eq!(b.subsystem_entropy(&[0]).unwrap(), 1);
        assert_eq!(b.subsystem_entropy(&[1]).unwrap(), 1);
        assert_eq!(b.subsystem_entropy(&[0, 1]).unwrap(), 0);
        let g = ghz3();
        assert_eq!(g.subsystem_entropy(&[0, 1]).unwrap(), 1);
        assert_eq!(g.subsystem_entropy(&[2]).unwrap(), 1);
        assert!(matches!(
            g.subsystem_entropy(&[]),
            Err(Error::EmptySubset)
        ));
    }

    /// The global state is pure, so S(A) = S(complement). The single-qubit
    /// side takes the linear shortcut while the complement runs the full
    /// GF(2) elimination, cross-checking the two paths.
    #[test]
    fn entropy_fast_path_matches_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let n = 6;
            let t = random_state(n, &mut rng);
            for q in 0..n {
                let fast = t.subsystem_entropy(&[q]).unwrap();
                let others: Vec<usize> = (0..n).filter(|&x| x != q).collect();
                let general = t.subsystem_entropy(&others).unwrap();
                assert_eq!(fast, general, "qubit {q}");
            }
        }
    }

    #[test]
    fn invariants_hold_through_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let n = 6;
        let mut t = Tableau::new(n).unwrap();
        for step in 0..300 {
            match rng.gen_range(0..4) {
                0 => {
                    let q = rng.gen_range(0..n);
                    t.apply_clifford_1q(q, sample_clifford_1q(&mut rng)).unwrap();
                }
                1 => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    t.apply_cnot(a, b).unwrap();
                }
                2 => {
                    let a = rng.gen_range(0..n);
                    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                    t.apply_xx_pi4(a, b).unwrap();
                }
                _ => {
                    let q = rng.gen_range(0..n);
                    let basis = match rng.gen_range(0..3) {
                        0 => MeasurementBasis::X,
                        1 => MeasurementBasis::Y,
                        _ => MeasurementBasis::Z,
                    };
                    t.measure(q, basis, &mut rng);
                }
            }
            t.verify_invariants()
                .unwrap_or_else(|e| panic!("step {step}: {e}"));
            // Noiseless single-qubit entropies are exactly 0 or 1 bit.
            for q in 0..n {
                assert!(t.subsystem_entropy(&[q]).unwrap() <= 1);
            }
        }
    }

    #[test]
    fn gates_invert_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 4;
        let t0 = random_state(n, &mut rng);
        for c in 0..CLIFFORD_1Q_COUNT {
            let mut t = t0.clone();
            t.apply_clifford_1q(1, c).unwrap();
            t.apply_clifford_1q(1, crate::clifford::inverse(c)).unwrap();
            assert_eq!(t, t0, "clifford {c}");
        }
        let mut t = t0.clone();
        t.apply_cnot(0, 2).unwrap();
        t.apply_cnot(0, 2).unwrap();
        assert_eq!(t, t0);
        // XX(π/4) has order four in the projective Clifford group.
        let mut t = t0.clone();
        for _ in 0..4 {
            t.apply_xx_pi4(1, 3).unwrap();
        }
        assert_eq!(t, t0);
    }
}
