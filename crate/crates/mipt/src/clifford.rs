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

//! The 24 single-qubit Clifford operations.
//!
//! Each element is a fixed word over {H, S}, applied left to right. The
//! enumeration is canonical (breadth-first by word length, expanding H before
//! S) and shipped as a constant so that seeded runs reproduce identically
//! across builds. Index 0 is the identity.

use once_cell::sync::Lazy;
use rand::Rng;

use crate::pauli::{MeasurementBasis, Pauli};

/// Number of single-qubit Cliffords (modulo global phase).
pub const CLIFFORD_1Q_COUNT: usize = 24;

/// Canonical {H, S} words, applied left to right.
pub const CLIFFORD_1Q_WORDS: [&str; CLIFFORD_1Q_COUNT] = [
    "", "H", "S", "HS", "SH", "SS", "HSH", "HSS", "SHS", "SSH", "SSS", "HSHS", "HSSH", "HSSS",
    "SHSS", "SSHS", "HSHSS", "HSSHS", "SHSSH", "SHSSS", "SSHSS", "HSHSSH", "HSHSSS", "HSSHSS",
];

/// Well-known elements of the canonical enumeration.
pub const C1_IDENTITY: usize = 0;
pub const C1_H: usize = 1;
pub const C1_S: usize = 2;
pub const C1_Z: usize = 5;
pub const C1_SDG: usize = 10;
pub const C1_X: usize = 12;

/// A signed Pauli image under conjugation.
pub type SignedPauli = (Pauli, bool); // (operator, negated)

/// Conjugation action of a Clifford: the images of X and Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CliffordAction {
    pub img_x: SignedPauli,
    pub img_z: SignedPauli,
}

fn letter_image(letter: u8, p: Pauli) -> SignedPauli {
    match (letter, p) {
        (b'H', Pauli::X) => (Pauli::Z, false),
        (b'H', Pauli::Y) => (Pauli::Y, true),
        (b'H', Pauli::Z) => (Pauli::X, false),
        (b'S', Pauli::X) => (Pauli::Y, false),
        (b'S', Pauli::Y) => (Pauli::X, true),
        (b'S', Pauli::Z) => (Pauli::Z, false),
        (_, Pauli::I) => (Pauli::I, false),
        _ => unreachable!("letters are H or S"),
    }
}

fn word_image(word: &str, p: Pauli) -> SignedPauli {
    let mut cur = (p, false);
    for &letter in word.as_bytes() {
        let (np, flip) = letter_image(letter, cur.0);
        cur = (np, cur.1 ^ flip);
    }
    cur
}

pub(crate) fn word_action(word: &str) -> CliffordAction {
    CliffordAction {
        img_x: word_image(word, Pauli::X),
        img_z: word_image(word, Pauli::Z),
    }
}

/// Product of two anticommuting signed Paulis times i: `i · a · b`, which is
/// again a Hermitian signed Pauli. Used to derive the image of Y = iXZ.
fn i_times_product(a: SignedPauli, b: SignedPauli) -> SignedPauli {
    // Local products with i powers: ab = i^g · c for anticommuting a, b.
    let (c, g): (Pauli, i32) = match (a.0, b.0) {
        (Pauli::X, Pauli::Y) => (Pauli::Z, 1),
        (Pauli::Y, Pauli::X) => (Pauli::Z, -1),
        (Pauli::Y, Pauli::Z) => (Pauli::X, 1),
        (Pauli::Z, Pauli::Y) => (Pauli::X, -1),
        (Pauli::Z, Pauli::X) => (Pauli::Y, 1),
        (Pauli::X, Pauli::Z) => (Pauli::Y, -1),
        _ => unreachable!("operands must anticommute"),
    };
    // i · i^g = i^(1+g) ∈ {i^0, i^2} = {+1, −1}.
    let neg = g == 1;
    (c, a.1 ^ b.1 ^ neg)
}

impl CliffordAction {
    /// Image of an arbitrary local Pauli under the action.
    pub fn image(&self, p: Pauli) -> SignedPauli {
        match p {
            Pauli::I => (Pauli::I, false),
            Pauli::X => self.img_x,
            Pauli::Z => self.img_z,
            Pauli::Y => i_times_product(self.img_x, self.img_z),
        }
    }
}

/// Tableau update entry: for a local (x, z) bit pair, the image bits and
/// whether the generator sign flips.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LutEntry {
    pub x: bool,
    pub z: bool,
    pub flip: bool,
}

pub(crate) struct CliffordTables {
    pub actions: [CliffordAction; CLIFFORD_1Q_COUNT],
    /// Indexed by clifford, then by local input `x + 2z`.
    pub luts: [[LutEntry; 4]; CLIFFORD_1Q_COUNT],
    /// `compose[a][b]` = index of "apply a, then b".
    pub compose: [[u8; CLIFFORD_1Q_COUNT]; CLIFFORD_1Q_COUNT],
    pub inverse: [u8; CLIFFORD_1Q_COUNT],
    /// Lowest-index element mapping the basis operator to +Z.
    pub align_x: usize,
    pub align_y: usize,
}

fn action_index(actions: &[CliffordAction], a: CliffordAction) -> usize {
    actions
        .iter()
        .position(|&x| x == a)
        .expect("action is in the table")
}

pub(crate) static TABLES: Lazy<CliffordTables> = Lazy::new(|| {
    let actions: [CliffordAction; CLIFFORD_1Q_COUNT] =
        std::array::from_fn(|i| word_action(CLIFFORD_1Q_WORDS[i]));

    let luts = std::array::from_fn(|i| {
        let act = actions[i];
        std::array::from_fn(|local| {
            let p = Pauli::from_bits(local & 1 == 1, local & 2 == 2);
            let (img, neg) = act.image(p);
            let (x, z) = img.bits();
            LutEntry { x, z, flip: neg }
        })
    });

    let mut compose = [[0u8; CLIFFORD_1Q_COUNT]; CLIFFORD_1Q_COUNT];
    for (a, act_a) in actions.iter().enumerate() {
        for (b, act_b) in actions.iter().enumerate() {
            // (b ∘ a): conjugate by a first, then by b.
            let chain = |p: Pauli| {
                let (q, s1) = act_a.image(p);
                let (r, s2) = act_b.image(q);
                (r, s1 ^ s2)
            };
            let composed = CliffordAction {
                img_x: chain(Pauli::X),
                img_z: chain(Pauli::Z),
            };
            compose[a][b] = action_index(&actions, composed) as u8;
        }
    }

    let inverse = std::array::from_fn(|a| {
        (0..CLIFFORD_1Q_COUNT)
            .find(|&b| compose[a][b] as usize == C1_IDENTITY)
            .expect("group inverse exists") as u8
    });

    let lowest_align = |p: Pauli| {
        actions
            .iter()
            .position(|a| a.image(p) == (Pauli::Z, false))
            .expect("alignment exists")
    };

    CliffordTables {
        actions,
        luts,
        compose,
        inverse,
        align_x: lowest_align(Pauli::X),
        align_y: lowest_align(Pauli::Y),
    }
});

/// Conjugation action of Clifford `c`.
pub fn clifford_action(c: usize) -> CliffordAction {
    TABLES.actions[c]
}

/// Index of "apply `first`, then `second`".
pub fn compose(first: usize, second: usize) -> usize {
    TABLES.compose[first][second] as usize
}

/// Index of the inverse element.
pub fn inverse(c: usize) -> usize {
    TABLES.inverse[c] as usize
}

/// Canonical rotation taking measurement basis `b` to +Z (identity for Z,
/// H for X, HSH for Y).
pub fn align_to_z_index(b: MeasurementBasis) -> usize {
    match b {
        MeasurementBasis::Z => C1_IDENTITY,
        MeasurementBasis::X => TABLES.align_x,
        MeasurementBasis::Y => TABLES.align_y,
    }
}

/// Uniform draw over the 24-element enumeration.
pub fn sample_clifford_1q<R: Rng>(rng: &mut R) -> usize {
    rng.gen_range(0..CLIFFORD_1Q_COUNT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    /// Independent BFS regeneration of the canonical word list.
    fn bfs_words() -> Vec<String> {
        let mut seen: Vec<CliffordAction> = Vec::new();
        let mut words: Vec<String> = Vec::new();
        let mut queue: VecDeque<String> = VecDeque::new();
        seen.push(word_action(""));
        words.push(String::new());
        queue.push_back(String::new());
        while let Some(w) = queue.pop_front() {
            if words.len() == CLIFFORD_1Q_COUNT {
                break;
            }
            for ch in ['H', 'S'] {
                let mut w2 = w.clone();
                w2.push(ch);
                let a = word_action(&w2);
                if !seen.contains(&a) {
                    seen.push(a);
                    words.push(w2.clone());
                    queue.push_back(w2);
                }
            }
        }
        words
    }

    #[test]
    fn shipped_table_is_canonical() {
        let regenerated = bfs_words();
        assert_eq!(regenerated.len(), CLIFFORD_1Q_COUNT);
        for (i, w) in regenerated.iter().enumerate() {
            assert_eq!(w, CLIFFORD_1Q_WORDS[i], "word {i}");
        }
    }

    #[test]
    fn actions_are_distinct_and_identity_first() {
        for a in 0..CLIFFORD_1Q_COUNT {
            for b in (a + 1)..CLIFFORD_1Q_COUNT {
                assert_ne!(clifford_action(a), clifford_action(b));
            }
        }
        assert_eq!(
            clifford_action(C1_IDENTITY),
            CliffordAction {
                img_x: (Pauli::X, false),
                img_z: (Pauli::Z, false),
            }
        );
    }

    #[test]
    fn named_elements() {
        assert_eq!(CLIFFORD_1Q_WORDS[C1_H], "H");
        assert_eq!(CLIFFORD_1Q_WORDS[C1_S], "S");
        assert_eq!(clifford_action(C1_X).img_z, (Pauli::Z, true));
        assert_eq!(clifford_action(C1_X).img_x, (Pauli::X, false));
        assert_eq!(clifford_action(C1_Z).img_x, (Pauli::X, true));
        assert_eq!(clifford_action(C1_SDG).image(Pauli::Y), (Pauli::X, false));
    }

    #[test]
    fn group_closure_and_inverses() {
        for a in 0..CLIFFORD_1Q_COUNT {
            assert_eq!(compose(a, inverse(a)), C1_IDENTITY);
            assert_eq!(compose(inverse(a), a), C1_IDENTITY);
            assert_eq!(compose(a, C1_IDENTITY), a);
            assert_eq!(compose(C1_IDENTITY, a), a);
        }
        // Associativity spot check over the whole table.
        for a in 0..CLIFFORD_1Q_COUNT {
            for b in 0..CLIFFORD_1Q_COUNT {
                for c in [0, 1, 2, 7, 23] {
                    assert_eq!(
                        compose(compose(a, b), c),
                        compose(a, compose(b, c)),
                        "({a}·{b})·{c}"
                    );
                }
            }
        }
    }

    #[test]
    fn alignment_sends_basis_to_plus_z() {
        for (basis, p) in [
            (MeasurementBasis::X, Pauli::X),
            (MeasurementBasis::Y, Pauli::Y),
            (MeasurementBasis::Z, Pauli::Z),
        ] {
            let c = align_to_z_index(basis);
            assert_eq!(clifford_action(c).image(p), (Pauli::Z, false));
        }
        assert_eq!(align_to_z_index(MeasurementBasis::X), C1_H);
        assert_eq!(align_to_z_index(MeasurementBasis::Z), C1_IDENTITY);
    }

    #[test]
    fn y_images_are_consistent() {
        // img(Y) must equal i·img(X)·img(Z) and anticommute with both images.
        for c in 0..CLIFFORD_1Q_COUNT {
            let act = clifford_action(c);
            let (y, _) = act.image(Pauli::Y);
            assert_ne!(y, act.img_x.0);
            assert_ne!(y, act.img_z.0);
            assert_ne!(y, Pauli::I);
        }
    }

    #[test]
    fn sampling_is_uniform_and_seeded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let trials = 24 * 10_000;
        let mut counts = [0u32; CLIFFORD_1Q_COUNT];
        for _ in 0..trials {
            let c = sample_clifford_1q(&mut rng);
            assert!(c < CLIFFORD_1Q_COUNT);
            counts[c] += 1;
        }
        // 5σ binomial window around the uniform expectation.
        let p = 1.0 / 24.0;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (c, &k) in counts.iter().enumerate() {
            assert!(
                (k as f64 - mean).abs() < 5.0 * sigma,
                "index {c} count {k} outside 5σ of {mean}"
            );
        }
        // Determinism of the seeded stream.
        let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let s1: Vec<usize> = (0..100).map(|_| sample_clifford_1q(&mut r1)).collect();
        let s2: Vec<usize> = (0..100).map(|_| sample_clifford_1q(&mut r2)).collect();
        assert_eq!(s1, s2);
    }
}
