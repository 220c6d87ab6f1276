//! Concrete subsets of Omega_n and Sigma_n and the enumeration kernels
//! behind rectangle evaluation.
//!
//! A subset of Omega_n is a bitmask over all 2^n patterns, one bit per
//! sign vector. The hot kernel sums the B-restricted coordinate sums
//! `sum_{i in B} s(i) = 2k - |B|` (k = number of +1 coordinates inside B)
//! over all members of the subset, one 64-pattern word at a time.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::measure::{level_mask, SignVector};
use crate::numerics::Rational;

/// Largest level at which Omega_n subsets may be materialized as bitmasks.
pub const MAX_SUBSET_LEVEL: u32 = 28;

/// Within a 64-pattern word, the patterns whose offset bit `b` is set.
const OFFSET_BIT: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// SplitMix64 finalizer, used to derive per-(seed, level, tag) streams.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic, platform-independent random stream for one (seed, level,
/// tag) triple. The j-th draw of the stream belongs to element index j.
pub fn derive_stream(seed: u64, level: u32, tag: u64) -> ChaCha8Rng {
    let mut z = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    z = splitmix64(z ^ (level as u64).wrapping_mul(0xE703_7ED1_A0B4_28DB));
    z = splitmix64(z ^ tag.wrapping_mul(0x8EBC_6AF0_9C88_C6E3));
    ChaCha8Rng::seed_from_u64(z)
}

/// Inclusion threshold on u64 draws for probability `p`: the element is
/// included iff `draw < floor(p * 2^64)` (`None` means always include).
fn inclusion_threshold(p: &Rational) -> Option<u64> {
    assert!(!p.numer().is_negative() && *p <= Rational::one(), "probability must be in [0,1]");
    let scaled: BigInt = (p.numer() << 64u32) / p.denom();
    scaled.to_u64().map(Some).unwrap_or(None)
}

fn included(draw: u64, threshold: Option<u64>) -> bool {
    match threshold {
        Some(t) => draw < t,
        None => true,
    }
}

/// A subset of Omega_n stored as a bitmask over all 2^n bit patterns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OmegaSubset {
    level: u32,
    words: Vec<u64>,
}

impl OmegaSubset {
    fn word_count(level: u32) -> usize {
        if level >= 6 {
            1usize << (level - 6)
        } else {
            1
        }
    }

    /// Mask of valid pattern bits in the (single) word of a small level.
    fn tail_mask(level: u32) -> u64 {
        if level >= 6 {
            !0
        } else {
            (1u64 << (1u64 << level)) - 1
        }
    }

    pub fn empty(level: u32) -> Self {
        assert!(
            (1..=MAX_SUBSET_LEVEL).contains(&level),
            "subset level {level} outside 1..={MAX_SUBSET_LEVEL}"
        );
        Self {
            level,
            words: vec![0; Self::word_count(level)],
        }
    }

    pub fn full(level: u32) -> Self {
        let mut set = Self::empty(level);
        for w in &mut set.words {
            *w = !0;
        }
        let last = set.words.len() - 1;
        set.words[last] &= Self::tail_mask(level);
        set
    }

    pub fn from_members<I: IntoIterator<Item = SignVector>>(level: u32, members: I) -> Self {
        let mut set = Self::empty(level);
        for s in members {
            assert_eq!(s.level(), level, "member level mismatch");
            set.insert_bits(s.bits());
        }
        set
    }

    /// Membership by per-element pseudorandom inclusion with probability `p`.
    pub fn random(level: u32, p: &Rational, seed: u64, tag: u64) -> Self {
        let mut set = Self::empty(level);
        let threshold = inclusion_threshold(p);
        let mut rng = derive_stream(seed, level, tag);
        let total: u64 = 1 << level;
        for pattern in 0..total {
            if included(rng.next_u64(), threshold) {
                set.insert_bits(pattern);
            }
        }
        set
    }

    /// Uniformly random subset (each pattern included with probability 1/2),
    /// drawn word-at-a-time; used by the large sampling sweeps.
    pub fn random_uniform(level: u32, rng: &mut ChaCha8Rng) -> Self {
        let mut set = Self::empty(level);
        for w in &mut set.words {
            *w = rng.next_u64();
        }
        let last = set.words.len() - 1;
        set.words[last] &= Self::tail_mask(level);
        set
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn insert(&mut self, s: SignVector) {
        assert_eq!(s.level(), self.level);
        self.insert_bits(s.bits());
    }

    pub(crate) fn insert_bits(&mut self, pattern: u64) {
        self.words[(pattern >> 6) as usize] |= 1 << (pattern & 63);
    }

    pub fn contains(&self, s: &SignVector) -> bool {
        s.level() == self.level && self.contains_bits(s.bits())
    }

    pub fn contains_bits(&self, pattern: u64) -> bool {
        self.words[(pattern >> 6) as usize] >> (pattern & 63) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        let last = out.words.len() - 1;
        out.words[last] &= Self::tail_mask(self.level);
        out
    }

    /// The set {-s : s in A}.
    pub fn negated_set(&self) -> Self {
        let mask = level_mask(self.level);
        let mut out = Self::empty(self.level);
        for pattern in self.patterns() {
            out.insert_bits(!pattern & mask);
        }
        out
    }

    fn patterns(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = (i as u64) << 6;
            BitIter(w).map(move |j| base | j)
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = SignVector> + '_ {
        let level = self.level;
        self.patterns().map(move |p| SignVector::new(level, p))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros() as u64;
        self.0 &= self.0 - 1;
        Some(j)
    }
}

/// A subset of Sigma_n, stored as sorted distinct indices below the level.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SigmaSubset {
    level: u32,
    indices: Vec<u32>,
}

impl SigmaSubset {
    pub fn new<I: IntoIterator<Item = u32>>(level: u32, indices: I) -> Self {
        assert!(level >= 1);
        let mut indices: Vec<u32> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        assert!(indices.iter().all(|&i| i < level), "sigma index out of range");
        Self { level, indices }
    }

    pub fn full(level: u32) -> Self {
        Self::new(level, 0..level)
    }

    pub fn arithmetic(level: u32, start: u32, step: u32) -> Self {
        assert!(step >= 1, "arithmetic step must be positive");
        Self::new(level, (start..level).step_by(step as usize))
    }

    pub fn random(level: u32, p: &Rational, seed: u64, tag: u64) -> Self {
        let threshold = inclusion_threshold(p);
        let mut rng = derive_stream(seed, level, tag);
        let indices = (0..level).filter(|_| included(rng.next_u64(), threshold));
        Self::new(level, indices)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn size(&self) -> u64 {
        self.indices.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn contains(&self, index: u32) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// The index set as a bit mask; only available for levels up to 64.
    pub fn mask64(&self) -> u64 {
        assert!(self.level <= 64, "mask64 needs level <= 64");
        self.indices.iter().fold(0u64, |m, &i| m | 1 << i)
    }
}

/// Plain-loop evaluation of `sum_{s in A} sum_{i in B} s(i)`; the oracle
/// the word kernel is checked against.
pub fn signed_sum_naive(a: &OmegaSubset, b: &SigmaSubset) -> i64 {
    assert_eq!(a.level(), b.level());
    let mut total = 0i64;
    for s in a.iter() {
        for &i in b.indices() {
            total += s.sign(i);
        }
    }
    total
}

/// Word-at-a-time evaluation of `sum_{s in A} sum_{i in B} s(i)`.
///
/// All 64 patterns of one word share their high bits, so the word
/// contributes `2*(count*k_hi + sum_k_lo) - |B|*count` where `sum_k_lo`
/// comes from at most six fixed offset-bit masks.
pub fn signed_sum(a: &OmegaSubset, b: &SigmaSubset) -> i64 {
    assert_eq!(a.level(), b.level());
    let m = b.size() as i64;
    let b_mask = b.mask64();
    let b_lo = b_mask & 63;
    let mut total = 0i64;
    for (w_idx, &word) in a.words().iter().enumerate() {
        if word == 0 {
            continue;
        }
        let high = (w_idx as u64) << 6;
        let k_hi = (high & b_mask).count_ones() as i64;
        let count = word.count_ones() as i64;
        let mut sum_k_lo = 0i64;
        let mut rest = b_lo;
        while rest != 0 {
            let bit = rest.trailing_zeros() as usize;
            sum_k_lo += (word & OFFSET_BIT[bit]).count_ones() as i64;
            rest &= rest - 1;
        }
        total += 2 * (count * k_hi + sum_k_lo) - m * count;
    }
    total
}

/// Signed sums and member counts of A split along a class table on
/// k = |{i in B : s(i) = +1}|: `admit[k]` selects the "in" side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitSums {
    pub sum_in: i64,
    pub sum_out: i64,
    pub count_in: u64,
    pub count_out: u64,
}

pub fn split_by_class(a: &OmegaSubset, b: &SigmaSubset, admit: &[bool]) -> SplitSums {
    assert_eq!(a.level(), b.level());
    let m = b.size() as i64;
    debug_assert_eq!(admit.len() as i64, m + 1);
    let b_mask = b.mask64();
    let mut out = SplitSums::default();
    for (w_idx, &word) in a.words().iter().enumerate() {
        if word == 0 {
            continue;
        }
        let high = (w_idx as u64) << 6;
        for j in BitIter(word) {
            let pattern = high | j;
            let k = (pattern & b_mask).count_ones() as usize;
            let row = 2 * k as i64 - m;
            if admit[k] {
                out.sum_in += row;
                out.count_in += 1;
            } else {
                out.sum_out += row;
                out.count_out += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    #[test]
    fn full_and_empty_sizes() {
        for level in 1..=9 {
            assert_eq!(OmegaSubset::full(level).len(), 1u64 << level);
            assert_eq!(OmegaSubset::empty(level).len(), 0);
            assert_eq!(SigmaSubset::full(level).size(), level as u64);
        }
    }

    #[test]
    fn kernel_matches_naive_on_dense_grid() {
        for level in 1..=8u32 {
            let mut rng = derive_stream(17, level, 99);
            for _ in 0..40 {
                let a = OmegaSubset::random_uniform(level, &mut rng);
                let b = SigmaSubset::new(level, (0..level).filter(|_| rng.next_u64() & 1 == 1));
                assert_eq!(signed_sum(&a, &b), signed_sum_naive(&a, &b));
            }
        }
    }

    #[test]
    fn split_matches_naive_classification() {
        for level in 1..=7u32 {
            let mut rng = derive_stream(29, level, 7);
            for _ in 0..25 {
                let a = OmegaSubset::random_uniform(level, &mut rng);
                let b = SigmaSubset::new(level, (0..level).filter(|_| rng.next_u64() & 1 == 1));
                let m = b.size() as usize;
                let admit: Vec<bool> = (0..=m).map(|_| rng.next_u64() & 1 == 1).collect();
                let split = split_by_class(&a, &b, &admit);

                let mut expect = SplitSums::default();
                for s in a.iter() {
                    let k = b.indices().iter().filter(|&&i| s.sign(i) == 1).count();
                    let row: i64 = b.indices().iter().map(|&i| s.sign(i)).sum();
                    if admit[k] {
                        expect.sum_in += row;
                        expect.count_in += 1;
                    } else {
                        expect.sum_out += row;
                        expect.count_out += 1;
                    }
                }
                assert_eq!(split, expect);
                assert_eq!(split.sum_in + split.sum_out, signed_sum(&a, &b));
            }
        }
    }

    #[test]
    fn random_subsets_are_reproducible_and_level_dependent() {
        let p = rat(1, 3);
        let a1 = OmegaSubset::random(8, &p, 42, 1);
        let a2 = OmegaSubset::random(8, &p, 42, 1);
        assert_eq!(a1, a2);
        let b1 = SigmaSubset::random(12, &p, 42, 2);
        let b2 = SigmaSubset::random(12, &p, 42, 2);
        assert_eq!(b1, b2);
        assert_ne!(
            OmegaSubset::random(8, &p, 43, 1).words(),
            a1.words(),
            "different seeds should give different draws"
        );
    }

    #[test]
    fn probability_extremes() {
        assert_eq!(OmegaSubset::random(6, &rat(1, 1), 5, 1), OmegaSubset::full(6));
        assert!(OmegaSubset::random(6, &rat(0, 1), 5, 1).is_empty());
    }

    #[test]
    fn negated_set_involutive() {
        let mut rng = derive_stream(3, 7, 11);
        let a = OmegaSubset::random_uniform(7, &mut rng);
        assert_eq!(a.negated_set().negated_set(), a);
        assert_eq!(a.negated_set().len(), a.len());
    }
}
