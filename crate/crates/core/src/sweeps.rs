//! Bulk verification sweeps: exhaustive over all rectangles at small
//! levels, seeded-random at larger ones. All randomness is derived from
//! (seed, level, rectangle index), so every sweep is reproducible, and
//! aggregation is order-independent counting.

use rand_core::RngCore;
use rayon::prelude::*;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::construction::{dagger_bound, decompose_estimate, evaluate_rectangle};
use crate::measure::level_mask;
use crate::numerics::Rational;
use crate::subsets::{derive_stream, OmegaSubset, SigmaSubset};

fn subset_from_mask(level: u32, a_mask: u64) -> OmegaSubset {
    let mut set = OmegaSubset::empty(level);
    for pattern in 0..1u64 << level {
        if a_mask >> pattern & 1 == 1 {
            set.insert_bits(pattern);
        }
    }
    set
}

fn sigma_from_mask(level: u32, b_mask: u64) -> SigmaSubset {
    SigmaSubset::new(level, (0..level).filter(|i| b_mask >> i & 1 == 1))
}

/// Draw the sweep rectangle number `index`: B uniform over subsets of
/// Sigma_n, A uniform over all subsets of Omega_n.
pub fn seeded_rectangle(n: u32, seed: u64, index: u64) -> (OmegaSubset, SigmaSubset) {
    let mut rng = derive_stream(seed, n, index);
    let b_mask = rng.next_u64() & level_mask(n);
    let b = sigma_from_mask(n, b_mask);
    let a = OmegaSubset::random_uniform(n, &mut rng);
    (a, b)
}

/// Count counting-bound violations over ALL rectangles of level n <= 4:
/// every A among 2^(2^n) subsets against every B among 2^n subsets.
pub fn dagger_exhaustive_violations(n: u32) -> u64 {
    assert!((1..=4).contains(&n), "exhaustive sweeps stop at n = 4");
    let omega = 1u64 << n;
    let mut violations = 0u64;
    for b_mask in 0..1u64 << n {
        let m = b_mask.count_ones() as i64;
        let rowsums: Vec<i64> = (0..omega)
            .map(|p| 2 * (p & b_mask).count_ones() as i64 - m)
            .collect();
        for a_mask in 0..1u64 << omega {
            let mut sum = 0i64;
            let mut size_a = 0i64;
            let mut rest = a_mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                sum += rowsums[j];
                size_a += 1;
                rest &= rest - 1;
            }
            // |value| <= (|A|/2^n)(|B|/n) over the common denominator n 2^n.
            if sum.abs() > size_a * m {
                violations += 1;
            }
        }
    }
    violations
}

/// Count counting-bound violations over `count` seeded rectangles at
/// level n, checked through the exact rational API.
pub fn dagger_random_violations(n: u32, count: u64, seed: u64) -> u64 {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let (a, b) = seeded_rectangle(n, seed, index);
            let value = evaluate_rectangle(n, &a, &b);
            let bound = dagger_bound(n, BigInt::from(a.len()), b.size()).expect("sizes in range");
            u64::from(value.abs() > bound)
        })
        .sum()
}

/// Count decomposition-verdict failures over ALL rectangles of level
/// n <= 4 at one eps.
pub fn decompose_exhaustive_failures(n: u32, eps: &Rational) -> u64 {
    assert!((1..=4).contains(&n), "exhaustive sweeps stop at n = 4");
    let omega = 1u64 << n;
    (0..1u64 << n)
        .into_par_iter()
        .map(|b_mask| {
            let b = sigma_from_mask(n, b_mask);
            let mut failures = 0u64;
            for a_mask in 0..1u64 << omega {
                let a = subset_from_mask(n, a_mask);
                let trace = decompose_estimate(n, &a, &b, eps).expect("eps validated");
                if !(trace.holds_a && trace.holds_b && trace.holds_c && trace.holds_d) {
                    failures += 1;
                }
            }
            failures
        })
        .sum()
}

/// Count decomposition-verdict failures over `count` seeded rectangles.
pub fn decompose_random_failures(n: u32, count: u64, seed: u64, eps: &Rational) -> u64 {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let (a, b) = seeded_rectangle(n, seed, index);
            let trace = decompose_estimate(n, &a, &b, eps).expect("eps validated");
            u64::from(!(trace.holds_a && trace.holds_b && trace.holds_c && trace.holds_d))
        })
        .sum()
}
