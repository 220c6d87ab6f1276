//! Exact Bernoulli tail computations for the statistic S_m counting +1
//! coordinates among m fair signs, and the tail bound they are checked
//! against.
//!
//! P(S_m = k) = C(m,k)/2^m. The tail event is |S_m - m/2| >= eps*m/2,
//! i.e. |2k - m| >= eps*m, decided in exact rational arithmetic with the
//! non-strict inequality.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bounds::{validate_epsilon, BoundReport, BoundValue};
use crate::error::Error;
use crate::numerics::{pow2, Rational};

/// P(S_m = k) = C(m,k)/2^m, exactly; 0 when k > m.
pub fn point_probability(m: u64, k: u64) -> Rational {
    Rational::new(crate::numerics::binom(m, k), pow2(m))
}

/// A tail event: |S_m - m/2| >= eps * m/2 over m coordinates.
#[derive(Clone, Debug)]
pub struct TailQuery {
    pub m: u64,
    pub eps: Rational,
}

/// Is the class k in the tail, i.e. |2k - m| >= eps*m?
///
/// This is also exactly the membership condition of the unbalanced sets
/// Delta and Gamma on the statistic k = |{i in B : s(i) = +1}|, which is
/// what reduces the n-coordinate event to an |B|-coordinate tail.
pub fn class_in_tail(m: u64, k: u64, eps: &Rational) -> bool {
    let dev = BigInt::from((2 * k as i128 - m as i128).unsigned_abs());
    dev * eps.denom() >= eps.numer() * BigInt::from(m)
}

/// Exact tail probability, summed with incrementally updated binomials.
pub fn tail_probability(query: &TailQuery) -> Rational {
    assert!(!query.eps.is_negative(), "tail threshold must be >= 0");
    let m = query.m;
    let mut tail_count = BigInt::zero();
    let mut coeff = BigInt::one(); // C(m, 0)
    for k in 0..=m {
        if class_in_tail(m, k, &query.eps) {
            tail_count += &coeff;
        }
        if k < m {
            coeff = coeff * BigInt::from(m - k) / BigInt::from(k + 1);
        }
    }
    Rational::new(tail_count, pow2(m))
}

/// P_n of the unbalanced event Delta relative to a size-`size_b` index
/// set, reduced to a `size_b`-coordinate tail: the coordinates outside B
/// are free, so only the restriction to B matters.
#[derive(Clone, Debug)]
pub struct DeltaProbability {
    pub value: Rational,
    /// Set when size_b = 0: the event is vacuously full (|0-0| >= 0) and
    /// callers should treat the value 1 as degenerate.
    pub degenerate: bool,
}

pub fn delta_probability(n: u64, size_b: u64, eps: &Rational) -> Result<DeltaProbability, Error> {
    if size_b > n {
        return Err(Error::SizeOutOfRange {
            what: "|B|",
            size: size_b.to_string(),
            max: n.to_string(),
        });
    }
    let value = tail_probability(&TailQuery { m: size_b, eps: eps.clone() });
    Ok(DeltaProbability { value, degenerate: size_b == 0 })
}

/// Check one instance of the Bernoulli tail bound
/// P(|S_m - m/2| >= eps*m/2) <= sqrt(2)/(eps*sqrt(m)),
/// valid for eps in (0, 1/12] and m >= 48/eps.
///
/// The bound is a theorem, so `holds = false` can only mean an
/// implementation bug; callers must surface it loudly.
pub fn check_bollobas(m: u64, eps: &Rational) -> Result<BoundReport, Error> {
    validate_epsilon(eps)?;
    // m >= 48/eps, exactly: m * eps_num >= 48 * eps_den.
    if BigInt::from(m) * eps.numer() < BigInt::from(48) * eps.denom() {
        return Err(Error::HypothesisViolated(format!(
            "m >= 48/eps fails: m = {m}, eps = {eps}"
        )));
    }
    let lhs = tail_probability(&TailQuery { m, eps: eps.clone() });
    Ok(BoundReport::check(
        m,
        lhs,
        BoundValue::SqrtRatio { c: eps.clone(), m },
        "bollobas-tail",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;
    use num_traits::ToPrimitive;

    #[test]
    fn point_probability_instances() {
        assert_eq!(point_probability(2, 1), rat(1, 2));
        for m in 1..=10 {
            assert_eq!(point_probability(m, 0), Rational::new(BigInt::one(), pow2(m)));
        }
        assert!(point_probability(3, 5).is_zero());
    }

    #[test]
    fn point_probabilities_normalize() {
        for m in 0..=64u64 {
            let total: Rational = (0..=m).map(|k| point_probability(m, k)).sum();
            assert!(total.is_one(), "m = {m}");
        }
    }

    #[test]
    fn tail_examples() {
        // m=4, eps=1/2: k in {0,1,3,4} -> (1+4+4+1)/16.
        let t = tail_probability(&TailQuery { m: 4, eps: rat(1, 2) });
        assert_eq!(t, rat(5, 8));
        // eps > 1: the event is impossible.
        assert!(tail_probability(&TailQuery { m: 9, eps: rat(3, 2) }).is_zero());
        // m=2, eps=1/12: only k=1 is inside the band.
        assert_eq!(tail_probability(&TailQuery { m: 2, eps: rat(1, 12) }), rat(1, 2));
        // eps = 0: the whole space.
        assert!(tail_probability(&TailQuery { m: 7, eps: rat(0, 1) }).is_one());
    }

    #[test]
    fn tail_monotone_in_eps_and_complements_band() {
        for m in [1u64, 2, 5, 12, 33] {
            let mut prev = rat(2, 1);
            for den in 1..=16i64 {
                let eps = rat(1, 17 - den); // increasing eps
                let t = tail_probability(&TailQuery { m, eps: eps.clone() });
                assert!(t <= prev, "tail must be non-increasing in eps");
                prev = t.clone();

                // tail + open band = 1.
                let band: Rational = (0..=m)
                    .filter(|&k| !super::class_in_tail(m, k, &eps))
                    .map(|k| point_probability(m, k))
                    .sum();
                assert!(t + band == rat(1, 1));
            }
        }
    }

    #[test]
    fn delta_probability_reduces_to_tail() {
        let eps = rat(1, 12);
        let d = delta_probability(5, 5, &eps).unwrap();
        assert_eq!(d.value, tail_probability(&TailQuery { m: 5, eps: eps.clone() }));
        assert!(!d.degenerate);

        // Independent of n: only |B| enters.
        let d = delta_probability(10, 2, &eps).unwrap();
        assert_eq!(d.value, rat(1, 2));

        let d = delta_probability(9, 0, &eps).unwrap();
        assert!(d.value.is_one());
        assert!(d.degenerate);

        assert!(delta_probability(3, 4, &eps).is_err());
    }

    #[test]
    fn delta_probability_matches_exhaustive_count() {
        // For each B only through its size: count sign patterns whose
        // +1-count over B deviates enough, directly from the definition.
        for n in 1..=4u32 {
            for b_mask in 0u64..1 << n {
                let m = b_mask.count_ones() as u64;
                for eps in [rat(1, 12), rat(1, 16), rat(1, 24)] {
                    let mut count = 0u64;
                    for pattern in 0u64..1 << n {
                        let k = (pattern & b_mask).count_ones() as u64;
                        if super::class_in_tail(m, k, &eps) {
                            count += 1;
                        }
                    }
                    let expected = Rational::new(BigInt::from(count), pow2(n as u64));
                    let got = delta_probability(n as u64, m, &eps).unwrap().value;
                    assert_eq!(got, expected, "n={n} b={b_mask:b} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn bollobas_instances() {
        let eps = rat(1, 12);
        let report = check_bollobas(576, &eps).unwrap();
        assert!(report.holds);
        // Odd m exercises the half-integer band boundary.
        let report = check_bollobas(577, &eps).unwrap();
        assert!(report.holds);
        // 500 < 48*12 = 576.
        let err = check_bollobas(500, &eps).unwrap_err();
        assert!(err.to_string().contains("48/eps"));
        // eps outside the hypothesis window.
        assert!(check_bollobas(1000, &rat(1, 2)).is_err());
    }

    #[test]
    fn bollobas_tail_value_is_plausible() {
        // Sanity: the 576-coordinate tail at eps=1/12 is a small number.
        let t = tail_probability(&TailQuery { m: 576, eps: rat(1, 12) });
        let f = t.numer().to_f64().unwrap() / t.denom().to_f64().unwrap();
        assert!(f > 0.0 && f < 0.1, "tail = {f}");
    }
}
