//! The measure sequence mu_n, clopen-rectangle specifications, exact
//! rectangle evaluation, and the per-rectangle inequalities.
//!
//! mu_n puts weight s(i)/(n 2^n) on every pair (s, i) with s in Omega_n
//! and i in Sigma_n. A rectangle [A] x [B] only sees A through the class
//! statistic k = |{i in B : s(i) = +1}| when A itself is defined through
//! that statistic, which collapses the 2^n sign vectors to |B|+1 classes
//! and keeps structured evaluations exact far beyond enumeration range.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{validate_epsilon, BoundValue};
use crate::concentration::{class_in_tail, delta_probability};
use crate::error::Error;
use crate::measure::{FiniteSignedMeasure, ProductPoint, SigmaPoint, SignVector};
use crate::numerics::{leq_sqrt_ratio, pow2, rat, serde_rational, Rational};
use crate::subsets::{signed_sum, split_by_class, OmegaSubset, SigmaSubset, MAX_SUBSET_LEVEL};

/// Default cap on levels at which Omega_n is enumerated element by element.
pub const DEFAULT_ENUMERATION_CAP: u32 = 24;

/// Stream tags keeping the A-side and B-side draws of one seed apart.
pub(crate) const TAG_A: u64 = 1;
pub(crate) const TAG_B: u64 = 2;

/// Build mu_n with the default enumeration cap.
pub fn build_mu(n: u32) -> Result<FiniteSignedMeasure<ProductPoint>, Error> {
    build_mu_capped(n, DEFAULT_ENUMERATION_CAP)
}

/// Build mu_n = sum over s in Omega_n, i in Sigma_n of s(i)/(n 2^n) at the
/// point (s, i). Support size is n*2^n, so n is capped.
pub fn build_mu_capped(n: u32, cap: u32) -> Result<FiniteSignedMeasure<ProductPoint>, Error> {
    assert!(n >= 1, "mu_n needs n >= 1");
    if n > cap {
        return Err(Error::EnumerationCap { n: n as u64, cap });
    }
    let denom = BigInt::from(n) * pow2(n as u64);
    let plus = Rational::new(BigInt::one(), denom);
    let minus = -&plus;
    let mut pairs = Vec::with_capacity((n as usize) << n);
    for s in SignVector::all_at_level(n) {
        for i in 0..n {
            let weight = if s.sign(i) == 1 { plus.clone() } else { minus.clone() };
            pairs.push((ProductPoint::new(s, SigmaPoint::new(i, n)), weight));
        }
    }
    FiniteSignedMeasure::from_pairs(pairs)
}

/// How the A side of a rectangle is described.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ASpec {
    /// A concrete list of sign vectors; only those of level n survive
    /// resolution at level n.
    Explicit { vectors: Vec<SignVector> },
    /// All of Omega_n.
    All,
    /// {s : sum_{i in B} s(i) > 0} — the value-maximizing A for fixed B.
    Optimal,
    /// {s : sum_{i in B} s(i) >= 0} — at least as many +1 as -1 over B.
    Majority,
    /// The unbalanced set Delta relative to B at a given eps.
    Delta {
        #[serde(with = "serde_rational")]
        eps: Rational,
    },
    /// Independent per-element inclusion with probability p, derived
    /// deterministically from (seed, n, element index).
    Random {
        #[serde(with = "serde_rational")]
        p: Rational,
        seed: u64,
    },
}

/// How the B side of a rectangle is described.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BSpec {
    Explicit { indices: Vec<u32> },
    All,
    Arith { start: u32, step: u32 },
    Random {
        #[serde(with = "serde_rational")]
        p: Rational,
        seed: u64,
    },
}

/// A finite description of a clopen rectangle [A] x [B], resolvable at
/// every level n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RectangleSpec {
    #[serde(rename = "A")]
    pub a: ASpec,
    #[serde(rename = "B")]
    pub b: BSpec,
}

fn validate_probability(p: &Rational) -> Result<(), Error> {
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::InvalidSpec(format!(
            "inclusion probability must be in [0,1], got {p}"
        )));
    }
    Ok(())
}

fn resolve_b(spec: &BSpec, n: u32) -> Result<SigmaSubset, Error> {
    Ok(match spec {
        BSpec::Explicit { indices } => {
            SigmaSubset::new(n, indices.iter().copied().filter(|&i| i < n))
        }
        BSpec::All => SigmaSubset::full(n),
        BSpec::Arith { start, step } => {
            if *step == 0 {
                return Err(Error::InvalidSpec("arithmetic step must be >= 1".into()));
            }
            SigmaSubset::arithmetic(n, *start, *step)
        }
        BSpec::Random { p, seed } => {
            validate_probability(p)?;
            SigmaSubset::random(n, p, *seed, TAG_B)
        }
    })
}

/// The membership rule of an A-side that depends on a sign vector only
/// through k = |{i in B : s(i) = +1}|.
#[derive(Clone, Debug)]
enum ClassRule {
    All,
    Optimal,
    Majority,
    Delta(Rational),
}

impl ClassRule {
    fn of(spec: &ASpec) -> Option<ClassRule> {
        match spec {
            ASpec::All => Some(ClassRule::All),
            ASpec::Optimal => Some(ClassRule::Optimal),
            ASpec::Majority => Some(ClassRule::Majority),
            ASpec::Delta { eps } => Some(ClassRule::Delta(eps.clone())),
            ASpec::Explicit { .. } | ASpec::Random { .. } => None,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if let ClassRule::Delta(eps) = self {
            validate_epsilon(eps)?;
        }
        Ok(())
    }

    fn admits(&self, m: u64, k: u64) -> bool {
        match self {
            ClassRule::All => true,
            ClassRule::Optimal => 2 * k > m,
            ClassRule::Majority => 2 * k >= m,
            ClassRule::Delta(eps) => class_in_tail(m, k, eps),
        }
    }
}

fn materialize_classes(n: u32, b: &SigmaSubset, rule: &ClassRule) -> OmegaSubset {
    let m = b.size();
    let b_mask = b.mask64();
    let admit: Vec<bool> = (0..=m).map(|k| rule.admits(m, k)).collect();
    let mut set = OmegaSubset::empty(n);
    for pattern in 0u64..1 << n {
        let k = (pattern & b_mask).count_ones() as u64;
        if admit[k as usize] {
            set.insert_bits(pattern);
        }
    }
    set
}

/// Resolve a rectangle spec at level n into concrete subsets of Omega_n
/// and Sigma_n. The B side resolves first; Delta is defined relative to it.
pub fn resolve(spec: &RectangleSpec, n: u32, cap: u32) -> Result<(OmegaSubset, SigmaSubset), Error> {
    assert!(n >= 1, "levels start at 1");
    let b = resolve_b(&spec.b, n)?;
    if n > cap.min(MAX_SUBSET_LEVEL) {
        return Err(Error::EnumerationCap { n: n as u64, cap: cap.min(MAX_SUBSET_LEVEL) });
    }
    let a = match &spec.a {
        ASpec::Explicit { vectors } => OmegaSubset::from_members(
            n,
            vectors.iter().copied().filter(|s| s.level() == n),
        ),
        ASpec::Random { p, seed } => {
            validate_probability(p)?;
            OmegaSubset::random(n, p, *seed, TAG_A)
        }
        structured => {
            let rule = ClassRule::of(structured).expect("structured A spec");
            rule.validate()?;
            materialize_classes(n, &b, &rule)
        }
    };
    Ok((a, b))
}

/// mu_n([A] x [B]) = sum_{s in A} sum_{i in B} s(i) / (n 2^n), exactly.
pub fn evaluate_rectangle(n: u32, a: &OmegaSubset, b: &SigmaSubset) -> Rational {
    assert_eq!(a.level(), n);
    assert_eq!(b.level(), n);
    let sum = signed_sum(a, b);
    Rational::new(BigInt::from(sum), BigInt::from(n) * pow2(n as u64))
}

/// Signed class sums: sum over admitted k of C(m,k)*(2k-m), and the number
/// of admitted sign-vector classes, both before the free 2^(n-m) factor.
fn class_sums(m: u64, admit: impl Fn(u64) -> bool) -> (BigInt, BigInt) {
    let mut coeff = BigInt::one();
    let mut sum = BigInt::zero();
    let mut count = BigInt::zero();
    for k in 0..=m {
        if admit(k) {
            sum += &coeff * BigInt::from(2 * k as i128 - m as i128);
            count += &coeff;
        }
        if k < m {
            coeff = coeff * BigInt::from(m - k) / BigInt::from(k + 1);
        }
    }
    (sum, count)
}

/// Evaluate mu_n([A] x [B]) for a spec, choosing the exact route:
/// structured A sides go through the class collapse (any n), explicit
/// and random A sides are materialized (n capped).
pub fn evaluate_spec(spec: &RectangleSpec, n: u32, cap: u32) -> Result<Rational, Error> {
    match ClassRule::of(&spec.a) {
        Some(rule) => {
            rule.validate()?;
            let b = resolve_b(&spec.b, n)?;
            let m = b.size();
            let (sum, _) = class_sums(m, |k| rule.admits(m, k));
            Ok(Rational::new(sum, BigInt::from(n) * pow2(m)))
        }
        None => {
            let (a, b) = resolve(spec, n, cap)?;
            Ok(evaluate_rectangle(n, &a, &b))
        }
    }
}

/// Right side of the counting bound: (|A|/2^n) * (|B|/n).
pub fn dagger_bound(n: u32, size_a: BigInt, size_b: u64) -> Result<Rational, Error> {
    if size_a.is_negative() || size_a > pow2(n as u64) {
        return Err(Error::SizeOutOfRange {
            what: "|A|",
            size: size_a.to_string(),
            max: format!("2^{n}"),
        });
    }
    if size_b > n as u64 {
        return Err(Error::SizeOutOfRange {
            what: "|B|",
            size: size_b.to_string(),
            max: n.to_string(),
        });
    }
    Ok(Rational::new(
        size_a * BigInt::from(size_b),
        pow2(n as u64) * BigInt::from(n),
    ))
}

/// The size-only bound on |mu_n([A] x [B])|: |B|/n when |B| < 2/eps^4,
/// and sqrt(2)/(eps sqrt(|B|)) + eps|B|/n otherwise.
pub fn remark_bound(n: u32, size_b: u64, eps: &Rational) -> Result<BoundValue, Error> {
    validate_epsilon(eps)?;
    if size_b > n as u64 {
        return Err(Error::SizeOutOfRange {
            what: "|B|",
            size: size_b.to_string(),
            max: n.to_string(),
        });
    }
    let num4 = eps.numer().pow(4);
    let den4 = eps.denom().pow(4);
    // size_b < 2/eps^4, exactly: size_b * num^4 < 2 * den^4.
    if BigInt::from(size_b) * num4 < BigInt::from(2) * den4 {
        Ok(BoundValue::Exact(rat(size_b as i64, n as i64)))
    } else {
        Ok(BoundValue::SqrtRatioPlus {
            c: eps.clone(),
            m: size_b,
            extra: eps * rat(size_b as i64, n as i64),
        })
    }
}

/// Proof trace of the split of [A] x [B] along the unbalanced set Delta.
#[derive(Clone, Debug)]
pub struct DecomposeTrace {
    pub n: u32,
    pub eps: Rational,
    pub size_b: u64,
    /// mu_n([A] x [B]), signed.
    pub value: Rational,
    /// |mu_n([A ∩ Delta] x [B])|.
    pub t1: Rational,
    /// |mu_n([A \ Delta] x [B])|.
    pub t2: Rational,
    /// P_n(Delta), via the tail over |B| coordinates.
    pub p_delta: Rational,
    /// B was empty; every quantity is trivially zero and the verdicts
    /// are vacuous.
    pub degenerate_b: bool,
    /// A \ Delta was empty, so the strict form of the balanced-part
    /// estimate does not apply and t2 <= eps is checked instead.
    pub boundary_c: bool,
    /// |B| >= 48/eps, so the tail bound on t1 applies.
    pub d_applicable: bool,
    /// |value| <= t1 + t2.
    pub holds_a: bool,
    /// t1 <= P_n(Delta).
    pub holds_b: bool,
    /// t2 < eps|B|/n strictly (or t2 <= eps at the boundary cases).
    pub holds_c: bool,
    /// t1 <= sqrt(2)/(eps sqrt(|B|)) whenever applicable, vacuously true
    /// otherwise.
    pub holds_d: bool,
}

fn assemble_trace(
    n: u32,
    eps: &Rational,
    size_b: u64,
    value: Rational,
    t1: Rational,
    t2: Rational,
    boundary_c: bool,
) -> Result<DecomposeTrace, Error> {
    let p_delta = delta_probability(n as u64, size_b, eps)?;
    let holds_a = value.abs() <= &t1 + &t2;
    let holds_b = t1 <= p_delta.value;
    let degenerate_b = size_b == 0;
    let holds_c = if degenerate_b || boundary_c {
        t2 <= *eps
    } else {
        t2 < eps * rat(size_b as i64, n as i64)
    };
    let d_applicable = BigInt::from(size_b) * eps.numer() >= BigInt::from(48) * eps.denom();
    let holds_d = if d_applicable {
        leq_sqrt_ratio(&t1, eps, size_b)
    } else {
        true
    };
    Ok(DecomposeTrace {
        n,
        eps: eps.clone(),
        size_b,
        value,
        t1,
        t2,
        p_delta: p_delta.value,
        degenerate_b,
        boundary_c,
        d_applicable,
        holds_a,
        holds_b,
        holds_c,
        holds_d,
    })
}

/// Split mu_n([A] x [B]) along Delta and check the chain of estimates:
/// (a) the triangle split, (b) the counting bound by P_n(Delta), (c) the
/// balanced-part estimate, (d) the tail bound on the Delta part.
pub fn decompose_estimate(
    n: u32,
    a: &OmegaSubset,
    b: &SigmaSubset,
    eps: &Rational,
) -> Result<DecomposeTrace, Error> {
    validate_epsilon(eps)?;
    assert_eq!(a.level(), n);
    assert_eq!(b.level(), n);
    let m = b.size();
    let admit: Vec<bool> = (0..=m).map(|k| class_in_tail(m, k, eps)).collect();
    let split = split_by_class(a, b, &admit);
    let denom = BigInt::from(n) * pow2(n as u64);
    let value = Rational::new(BigInt::from(split.sum_in + split.sum_out), denom.clone());
    let t1 = Rational::new(BigInt::from(split.sum_in.abs()), denom.clone());
    let t2 = Rational::new(BigInt::from(split.sum_out.abs()), denom);
    assemble_trace(n, eps, m, value, t1, t2, split.count_out == 0)
}

/// Class-collapsed variant of [`decompose_estimate`] for structured A
/// sides; exact at any level.
fn decompose_classes(
    n: u32,
    m: u64,
    rule: &ClassRule,
    eps: &Rational,
) -> Result<(DecomposeTrace, BigInt), Error> {
    let (sum_in, _) = class_sums(m, |k| rule.admits(m, k) && class_in_tail(m, k, eps));
    let (sum_out, count_out) = class_sums(m, |k| rule.admits(m, k) && !class_in_tail(m, k, eps));
    let (_, count_a) = class_sums(m, |k| rule.admits(m, k));
    let denom = BigInt::from(n) * pow2(m);
    let value = Rational::new(&sum_in + &sum_out, denom.clone());
    let t1 = Rational::new(sum_in.abs(), denom.clone());
    let t2 = Rational::new(sum_out.abs(), denom);
    let size_a = count_a << (n as u64 - m);
    let trace = assemble_trace(n, eps, m, value, t1, t2, count_out.is_zero())?;
    Ok((trace, size_a))
}

/// Everything checked about one rectangle at one level and one eps.
#[derive(Clone, Debug)]
pub struct RectangleReport {
    pub n: u32,
    pub size_a: BigInt,
    pub size_b: u64,
    pub value: Rational,
    pub dagger: Rational,
    pub dagger_holds: bool,
    pub remark: BoundValue,
    pub remark_holds: bool,
    pub trace: DecomposeTrace,
}

/// Evaluate a rectangle spec and check the counting bound, the size-only
/// bound, and the Delta decomposition, all exactly.
pub fn rectangle_report(
    spec: &RectangleSpec,
    n: u32,
    eps: &Rational,
    cap: u32,
) -> Result<RectangleReport, Error> {
    validate_epsilon(eps)?;
    let (trace, size_a) = match ClassRule::of(&spec.a) {
        Some(rule) => {
            rule.validate()?;
            let b = resolve_b(&spec.b, n)?;
            decompose_classes(n, b.size(), &rule, eps)?
        }
        None => {
            let (a, b) = resolve(spec, n, cap)?;
            let trace = decompose_estimate(n, &a, &b, eps)?;
            let size_a = BigInt::from(a.len());
            (trace, size_a)
        }
    };
    let size_b = trace.size_b;
    let value = trace.value.clone();
    let dagger = dagger_bound(n, size_a.clone(), size_b)?;
    let dagger_holds = value.abs() <= dagger;
    let remark = remark_bound(n, size_b, eps)?;
    let remark_holds = remark.dominates(&value.abs());
    Ok(RectangleReport {
        n,
        size_a,
        size_b,
        value,
        dagger,
        dagger_holds,
        remark,
        remark_holds,
        trace,
    })
}

/// Smallest N with the guarantee that every rectangle value of mu_n stays
/// below 2*eps from level N on: N = ceil(eps^-5).
///
/// For |B ∩ Sigma_n| < 2/eps^4 the counting bound gives
/// |mu_n| <= |B|/n < 2/(n eps^4) <= 2 eps once n >= eps^-5; otherwise
/// |B| >= 2/eps^4 >= 48/eps (eps <= 1/12), and the tail estimate plus the
/// balanced-part estimate give < 2 eps at every such level.
pub fn uniform_threshold(eps: &Rational) -> Result<BigInt, Error> {
    validate_epsilon(eps)?;
    let num5 = eps.numer().pow(5);
    let den5 = eps.denom().pow(5);
    // ceil(den^5 / num^5); eps > 0 so num5 > 0.
    Ok((&den5 + &num5 - BigInt::one()) / num5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn sv(text: &str) -> SignVector {
        text.parse().unwrap()
    }

    fn explicit_a(vectors: &[&str]) -> ASpec {
        ASpec::Explicit { vectors: vectors.iter().map(|v| sv(v)).collect() }
    }

    #[test]
    fn mu_1_is_the_two_atom_measure() {
        let mu = build_mu(1).unwrap();
        assert_eq!(mu.support_size(), 2);
        let plus = ProductPoint::new(sv("+"), SigmaPoint::new(0, 1));
        let minus = ProductPoint::new(sv("-"), SigmaPoint::new(0, 1));
        assert_eq!(mu.weight(&plus), Some(&rat(1, 2)));
        assert_eq!(mu.weight(&minus), Some(&rat(-1, 2)));
        assert_eq!(mu.total_variation(), rat(1, 1));
        // Measure of {first sign = +1}.
        assert_eq!(mu.evaluate(|p| p.first.sign(0) == 1), rat(1, 2));
    }

    #[test]
    fn mu_2_shape() {
        let mu = build_mu(2).unwrap();
        assert_eq!(mu.support_size(), 8);
        for (_, w) in mu.iter() {
            assert_eq!(w.abs(), rat(1, 8));
        }
        assert_eq!(mu.total_variation(), rat(1, 1));
        assert!(mu.mass().is_zero());
    }

    #[test]
    fn mu_norm_support_and_sign_witness_up_to_8() {
        for n in 1..=8u32 {
            let mu = build_mu(n).unwrap();
            assert_eq!(mu.support_size() as u64, (n as u64) << n);
            assert_eq!(mu.total_variation(), rat(1, 1));
            // f(s,i) = s(i) integrates to 1: the witness of non-weak-nullity.
            let witness = mu.integrate(|p| rat(p.first.sign(p.second.index()), 1));
            assert_eq!(witness, rat(1, 1));
        }
    }

    #[test]
    fn mu_cap_is_enforced() {
        let err = build_mu_capped(25, 24).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { n: 25, cap: 24 }));
    }

    #[test]
    fn mu_supports_at_distinct_levels_are_disjoint() {
        let mu2 = build_mu(2).unwrap();
        let mu3 = build_mu(3).unwrap();
        for p in mu2.support() {
            for q in mu3.support() {
                assert_ne!(p.first, q.first);
                assert_ne!(p.second, q.second);
            }
        }
    }

    #[test]
    fn resolve_all_all() {
        let spec = RectangleSpec { a: ASpec::All, b: BSpec::All };
        let (a, b) = resolve(&spec, 3, 24).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(b.indices(), &[0, 1, 2]);
    }

    #[test]
    fn resolve_optimal_level_one() {
        let spec = RectangleSpec {
            a: ASpec::Optimal,
            b: BSpec::Explicit { indices: vec![0] },
        };
        let (a, _) = resolve(&spec, 1, 24).unwrap();
        let members: Vec<String> = a.iter().map(|s| s.to_string()).collect();
        assert_eq!(members, vec!["+".to_string()]);
    }

    #[test]
    fn resolve_delta_level_two() {
        let spec = RectangleSpec {
            a: ASpec::Delta { eps: rat(1, 12) },
            b: BSpec::All,
        };
        let (a, _) = resolve(&spec, 2, 24).unwrap();
        let mut members: Vec<String> = a.iter().map(|s| s.to_string()).collect();
        members.sort();
        assert_eq!(members, vec!["++".to_string(), "--".to_string()]);
    }

    #[test]
    fn resolve_rejects_bad_epsilon_and_probability() {
        let spec = RectangleSpec { a: ASpec::Delta { eps: rat(1, 11) }, b: BSpec::All };
        assert!(matches!(resolve(&spec, 2, 24), Err(Error::EpsilonOutOfRange(_))));
        let spec = RectangleSpec {
            a: ASpec::Random { p: rat(3, 2), seed: 0 },
            b: BSpec::All,
        };
        assert!(matches!(resolve(&spec, 2, 24), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn resolve_filters_foreign_levels() {
        let spec = RectangleSpec {
            a: explicit_a(&["++", "+", "-+"]),
            b: BSpec::Explicit { indices: vec![0, 7] },
        };
        let (a, b) = resolve(&spec, 2, 24).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b.indices(), &[0]);
    }

    #[test]
    fn evaluate_rectangle_examples() {
        // Full A: every coordinate sums to zero over all of Omega_n.
        for n in 1..=6u32 {
            let a = OmegaSubset::full(n);
            let b = SigmaSubset::new(n, (0..n).step_by(2));
            assert!(evaluate_rectangle(n, &a, &b).is_zero());
        }
        let a = OmegaSubset::from_members(1, [sv("+")]);
        let b = SigmaSubset::full(1);
        assert_eq!(evaluate_rectangle(1, &a, &b), rat(1, 2));

        let a = OmegaSubset::from_members(2, [sv("++"), sv("+-")]);
        let b = SigmaSubset::full(2);
        assert_eq!(evaluate_rectangle(2, &a, &b), rat(1, 4));
    }

    #[test]
    fn rectangle_value_matches_measure_evaluation() {
        for n in 1..=5u32 {
            let mu = build_mu(n).unwrap();
            let spec = RectangleSpec {
                a: ASpec::Random { p: rat(1, 2), seed: 11 },
                b: BSpec::Random { p: rat(1, 2), seed: 12 },
            };
            let (a, b) = resolve(&spec, n, 24).unwrap();
            let direct = evaluate_rectangle(n, &a, &b);
            let via_mu = mu.evaluate(|p| a.contains(&p.first) && b.contains(p.second.index()));
            assert_eq!(direct, via_mu);
        }
    }

    #[test]
    fn antisymmetry_under_negating_a() {
        for n in 1..=6u32 {
            let spec = RectangleSpec {
                a: ASpec::Random { p: rat(1, 3), seed: 5 },
                b: BSpec::Random { p: rat(2, 3), seed: 6 },
            };
            let (a, b) = resolve(&spec, n, 24).unwrap();
            let lhs = evaluate_rectangle(n, &a.negated_set(), &b);
            assert_eq!(lhs, -evaluate_rectangle(n, &a, &b));
        }
    }

    #[test]
    fn class_route_agrees_with_materialized_route() {
        let eps = rat(1, 12);
        for n in 1..=9u32 {
            for a in [ASpec::All, ASpec::Optimal, ASpec::Majority, ASpec::Delta { eps: eps.clone() }] {
                for b in [
                    BSpec::All,
                    BSpec::Arith { start: 1, step: 2 },
                    BSpec::Random { p: rat(1, 2), seed: 3 },
                ] {
                    let spec = RectangleSpec { a: a.clone(), b: b.clone() };
                    let (ra, rb) = resolve(&spec, n, 24).unwrap();
                    let explicit = evaluate_rectangle(n, &ra, &rb);
                    let collapsed = evaluate_spec(&spec, n, 24).unwrap();
                    assert_eq!(explicit, collapsed, "n={n} a={a:?} b={b:?}");
                }
            }
        }
    }

    #[test]
    fn optimal_beats_every_a_exhaustively() {
        for n in 1..=3u32 {
            for b_mask in 1u64..1 << n {
                let b = SigmaSubset::new(n, (0..n).filter(|i| b_mask >> i & 1 == 1));
                let spec = RectangleSpec {
                    a: ASpec::Optimal,
                    b: BSpec::Explicit { indices: b.indices().to_vec() },
                };
                let best = evaluate_spec(&spec, n, 24).unwrap();
                for a_mask in 0u64..1 << (1 << n) {
                    let members = (0u64..1 << n).filter(|p| a_mask >> p & 1 == 1);
                    let a = OmegaSubset::from_members(
                        n,
                        members.map(|p| SignVector::new(n, p)),
                    );
                    assert!(evaluate_rectangle(n, &a, &b) <= best);
                }
            }
        }
    }

    #[test]
    fn dagger_bound_examples() {
        assert_eq!(dagger_bound(3, BigInt::from(8), 3).unwrap(), rat(1, 1));
        assert_eq!(dagger_bound(4, BigInt::from(8), 2).unwrap(), rat(1, 4));
        assert!(dagger_bound(4, BigInt::from(0), 3).unwrap().is_zero());
        assert!(dagger_bound(3, BigInt::from(9), 3).is_err());
        assert!(dagger_bound(3, BigInt::from(4), 4).is_err());
    }

    #[test]
    fn dagger_holds_exhaustively_small() {
        for n in 1..=3u32 {
            for b_mask in 0u64..1 << n {
                let b = SigmaSubset::new(n, (0..n).filter(|i| b_mask >> i & 1 == 1));
                for a_mask in 0u64..1 << (1 << n) {
                    let a = OmegaSubset::from_members(
                        n,
                        (0u64..1 << n)
                            .filter(|p| a_mask >> p & 1 == 1)
                            .map(|p| SignVector::new(n, p)),
                    );
                    let value = evaluate_rectangle(n, &a, &b);
                    let bound = dagger_bound(n, BigInt::from(a.len()), b.size()).unwrap();
                    assert!(value.abs() <= bound);
                }
            }
        }
    }

    #[test]
    fn remark_bound_branches() {
        let eps = rat(1, 12);
        // 3 < 2*12^4: the linear branch.
        assert_eq!(remark_bound(100, 3, &eps).unwrap(), BoundValue::Exact(rat(3, 100)));
        assert_eq!(remark_bound(10, 0, &eps).unwrap(), BoundValue::Exact(rat(0, 1)));
        // |B| = 2/eps^4 exactly falls in the tail branch.
        let threshold = 2 * 12u64.pow(4);
        match remark_bound(50_000, threshold, &eps).unwrap() {
            BoundValue::SqrtRatioPlus { m, .. } => assert_eq!(m, threshold),
            other => panic!("expected tail branch, got {other:?}"),
        }
        assert!(remark_bound(10, 11, &eps).is_err());
        assert!(remark_bound(10, 3, &rat(1, 2)).is_err());
    }

    #[test]
    fn remark_dominates_sampled_rectangles() {
        for n in 1..=8u32 {
            for seed in 0..20u64 {
                let spec = RectangleSpec {
                    a: ASpec::Random { p: rat(1, 2), seed },
                    b: BSpec::Random { p: rat(1, 2), seed: seed + 100 },
                };
                let (a, b) = resolve(&spec, n, 24).unwrap();
                let value = evaluate_rectangle(n, &a, &b).abs();
                for eps in [rat(1, 12), rat(1, 16), rat(1, 24)] {
                    let bound = remark_bound(n, b.size(), &eps).unwrap();
                    assert!(bound.dominates(&value));
                }
            }
        }
    }

    #[test]
    fn decompose_full_a_has_zero_value() {
        let spec = RectangleSpec { a: ASpec::All, b: BSpec::All };
        let (a, b) = resolve(&spec, 2, 24).unwrap();
        let trace = decompose_estimate(2, &a, &b, &rat(1, 12)).unwrap();
        assert!(trace.value.is_zero());
        assert!(trace.holds_a && trace.holds_b && trace.holds_c);
        assert!(!trace.d_applicable && trace.holds_d);
    }

    #[test]
    fn decompose_level_one_hand_values() {
        let a = OmegaSubset::from_members(1, [sv("+")]);
        let b = SigmaSubset::full(1);
        let trace = decompose_estimate(1, &a, &b, &rat(1, 12)).unwrap();
        // Delta_{1,eps} is all of Omega_1, so the whole value sits in t1.
        assert_eq!(trace.t1, rat(1, 2));
        assert!(trace.t2.is_zero());
        assert_eq!(trace.p_delta, rat(1, 1));
        assert!(trace.holds_b);
        // A \ Delta is empty: boundary form of the balanced estimate.
        assert!(trace.boundary_c && trace.holds_c);
    }

    #[test]
    fn decompose_empty_b_is_flagged_trivial() {
        let spec = RectangleSpec {
            a: ASpec::Random { p: rat(1, 2), seed: 9 },
            b: BSpec::Explicit { indices: vec![] },
        };
        let (a, b) = resolve(&spec, 4, 24).unwrap();
        let trace = decompose_estimate(4, &a, &b, &rat(1, 12)).unwrap();
        assert!(trace.degenerate_b);
        assert!(trace.value.is_zero() && trace.t1.is_zero() && trace.t2.is_zero());
        assert!(trace.holds_a && trace.holds_b && trace.holds_c && trace.holds_d);
    }

    #[test]
    fn decompose_class_route_matches_explicit() {
        let eps = rat(1, 16);
        for n in 2..=9u32 {
            for a in [ASpec::Optimal, ASpec::Majority, ASpec::Delta { eps: rat(1, 12) }] {
                let spec = RectangleSpec { a, b: BSpec::Arith { start: 0, step: 1 } };
                let report = rectangle_report(&spec, n, &eps, 24).unwrap();
                let (ra, rb) = resolve(&spec, n, 24).unwrap();
                let explicit = decompose_estimate(n, &ra, &rb, &eps).unwrap();
                assert_eq!(report.trace.value, explicit.value);
                assert_eq!(report.trace.t1, explicit.t1);
                assert_eq!(report.trace.t2, explicit.t2);
                assert_eq!(report.trace.boundary_c, explicit.boundary_c);
                assert_eq!(report.size_a, BigInt::from(ra.len()));
            }
        }
    }

    #[test]
    fn rectangle_report_checks_everything() {
        let spec = RectangleSpec {
            a: ASpec::Random { p: rat(1, 2), seed: 21 },
            b: BSpec::Random { p: rat(1, 2), seed: 22 },
        };
        let report = rectangle_report(&spec, 8, &rat(1, 12), 24).unwrap();
        assert!(report.dagger_holds);
        assert!(report.remark_holds);
        assert!(report.trace.holds_a && report.trace.holds_b && report.trace.holds_c);
    }

    #[test]
    fn uniform_threshold_values() {
        assert_eq!(uniform_threshold(&rat(1, 12)).unwrap(), BigInt::from(248832));
        // Monotone in 1/eps: slightly smaller eps pushes the threshold up.
        let n_below = uniform_threshold(&rat(10, 121)).unwrap();
        assert!(n_below > BigInt::from(248832));
        // Non-trivial ceiling: ceil(25^5/2^5) = ceil(9765625/32).
        assert_eq!(uniform_threshold(&rat(2, 25)).unwrap(), BigInt::from(305176));
        assert!(uniform_threshold(&rat(1, 11)).is_err());
    }

    #[test]
    fn spec_json_grammar_round_trip() {
        let text = r#"{
            "A": {"kind": "delta", "eps": "1/12"},
            "B": {"kind": "arith", "start": 0, "step": 2}
        }"#;
        let spec: RectangleSpec = serde_json::from_str(text).unwrap();
        assert!(matches!(spec.a, ASpec::Delta { .. }));
        let back = serde_json::to_string(&spec).unwrap();
        let again: RectangleSpec = serde_json::from_str(&back).unwrap();
        assert!(matches!(again.b, BSpec::Arith { start: 0, step: 2 }));

        let text = r#"{
            "A": {"kind": "explicit", "vectors": ["+-+", "++-"]},
            "B": {"kind": "random", "p": "1/3", "seed": 99}
        }"#;
        let spec: RectangleSpec = serde_json::from_str(text).unwrap();
        let (a, _) = resolve(&spec, 3, 24).unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn mu_12_norm_is_exactly_one() {
        let mu = build_mu(12).unwrap();
        assert_eq!(mu.support_size(), 49152);
        assert!(mu.total_variation().is_one());
    }

    #[test]
    fn random_resolution_is_deterministic() {
        let spec = RectangleSpec {
            a: ASpec::Random { p: rat(1, 2), seed: 7 },
            b: BSpec::Random { p: rat(1, 2), seed: 7 },
        };
        let (a1, b1) = resolve(&spec, 10, 24).unwrap();
        let (a2, b2) = resolve(&spec, 10, 24).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        // A and B streams with the same seed still differ.
        let a_bits: Vec<bool> = (0..10).map(|i| a1.contains_bits(i)).collect();
        let b_bits: Vec<bool> = (0..10).map(|i| b1.contains(i as u32)).collect();
        assert_ne!(a_bits, b_bits);
    }
}
