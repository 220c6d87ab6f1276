//! Finitely supported signed measures with exact rational weights, together
//! with the discrete points they live on.
//!
//! A sign vector s in {-1,+1}^n is packed as a (level, bit pattern) pair
//! with bit i set iff s(i) = +1; equality is structural. The canonical text
//! encoding is a string over `+`/`-` with coordinate 0 first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::numerics::Rational;

/// An element of Omega_n = {-1,+1}^n.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SignVector {
    level: u32,
    bits: u64,
}

/// Bit mask selecting the `level` low bits.
pub(crate) fn level_mask(level: u32) -> u64 {
    if level >= 64 {
        !0
    } else {
        (1u64 << level) - 1
    }
}

impl SignVector {
    /// Pack a sign vector from its level and bit pattern (bit i = 1 means
    /// coordinate i is +1). Bits above the level are ignored.
    pub fn new(level: u32, bits: u64) -> Self {
        assert!((1..=64).contains(&level), "sign vector level must be in 1..=64");
        Self {
            level,
            bits: bits & level_mask(level),
        }
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        assert!(!signs.is_empty() && signs.len() <= 64);
        let mut bits = 0u64;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                _ => panic!("signs must be +1 or -1"),
            }
        }
        Self::new(signs.len() as u32, bits)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Coordinate value s(i), either +1 or -1.
    pub fn sign(&self, i: u32) -> i64 {
        assert!(i < self.level, "coordinate {i} out of range for level {}", self.level);
        if self.bits >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Number of +1 coordinates.
    pub fn plus_count(&self) -> u32 {
        self.bits.count_ones()
    }

    /// The vector -s (all coordinates flipped).
    pub fn negated(&self) -> Self {
        Self::new(self.level, !self.bits)
    }

    /// All of Omega_n in bit-pattern order.
    pub fn all_at_level(level: u32) -> impl Iterator<Item = SignVector> {
        assert!((1..=32).contains(&level), "full enumeration limited to level <= 32");
        (0u64..1 << level).map(move |bits| SignVector::new(level, bits))
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.level {
            f.write_str(if self.bits >> i & 1 == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;

    /// Parses the `+`/`-` encoding; the typographic minus `−` is accepted.
    fn from_str(text: &str) -> Result<Self, Error> {
        let bad = || Error::ParseSignVector(text.to_string());
        let mut bits = 0u64;
        let mut len = 0u32;
        for ch in text.chars() {
            match ch {
                '+' => bits |= 1 << len,
                '-' | '\u{2212}' => {}
                _ => return Err(bad()),
            }
            len += 1;
            if len > 64 {
                return Err(bad());
            }
        }
        if len == 0 {
            return Err(bad());
        }
        Ok(SignVector::new(len, bits))
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// An element (i, n) of Sigma_n, encoded `i@n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SigmaPoint {
    index: u32,
    level: u32,
}

impl SigmaPoint {
    pub fn new(index: u32, level: u32) -> Self {
        assert!(level >= 1 && index < level, "sigma point needs index < level");
        Self { index, level }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn level(&self) -> u32 {
        self.level
    }
}

impl fmt::Display for SigmaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.index, self.level)
    }
}

impl FromStr for SigmaPoint {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        let bad = || Error::ParseSigmaPoint(text.to_string());
        let (i, n) = text.split_once('@').ok_or_else(bad)?;
        let index: u32 = i.trim().parse().map_err(|_| bad())?;
        let level: u32 = n.trim().parse().map_err(|_| bad())?;
        if level == 0 || index >= level {
            return Err(bad());
        }
        Ok(SigmaPoint { index, level })
    }
}

/// A support point (s, i) of a measure on Omega x Sigma.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProductPoint {
    pub first: SignVector,
    pub second: SigmaPoint,
}

impl ProductPoint {
    pub fn new(first: SignVector, second: SigmaPoint) -> Self {
        Self { first, second }
    }
}

impl fmt::Display for ProductPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// A finitely supported signed measure: a finite map from points to
/// nonzero exact rational weights.
///
/// Zero weights are dropped at construction, so the support is exactly the
/// key set and the total variation is the sum of absolute weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteSignedMeasure<P: Ord + Clone + fmt::Display> {
    atoms: BTreeMap<P, Rational>,
}

impl<P: Ord + Clone + fmt::Display> FiniteSignedMeasure<P> {
    pub fn zero() -> Self {
        Self { atoms: BTreeMap::new() }
    }

    /// Build a measure from (point, weight) pairs.
    ///
    /// Zero-weight pairs are dropped; a repeated point is rejected with a
    /// diagnostic naming it.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (P, Rational)>,
    {
        let mut atoms = BTreeMap::new();
        for (point, weight) in pairs {
            if weight.is_zero() {
                continue;
            }
            let label = point.to_string();
            if atoms.insert(point, weight).is_some() {
                return Err(Error::DuplicatePoint(label));
            }
        }
        Ok(Self { atoms })
    }

    /// Total variation norm: the sum of absolute weights.
    pub fn total_variation(&self) -> Rational {
        self.atoms.values().map(|w| w.abs()).sum()
    }

    /// Total mass (the measure of the whole space).
    pub fn mass(&self) -> Rational {
        self.atoms.values().sum()
    }

    /// Measure of the set described by a membership predicate.
    pub fn evaluate<F: FnMut(&P) -> bool>(&self, mut member: F) -> Rational {
        self.atoms
            .iter()
            .filter(|(p, _)| member(p))
            .map(|(_, w)| w)
            .sum()
    }

    /// Integral of a rational-valued function against the measure.
    ///
    /// Terms are summed pairwise: a running left-to-right sum against
    /// tens of thousands of distinct denominators turns quadratic in the
    /// accumulated denominator size.
    pub fn integrate<F: FnMut(&P) -> Rational>(&self, mut f: F) -> Rational {
        let mut terms: Vec<Rational> = self.atoms.iter().map(|(p, w)| w * f(p)).collect();
        if terms.is_empty() {
            return Rational::zero();
        }
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            let mut it = terms.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a + b),
                    None => next.push(a),
                }
            }
            terms = next;
        }
        terms.pop().unwrap()
    }

    pub fn support(&self) -> impl Iterator<Item = &P> {
        self.atoms.keys()
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight(&self, point: &P) -> Option<&Rational> {
        self.atoms.get(point)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &Rational)> {
        self.atoms.iter()
    }

    /// Relocate every atom along `f`, keeping weights.
    ///
    /// Two atoms landing on the same target is an integrity error: the
    /// relocation map was supposed to be injective on the support.
    pub fn map_points<Q, F>(&self, mut f: F) -> Result<FiniteSignedMeasure<Q>, Error>
    where
        Q: Ord + Clone + fmt::Display,
        F: FnMut(&P) -> Q,
    {
        let mut atoms = BTreeMap::new();
        for (point, weight) in &self.atoms {
            let target = f(point);
            let label = target.to_string();
            if atoms.insert(target, weight.clone()).is_some() {
                return Err(Error::PushforwardCollision(label));
            }
        }
        Ok(FiniteSignedMeasure { atoms })
    }
}

impl FiniteSignedMeasure<ProductPoint> {
    /// JSON encoding: a list of `{point, weight_numerator, weight_denominator}`
    /// records in support order, with the sign vector in its `+`/`-` encoding
    /// and the sigma point as `i@n`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .atoms
            .iter()
            .map(|(p, w)| {
                serde_json::json!({
                    "point": {
                        "s": p.first.to_string(),
                        "i": p.second.to_string(),
                    },
                    "weight_numerator": w.numer().to_string(),
                    "weight_denominator": w.denom().to_string(),
                })
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}
