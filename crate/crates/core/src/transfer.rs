//! Canonical enumerations of Omega and Sigma, model compact spaces with
//! enumerated countable subsets, and the push-forward of the measure
//! sequence onto products of those models.
//!
//! Omega is enumerated block by block (levels ascending), within a block
//! lexicographically with -1 before +1 and coordinate 0 most significant;
//! Sigma block by block with indices ascending. Block n of Omega starts at
//! 2^n - 2, block n of Sigma at n(n-1)/2.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::construction::build_mu_capped;
use crate::error::Error;
use crate::measure::{FiniteSignedMeasure, ProductPoint, SigmaPoint, SignVector};
use crate::numerics::Rational;

/// Position of a sign vector in the block-lexicographic enumeration.
pub fn omega_index(s: &SignVector) -> u64 {
    let level = s.level();
    assert!(level <= 63, "omega enumeration indexes to u64, level <= 63");
    let block_start = (1u64 << level) - 2;
    let mut rank = 0u64;
    for i in 0..level {
        rank = rank << 1 | (s.bits() >> i & 1);
    }
    block_start + rank
}

/// Inverse of [`omega_index`].
pub fn omega_point(j: u64) -> SignVector {
    let t = j as u128 + 2; // block n covers [2^n - 2, 2^(n+1) - 2)
    let level = (127 - t.leading_zeros()) as u32;
    let rank = (t - (1u128 << level)) as u64;
    let mut bits = 0u64;
    for i in 0..level {
        if rank >> (level - 1 - i) & 1 == 1 {
            bits |= 1 << i;
        }
    }
    SignVector::new(level, bits)
}

fn triangular(level: u64) -> u128 {
    level as u128 * (level as u128 - 1) / 2
}

/// Position of a sigma point in the block enumeration.
pub fn sigma_index(p: &SigmaPoint) -> u64 {
    (triangular(p.level() as u64) + p.index() as u128) as u64
}

/// Inverse of [`sigma_index`].
pub fn sigma_point(j: u64) -> SigmaPoint {
    let mut level = ((1.0 + (1.0 + 8.0 * j as f64).sqrt()) / 2.0) as u64;
    level = level.max(1);
    while triangular(level) > j as u128 {
        level -= 1;
    }
    while triangular(level + 1) <= j as u128 {
        level += 1;
    }
    let index = (j as u128 - triangular(level)) as u64;
    assert!(level <= u32::MAX as u64);
    SigmaPoint::new(index as u32, level as u32)
}

/// A point of a model product space; coordinates are exact rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ModelPair {
    pub x: Rational,
    pub y: Rational,
}

impl fmt::Display for ModelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Compact model spaces shipping an enumerated countable subset d(k).
///
/// Every finite prefix of an enumeration is a discrete set; for the two
/// harmonic models the full image {1/(k+1)} accumulates only at 0, which
/// is outside the image, while the dyadic Cantor image accumulates at its
/// own points (d stays injective, which is what push-forward needs).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelSpace {
    /// omega+1 realized as {0} together with {1/(k+1) : k >= 0}.
    OmegaPlusOne,
    /// The unit interval, carrying the same sequence d(k) = 1/(k+1).
    UnitInterval,
    /// The Cantor middle-thirds set; d(k) is the k-th finite 0-1 word
    /// (trailing zeros normalized away) mapped to sum 2 b_j / 3^(j+1).
    CantorDyadic,
}

pub const MODEL_NAMES: &str = "omega-plus-one, unit-interval, cantor-dyadic";

impl ModelSpace {
    pub const ALL: [ModelSpace; 3] =
        [ModelSpace::OmegaPlusOne, ModelSpace::UnitInterval, ModelSpace::CantorDyadic];

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpace::OmegaPlusOne => "omega-plus-one",
            ModelSpace::UnitInterval => "unit-interval",
            ModelSpace::CantorDyadic => "cantor-dyadic",
        }
    }

    /// The k-th enumerated point.
    pub fn point(&self, k: u64) -> Rational {
        match self {
            ModelSpace::OmegaPlusOne | ModelSpace::UnitInterval => {
                Rational::new(BigInt::one(), BigInt::from(k + 1))
            }
            ModelSpace::CantorDyadic => cantor_point(k),
        }
    }
}

impl FromStr for ModelSpace {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self, Error> {
        ModelSpace::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string(), MODEL_NAMES))
    }
}

/// k-th point of the dyadic Cantor enumeration: k = 0 is the empty word
/// (value 0); k >= 1 is its binary expansion read LSB-first with the
/// leading 1 kept, a bijection onto the words ending in 1. The word
/// b_0..b_r maps to sum 2 b_j / 3^(j+1).
fn cantor_point(k: u64) -> Rational {
    if k == 0 {
        return Rational::zero();
    }
    let len = 64 - k.leading_zeros() as u64;
    let mut num = BigInt::zero();
    let mut power = BigInt::from(3).pow(len as u32 - 1); // 3^(len-1-j) at j = 0
    for j in 0..len {
        if k >> j & 1 == 1 {
            num += BigInt::from(2) * &power;
        }
        power /= 3;
    }
    Rational::new(num, BigInt::from(3).pow(len as u32))
}

/// Named continuous test functions on a product of two models.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TestFunction {
    Const1,
    ProjX,
    ProjY,
    ProductXY,
    PolySq,
    MinXY,
}

pub const FUNCTION_NAMES: &str = "const1, proj_x, proj_y, product_xy, poly_sq, min_xy";

impl TestFunction {
    pub const ALL: [TestFunction; 6] = [
        TestFunction::Const1,
        TestFunction::ProjX,
        TestFunction::ProjY,
        TestFunction::ProductXY,
        TestFunction::PolySq,
        TestFunction::MinXY,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Const1 => "const1",
            TestFunction::ProjX => "proj_x",
            TestFunction::ProjY => "proj_y",
            TestFunction::ProductXY => "product_xy",
            TestFunction::PolySq => "poly_sq",
            TestFunction::MinXY => "min_xy",
        }
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        match self {
            TestFunction::Const1 => Rational::one(),
            TestFunction::ProjX => x.clone(),
            TestFunction::ProjY => y.clone(),
            TestFunction::ProductXY => x * y,
            TestFunction::PolySq => {
                let s = x + y;
                &s * &s
            }
            TestFunction::MinXY => x.min(y).clone(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self, Error> {
        TestFunction::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFunction(name.to_string(), FUNCTION_NAMES))
    }
}

/// Push a measure on Omega x Sigma forward along the model enumerations:
/// the atom at (s, i) moves to (d_K(omega_index(s)), d_L(sigma_index(i)))
/// keeping its weight. Injectivity of the relocation is checked; a
/// collision is an integrity error.
pub fn pushforward(
    nu: &FiniteSignedMeasure<ProductPoint>,
    k_model: ModelSpace,
    l_model: ModelSpace,
) -> Result<FiniteSignedMeasure<ModelPair>, Error> {
    nu.map_points(|p| ModelPair {
        x: k_model.point(omega_index(&p.first)),
        y: l_model.point(sigma_index(&p.second)),
    })
}

/// One row of a convergence table: the exact integral of a test function
/// against the pushed-forward measure at level n.
#[derive(Clone, Debug)]
pub struct DemoRow {
    pub n: u32,
    pub value: Rational,
}

/// Tabulate integral f d rho_n for n = 1..=n_max.
pub fn convergence_demo(
    k_model: ModelSpace,
    l_model: ModelSpace,
    f: TestFunction,
    n_max: u32,
    cap: u32,
) -> Result<Vec<DemoRow>, Error> {
    (1..=n_max)
        .map(|n| {
            let mu = build_mu_capped(n, cap)?;
            let rho = pushforward(&mu, k_model, l_model)?;
            let value = rho.integrate(|pt| f.eval(&pt.x, &pt.y));
            Ok(DemoRow { n, value })
        })
        .collect()
}
