//! Exact construction and verification of a weak*-null sequence of
//! finitely supported signed measures.
//!
//! The sequence lives on the product of the discrete unions
//! Omega = U_n {-1,+1}^n and Sigma = U_n ({0..n-1} x {n}): level n puts
//! weight s(i)/(n 2^n) on each pair (s, i). Everything the crate reports
//! about it — total variation, rectangle values, tail probabilities,
//! worst-case optima, push-forwards onto model compact spaces — is
//! computed in exact rational arithmetic; inequalities involving square
//! roots are decided by squaring, never by floating point.

pub mod bounds;
pub mod concentration;
pub mod construction;
pub mod error;
pub mod measure;
pub mod numerics;
pub mod optimizer;
pub mod subsets;
pub mod sweeps;
pub mod transfer;

pub use bounds::{BoundReport, BoundValue};
pub use construction::{build_mu, RectangleSpec};
pub use error::Error;
pub use measure::{FiniteSignedMeasure, ProductPoint, SigmaPoint, SignVector};
pub use numerics::Rational;
