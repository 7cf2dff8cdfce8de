//! Exact differential-algebra toolkit.
//!
//! The crate models commuting derivations `d1, .., dm` acting on exact
//! coefficient fields (rationals, rational-function fields with a user-chosen
//! derivation table, and truncated Laurent-series towers), and builds on that
//! base: multi-index bookkeeping, differential polynomials with
//! characteristic-set reduction, truncated multivariate power series, Taylor
//! and twisted-Taylor morphisms, a Groebner engine for the algebraic side,
//! arc/jet-style prolongations of affine varieties, and fundamental solutions
//! of integrable linear systems.
//!
//! All arithmetic is exact; truncated-series kinds track an explicit
//! precision and comparisons there are "to available precision".

pub mod error;
pub mod mindex;
mod mpoly;
pub mod scalars;
pub mod series;
pub mod diffpoly;
pub mod groebner;
pub mod taylor;
pub mod geometry;
pub mod pv;
pub mod parse;

pub use error::DiffError;
pub use mindex::{MultiIndex, RankedVar};
pub use diffpoly::{CharSet, DiffPoly};
pub use geometry::{AckGuard, AxiomReport};
pub use groebner::{AlgIdeal, AlgPoly, JetRing, JetVar, Limits};
pub use pv::MatrixK;
pub use scalars::{DiffFieldCtx, DiffScalar};
pub use series::TruncSeries;


