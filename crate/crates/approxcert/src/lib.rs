//! Certified computations around uniform polynomial approximation on [-1, 1]:
//! best-approximation errors, sublevel-set measures, inequality certificates
//! for polynomial spreading and comparison of level sets, level-set decay
//! scans, and construction of functions with prescribed flat spots.
//!
//! Everything numerical is done in arbitrary-precision arithmetic with
//! one-sided error accounting, so that every reported inequality is a
//! certificate rather than a sampled guess.

pub mod cheb;
pub mod target;
pub mod remez;
pub mod lemmas;
pub mod decay;
pub mod flatbuild;
pub mod sublevel;
pub mod measure;
pub mod cover;
pub mod interval;
pub mod poly;
pub mod real;

pub use interval::{ClosedInterval, IntervalSet};
pub use poly::{NormResult, Poly};
pub use real::Real;
