//! Constructive flattening machinery: the sine-arcsine series, the odd
//! composition polynomial, the sparse correction polynomial, the single
//! flattening step, the inductive multi-stage builder, and the calibration
//! sweeps for the configuration constant.

mod builder;
mod calibrate;
mod flatten;
mod rpoly;
mod series;
mod upoly;

pub use builder::{build_theorem_b, ConstructionCheck, ConstructionJson, ConstructionState, StageRecord};
pub use calibrate::{calibrate, CalibrationOptions, CalibrationReport};
pub use flatten::{flatten_step, FlattenError, FlattenOutcome};
pub use rpoly::r_poly;
pub use series::{phi_series, phi_series_by_composition, PhiSeries, SeriesError};
pub use upoly::{u_poly, u_poly_sign, verify_chebyshev_identity};
