//! Level sums, tail bounds and certificates for upper bounds on the
//! Hausdorff dimension of the limit set, plus floating-point estimators used
//! as corroboration.

mod certificate;
mod estimators;
mod poincare;
mod sums;

pub use certificate::{certify_dimension_upper, CertifyConfig, Certificate, Check, Verdict, WindowSpec};
pub use estimators::{
    bisect_level_sum, box_count, hausdorff_content, level_dimension_bisect, limit_sample, BisectResult, BoxCount,
    DEFAULT_BISECT_TOL,
};
pub use poincare::{poincare_partial, OrbitBall, OrbitPoint, PoincareSeries};
pub use sums::{
    center_control, level_sum, min_tail_start, standard_radius_pow, pow2_rational, radii_sum, radii_tail_bound,
    with_jobs, AlphaSumTable, CenterControl, RadiiSum, RadiiTail,
};

use crate::hyperbolic::GeometryError;
use crate::schottky::ScheduleError;

#[derive(Debug, thiserror::Error)]
pub enum DimensionError {
    #[error("{0}")]
    Alpha(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("slope undefined: {0}")]
    Slope(String),
    #[error("malformed certificate: {0}")]
    Certificate(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
