//! Stability analysis for non-conservative linear systems.
//!
//! The crate classifies real quartics, maps them onto the Whitney umbrella
//! and uses both to locate stability boundaries of two-degree-of-freedom
//! circulatory and gyroscopic systems, parametrically excited rotors,
//! Galerkin models of Beck's column and a two-layer baroclinic flow.

pub mod baroclinic;
pub mod beck;
pub mod circulatory;
pub mod error;
pub mod floquet;
pub mod gyro;
pub mod linalg;
pub mod quartic;
pub mod sweep;
pub mod umbrella;

pub use error::{Error, Result};
pub use quartic::{hurwitz_verdict, QuarticCoeffs, StabilityLabel, StabilityVerdict};
pub use sweep::{bisect_boundary, par_map, ray_limit, Axis, Exec, RayLimit, SweepGrid};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
