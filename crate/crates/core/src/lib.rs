//! Geodesics of signature-changing metrics on surfaces.
//!
//! A metric ds² = a dx² + 2b dxdy + c dy² degenerates on the curve
//! S0 = {Δ = ac − b² = 0}. Geodesics are integrated as trajectories of a
//! smooth field on the projectivized tangent bundle, which stays regular
//! across S0 except at isolated singular points.

pub mod catalog;
pub mod cubic;
pub mod degeneracy;
pub mod error;
pub mod exec;
pub mod export;
pub mod expr;
pub mod families;
pub mod fit;
pub mod geoflow;
pub mod metric;
pub mod ode;
pub mod suites;

pub use degeneracy::{classify, Case, DegenerateReport, ProjectiveDirection, Tolerances};
pub use error::{GeoError, Result};
pub use exec::Exec;
pub use geoflow::{integrate_geodesic, integrate_natural, CausalType, GeodesicCurve, IntegratorOptions, ProjectiveJet, Termination};
pub use metric::{parse_metric, Bbox, MetricField};
