//! Coverage probability of cellular networks whose base stations form a
//! homogeneous Poisson point process.
//!
//! The crate has two independent routes to the same numbers:
//!
//! * [`analytic`] evaluates the downlink and uplink coverage integrals (and
//!   their closed-form special cases) with the adaptive quadrature in
//!   [`specfun`].
//! * [`montecarlo`] simulates network realizations built from the sampling
//!   and association primitives in [`spatial`] and counts how often the
//!   typical receiver clears each SIR threshold.
//!
//! Both routes are density-free in the end: the analytic forms carrying the
//! base-station density are kept so the invariance can be checked
//! numerically.

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod parallel;
pub mod reference;
pub mod spatial;
pub mod specfun;

pub use error::{Error, Result};
