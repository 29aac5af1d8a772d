//! Accessible information of the lifted trine ensemble.
//!
//! Three real states in three dimensions, the planar trines tilted out of
//! the plane by `arcsin(sqrt(alpha))`, taken with equal priors. For small
//! lifts the information-optimal measurement is a six-outcome POVM: two
//! symmetric triples, one in the plane and one steeply lifted. This crate
//! builds that measurement, locates the lift `gamma1` where the six-outcome
//! regime ends, and checks the construction against brute-force searches.
//!
//! * [`geometry`]: states, symmetric triples, lift matrices, POVM checks
//! * [`info`]: mutual information and the optimal `V(theta)` basis
//! * [`envelope`]: lift mixtures, `gamma1`, the six-element optimum
//! * [`oracle`]: grid, basis and perturbation searches used as witnesses
//! * [`reports`]: CSV / json-lines tables and the invariant report

pub mod config;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod info;
pub mod oracle;
pub mod reports;
pub mod scalar;

pub use error::{Result, TrineError};

/// Tolerance for closed-form identities (unit norms, orthonormality,
/// factorization).
pub const IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for POVM completeness and the triple conditions, looser than
/// [`IDENTITY_TOL`] because assembled POVMs accumulate rounding per triple.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// The lift at which the planar-anchored chord touches the optimized-basis
/// information curve, as published to six digits.
pub const GAMMA1_REFERENCE: f64 = 0.061367;

/// The lift at which the optimal azimuth reaches zero, as published.
pub const THETA_ONSET_REFERENCE: f64 = 0.056651;

/// Upper edge of the regime handled by [`envelope::optimal_povm`].
pub const LIFT_LIMIT: f64 = 8.0 / 9.0;
