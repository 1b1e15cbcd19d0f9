//! Numerical tolerances shared across the crate.

/// Allowed drift of `Σ|a_i|²` from 1 for a constructed state.
pub const NORM: f64 = 1e-10;

/// Probability floor used before taking logarithms in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// Default central finite-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Lloyd iterations stop once every center moves less than this.
pub const KMEANS_SHIFT: f64 = 1e-6;
