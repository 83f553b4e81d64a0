//! Numeric tolerances used across the crate.
//!
//! Two tiers: `ARITHMETIC` covers quantities that are exact up to rounding
//! (norms, unit moduli, permutation-matrix algebra), while the looser values
//! absorb error accumulated by iterative linear algebra or long operator
//! chains. Everything that gates a pass/fail decision references a named
//! constant here instead of an inline literal.

/// Rounding-level tolerance for norms, unit-modulus checks, and Hermiticity.
pub const ARITHMETIC: f64 = 1e-12;

/// Weak-decoherence gate on `max |Re D(h, h')|`, looser than [`ARITHMETIC`]
/// to absorb accumulation over long projector chains.
pub const WEAK_DECOHERENCE: f64 = 1e-10;

/// Frobenius-norm bound for `‖U†U − I‖` when accepting a dense unitary.
pub const UNITARITY: f64 = 1e-10;

/// Bound on `max |eig(H) − 2·cos θ|` between independently computed spectra.
pub const SPECTRUM_MAP: f64 = 1e-9;

/// Frobenius-norm bound for `‖V² − U‖` after taking a principal square root.
pub const ROOT_RESIDUAL: f64 = 1e-10;

/// Commutator norm above which a site counts as acted on by an operator.
pub const SUPPORT_COMMUTATOR: f64 = 1e-8;

/// Bound on coarse-graining consistency between full and local diagonals.
pub const REFINEMENT: f64 = 1e-10;
