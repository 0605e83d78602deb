//! Named thresholds. All values are calibrated for `f64`; generic code goes
//! through [`Real::tol`](crate::Real::tol) so that `f32` saturates at its own
//! resolution.

/// Unit-norm check on state vectors.
pub const NORM: f64 = 1e-9;
/// Max-entry deviation of `U†U` from the identity.
pub const UNITARY: f64 = 1e-9;
/// Unitarity budget for operators produced by numerical integration.
pub const INTEGRATED_UNITARY: f64 = 1e-8;
/// Exact algebraic identities (products, Kronecker factorizations).
pub const ALGEBRAIC: f64 = 1e-12;
/// Accepted deviation of an axis from unit norm before it is rejected.
pub const UNIT_AXIS: f64 = 1e-9;
/// Unit-norm and closure checks on loop samples.
pub const LOOP_SAMPLE: f64 = 1e-12;
/// Consecutive loop samples closer than this to antipodal are rejected.
pub const ANTIPODAL: f64 = 1e-9;
/// Spherical centroid shorter than this falls back to another reference point.
pub const CENTROID_MIN_NORM: f64 = 1e-6;
/// Two eigenvector component magnitudes this close count as a tie.
pub const GAUGE_TIE: f64 = 1e-12;
/// Equality of media couplings required for exact pair degeneracy.
pub const KAPPA_MATCH: f64 = 1e-12;

/// Largest accepted norm drift of an integrated trajectory.
pub const NORM_DRIFT_MAX: f64 = 1e-6;
/// Smallest consecutive eigenstate overlap magnitude in a Wilson loop.
pub const WILSON_MIN_OVERLAP: f64 = 1e-6;
/// Smallest `|⟨ψ(0)|ψ(L)⟩|` for extracting a phase from dynamics.
pub const ADIABATIC_MIN_OVERLAP: f64 = 0.99;
/// Largest accepted disagreement between the Wilson-loop and dynamics phases.
pub const METHOD_RESIDUAL_MAX: f64 = 1e-3;
/// Largest accepted population outside the zero-energy pair subspace.
pub const LEAKAGE_MAX: f64 = 1e-4;

/// Pair protocol: minimum `|⟨Φ₋|out⟩|` for the orthogonal-output run.
pub const ORTHOGONAL_PARTNER_MIN: f64 = 0.995;
/// Pair protocol: maximum `|⟨Φ₊|out⟩|` for the orthogonal-output run.
pub const ORTHOGONAL_INITIAL_MAX: f64 = 0.05;
/// Pair protocol: minimum fidelity for the counter-rotating and generalized
/// basis variants.
pub const VARIANT_FIDELITY_MIN: f64 = 0.99;
