//! K-functionals of concrete compatible couples.
//!
//! The crate evaluates `K(x, t) = inf_y ( |x - y|_X + t |y|_Y )` exactly or
//! with certified error bounds for several sequence and grid couples, builds
//! the induced discrete interpolation norms, certifies lower bounds showing
//! that `K` can stay bounded away from zero on a whole unit sphere, and runs
//! the geometric decomposition scheme that turns pointwise K-smallness into
//! convergent two-sided approximations.

pub mod couple;
pub mod decompose;
pub mod element;
pub mod error;
pub mod interp;
pub mod ksolve;
pub mod slowdecay;
pub mod space;
pub mod uniform;

pub use couple::{CoupleSpec, EmbeddingReport, SolverKind};
pub use decompose::{
    iterate_decomposition, iterate_decomposition_with, near_optimal_split, verify_cauchy_in_y,
    CauchyReport, DecompositionTrace, TraceStatus, TraceStep,
};
pub use element::{Element, GridFunction, Vector};
pub use error::{Error, Result};
pub use ksolve::{k_curve, k_solve, k_sup, KCurve, KResult, SolverMethod};
pub use uniform::{phi_profile, uniform_bound_check, CompactModelSpec, UniformBoundReport};

/// Numeric tolerances shared across modules.
pub mod tol {
    /// Unit-norm requirement on certified witness elements.
    pub const UNIT_NORM: f64 = 1e-12;
    /// Inward shrink factor applied to certification radii; certifying the
    /// closed ball of radius `delta * (1 - BALL_SHRINK)` covers the open
    /// ball statement at radius `delta * (1 - BALL_SHRINK)` robustly.
    pub const BALL_SHRINK: f64 = 1e-9;
    /// Soundness margin required of certified lower bounds.
    pub const CERT_SOUNDNESS: f64 = 1e-9;
    /// Relative threshold below which an iterate counts as numerically zero.
    pub const EARLY_STOP_REL: f64 = 1e-14;
    /// Relative tolerance for exact reconstruction identities.
    pub const RECONSTRUCTION_REL: f64 = 1e-10;
    /// Generic slack for identities that hold exactly in real arithmetic.
    pub const FP_SLACK: f64 = 1e-12;
}
