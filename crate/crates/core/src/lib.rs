//! Numerical laboratory for an exponential-class variational problem on
//! closed triangulated surfaces.
//!
//! The objects of study live on a compact surface without boundary carrying
//! an intrinsic metric (edge lengths). The crate builds the discrete
//! Dirichlet energy, volume measure and Gaussian curvature, restricts fields
//! to the curvature-orthogonal subspace { u : Σ d_i u_i = 0 } (d = angle
//! defects), and explores the functional
//!
//!   F_β(u) = Σ_i M_ii e^{β u_i²}   over   { Σ d_i u_i = 0, ‖u‖_{1,α} ≤ 1 },
//!
//! whose critical exponent is β = 4π. Supporting machinery: constrained
//! Rayleigh-quotient eigenvalues, a curvature-corrected Green function with
//! its logarithmic regular constant, Moser-type and bubble test fields, a
//! radial unit-disc experiment against the πe bound, and Liouville-energy
//! lower bounds for conformal metrics.
//!
//! Sign convention: the stiffness matrix `L` is positive semidefinite with
//! u·Lu the discrete Dirichlet energy, and every continuous equation is
//! restated accordingly.

pub mod geodesic;
pub mod green;
pub mod linalg;
pub mod liouville;
pub mod mesh;
pub mod off;
pub mod operators;
pub mod probes;
pub mod reference;
pub mod rng;
pub mod spectrum;
pub mod tm;

pub use mesh::TriangleMesh;
pub use operators::{ConstrainedField, Operators};
pub use spectrum::EigenResult;
pub use tm::{TMProblem, TMSolution};

/// 4π, the critical exponent of the exponential functional.
pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// πe, the unit-disc concentration bound.
pub const PI_E: f64 = std::f64::consts::PI * std::f64::consts::E;
