//! Rational minimax approximation with interpolation constraints.
//!
//! A type-(n, n) rational is kept in barycentric form over n+1 support
//! points, the first ℓ of which carry interpolation conditions that the form
//! satisfies by construction. The minimax problem is attacked through its
//! Lagrange dual: for a weight vector `w` on the probability simplex the dual
//! value `d(w)` is a weighted linearized least-squares residual, computed here
//! from two thin QR factorizations and one smallest singular pair. A Lawson
//! reweighting drives `w` toward the dual maximizer, and the gap between
//! `sqrt(d(w))` and the primal maximum error certifies optimality.
//!
//! Modules:
//! - [`linalg`]: dense complex kernels.
//! - [`barycentric`]: sample/support data and the barycentric rational.
//! - [`dual`]: basis matrices and the dual function (fast path and oracle).
//! - [`lawson`]: support selection and the Lawson driver.
//! - [`diagnostics`]: error curves, extreme points, duality certificates.

pub mod barycentric;
pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod lawson;
pub mod linalg;

pub use barycentric::{BarycentricRational, InterpolationData, SampleSet, SupportPoints};
pub use diagnostics::{DualityCertificate, ErrorReport, ExtremePointSet, Verdict};
pub use dual::{BasisMatrices, DualEvaluation, WeightVector};
pub use error::{Error, Result};
pub use lawson::{LawsonConfig, SolveResult, SupportStrategy, TerminationReason};

pub use num_complex::Complex64;
