//! Numerical control laboratory for the KP-II equation on the two-torus.
//!
//! The crate implements the pieces needed to study internal controllability
//! of
//!
//! ```text
//!     ∂ₜu + ∂ₓ³u + ∂ₓ⁻¹∂ᵧ²u + u∂ₓu = G(h),      (t,x,y) ∈ ℝ × T × T,
//! ```
//!
//! on truncated Fourier spectra:
//!
//! * [`spectral`] — mode grids, dispersion relations, exact linear
//!   propagators, physical/spectral transforms and bicharacteristic ray
//!   flows;
//! * [`control`] — the localized control operators `G⊥` (vertical strip)
//!   and `G∥` (horizontal strip), their Fourier matrices and the
//!   commutator scaling experiment;
//! * [`linalg`] — dense complex Hermitian kernels (cyclic Jacobi
//!   eigensolver, Cholesky, conjugate gradient, power iteration);
//! * [`hum`] — observability Gramians and exact control synthesis by the
//!   Hilbert Uniqueness Method, with an independent steering verifier;
//! * [`observability`] — λ-scans of Gramian coercivity, Ingham constants,
//!   frequency gaps and geodesic transit times;
//! * [`counterexample`] — semiclassical Gaussian wave packets, their lift
//!   to solutions of the linearized equation and the vanishing
//!   observability quotient on horizontal strips;
//! * [`nonlinear`] — a dealiased integrating-factor RK4 pseudospectral
//!   solver and the Picard fixed-point loop for small-data exact steering.
//!
//! All state is immutable after construction and every operation is a pure
//! function of its inputs, so values can be shared freely across worker
//! threads.

pub mod control;
pub mod counterexample;
pub mod error;
pub mod hum;
pub mod linalg;
pub mod nonlinear;
pub mod observability;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
