//! Analysis and simulation of delay-coupled Wilson-Cowan networks with
//! homeostatic inhibitory plasticity.
//!
//! The library is organized around the pipeline used to study how network
//! structure and transmission-delay distributions shape synchronization:
//!
//! - [`model`]: node parameters, logistic transfer function, the synchronous
//!   equilibrium and the linearization coefficients.
//! - [`kernels`]: the delay distributions (none, shifted Dirac, uniform,
//!   gamma) with their Laplace transforms and trigonometric moments.
//! - [`connectivity`]: row-sum-1 coupling matrices, ring presets and their
//!   eigenstructure.
//! - [`spectral`]: per-eigenvalue characteristic factors, root scans inside a
//!   complex disk (companion matrix or argument-principle contour) and
//!   equilibrium stability tests.
//! - [`hopf`]: curves of pure imaginary eigenvalues in the
//!   (W^IE, W^E)-plane, curve ordering and double-Hopf intersections.
//! - [`simulate`]: full nonlinear network integration under each kernel and
//!   the synchronized/desynchronized classifier.

pub mod connectivity;
pub mod hopf;
pub mod kernels;
pub mod model;
pub mod poly;
pub mod simulate;
pub mod spectral;

pub use connectivity::Connectivity;
pub use kernels::DelayKernel;
pub use model::{Equilibrium, LinCoeffs, ModelParams};
