//! Riemannian optimization on the manifold of symmetric positive definite
//! matrices under three metrics: Affine-Invariant (AI), Bures-Wasserstein
//! (BW), and Log-Euclidean (LE).
//!
//! The crate is organized bottom-up:
//!
//! - [`symlinalg`]: dense symmetric/SPD kernels (eigendecomposition-based
//!   matrix functions, Lyapunov solves, polar factor, Fréchet derivative of
//!   the matrix exponential).
//! - [`manifold`]: the three geometries (metrics, exp/log maps, distances,
//!   geodesics, Euclidean-to-Riemannian gradient and Hessian conversion) and
//!   the product manifold used by mixture models.
//! - [`solvers`]: steepest descent, conjugate gradient, trust region with a
//!   truncated-CG subproblem solver, and stochastic gradient, all generic
//!   over an [`manifold::Objective`].
//! - [`problems`]: six benchmark objective families with data generators.
//! - [`diagnostics`]: numerical instruments for condition numbers, geodesic
//!   matching and convexity, the trigonometry distance bound, and the
//!   BW Gaussian kernel, plus gradient/Hessian certification.
//!
//! All operations are pure functions of immutable inputs and safe to call
//! concurrently; solver runs own their iterate and RNG state.

pub mod diagnostics;
pub mod manifold;
pub mod problems;
pub mod solvers;
pub mod symlinalg;

#[cfg(test)]
pub(crate) mod testutil;
