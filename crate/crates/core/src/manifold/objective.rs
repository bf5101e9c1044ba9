//! The seam between geometries/problems and the solvers.
//!
//! An [`Objective`] bundles a cost function with the Riemannian structure it
//! is optimized under. Solvers touch points and tangents only through this
//! trait, which is what makes them geometry-agnostic.

use super::{Result, TangentArith};

/// Per-iterate statistics recorded into solver traces.
#[derive(Debug, Clone, Copy)]
pub struct Observation {
    pub loss: f64,
    /// Frobenius distance to the known minimizer, NaN when unknown.
    pub dist_to_sol: f64,
    /// Modified Euclidean gradient norm `||X grad f(X)||_F`, a
    /// metric-agnostic stationarity measure.
    pub egrad_mod_norm: f64,
}

/// A cost function together with the Riemannian machinery of one geometry.
pub trait Objective {
    type Point: Clone;
    type Tangent: TangentArith;

    /// Dimension of the underlying manifold (tangent-space dimension).
    fn manifold_dim(&self) -> usize;

    fn cost(&self, x: &Self::Point) -> f64;

    /// Riemannian gradient at `x`.
    fn grad(&self, x: &Self::Point) -> Result<Self::Tangent>;

    /// Riemannian Hessian applied to `u` (exact or finite-difference).
    fn hess_vec(&self, x: &Self::Point, u: &Self::Tangent) -> Result<Self::Tangent>;

    /// Metric inner product at `x`.
    fn inner(&self, x: &Self::Point, u: &Self::Tangent, v: &Self::Tangent) -> f64;

    fn norm(&self, x: &Self::Point, u: &Self::Tangent) -> f64 {
        self.inner(x, u, u).max(0.0).sqrt()
    }

    /// Exponential-map step from `x` along `u`. Errors with a step failure
    /// when the step leaves the admissible set (solvers then backtrack).
    fn retract(&self, x: &Self::Point, u: &Self::Tangent) -> Result<Self::Point>;

    /// Vector transport (identity for every geometry in this crate).
    fn transport(&self, _from: &Self::Point, _to: &Self::Point, u: &Self::Tangent) -> Self::Tangent {
        u.clone()
    }

    /// Statistics for trace records.
    fn observe(&self, x: &Self::Point) -> Observation;
}

/// An objective that decomposes over samples and can produce minibatch
/// gradient estimates (unbiased for the full gradient).
pub trait StochasticObjective: Objective {
    fn num_samples(&self) -> usize;

    /// Gradient estimate from the given sample indices, scaled to estimate
    /// the full gradient.
    fn batch_grad(&self, x: &Self::Point, batch: &[usize]) -> Result<Self::Tangent>;
}
