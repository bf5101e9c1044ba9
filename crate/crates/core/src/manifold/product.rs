//! Product manifold for mixture models: K SPD components under one SPD
//! metric, plus a Euclidean weight vector of length K-1 (the last mixing
//! logit is pinned to zero).
//!
//! The product carries the sum metric; exponential and logarithm maps act
//! componentwise.

use super::{Geometry, GeometryError, ManifoldPoint, Result, TangentArith};
use crate::symlinalg::SymMatrix;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct ProductPoint {
    parts: Vec<ManifoldPoint>,
    weights: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct ProductTangent {
    pub parts: Vec<SymMatrix>,
    pub weights: DVector<f64>,
}

impl ProductPoint {
    /// All parts must share geometry and dimension; `weights` has length
    /// `parts.len() - 1` and must be finite.
    pub fn new(parts: Vec<ManifoldPoint>, weights: DVector<f64>) -> Result<Self> {
        assert!(!parts.is_empty(), "product point needs at least one part");
        assert_eq!(weights.len(), parts.len() - 1, "weights must have K-1 entries");
        assert!(weights.iter().all(|w| w.is_finite()), "weights must be finite");
        let g = parts[0].geometry();
        let n = parts[0].dim();
        for p in &parts[1..] {
            if p.geometry() != g {
                return Err(GeometryError::GeometryMismatch {
                    point: p.geometry(),
                    expected: g,
                });
            }
            assert_eq!(p.dim(), n, "all parts must share dimension");
        }
        Ok(Self { parts, weights })
    }

    pub fn geometry(&self) -> Geometry {
        self.parts[0].geometry()
    }

    pub fn num_components(&self) -> usize {
        self.parts.len()
    }

    pub fn part_dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn parts(&self) -> &[ManifoldPoint] {
        &self.parts
    }

    /// Mixing logits, length K-1 (the K-th logit is zero).
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Softmax of the padded logit vector `[weights; 0]`.
    pub fn mixture_weights(&self) -> DVector<f64> {
        let k = self.parts.len();
        let mut logits = DVector::zeros(k);
        for j in 0..k - 1 {
            logits[j] = self.weights[j];
        }
        let max = logits.max();
        let exps = logits.map(|l| (l - max).exp());
        let total: f64 = exps.sum();
        exps / total
    }

    pub fn manifold_dim(&self) -> usize {
        let n = self.part_dim();
        self.parts.len() * self.geometry().manifold_dim(n) + self.weights.len()
    }

    pub fn zero_tangent(&self) -> ProductTangent {
        ProductTangent {
            parts: vec![SymMatrix::zeros(self.part_dim()); self.parts.len()],
            weights: DVector::zeros(self.weights.len()),
        }
    }

    pub fn inner(&self, u: &ProductTangent, v: &ProductTangent) -> Result<f64> {
        let g = self.geometry();
        let mut total = u.weights.dot(&v.weights);
        for (i, p) in self.parts.iter().enumerate() {
            total += g.inner(p, &u.parts[i], &v.parts[i])?;
        }
        Ok(total)
    }

    pub fn exp(&self, u: &ProductTangent) -> Result<ProductPoint> {
        let g = self.geometry();
        let mut parts = Vec::with_capacity(self.parts.len());
        for (i, p) in self.parts.iter().enumerate() {
            parts.push(g.exp_map(p, &u.parts[i])?);
        }
        Ok(ProductPoint {
            parts,
            weights: &self.weights + &u.weights,
        })
    }

    pub fn log(&self, other: &ProductPoint) -> Result<ProductTangent> {
        let g = self.geometry();
        let mut parts = Vec::with_capacity(self.parts.len());
        for (i, p) in self.parts.iter().enumerate() {
            parts.push(g.log_map(p, &other.parts[i])?);
        }
        Ok(ProductTangent {
            parts,
            weights: &other.weights - &self.weights,
        })
    }
}

impl TangentArith for ProductTangent {
    fn zeros_like(&self) -> Self {
        ProductTangent {
            parts: self.parts.iter().map(|p| p.zeros_like()).collect(),
            weights: DVector::zeros(self.weights.len()),
        }
    }

    fn scaled(&self, a: f64) -> Self {
        ProductTangent {
            parts: self.parts.iter().map(|p| p.scaled(a)).collect(),
            weights: &self.weights * a,
        }
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        for (p, o) in self.parts.iter_mut().zip(&other.parts) {
            p.axpy(a, o);
        }
        self.weights.axpy(a, &other.weights, 1.0);
    }
}
