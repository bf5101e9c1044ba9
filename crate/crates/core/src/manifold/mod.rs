//! The three SPD geometries and the product manifold.
//!
//! Points under the Affine-Invariant (AI) and Bures-Wasserstein (BW) metrics
//! are SPD matrices. Under the Log-Euclidean (LE) metric, optimization runs
//! in the linear space of symmetric matrices through the parameterization
//! `X = exp(S)`; an LE point stores both `S` and the materialized `X`.
//!
//! Tangent vectors are symmetric matrices for all three metrics (for LE they
//! live in the `S`-parameter space). Vector transport is the identity, which
//! is valid because the tangent spaces of all points coincide as the set of
//! symmetric matrices.

mod objective;
mod product;

pub use objective::{Objective, Observation, StochasticObjective};
pub use product::{ProductPoint, ProductTangent};

use crate::symlinalg::{
    expm_frechet, expm_sym, lyapunov_solve, polar_factor, sym_eig, sym_part, SpdMatrix,
    SymLinalgError, SymMatrix,
};
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Tangent vectors under every metric here are plain symmetric matrices.
pub type TangentVector = SymMatrix;

#[derive(Debug, Error)]
pub enum GeometryError {
    /// The BW exponential leaves the cone: `I + L_X[U]` has an eigenvalue
    /// at or below tolerance. Solvers react by shrinking the step.
    #[error("step too long: min eigenvalue of I + L_X[U] is {eig_min:.3e}")]
    StepTooLong { eig_min: f64 },
    #[error("resulting point failed SPD admission")]
    Inadmissible(#[source] SymLinalgError),
    #[error("matrix kernel failure: {0}")]
    Kernel(#[from] SymLinalgError),
    #[error("point has geometry {point} but operation ran under {expected}")]
    GeometryMismatch { point: Geometry, expected: Geometry },
    #[error("operation not defined under {0} (use the finite-difference path)")]
    Unsupported(Geometry),
}

impl GeometryError {
    /// True when the failure means "the attempted step was too aggressive"
    /// rather than a structural error; solvers retry with a shorter step.
    pub fn is_step_failure(&self) -> bool {
        matches!(
            self,
            GeometryError::StepTooLong { .. }
                | GeometryError::Inadmissible(_)
                | GeometryError::Kernel(SymLinalgError::ExpOverflow { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Metric choice on the SPD manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Affine-Invariant: `g(U,V) = tr(X^{-1} U X^{-1} V)`.
    Ai,
    /// Bures-Wasserstein: `g(U,V) = 1/2 tr(L_X[U] V)`.
    Bw,
    /// Log-Euclidean in the `X = exp(S)` parameterization: `g(U,V) = tr(UV)`.
    Le,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Geometry::Ai => "ai",
            Geometry::Bw => "bw",
            Geometry::Le => "le",
        })
    }
}

impl std::str::FromStr for Geometry {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ai" => Ok(Geometry::Ai),
            "bw" => Ok(Geometry::Bw),
            "le" => Ok(Geometry::Le),
            other => Err(format!("unknown geometry '{other}' (expected ai, bw, le)")),
        }
    }
}

/// A point on the SPD manifold under a fixed geometry.
///
/// For LE the point is the symmetric parameter `S`; the SPD matrix
/// `X = exp(S)` is materialized at construction because every cost and
/// Euclidean gradient is evaluated at `X`.
#[derive(Debug, Clone)]
pub struct ManifoldPoint {
    geometry: Geometry,
    spd: SpdMatrix,
    log_param: Option<SymMatrix>,
}

impl ManifoldPoint {
    /// AI or BW point from an SPD matrix.
    pub fn spd_point(geometry: Geometry, spd: SpdMatrix) -> Result<Self> {
        if geometry == Geometry::Le {
            return Err(GeometryError::Unsupported(Geometry::Le));
        }
        Ok(Self {
            geometry,
            spd,
            log_param: None,
        })
    }

    /// LE point from the symmetric parameter `S`; computes `X = exp(S)`.
    pub fn le_point(s: SymMatrix) -> Result<Self> {
        let spd = expm_sym(&s)?;
        Ok(Self {
            geometry: Geometry::Le,
            spd,
            log_param: Some(s),
        })
    }

    /// Construction at the conventional initializer: identity matrix for
    /// AI/BW, zero parameter matrix for LE (same underlying point).
    pub fn initial(geometry: Geometry, n: usize) -> Self {
        match geometry {
            Geometry::Ai | Geometry::Bw => Self {
                geometry,
                spd: SpdMatrix::identity(n),
                log_param: None,
            },
            Geometry::Le => Self {
                geometry,
                spd: SpdMatrix::identity(n),
                log_param: Some(SymMatrix::zeros(n)),
            },
        }
    }

    /// Wraps an SPD matrix under any geometry (for LE, `S = log X`).
    pub fn from_spd(geometry: Geometry, spd: SpdMatrix) -> Self {
        match geometry {
            Geometry::Ai | Geometry::Bw => Self {
                geometry,
                spd,
                log_param: None,
            },
            Geometry::Le => {
                let s = spd.logm();
                Self {
                    geometry,
                    spd,
                    log_param: Some(s),
                }
            }
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// The SPD matrix `X` this point represents (for LE, `exp(S)`).
    pub fn spd(&self) -> &SpdMatrix {
        &self.spd
    }

    /// The LE parameter `S`; `None` for AI/BW points.
    pub fn log_param(&self) -> Option<&SymMatrix> {
        self.log_param.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.spd.dim()
    }

    fn expect_geometry(&self, g: Geometry) -> Result<()> {
        if self.geometry != g {
            return Err(GeometryError::GeometryMismatch {
                point: self.geometry,
                expected: g,
            });
        }
        Ok(())
    }
}

impl Geometry {
    /// Dimension of the manifold of n-by-n SPD matrices.
    pub fn manifold_dim(self, n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// Riemannian inner product of tangent vectors at `x`.
    pub fn inner(self, x: &ManifoldPoint, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
        x.expect_geometry(self)?;
        match self {
            Geometry::Ai => {
                let inv = x.spd.inv();
                let a = inv * u.mat();
                let b = inv * v.mat();
                Ok((a * b).trace())
            }
            Geometry::Bw => {
                let l = lyapunov_solve(&x.spd, u)?;
                Ok(0.5 * l.dot(v))
            }
            Geometry::Le => Ok(u.dot(v)),
        }
    }

    pub fn norm(self, x: &ManifoldPoint, u: &SymMatrix) -> Result<f64> {
        Ok(self.inner(x, u, u)?.max(0.0).sqrt())
    }

    /// Exponential map.
    ///
    /// AI uses the congruence-symmetrized form
    /// `X^{1/2} exp(X^{-1/2} U X^{-1/2}) X^{1/2}`, equal to
    /// `X^{1/2} exp(X^{-1} U) X^{1/2}`. BW is `X + U + L_X[U] X L_X[U]` and
    /// reports a step-too-long error when `I + L_X[U]` has an eigenvalue at
    /// or below 1e-12 (the map leaves the cone). LE adds in parameter space.
    pub fn exp_map(self, x: &ManifoldPoint, u: &SymMatrix) -> Result<ManifoldPoint> {
        x.expect_geometry(self)?;
        match self {
            Geometry::Ai => {
                let inner = SymMatrix::new(x.spd.inv_sqrt() * u.mat() * x.spd.inv_sqrt())?;
                let e = expm_sym(&inner)?;
                let result = SpdMatrix::from_mat(x.spd.sqrt() * e.mat() * x.spd.sqrt())
                    .map_err(GeometryError::Inadmissible)?;
                ManifoldPoint::spd_point(self, result)
            }
            Geometry::Bw => {
                let l = lyapunov_solve(&x.spd, u)?;
                let (_, l_eigs) = sym_eig(&l)?;
                let eig_min = 1.0 + l_eigs[l_eigs.len() - 1];
                if eig_min <= 1e-12 {
                    return Err(GeometryError::StepTooLong { eig_min });
                }
                let lxl = l.mat() * x.spd.mat() * l.mat();
                let result = SpdMatrix::from_mat(x.spd.mat() + u.mat() + lxl)
                    .map_err(GeometryError::Inadmissible)?;
                ManifoldPoint::spd_point(self, result)
            }
            Geometry::Le => {
                let s = x.log_param.as_ref().expect("LE point carries S").add(u);
                ManifoldPoint::le_point(s)
            }
        }
    }

    /// Logarithm map, the local inverse of `exp_map`.
    ///
    /// BW: `Log_X(Y) = (XY)^{1/2} + (YX)^{1/2} - 2X`, defined inside the
    /// injectivity neighbourhood of `X`; `(XY)^{1/2}` is reduced to an SPD
    /// square root through `X^{1/2} (X^{1/2} Y X^{1/2})^{1/2} X^{-1/2}`.
    pub fn log_map(self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<SymMatrix> {
        x.expect_geometry(self)?;
        y.expect_geometry(self)?;
        match self {
            Geometry::Ai => {
                let middle = SpdMatrix::from_mat(x.spd.inv_sqrt() * y.spd.mat() * x.spd.inv_sqrt())?;
                SymMatrix::new(x.spd.sqrt() * middle.logm().mat() * x.spd.sqrt())
                    .map_err(GeometryError::Kernel)
            }
            Geometry::Bw => {
                let middle = SpdMatrix::from_mat(x.spd.sqrt() * y.spd.mat() * x.spd.sqrt())?;
                let xy_sqrt = x.spd.sqrt() * middle.sqrt() * x.spd.inv_sqrt();
                let log = &xy_sqrt + xy_sqrt.transpose() - 2.0 * x.spd.mat();
                SymMatrix::new(log).map_err(GeometryError::Kernel)
            }
            Geometry::Le => {
                let s = x.log_param.as_ref().expect("LE point carries S");
                let t = y.log_param.as_ref().expect("LE point carries S");
                Ok(t.sub(s))
            }
        }
    }

    /// Geodesic distance.
    pub fn distance(self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        x.expect_geometry(self)?;
        y.expect_geometry(self)?;
        match self {
            Geometry::Ai => {
                let middle = SpdMatrix::from_mat(x.spd.inv_sqrt() * y.spd.mat() * x.spd.inv_sqrt())?;
                Ok(middle
                    .eigenvalues()
                    .iter()
                    .map(|l| l.ln().powi(2))
                    .sum::<f64>()
                    .sqrt())
            }
            Geometry::Bw => bw_distance(&x.spd, &y.spd),
            Geometry::Le => {
                let s = x.log_param.as_ref().expect("LE point carries S");
                let t = y.log_param.as_ref().expect("LE point carries S");
                Ok(s.sub(t).norm())
            }
        }
    }

    /// Euclidean gradient to Riemannian gradient.
    ///
    /// AI: `X eg X`. BW: `4 {eg X}_S`. LE: `{D_eg exp(S)}_S` via the
    /// block-triangular Fréchet derivative. The caller passes the
    /// symmetrized Euclidean gradient.
    pub fn egrad_to_rgrad(self, x: &ManifoldPoint, eg: &SymMatrix) -> Result<SymMatrix> {
        x.expect_geometry(self)?;
        match self {
            Geometry::Ai => SymMatrix::new(x.spd.mat() * eg.mat() * x.spd.mat())
                .map_err(GeometryError::Kernel),
            Geometry::Bw => Ok(SymMatrix::from_exact(
                4.0 * sym_part(&(eg.mat() * x.spd.mat())),
            )),
            Geometry::Le => {
                let s = x.log_param.as_ref().expect("LE point carries S");
                let (_, deriv) = expm_frechet(s, eg)?;
                Ok(deriv)
            }
        }
    }

    /// Euclidean Hessian-vector product to Riemannian Hessian-vector
    /// product, exact for AI and BW. LE has no closed form here; its
    /// Hessian is approximated by finite differences of the Riemannian
    /// gradient at the objective layer.
    pub fn ehess_to_rhess(
        self,
        x: &ManifoldPoint,
        eg: &SymMatrix,
        ehess_u: &SymMatrix,
        u: &SymMatrix,
    ) -> Result<SymMatrix> {
        x.expect_geometry(self)?;
        let xm = x.spd.mat();
        match self {
            Geometry::Ai => {
                let first = xm * ehess_u.mat() * xm;
                let second = sym_part(&(u.mat() * eg.mat() * xm));
                SymMatrix::new(first + second).map_err(GeometryError::Kernel)
            }
            Geometry::Bw => {
                let l = lyapunov_solve(&x.spd, u)?;
                let grad_bw = 4.0 * sym_part(&(eg.mat() * xm));
                let term1 = 4.0 * sym_part(&(ehess_u.mat() * xm));
                let term2 = 2.0 * sym_part(&(eg.mat() * u.mat()));
                let term3 = 4.0 * sym_part(&(xm * sym_part(&(l.mat() * eg.mat()))));
                let term4 = sym_part(&(l.mat() * grad_bw));
                SymMatrix::new(term1 + term2 + term3 - term4).map_err(GeometryError::Kernel)
            }
            Geometry::Le => Err(GeometryError::Unsupported(Geometry::Le)),
        }
    }

    /// Identity vector transport; valid because tangent spaces coincide.
    pub fn transport(
        self,
        _from: &ManifoldPoint,
        _to: &ManifoldPoint,
        u: &SymMatrix,
    ) -> SymMatrix {
        u.clone()
    }
}

/// Bures-Wasserstein distance
/// `d(X,Y) = (tr X + tr Y - 2 tr (X^{1/2} Y X^{1/2})^{1/2})^{1/2}`.
pub fn bw_distance(x: &SpdMatrix, y: &SpdMatrix) -> Result<f64> {
    let middle = SpdMatrix::from_mat(x.sqrt() * y.mat() * x.sqrt())?;
    let cross: f64 = middle.eigenvalues().iter().map(|l| l.sqrt()).sum();
    Ok((x.trace() + y.trace() - 2.0 * cross).max(0.0).sqrt())
}

/// BW geodesic
/// `gamma(t) = ((1-t) X^{1/2} + t Y^{1/2} P)((1-t) X^{1/2} + t Y^{1/2} P)^T`
/// with `P` the polar factor of `Y^{1/2} X^{1/2}`.
pub fn bw_geodesic(x: &SpdMatrix, y: &SpdMatrix, t: f64) -> Result<SymMatrix> {
    let p = polar_factor(x, y)?;
    let m = (1.0 - t) * x.sqrt() + t * (y.sqrt() * p);
    Ok(SymMatrix::from_exact(sym_part(&(&m * m.transpose()))))
}

/// Wasserstein interpolation `omega(t) = ((1-t)I + tT) X ((1-t)I + tT)` with
/// the pushforward map `T = Y^{1/2} (Y^{1/2} X Y^{1/2})^{-1/2} Y^{1/2}`.
/// Exists as the independent oracle for the geodesic-matching check.
pub fn wasserstein_interpolation(x: &SpdMatrix, y: &SpdMatrix, t: f64) -> Result<SymMatrix> {
    let middle = SpdMatrix::from_mat(y.sqrt() * x.mat() * y.sqrt())?;
    let t_map = y.sqrt() * middle.fn_map(|l| 1.0 / l.sqrt())?.mat() * y.sqrt();
    let n = x.dim();
    let blend = DMatrix::identity(n, n) * (1.0 - t) + t_map * t;
    Ok(SymMatrix::from_exact(sym_part(&(&blend * x.mat() * &blend))))
}

/// Arithmetic the solvers need from a tangent type.
pub trait TangentArith: Clone {
    fn zeros_like(&self) -> Self;
    fn scaled(&self, a: f64) -> Self;
    /// `self += a * other`.
    fn axpy(&mut self, a: f64, other: &Self);
}

impl TangentArith for SymMatrix {
    fn zeros_like(&self) -> Self {
        SymMatrix::zeros(self.dim())
    }
    fn scaled(&self, a: f64) -> Self {
        SymMatrix::scaled(self, a)
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        SymMatrix::axpy(self, a, other);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_unit_sym, rel_err, rng, spd_from_spectrum};
    use nalgebra::DVector;

    fn point(g: Geometry, spd: SpdMatrix) -> ManifoldPoint {
        ManifoldPoint::from_spd(g, spd)
    }

    #[test]
    fn inner_at_identity() {
        let mut r = rng(1);
        let u = random_unit_sym(4, &mut r);
        let v = random_unit_sym(4, &mut r);
        let x_ai = ManifoldPoint::initial(Geometry::Ai, 4);
        let x_bw = ManifoldPoint::initial(Geometry::Bw, 4);
        // AI at I: tr(UV). BW at I: tr(UV)/4 since L_I[U] = U/2 and the
        // metric carries a further 1/2.
        assert!((Geometry::Ai.inner(&x_ai, &u, &v).unwrap() - u.dot(&v)).abs() < 1e-12);
        assert!((Geometry::Bw.inner(&x_bw, &u, &u).unwrap() - u.dot(&u) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn bw_inner_matches_kronecker_sum_oracle() {
        let mut r = rng(2);
        for _ in 0..5 {
            let n = 5;
            let x = spd_from_spectrum(n, 0.2, 5.0, &mut r);
            let u = random_unit_sym(n, &mut r);
            let v = random_unit_sym(n, &mut r);
            let xp = point(Geometry::Bw, x.clone());
            let got = Geometry::Bw.inner(&xp, &u, &v).unwrap();

            let eye = DMatrix::<f64>::identity(n, n);
            let ksum = x.mat().kronecker(&eye) + eye.kronecker(x.mat());
            let vec_u = DVector::from_column_slice(u.mat().as_slice());
            let vec_v = DVector::from_column_slice(v.mat().as_slice());
            let solved = ksum.lu().solve(&vec_v).unwrap();
            let want = 0.5 * vec_u.dot(&solved);
            assert!((got - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn metric_scaling_with_point() {
        // AI scales as c^{-2}, BW as c^{-1}.
        let mut r = rng(3);
        let x = spd_from_spectrum(5, 0.5, 3.0, &mut r);
        let u = random_unit_sym(5, &mut r);
        let c = 7.3;
        let cx = SpdMatrix::from_mat(x.mat() * c).unwrap();
        let ai = Geometry::Ai
            .inner(&point(Geometry::Ai, x.clone()), &u, &u)
            .unwrap();
        let ai_c = Geometry::Ai
            .inner(&point(Geometry::Ai, cx.clone()), &u, &u)
            .unwrap();
        assert!((ai_c - ai / (c * c)).abs() < 1e-10 * ai);
        let bw = Geometry::Bw
            .inner(&point(Geometry::Bw, x.clone()), &u, &u)
            .unwrap();
        let bw_c = Geometry::Bw.inner(&point(Geometry::Bw, cx), &u, &u).unwrap();
        assert!((bw_c - bw / c).abs() < 1e-10 * bw);
    }

    #[test]
    fn exp_of_zero_is_identity_map() {
        let mut r = rng(4);
        let x = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        for g in [Geometry::Ai, Geometry::Bw, Geometry::Le] {
            let p = point(g, x.clone());
            let q = g.exp_map(&p, &SymMatrix::zeros(4)).unwrap();
            assert!(rel_err(q.spd().mat(), p.spd().mat()) < 1e-12);
        }
    }

    #[test]
    fn bw_exp_at_identity_closed_form() {
        // Exp_I(U) = (I + U/2)^2.
        let mut r = rng(5);
        let u = random_unit_sym(4, &mut r);
        let x = ManifoldPoint::initial(Geometry::Bw, 4);
        let got = Geometry::Bw.exp_map(&x, &u).unwrap();
        let half = DMatrix::<f64>::identity(4, 4) + u.mat() * 0.5;
        let want = &half * &half;
        assert!(rel_err(got.spd().mat(), &want) < 1e-12);
    }

    #[test]
    fn ai_exp_matches_unsymmetrized_form() {
        // The congruence-symmetrized exponential equals the form with a
        // non-symmetric argument, X exp(X^{-1} U): conjugating the argument
        // by X^{1/2} turns one into the other.
        let mut r = rng(6);
        let x = spd_from_spectrum(10, 0.2, 4.0, &mut r);
        let u = random_unit_sym(10, &mut r);
        let p = point(Geometry::Ai, x.clone());
        let got = Geometry::Ai.exp_map(&p, &u).unwrap();
        let want = x.mat() * (x.inv() * u.mat()).exp();
        assert!(rel_err(got.spd().mat(), &want) < 1e-9);
    }

    #[test]
    fn bw_exp_reports_step_too_long() {
        let x = ManifoldPoint::initial(Geometry::Bw, 3);
        // L_I[U] = U/2; U = -3I makes I + L = -0.5 I.
        let u = SymMatrix::identity(3).scaled(-3.0);
        match Geometry::Bw.exp_map(&x, &u) {
            Err(e) => assert!(e.is_step_failure()),
            Ok(_) => panic!("expected boundary error"),
        }
    }

    #[test]
    fn log_of_same_point_is_zero() {
        let mut r = rng(7);
        let x = spd_from_spectrum(5, 0.5, 2.0, &mut r);
        for g in [Geometry::Ai, Geometry::Bw, Geometry::Le] {
            let p = point(g, x.clone());
            let l = g.log_map(&p, &p).unwrap();
            assert!(l.norm() < 1e-9 * x.mat().norm());
        }
    }

    #[test]
    fn bw_log_at_identity_closed_form() {
        // Log_I(Y) = 2 (Y^{1/2} - I).
        let mut r = rng(8);
        let y = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let i = ManifoldPoint::initial(Geometry::Bw, 4);
        let got = Geometry::Bw
            .log_map(&i, &point(Geometry::Bw, y.clone()))
            .unwrap();
        let want = (y.sqrt() - DMatrix::<f64>::identity(4, 4)) * 2.0;
        assert!(rel_err(got.mat(), &want) < 1e-10);
    }

    #[test]
    fn exp_log_round_trip_all_geometries() {
        let mut r = rng(9);
        for g in [Geometry::Ai, Geometry::Bw, Geometry::Le] {
            for _ in 0..5 {
                let x = spd_from_spectrum(6, 0.7, 1.5, &mut r);
                let u = random_unit_sym(6, &mut r).scaled(0.3);
                let p = point(g, x);
                let q = g.exp_map(&p, &u).unwrap();
                let back = g.log_map(&p, &q).unwrap();
                assert!(
                    back.sub(&u).norm() <= 1e-8 * u.norm().max(1.0),
                    "round trip failed for {g}"
                );
                // And exp(log(y)) == y.
                let u2 = g.log_map(&p, &q).unwrap();
                let q2 = g.exp_map(&p, &u2).unwrap();
                assert!(rel_err(q2.spd().mat(), q.spd().mat()) < 1e-8);
            }
        }
    }

    #[test]
    fn bw_distance_trivial_cases() {
        let x = SpdMatrix::identity(2);
        let y = SpdMatrix::from_mat(DMatrix::identity(2, 2) * 4.0).unwrap();
        // d(I, 4I)^2 = n (sqrt(1) - sqrt(4))^2 = 2.
        let d = bw_distance(&x, &y).unwrap();
        assert!((d * d - 2.0).abs() < 1e-12);
        assert!(bw_distance(&x, &x).unwrap() < 1e-12);
    }

    #[test]
    fn bw_distance_symmetric_and_equals_log_norm() {
        let mut r = rng(10);
        for _ in 0..5 {
            let x = spd_from_spectrum(5, 0.8, 1.3, &mut r);
            let y = spd_from_spectrum(5, 0.8, 1.3, &mut r);
            let dxy = bw_distance(&x, &y).unwrap();
            let dyx = bw_distance(&y, &x).unwrap();
            assert!((dxy - dyx).abs() <= 1e-10);
            // Inside the injectivity neighbourhood the distance equals the
            // metric norm of the log map.
            let px = point(Geometry::Bw, x);
            let py = point(Geometry::Bw, y);
            let u = Geometry::Bw.log_map(&px, &py).unwrap();
            let len = Geometry::Bw.norm(&px, &u).unwrap();
            assert!((dxy - len).abs() < 1e-8 * dxy.max(1e-8));
        }
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let x = SpdMatrix::identity(2);
        let y = SpdMatrix::from_mat(DMatrix::identity(2, 2) * 4.0).unwrap();
        let g0 = bw_geodesic(&x, &y, 0.0).unwrap();
        let g1 = bw_geodesic(&x, &y, 1.0).unwrap();
        let gh = bw_geodesic(&x, &y, 0.5).unwrap();
        assert!(rel_err(g0.mat(), x.mat()) < 1e-12);
        assert!(rel_err(g1.mat(), y.mat()) < 1e-12);
        assert!(rel_err(gh.mat(), &(DMatrix::identity(2, 2) * 2.25)) < 1e-12);
        // Wasserstein interpolation agrees at the same points.
        let wh = wasserstein_interpolation(&x, &y, 0.5).unwrap();
        assert!(rel_err(wh.mat(), gh.mat()) < 1e-12);
    }

    #[test]
    fn wasserstein_pushforward_property() {
        let mut r = rng(11);
        let x = spd_from_spectrum(6, 0.3, 3.0, &mut r);
        let y = spd_from_spectrum(6, 0.3, 3.0, &mut r);
        let w0 = wasserstein_interpolation(&x, &y, 0.0).unwrap();
        let w1 = wasserstein_interpolation(&x, &y, 1.0).unwrap();
        assert!(rel_err(w0.mat(), x.mat()) < 1e-12);
        assert!(rel_err(w1.mat(), y.mat()) < 1e-10);
    }

    #[test]
    fn geodesic_matches_interpolation_on_grid() {
        let mut r = rng(12);
        for _ in 0..10 {
            let x = spd_from_spectrum(6, 0.2, 4.0, &mut r);
            let y = spd_from_spectrum(6, 0.2, 4.0, &mut r);
            for k in 0..=10 {
                let t = k as f64 / 10.0;
                let g = bw_geodesic(&x, &y, t).unwrap();
                let w = wasserstein_interpolation(&x, &y, t).unwrap();
                assert!(g.sub(&w).norm() <= 1e-8 * x.mat().norm());
            }
        }
    }

    #[test]
    fn egrad_conversion_trivial_cases() {
        let mut r = rng(13);
        let eg = random_unit_sym(4, &mut r);
        let i_bw = ManifoldPoint::initial(Geometry::Bw, 4);
        let zero = Geometry::Bw
            .egrad_to_rgrad(&i_bw, &SymMatrix::zeros(4))
            .unwrap();
        assert!(zero.is_zero());
        // BW at I: grad = 4 {eg I}_S = 4 eg, and <4 eg, V>_bw = tr(eg V).
        let grad = Geometry::Bw.egrad_to_rgrad(&i_bw, &eg).unwrap();
        assert!(rel_err(grad.mat(), &(eg.mat() * 4.0)) < 1e-12);
        let v = random_unit_sym(4, &mut r);
        let pairing = Geometry::Bw.inner(&i_bw, &grad, &v).unwrap();
        assert!((pairing - eg.dot(&v)).abs() < 1e-12);
    }

    #[test]
    fn gradient_defining_property_random_triples() {
        // <egrad_to_rgrad(eg), V>_g == tr(eg V) for all geometries.
        let mut r = rng(14);
        for g in [Geometry::Ai, Geometry::Bw, Geometry::Le] {
            for _ in 0..20 {
                let x = point(g, spd_from_spectrum(5, 0.3, 3.0, &mut r));
                let eg = random_unit_sym(5, &mut r);
                let v = random_unit_sym(5, &mut r);
                let grad = g.egrad_to_rgrad(&x, &eg).unwrap();
                let got = g.inner(&x, &grad, &v).unwrap();
                let want = match g {
                    // For LE the defining pairing lives in S-space against
                    // the directional derivative of exp.
                    Geometry::Le => {
                        let s = x.log_param().unwrap();
                        let (_, dv) = expm_frechet(s, &v).unwrap();
                        eg.dot(&dv)
                    }
                    _ => eg.dot(&v),
                };
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "defining property failed for {g}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn hessian_at_critical_point_reduces() {
        // With eg = 0: AI gives X ehess X, BW gives 4 {ehess X}_S.
        let mut r = rng(15);
        let x = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let u = random_unit_sym(4, &mut r);
        let eh = random_unit_sym(4, &mut r);
        let zero = SymMatrix::zeros(4);
        let ai = Geometry::Ai
            .ehess_to_rhess(&point(Geometry::Ai, x.clone()), &zero, &eh, &u)
            .unwrap();
        assert!(rel_err(ai.mat(), &sym_part(&(x.mat() * eh.mat() * x.mat()))) < 1e-12);
        let bw = Geometry::Bw
            .ehess_to_rhess(&point(Geometry::Bw, x.clone()), &zero, &eh, &u)
            .unwrap();
        assert!(rel_err(bw.mat(), &(4.0 * sym_part(&(eh.mat() * x.mat())))) < 1e-12);
        // All-zero inputs give zero.
        let z = Geometry::Bw
            .ehess_to_rhess(&point(Geometry::Bw, x), &zero, &zero, &u)
            .unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn transport_is_identity() {
        let mut r = rng(16);
        let x = point(Geometry::Bw, spd_from_spectrum(4, 0.5, 2.0, &mut r));
        let y = point(Geometry::Bw, spd_from_spectrum(4, 0.5, 2.0, &mut r));
        let u = random_unit_sym(4, &mut r);
        let t = Geometry::Bw.transport(&x, &y, &u);
        assert!(rel_err(t.mat(), u.mat()) < 1e-16);
        let z = Geometry::Bw.transport(&x, &x, &SymMatrix::zeros(4));
        assert!(z.is_zero());
    }

    #[test]
    fn metric_positivity_random() {
        let mut r = rng(17);
        for g in [Geometry::Ai, Geometry::Bw, Geometry::Le] {
            for _ in 0..100 {
                let x = point(g, spd_from_spectrum(4, 0.1, 5.0, &mut r));
                let u = random_unit_sym(4, &mut r);
                assert!(g.inner(&x, &u, &u).unwrap() > 0.0);
            }
        }
    }
}
