//! The benchmark objective families: weighted least squares, Lyapunov,
//! trace regression, metric learning, log-det, and the Gaussian mixture
//! model, together with their data generators.
//!
//! Each problem carries the cost, the (symmetrized) Euclidean gradient, and
//! an optional Euclidean Hessian-vector product with a central-difference
//! fallback. Known minimizers are stored as plain symmetric matrices since
//! low-rank targets sit on the PSD boundary.

pub mod dataset;
pub mod generators;
mod gmm;

pub use gmm::{
    classical_gmm_log_likelihood, gmm_initial_point, kmeanspp_init, recover_gmm_params,
    GmmComponent, GmmObjective, GmmProblem,
};

use crate::manifold::{
    Geometry, GeometryError, ManifoldPoint, Objective, Observation, Result as GeoResult,
};
use crate::symlinalg::{SpdMatrix, SymLinalgError, SymMatrix};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

type CostFn = Arc<dyn Fn(&SpdMatrix) -> f64 + Send + Sync>;
type EgradFn = Arc<dyn Fn(&SpdMatrix) -> SymMatrix + Send + Sync>;
type EhessFn = Arc<dyn Fn(&SpdMatrix, &SymMatrix) -> SymMatrix + Send + Sync>;

/// A benchmark objective over SPD matrices in Euclidean terms; geometry
/// enters through [`SpdObjective`].
#[derive(Clone)]
pub struct SpdProblem {
    name: String,
    dim: usize,
    cost_fn: CostFn,
    egrad_fn: EgradFn,
    ehess_fn: Option<EhessFn>,
    x_star: Option<SymMatrix>,
}

impl std::fmt::Debug for SpdProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_ehess", &self.ehess_fn.is_some())
            .field("has_x_star", &self.x_star.is_some())
            .finish()
    }
}

impl SpdProblem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        cost: impl Fn(&SpdMatrix) -> f64 + Send + Sync + 'static,
        egrad: impl Fn(&SpdMatrix) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            cost_fn: Arc::new(cost),
            egrad_fn: Arc::new(egrad),
            ehess_fn: None,
            x_star: None,
        }
    }

    pub fn with_ehess(
        mut self,
        ehess: impl Fn(&SpdMatrix, &SymMatrix) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        self.ehess_fn = Some(Arc::new(ehess));
        self
    }

    pub fn with_x_star(mut self, x_star: SymMatrix) -> Self {
        self.x_star = Some(x_star);
        self
    }

    /// Copy without the analytic Hessian (exercises the fallback).
    pub fn without_ehess(mut self) -> Self {
        self.ehess_fn = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_star(&self) -> Option<&SymMatrix> {
        self.x_star.as_ref()
    }

    pub fn cost(&self, x: &SpdMatrix) -> f64 {
        (self.cost_fn)(x)
    }

    pub fn egrad(&self, x: &SpdMatrix) -> SymMatrix {
        (self.egrad_fn)(x)
    }

    pub fn has_ehess(&self) -> bool {
        self.ehess_fn.is_some()
    }

    /// Euclidean Hessian-vector product: analytic when provided, otherwise a
    /// central difference of the Euclidean gradient (halving the step when
    /// the perturbed matrix fails SPD admission).
    pub fn ehess_vec(
        &self,
        x: &SpdMatrix,
        u: &SymMatrix,
    ) -> std::result::Result<SymMatrix, SymLinalgError> {
        if let Some(f) = &self.ehess_fn {
            return Ok(f(x, u));
        }
        let u_norm = u.norm();
        if u_norm == 0.0 {
            return Ok(SymMatrix::zeros(self.dim));
        }
        let mut h = f64::EPSILON.sqrt() * (1.0 + x.mat().norm()) / u_norm;
        let mut last_err = None;
        for _ in 0..10 {
            let plus = SpdMatrix::new(x.to_sym().add(&u.scaled(h)));
            let minus = SpdMatrix::new(x.to_sym().add(&u.scaled(-h)));
            match (plus, minus) {
                (Ok(p), Ok(m)) => {
                    let gp = self.egrad(&p);
                    let gm = self.egrad(&m);
                    return Ok(gp.sub(&gm).scaled(0.5 / h));
                }
                (Err(e), _) | (_, Err(e)) => {
                    last_err = Some(e);
                    h *= 0.5;
                }
            }
        }
        Err(last_err.expect("loop ran"))
    }

    /// Modified Euclidean gradient norm `||X grad f(X)||_F`, the
    /// metric-agnostic stationarity measure used for cross-geometry plots.
    pub fn egrad_mod_norm(&self, x: &SpdMatrix) -> f64 {
        (x.mat() * self.egrad(x).mat()).norm()
    }
}

/// Weighted least squares `f(X) = 1/2 || A o X - B ||_F^2` with
/// `grad = (A o X - B) o A` and `hess[U] = A o U o A` (`o` entrywise).
pub fn make_wls(a: SymMatrix, b: SymMatrix) -> SpdProblem {
    assert_eq!(a.dim(), b.dim());
    let n = a.dim();
    let a2 = a.clone();
    let b2 = b.clone();
    let a3 = a.clone();
    SpdProblem::new(
        "wls",
        n,
        move |x| {
            let r = x.mat().zip_map(a.mat(), |xi, ai| ai * xi) - b.mat();
            0.5 * r.norm_squared()
        },
        move |x| {
            let r = x.mat().zip_map(a2.mat(), |xi, ai| ai * xi) - b2.mat();
            SymMatrix::from_exact(r.zip_map(a2.mat(), |ri, ai| ri * ai))
        },
    )
    .with_ehess(move |_x, u| {
        SymMatrix::from_exact(u.mat().zip_map(a3.mat(), |ui, ai| ai * ui * ai))
    })
}

/// Lyapunov objective `f(X) = tr(X A X) - tr(X C)` whose minimizer solves
/// `A X + X A = C`; `grad = A X + X A - C`, `hess[U] = A U + U A`.
pub fn make_lyapunov(a: SpdMatrix, c: SymMatrix) -> SpdProblem {
    assert_eq!(a.dim(), c.dim());
    let n = a.dim();
    let a2 = a.clone();
    let c2 = c.clone();
    let a3 = a.clone();
    SpdProblem::new(
        "lyapunov",
        n,
        move |x| (x.mat() * a.mat() * x.mat()).trace() - x.mat().dotc(c.mat()),
        move |x| {
            let ax = a2.mat() * x.mat();
            SymMatrix::from_exact(crate::symlinalg::sym_part(&(&ax + ax.transpose() - c2.mat())))
        },
    )
    .with_ehess(move |_x, u| {
        let au = a3.mat() * u.mat();
        SymMatrix::from_exact(crate::symlinalg::sym_part(&(&au + au.transpose())))
    })
}

/// Trace regression `f(X) = 1/(2m) sum_i (y_i - a_iᵀ X a_i)^2` over rank-one
/// measurements. The gradient and Hessian carry the `1/m` factor so they
/// differentiate the stated cost exactly.
pub fn make_trace_regression(a_rows: DMatrix<f64>, y: DVector<f64>) -> SpdProblem {
    let m = a_rows.nrows();
    let d = a_rows.ncols();
    assert_eq!(y.len(), m);
    let quad_forms = move |a_rows: &DMatrix<f64>, s: &DMatrix<f64>| -> DVector<f64> {
        // q_i = a_iᵀ S a_i via rowwise contraction of (A S) o A.
        let z = a_rows * s;
        DVector::from_fn(a_rows.nrows(), |i, _| z.row(i).dot(&a_rows.row(i)))
    };
    let weighted_gram = move |a_rows: &DMatrix<f64>, w: &DVector<f64>| -> SymMatrix {
        // sum_i w_i a_i a_iᵀ = Aᵀ diag(w) A
        let mut wa = a_rows.clone();
        for i in 0..a_rows.nrows() {
            wa.row_mut(i).scale_mut(w[i]);
        }
        SymMatrix::new(a_rows.transpose() * wa).expect("square")
    };
    let a1 = a_rows.clone();
    let y1 = y.clone();
    let a2 = a_rows.clone();
    let y2 = y;
    let a3 = a_rows;
    SpdProblem::new(
        "trace_regression",
        d,
        move |x| {
            let q = quad_forms(&a1, x.mat());
            (0..m).map(|i| (y1[i] - q[i]).powi(2)).sum::<f64>() / (2.0 * m as f64)
        },
        move |x| {
            let q = quad_forms(&a2, x.mat());
            let w = DVector::from_fn(m, |i, _| (q[i] - y2[i]) / m as f64);
            weighted_gram(&a2, &w)
        },
    )
    .with_ehess(move |_x, u| {
        let q = quad_forms(&a3, u.mat());
        let w = q / m as f64;
        weighted_gram(&a3, &w)
    })
}

/// Logistic discriminant metric learning over pairwise squared Mahalanobis
/// distances `s = (x_i - x_j)ᵀ M (x_i - x_j)`:
/// per-pair loss `t s + log(1 + exp(-s))`, so
/// `grad = sum (t - p) delta deltaᵀ` and
/// `hess[U] = sum p(1-p) (deltaᵀ U delta) delta deltaᵀ` with
/// `p = 1/(1 + exp(s))`.
///
/// All pairs are enumerated for up to 1000 samples; beyond that, 1e5 pairs
/// are drawn with the given seed.
pub fn make_metric_learning(x_data: &DMatrix<f64>, labels: &[usize], seed: u64) -> SpdProblem {
    let n = x_data.nrows();
    let d = x_data.ncols();
    assert_eq!(labels.len(), n);
    assert!(n >= 2);
    let mut deltas: Vec<(DVector<f64>, f64)> = Vec::new();
    if n <= 1000 {
        for i in 0..n {
            for j in (i + 1)..n {
                let delta = (x_data.row(i) - x_data.row(j)).transpose();
                let t = if labels[i] == labels[j] { 1.0 } else { 0.0 };
                deltas.push((delta, t));
            }
        }
    } else {
        let mut rng = generators::rng_from_seed(seed);
        use rand::Rng;
        for _ in 0..100_000 {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let delta = (x_data.row(i) - x_data.row(j)).transpose();
            let t = if labels[i] == labels[j] { 1.0 } else { 0.0 };
            deltas.push((delta, t));
        }
    }
    let p_count = deltas.len();
    let mut d_mat = DMatrix::zeros(p_count, d);
    let mut t_vec = DVector::zeros(p_count);
    for (p, (delta, t)) in deltas.iter().enumerate() {
        d_mat.set_row(p, &delta.transpose());
        t_vec[p] = *t;
    }
    let pair_quads = move |d_mat: &DMatrix<f64>, s: &DMatrix<f64>| -> DVector<f64> {
        let z = d_mat * s;
        DVector::from_fn(d_mat.nrows(), |p, _| z.row(p).dot(&d_mat.row(p)))
    };
    let weighted_gram = move |d_mat: &DMatrix<f64>, w: &DVector<f64>| -> SymMatrix {
        let mut wd = d_mat.clone();
        for p in 0..d_mat.nrows() {
            wd.row_mut(p).scale_mut(w[p]);
        }
        SymMatrix::new(d_mat.transpose() * wd).expect("square")
    };
    let d1 = d_mat.clone();
    let t1 = t_vec.clone();
    let d2 = d_mat.clone();
    let t2 = t_vec;
    let d3 = d_mat;
    SpdProblem::new(
        "dml",
        d,
        move |m| {
            let s = pair_quads(&d1, m.mat());
            (0..p_count)
                .map(|p| t1[p] * s[p] + (-s[p]).exp().ln_1p())
                .sum()
        },
        move |m| {
            let s = pair_quads(&d2, m.mat());
            let w = DVector::from_fn(p_count, |p, _| {
                let prob = 1.0 / (1.0 + s[p].exp());
                t2[p] - prob
            });
            weighted_gram(&d2, &w)
        },
    )
    .with_ehess(move |m, u| {
        let s = pair_quads(&d3, m.mat());
        let us = pair_quads(&d3, u.mat());
        let w = DVector::from_fn(p_count, |p, _| {
            let prob = 1.0 / (1.0 + s[p].exp());
            prob * (1.0 - prob) * us[p]
        });
        weighted_gram(&d3, &w)
    })
}

/// Log-det objective `f(X) = tr(X C) - log det X` with minimizer
/// `X* = C^{-1}` stored exactly; `grad = C - X^{-1}`,
/// `hess[U] = X^{-1} U X^{-1}`.
pub fn make_logdet(c: SpdMatrix) -> SpdProblem {
    let n = c.dim();
    let x_star = SymMatrix::from_exact(c.inv().clone());
    let c2 = c.clone();
    SpdProblem::new(
        "logdet",
        n,
        move |x| x.mat().dotc(c.mat()) - x.log_det(),
        move |x| SymMatrix::from_exact(c2.mat() - x.inv()),
    )
    .with_ehess(|x, u| SymMatrix::from_exact(crate::symlinalg::sym_part(&(x.inv() * u.mat() * x.inv()))))
    .with_x_star(x_star)
}

/// A problem bound to a geometry: the [`Objective`] the solvers consume.
///
/// The Riemannian gradient and Hessian come from the exact conversion
/// formulas for AI and BW. LE has no closed-form Hessian; it is
/// approximated by a forward difference of the Riemannian gradient in the
/// linear `S`-parameter space with step
/// `h = sqrt(eps) (1 + ||S||_F) / max(||U||_F, 1e-16)`.
pub struct SpdObjective<'p> {
    problem: &'p SpdProblem,
    geometry: Geometry,
}

impl<'p> SpdObjective<'p> {
    pub fn new(problem: &'p SpdProblem, geometry: Geometry) -> Self {
        Self { problem, geometry }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn problem(&self) -> &SpdProblem {
        self.problem
    }

    /// Identity matrix for AI and BW, zero parameter matrix for LE.
    pub fn initial_point(&self) -> ManifoldPoint {
        ManifoldPoint::initial(self.geometry, self.problem.dim)
    }

    pub fn point_from_spd(&self, spd: SpdMatrix) -> ManifoldPoint {
        ManifoldPoint::from_spd(self.geometry, spd)
    }
}

impl Objective for SpdObjective<'_> {
    type Point = ManifoldPoint;
    type Tangent = SymMatrix;

    fn manifold_dim(&self) -> usize {
        self.geometry.manifold_dim(self.problem.dim)
    }

    fn cost(&self, x: &ManifoldPoint) -> f64 {
        self.problem.cost(x.spd())
    }

    fn grad(&self, x: &ManifoldPoint) -> GeoResult<SymMatrix> {
        let eg = self.problem.egrad(x.spd());
        self.geometry.egrad_to_rgrad(x, &eg)
    }

    fn hess_vec(&self, x: &ManifoldPoint, u: &SymMatrix) -> GeoResult<SymMatrix> {
        match self.geometry {
            Geometry::Le => {
                let s = x.log_param().expect("LE point carries S");
                let u_norm = u.norm();
                let h = f64::EPSILON.sqrt() * (1.0 + s.norm()) / u_norm.max(1e-16);
                let shifted = self.geometry.exp_map(x, &u.scaled(h))?;
                let g1 = self.grad(&shifted)?;
                let g0 = self.grad(x)?;
                Ok(g1.sub(&g0).scaled(1.0 / h))
            }
            _ => {
                let eg = self.problem.egrad(x.spd());
                let eh = self
                    .problem
                    .ehess_vec(x.spd(), u)
                    .map_err(GeometryError::Kernel)?;
                self.geometry.ehess_to_rhess(x, &eg, &eh, u)
            }
        }
    }

    fn inner(&self, x: &ManifoldPoint, u: &SymMatrix, v: &SymMatrix) -> f64 {
        self.geometry
            .inner(x, u, v)
            .expect("inner product on admitted point")
    }

    fn retract(&self, x: &ManifoldPoint, u: &SymMatrix) -> GeoResult<ManifoldPoint> {
        self.geometry.exp_map(x, u)
    }

    fn observe(&self, x: &ManifoldPoint) -> Observation {
        let spd = x.spd();
        let dist_to_sol = match self.problem.x_star() {
            Some(star) => (spd.mat() - star.mat()).norm(),
            None => f64::NAN,
        };
        Observation {
            loss: self.problem.cost(spd),
            dist_to_sol,
            egrad_mod_norm: self.problem.egrad_mod_norm(spd),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_unit_sym, rng, spd_from_spectrum};

    fn fd_gradient_check(problem: &SpdProblem, x: &SpdMatrix, seed: u64) {
        // Central difference of the cost along a symmetric direction in the
        // flat embedding must match tr(egrad . V).
        let mut r = rng(seed);
        for _ in 0..5 {
            let v = random_unit_sym(problem.dim(), &mut r);
            let h = 1e-6 * (1.0 + x.mat().norm());
            let plus = SpdMatrix::new(x.to_sym().add(&v.scaled(h))).unwrap();
            let minus = SpdMatrix::new(x.to_sym().add(&v.scaled(-h))).unwrap();
            let fd = (problem.cost(&plus) - problem.cost(&minus)) / (2.0 * h);
            let analytic = problem.egrad(x).dot(&v);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "{}: fd {fd} vs analytic {analytic}",
                problem.name()
            );
        }
    }

    fn hessian_symmetry_check(problem: &SpdProblem, x: &SpdMatrix, seed: u64) {
        let mut r = rng(seed);
        let u = random_unit_sym(problem.dim(), &mut r);
        let v = random_unit_sym(problem.dim(), &mut r);
        let hu = problem.ehess_vec(x, &u).unwrap();
        let hv = problem.ehess_vec(x, &v).unwrap();
        let a = hu.dot(&v);
        let b = hv.dot(&u);
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{}", problem.name());
    }

    #[test]
    fn wls_hand_case() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        let x_star = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 + i as f64 } else { 0.0 });
        let b = SymMatrix::from_exact(a.mat().zip_map(x_star.mat(), |ai, xi| ai * xi));
        let p = make_wls(a, b).with_x_star(x_star.clone());
        let eye = SpdMatrix::identity(2);
        assert!((p.cost(&eye) - 0.5).abs() < 1e-15);
        let star = SpdMatrix::new(x_star).unwrap();
        assert!(p.cost(&star).abs() < 1e-15);
        assert!(p.egrad(&star).norm() < 1e-15);
    }

    #[test]
    fn wls_derivatives_certify() {
        let mut r = rng(1);
        let a = random_unit_sym(5, &mut r);
        let b = random_unit_sym(5, &mut r);
        let p = make_wls(a, b);
        let x = spd_from_spectrum(5, 0.5, 2.0, &mut r);
        fd_gradient_check(&p, &x, 2);
        hessian_symmetry_check(&p, &x, 3);
    }

    #[test]
    fn lyapunov_minimizer_and_scalar_case() {
        let mut r = rng(4);
        let a = spd_from_spectrum(4, 0.5, 3.0, &mut r);
        let x_star = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let c = SymMatrix::new(a.mat() * x_star.mat() + x_star.mat() * a.mat()).unwrap();
        let p = make_lyapunov(a.clone(), c).with_x_star(x_star.to_sym());
        assert!(p.egrad(&x_star).norm() < 1e-12);
        // f(X*) = -tr(X* A X*).
        let want = -(x_star.mat() * a.mat() * x_star.mat()).trace();
        assert!((p.cost(&x_star) - want).abs() < 1e-10 * want.abs());

        // n = 1 scalars: minimizer x* = c/(2a).
        let a1 = SpdMatrix::from_mat(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let c1 = SymMatrix::new(DMatrix::from_element(1, 1, 6.0)).unwrap();
        let p1 = make_lyapunov(a1, c1);
        let x_opt = SpdMatrix::from_mat(DMatrix::from_element(1, 1, 1.5)).unwrap();
        assert!(p1.egrad(&x_opt).norm() < 1e-14);
        fd_gradient_check(&p, &spd_from_spectrum(4, 0.5, 2.0, &mut r), 5);
        hessian_symmetry_check(&p, &spd_from_spectrum(4, 0.5, 2.0, &mut r), 6);
    }

    #[test]
    fn trace_regression_cases() {
        // Zero noise at the target gives zero cost.
        let data = generators::gen_trace_data(50, 6, 6, 0.0, 7);
        let p = make_trace_regression(data.a_rows.clone(), data.y.clone())
            .with_x_star(data.x_star.clone());
        let star = SpdMatrix::new(data.x_star).unwrap();
        assert!(p.cost(&star) < 1e-18);

        // Single sample a = e1, y = 1: f(X) = (X11 - 1)^2 / 2.
        let mut a_row = DMatrix::zeros(1, 3);
        a_row[(0, 0)] = 1.0;
        let p1 = make_trace_regression(a_row, DVector::from_element(1, 1.0));
        let mut r = rng(8);
        let x = spd_from_spectrum(3, 0.5, 2.0, &mut r);
        let want = 0.5 * (x.mat()[(0, 0)] - 1.0).powi(2);
        assert!((p1.cost(&x) - want).abs() < 1e-14);
        let g = p1.egrad(&x);
        assert!((g.mat()[(0, 0)] - (x.mat()[(0, 0)] - 1.0)).abs() < 1e-14);
        assert!(g.norm() - g.mat()[(0, 0)].abs() < 1e-14);

        let data2 = generators::gen_trace_data(100, 10, 10, 0.1, 9);
        let p2 = make_trace_regression(data2.a_rows, data2.y);
        fd_gradient_check(&p2, &spd_from_spectrum(10, 0.5, 2.0, &mut r), 10);
        hessian_symmetry_check(&p2, &spd_from_spectrum(10, 0.5, 2.0, &mut r), 11);
    }

    #[test]
    fn metric_learning_cases() {
        // Two identical points: s = 0, the pair contributes log 2.
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let p = make_metric_learning(&x, &[0, 0], 1);
        let m = SpdMatrix::identity(2);
        assert!((p.cost(&m) - 2.0f64.ln()).abs() < 1e-14);
        assert!(p.egrad(&m).norm() < 1e-14);

        let (data, labels) = generators::gen_labeled_blobs(50, 9, 7, 2);
        let p2 = make_metric_learning(&data, &labels, 3);
        let mut r = rng(12);
        let m0 = spd_from_spectrum(9, 0.5, 2.0, &mut r);
        fd_gradient_check(&p2, &m0, 13);
        hessian_symmetry_check(&p2, &m0, 14);
    }

    #[test]
    fn logdet_cases() {
        let mut r = rng(15);
        let c = spd_from_spectrum(5, 0.5, 3.0, &mut r);
        let p = make_logdet(c.clone());
        let star = SpdMatrix::new(p.x_star().unwrap().clone()).unwrap();
        assert!(p.egrad(&star).norm() < 1e-12);
        let eye = SpdMatrix::identity(5);
        assert!((p.cost(&eye) - c.trace()).abs() < 1e-12);
        fd_gradient_check(&p, &spd_from_spectrum(5, 0.5, 2.0, &mut r), 16);
        hessian_symmetry_check(&p, &spd_from_spectrum(5, 0.5, 2.0, &mut r), 17);
    }

    #[test]
    fn fd_hessian_fallback_matches_analytic() {
        let mut r = rng(18);
        let c = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let p = make_logdet(c);
        let p_fd = p.clone().without_ehess();
        let x = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let u = random_unit_sym(4, &mut r);
        let exact = p.ehess_vec(&x, &u).unwrap();
        let fd = p_fd.ehess_vec(&x, &u).unwrap();
        assert!(fd.sub(&exact).norm() <= 1e-6 * exact.norm().max(1.0));
    }

    #[test]
    fn spd_objective_observation() {
        let mut r = rng(19);
        let c = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let p = make_logdet(c);
        let obj = SpdObjective::new(&p, Geometry::Ai);
        let x0 = obj.initial_point();
        let obs = obj.observe(&x0);
        assert!(obs.loss.is_finite());
        assert!(obs.dist_to_sol.is_finite());
        assert!(obs.egrad_mod_norm > 0.0);

        // No known minimizer -> NaN distance.
        let (data, labels) = generators::gen_labeled_blobs(20, 3, 2, 20);
        let pd = make_metric_learning(&data, &labels, 4);
        let objd = SpdObjective::new(&pd, Geometry::Bw);
        assert!(objd.observe(&objd.initial_point()).dist_to_sol.is_nan());
    }

    #[test]
    fn le_hessian_fd_matches_second_difference() {
        // <Hess[U], U> vs second central difference of f(Exp_S(tU)) at 0.
        let mut r = rng(21);
        let c = spd_from_spectrum(4, 0.5, 2.0, &mut r);
        let p = make_logdet(c);
        let obj = SpdObjective::new(&p, Geometry::Le);
        let x = obj.point_from_spd(spd_from_spectrum(4, 0.5, 2.0, &mut r));
        let u = random_unit_sym(4, &mut r);
        let hu = obj.hess_vec(&x, &u).unwrap();
        let quad = obj.inner(&x, &hu, &u);
        let h = 1e-4;
        let fp = obj.cost(&obj.retract(&x, &u.scaled(h)).unwrap());
        let fm = obj.cost(&obj.retract(&x, &u.scaled(-h)).unwrap());
        let f0 = obj.cost(&x);
        let second = (fp - 2.0 * f0 + fm) / (h * h);
        assert!((quad - second).abs() <= 1e-3 * second.abs().max(1.0));
    }
}
