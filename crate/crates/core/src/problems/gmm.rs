//! Gaussian mixture estimation in the reformulated parameterization: each
//! component is the inverse augmented covariance `S_j = Sigma_aug^{-1}` over
//! augmented samples `y = [x; 1]`, and mixing weights are logits with the
//! last one pinned to zero. The per-component density
//!
//! `p(y; S) = (2 pi)^{-d/2} det(S)^{1/2} exp(1/2 - 1/2 yᵀ S y)`
//!
//! equals the classical Gaussian density at the parameters recovered through
//! the block map `S^{-1} = [[Sigma + mu muᵀ, mu], [muᵀ, 1]]`, so the
//! reformulated log-likelihood matches the classical one exactly.

use super::generators::rng_from_seed;
use crate::manifold::{
    Geometry, GeometryError, ManifoldPoint, Objective, Observation, ProductPoint, ProductTangent,
    Result as GeoResult, StochasticObjective, TangentArith,
};
use crate::symlinalg::{sym_part, SpdMatrix, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct GmmProblem {
    /// N x (d+1) augmented samples, trailing column of ones.
    samples: DMatrix<f64>,
    k: usize,
    data_dim: usize,
}

impl GmmProblem {
    /// Builds from raw `N x d` samples, augmenting each row with a trailing 1.
    pub fn new(samples_raw: &DMatrix<f64>, k: usize) -> Self {
        assert!(k >= 1);
        let n = samples_raw.nrows();
        let d = samples_raw.ncols();
        assert!(n >= 1);
        let mut samples = DMatrix::zeros(n, d + 1);
        samples.view_mut((0, 0), (n, d)).copy_from(samples_raw);
        for i in 0..n {
            samples[(i, d)] = 1.0;
        }
        Self {
            samples,
            k,
            data_dim: d,
        }
    }

    pub fn num_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_components(&self) -> usize {
        self.k
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn aug_dim(&self) -> usize {
        self.data_dim + 1
    }

    /// `log p(y_i; S_j)` for all samples and components.
    fn log_densities(&self, s_list: &[&SpdMatrix]) -> DMatrix<f64> {
        let n = self.num_samples();
        let d = self.data_dim as f64;
        let mut out = DMatrix::zeros(n, self.k);
        let base = -0.5 * d * (2.0 * std::f64::consts::PI).ln() + 0.5;
        for (j, s) in s_list.iter().enumerate() {
            let half_logdet = 0.5 * s.log_det();
            let z = &self.samples * s.mat();
            for i in 0..n {
                let quad = z.row(i).dot(&self.samples.row(i));
                out[(i, j)] = base + half_logdet - 0.5 * quad;
            }
        }
        out
    }

    fn log_mix_weights(omega: &DVector<f64>, k: usize) -> DVector<f64> {
        let mut logits = DVector::zeros(k);
        for j in 0..k - 1 {
            logits[j] = omega[j];
        }
        let max = logits.max();
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        logits.map(|l| l - lse)
    }

    /// Negative reformulated log-likelihood over the given samples.
    fn neg_log_likelihood_rows(
        &self,
        s_list: &[&SpdMatrix],
        omega: &DVector<f64>,
        rows: Option<&[usize]>,
    ) -> f64 {
        let logp = self.log_densities(s_list);
        let logw = Self::log_mix_weights(omega, self.k);
        let term = |i: usize| -> f64 {
            let mut m = f64::NEG_INFINITY;
            for j in 0..self.k {
                m = m.max(logw[j] + logp[(i, j)]);
            }
            let sum: f64 = (0..self.k).map(|j| (logw[j] + logp[(i, j)] - m).exp()).sum();
            m + sum.ln()
        };
        match rows {
            None => -(0..self.num_samples()).map(term).sum::<f64>(),
            Some(idx) => -idx.iter().map(|&i| term(i)).sum::<f64>(),
        }
    }

    pub fn neg_log_likelihood(&self, s_list: &[&SpdMatrix], omega: &DVector<f64>) -> f64 {
        self.neg_log_likelihood_rows(s_list, omega, None)
    }

    /// Euclidean gradient of the negative log-likelihood with respect to
    /// each `S_j` and the logits, over all samples or a batch (batch
    /// gradients are rescaled by `N / |B|` to estimate the full gradient).
    pub fn egrad_raw(
        &self,
        s_list: &[&SpdMatrix],
        omega: &DVector<f64>,
        batch: Option<&[usize]>,
    ) -> (Vec<SymMatrix>, DVector<f64>) {
        let n = self.num_samples();
        let logp = self.log_densities(s_list);
        let logw = Self::log_mix_weights(omega, self.k);
        let w = logw.map(|l| l.exp());
        let rows: Vec<usize> = match batch {
            None => (0..n).collect(),
            Some(idx) => idx.to_vec(),
        };
        let scale = n as f64 / rows.len() as f64;
        // Responsibilities restricted to the chosen rows.
        let mut resp = DMatrix::zeros(rows.len(), self.k);
        for (bi, &i) in rows.iter().enumerate() {
            let mut m = f64::NEG_INFINITY;
            for j in 0..self.k {
                m = m.max(logw[j] + logp[(i, j)]);
            }
            let mut total = 0.0;
            for j in 0..self.k {
                let e = (logw[j] + logp[(i, j)] - m).exp();
                resp[(bi, j)] = e;
                total += e;
            }
            for j in 0..self.k {
                resp[(bi, j)] /= total;
            }
        }
        let aug = self.aug_dim();
        let mut grads = Vec::with_capacity(self.k);
        for (j, s) in s_list.iter().enumerate() {
            let r_total: f64 = (0..rows.len()).map(|bi| resp[(bi, j)]).sum();
            // Weighted scatter sum_i r_ij y_i y_iᵀ.
            let mut scatter = DMatrix::zeros(aug, aug);
            for (bi, &i) in rows.iter().enumerate() {
                let y = self.samples.row(i);
                let r = resp[(bi, j)];
                if r == 0.0 {
                    continue;
                }
                for a in 0..aug {
                    for b in a..aug {
                        let v = r * y[a] * y[b];
                        scatter[(a, b)] += v;
                        if a != b {
                            scatter[(b, a)] += v;
                        }
                    }
                }
            }
            let g = (scatter - s.inv() * r_total) * (0.5 * scale);
            grads.push(SymMatrix::from_exact(sym_part(&g)));
        }
        let mut gw = DVector::zeros(self.k - 1);
        for jk in 0..self.k - 1 {
            let r_total: f64 = (0..rows.len()).map(|bi| resp[(bi, jk)]).sum();
            gw[jk] = scale * (rows.len() as f64 * w[jk] - r_total);
        }
        (grads, gw)
    }
}

fn parts_spd(point: &ProductPoint) -> Vec<&SpdMatrix> {
    point.parts().iter().map(|p| p.spd()).collect()
}

/// The GMM problem bound to a geometry over the product manifold of K SPD
/// components plus Euclidean logits.
pub struct GmmObjective<'p> {
    problem: &'p GmmProblem,
    geometry: Geometry,
}

impl<'p> GmmObjective<'p> {
    pub fn new(problem: &'p GmmProblem, geometry: Geometry) -> Self {
        Self { problem, geometry }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn convert_grad(
        &self,
        x: &ProductPoint,
        eg_parts: Vec<SymMatrix>,
        eg_w: DVector<f64>,
    ) -> GeoResult<ProductTangent> {
        let mut parts = Vec::with_capacity(eg_parts.len());
        for (p, eg) in x.parts().iter().zip(eg_parts.iter()) {
            parts.push(self.geometry.egrad_to_rgrad(p, eg)?);
        }
        Ok(ProductTangent {
            parts,
            weights: eg_w,
        })
    }

    /// Central-difference Euclidean Hessian along `u` in the flat parameter
    /// space `(Sym^{d+1})^K x R^{K-1}`, halving the step until both
    /// perturbed component matrices pass SPD admission.
    fn euclid_hess_fd(
        &self,
        x: &ProductPoint,
        u: &ProductTangent,
    ) -> GeoResult<(Vec<SymMatrix>, DVector<f64>)> {
        let s_list = parts_spd(x);
        let theta_norm = {
            let s2: f64 = s_list.iter().map(|s| s.mat().norm_squared()).sum();
            (s2 + x.weights().norm_squared()).sqrt()
        };
        let u_norm = {
            let p2: f64 = u.parts.iter().map(|p| p.norm().powi(2)).sum();
            (p2 + u.weights.norm_squared()).sqrt()
        };
        let mut h = f64::EPSILON.sqrt() * (1.0 + theta_norm) / u_norm.max(1e-16);
        let mut last_err: Option<GeometryError> = None;
        for _ in 0..10 {
            let shifted = |sign: f64| -> Result<(Vec<SpdMatrix>, DVector<f64>), GeometryError> {
                let mut list = Vec::with_capacity(s_list.len());
                for (s, du) in s_list.iter().zip(u.parts.iter()) {
                    let m = SpdMatrix::new(s.to_sym().add(&du.scaled(sign * h)))
                        .map_err(GeometryError::Inadmissible)?;
                    list.push(m);
                }
                Ok((list, x.weights() + u.weights.scale(sign * h)))
            };
            match (shifted(1.0), shifted(-1.0)) {
                (Ok((sp, wp)), Ok((sm, wm))) => {
                    let refs_p: Vec<&SpdMatrix> = sp.iter().collect();
                    let refs_m: Vec<&SpdMatrix> = sm.iter().collect();
                    let (gp, gwp) = self.problem.egrad_raw(&refs_p, &wp, None);
                    let (gm, gwm) = self.problem.egrad_raw(&refs_m, &wm, None);
                    let parts = gp
                        .iter()
                        .zip(gm.iter())
                        .map(|(a, b)| a.sub(b).scaled(0.5 / h))
                        .collect();
                    let weights = (gwp - gwm) * (0.5 / h);
                    return Ok((parts, weights));
                }
                (Err(e), _) | (_, Err(e)) => {
                    last_err = Some(e);
                    h *= 0.5;
                }
            }
        }
        Err(last_err.expect("loop ran"))
    }
}

impl Objective for GmmObjective<'_> {
    type Point = ProductPoint;
    type Tangent = ProductTangent;

    fn manifold_dim(&self) -> usize {
        let n = self.problem.aug_dim();
        self.problem.k * self.geometry.manifold_dim(n) + (self.problem.k - 1)
    }

    fn cost(&self, x: &ProductPoint) -> f64 {
        self.problem
            .neg_log_likelihood(&parts_spd(x), x.weights())
    }

    fn grad(&self, x: &ProductPoint) -> GeoResult<ProductTangent> {
        let (eg_parts, eg_w) = self.problem.egrad_raw(&parts_spd(x), x.weights(), None);
        self.convert_grad(x, eg_parts, eg_w)
    }

    fn hess_vec(&self, x: &ProductPoint, u: &ProductTangent) -> GeoResult<ProductTangent> {
        match self.geometry {
            Geometry::Le => {
                // Forward difference of the Riemannian gradient in the
                // linear parameter space.
                let theta_norm = {
                    let s2: f64 = x
                        .parts()
                        .iter()
                        .map(|p| p.log_param().expect("LE").norm().powi(2))
                        .sum();
                    (s2 + x.weights().norm_squared()).sqrt()
                };
                let u_norm = {
                    let p2: f64 = u.parts.iter().map(|p| p.norm().powi(2)).sum();
                    (p2 + u.weights.norm_squared()).sqrt()
                };
                let h = f64::EPSILON.sqrt() * (1.0 + theta_norm) / u_norm.max(1e-16);
                let shifted = x.exp(&u.scaled(h))?;
                let g1 = self.grad(&shifted)?;
                let g0 = self.grad(x)?;
                let mut out = g1;
                out.axpy(-1.0, &g0);
                Ok(out.scaled(1.0 / h))
            }
            _ => {
                let (eg_parts, _) = self.problem.egrad_raw(&parts_spd(x), x.weights(), None);
                let (eh_parts, eh_w) = self.euclid_hess_fd(x, u)?;
                let mut parts = Vec::with_capacity(eh_parts.len());
                for (i, p) in x.parts().iter().enumerate() {
                    parts.push(self.geometry.ehess_to_rhess(
                        p,
                        &eg_parts[i],
                        &eh_parts[i],
                        &u.parts[i],
                    )?);
                }
                Ok(ProductTangent {
                    parts,
                    weights: eh_w,
                })
            }
        }
    }

    fn inner(&self, x: &ProductPoint, u: &ProductTangent, v: &ProductTangent) -> f64 {
        x.inner(u, v).expect("inner on admitted product point")
    }

    fn retract(&self, x: &ProductPoint, u: &ProductTangent) -> GeoResult<ProductPoint> {
        x.exp(u)
    }

    fn observe(&self, x: &ProductPoint) -> Observation {
        let s_list = parts_spd(x);
        let (eg_parts, eg_w) = self.problem.egrad_raw(&s_list, x.weights(), None);
        let mut mod2 = eg_w.norm_squared();
        for (s, eg) in s_list.iter().zip(eg_parts.iter()) {
            mod2 += (s.mat() * eg.mat()).norm_squared();
        }
        Observation {
            loss: self.problem.neg_log_likelihood(&s_list, x.weights()),
            dist_to_sol: f64::NAN,
            egrad_mod_norm: mod2.sqrt(),
        }
    }
}

impl StochasticObjective for GmmObjective<'_> {
    fn num_samples(&self) -> usize {
        self.problem.num_samples()
    }

    fn batch_grad(&self, x: &ProductPoint, batch: &[usize]) -> GeoResult<ProductTangent> {
        let (eg_parts, eg_w) = self
            .problem
            .egrad_raw(&parts_spd(x), x.weights(), Some(batch));
        self.convert_grad(x, eg_parts, eg_w)
    }
}

/// A recovered mixture component in classical parameters.
#[derive(Debug, Clone)]
pub struct GmmComponent {
    pub mu: DVector<f64>,
    pub sigma: SymMatrix,
    pub weight: f64,
    /// False when the recovered covariance failed a PD check (boundary case).
    pub sigma_pd: bool,
}

/// Block map from classical parameters to the reformulated one:
/// `S = [[Sigma + mu muᵀ, mu], [muᵀ, 1]]^{-1}`.
pub fn params_to_s(mu: &DVector<f64>, sigma: &SymMatrix) -> SpdMatrix {
    let d = mu.len();
    assert_eq!(sigma.dim(), d);
    let mut aug = DMatrix::zeros(d + 1, d + 1);
    for a in 0..d {
        for b in 0..d {
            aug[(a, b)] = sigma.mat()[(a, b)] + mu[a] * mu[b];
        }
        aug[(a, d)] = mu[a];
        aug[(d, a)] = mu[a];
    }
    aug[(d, d)] = 1.0;
    let aug_spd = SpdMatrix::from_mat(aug).expect("augmented covariance is SPD");
    SpdMatrix::from_mat(aug_spd.inv().clone()).expect("inverse of SPD is SPD")
}

/// Inverts the block map: from `S_j` and logits to classical parameters.
pub fn recover_gmm_params(s_list: &[&SpdMatrix], omega: &DVector<f64>) -> Vec<GmmComponent> {
    let k = s_list.len();
    assert_eq!(omega.len(), k - 1);
    let mut logits = DVector::zeros(k);
    for j in 0..k - 1 {
        logits[j] = omega[j];
    }
    let max = logits.max();
    let exps = logits.map(|l| (l - max).exp());
    let total: f64 = exps.sum();
    s_list
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let inv = s.inv();
            let d = s.dim() - 1;
            let mu = DVector::from_fn(d, |a, _| inv[(a, d)]);
            let sigma = SymMatrix::from_fn(d, |a, b| inv[(a, b)] - mu[a] * mu[b]);
            let sigma_pd = SpdMatrix::new(sigma.clone()).is_ok();
            GmmComponent {
                mu,
                sigma,
                weight: exps[j] / total,
                sigma_pd,
            }
        })
        .collect()
}

/// Classical mixture log-likelihood
/// `sum_i log sum_j w_j N(x_i; mu_j, Sigma_j)`, the oracle the reformulated
/// likelihood is checked against.
pub fn classical_gmm_log_likelihood(
    samples_raw: &DMatrix<f64>,
    components: &[(DVector<f64>, SymMatrix, f64)],
) -> f64 {
    let n = samples_raw.nrows();
    let d = samples_raw.ncols();
    let prepped: Vec<(DVector<f64>, SpdMatrix, f64)> = components
        .iter()
        .map(|(mu, sigma, w)| {
            (
                mu.clone(),
                SpdMatrix::new(sigma.clone()).expect("covariance must be PD"),
                *w,
            )
        })
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        let x = samples_raw.row(i).transpose();
        let mut terms = Vec::with_capacity(prepped.len());
        for (mu, sigma, w) in &prepped {
            let diff = &x - mu;
            let quad = (diff.transpose() * sigma.inv() * &diff)[(0, 0)];
            let logp = -0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
                - 0.5 * sigma.log_det()
                - 0.5 * quad;
            terms.push(w.ln() + logp);
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        total += m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
    }
    total
}

/// kmeans++ seeding followed by one assignment pass; returns per-cluster
/// mean, ridged covariance, and weight.
pub fn kmeanspp_init(
    samples: &DMatrix<f64>,
    k: usize,
    seed: u64,
) -> Vec<(DVector<f64>, SymMatrix, f64)> {
    let n = samples.nrows();
    let d = samples.ncols();
    assert!(k >= 1 && n >= k);
    let mut rng = rng_from_seed(seed);
    let mut centers: Vec<DVector<f64>> = vec![samples.row(rng.random_range(0..n)).transpose()];
    let mut dist2 = vec![0.0f64; n];
    while centers.len() < k {
        let mut total = 0.0;
        for i in 0..n {
            let x = samples.row(i).transpose();
            let best = centers
                .iter()
                .map(|c| (&x - c).norm_squared())
                .fold(f64::INFINITY, f64::min);
            dist2[i] = best;
            total += best;
        }
        // Sample the next center proportionally to squared distance.
        let mut target = rng.random::<f64>() * total;
        let mut chosen = n - 1;
        for i in 0..n {
            target -= dist2[i];
            if target <= 0.0 {
                chosen = i;
                break;
            }
        }
        centers.push(samples.row(chosen).transpose());
    }
    // One hard-assignment pass.
    let mut assign = vec![0usize; n];
    for i in 0..n {
        let x = samples.row(i).transpose();
        let mut best = f64::INFINITY;
        for (j, c) in centers.iter().enumerate() {
            let dd = (&x - c).norm_squared();
            if dd < best {
                best = dd;
                assign[i] = j;
            }
        }
    }
    let global_var = {
        let mean = DVector::from_fn(d, |a, _| samples.column(a).mean());
        (0..n)
            .map(|i| (samples.row(i).transpose() - &mean).norm_squared())
            .sum::<f64>()
            / (n as f64 * d as f64)
    };
    (0..k)
        .map(|j| {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == j).collect();
            let count = members.len().max(1);
            let mut mu = DVector::zeros(d);
            for &i in &members {
                mu += samples.row(i).transpose();
            }
            mu /= count as f64;
            let mut cov = DMatrix::zeros(d, d);
            for &i in &members {
                let diff = samples.row(i).transpose() - &mu;
                cov += &diff * diff.transpose();
            }
            cov /= count as f64;
            // Ridge keeps degenerate clusters usable.
            for a in 0..d {
                cov[(a, a)] += 0.01 * global_var.max(1e-12);
            }
            (
                mu,
                SymMatrix::new(cov).expect("square"),
                members.len() as f64 / n as f64,
            )
        })
        .collect()
}

/// Builds the initial product point from classical component parameters.
pub fn gmm_initial_point(
    geometry: Geometry,
    components: &[(DVector<f64>, SymMatrix, f64)],
) -> ProductPoint {
    let k = components.len();
    let parts: Vec<ManifoldPoint> = components
        .iter()
        .map(|(mu, sigma, _)| ManifoldPoint::from_spd(geometry, params_to_s(mu, sigma)))
        .collect();
    let w_last = components[k - 1].2.max(1e-12);
    let weights = DVector::from_fn(k - 1, |j, _| (components[j].2.max(1e-12) / w_last).ln());
    ProductPoint::new(parts, weights).expect("homogeneous parts")
}
