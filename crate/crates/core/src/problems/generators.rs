//! Deterministic data generators for the benchmark problems. Every
//! generator takes an explicit seed; identical seeds give identical data.

use crate::symlinalg::{SpdMatrix, SymMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix via sign-fixed QR of a Gaussian.
pub fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = standard_normal_matrix(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random SPD matrix with eigenvalues log-uniform in `[lo, hi]` and a
/// Haar-random frame; generic sampler used by probes and tests.
pub fn gen_spd_loguniform(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> SpdMatrix {
    assert!(lo > 0.0 && hi >= lo);
    let q = haar_orthogonal(n, rng);
    let mut eigs: Vec<f64> = (0..n)
        .map(|_| {
            let t: f64 = rng.random();
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    SpdMatrix::from_eigen(q, DVector::from_vec(eigs)).expect("positive spectrum")
}

/// Random symmetric matrix with unit Frobenius norm.
pub fn gen_unit_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let s = SymMatrix::new(standard_normal_matrix(n, n, rng)).expect("square");
    let norm = s.norm();
    s.scaled(1.0 / norm)
}

/// SPD matrix with exponentially decaying eigenvalues
/// `lambda_i = kappa^{-(i-1)/(n-1)}` (condition number exactly `kappa`)
/// in a Haar-random orthogonal frame.
pub fn gen_spd_expdecay(n: usize, kappa: f64, seed: u64) -> SpdMatrix {
    assert!(n >= 1 && kappa >= 1.0);
    let mut rng = rng_from_seed(seed);
    let q = haar_orthogonal(n, &mut rng);
    let lambda = DVector::from_fn(n, |i, _| {
        if n == 1 {
            1.0
        } else {
            kappa.powf(-(i as f64) / (n as f64 - 1.0))
        }
    });
    SpdMatrix::from_eigen(q, lambda).expect("positive spectrum")
}

/// Rank-`r` target for the Lyapunov family: full-rank Wishart `G Gᵀ` when
/// `r == n`, otherwise the diagonal matrix with `r` ones and `n - r` zeros.
/// Low-rank targets are PSD, not SPD, so the result is a plain symmetric
/// matrix.
pub fn gen_wishart(n: usize, r: usize, seed: u64) -> SymMatrix {
    assert!(r >= 1 && r <= n);
    if r == n {
        let mut rng = rng_from_seed(seed);
        let g = standard_normal_matrix(n, n, &mut rng);
        SymMatrix::new(&g * g.transpose()).expect("square")
    } else {
        SymMatrix::from_fn(n, |i, j| if i == j && i < r { 1.0 } else { 0.0 })
    }
}

/// Five-point finite-difference Laplacian on a `p x p` interior grid of the
/// unit square: `T (+) T` with `T = tridiag(-1, 2, -1)`, size `n = p^2`,
/// diagonal 4 and off-diagonal -1 pattern.
pub fn gen_laplace2d(points_per_side: usize) -> SpdMatrix {
    let p = points_per_side;
    assert!(p >= 1);
    let mut t = DMatrix::zeros(p, p);
    for i in 0..p {
        t[(i, i)] = 2.0;
        if i + 1 < p {
            t[(i, i + 1)] = -1.0;
            t[(i + 1, i)] = -1.0;
        }
    }
    let eye = DMatrix::<f64>::identity(p, p);
    let a = t.kronecker(&eye) + eye.kronecker(&t);
    SpdMatrix::from_mat(a).expect("discrete Laplacian is SPD")
}

/// Symmetric positive definite Toeplitz matrix with first column
/// `(3, -1, -1/2, -1/4, ..., -2^{2-k})`; diagonally dominant, hence PD.
pub fn gen_toeplitz(n: usize) -> SpdMatrix {
    assert!(n >= 1);
    let col: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => 3.0,
            _ => -2.0f64.powi(1 - k as i32),
        })
        .collect();
    let a = SymMatrix::from_fn(n, |i, j| col[j - i]);
    SpdMatrix::new(a).expect("diagonally dominant Toeplitz is SPD")
}

/// Symmetric 0/1 sparsity mask with the given off-diagonal density and the
/// diagonal always present (for the sparse weighted-least-squares case).
pub fn gen_sparse_mask(n: usize, density: f64, seed: u64) -> SymMatrix {
    let mut rng = rng_from_seed(seed);
    SymMatrix::from_fn(n, |i, j| {
        if i == j || rng.random::<f64>() < density {
            1.0
        } else {
            0.0
        }
    })
}

/// Trace regression data: rank-`r` Wishart target `X* = G Gᵀ` (`G` is
/// `d x r` Gaussian), measurement vectors `a_i ~ N(0, I_d)`, responses
/// `y_i = a_iᵀ X* a_i + sigma * eps_i`.
pub struct TraceData {
    /// `m x d`, row `i` is the measurement vector `a_i`.
    pub a_rows: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_star: SymMatrix,
}

pub fn gen_trace_data(m: usize, d: usize, r: usize, sigma: f64, seed: u64) -> TraceData {
    assert!(m >= 1 && r >= 1 && r <= d);
    let mut rng = rng_from_seed(seed);
    let g = standard_normal_matrix(d, r, &mut rng);
    let x_star = SymMatrix::new(&g * g.transpose()).expect("square");
    let a_rows = standard_normal_matrix(m, d, &mut rng);
    let y = DVector::from_fn(m, |i, _| {
        let a_i = a_rows.row(i).transpose();
        let noise: f64 = rng.sample(StandardNormal);
        (a_i.transpose() * x_star.mat() * &a_i)[(0, 0)] + sigma * noise
    });
    TraceData { a_rows, y, x_star }
}

/// Labeled Gaussian blobs for metric-learning experiments: `classes` blobs
/// in `R^d` with unit-ish anisotropic spread, roughly equal class sizes.
pub fn gen_labeled_blobs(
    n_samples: usize,
    d: usize,
    classes: usize,
    seed: u64,
) -> (DMatrix<f64>, Vec<usize>) {
    assert!(classes >= 1 && n_samples >= classes);
    let mut rng = rng_from_seed(seed);
    let centers = standard_normal_matrix(classes, d, &mut rng) * 3.0;
    let scales: Vec<f64> = (0..d).map(|_| 0.5 + rng.random::<f64>()).collect();
    let mut data = DMatrix::zeros(n_samples, d);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let c = i % classes;
        labels.push(c);
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            data[(i, j)] = centers[(c, j)] + scales[j] * noise;
        }
    }
    (data, labels)
}

/// Synthetic stand-in for the 1580-sample, 2-d, 3-component mixture dataset:
/// Gaussian blobs with distinct means and anisotropic covariances.
/// Returns the samples and the generating `(mean, covariance, weight)`
/// triples.
pub fn gen_gmm_synthetic(seed: u64) -> (DMatrix<f64>, Vec<(DVector<f64>, SymMatrix, f64)>) {
    let mut rng = rng_from_seed(seed);
    let comps: Vec<(DVector<f64>, DMatrix<f64>, f64)> = vec![
        (
            DVector::from_vec(vec![-2.5, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.9, 0.4, 0.4, 0.3]),
            0.3,
        ),
        (
            DVector::from_vec(vec![2.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.5, -0.3, -0.3, 1.1]),
            0.4,
        ),
        (
            DVector::from_vec(vec![0.5, -2.0]),
            DMatrix::from_row_slice(2, 2, &[1.4, 0.2, 0.2, 0.25]),
            0.3,
        ),
    ];
    let n_total = 1580usize;
    let counts = [474usize, 632, 474];
    let mut samples = DMatrix::zeros(n_total, 2);
    let mut row = 0;
    let mut out = Vec::new();
    for ((mu, sigma, w), count) in comps.into_iter().zip(counts) {
        // Cholesky factor for sampling.
        let chol = sigma.clone().cholesky().expect("component covariance PD");
        let l = chol.l();
        for _ in 0..count {
            let z = DVector::from_fn(2, |_, _| rng.sample(StandardNormal));
            let x = &mu + &l * z;
            samples.set_row(row, &x.transpose());
            row += 1;
        }
        out.push((mu, SymMatrix::new(sigma).expect("square"), w));
    }
    assert_eq!(row, n_total);
    (samples, out)
}
