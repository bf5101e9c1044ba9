//! Dense symmetric/SPD matrix kernels.
//!
//! Everything the geometries need is built from a single symmetric
//! eigendecomposition per point: matrix functions `Q phi(Λ) Qᵀ`, Lyapunov
//! solves in the eigenbasis, the polar factor for Bures-Wasserstein
//! geodesics, and the Fréchet derivative of the matrix exponential via the
//! block-triangular trick.

use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;
use thiserror::Error;

/// Relative admission tolerance: a matrix is accepted as SPD iff
/// `lambda_min > SPD_ADMISSION_RTOL * max(1, lambda_max)`.
pub const SPD_ADMISSION_RTOL: f64 = 1e-12;

/// Largest eigenvalue argument accepted by the matrix exponential before
/// `exp` overflows f64 (`exp(709.78) ~ 1.8e308`).
pub const EXPM_MAX_EIGENVALUE: f64 = 709.0;

#[derive(Debug, Error)]
pub enum SymLinalgError {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("symmetric eigensolver failed to converge within {max_iters} iterations")]
    EigenFailed { max_iters: usize },
    #[error("matrix is not SPD: lambda_min = {lambda_min:.3e} <= {threshold:.3e}")]
    NotSpd { lambda_min: f64, threshold: f64 },
    #[error("scalar function undefined at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },
    #[error("matrix exponential overflow: eigenvalue {eigenvalue:.3e} exceeds {limit}")]
    ExpOverflow { eigenvalue: f64, limit: f64 },
    #[error("Lyapunov solve ill-posed: lambda_i + lambda_j = {sum:.3e} below tolerance")]
    IllPosed { sum: f64 },
}

pub type Result<T> = std::result::Result<T, SymLinalgError>;

/// Symmetric part `(A + Aᵀ)/2`.
pub fn sym_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = a.clone();
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// A dense real symmetric matrix. Symmetry is exact by construction:
/// `new` symmetrizes via `(A + Aᵀ)/2`, and all in-crate operations preserve
/// entrywise equality of mirrored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from an arbitrary square matrix, symmetrizing it.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(SymLinalgError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        Ok(Self {
            mat: sym_part(&mat),
        })
    }

    /// Builds from a matrix that is already exactly symmetric.
    /// Debug builds assert the claim.
    pub(crate) fn from_exact(mat: DMatrix<f64>) -> Self {
        debug_assert!(mat.nrows() == mat.ncols() && mat.nrows() > 0);
        debug_assert!((0..mat.nrows())
            .all(|i| (0..mat.ncols()).all(|j| mat[(i, j)].to_bits() == mat[(j, i)].to_bits())));
        Self { mat }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(d: &DVector<f64>) -> Self {
        Self {
            mat: DMatrix::from_diagonal(d),
        }
    }

    /// Fills entries from `f(i, j)` for `i <= j`, mirroring below the diagonal.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut mat = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        Self { mat }
    }

    /// Rank-one symmetric matrix `v vᵀ`.
    pub fn outer(v: &DVector<f64>) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Trace inner product `tr(A B)`; for symmetric A, B this is the
    /// entrywise dot product.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.mat.dotc(&other.mat)
    }

    pub fn scaled(&self, a: f64) -> SymMatrix {
        SymMatrix::from_exact(&self.mat * a)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix::from_exact(&self.mat + &other.mat)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix::from_exact(&self.mat - &other.mat)
    }

    /// `self + a * other`, in place.
    pub fn axpy(&mut self, a: f64, other: &SymMatrix) {
        self.mat.zip_apply(&other.mat, |s, o| *s += a * o);
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|&v| v == 0.0)
    }
}

fn eig_max_iters(n: usize) -> usize {
    200 * n.max(4) * n.max(4)
}

/// Symmetric eigendecomposition `A = Q diag(lambda) Qᵀ`, eigenvalues sorted
/// descending, `Q` orthogonal.
pub fn sym_eig(a: &SymMatrix) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = a.dim();
    let max_iters = eig_max_iters(n);
    let eig = nalgebra::SymmetricEigen::try_new(a.mat.clone(), f64::EPSILON, max_iters)
        .ok_or(SymLinalgError::EigenFailed { max_iters })?;
    // Sort descending, permuting eigenvector columns alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lambda = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut q = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((q, lambda))
}

/// A symmetric positive definite matrix with its eigendecomposition computed
/// once at construction and reused by every matrix function.
///
/// Admission rule: `lambda_min > SPD_ADMISSION_RTOL * max(1, lambda_max)`.
/// Square-root factors are materialized lazily and cached (write-once).
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    q: DMatrix<f64>,
    lambda: DVector<f64>,
    sqrt: OnceLock<DMatrix<f64>>,
    inv_sqrt: OnceLock<DMatrix<f64>>,
    inverse: OnceLock<DMatrix<f64>>,
}

impl SpdMatrix {
    pub fn new(sym: SymMatrix) -> Result<Self> {
        let (q, lambda) = sym_eig(&sym)?;
        Self::admit(sym.mat, q, lambda)
    }

    /// Builds from a raw square matrix (symmetrized first).
    pub fn from_mat(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(mat)?)
    }

    /// Builds from a known eigensystem; `lambda` must be sorted descending.
    /// The base matrix is reconstructed as `Q diag(lambda) Qᵀ`.
    pub fn from_eigen(q: DMatrix<f64>, lambda: DVector<f64>) -> Result<Self> {
        let mat = sym_part(&(&q * DMatrix::from_diagonal(&lambda) * q.transpose()));
        Self::admit(mat, q, lambda)
    }

    fn admit(mat: DMatrix<f64>, q: DMatrix<f64>, lambda: DVector<f64>) -> Result<Self> {
        let n = lambda.len();
        let lambda_max = lambda[0];
        let lambda_min = lambda[n - 1];
        let threshold = SPD_ADMISSION_RTOL * lambda_max.max(1.0);
        if !(lambda_min > threshold) {
            return Err(SymLinalgError::NotSpd {
                lambda_min,
                threshold,
            });
        }
        Ok(Self {
            mat,
            q,
            lambda,
            sqrt: OnceLock::new(),
            inv_sqrt: OnceLock::new(),
            inverse: OnceLock::new(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: DMatrix::identity(n, n),
            q: DMatrix::identity(n, n),
            lambda: DVector::from_element(n, 1.0),
            sqrt: OnceLock::new(),
            inv_sqrt: OnceLock::new(),
            inverse: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn to_sym(&self) -> SymMatrix {
        SymMatrix::from_exact(self.mat.clone())
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.lambda
    }

    /// Orthogonal eigenvector frame matching `eigenvalues()`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda[self.lambda.len() - 1]
    }

    pub fn cond(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn log_det(&self) -> f64 {
        self.lambda.iter().map(|l| l.ln()).sum()
    }

    /// Applies a scalar function through the eigendecomposition:
    /// `Q phi(Λ) Qᵀ`. Errors if `phi` is non-finite at any eigenvalue.
    pub fn fn_map(&self, phi: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let mapped = DVector::from_fn(self.lambda.len(), |i, _| phi(self.lambda[i]));
        for (i, v) in mapped.iter().enumerate() {
            if !v.is_finite() {
                return Err(SymLinalgError::Domain {
                    eigenvalue: self.lambda[i],
                });
            }
        }
        Ok(SymMatrix::from_exact(sym_part(
            &(&self.q * DMatrix::from_diagonal(&mapped) * self.q.transpose()),
        )))
    }

    /// Cached principal square root.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        self.sqrt.get_or_init(|| {
            let d = self.lambda.map(|l| l.sqrt());
            sym_part(&(&self.q * DMatrix::from_diagonal(&d) * self.q.transpose()))
        })
    }

    /// Cached inverse square root.
    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        self.inv_sqrt.get_or_init(|| {
            let d = self.lambda.map(|l| 1.0 / l.sqrt());
            sym_part(&(&self.q * DMatrix::from_diagonal(&d) * self.q.transpose()))
        })
    }

    /// Cached inverse.
    pub fn inv(&self) -> &DMatrix<f64> {
        self.inverse.get_or_init(|| {
            let d = self.lambda.map(|l| 1.0 / l);
            sym_part(&(&self.q * DMatrix::from_diagonal(&d) * self.q.transpose()))
        })
    }

    /// Matrix logarithm; inverse of `expm_sym` on the SPD cone.
    pub fn logm(&self) -> SymMatrix {
        self.fn_map(|l| l.ln()).expect("positive spectrum")
    }

    pub fn powf(&self, alpha: f64) -> Result<SymMatrix> {
        self.fn_map(|l| l.powf(alpha))
    }
}

/// Matrix exponential of a symmetric matrix; the result is SPD with
/// eigenvalues `exp(lambda_i)`.
pub fn expm_sym(s: &SymMatrix) -> Result<SpdMatrix> {
    let (q, lambda) = sym_eig(s)?;
    if lambda[0] > EXPM_MAX_EIGENVALUE {
        return Err(SymLinalgError::ExpOverflow {
            eigenvalue: lambda[0],
            limit: EXPM_MAX_EIGENVALUE,
        });
    }
    // exp is monotone, so the mapped spectrum stays descending.
    let exp_lambda = lambda.map(|l| l.exp());
    SpdMatrix::from_eigen(q, exp_lambda)
}

/// Solves `L X + X L = U` for the symmetric `L` in the eigenbasis of `X`:
/// `(Qᵀ U Q)_ij / (lambda_i + lambda_j)`, rotated back.
pub fn lyapunov_solve(x: &SpdMatrix, u: &SymMatrix) -> Result<SymMatrix> {
    if x.dim() != u.dim() {
        return Err(SymLinalgError::DimMismatch {
            left: x.dim(),
            right: u.dim(),
        });
    }
    let n = x.dim();
    let lambda = x.eigenvalues();
    let tol = 2.0 * SPD_ADMISSION_RTOL * x.lambda_max().max(1.0);
    let mut w = x.eigenvectors().transpose() * u.mat() * x.eigenvectors();
    for i in 0..n {
        for j in 0..n {
            let sum = lambda[i] + lambda[j];
            if sum <= tol {
                return Err(SymLinalgError::IllPosed { sum });
            }
            w[(i, j)] /= sum;
        }
    }
    Ok(SymMatrix::from_exact(sym_part(
        &(x.eigenvectors() * w * x.eigenvectors().transpose()),
    )))
}

/// Orthogonal polar factor `P = U Vᵀ` of `Y^{1/2} X^{1/2} = U Σ Vᵀ`, the
/// rotation appearing in the Bures-Wasserstein geodesic.
pub fn polar_factor(x: &SpdMatrix, y: &SpdMatrix) -> Result<DMatrix<f64>> {
    if x.dim() != y.dim() {
        return Err(SymLinalgError::DimMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let product = y.sqrt() * x.sqrt();
    let svd = product.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    Ok(u * v_t)
}

/// Matrix exponential of `S` together with its Fréchet (directional)
/// derivative along `V`, computed from the exponential of the block
/// matrix `[[S, V], [0, S]]` whose upper-right block is the derivative.
pub fn expm_frechet(s: &SymMatrix, v: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    if s.dim() != v.dim() {
        return Err(SymLinalgError::DimMismatch {
            left: s.dim(),
            right: v.dim(),
        });
    }
    let n = s.dim();
    // Guard against overflow before running the dense exponential.
    let (_, lambda) = sym_eig(s)?;
    if lambda[0] > EXPM_MAX_EIGENVALUE {
        return Err(SymLinalgError::ExpOverflow {
            eigenvalue: lambda[0],
            limit: EXPM_MAX_EIGENVALUE,
        });
    }
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(s.mat());
    block.view_mut((n, n), (n, n)).copy_from(s.mat());
    block.view_mut((0, n), (n, n)).copy_from(v.mat());
    let e = block.exp();
    let expm = SymMatrix::new(e.view((0, 0), (n, n)).into_owned())?;
    let deriv = SymMatrix::new(e.view((0, n), (n, n)).into_owned())?;
    Ok((expm, deriv))
}
