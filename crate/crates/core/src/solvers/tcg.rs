//! Truncated conjugate gradient (Steihaug-Toint) for the trust-region
//! subproblem `min <g,u> + 1/2 <H[u],u>` subject to `||u|| <= delta` in the
//! metric norm.

use crate::manifold::{GeometryError, TangentArith};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcgReason {
    /// Gradient was already below tolerance; no iterations run.
    ZeroGrad,
    /// Hit a direction of nonpositive curvature and followed it to the
    /// boundary. A termination reason, not an error.
    NegativeCurvature,
    /// The CG iterate crossed the trust-region boundary.
    Boundary,
    /// Residual dropped below `||r0|| * min(kappa, ||r0||^theta)`.
    ResidualSmall,
    MaxInner,
}

impl TcgReason {
    /// True when the step ended on the trust-region boundary, which is the
    /// signal for growing the radius on strong agreement.
    pub fn hit_boundary(self) -> bool {
        matches!(self, TcgReason::NegativeCurvature | TcgReason::Boundary)
    }
}

#[derive(Debug)]
pub struct TcgResult<T> {
    pub u: T,
    /// Number of Hessian-vector products consumed.
    pub inner_iters: usize,
    pub reason: TcgReason,
    /// `m(0) - m(u) >= 0`, the model decrease achieved.
    pub model_decrease: f64,
}

/// Positive root of `||u + tau d||^2 = delta^2`.
fn boundary_tau(uu: f64, ud: f64, dd: f64, delta: f64) -> f64 {
    let disc = (ud * ud + dd * (delta * delta - uu)).max(0.0);
    (-ud + disc.sqrt()) / dd
}

pub fn truncated_cg<T, H, G>(
    mut hess: H,
    inner: G,
    grad: &T,
    delta: f64,
    kappa: f64,
    theta: f64,
    max_inner: usize,
) -> Result<TcgResult<T>, GeometryError>
where
    T: TangentArith,
    H: FnMut(&T) -> Result<T, GeometryError>,
    G: Fn(&T, &T) -> f64,
{
    assert!(delta > 0.0, "trust radius must be positive");
    let mut u = grad.zeros_like();
    let mut hu = grad.zeros_like();
    let mut r = grad.clone();
    let mut rr = inner(&r, &r);
    let r0_norm = rr.max(0.0).sqrt();
    if r0_norm == 0.0 {
        return Ok(TcgResult {
            u,
            inner_iters: 0,
            reason: TcgReason::ZeroGrad,
            model_decrease: 0.0,
        });
    }
    let stop_tol = r0_norm * kappa.min(r0_norm.powf(theta));
    let mut d = r.scaled(-1.0);

    let model_decrease = |u: &T, hu: &T| -> f64 {
        // m(0) - m(u) = -<g,u> - 1/2 <u, H u>
        -(inner(grad, u) + 0.5 * inner(u, hu))
    };

    for j in 0..max_inner {
        let hd = hess(&d)?;
        let dhd = inner(&d, &hd);
        let uu = inner(&u, &u);
        let ud = inner(&u, &d);
        let dd = inner(&d, &d);
        if dhd <= 0.0 {
            let tau = boundary_tau(uu, ud, dd, delta);
            u.axpy(tau, &d);
            hu.axpy(tau, &hd);
            let dec = model_decrease(&u, &hu);
            return Ok(TcgResult {
                u,
                inner_iters: j + 1,
                reason: TcgReason::NegativeCurvature,
                model_decrease: dec,
            });
        }
        let alpha = rr / dhd;
        // Would the step cross the boundary?
        if uu + 2.0 * alpha * ud + alpha * alpha * dd >= delta * delta {
            let tau = boundary_tau(uu, ud, dd, delta);
            u.axpy(tau, &d);
            hu.axpy(tau, &hd);
            let dec = model_decrease(&u, &hu);
            return Ok(TcgResult {
                u,
                inner_iters: j + 1,
                reason: TcgReason::Boundary,
                model_decrease: dec,
            });
        }
        u.axpy(alpha, &d);
        hu.axpy(alpha, &hd);
        r.axpy(alpha, &hd);
        let rr_new = inner(&r, &r);
        if rr_new.max(0.0).sqrt() <= stop_tol {
            let dec = model_decrease(&u, &hu);
            return Ok(TcgResult {
                u,
                inner_iters: j + 1,
                reason: TcgReason::ResidualSmall,
                model_decrease: dec,
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        let mut d_next = r.scaled(-1.0);
        d_next.axpy(beta, &d);
        d = d_next;
    }
    let dec = model_decrease(&u, &hu);
    Ok(TcgResult {
        u,
        inner_iters: max_inner,
        reason: TcgReason::MaxInner,
        model_decrease: dec,
    })
}
