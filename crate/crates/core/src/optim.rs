//! Bounded Levenberg–Marquardt for small nonlinear least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub(crate) struct LmOptions {
    pub max_iter: usize,
    /// Stop once `½‖r‖²` falls to this value.
    pub target: f64,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            target: 0.0,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct LmResult {
    pub x: Vec<f64>,
}

fn half_norm2(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn clamp(x: &mut [f64], opts: &LmOptions) {
    if let Some(lo) = &opts.lower {
        for (v, l) in x.iter_mut().zip(lo) {
            *v = v.max(*l);
        }
    }
    if let Some(hi) = &opts.upper {
        for (v, h) in x.iter_mut().zip(hi) {
            *v = v.min(*h);
        }
    }
}

/// Forward-difference Jacobian of `residual` at `x`, where `r = residual(x)`.
pub(crate) fn fd_jacobian<R>(residual: &R, x: &[f64], r: &[f64]) -> DMatrix<f64>
where
    R: Fn(&[f64]) -> Vec<f64>,
{
    let mut jac = DMatrix::zeros(r.len(), x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-7 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let rp = residual(&xp);
        for (i, (a, b)) in rp.iter().zip(r).enumerate() {
            jac[(i, j)] = (a - b) / h;
        }
        xp[j] = x[j];
    }
    jac
}

/// Minimizes `½‖r(x)‖²` from `x0`, keeping iterates inside the optional box.
/// The returned cost never exceeds the cost at the (clamped) start.
pub(crate) fn levenberg_marquardt<R, J>(
    x0: &[f64],
    residual: R,
    jacobian: J,
    opts: &LmOptions,
) -> LmResult
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64], &[f64]) -> DMatrix<f64>,
{
    let mut x = x0.to_vec();
    clamp(&mut x, opts);
    let mut r = residual(&x);
    let mut cost = half_norm2(&r);
    let mut lambda = 1e-3;
    let n = x.len();
    for _ in 0..opts.max_iter {
        if cost <= opts.target || !cost.is_finite() {
            break;
        }
        let jac = jacobian(&x, &r);
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        if g.amax() == 0.0 {
            break;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut m = a.clone();
            for j in 0..n {
                m[(j, j)] += lambda * (a[(j, j)] + 1e-12);
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut trial, opts);
            let rt = residual(&trial);
            let ct = half_norm2(&rt);
            if ct.is_finite() && ct < cost {
                let moved = trial
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = trial;
                r = rt;
                let rel = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-15 && moved > 0.0;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    LmResult { x }
}
