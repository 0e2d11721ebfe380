//! Nonsmooth slope of `f = max_i f_i` as the minimum-norm point of the
//! convex hull of the active gradients.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::polysys::CompiledSystem;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slope {
    /// `min ‖Σ λ_i ∇f_i(x)‖` over the simplex on the active set.
    pub value: f64,
    /// Optimal weights, one per component; zero off the active set.
    pub lambda: Vec<f64>,
    pub active: Vec<usize>,
}

/// Default active-set tolerance `1e-8·(1 + |f(x)|)`.
pub fn default_tau_active(fx: f64) -> f64 {
    1e-8 * (1.0 + fx.abs())
}

/// Slope at `x` with `I(x) = {i : f(x) − f_i(x) ≤ τ_active}`.
pub fn slope(sys: &CompiledSystem, x: &[f64], tau_active: Option<f64>) -> Slope {
    let values = sys.values(x);
    let fx = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tau = tau_active.unwrap_or_else(|| default_tau_active(fx));
    let active: Vec<usize> = (0..values.len())
        .filter(|&i| fx - values[i] <= tau)
        .collect();
    let grads: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| sys.component(i).gradient(x))
        .collect();
    let (point, weights) = min_norm_point(&grads);
    let mut lambda = vec![0.0; values.len()];
    for (&i, w) in active.iter().zip(&weights) {
        lambda[i] += w;
    }
    Slope {
        value: norm(&point),
        lambda,
        active,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn combine(points: &[Vec<f64>], idx: &[usize], w: &[f64]) -> Vec<f64> {
    let n = points[0].len();
    let mut out = vec![0.0; n];
    for (&i, &wi) in idx.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(&points[i]) {
            *o += wi * v;
        }
    }
    out
}

/// Affine-hull minimizer of the points in `idx`: weights `v` with `Σ v = 1`
/// minimizing `‖Σ v_i P_i‖`.
fn affine_minimizer(points: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = dot(&points[idx[a]], &points[idx[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            m.svd(true, true)
                .solve(&rhs, 1e-12)
                .expect("SVD factors were requested")
        });
    sol.iter().take(k).copied().collect()
}

/// Wolfe's minimum-norm-point procedure over `conv(points)`. Returns the point
/// and its convex weights in the input order.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = points.len();
    assert!(m > 0, "min-norm point of an empty set");
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    let start = (0..m)
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .expect("nonempty");
    let mut corral = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * m + 50) {
        let xx = dot(&x, &x);
        let j = (0..m)
            .min_by(|&a, &b| dot(&x, &points[a]).total_cmp(&dot(&x, &points[b])))
            .expect("nonempty");
        if xx - dot(&x, &points[j]) <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        w.push(0.0);
        loop {
            let v = affine_minimizer(points, &corral);
            if v.iter().all(|&vi| vi > 1e-14) {
                w = v;
                break;
            }
            let theta = corral
                .iter()
                .enumerate()
                .filter(|&(k, _)| v[k] <= 1e-14)
                .map(|(k, _)| w[k] / (w[k] - v[k]))
                .filter(|t| t.is_finite())
                .fold(1.0f64, f64::min)
                .clamp(0.0, 1.0);
            for k in 0..w.len() {
                w[k] = theta * v[k] + (1.0 - theta) * w[k];
            }
            let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 1e-14).collect();
            corral = keep.iter().map(|&k| corral[k]).collect();
            w = keep.iter().map(|&k| w[k]).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            if corral.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        x = combine(points, &corral, &w);
    }

    let mut weights = vec![0.0; m];
    for (&i, wi) in corral.iter().zip(&w) {
        weights[i] += wi;
    }
    (x, weights)
}
