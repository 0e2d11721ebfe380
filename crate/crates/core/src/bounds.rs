//! Explicit Hölder exponents, the single-quadratic special case, and the
//! stability radius of the perturbed feasible-set map.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::polysys::{rational_to_f64, ExponentVector, PolySystem, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("matrix must be square and symmetric")]
    NotSymmetric,
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no critical point: A x + b = 0 is inconsistent (residual {residual:.3e})")]
    Inconsistent { residual: f64 },
    #[error("component has degree {0}; a quadratic is required")]
    NotQuadratic(u32),
}

/// `𝓗(d, n, p) = d·(6d − 3)^{n+p−1}`.
pub fn h_value(d: u32, n: u32, p: u32) -> BigInt {
    let d = BigInt::from(d);
    let base = BigInt::from(6) * &d - BigInt::from(3);
    d * num_traits::pow(base, (n + p - 1) as usize)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Assumptions {
    pub convenient: Option<bool>,
    pub nondegenerate_probable: Option<bool>,
}

/// Exponents `α = 2/𝓗(2d, n, p)` and `β = 1` of the global error bound
/// `c·d(x,S) ≤ [f]_+^α + [f]_+^β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentReport {
    pub d: u32,
    pub n: u32,
    pub p: u32,
    pub h: BigInt,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub assumptions: Assumptions,
    pub notes: Vec<String>,
}

pub const PARTITION_NOTE: &str = "d=4, p=1: alpha = 2/H(8,n,1) = 1/(4*45^n); the partition-problem \
value 1/(8*45^n) sometimes quoted is smaller and is not used here";
pub const P_EXCEEDS_N_NOTE: &str =
    "p > n: the error bound is established only for p <= n; the exponent formula is evaluated anyway";

pub fn holder_exponent(d: u32, n: u32, p: u32) -> Result<ExponentReport, BoundsError> {
    for (name, v) in [("d", d), ("n", n), ("p", p)] {
        if v == 0 {
            return Err(BoundsError::NonPositive {
                name,
                value: v as f64,
            });
        }
    }
    let h = h_value(2 * d, n, p);
    let alpha = BigRational::new(BigInt::from(2), h.clone());
    let mut notes = Vec::new();
    if p > n {
        notes.push(P_EXCEEDS_N_NOTE.to_string());
    }
    if d == 4 && p == 1 {
        notes.push(PARTITION_NOTE.to_string());
    }
    Ok(ExponentReport {
        d,
        n,
        p,
        h,
        alpha,
        beta: BigRational::one(),
        assumptions: Assumptions::default(),
        notes,
    })
}

/// Exponent report for a parsed system (`d = max deg f_i`).
pub fn exponent_for_system(sys: &PolySystem) -> Result<ExponentReport, BoundsError> {
    holder_exponent(sys.degree(), sys.nvars() as u32, sys.len() as u32)
}

impl ExponentReport {
    pub fn alpha_f64(&self) -> f64 {
        rational_to_f64(&self.alpha)
    }

    pub fn alpha_string(&self) -> String {
        format!("{}/{}", self.alpha.numer(), self.alpha.denom())
    }

    pub fn to_json(&self) -> ExponentJson {
        ExponentJson {
            d: self.d,
            n: self.n,
            p: self.p,
            h: self.h.to_string(),
            alpha: self.alpha_string(),
            beta: self.beta.to_string(),
            assumptions: self.assumptions.clone(),
            notes: self.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentJson {
    pub d: u32,
    pub n: u32,
    pub p: u32,
    #[serde(rename = "H")]
    pub h: String,
    pub alpha: String,
    pub beta: String,
    pub assumptions: Assumptions,
    pub notes: Vec<String>,
}

/// Relative cutoff below which an eigenvalue counts as zero.
pub const EIGEN_ZERO_REL: f64 = 1e-10;

/// `f(x) = ½ xᵀAx + bᵀx + c0` with its critical point and the constant
/// `√(2λ(A))/2` of the square-root error bound to its critical level set.
#[derive(Clone, Debug)]
pub struct QuadraticBound {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c0: f64,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub lambda_min_nonzero: f64,
    pub constant: f64,
    pub critical_point: DVector<f64>,
    pub critical_value: f64,
    zero_cut: f64,
}

pub fn quadratic_bound(
    a: DMatrix<f64>,
    b: DVector<f64>,
    c0: f64,
) -> Result<QuadraticBound, BoundsError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(BoundsError::NotSymmetric);
    }
    if b.len() != n {
        return Err(BoundsError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let scale = a.amax();
    if scale == 0.0 {
        return Err(BoundsError::ZeroMatrix);
    }
    if (&a - a.transpose()).amax() > 1e-12 * scale {
        return Err(BoundsError::NotSymmetric);
    }
    let eig = SymmetricEigen::new(a.clone());
    let max_abs = eig.eigenvalues.amax();
    let zero_cut = EIGEN_ZERO_REL * max_abs;
    let lambda_min_nonzero = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .filter(|&l| l > zero_cut)
        .fold(f64::INFINITY, f64::min);

    // least-squares critical point  x̄ = −A⁺ b
    let mut xbar = DVector::zeros(n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > zero_cut {
            let v = eig.eigenvectors.column(i);
            xbar -= v * (v.dot(&b) / lam);
        }
    }
    let residual = (&a * &xbar + &b).norm();
    if residual > 1e-9 * (1.0 + b.norm()) {
        return Err(BoundsError::Inconsistent { residual });
    }
    let critical_value = 0.5 * xbar.dot(&(&a * &xbar)) + b.dot(&xbar) + c0;
    Ok(QuadraticBound {
        constant: (2.0 * lambda_min_nonzero).sqrt() / 2.0,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        lambda_min_nonzero,
        critical_point: xbar,
        critical_value,
        zero_cut,
        a,
        b,
        c0,
    })
}

/// Reads `A`, `b`, `c0` off a polynomial of degree ≤ 2 so that
/// `f = ½ xᵀAx + bᵀx + c0`.
pub fn quadratic_from_polynomial(
    f: &Polynomial,
) -> Result<(DMatrix<f64>, DVector<f64>, f64), BoundsError> {
    if f.degree() > 2 {
        return Err(BoundsError::NotQuadratic(f.degree()));
    }
    let n = f.nvars();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut c0 = 0.0;
    for (k, c) in f.terms() {
        let c = rational_to_f64(c);
        let nz: Vec<(usize, u32)> = k
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| (j, e))
            .collect();
        match nz.as_slice() {
            [] => c0 = c,
            [(j, 1)] => b[*j] = c,
            [(j, 2)] => a[(*j, *j)] = 2.0 * c,
            [(i, 1), (j, 1)] => {
                a[(*i, *j)] = c;
                a[(*j, *i)] = c;
            }
            _ => unreachable!("degree checked"),
        }
    }
    Ok((a, b, c0))
}

impl QuadraticBound {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        0.5 * x.dot(&(&self.a * &x)) + self.b.dot(&x) + self.c0
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (&self.a * x + &self.b).iter().copied().collect()
    }

    /// The polynomial `½ xᵀAx + bᵀx + c0` with coefficients rounded to rationals.
    pub fn to_polynomial(&self) -> Polynomial {
        let n = self.dim();
        let q = |v: f64| BigRational::from_float(v).unwrap_or_default();
        let mut terms = Vec::new();
        for i in 0..n {
            terms.push((ExponentVector::axis(n, i, 2), q(0.5 * self.a[(i, i)])));
            for j in (i + 1)..n {
                let mut k = vec![0u32; n];
                k[i] = 1;
                k[j] = 1;
                terms.push((ExponentVector::new(k), q(self.a[(i, j)])));
            }
            terms.push((ExponentVector::axis(n, i, 1), q(self.b[i])));
        }
        terms.push((ExponentVector::zero(n), q(self.c0)));
        Polynomial::from_terms(n, terms).expect("sized")
    }

    /// Exact Euclidean distance from `x` to the level set `{f = f(x̄)}`.
    ///
    /// In eigen-coordinates `z = Rᵀ(x − x̄)` the level set is the cone
    /// `Σ λ_i w_i² = 0`. Global minimizers of `‖w − z‖²` on it are the
    /// Lagrange point with `I + μΛ ⪰ 0`, an endpoint of that μ-interval, or
    /// the cone's apex; all three are evaluated and the least is returned.
    pub fn level_set_distance(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(x) - &self.critical_point;
        let z = self.eigenvectors.transpose() * diff;
        let lam: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l.abs() > self.zero_cut { l } else { 0.0 })
            .collect();
        let idx: Vec<usize> = (0..lam.len()).filter(|&i| lam[i] != 0.0).collect();
        let g: f64 = idx.iter().map(|&i| lam[i] * z[i] * z[i]).sum();
        let zscale: f64 = idx.iter().map(|&i| z[i] * z[i]).sum::<f64>();
        if zscale == 0.0 || g == 0.0 {
            return 0.0;
        }
        // apex of the cone
        let mut best = zscale;

        let lam_pos = idx.iter().map(|&i| lam[i]).fold(0.0f64, f64::max);
        let lam_neg = idx.iter().map(|&i| lam[i]).fold(0.0f64, f64::min);
        if lam_pos == 0.0 || lam_neg == 0.0 {
            return best.sqrt();
        }
        let lo = -1.0 / lam_pos;
        let hi = -1.0 / lam_neg;
        let phi = |mu: f64| -> f64 {
            idx.iter()
                .map(|&i| {
                    let s = 1.0 + mu * lam[i];
                    lam[i] * z[i] * z[i] / (s * s)
                })
                .sum()
        };
        let dist2_at = |mu: f64| -> f64 {
            idx.iter()
                .map(|&i| {
                    let w = z[i] / (1.0 + mu * lam[i]);
                    (z[i] - w) * (z[i] - w)
                })
                .sum()
        };
        // φ decreases on (lo, hi); look for a sign change
        let width = hi - lo;
        let inner_a = lo + width * 1e-15;
        let inner_b = hi - width * 1e-15;
        if phi(inner_a) > 0.0 && phi(inner_b) < 0.0 {
            let (mut a, mut b) = (inner_a, inner_b);
            for _ in 0..400 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if phi(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let mu = 0.5 * (a + b);
            best = best.min(dist2_at(mu));
        }
        // endpoints: eigen-directions with vanishing z absorb the slack
        let ztol = 1e-14 * zscale.sqrt();
        for &mu in &[lo, hi] {
            let lam_k = -1.0 / mu;
            let in_k = |i: usize| (lam[i] - lam_k).abs() <= 1e-12 * lam_k.abs();
            if idx.iter().any(|&i| in_k(i) && z[i].abs() > ztol) {
                continue;
            }
            let mut s = 0.0;
            let mut d2 = 0.0;
            for &i in idx.iter().filter(|&&i| !in_k(i)) {
                let w = z[i] / (1.0 + mu * lam[i]);
                s += lam[i] * w * w;
                d2 += (z[i] - w) * (z[i] - w);
            }
            let t2 = -s / lam_k;
            if t2 >= 0.0 {
                best = best.min(d2 + t2);
            }
        }
        best.sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticJson {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c0: f64,
    pub eigenvalues: Vec<f64>,
    pub lambda_min_nonzero: f64,
    pub constant: f64,
    pub critical_point: Vec<f64>,
    pub critical_value: f64,
}

impl QuadraticBound {
    pub fn to_json(&self) -> QuadraticJson {
        let n = self.dim();
        QuadraticJson {
            a: (0..n)
                .map(|i| (0..n).map(|j| self.a[(i, j)]).collect())
                .collect(),
            b: self.b.iter().copied().collect(),
            c0: self.c0,
            eigenvalues: self.eigenvalues.iter().copied().collect(),
            lambda_min_nonzero: self.lambda_min_nonzero,
            constant: self.constant,
            critical_point: self.critical_point.iter().copied().collect(),
            critical_value: self.critical_value,
        }
    }
}

/// Radius `c·(‖y‖^α + ‖y‖)` of the ball around `S(0)` containing `S(y)`.
pub fn stability_radius(y: &[f64], c: f64, rep: &ExponentReport) -> Result<f64, BoundsError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(BoundsError::NonPositive { name: "c", value: c });
    }
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let alpha = rep.alpha.to_f64().unwrap_or(0.0);
    Ok(c * (norm.powf(alpha) + norm))
}
