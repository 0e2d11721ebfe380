//! Distance-to-`S` oracles for `S = {x : f_i(x) ≤ 0 for all i}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::VerifyError;
use crate::bounds::QuadraticBound;
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::polysys::{CompiledPoly, CompiledSystem, PolySystem};
use crate::rng;

/// A distance estimate with the nearest point found, when one is available.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub distance: f64,
    pub point: Option<Vec<f64>>,
}

pub trait DistanceOracle: Sync {
    fn project(&self, x: &[f64]) -> Result<Projection, VerifyError>;
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

/// Exact distance to a finite set `S`.
#[derive(Clone, Debug)]
pub struct FiniteSetOracle {
    points: Vec<Vec<f64>>,
}

impl FiniteSetOracle {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, VerifyError> {
        if points.is_empty() {
            return Err(VerifyError::EmptySet);
        }
        Ok(Self { points })
    }
}

impl DistanceOracle for FiniteSetOracle {
    fn project(&self, x: &[f64]) -> Result<Projection, VerifyError> {
        let (d, p) = self
            .points
            .iter()
            .map(|p| (dist(x, p), p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("nonempty");
        Ok(Projection {
            distance: d,
            point: Some(p.clone()),
        })
    }
}

/// Exact distance to the level set `f^{-1}(f(x̄))` of a quadratic.
#[derive(Clone, Debug)]
pub struct LevelSetOracle {
    quadratic: QuadraticBound,
}

impl LevelSetOracle {
    pub fn new(quadratic: QuadraticBound) -> Self {
        Self { quadratic }
    }
}

impl DistanceOracle for LevelSetOracle {
    fn project(&self, x: &[f64]) -> Result<Projection, VerifyError> {
        if x.len() != self.quadratic.dim() {
            return Err(VerifyError::Dimension {
                expected: self.quadratic.dim(),
                got: x.len(),
            });
        }
        Ok(Projection {
            distance: self.quadratic.level_set_distance(x),
            point: None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PenaltyConfig {
    pub starts: usize,
    pub penalties: Vec<f64>,
    pub tau_feas: f64,
    pub iterations: usize,
    /// Box searched by the feasibility pre-pass.
    pub search_box: Option<Vec<(f64, f64)>>,
    pub feasibility_samples: usize,
    pub seed: u64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            penalties: vec![1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8],
            tau_feas: 1e-9,
            iterations: 40,
            search_box: None,
            feasibility_samples: 4096,
            seed: 42,
        }
    }
}

const MAX_SEEDS: usize = 256;

/// Upper-bound distance estimator: multi-start quadratic-penalty descent,
/// Gauss–Newton restoration onto `S`, and a Newton polish of the KKT system.
/// Every returned distance is attained by a point with residual `≤ τ_feas`.
#[derive(Clone, Debug)]
pub struct PenaltyOracle {
    sys: CompiledSystem,
    hessians: Vec<Vec<Vec<CompiledPoly>>>,
    seeds: Vec<Vec<f64>>,
    cfg: PenaltyConfig,
}

impl PenaltyOracle {
    pub fn new(sys: &PolySystem, cfg: PenaltyConfig) -> Result<Self, VerifyError> {
        let n = sys.nvars();
        let hessians = sys
            .polys()
            .iter()
            .map(|f| {
                (0..n)
                    .map(|j| {
                        let dj = f.derivative(j);
                        (0..n).map(|k| CompiledPoly::new(&dj.derivative(k))).collect()
                    })
                    .collect()
            })
            .collect();
        let mut oracle = Self {
            sys: sys.compile(),
            hessians,
            seeds: Vec::new(),
            cfg,
        };
        oracle.seeds = oracle.feasibility_prepass();
        if oracle.seeds.is_empty() {
            return Err(VerifyError::EmptySet);
        }
        Ok(oracle)
    }

    /// Feasible points found by the pre-pass.
    pub fn seeds(&self) -> &[Vec<f64>] {
        &self.seeds
    }

    fn residual(&self, x: &[f64]) -> f64 {
        self.sys.residual(x)
    }

    fn feasibility_prepass(&self) -> Vec<Vec<f64>> {
        let n = self.sys.nvars();
        let bx = self
            .cfg
            .search_box
            .clone()
            .unwrap_or_else(|| vec![(-10.0, 10.0); n]);
        let mut rng = rng::stream(self.cfg.seed, &[0xfea5]);
        let mut pts: Vec<(f64, Vec<f64>)> = Vec::with_capacity(self.cfg.feasibility_samples + 1);
        pts.push((self.residual(&vec![0.0; n]), vec![0.0; n]));
        for _ in 0..self.cfg.feasibility_samples {
            let x: Vec<f64> = bx.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
            pts.push((self.residual(&x), x));
        }
        let mut seeds: Vec<Vec<f64>> = pts
            .iter()
            .filter(|(r, _)| *r <= self.cfg.tau_feas)
            .map(|(_, x)| x.clone())
            .take(MAX_SEEDS)
            .collect();
        let mut infeasible: Vec<&(f64, Vec<f64>)> =
            pts.iter().filter(|(r, _)| *r > self.cfg.tau_feas).collect();
        infeasible.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, x) in infeasible.into_iter().take(64) {
            if seeds.len() >= MAX_SEEDS {
                break;
            }
            if let Some(a) = self.restore(x) {
                if seeds.iter().all(|s| dist(s, &a) > 1e-6) {
                    seeds.push(a);
                }
            }
        }
        seeds
    }

    /// Gauss–Newton minimal-norm steps on the violated constraints until the
    /// residual is at most `τ_feas`.
    fn restore(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.sys.nvars();
        let margin = 0.25 * self.cfg.tau_feas;
        let merit = |a: &[f64]| -> f64 {
            self.sys
                .values(a)
                .iter()
                .map(|v| (v + margin).max(0.0).powi(2))
                .sum()
        };
        let mut a = x.to_vec();
        for _ in 0..100 {
            if self.residual(&a) <= self.cfg.tau_feas {
                return Some(a);
            }
            let vals = self.sys.values(&a);
            let viol: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] + margin > 0.0).collect();
            let mut jac = DMatrix::zeros(viol.len(), n);
            let mut rhs = DVector::zeros(viol.len());
            for (r, &i) in viol.iter().enumerate() {
                let g = self.sys.component(i).gradient(&a);
                for j in 0..n {
                    jac[(r, j)] = g[j];
                }
                rhs[r] = -(vals[i] + margin);
            }
            let mut gram = &jac * jac.transpose();
            let tr = gram.trace().max(f64::MIN_POSITIVE);
            for k in 0..viol.len() {
                gram[(k, k)] += 1e-14 * tr;
            }
            let y = gram.lu().solve(&rhs)?;
            let step = jac.transpose() * y;
            if !step.iter().all(|v| v.is_finite()) {
                return None;
            }
            let m0 = merit(&a);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(u, s)| u + t * s).collect();
                if merit(&trial) < m0 {
                    a = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                return None;
            }
        }
        (self.residual(&a) <= self.cfg.tau_feas).then_some(a)
    }

    /// Minimizes `½‖a − x‖² + ½μ Σ [f_i(a)]₊²` for each penalty in turn.
    fn penalty_path(&self, x: &[f64], start: &[f64]) -> Vec<f64> {
        let n = self.sys.nvars();
        let p = self.sys.len();
        let mut a = start.to_vec();
        for &mu in &self.cfg.penalties {
            let s = mu.sqrt();
            let residual = |a: &[f64]| -> Vec<f64> {
                let mut r: Vec<f64> = a.iter().zip(x).map(|(u, v)| u - v).collect();
                r.extend(self.sys.values(a).iter().map(|v| s * v.max(0.0)));
                r
            };
            let jacobian = |a: &[f64], r: &[f64]| -> DMatrix<f64> {
                let mut jac = DMatrix::zeros(n + p, n);
                for j in 0..n {
                    jac[(j, j)] = 1.0;
                }
                for i in 0..p {
                    if r[n + i] > 0.0 {
                        let g = self.sys.component(i).gradient(a);
                        for j in 0..n {
                            jac[(n + i, j)] = s * g[j];
                        }
                    }
                }
                jac
            };
            let opts = LmOptions {
                max_iter: self.cfg.iterations,
                ..Default::default()
            };
            a = levenberg_marquardt(&a, residual, jacobian, &opts).x;
        }
        a
    }

    /// Newton iteration on `a − x + Σ_A λ_i ∇f_i(a) = 0, f_A(a) = 0`, dropping
    /// constraints whose multiplier turns negative.
    fn polish(&self, x: &[f64], a0: &[f64]) -> Option<Vec<f64>> {
        let n = self.sys.nvars();
        let vals = self.sys.values(a0);
        let mut active: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > -1e-6 * (1.0 + vals[i].abs()))
            .collect();
        if active.is_empty() {
            return None;
        }
        'outer: for _ in 0..=self.sys.len() {
            let k = active.len();
            let mut a = a0.to_vec();
            let grads = |a: &[f64]| -> DMatrix<f64> {
                let mut jac = DMatrix::zeros(k, n);
                for (r, &i) in active.iter().enumerate() {
                    let g = self.sys.component(i).gradient(a);
                    for j in 0..n {
                        jac[(r, j)] = g[j];
                    }
                }
                jac
            };
            let jac = grads(&a);
            let diff = DVector::from_iterator(n, x.iter().zip(&a).map(|(u, v)| u - v));
            let mut lambda = jac
                .transpose()
                .svd(true, true)
                .solve(&diff, 1e-12)
                .ok()?;
            let mut converged = false;
            for _ in 0..30 {
                let jac = grads(&a);
                let mut kkt = DMatrix::zeros(n + k, n + k);
                for j in 0..n {
                    kkt[(j, j)] = 1.0;
                }
                for (r, &i) in active.iter().enumerate() {
                    for j in 0..n {
                        for l in 0..n {
                            kkt[(j, l)] += lambda[r] * self.hessians[i][j][l].eval(&a);
                        }
                        kkt[(n + r, j)] = jac[(r, j)];
                        kkt[(j, n + r)] = jac[(r, j)];
                    }
                }
                let mut rhs = DVector::zeros(n + k);
                let stat = DVector::from_iterator(n, a.iter().zip(x).map(|(u, v)| u - v))
                    + jac.transpose() * &lambda;
                for j in 0..n {
                    rhs[j] = -stat[j];
                }
                for (r, &i) in active.iter().enumerate() {
                    rhs[n + r] = -self.sys.component(i).eval(&a);
                }
                let step = kkt.lu().solve(&rhs)?;
                if !step.iter().all(|v| v.is_finite()) {
                    return None;
                }
                for j in 0..n {
                    a[j] += step[j];
                }
                for r in 0..k {
                    lambda[r] += step[n + r];
                }
                if step.amax() <= 1e-15 * (1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                    converged = true;
                    break;
                }
            }
            if let Some(r) = (0..k)
                .filter(|&r| lambda[r] < 0.0)
                .min_by(|&p, &q| lambda[p].total_cmp(&lambda[q]))
            {
                if k == 1 {
                    return None;
                }
                active.remove(r);
                continue 'outer;
            }
            if converged || self.residual(&a) <= self.cfg.tau_feas {
                return Some(a);
            }
            return None;
        }
        None
    }

    fn starts(&self, x: &[f64], nearest: &[&Vec<f64>]) -> Vec<Vec<f64>> {
        let bits: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let mut rng = rng::stream(self.cfg.seed, &bits);
        let sigma = 0.5 * dist(x, nearest[0]).max(1e-3);
        let mut out = vec![x.to_vec()];
        let mut k = 0;
        while out.len() < self.cfg.starts.max(1) {
            if k < nearest.len() {
                out.push(nearest[k].clone());
            }
            if out.len() < self.cfg.starts {
                let p: Vec<f64> = x
                    .iter()
                    .map(|v| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        v + sigma * g
                    })
                    .collect();
                out.push(p);
            }
            k += 1;
        }
        out
    }
}

impl DistanceOracle for PenaltyOracle {
    fn project(&self, x: &[f64]) -> Result<Projection, VerifyError> {
        let n = self.sys.nvars();
        if x.len() != n {
            return Err(VerifyError::Dimension {
                expected: n,
                got: x.len(),
            });
        }
        if self.residual(x) <= self.cfg.tau_feas {
            return Ok(Projection {
                distance: 0.0,
                point: Some(x.to_vec()),
            });
        }
        let mut nearest: Vec<&Vec<f64>> = self.seeds.iter().collect();
        nearest.sort_by(|a, b| dist(x, a).total_cmp(&dist(x, b)));
        let mut best = (dist(x, nearest[0]), nearest[0].clone());
        let consider = |a: Vec<f64>, best: &mut (f64, Vec<f64>)| {
            let d = dist(x, &a);
            if d < best.0 && self.residual(&a) <= self.cfg.tau_feas {
                *best = (d, a);
            }
        };
        if let Some(a) = self.restore(x) {
            if let Some(p) = self.polish(x, &a) {
                consider(p, &mut best);
            }
            consider(a, &mut best);
        }
        for start in self.starts(x, &nearest) {
            let a = self.penalty_path(x, &start);
            let Some(a) = self.restore(&a) else {
                continue;
            };
            if let Some(p) = self.polish(x, &a) {
                consider(p, &mut best);
            }
            consider(a, &mut best);
        }
        Ok(Projection {
            distance: best.0,
            point: Some(best.1),
        })
    }
}
