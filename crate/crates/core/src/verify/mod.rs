//! Empirical checks of the Hölder global error bound
//! `c·d(x, S) ≤ [f(x)]₊^α + [f(x)]₊` for `S = {x : f_i(x) ≤ 0}`.
//!
//! Distances come from a [`DistanceOracle`]. The generic [`PenaltyOracle`]
//! returns upper bounds attained by feasible points, so every ratio it yields
//! is a lower bound of the true ratio and the fitted constant stays valid.

mod oracle;
mod probe;
mod slope;

use std::io::Write;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::ExponentReport;
use crate::exec::Execution;
use crate::polysys::{CompiledSystem, PolyError, PolySystem};
use crate::rng;

pub use oracle::{
    DistanceOracle, FiniteSetOracle, LevelSetOracle, PenaltyConfig, PenaltyOracle, Projection,
};
pub use probe::{probe_goodness, GoodnessProbe, RingFloor, Trend};
pub use slope::{default_tau_active, min_norm_point, slope, Slope};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("S possibly empty: no feasible point found within budget")]
    EmptySet,
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid sample plan: {0}")]
    Plan(&'static str),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `[f(x)]₊ = max(0, max_i f_i(x))`.
pub fn residual(sys: &PolySystem, x: &[f64]) -> Result<f64, VerifyError> {
    let mut m = 0.0f64;
    for f in sys.polys() {
        m = m.max(f.evaluate(x)?);
    }
    Ok(m)
}

/// Where and how many points to sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    bounds: Vec<(f64, f64)>,
    count: usize,
    rings: Vec<f64>,
    seed: u64,
}

impl SamplePlan {
    pub fn new(bounds: Vec<(f64, f64)>, count: usize, seed: u64) -> Result<Self, VerifyError> {
        if count == 0 {
            return Err(VerifyError::Plan("sample count must be at least 1"));
        }
        if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| lo > hi || !lo.is_finite() || !hi.is_finite()) {
            return Err(VerifyError::Plan("box must be nonempty with finite bounds"));
        }
        Ok(Self {
            bounds,
            count,
            rings: Vec::new(),
            seed,
        })
    }

    /// Same box `[lo, hi]` in every coordinate.
    pub fn cube(n: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Result<Self, VerifyError> {
        Self::new(vec![(lo, hi); n], count, seed)
    }

    pub fn with_rings(mut self, rings: Vec<f64>) -> Result<Self, VerifyError> {
        if rings.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(VerifyError::Plan("ring radii must be positive"));
        }
        if rings.windows(2).any(|w| w[1] <= w[0]) {
            return Err(VerifyError::Plan("ring radii must be strictly increasing"));
        }
        self.rings = rings;
        Ok(self)
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rings(&self) -> &[f64] {
        &self.rings
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Deterministic sample `i`. Three of every four samples are uniform in
    /// the box restricted to a rotating sign orthant; the fourth is pulled
    /// towards the boundary of `S` along the segment to its projection.
    fn point(&self, i: usize, oracle: &dyn DistanceOracle) -> Result<Vec<f64>, VerifyError> {
        let n = self.bounds.len();
        let mut rng = rng::stream(self.seed, &[0, i as u64]);
        if i % 4 == 3 {
            let y: Vec<f64> = self
                .bounds
                .iter()
                .map(|&(lo, hi)| uniform(&mut rng, lo, hi))
                .collect();
            let proj = oracle.project(&y)?;
            let Some(a) = proj.point.filter(|_| proj.distance > 0.0) else {
                return Ok(y);
            };
            let s = 10f64.powf(rng.random_range(-4.0..=-1.0));
            return Ok(a.iter().zip(&y).map(|(p, q)| p + s * (q - p)).collect());
        }
        let orthant = (i - i / 4) % (1usize << n.min(20));
        Ok(self
            .bounds
            .iter()
            .enumerate()
            .map(|(j, &(lo, hi))| {
                let negative = orthant >> j & 1 == 1;
                let (a, b) = if negative { (lo, hi.min(0.0)) } else { (lo.max(0.0), hi) };
                if a < b {
                    uniform(&mut rng, a, b)
                } else {
                    uniform(&mut rng, lo, hi)
                }
            })
            .collect())
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Exponent used in place of the report's `α`.
    pub alpha_override: Option<BigRational>,
    pub tau_dist: f64,
    pub tau_active: Option<f64>,
    pub probe_samples: usize,
    pub execution: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            alpha_override: None,
            tau_dist: 1e-6,
            tau_active: None,
            probe_samples: 10_000,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub x: Vec<f64>,
    pub residual: f64,
    pub distance: f64,
    pub slope: f64,
    /// `([f]₊^α + [f]₊) / d(x, S)`; absent when `d(x, S) ≤ τ_dist`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Least ratio over samples with `d(x, S) > τ_dist`.
    pub fitted_c: Option<f64>,
    pub alpha_used: String,
    pub violations: usize,
    pub samples: Vec<SampleRecord>,
    pub rings: Vec<RingFloor>,
    pub trend: Trend,
    pub seed: u64,
}

impl VerificationReport {
    /// One CSV row per sample: coordinates, residual, distance, slope, ratio.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
        header.extend(["residual", "distance", "slope", "ratio"].map(String::from));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.x.iter().map(f64::to_string).collect();
            row.push(s.residual.to_string());
            row.push(s.distance.to_string());
            row.push(s.slope.to_string());
            row.push(s.ratio.map_or_else(String::new, |r| r.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The bound's right-hand side `t^α + t` for `t = [f]₊`.
pub fn holder_rhs(residual: f64, alpha: f64) -> f64 {
    if residual <= 0.0 {
        0.0
    } else {
        residual.powf(alpha) + residual
    }
}

/// Samples the plan, measures every term of the bound, and fits `c`.
pub fn verify_bound(
    sys: &PolySystem,
    rep: &ExponentReport,
    plan: &SamplePlan,
    oracle: &dyn DistanceOracle,
    cfg: &VerifyConfig,
) -> Result<VerificationReport, VerifyError> {
    let n = sys.nvars();
    if plan.bounds.len() != n {
        return Err(VerifyError::Dimension {
            expected: n,
            got: plan.bounds.len(),
        });
    }
    let compiled = CompiledSystem::new(sys);
    let alpha = cfg.alpha_override.clone().unwrap_or_else(|| rep.alpha.clone());
    let alpha_f = alpha.to_f64().unwrap_or(0.0);
    let records = cfg
        .execution
        .map(plan.count, |i| -> Result<SampleRecord, VerifyError> {
            let x = plan.point(i, oracle)?;
            let r = compiled.residual(&x);
            let d = oracle.project(&x)?.distance;
            let s = slope(&compiled, &x, cfg.tau_active).value;
            let ratio = (d > cfg.tau_dist).then(|| holder_rhs(r, alpha_f) / d);
            Ok(SampleRecord {
                x,
                residual: r,
                distance: d,
                slope: s,
                ratio,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let ratios = records.iter().filter_map(|s| s.ratio);
    let violations = ratios.clone().filter(|r| !(r.is_finite() && *r > 0.0)).count();
    let fitted_c = ratios.reduce(f64::min);
    let probe = (!plan.rings.is_empty()).then(|| {
        probe_goodness(&compiled, &plan.rings, cfg.probe_samples, plan.seed, cfg.execution)
    });
    let (rings, trend) = probe.map_or((Vec::new(), Trend::NotApplicable), |p| (p.rings, p.trend));
    Ok(VerificationReport {
        fitted_c,
        alpha_used: alpha.to_string(),
        violations,
        samples: records,
        rings,
        trend,
        seed: plan.seed,
    })
}
