//! Sampled slope floors on spheres of growing radius.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::slope::slope;
use crate::exec::Execution;
use crate::polysys::CompiledSystem;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Consistent,
    Decaying,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Consistent => "consistent",
            Trend::Decaying => "decaying",
            Trend::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingFloor {
    #[serde(rename = "R")]
    pub radius: f64,
    /// Smallest slope found at a point with `f(x) > 0`; `None` when the ring
    /// had no such point.
    pub slope_floor: Option<f64>,
    pub positive_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodnessProbe {
    pub rings: Vec<RingFloor>,
    pub trend: Trend,
}

const PROBE_STREAM: u64 = 0x9e0b;
const REFINE_STARTS: usize = 8;

fn unit_direction(seed: u64, i: usize, n: usize) -> Vec<f64> {
    let mut rng = rng::stream(seed, &[PROBE_STREAM, i as u64]);
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn to_sphere(x: &mut [f64], radius: f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v *= radius / norm);
    }
}

/// Compass search on the sphere of radius `radius` for a smaller slope,
/// staying in the region `f > 0`.
fn refine_on_sphere(sys: &CompiledSystem, x0: &[f64], s0: f64, radius: f64) -> f64 {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut best = s0;
    let mut step = 0.1 * radius;
    let min_step = 1e-14 * radius.max(1.0);
    let mut evals = 0;
    while step > min_step && evals < 20_000 {
        let mut improved = false;
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] += sign * step;
                to_sphere(&mut y, radius);
                evals += 1;
                if sys.max_value(&y) <= 0.0 {
                    continue;
                }
                let s = slope(sys, &y, None).value;
                if s < best {
                    best = s;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

fn trend_of(rings: &[RingFloor]) -> Trend {
    let (Some(first), Some(last)) = (
        rings.first().and_then(|r| r.slope_floor),
        rings.last().and_then(|r| r.slope_floor),
    ) else {
        return Trend::NotApplicable;
    };
    if rings.len() < 2 {
        Trend::NotApplicable
    } else if last < 0.1 * first {
        Trend::Decaying
    } else {
        Trend::Consistent
    }
}

/// Minimum slope over `f > 0` on each sphere `‖x‖ = R`. The same unit
/// directions are used on every ring.
pub fn probe_goodness(
    sys: &CompiledSystem,
    radii: &[f64],
    count: usize,
    seed: u64,
    execution: Execution,
) -> GoodnessProbe {
    let n = sys.nvars();
    let dirs = execution.map(count, |i| unit_direction(seed, i, n));
    let rings = radii
        .iter()
        .map(|&radius| {
            let vals = execution.map_slice(&dirs, |u| {
                let x: Vec<f64> = u.iter().map(|v| v * radius).collect();
                (sys.max_value(&x) > 0.0).then(|| (slope(sys, &x, None).value, x))
            });
            let mut positive: Vec<(f64, Vec<f64>)> = vals.into_iter().flatten().collect();
            let positive_samples = positive.len();
            positive.sort_by(|a, b| a.0.total_cmp(&b.0));
            positive.truncate(REFINE_STARTS);
            let refined = execution.map_slice(&positive, |(s, x)| refine_on_sphere(sys, x, *s, radius));
            RingFloor {
                radius,
                slope_floor: refined.into_iter().reduce(f64::min),
                positive_samples,
            }
        })
        .collect::<Vec<_>>();
    GoodnessProbe {
        trend: trend_of(&rings),
        rings,
    }
}
