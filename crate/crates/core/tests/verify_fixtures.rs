mod common;

use common::fixture;
use holderbound::bounds::{exponent_for_system, quadratic_bound, stability_radius, PARTITION_NOTE};
use holderbound::polysys::CompiledSystem;
use holderbound::verify::{
    slope, verify_bound, DistanceOracle, FiniteSetOracle, LevelSetOracle, PenaltyConfig,
    PenaltyOracle, SamplePlan, VerifyConfig,
};
use holderbound::{Execution, PolySystem, Polynomial};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Projection onto `{x + y ≤ 0} ∩ {x² + y² ≤ 1}` from its closed form:
/// the nearest feasible candidate among the disk projection, the line
/// projection, and the two corners.
fn half_disk_distance(p: &[f64]) -> f64 {
    let (x, y) = (p[0], p[1]);
    let inside = |a: f64, b: f64| a + b <= 1e-12 && a * a + b * b <= 1.0 + 1e-12;
    if inside(x, y) {
        return 0.0;
    }
    let r = norm(p);
    let t = (x + y) / 2.0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [(x / r, y / r), (x - t, y - t), (h, -h), (-h, h)]
        .into_iter()
        .filter(|&(a, b)| inside(a, b))
        .map(|(a, b)| ((x - a).powi(2) + (y - b).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn half_disk_distances_match_closed_form() {
    let sys = fixture("ex71.poly");
    let oracle = PenaltyOracle::new(&sys, PenaltyConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let d = oracle.project(&x).unwrap().distance;
        let exact = half_disk_distance(&x);
        assert!((d - exact).abs() <= 1e-6, "{x:?}: {d} vs {exact}");
    }
}

fn random_quadratics(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Polynomial> {
    (0..p)
        .map(|_| {
            let mut terms: Vec<(i64, Vec<u32>)> = Vec::new();
            for i in 0..n {
                for j in i..n {
                    let mut k = vec![0u32; n];
                    k[i] += 1;
                    k[j] += 1;
                    terms.push((rng.random_range(-3..=3), k));
                }
                let mut k = vec![0u32; n];
                k[i] = 1;
                terms.push((rng.random_range(-3..=3), k));
            }
            terms.push((rng.random_range(-3..=3), vec![0; n]));
            let refs: Vec<(i64, &[u32])> = terms.iter().map(|(c, k)| (*c, k.as_slice())).collect();
            Polynomial::from_int_terms(n, &refs)
        })
        .collect()
}

fn scaled(f: &Polynomial, t: i64) -> Polynomial {
    let terms = f.terms().map(|(k, c)| (k.clone(), c * BigInt::from(t)));
    Polynomial::from_terms(f.nvars(), terms).unwrap()
}

#[test]
fn slope_respects_permutation_duplication_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let p = rng.random_range(1..=3);
        let polys = random_quadratics(&mut rng, n, p);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let base = slope(&CompiledSystem::from_polys(n, &polys), &x, None).value;

        let mut rev = polys.clone();
        rev.reverse();
        let v = slope(&CompiledSystem::from_polys(n, &rev), &x, None).value;
        assert!((v - base).abs() <= 1e-10 * (1.0 + base));

        let mut dup = polys.clone();
        dup.push(polys[0].clone());
        let v = slope(&CompiledSystem::from_polys(n, &dup), &x, None).value;
        assert!((v - base).abs() <= 1e-10 * (1.0 + base));

        let tripled: Vec<Polynomial> = polys.iter().map(|f| scaled(f, 3)).collect();
        let v = slope(&CompiledSystem::from_polys(n, &tripled), &x, None).value;
        assert!((v - 3.0 * base).abs() <= 1e-9 * (1.0 + base));
    }
}

fn partition_oracle() -> FiniteSetOracle {
    FiniteSetOracle::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
}

#[test]
fn partition_bound_with_analytic_distance() {
    let sys = fixture("partition2.poly");
    let rep = exponent_for_system(&sys).unwrap();
    assert_eq!(rep.h, BigInt::from(16200));
    assert!(rep.notes.iter().any(|n| n == PARTITION_NOTE));
    let plan = SamplePlan::cube(2, -3.0, 3.0, 2000, 42).unwrap();
    let report = verify_bound(&sys, &rep, &plan, &partition_oracle(), &VerifyConfig::default()).unwrap();
    assert!(report.fitted_c.unwrap() > 0.0);
    assert_eq!(report.violations, 0);
    assert_eq!(report.samples.len(), 2000);
}

#[test]
fn fitted_constant_never_grows_with_more_samples() {
    let sys = fixture("partition2.poly");
    let rep = exponent_for_system(&sys).unwrap();
    let mut last = f64::INFINITY;
    for count in [50, 100, 200, 400, 800] {
        let plan = SamplePlan::cube(2, -3.0, 3.0, count, 17).unwrap();
        let c = verify_bound(&sys, &rep, &plan, &partition_oracle(), &VerifyConfig::default())
            .unwrap()
            .fitted_c
            .unwrap();
        assert!(c <= last, "{count}: {c} > {last}");
        last = c;
    }
}

#[test]
fn sequential_and_parallel_reports_agree() {
    let sys = fixture("ex71.poly");
    let rep = exponent_for_system(&sys).unwrap();
    let oracle = PenaltyOracle::new(&sys, PenaltyConfig::default()).unwrap();
    let plan = SamplePlan::cube(2, -3.0, 3.0, 64, 5).unwrap().with_rings(vec![10.0, 100.0]).unwrap();
    let run = |execution| {
        let cfg = VerifyConfig {
            execution,
            probe_samples: 200,
            ..Default::default()
        };
        verify_bound(&sys, &rep, &plan, &oracle, &cfg).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

/// A quadric with its critical level shifted to zero, so that `S` is the
/// sublevel set `{f ≤ f(x̄)}`.
fn random_quadric(rng: &mut ChaCha8Rng) -> (PolySystem, holderbound::bounds::QuadraticBound) {
    loop {
        let n = rng.random_range(1..=3);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-2..=2) as f64;
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        if a.amax() == 0.0 {
            continue;
        }
        let z = DVector::from_fn(n, |_, _| rng.random_range(-2..=2) as f64);
        let b = &a * z;
        let Ok(q) = quadratic_bound(a.clone(), b.clone(), 0.0) else {
            continue;
        };
        let shifted = quadratic_bound(a, b, -q.critical_value).unwrap();
        let sys = PolySystem::from_polys(vec![shifted.to_polynomial()]);
        return (sys, shifted);
    }
}

#[test]
fn penalty_oracle_agrees_with_exact_quadric_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let (sys, q) = random_quadric(&mut rng);
        let n = q.dim();
        let exact = LevelSetOracle::new(q.clone());
        let penalty = PenaltyOracle::new(&sys, PenaltyConfig::default()).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            if q.value(&x) <= 0.0 {
                continue;
            }
            let d_exact = exact.project(&x).unwrap().distance;
            let d_pen = penalty.project(&x).unwrap().distance;
            assert!(d_pen >= d_exact - 1e-6, "{x:?}: {d_pen} < {d_exact}");
            assert!(d_pen <= d_exact + 1e-4, "{x:?}: {d_pen} > {d_exact}");
        }
    }
}

#[test]
fn perturbed_sets_stay_within_stability_radius() {
    let sys = fixture("ex71.poly");
    let rep = exponent_for_system(&sys).unwrap();
    let plan = SamplePlan::cube(2, -3.0, 3.0, 400, 42).unwrap();
    let oracle = PenaltyOracle::new(&sys, PenaltyConfig::default()).unwrap();
    let c = verify_bound(&sys, &rep, &plan, &oracle, &VerifyConfig::default())
        .unwrap()
        .fitted_c
        .unwrap();
    let compiled = CompiledSystem::new(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let y = [rng.random_range(0.0..0.5), rng.random_range(0.0..0.5)];
        let radius = stability_radius(&y, 1.0 / c, &rep).unwrap();
        let mut seen = 0;
        while seen < 25 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let v = compiled.values(&x);
            if v[0] > y[0] || v[1] > y[1] {
                continue;
            }
            seen += 1;
            assert!(half_disk_distance(&x) <= radius, "{x:?} outside radius {radius}");
        }
    }
}

#[test]
fn penalty_oracle_matches_exact_polyhedron_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..15 {
        let n = rng.random_range(1..=4);
        let p = rng.random_range(1..=4);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(&x0).map(|(u, v)| u * v).sum::<f64>() + rng.random_range(0.0..1.0))
            .collect();
        let sys = PolySystem::from_polys(a.iter().zip(&b).map(|(row, &bi)| common::affine(row, bi)).collect());
        let oracle = PenaltyOracle::new(&sys, PenaltyConfig::default()).unwrap();
        for _ in 0..20 {
            let scale = [3.0, 100.0][rng.random_range(0..2)];
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
            let exact = common::polyhedron_distance(&a, &b, &x);
            let d = oracle.project(&x).unwrap().distance;
            assert!((d - exact).abs() <= 1e-6 * (1.0 + exact), "{x:?}: {d} vs {exact}");
        }
    }
}
