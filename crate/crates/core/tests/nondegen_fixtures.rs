mod common;

use common::fixture;
use holderbound::newton::SystemNewton;
use holderbound::nondegen::{
    build_m_delta, certify_system, minor_norm_objective, normalized_objective, CertifyConfig,
    FaceStatus, MDeltaMatrix,
};
use holderbound::{Execution, PolySystem};
use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 3] = ["ex71.poly", "ex72.poly", "ex73.poly"];

fn matrices(sys: &PolySystem) -> Vec<MDeltaMatrix> {
    let a = SystemNewton::analyze(sys, &Default::default()).unwrap();
    a.faces.iter().map(|f| build_m_delta(sys, f).unwrap()).collect()
}

fn torus_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.random_range(0.2..3.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

#[test]
fn euler_identity_holds_symbolically_on_every_face() {
    for name in FIXTURES {
        for m in matrices(&fixture(name)) {
            for i in 0..m.rows() {
                assert!(m.euler_defect(i).is_zero(), "{name} face {} row {i}", m.face_id);
            }
        }
    }
}

#[test]
fn objective_scales_along_torus_orbits() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in FIXTURES {
        let sys = fixture(name);
        for m in matrices(&sys) {
            let q: Vec<f64> = m.weights.iter().map(|w| w.to_f64().unwrap()).collect();
            let two_sum_d: f64 = 2.0 * m.weighted_degrees.iter().map(|d| d.to_f64().unwrap()).sum::<f64>();
            for _ in 0..50 {
                let x = torus_point(&mut rng, sys.nvars());
                let t: f64 = rng.random_range(0.5..2.0);
                let y: Vec<f64> = x.iter().zip(&q).map(|(v, w)| v * t.powf(*w)).collect();
                let (fx, fy) = (minor_norm_objective(&m, &x), minor_norm_objective(&m, &y));
                let rho = t.powf(two_sum_d);
                assert!((fy - rho * fx).abs() <= 1e-8 * (rho * fx).abs().max(1e-300), "{name}");
                let (nx, ny) = (normalized_objective(&m, &x), normalized_objective(&m, &y));
                assert!((nx - ny).abs() <= 1e-8 * nx.abs().max(1e-12), "{name}: {nx} vs {ny}");
            }
        }
    }
}

/// Rank from singular values with threshold `1e-9·‖M‖`.
fn numerical_rank(m: &MDeltaMatrix, x: &[f64]) -> usize {
    let vals = m.evaluate(x);
    let mat = DMatrix::from_row_slice(m.rows(), m.cols(), &vals);
    let sv = mat.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

#[test]
fn vanishing_objective_matches_numerical_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = fixture("ex73.poly");
    let edge = matrices(&sys).into_iter().find(|m| m.weights_strictly_negative()).unwrap();
    let mut deficient = 0;
    for k in 0..1000 {
        let mut x = torus_point(&mut rng, 2);
        if k % 2 == 0 {
            x[1] = x[0];
        }
        let zero = normalized_objective(&edge, &x) <= 1e-12;
        let low_rank = numerical_rank(&edge, &x) < edge.rows();
        assert_eq!(zero, low_rank, "{x:?}");
        deficient += usize::from(low_rank);
    }
    assert_eq!(deficient, 500);
}

fn config(execution: Execution) -> CertifyConfig {
    CertifyConfig {
        execution,
        ..Default::default()
    }
}

#[test]
fn half_disk_is_nondegenerate() {
    let v = certify_system(&fixture("ex71.poly"), &config(Execution::Parallel)).unwrap();
    assert_eq!(v.status, FaceStatus::NondegenerateProbable);
    assert!(v.convenient);
    assert_eq!(v.faces.len(), 3);
    for f in &v.faces {
        assert!(f.objective_min > 1e-6);
        assert!(f.samples >= 4096);
        assert!(f.witness.is_none());
    }
}

#[test]
fn sphere_and_cubic_is_nondegenerate_on_all_faces() {
    let v = certify_system(&fixture("ex72.poly"), &config(Execution::Parallel)).unwrap();
    assert_eq!(v.faces.len(), 13);
    assert!(v.faces.iter().all(|f| f.status == FaceStatus::NondegenerateProbable));
}

#[test]
fn diagonal_system_is_degenerate_and_perturbation_repairs_it() {
    let v = certify_system(&fixture("ex73.poly"), &config(Execution::Parallel)).unwrap();
    assert_eq!(v.status, FaceStatus::Degenerate);
    let bad: Vec<_> = v.faces.iter().filter(|f| f.status == FaceStatus::Degenerate).collect();
    assert_eq!(bad.len(), 1);
    let w = bad[0].witness.as_ref().unwrap();
    assert!((w[0] - w[1]).abs() < 1e-4);
    assert!(w[0].abs().min(w[1].abs()) > 0.05);
    assert!(bad[0].objective_min < 1e-12);
    assert!(bad[0].witness_exact);

    let v = certify_system(&fixture("ex73_perturbed.poly"), &config(Execution::Parallel)).unwrap();
    assert_eq!(v.status, FaceStatus::NondegenerateProbable);
}

#[test]
fn verdicts_are_reproducible_across_execution_modes() {
    let sys = fixture("ex72.poly");
    let cfg = CertifyConfig {
        samples_per_orthant: 512,
        ..config(Execution::Sequential)
    };
    let a = certify_system(&sys, &cfg).unwrap();
    let b = certify_system(&sys, &CertifyConfig { execution: Execution::Parallel, ..cfg.clone() }).unwrap();
    let c = certify_system(&sys, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = certify_system(&sys, &CertifyConfig { seed: 7, ..cfg }).unwrap();
    assert_eq!(other.faces[0].seed, 7);
}

/// For one component, rank drops exactly where `f_Δ` and all `x_j ∂f_Δ/∂x_j`
/// vanish together. A dense angular grid on the unit circle in each orthant
/// looks for such common zeros of the normalized entries.
fn grid_min(m: &MDeltaMatrix) -> f64 {
    let steps = 20_000;
    let mut best = f64::INFINITY;
    for k in 1..steps {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / steps as f64;
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let x = [sx * theta.cos(), sy * theta.sin()];
            let norm: f64 = m.monomial_norms(&x)[0];
            let s: f64 = m.evaluate(&x).iter().map(|v| (v / norm).powi(2)).sum();
            best = best.min(s);
        }
    }
    best
}

#[test]
fn single_component_verdicts_match_grid_oracle() {
    let cases = [
        ("f = x^2 - 2*x*y + y^2 + 1", true),
        ("f = x^2 + y^2 - 1", false),
        ("f = x^4 + x^2*y^2 - 2*x^3*y - 3", true),
        ("f = x^4 + x^2*y^2 - x^3*y - 3", false),
        ("f = x^3 - 3*x*y^2 + 2*y^3 + x", true),
        ("f = x1^4 + x2^4 - x1^2 - x2^2 + 2*x1*x2 + 2", false),
    ];
    for (text, expect_degenerate) in cases {
        let sys = PolySystem::parse(text).unwrap();
        let cfg = CertifyConfig {
            samples_per_orthant: 1024,
            ..Default::default()
        };
        let verdict = certify_system(&sys, &cfg).unwrap();
        let grid_degenerate = matrices(&sys).iter().any(|m| grid_min(m) < 1e-6);
        assert_eq!(grid_degenerate, expect_degenerate, "{text}");
        assert_eq!(verdict.status == FaceStatus::Degenerate, expect_degenerate, "{text}");
    }
}
