#![allow(dead_code)]

use std::path::PathBuf;

use holderbound::polysys::ExponentVector;
use holderbound::PolySystem;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> PolySystem {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    PolySystem::parse(&text).expect("fixture parses")
}

pub fn ev(v: &[u32]) -> ExponentVector {
    ExponentVector::new(v.to_vec())
}

pub fn evs(v: &[&[u32]]) -> Vec<ExponentVector> {
    let mut out: Vec<_> = v.iter().map(|k| ev(k)).collect();
    out.sort();
    out
}

use holderbound::Polynomial;
use num_bigint::BigInt;
use num_rational::BigRational;
use holderbound::newton::{decompose_with_normal, SystemNewton};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Random convenient polynomial in `n` variables: every variable appears as a
/// pure power, plus a few mixed monomials and maybe a constant.
pub fn random_convenient<R: Rng>(rng: &mut R, n: usize, max_deg: u32) -> Polynomial {
    let mut terms: Vec<(i64, Vec<u32>)> = Vec::new();
    for j in 0..n {
        let mut k = vec![0u32; n];
        k[j] = rng.random_range(1..=max_deg);
        terms.push((nonzero(rng), k));
    }
    for _ in 0..rng.random_range(0..=3) {
        let k: Vec<u32> = (0..n).map(|_| rng.random_range(0..=max_deg / 2 + 1)).collect();
        if k.iter().sum::<u32>() <= max_deg {
            terms.push((nonzero(rng), k));
        }
    }
    if rng.random_bool(0.5) {
        terms.push((nonzero(rng), vec![0; n]));
    }
    let refs: Vec<(i64, &[u32])> = terms.iter().map(|(c, k)| (*c, k.as_slice())).collect();
    let p = Polynomial::from_int_terms(n, &refs);
    if !holderbound::newton::is_convenient(&p).convenient {
        random_convenient(rng, n, max_deg)
    } else {
        p
    }
}

fn nonzero<R: Rng>(rng: &mut R) -> i64 {
    let v = rng.random_range(1..=5);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Affine polynomial `aᵀx − b`.
pub fn affine(a: &[f64], b: f64) -> Polynomial {
    let n = a.len();
    let to_q = |v: f64| BigRational::from_float(v).expect("finite");
    let mut terms: Vec<(holderbound::ExponentVector, BigRational)> = a
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let mut k = vec![0u32; n];
            k[j] = 1;
            (holderbound::ExponentVector::new(k), to_q(c))
        })
        .collect();
    terms.push((holderbound::ExponentVector::zero(n), to_q(-b)));
    Polynomial::from_terms(n, terms).expect("consistent arity")
}

/// Exact Euclidean projection onto the polyhedron `{y : A y ≤ b}` by
/// enumerating candidate active sets; the feasible candidate closest to `x`
/// is the projection.
pub fn polyhedron_distance(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let p = a.len();
    let n = x.len();
    let feasible = |y: &[f64]| {
        a.iter()
            .zip(b)
            .all(|(row, bi)| row.iter().zip(y).map(|(u, v)| u * v).sum::<f64>() - bi <= 1e-9 * (1.0 + bi.abs()))
    };
    if feasible(x) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << p) {
        let rows: Vec<usize> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
        let m = DMatrix::from_fn(rows.len(), n, |r, j| a[rows[r]][j]);
        let xv = DVector::from_column_slice(x);
        let rhs = DVector::from_fn(rows.len(), |r, _| b[rows[r]]) - &m * &xv;
        // minimal-norm correction onto the affine subspace {m y = b_rows}
        let Ok(z) = (&m * m.transpose()).svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        let y = &xv + m.transpose() * z;
        if (&m * &y - DVector::from_fn(rows.len(), |r, _| b[rows[r]])).amax() > 1e-8 {
            continue;
        }
        let ys: Vec<f64> = y.iter().copied().collect();
        if feasible(&ys) {
            best = best.min((y - xv).norm());
        }
    }
    best
}

/// A face at infinity as `(vertices, component faces of its decomposition)`.
pub type FaceSummary = (Vec<ExponentVector>, Vec<Vec<ExponentVector>>);

/// Faces at infinity of the half-disk system.
pub fn ex71_faces() -> Vec<FaceSummary> {
    vec![
        (evs(&[&[3, 0]]), vec![evs(&[&[1, 0]]), evs(&[&[2, 0]])]),
        (evs(&[&[0, 3]]), vec![evs(&[&[0, 1]]), evs(&[&[0, 2]])]),
        (
            evs(&[&[3, 0], &[0, 3]]),
            vec![evs(&[&[1, 0], &[0, 1]]), evs(&[&[2, 0], &[0, 2]])],
        ),
    ]
}

/// Faces at infinity of the sphere-and-cubic system.
pub fn ex72_faces() -> Vec<FaceSummary> {
    let x2: &[u32] = &[2, 0, 0];
    let y2: &[u32] = &[0, 2, 0];
    let z2: &[u32] = &[0, 0, 2];
    let x1: &[u32] = &[1, 0, 0];
    let y1: &[u32] = &[0, 1, 0];
    let z3: &[u32] = &[0, 0, 3];
    vec![
        (evs(&[&[3, 0, 0], &[0, 3, 0], &[2, 0, 3], &[0, 2, 3]]), vec![evs(&[x2, y2]), evs(&[x1, y1, z3])]),
        (evs(&[&[2, 0, 3], &[0, 2, 3], &[0, 0, 5]]), vec![evs(&[x2, y2, z2]), evs(&[z3])]),
        (evs(&[&[3, 0, 0], &[0, 3, 0]]), vec![evs(&[x2, y2]), evs(&[x1, y1])]),
        (evs(&[&[2, 0, 3], &[0, 2, 3]]), vec![evs(&[x2, y2]), evs(&[z3])]),
        (evs(&[&[2, 0, 3], &[0, 0, 5]]), vec![evs(&[x2, z2]), evs(&[z3])]),
        (evs(&[&[3, 0, 0], &[2, 0, 3]]), vec![evs(&[x2]), evs(&[x1, z3])]),
        (evs(&[&[0, 2, 3], &[0, 0, 5]]), vec![evs(&[y2, z2]), evs(&[z3])]),
        (evs(&[&[0, 3, 0], &[0, 2, 3]]), vec![evs(&[y2]), evs(&[y1, z3])]),
        (evs(&[&[3, 0, 0]]), vec![evs(&[x2]), evs(&[x1])]),
        (evs(&[&[0, 3, 0]]), vec![evs(&[y2]), evs(&[y1])]),
        (evs(&[&[2, 0, 3]]), vec![evs(&[x2]), evs(&[z3])]),
        (evs(&[&[0, 2, 3]]), vec![evs(&[y2]), evs(&[z3])]),
        (evs(&[&[0, 0, 5]]), vec![evs(&[z2]), evs(&[z3])]),
    ]
}

pub fn random_system(rng: &mut ChaCha8Rng) -> PolySystem {
    let n = rng.random_range(2..=3);
    let p = rng.random_range(1..=3);
    let polys = (0..p).map(|_| random_convenient(rng, n, 3)).collect();
    PolySystem::from_polys(polys)
}

fn positive_combination(rng: &mut ChaCha8Rng, rays: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = rays[0].len();
    let mut q = vec![BigInt::zero(); n];
    for r in rays {
        let w = BigInt::from(rng.random_range(1..=7));
        for (acc, x) in q.iter_mut().zip(r) {
            *acc += &w * x;
        }
    }
    q
}

/// For every face of the Minkowski sum of a convenient system and every
/// direction `q` in the relative interior of its normal cone:
/// the face misses the origin ⇔ `d(q, Γ) < 0` ⇔ `min_j q_j < 0`, the
/// decomposition along `q` is the recorded one, and (all components being
/// convenient) each component face misses the origin too.
///
/// Returns the number of (face, direction) pairs checked.
pub fn check_face_characterizations(seed: u64, systems: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..systems {
        let sys = random_system(&mut rng);
        let a = SystemNewton::analyze(&sys, &Default::default()).unwrap();
        assert!(a.is_convenient());
        let faces = a.sum.faces(&Default::default()).unwrap();
        let at_inf: Vec<_> = a.faces.iter().map(|f| f.support.clone()).collect();
        for face in &faces {
            let support: Vec<_> = face.points.iter().map(|i| a.sum.points()[i].clone()).collect();
            for _ in 0..4 {
                let q = positive_combination(&mut rng, &face.cone_rays);
                assert_eq!(a.sum.face_points(&q), support, "direction must expose the same face");
                let qr: Vec<BigRational> = q.iter().cloned().map(BigRational::from_integer).collect();
                let i1 = !face.points.contains(0);
                let i2 = a.sum.support_value(&qr).is_negative();
                let i3 = q.iter().any(Signed::is_negative);
                assert_eq!(i1, i2, "{sys}");
                assert_eq!(i2, i3, "{sys}");
                assert_eq!(i1, at_inf.contains(&support));
                checked += 1;
            }
        }
        for face in &a.faces {
            let recorded = face.decomposition.clone().unwrap();
            for _ in 0..4 {
                let q = positive_combination(&mut rng, &face.cone_rays);
                assert_eq!(decompose_with_normal(face, &q, &a.components).unwrap(), recorded);
            }
            for part in &recorded {
                assert!(part.iter().all(|k| !k.is_origin()), "component face contains the origin");
            }
        }
    }
    checked
}
