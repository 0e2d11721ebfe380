//! Non-degeneracy at infinity of a polynomial map.
//!
//! For a face `Δ = Δ_1 + … + Δ_p` of `Γ_∞(F)` the matrix `M_Δ` has rows
//! `(x_1 ∂f_{i,Δ_i}/∂x_1, …, x_n ∂f_{i,Δ_i}/∂x_n, 0, …, f_{i,Δ_i}, …, 0)`.
//! `F` is non-degenerate at infinity when every `M_Δ` has rank `p` at every
//! point of the real torus `(ℝ∖{0})^n`.
//!
//! Each row of `M_Δ` is quasi-homogeneous of weighted degree `d_i = d(q, Γ(f_i))`
//! under `x_j ↦ t^{q_j} x_j`, so `M_Δ(t^q ⊙ x) = diag(t^{d_i}) · M_Δ(x)`. So is
//! the monomial norm `N_i(x) = (Σ_{κ ∈ Δ_i} (x^κ)²)^{1/2}`, which is positive on
//! the torus. The search minimizes `det(M̃ M̃ᵀ)` for `M̃ = diag(1/N_i) · M_Δ`:
//! it is continuous on the torus, constant along torus orbits, and vanishes
//! exactly where the rank of `M_Δ` drops.
//!
//! The search is sampling plus local refinement, so a non-degenerate verdict is
//! probabilistic. A degenerate verdict carries a witness point, re-checked with
//! exact rational arithmetic after rounding when possible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::newton::{exact, EnumerationLimits, FaceAtInfinity, NewtonError, SystemNewton};
use crate::optim::{fd_jacobian, levenberg_marquardt, LmOptions};
use crate::polysys::{CompiledPoly, PolySystem, Polynomial};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NondegError {
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("face {face} has no decomposition into component faces")]
    MissingDecomposition { face: usize },
    #[error("face {face} decomposes into {got} parts but the system has {expected} components")]
    ComponentMismatch {
        face: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid search configuration: {0}")]
    Config(&'static str),
}

/// `M_Δ` as an exact polynomial matrix together with its weight data.
#[derive(Clone, Debug)]
pub struct MDeltaMatrix {
    pub face_id: usize,
    /// Witness direction `q` of the face.
    pub weights: Vec<BigInt>,
    /// `d_i = d(q, Γ(f_i))`, one per row.
    pub weighted_degrees: Vec<BigInt>,
    nvars: usize,
    entries: Vec<Vec<Polynomial>>,
    compiled: Vec<Vec<CompiledPoly>>,
    // exponents of Δ_i, flattened, one list per row
    row_monomials: Vec<Vec<u32>>,
}

impl MDeltaMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.nvars + self.entries.len()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Polynomial>] {
        &self.entries
    }

    /// `true` when every weight is negative, so each torus orbit meets the
    /// unit sphere exactly once.
    pub fn weights_strictly_negative(&self) -> bool {
        self.weights.iter().all(Signed::is_negative)
    }

    /// `Σ_j q_j M_{ij} − d_i M_{i,n+i}`, which is the zero polynomial for a
    /// correctly built matrix.
    pub fn euler_defect(&self, i: usize) -> Polynomial {
        let n = self.nvars;
        let mut acc = Polynomial::zero(n);
        for j in 0..n {
            let q = BigRational::from_integer(self.weights[j].clone());
            acc = &acc + &self.entries[i][j].scale(&q);
        }
        let d = BigRational::from_integer(self.weighted_degrees[i].clone());
        &acc - &self.entries[i][n + i].scale(&d)
    }

    /// All `p × p` minors as polynomials, in lexicographic column-subset order.
    pub fn minors(&self) -> Vec<Polynomial> {
        column_subsets(self.cols(), self.rows())
            .iter()
            .map(|cols| symbolic_det(&self.entries, cols, self.nvars))
            .collect()
    }

    /// Floating-point `M_Δ(x)`, row-major.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows() * self.cols()];
        self.evaluate_into(x, &mut out);
        out
    }

    /// `N_i(x)` for every row.
    pub fn monomial_norms(&self, x: &[f64]) -> Vec<f64> {
        self.row_monomials
            .iter()
            .map(|exps| {
                exps.chunks_exact(self.nvars.max(1))
                    .map(|k| {
                        k.iter()
                            .zip(x)
                            .map(|(&e, v)| v.powi(e as i32))
                            .product::<f64>()
                            .powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// `M̃(x) = diag(1/N_i(x)) · M_Δ(x)`, row-major; `None` off the torus
    /// where some `N_i` vanishes.
    pub fn normalized(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut vals = self.evaluate(x);
        let cols = self.cols();
        for (i, norm) in self.monomial_norms(x).into_iter().enumerate() {
            if !(norm > 0.0 && norm.is_finite()) {
                return None;
            }
            vals[i * cols..(i + 1) * cols].iter_mut().for_each(|v| *v /= norm);
        }
        Some(vals)
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        let cols = self.cols();
        for (i, row) in self.compiled.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[i * cols + j] = e.eval(x);
            }
        }
    }

    pub fn evaluate_exact(&self, x: &[BigRational]) -> Vec<Vec<BigRational>> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.evaluate_exact(x).expect("dimension checked by caller"))
                    .collect()
            })
            .collect()
    }

    /// Exact rank of `M_Δ(x)` at a rational point.
    pub fn exact_rank(&self, x: &[BigRational]) -> usize {
        exact::rank(&self.evaluate_exact(x), self.cols())
    }
}

fn column_subsets(ncols: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, ncols: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..ncols {
            cur.push(c);
            rec(c + 1, ncols, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, ncols, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Laplace expansion along the first row of the submatrix on `cols`.
fn symbolic_det(entries: &[Vec<Polynomial>], cols: &[usize], nvars: usize) -> Polynomial {
    fn rec(entries: &[Vec<Polynomial>], row: usize, cols: &[usize], nvars: usize) -> Polynomial {
        if row == entries.len() {
            return Polynomial::constant(nvars, BigRational::from_integer(1.into()));
        }
        let mut acc = Polynomial::zero(nvars);
        for (k, &c) in cols.iter().enumerate() {
            let e = &entries[row][c];
            if e.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = e * &rec(entries, row + 1, &rest, nvars);
            acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }
    rec(entries, 0, cols, nvars)
}

/// Builds `M_Δ` from the face's decomposition `Δ = Δ_1 + … + Δ_p`.
pub fn build_m_delta(sys: &PolySystem, face: &FaceAtInfinity) -> Result<MDeltaMatrix, NondegError> {
    let parts = face
        .decomposition
        .as_ref()
        .ok_or(NondegError::MissingDecomposition { face: face.id })?;
    if parts.len() != sys.len() {
        return Err(NondegError::ComponentMismatch {
            face: face.id,
            expected: sys.len(),
            got: parts.len(),
        });
    }
    let n = sys.nvars();
    let p = sys.len();
    let mut entries = Vec::with_capacity(p);
    let mut weighted_degrees = Vec::with_capacity(p);
    for (i, (f, part)) in sys.polys().iter().zip(parts).enumerate() {
        let principal = f.principal_part(part);
        let mut row: Vec<Polynomial> = (0..n).map(|j| principal.euler_partial(j)).collect();
        for k in 0..p {
            row.push(if k == i {
                principal.clone()
            } else {
                Polynomial::zero(n)
            });
        }
        entries.push(row);
        let k = part.first().expect("component faces are nonempty");
        weighted_degrees.push(exact::dot_int(&face.normal, &k.to_i64()));
    }
    let compiled = entries
        .iter()
        .map(|row| row.iter().map(CompiledPoly::new).collect())
        .collect();
    let row_monomials = parts
        .iter()
        .map(|part| part.iter().flat_map(|k| k.entries().iter().copied()).collect())
        .collect();
    Ok(MDeltaMatrix {
        face_id: face.id,
        weights: face.normal.clone(),
        weighted_degrees,
        nvars: n,
        entries,
        compiled,
        row_monomials,
    })
}

/// Determinant of a small dense matrix by partial-pivoting elimination.
fn det_in_place(a: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&i, &j| a[i * k + c].abs().total_cmp(&a[j * k + c].abs()))
            .expect("nonempty range");
        if a[piv * k + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..k {
                a.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let d = a[c * k + c];
        det *= d;
        for i in c + 1..k {
            let factor = a[i * k + c] / d;
            for j in c..k {
                a[i * k + j] -= factor * a[c * k + j];
            }
        }
    }
    det
}

/// Gram determinant `det(M Mᵀ)` of a row-major `rows × cols` matrix.
fn gram_det(m: &[f64], rows: usize, cols: usize) -> f64 {
    let mut g = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in 0..=i {
            let v: f64 = (0..cols).map(|c| m[i * cols + c] * m[j * cols + c]).sum();
            g[i * rows + j] = v;
            g[j * rows + i] = v;
        }
    }
    det_in_place(&mut g, rows)
}

/// `Σ (p×p minors of M_Δ(x))²`, equal to `det(M Mᵀ)` by Cauchy–Binet.
pub fn minor_norm_objective(m: &MDeltaMatrix, x: &[f64]) -> f64 {
    let vals = m.evaluate(x);
    gram_det(&vals, m.rows(), m.cols()).max(0.0)
}

/// `det(M̃ M̃ᵀ)` for the monomial-normalized matrix `M̃`; invariant under the
/// torus action and zero iff the rank of `M_Δ(x)` is below `p`.
pub fn normalized_objective(m: &MDeltaMatrix, x: &[f64]) -> f64 {
    match m.normalized(x) {
        Some(vals) => gram_det(&vals, m.rows(), m.cols()).max(0.0),
        None => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceStatus {
    NondegenerateProbable,
    Degenerate,
    Inconclusive,
}

impl FaceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceStatus::NondegenerateProbable => "nondegenerate_probable",
            FaceStatus::Degenerate => "degenerate",
            FaceStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyConfig {
    /// Samples per face, per sign orthant, per `τ_axis` stage.
    pub samples_per_orthant: usize,
    pub tau_zero: f64,
    /// Decreasing schedule of lower bounds on `min_j |x_j|`.
    pub tau_axis: Vec<f64>,
    pub iterations: usize,
    pub multistarts: usize,
    pub seed: u64,
    pub execution: Execution,
    pub limits: EnumerationLimits,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            samples_per_orthant: 4096,
            tau_zero: 1e-12,
            tau_axis: vec![1e-1, 1e-2, 1e-3],
            iterations: 200,
            multistarts: 16,
            seed: 42,
            execution: Execution::default(),
            limits: EnumerationLimits::default(),
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<(), NondegError> {
        if self.samples_per_orthant == 0 {
            return Err(NondegError::Config("sample budget must be positive"));
        }
        if self.tau_zero.is_nan() || self.tau_zero <= 0.0 {
            return Err(NondegError::Config("tau_zero must be positive"));
        }
        if self.tau_axis.is_empty() || self.tau_axis.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(NondegError::Config("tau_axis entries must lie in (0, 1)"));
        }
        if self.tau_axis.windows(2).any(|w| w[1] >= w[0]) {
            return Err(NondegError::Config("tau_axis must be strictly decreasing"));
        }
        Ok(())
    }
}

/// Certification outcome for one face.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceVerdict {
    pub face: usize,
    pub status: FaceStatus,
    pub witness: Option<Vec<f64>>,
    /// Minimum of the normalized objective over all samples and refinements.
    pub objective_min: f64,
    pub samples: u64,
    pub seed: u64,
    /// Whether the rounded witness makes `M_Δ` rank-deficient in exact arithmetic.
    pub witness_exact: bool,
    /// Minimum per `τ_axis` stage, in schedule order.
    pub stage_minima: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NondegVerdict {
    pub status: FaceStatus,
    pub convenient: bool,
    pub faces: Vec<FaceVerdict>,
}

impl NondegVerdict {
    fn aggregate(convenient: bool, faces: Vec<FaceVerdict>) -> Self {
        let status = if faces.iter().any(|f| f.status == FaceStatus::Degenerate) {
            FaceStatus::Degenerate
        } else if faces
            .iter()
            .all(|f| f.status == FaceStatus::NondegenerateProbable)
        {
            FaceStatus::NondegenerateProbable
        } else {
            FaceStatus::Inconclusive
        };
        Self {
            status,
            convenient,
            faces,
        }
    }
}

const BATCH: usize = 1024;

/// Torus point parametrized by fixed signs and log-magnitudes `u_j = ln |x_j|`.
fn torus_point(signs: &[f64], u: &[f64]) -> Vec<f64> {
    signs.iter().zip(u).map(|(s, v)| s * v.exp()).collect()
}

fn orthant_signs(n: usize, orthant: usize) -> Vec<f64> {
    (0..n)
        .map(|j| if orthant >> j & 1 == 1 { -1.0 } else { 1.0 })
        .collect()
}

/// Point of the unit sphere in the given orthant with `min_j |x_j| ≥ tau`.
fn sphere_sample<R: Rng>(rng: &mut R, signs: &[f64], tau: f64) -> Vec<f64> {
    let n = signs.len();
    let mut mags = vec![0.0; n];
    for _ in 0..64 {
        for m in mags.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *m = g.abs();
        }
        let norm = mags.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            mags.iter_mut().for_each(|m| *m /= norm);
            if mags.iter().all(|&m| m >= tau) {
                break;
            }
        }
    }
    let floor = tau.min(1.0 / (n as f64).sqrt());
    for m in mags.iter_mut() {
        *m = m.max(floor);
    }
    let norm = mags.iter().map(|v| v * v).sum::<f64>().sqrt();
    mags.iter().zip(signs).map(|(m, s)| s * m / norm).collect()
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    x: Vec<f64>,
    orthant: usize,
}

struct Search<'a> {
    m: &'a MDeltaMatrix,
    cfg: &'a CertifyConfig,
    subsets: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn objective(&self, x: &[f64]) -> f64 {
        normalized_objective(self.m, x)
    }

    /// Minors of the normalized matrix; their squares sum to the objective.
    fn minor_residuals(&self, x: &[f64]) -> Vec<f64> {
        let (rows, cols) = (self.m.rows(), self.m.cols());
        let Some(vals) = self.m.normalized(x) else {
            return vec![0.0; self.subsets.len()];
        };
        let mut sub = vec![0.0; rows * rows];
        self.subsets
            .iter()
            .map(|cs| {
                for i in 0..rows {
                    for (k, &c) in cs.iter().enumerate() {
                        sub[i * rows + k] = vals[i * cols + c];
                    }
                }
                det_in_place(&mut sub, rows)
            })
            .collect()
    }

    fn sample_batch(&self, stage: usize, orthant: usize, batch: usize, count: usize) -> Vec<Candidate> {
        let n = self.m.nvars();
        let tau = self.cfg.tau_axis[stage];
        let signs = orthant_signs(n, orthant);
        let mut rng = rng::stream(
            self.cfg.seed,
            &[self.m.face_id as u64, stage as u64, orthant as u64, batch as u64],
        );
        let on_sphere = self.m.weights_strictly_negative();
        let lim = -tau.ln();
        let keep = self.cfg.multistarts.max(1);
        let mut best: Vec<Candidate> = Vec::with_capacity(keep + 1);
        for _ in 0..count {
            let x = if on_sphere {
                sphere_sample(&mut rng, &signs, tau)
            } else {
                let u: Vec<f64> = (0..n).map(|_| rng.random_range(-lim..=lim)).collect();
                torus_point(&signs, &u)
            };
            let value = self.objective(&x);
            if best.len() < keep || value < best[best.len() - 1].value {
                let pos = best.partition_point(|c| c.value <= value);
                best.insert(pos, Candidate { value, x, orthant });
                best.truncate(keep);
            }
        }
        best
    }

    /// Local refinement in log-magnitude coordinates, kept inside the box
    /// `τ ≤ |x_j| ≤ 1/τ` so the iterate cannot reach a coordinate hyperplane.
    fn refine(&self, start: &Candidate, tau: f64) -> Candidate {
        let n = self.m.nvars();
        let signs = orthant_signs(n, start.orthant);
        let lim = -tau.ln();
        let u0: Vec<f64> = start.x.iter().map(|v| v.abs().ln().clamp(-lim, lim)).collect();
        let residual = |u: &[f64]| self.minor_residuals(&torus_point(&signs, u));
        let opts = LmOptions {
            max_iter: self.cfg.iterations,
            target: 0.5 * self.cfg.tau_zero * 1e-6,
            lower: Some(vec![-lim; n]),
            upper: Some(vec![lim; n]),
        };
        let out = levenberg_marquardt(&u0, residual, |u, r| fd_jacobian(&residual, u, r), &opts);
        let x = torus_point(&signs, &out.x);
        let value = self.objective(&x);
        if value < start.value {
            Candidate {
                value,
                x,
                orthant: start.orthant,
            }
        } else {
            start.clone()
        }
    }

    fn stage(&self, stage: usize) -> (Candidate, u64) {
        let n = self.m.nvars();
        let orthants = 1usize << n;
        let per = self.cfg.samples_per_orthant;
        let batches_per_orthant = per.div_ceil(BATCH);
        let jobs = orthants * batches_per_orthant;
        let results = self.cfg.execution.map(jobs, |job| {
            let (orthant, batch) = (job / batches_per_orthant, job % batches_per_orthant);
            let count = BATCH.min(per - batch * BATCH);
            self.sample_batch(stage, orthant, batch, count)
        });
        let mut pool: Vec<Candidate> = results.into_iter().flatten().collect();
        pool.sort_by(|a, b| a.value.total_cmp(&b.value));

        // Best candidate of each orthant first, then the best remaining overall.
        let keep = self.cfg.multistarts.max(1);
        let mut seen = vec![false; orthants];
        let mut starts: Vec<Candidate> = Vec::with_capacity(keep);
        let mut rest = Vec::new();
        for c in pool {
            if !seen[c.orthant] {
                seen[c.orthant] = true;
                starts.push(c);
            } else {
                rest.push(c);
            }
        }
        starts.truncate(keep);
        starts.extend(rest.into_iter().take(keep - starts.len()));

        let tau = self.cfg.tau_axis[stage];
        let refined = self.cfg.execution.map_slice(&starts, |c| self.refine(c, tau));
        let best = refined
            .into_iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one start");
        (best, (orthants * per) as u64)
    }
}

/// Moves `x` along its torus orbit onto the unit sphere; requires all `q_j < 0`.
fn orbit_to_sphere(x: &[f64], q: &[f64]) -> Vec<f64> {
    let norm2 = |s: f64| -> f64 {
        x.iter()
            .zip(q)
            .map(|(v, w)| (w * s).exp().powi(2) * v * v)
            .sum()
    };
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm2(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    x.iter().zip(q).map(|(v, w)| v * (w * s).exp()).collect()
}

fn dyadic(v: f64, bits: i32) -> BigRational {
    let scale = 2f64.powi(bits);
    let num = BigInt::from((v * scale).round() as i64);
    BigRational::new(num, BigInt::from(1i64 << bits))
}

/// Rounds `x` to dyadic rationals of increasing precision and reports whether
/// `M_Δ` is rank-deficient exactly at one of them.
fn certify_exactly(m: &MDeltaMatrix, x: &[f64]) -> bool {
    if x.iter().any(|v| v.abs() > 1e6) {
        return false;
    }
    [8, 12, 16, 20, 24, 30, 36, 42].iter().any(|&bits| {
        let r: Vec<BigRational> = x.iter().map(|&v| dyadic(v, bits)).collect();
        !r.iter().any(Zero::is_zero) && m.exact_rank(&r) < m.rows()
    })
}

/// Searches for torus points where `M_Δ` loses rank.
pub fn certify_face(m: &MDeltaMatrix, cfg: &CertifyConfig) -> Result<FaceVerdict, NondegError> {
    cfg.validate()?;
    let search = Search {
        m,
        cfg,
        subsets: column_subsets(m.cols(), m.rows()),
    };
    let mut samples = 0u64;
    let mut stage_minima = Vec::with_capacity(cfg.tau_axis.len());
    let mut best: Option<Candidate> = None;
    for stage in 0..cfg.tau_axis.len() {
        let (cand, count) = search.stage(stage);
        samples += count;
        stage_minima.push(cand.value);
        let improved = best.as_ref().is_none_or(|b| cand.value < b.value);
        if improved {
            best = Some(cand);
        }
        if best.as_ref().is_some_and(|b| b.value <= cfg.tau_zero) {
            break;
        }
    }
    let best = best.expect("schedule is nonempty");
    let verdict = |status, witness: Option<Vec<f64>>, witness_exact| FaceVerdict {
        face: m.face_id,
        status,
        witness,
        objective_min: best.value,
        samples,
        seed: cfg.seed,
        witness_exact,
        stage_minima: stage_minima.clone(),
    };

    let tau_last = *cfg.tau_axis.last().expect("validated");
    if best.value <= cfg.tau_zero {
        let mut witness = best.x.clone();
        if m.weights_strictly_negative() {
            let q: Vec<f64> = m.weights.iter().map(|w| w.to_f64().unwrap_or(-1.0)).collect();
            let projected = orbit_to_sphere(&witness, &q);
            if projected.iter().all(|v| v.abs() >= tau_last) {
                witness = projected;
            }
        }
        let exact = certify_exactly(m, &witness);
        return Ok(verdict(FaceStatus::Degenerate, Some(witness), exact));
    }
    let decaying = stage_minima.len() >= 2 && stage_minima.windows(2).all(|w| w[1] < 0.01 * w[0]);
    if best.value <= 10.0 * cfg.tau_zero || decaying {
        return Ok(verdict(FaceStatus::Inconclusive, Some(best.x.clone()), false));
    }
    Ok(verdict(FaceStatus::NondegenerateProbable, None, false))
}

/// Certifies every face of `Γ_∞(F)`.
pub fn certify_system(sys: &PolySystem, cfg: &CertifyConfig) -> Result<NondegVerdict, NondegError> {
    let analysis = SystemNewton::analyze(sys, &cfg.limits)?;
    certify_analyzed(sys, &analysis, cfg)
}

/// As [`certify_system`] for a system whose Newton data is already computed.
pub fn certify_analyzed(
    sys: &PolySystem,
    analysis: &SystemNewton,
    cfg: &CertifyConfig,
) -> Result<NondegVerdict, NondegError> {
    cfg.validate()?;
    let matrices = analysis
        .faces
        .iter()
        .map(|f| build_m_delta(sys, f))
        .collect::<Result<Vec<_>, _>>()?;
    let faces = cfg
        .execution
        .map_slice(&matrices, |m| certify_face(m, cfg))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NondegVerdict::aggregate(analysis.is_convenient(), faces))
}
