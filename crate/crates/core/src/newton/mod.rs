//! Newton polyhedra at infinity, their Minkowski sums, and faces at infinity.
//!
//! A Newton polyhedron at infinity is the convex hull of an exponent support
//! together with the origin. Everything here is exact: generators are integer
//! points, facet normals are primitive integer vectors, and support values are
//! computed with big integers or rationals.
//!
//! Facets are found by brute force: every affinely independent subset of
//! `dim` candidate points spans a hyperplane of the affine hull, which is a
//! facet when all generators lie on one side. Faces are then the closure of
//! the facet incidence sets under intersection. The witness normal of a face
//! is the sum of the (inner) normals of all facets containing it, which lies
//! in the relative interior of the face's normal cone.

pub(crate) mod exact;
mod pointset;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::polysys::{ExponentVector, PolySystem, Polynomial};

pub use pointset::PointSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("component {0} is identically zero; its Newton polyhedron is empty")]
    ZeroPolynomial(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Minkowski sum of an empty list")]
    EmptySum,
    #[error("face enumeration exceeded the cap of {cap} faces")]
    FaceCapExceeded { cap: usize },
    #[error("facet search would test {needed} subsets, above the cap of {cap}")]
    SubsetCapExceeded { needed: u128, cap: u128 },
    #[error("witness normal does not support face {face}")]
    WitnessNotSupporting { face: usize },
}

pub const DEFAULT_MAX_FACES: usize = 20_000;
pub const DEFAULT_MAX_SUBSETS: u128 = 50_000_000;

#[derive(Clone, Debug)]
pub struct EnumerationLimits {
    pub max_faces: usize,
    pub max_subsets: u128,
    pub execution: Execution,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_faces: DEFAULT_MAX_FACES,
            max_subsets: DEFAULT_MAX_SUBSETS,
            execution: Execution::default(),
        }
    }
}

/// Supporting hyperplane: the polytope lies in `⟨normal, κ⟩ ≥ offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
    pub incidence: PointSet,
}

#[derive(Clone, Debug)]
pub struct NewtonPolytope {
    nvars: usize,
    points: Vec<ExponentVector>,
    coords: Vec<Vec<i64>>,
    vertices: Vec<usize>,
    facets: Vec<Facet>,
    dim: usize,
}

/// A nonempty face of a Newton polytope (not necessarily at infinity).
#[derive(Clone, Debug)]
pub struct Face {
    pub points: PointSet,
    pub dim: usize,
    pub normal: Vec<BigInt>,
    pub value: BigInt,
    /// Inner normals of every facet containing the face; positive
    /// combinations of these are the relative-interior witnesses.
    pub cone_rays: Vec<Vec<BigInt>>,
}

/// A face `Δ = Δ(q, Γ)` not containing the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceAtInfinity {
    /// 1-based position in the deterministic face order.
    pub id: usize,
    pub dim: usize,
    /// Generators of `Γ` lying on the face, graded-lex ascending.
    pub support: Vec<ExponentVector>,
    pub vertices: Vec<ExponentVector>,
    pub normal: Vec<BigInt>,
    pub value: BigInt,
    pub cone_rays: Vec<Vec<BigInt>>,
    /// Component faces `Δ_i = Δ(q, Γ(f_i))`, present for faces of `Γ(F)`.
    pub decomposition: Option<Vec<Vec<ExponentVector>>>,
}

impl FaceAtInfinity {
    pub fn normal_f64(&self) -> Vec<f64> {
        self.normal
            .iter()
            .map(|x| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_json(&self) -> FaceJson {
        let ints = |v: &[ExponentVector]| -> Vec<Vec<u32>> {
            v.iter().map(|k| k.entries().to_vec()).collect()
        };
        FaceJson {
            id: self.id,
            dim: self.dim,
            support: ints(&self.support),
            vertices: ints(&self.vertices),
            normal: self.normal.iter().map(ToString::to_string).collect(),
            value: self.value.to_string(),
            decomposition: self
                .decomposition
                .as_ref()
                .map(|d| d.iter().map(|c| ints(c)).collect()),
        }
    }
}

/// Wire form of a face at infinity.
#[derive(Clone, Debug, Serialize)]
pub struct FaceJson {
    pub id: usize,
    pub dim: usize,
    pub support: Vec<Vec<u32>>,
    pub vertices: Vec<Vec<u32>>,
    pub normal: Vec<String>,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<Vec<Vec<u32>>>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Affine rank of a point set given as integer coordinates.
fn affine_dim(coords: &[&[i64]]) -> usize {
    let Some(base) = coords.first() else {
        return 0;
    };
    let n = base.len();
    let rows: Vec<Vec<BigRational>> = coords[1..]
        .iter()
        .map(|c| {
            c.iter()
                .zip(base.iter())
                .map(|(a, b)| BigRational::from_integer((a - b).into()))
                .collect()
        })
        .collect();
    exact::rank(&rows, n)
}

impl NewtonPolytope {
    /// Convex hull of `points ∪ {0}`.
    pub fn from_points<I>(nvars: usize, points: I) -> Result<Self, NewtonError>
    where
        I: IntoIterator<Item = ExponentVector>,
    {
        Self::build(nvars, points, None, &EnumerationLimits::default())
    }

    fn build<I>(
        nvars: usize,
        points: I,
        candidates: Option<BTreeSet<ExponentVector>>,
        limits: &EnumerationLimits,
    ) -> Result<Self, NewtonError>
    where
        I: IntoIterator<Item = ExponentVector>,
    {
        let mut set: BTreeSet<ExponentVector> = BTreeSet::new();
        set.insert(ExponentVector::zero(nvars));
        for k in points {
            if k.len() != nvars {
                return Err(NewtonError::DimensionMismatch {
                    expected: nvars,
                    got: k.len(),
                });
            }
            set.insert(k);
        }
        let points: Vec<ExponentVector> = set.into_iter().collect();
        let coords: Vec<Vec<i64>> = points.iter().map(ExponentVector::to_i64).collect();
        let refs: Vec<&[i64]> = coords.iter().map(Vec::as_slice).collect();
        let dim = affine_dim(&refs);

        let mut poly = Self {
            nvars,
            points,
            coords,
            vertices: Vec::new(),
            facets: Vec::new(),
            dim,
        };
        if dim == 0 {
            poly.vertices = vec![0];
            return Ok(poly);
        }
        let cand_idx: Vec<usize> = match candidates {
            Some(c) => poly
                .points
                .iter()
                .enumerate()
                .filter(|(_, k)| c.contains(k) || k.is_origin())
                .map(|(i, _)| i)
                .collect(),
            None => (0..poly.points.len()).collect(),
        };
        poly.facets = poly.find_facets(&cand_idx, limits)?;
        poly.vertices = poly.compute_vertices();
        Ok(poly)
    }

    /// Orthogonal complement of the affine hull's direction space
    /// (the affine hull passes through the origin, a generator).
    fn lineality_rows(&self) -> Vec<Vec<BigRational>> {
        let rows: Vec<Vec<BigRational>> =
            self.coords.iter().map(|c| exact::to_rational_row(c)).collect();
        exact::nullspace(&rows, self.nvars)
    }

    fn find_facets(
        &self,
        cand: &[usize],
        limits: &EnumerationLimits,
    ) -> Result<Vec<Facet>, NewtonError> {
        let k = self.dim;
        let needed = binomial(cand.len(), k);
        if needed > limits.max_subsets {
            return Err(NewtonError::SubsetCapExceeded {
                needed,
                cap: limits.max_subsets,
            });
        }
        let perp = self.lineality_rows();
        let n = self.nvars;
        let per_first = limits.execution.map(cand.len(), |a| {
            let mut found: BTreeSet<Vec<BigInt>> = BTreeSet::new();
            let mut combo = vec![cand[a]];
            self.extend_combos(cand, a + 1, k, &mut combo, &perp, n, &mut found);
            found
        });
        let normals: BTreeSet<Vec<BigInt>> = per_first.into_iter().flatten().collect();
        Ok(normals
            .into_iter()
            .map(|normal| {
                let values: Vec<BigInt> =
                    self.coords.iter().map(|c| exact::dot_int(&normal, c)).collect();
                let offset = values.iter().min().cloned().expect("nonempty");
                let incidence = PointSet::from_indices(
                    self.points.len(),
                    values.iter().enumerate().filter(|(_, v)| **v == offset).map(|(i, _)| i),
                );
                Facet {
                    normal,
                    offset,
                    incidence,
                }
            })
            .collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_combos(
        &self,
        cand: &[usize],
        from: usize,
        k: usize,
        combo: &mut Vec<usize>,
        perp: &[Vec<BigRational>],
        n: usize,
        found: &mut BTreeSet<Vec<BigInt>>,
    ) {
        if combo.len() == k {
            if let Some(normal) = self.hyperplane_normal(combo, perp, n) {
                found.insert(normal);
            }
            return;
        }
        for b in from..cand.len() {
            if cand.len() - b < k - combo.len() {
                break;
            }
            combo.push(cand[b]);
            self.extend_combos(cand, b + 1, k, combo, perp, n, found);
            combo.pop();
        }
    }

    /// Inner normal of the hyperplane through `combo` within the affine hull,
    /// if it is a supporting hyperplane.
    fn hyperplane_normal(
        &self,
        combo: &[usize],
        perp: &[Vec<BigRational>],
        n: usize,
    ) -> Option<Vec<BigInt>> {
        let base = &self.coords[combo[0]];
        let mut rows: Vec<Vec<BigRational>> = combo[1..]
            .iter()
            .map(|&i| {
                self.coords[i]
                    .iter()
                    .zip(base)
                    .map(|(a, b)| BigRational::from_integer((a - b).into()))
                    .collect()
            })
            .collect();
        rows.extend(perp.iter().cloned());
        let ns = exact::nullspace(&rows, n);
        if ns.len() != 1 {
            return None;
        }
        let q = exact::primitive(&ns[0]);
        let b0 = exact::dot_int(&q, base);
        let mut pos = false;
        let mut neg = false;
        for c in &self.coords {
            let s = exact::dot_int(&q, c) - &b0;
            if s.is_positive() {
                pos = true;
            } else if s.is_negative() {
                neg = true;
            }
            if pos && neg {
                return None;
            }
        }
        if neg {
            Some(q.into_iter().map(|x| -x).collect())
        } else {
            Some(q)
        }
    }

    fn compute_vertices(&self) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| {
                let mut acc = PointSet::full(self.points.len());
                for f in &self.facets {
                    if f.incidence.contains(i) {
                        acc = acc.intersection(&f.incidence);
                    }
                }
                acc.len() == 1
            })
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Generators, graded-lex ascending; the origin is always first.
    pub fn points(&self) -> &[ExponentVector] {
        &self.points
    }

    pub fn vertices(&self) -> Vec<ExponentVector> {
        self.vertices.iter().map(|&i| self.points[i].clone()).collect()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn point_index(&self, k: &ExponentVector) -> Option<usize> {
        self.points.binary_search(k).ok()
    }

    /// `d(q, Γ) = min_{κ ∈ Γ} ⟨q, κ⟩`, attained at a generator.
    pub fn support_value(&self, q: &[BigRational]) -> BigRational {
        self.coords
            .iter()
            .map(|c| {
                q.iter()
                    .zip(c)
                    .map(|(a, &b)| a * BigRational::from_integer(b.into()))
                    .sum::<BigRational>()
            })
            .min()
            .expect("polytope has the origin")
    }

    /// Generators of `Δ(q, Γ)` for an integer direction.
    pub fn face_points(&self, q: &[BigInt]) -> Vec<ExponentVector> {
        let values: Vec<BigInt> = self.coords.iter().map(|c| exact::dot_int(q, c)).collect();
        let min = values.iter().min().expect("nonempty").clone();
        self.points
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v == min)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Largest `t` with `t·e_j ∈ Γ`, computed from the facet description.
    pub fn axis_extent(&self, j: usize) -> BigRational {
        if self.dim == 0 {
            return BigRational::zero();
        }
        // e_j must lie in the linear hull of the generators
        let perp = self.lineality_rows();
        if perp.iter().any(|w| !w[j].is_zero()) {
            return BigRational::zero();
        }
        self.facets
            .iter()
            .filter(|f| f.normal[j].is_negative())
            .map(|f| BigRational::new(f.offset.clone(), f.normal[j].clone()))
            .min()
            .unwrap_or_else(BigRational::zero)
    }

    fn face_dim(&self, set: &PointSet) -> usize {
        let refs: Vec<&[i64]> = set.iter().map(|i| self.coords[i].as_slice()).collect();
        affine_dim(&refs)
    }

    /// All nonempty proper faces, each with a relative-interior witness normal.
    pub fn faces(&self, limits: &EnumerationLimits) -> Result<Vec<Face>, NewtonError> {
        let mut seen: BTreeSet<PointSet> = BTreeSet::new();
        let mut frontier: Vec<PointSet> = Vec::new();
        for f in &self.facets {
            if seen.insert(f.incidence.clone()) {
                frontier.push(f.incidence.clone());
            }
        }
        while let Some(face) = frontier.pop() {
            for f in &self.facets {
                let meet = face.intersection(&f.incidence);
                if !meet.is_empty() && seen.insert(meet.clone()) {
                    if seen.len() > limits.max_faces {
                        return Err(NewtonError::FaceCapExceeded {
                            cap: limits.max_faces,
                        });
                    }
                    frontier.push(meet);
                }
            }
        }
        if seen.len() > limits.max_faces {
            return Err(NewtonError::FaceCapExceeded {
                cap: limits.max_faces,
            });
        }
        let sets: Vec<PointSet> = seen.into_iter().collect();
        Ok(limits.execution.map_slice(&sets, |set| {
            let active: Vec<&Facet> = self
                .facets
                .iter()
                .filter(|f| f.incidence.is_superset(set))
                .collect();
            let mut normal = vec![BigInt::zero(); self.nvars];
            for f in &active {
                for (acc, x) in normal.iter_mut().zip(&f.normal) {
                    *acc += x;
                }
            }
            let normal = exact::primitive_int(&normal);
            let first = set.iter().next().expect("nonempty face");
            let value = exact::dot_int(&normal, &self.coords[first]);
            Face {
                points: set.clone(),
                dim: self.face_dim(set),
                normal,
                value,
                cone_rays: active.iter().map(|f| f.normal.clone()).collect(),
            }
        }))
    }

    /// `Γ_∞`: faces not containing the origin, ordered by dimension then support.
    pub fn faces_at_infinity(
        &self,
        limits: &EnumerationLimits,
    ) -> Result<Vec<FaceAtInfinity>, NewtonError> {
        let origin = 0usize;
        let mut out: Vec<FaceAtInfinity> = self
            .faces(limits)?
            .into_iter()
            .filter(|f| !f.points.contains(origin))
            .map(|f| {
                let support: Vec<ExponentVector> =
                    f.points.iter().map(|i| self.points[i].clone()).collect();
                let vertices = self
                    .vertices
                    .iter()
                    .filter(|&&v| f.points.contains(v))
                    .map(|&v| self.points[v].clone())
                    .collect();
                FaceAtInfinity {
                    id: 0,
                    dim: f.dim,
                    support,
                    vertices,
                    normal: f.normal,
                    value: f.value,
                    cone_rays: f.cone_rays,
                    decomposition: None,
                }
            })
            .collect();
        out.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.support.cmp(&b.support)));
        for (i, f) in out.iter_mut().enumerate() {
            f.id = i + 1;
        }
        Ok(out)
    }
}

/// `Γ(f)`, the hull of `supp(f) ∪ {0}`.
pub fn newton_polytope(f: &Polynomial) -> Result<NewtonPolytope, NewtonError> {
    if f.is_zero() {
        return Err(NewtonError::ZeroPolynomial(0));
    }
    NewtonPolytope::from_points(f.nvars(), f.support())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvenienceReport {
    pub convenient: bool,
    /// Smallest `m` with `x_j^m` in the support, per axis.
    pub axis_powers: Vec<Option<u32>>,
    pub missing_axes: Vec<usize>,
}

pub fn is_convenient(f: &Polynomial) -> ConvenienceReport {
    let mut axis_powers = vec![None; f.nvars()];
    for (k, _) in f.terms() {
        if let Some((j, m)) = k.pure_power() {
            let slot: &mut Option<u32> = &mut axis_powers[j];
            *slot = Some(slot.map_or(m, |old| old.min(m)));
        }
    }
    let missing_axes: Vec<usize> = axis_powers
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_none())
        .map(|(j, _)| j)
        .collect();
    ConvenienceReport {
        convenient: missing_axes.is_empty() && !f.is_zero(),
        axis_powers,
        missing_axes,
    }
}

pub fn minkowski_sum(polys: &[NewtonPolytope]) -> Result<NewtonPolytope, NewtonError> {
    minkowski_sum_with(polys, &EnumerationLimits::default())
}

/// `Γ_1 + … + Γ_p`. Generators are all sums of generators, so every face of
/// the sum has exactly the sums of its component faces' generators.
pub fn minkowski_sum_with(
    polys: &[NewtonPolytope],
    limits: &EnumerationLimits,
) -> Result<NewtonPolytope, NewtonError> {
    let first = polys.first().ok_or(NewtonError::EmptySum)?;
    let n = first.nvars;
    if let Some(bad) = polys.iter().find(|p| p.nvars != n) {
        return Err(NewtonError::DimensionMismatch {
            expected: n,
            got: bad.nvars,
        });
    }
    let mut points: BTreeSet<ExponentVector> = first.points.iter().cloned().collect();
    let mut cands: BTreeSet<ExponentVector> = first.vertices().into_iter().collect();
    for p in &polys[1..] {
        points = points
            .iter()
            .flat_map(|a| p.points.iter().map(move |b| a.checked_add(b)))
            .collect();
        let vs = p.vertices();
        cands = cands
            .iter()
            .flat_map(|a| vs.iter().map(move |b| a.checked_add(b)))
            .collect();
    }
    NewtonPolytope::build(n, points, Some(cands), limits)
}

fn sumset(sets: &[Vec<ExponentVector>], n: usize) -> BTreeSet<ExponentVector> {
    let mut acc: BTreeSet<ExponentVector> = BTreeSet::from([ExponentVector::zero(n)]);
    for s in sets {
        acc = acc
            .iter()
            .flat_map(|a| s.iter().map(move |b| a.checked_add(b)))
            .collect();
    }
    acc
}

/// Splits a face of `Γ_1 + … + Γ_p` into `Δ_i = Δ(q, Γ_i)` using its witness normal.
pub fn decompose_face(
    face: &FaceAtInfinity,
    polys: &[NewtonPolytope],
) -> Result<Vec<Vec<ExponentVector>>, NewtonError> {
    decompose_with_normal(face, &face.normal, polys)
}

/// As [`decompose_face`] but with an explicit direction `q`.
pub fn decompose_with_normal(
    face: &FaceAtInfinity,
    q: &[BigInt],
    polys: &[NewtonPolytope],
) -> Result<Vec<Vec<ExponentVector>>, NewtonError> {
    let n = q.len();
    let parts: Vec<Vec<ExponentVector>> = polys.iter().map(|p| p.face_points(q)).collect();
    let value: BigInt = polys
        .iter()
        .zip(&parts)
        .map(|(p, part)| {
            let k = part.first().expect("faces are nonempty");
            debug_assert_eq!(p.nvars, n);
            exact::dot_int(q, &k.to_i64())
        })
        .sum();
    let support: BTreeSet<ExponentVector> = face.support.iter().cloned().collect();
    let on_plane = face
        .support
        .iter()
        .all(|k| exact::dot_int(q, &k.to_i64()) == value);
    if !on_plane || sumset(&parts, n) != support {
        return Err(NewtonError::WitnessNotSupporting { face: face.id });
    }
    Ok(parts)
}

/// Newton data of a whole system: component polytopes, `Γ(F)`, and `Γ_∞(F)`
/// with decompositions attached.
#[derive(Clone, Debug)]
pub struct SystemNewton {
    pub components: Vec<NewtonPolytope>,
    pub convenience: Vec<ConvenienceReport>,
    pub sum: NewtonPolytope,
    pub faces: Vec<FaceAtInfinity>,
}

impl SystemNewton {
    pub fn analyze(sys: &PolySystem, limits: &EnumerationLimits) -> Result<Self, NewtonError> {
        if let Some(i) = sys.zero_component() {
            return Err(NewtonError::ZeroPolynomial(i));
        }
        let components = sys
            .polys()
            .iter()
            .map(|f| NewtonPolytope::build(f.nvars(), f.support(), None, limits))
            .collect::<Result<Vec<_>, _>>()?;
        let convenience = sys.polys().iter().map(is_convenient).collect();
        let sum = minkowski_sum_with(&components, limits)?;
        let mut faces = sum.faces_at_infinity(limits)?;
        for face in &mut faces {
            face.decomposition = Some(decompose_face(face, &components)?);
        }
        Ok(Self {
            components,
            convenience,
            sum,
            faces,
        })
    }

    pub fn is_convenient(&self) -> bool {
        self.convenience.iter().all(|c| c.convenient)
    }
}
