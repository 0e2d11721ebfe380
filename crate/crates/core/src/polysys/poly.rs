use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PolyError;

/// Exponent vector `κ` of a monomial `x^κ`.
///
/// Ordered graded-lexicographically: total degree first, then entrywise
/// lexicographic with `x_1` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    /// Unit vector `m·e_j`.
    pub fn axis(nvars: usize, j: usize, m: u32) -> Self {
        let mut v = vec![0; nvars];
        v[j] = m;
        Self(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|κ|`, the total degree.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// If `κ = m·e_j` with `m > 0`, returns `(j, m)`.
    pub fn pure_power(&self) -> Option<(usize, u32)> {
        let mut found = None;
        for (j, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some((j, e));
            }
        }
        found
    }

    pub fn checked_add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Exponents as signed integers, for polytope arithmetic.
    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&e| e as i64).collect()
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<ExponentVector, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Self::monomial(ExponentVector::zero(nvars), c)
    }

    pub fn monomial(exponent: ExponentVector, coeff: BigRational) -> Self {
        let nvars = exponent.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exponent, coeff);
        }
        Self { nvars, terms }
    }

    /// The coordinate function `x_j`.
    pub fn variable(nvars: usize, j: usize) -> Self {
        Self::monomial(ExponentVector::axis(nvars, j, 1), BigRational::one())
    }

    /// Collects like terms and drops zero coefficients.
    ///
    /// Every exponent vector must have length `nvars`.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (ExponentVector, BigRational)>,
    {
        let mut out = Self::zero(nvars);
        for (k, c) in terms {
            if k.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    got: k.len(),
                });
            }
            out.add_term(k, c);
        }
        Ok(out)
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        Self::from_terms(
            nvars,
            terms
                .iter()
                .map(|(c, e)| (ExponentVector::new(e.to_vec()), BigRational::from_integer((*c).into()))),
        )
        .expect("exponent length matches nvars")
    }

    fn add_term(&mut self, k: ExponentVector, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &ExponentVector) -> BigRational {
        self.terms.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> BTreeSet<ExponentVector> {
        self.terms.keys().cloned().collect()
    }

    /// Maximum total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(ExponentVector::degree).max().unwrap_or(0)
    }

    fn check_dim(&self, len: usize) -> Result<(), PolyError> {
        if len == self.nvars {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                got: len,
            })
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.check_dim(x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(k, c)| rational_to_f64(c) * monomial_value(k.entries(), x))
            .sum())
    }

    pub fn evaluate_exact(&self, x: &[BigRational]) -> Result<BigRational, PolyError> {
        self.check_dim(x.len())?;
        let mut acc = BigRational::zero();
        for (k, c) in &self.terms {
            let mut term = c.clone();
            for (xj, &e) in x.iter().zip(k.entries()) {
                if e > 0 {
                    term *= num_traits::pow(xj.clone(), e as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Symbolic partial derivative `∂f/∂x_j`.
    pub fn derivative(&self, j: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            let e = k.entries()[j];
            if e == 0 {
                continue;
            }
            let mut lowered = k.entries().to_vec();
            lowered[j] -= 1;
            out.add_term(
                ExponentVector::new(lowered),
                c * BigRational::from_integer(BigInt::from(e)),
            );
        }
        out
    }

    /// `x_j · ∂f/∂x_j`, which keeps every exponent vector in place.
    pub fn euler_partial(&self, j: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            let e = k.entries()[j];
            if e > 0 {
                out.add_term(k.clone(), c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.check_dim(x.len())?;
        (0..self.nvars)
            .map(|j| self.derivative(j).evaluate(x))
            .collect()
    }

    /// Principal part: the sub-sum of terms whose exponents lie in `face_support`.
    pub fn principal_part<'a, I>(&self, face_support: I) -> Polynomial
    where
        I: IntoIterator<Item = &'a ExponentVector>,
    {
        let keep: BTreeSet<&ExponentVector> = face_support.into_iter().collect();
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Polynomial {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// Human-readable form that the system parser accepts back.
    pub fn display<'a>(&'a self, varnames: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, varnames }
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[inline]
pub(crate) fn monomial_value(exps: &[u32], x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (&e, &xj) in exps.iter().zip(x) {
        if e > 0 {
            v *= xj.powi(e as i32);
        }
    }
    v
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable count mismatch");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable count mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka.checked_add(kb), ca * cb);
            }
        }
        out
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    varnames: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (idx, (k, c)) in self.poly.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (idx, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors = Vec::new();
            for (j, &e) in k.entries().iter().enumerate() {
                let name = self
                    .varnames
                    .get(j)
                    .map(String::as_str)
                    .unwrap_or("?");
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            let coeff = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            if factors.is_empty() {
                f.write_str(&coeff)?;
            } else if abs.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{coeff}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}
