//! Polynomial systems `F = (f_1, …, f_p)` over exact rationals.

mod compiled;
mod parse;
mod poly;

use std::fmt;

use thiserror::Error;

pub use compiled::{CompiledDiff, CompiledPoly, CompiledSystem};
pub use parse::{parse_system_with, ParseOptions, DEFAULT_MAX_VARS};
pub use poly::{ExponentVector, PolyDisplay, Polynomial};

pub(crate) use poly::rational_to_f64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unexpected end of line, expected {0}")]
    UnexpectedEnd(&'static str),
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("exponent must be a positive integer")]
    BadExponent,
    #[error("component '{name}' already defined on line {first_line}")]
    DuplicateComponent { name: String, first_line: usize },
    #[error("component name '{0}' cannot be used as a variable")]
    ComponentAsVariable(String),
    #[error("too many variables (limit {limit})")]
    TooManyVariables { limit: usize },
    #[error("input defines no components")]
    Empty,
}

/// A polynomial map with named components and a variable roster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    names: Vec<String>,
    varnames: Vec<String>,
    polys: Vec<Polynomial>,
}

impl PolySystem {
    /// Panics if component counts disagree or a component has the wrong arity.
    pub fn new(names: Vec<String>, varnames: Vec<String>, polys: Vec<Polynomial>) -> Self {
        assert_eq!(names.len(), polys.len(), "one name per component");
        assert!(!polys.is_empty(), "a system needs at least one component");
        assert!(
            polys.iter().all(|p| p.nvars() == varnames.len()),
            "every component must use the system's variable count"
        );
        Self {
            names,
            varnames,
            polys,
        }
    }

    /// Builds a system with default names `f1..fp` and variables `x1..xn`.
    pub fn from_polys(polys: Vec<Polynomial>) -> Self {
        let n = polys.first().map(Polynomial::nvars).unwrap_or(0);
        let names = (1..=polys.len()).map(|i| format!("f{i}")).collect();
        let varnames = (1..=n).map(|j| format!("x{j}")).collect();
        Self::new(names, varnames, polys)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_system_with(text, &ParseOptions::default())
    }

    pub fn nvars(&self) -> usize {
        self.varnames.len()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// `d = max_i deg f_i`.
    pub fn degree(&self) -> u32 {
        self.polys.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn varnames(&self) -> &[String] {
        &self.varnames
    }

    /// Index of the first identically-zero component, if any.
    pub fn zero_component(&self) -> Option<usize> {
        self.polys.iter().position(Polynomial::is_zero)
    }

    pub fn compile(&self) -> CompiledSystem {
        CompiledSystem::new(self)
    }
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.varnames.join(", "))?;
        for (name, p) in self.names.iter().zip(&self.polys) {
            writeln!(f, "{name} = {}", p.display(&self.varnames))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    #[test]
    fn parses_half_disk_system() {
        let sys = PolySystem::parse("f1 = x + y\nf2 = x^2 + y^2 - 1").unwrap();
        assert_eq!((sys.len(), sys.nvars(), sys.degree()), (2, 2, 2));
        let supp: Vec<_> = sys.polys()[1].support().into_iter().collect();
        assert_eq!(supp, vec![ev(&[0, 0]), ev(&[0, 2]), ev(&[2, 0])]);
        assert_eq!(sys.varnames(), &["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn zero_component_has_empty_support() {
        let sys = PolySystem::parse("f1 = 0").unwrap();
        assert!(sys.polys()[0].is_zero());
        assert_eq!(sys.nvars(), 0);
        assert_eq!(sys.zero_component(), Some(0));
    }

    #[test]
    fn like_terms_collect() {
        let sys = PolySystem::parse("f1 = 2*x*x - x^2").unwrap();
        let p = &sys.polys()[0];
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&ev(&[2])), BigRational::from_integer(1.into()));
    }

    #[test]
    fn coefficient_forms() {
        let sys = PolySystem::parse("g = 3/4*x y^2 + 0.5x - 2 # trailing comment").unwrap();
        let p = &sys.polys()[0];
        assert_eq!(p.coefficient(&ev(&[1, 2])), BigRational::new(3.into(), 4.into()));
        assert_eq!(p.coefficient(&ev(&[1, 0])), BigRational::new(1.into(), 2.into()));
        assert_eq!(p.coefficient(&ev(&[0, 0])), BigRational::from_integer((-2).into()));
    }

    #[test]
    fn vars_line_fixes_order() {
        let sys = PolySystem::parse("vars z, y, x\nf = x + y^2 + z^3").unwrap();
        assert_eq!(sys.varnames(), &["z".to_string(), "y".into(), "x".into()]);
        assert_eq!(sys.polys()[0].coefficient(&ev(&[3, 0, 0])), BigRational::from_integer(1.into()));
    }

    #[test]
    fn syntax_error_has_location() {
        let e = PolySystem::parse("f1 = x +\nf2 = y").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd(_)));

        let e = PolySystem::parse("f1 = x\nf2 = y $ 2").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
    }

    #[test]
    fn duplicate_component_rejected() {
        let e = PolySystem::parse("f = x\nf = y").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::DuplicateComponent { first_line: 1, .. }));
    }

    #[test]
    fn variable_limit_enforced() {
        let text = "f = a + b + c";
        let e = parse_system_with(text, &ParseOptions { max_vars: 2 }).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TooManyVariables { limit: 2 });
        assert_eq!(e.column, 13);
        assert!(PolySystem::parse("f = a+b+c+d+e+g+h+i+j").is_err());
    }

    #[test]
    fn component_reference_rejected() {
        let e = PolySystem::parse("f = x\ng = f + 1").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ComponentAsVariable(_)));
    }

    fn arb_system() -> impl Strategy<Value = PolySystem> {
        let n = 1usize..=4;
        n.prop_flat_map(|n| {
            let term = (
                -20i64..=20,
                1i64..=6,
                proptest::collection::vec(0u32..=4, n),
            );
            let poly = proptest::collection::vec(term, 0..6);
            proptest::collection::vec(poly, 1..=3).prop_map(move |polys| {
                PolySystem::from_polys(
                    polys
                        .into_iter()
                        .map(|terms| {
                            Polynomial::from_terms(
                                n,
                                terms.into_iter().map(|(a, b, k)| {
                                    (ExponentVector::new(k), BigRational::new(a.into(), b.into()))
                                }),
                            )
                            .unwrap()
                        })
                        .collect(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(sys in arb_system()) {
            let text = sys.to_string();
            let back = PolySystem::parse(&text).unwrap();
            prop_assert_eq!(back.polys(), sys.polys());
        }

        #[test]
        fn principal_part_is_idempotent(sys in arb_system(), mask in proptest::collection::vec(any::<bool>(), 8)) {
            let f = &sys.polys()[0];
            let keep: Vec<ExponentVector> = f
                .support()
                .into_iter()
                .zip(mask.iter().cycle())
                .filter(|(_, &m)| m)
                .map(|(k, _)| k)
                .collect();
            let once = f.principal_part(&keep);
            prop_assert_eq!(once.principal_part(&keep), once);
        }

        #[test]
        fn evaluation_is_additive_exactly(sys in arb_system(), pts in proptest::collection::vec((-9i64..=9, 1i64..=5), 4)) {
            let f = &sys.polys()[0];
            let g = &sys.polys()[sys.len() - 1];
            let x: Vec<BigRational> = pts
                .iter()
                .take(f.nvars())
                .map(|&(a, b)| BigRational::new(a.into(), b.into()))
                .collect();
            let lhs = (f + g).evaluate_exact(&x).unwrap();
            let rhs = f.evaluate_exact(&x).unwrap() + g.evaluate_exact(&x).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn gradient_matches_central_differences(sys in arb_system(), pts in proptest::collection::vec(-1.5f64..1.5, 4)) {
            let f = &sys.polys()[0];
            let x = &pts[..f.nvars()];
            let g = f.gradient(x).unwrap();
            let h = 1e-5;
            for j in 0..f.nvars() {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let fd = (f.evaluate(&xp).unwrap() - f.evaluate(&xm).unwrap()) / (2.0 * h);
                let scale = 1.0 + g[j].abs().max(fd.abs());
                prop_assert!((fd - g[j]).abs() / scale < 1e-5, "j={} fd={} g={}", j, fd, g[j]);
            }
        }
    }
}
