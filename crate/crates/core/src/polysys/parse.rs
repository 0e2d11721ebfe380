//! Line-oriented parser for polynomial systems.
//!
//! ```text
//! # comment
//! vars x, y          (optional roster; otherwise first-appearance order)
//! f1 = x + y
//! f2 = x^2 + y^2 - 1
//! ```

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{ExponentVector, Polynomial};
use super::{ParseError, ParseErrorKind, PolySystem};

pub const DEFAULT_MAX_VARS: usize = 8;

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub max_vars: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            max_vars: DEFAULT_MAX_VARS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Decimal(BigRational),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

fn lex(line_no: usize, src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[frac_start..i].iter().collect();
                if int_part.is_empty() && frac.is_empty() {
                    return Err(err(line_no, col, ParseErrorKind::UnexpectedChar('.')));
                }
                let digits = format!("{int_part}{frac}");
                let numer: BigInt = digits.parse().expect("digits only");
                let denom = num_traits::pow(BigInt::from(10), frac.len());
                out.push(Spanned {
                    tok: Tok::Decimal(BigRational::new(numer, denom)),
                    col,
                });
            } else {
                out.push(Spanned {
                    tok: Tok::Int(int_part.parse().expect("digits only")),
                    col,
                });
            }
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '=' => Tok::Eq,
            ',' => Tok::Comma,
            other => return Err(err(line_no, col, ParseErrorKind::UnexpectedChar(other))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

/// A term before variables are resolved to indices.
struct RawTerm {
    coeff: BigRational,
    factors: Vec<(String, u32, usize)>,
}

struct LineParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|s| s.col).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(err(self.line, self.col(), kind))
    }

    fn expected<T>(&self, what: &'static str) -> Result<T, ParseError> {
        match self.peek() {
            None => self.fail(ParseErrorKind::UnexpectedEnd(what)),
            Some(t) => self.fail(ParseErrorKind::Expected {
                expected: what,
                found: describe(t),
            }),
        }
    }

    fn expr(&mut self) -> Result<Vec<RawTerm>, ParseError> {
        let mut terms = Vec::new();
        let mut sign = BigRational::one();
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                sign = -sign;
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let mut t = self.term()?;
            t.coeff *= &sign;
            terms.push(t);
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    sign = BigRational::one();
                }
                Some(Tok::Minus) => {
                    self.bump();
                    sign = -BigRational::one();
                }
                None => return Ok(terms),
                Some(_) => return self.expected("'+', '-' or end of line"),
            }
        }
    }

    fn coeff(&mut self) -> Result<Option<BigRational>, ParseError> {
        match self.peek() {
            Some(Tok::Decimal(d)) => {
                self.bump();
                Ok(Some(d.clone()))
            }
            Some(Tok::Int(n)) => {
                self.bump();
                let numer = n.clone();
                if self.peek() == Some(&Tok::Slash) {
                    self.bump();
                    match self.peek() {
                        Some(Tok::Int(d)) if !d.is_zero() => {
                            let d = d.clone();
                            self.bump();
                            Ok(Some(BigRational::new(numer, d)))
                        }
                        Some(Tok::Int(_)) => self.fail(ParseErrorKind::ZeroDenominator),
                        _ => self.expected("positive integer denominator"),
                    }
                } else {
                    Ok(Some(BigRational::from_integer(numer)))
                }
            }
            _ => Ok(None),
        }
    }

    fn factor(&mut self) -> Result<(String, u32, usize), ParseError> {
        let col = self.col();
        let name = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.expected("variable"),
        };
        self.bump();
        let mut exp = 1u32;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            match self.peek() {
                Some(Tok::Int(n)) => {
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| err(self.line, self.col(), ParseErrorKind::BadExponent))?;
                    if e == 0 {
                        return self.fail(ParseErrorKind::BadExponent);
                    }
                    self.bump();
                    exp = e;
                }
                _ => return self.expected("positive integer exponent"),
            }
        }
        Ok((name, exp, col))
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let coeff = self.coeff()?;
        let mut factors = Vec::new();
        match (coeff.is_some(), self.peek()) {
            (true, Some(Tok::Star)) => {
                self.bump();
                factors.push(self.factor()?);
            }
            (_, Some(Tok::Ident(_))) => factors.push(self.factor()?),
            (true, _) => {
                return Ok(RawTerm {
                    coeff: coeff.expect("checked"),
                    factors,
                })
            }
            (false, _) => return self.expected("coefficient or variable"),
        }
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    factors.push(self.factor()?);
                }
                Some(Tok::Ident(_)) => factors.push(self.factor()?),
                _ => break,
            }
        }
        Ok(RawTerm {
            coeff: coeff.unwrap_or_else(BigRational::one),
            factors,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Int(n) => format!("number {n}"),
        Tok::Decimal(d) => format!("number {d}"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::Eq => "'='".into(),
        Tok::Comma => "','".into(),
    }
}

struct Definition {
    name: String,
    line: usize,
    terms: Vec<RawTerm>,
}

pub fn parse_system_with(text: &str, opts: &ParseOptions) -> Result<PolySystem, ParseError> {
    let mut defs: Vec<Definition> = Vec::new();
    let mut declared: Vec<(String, usize, usize)> = Vec::new();
    let mut def_lines: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let end_col = raw.chars().count() + 1;
        let mut p = LineParser {
            toks: &toks,
            pos: 0,
            line,
            end_col,
        };
        let name = match p.bump() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => {
                p.pos = 0;
                return p.expected("component name");
            }
        };
        if name == "vars" && p.peek() != Some(&Tok::Eq) {
            loop {
                let col = p.col();
                match p.bump() {
                    Some(Tok::Ident(v)) => declared.push((v.clone(), line, col)),
                    _ => {
                        p.pos -= 1;
                        return p.expected("variable name");
                    }
                }
                match p.peek() {
                    Some(Tok::Comma) => {
                        p.bump();
                    }
                    None => break,
                    Some(_) => return p.expected("',' or end of line"),
                }
            }
            continue;
        }
        if p.peek() != Some(&Tok::Eq) {
            return p.expected("'='");
        }
        p.bump();
        if let Some(first) = def_lines.get(&name) {
            return Err(err(
                line,
                1,
                ParseErrorKind::DuplicateComponent {
                    name,
                    first_line: *first,
                },
            ));
        }
        let terms = p.expr()?;
        def_lines.insert(name.clone(), line);
        defs.push(Definition { name, line, terms });
    }

    if defs.is_empty() {
        return Err(err(1, 1, ParseErrorKind::Empty));
    }

    let mut varnames: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut register = |name: &str, line: usize, col: usize| -> Result<usize, ParseError> {
        if def_lines.contains_key(name) {
            return Err(err(line, col, ParseErrorKind::ComponentAsVariable(name.into())));
        }
        if let Some(&i) = index.get(name) {
            return Ok(i);
        }
        if varnames.len() == opts.max_vars {
            return Err(err(
                line,
                col,
                ParseErrorKind::TooManyVariables {
                    limit: opts.max_vars,
                },
            ));
        }
        index.insert(name.to_string(), varnames.len());
        varnames.push(name.to_string());
        Ok(varnames.len() - 1)
    };
    for (v, line, col) in &declared {
        register(v, *line, *col)?;
    }
    let mut resolved = Vec::with_capacity(defs.len());
    for d in &defs {
        let mut terms = Vec::with_capacity(d.terms.len());
        for t in &d.terms {
            let mut exps: Vec<(usize, u32)> = Vec::with_capacity(t.factors.len());
            for (name, e, col) in &t.factors {
                exps.push((register(name, d.line, *col)?, *e));
            }
            terms.push((t.coeff.clone(), exps));
        }
        resolved.push(terms);
    }

    let n = varnames.len();
    let polys = resolved
        .into_iter()
        .map(|terms| {
            Polynomial::from_terms(
                n,
                terms.into_iter().map(|(c, exps)| {
                    let mut k = vec![0u32; n];
                    for (j, e) in exps {
                        k[j] += e;
                    }
                    (ExponentVector::new(k), c)
                }),
            )
            .expect("exponent vectors sized to roster")
        })
        .collect();
    Ok(PolySystem::new(
        defs.into_iter().map(|d| d.name).collect(),
        varnames,
        polys,
    ))
}
