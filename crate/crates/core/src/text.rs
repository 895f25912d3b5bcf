//! Text form of polynomials and normal-ordered Weyl elements.
//!
//! Grammar (whitespace-insensitive, explicit `*` only):
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := scalar | generator | '(' expr ')'
//! ```
//!
//! Scalars are integers or `a/b` rationals, plus `a` for the adjoined root of
//! an extension field. Generators are `x1..xn`, `u`, `p1..pn` (or `d1..dn` on
//! the Weyl side, `z1..`/`w1..` on the center), `v`, `h`, and `k12` / `k1_10`
//! in the skew flavor, where main generators are `xi1..xi2n`. The parameter
//! `h` also accepts a negative exponent `h^-2`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{BracketKind, Flavor, Mono, NameSide, Terms};
use crate::error::{Error, Result};
use crate::poisson::Poly;
use crate::scalars::Field;
use crate::weyl::{mul_terms, WeylElt};

/// Parse tree of an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprAst {
    Num(BigInt, BigInt),
    Named(String),
    Gen(usize),
    H,
    /// k slot, with the sign from writing k_ji for i < j.
    K(usize, i64),
    Neg(Box<ExprAst>),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i64),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '/' => out.push((start, Tok::Slash)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push((start, Tok::Num(text.parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            _ => return Err(Error::SyntaxError { pos: start, msg: format!("unexpected character '{c}'") }),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    flavor: &'a Flavor,
    side: NameSide,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::SyntaxError { pos: self.here(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut acc = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            ExprAst::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = ExprAst::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = ExprAst::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = ExprAst::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ExprAst> {
        let atom = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(atom);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(&Tok::Minus) {
            if atom != ExprAst::H {
                return self.err("negative exponents are only allowed on h");
            }
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let e: i64 = i64::try_from(&n).map_err(|_| Error::SyntaxError { pos: self.here(), msg: "exponent too large".into() })?;
                if e > i32::MAX as i64 {
                    return self.err("exponent too large");
                }
                Ok(ExprAst::Pow(Box::new(atom), if negative { -e } else { e }))
            }
            _ => self.err("expected an exponent"),
        }
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let pos = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Num(d)) if !d.is_zero() => {
                            self.pos += 1;
                            Ok(ExprAst::Num(n, d))
                        }
                        _ => self.err("expected a nonzero denominator"),
                    }
                } else {
                    Ok(ExprAst::Num(n, BigInt::one()))
                }
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                resolve_name(&name, self.flavor, self.side).map_err(|e| match e {
                    Error::UnknownGenerator(_) => Error::UnknownGenerator(format!("{name} at {pos}")),
                    other => other,
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => self.err("expected a scalar, generator or '('"),
        }
    }
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn resolve_name(name: &str, flavor: &Flavor, side: NameSide) -> Result<ExprAst> {
    let unknown = || Error::UnknownGenerator(name.to_string());
    if name == "h" {
        return if flavor.has_h() { Ok(ExprAst::H) } else { Err(unknown()) };
    }
    for i in 0..flavor.main_count() {
        if flavor.gen_name(i, side) == name {
            return Ok(ExprAst::Gen(i));
        }
    }
    if flavor.kind == BracketKind::Skew {
        if let Some(rest) = name.strip_prefix('k') {
            let (a, b) = match rest.split_once('_') {
                Some((a, b)) => (a, b),
                None if rest.len() == 2 => rest.split_at(1),
                None => return Err(unknown()),
            };
            let (i, j) = (parse_index(a).ok_or_else(unknown)?, parse_index(b).ok_or_else(unknown)?);
            let m = flavor.main_count();
            if i == j || i > m || j > m {
                return Err(unknown());
            }
            let (i, j) = (i - 1, j - 1);
            return Ok(if i < j { ExprAst::K(flavor.k_slot(i, j), 1) } else { ExprAst::K(flavor.k_slot(j, i), -1) });
        }
    }
    Ok(ExprAst::Named(name.to_string()))
}

/// Parses text into an expression tree for the given flavor and naming side.
pub fn parse_expr(text: &str, flavor: &Flavor, side: NameSide) -> Result<ExprAst> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), flavor, side };
    let ast = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(ast)
}

/// Evaluates a tree with the given multiplication on term maps.
pub fn eval_ast<F: Field>(
    ast: &ExprAst,
    flavor: &Flavor,
    spec: &F::Spec,
    mul: &dyn Fn(&Terms<F>, &Terms<F>) -> Terms<F>,
) -> Result<Terms<F>> {
    let ev = |a: &ExprAst| eval_ast(a, flavor, spec, mul);
    Ok(match ast {
        ExprAst::Num(n, d) => {
            let v = F::from_bigint(spec, n).div(&F::from_bigint(spec, d)).map_err(|_| Error::NotPIntegral {
                value: format!("{n}/{d}"),
                p: F::characteristic(spec),
            })?;
            Terms::constant(flavor, v)
        }
        ExprAst::Named(name) => match F::named_constant(spec, name) {
            Some(v) => Terms::constant(flavor, v),
            None => return Err(Error::UnknownGenerator(name.clone())),
        },
        ExprAst::Gen(i) => Terms::generator(flavor, spec, *i),
        ExprAst::H => {
            let mut m = Mono::one(flavor);
            m.e[flavor.h_slot()] = 1;
            Terms::from_term(m, F::one(spec))
        }
        ExprAst::K(slot, sign) => {
            let mut m = Mono::one(flavor);
            m.e[*slot] = 1;
            Terms::from_term(m, F::from_i64(spec, *sign))
        }
        ExprAst::Neg(a) => ev(a)?.neg(),
        ExprAst::Add(a, b) => ev(a)?.add(&ev(b)?),
        ExprAst::Sub(a, b) => ev(a)?.sub(&ev(b)?),
        ExprAst::Mul(a, b) => mul(&ev(a)?, &ev(b)?),
        ExprAst::Pow(a, e) => {
            if *e < 0 {
                // Only h^-e reaches here.
                let mut m = Mono::one(flavor);
                m.e[flavor.h_slot()] = *e as i32;
                Terms::from_term(m, F::one(spec))
            } else {
                let base = ev(a)?;
                let mut acc = Terms::constant(flavor, F::one(spec));
                for _ in 0..*e {
                    acc = mul(&acc, &base);
                }
                acc
            }
        }
    })
}

/// Parses commutative terms with the given generator naming.
pub fn parse_terms<F: Field>(text: &str, flavor: Flavor, spec: &F::Spec, side: NameSide) -> Result<Terms<F>> {
    let ast = parse_expr(text, &flavor, side)?;
    eval_ast(&ast, &flavor, spec, &|a, b| a.mul_commutative(b, &flavor, None))
}

/// Parses a commutative polynomial with P-side names (x, p).
pub fn parse_poly<F: Field>(text: &str, flavor: Flavor, spec: &F::Spec) -> Result<Poly<F>> {
    Ok(Poly::new(flavor, spec.clone(), parse_terms(text, flavor, spec, NameSide::P)?))
}

/// Parses a center polynomial with z/w names.
pub fn parse_center<F: Field>(text: &str, flavor: Flavor, spec: &F::Spec) -> Result<Poly<F>> {
    Ok(Poly::new(flavor, spec.clone(), parse_terms(text, flavor, spec, NameSide::Center)?))
}

/// Parses a Weyl expression, preserving the written product order, into normal form.
pub fn parse_weyl<F: Field>(text: &str, flavor: Flavor, spec: &F::Spec) -> Result<WeylElt<F>> {
    let ast = parse_expr(text, &flavor, NameSide::W)?;
    let terms = eval_ast(&ast, &flavor, spec, &|a, b| mul_terms(a, b, &flavor, spec, None))?;
    Ok(WeylElt::new(flavor, spec.clone(), terms))
}

fn k_name(i: usize, j: usize) -> String {
    if i < 9 && j < 9 {
        format!("k{}{}", i + 1, j + 1)
    } else {
        format!("k{}_{}", i + 1, j + 1)
    }
}

fn mono_factors(m: &Mono, flavor: &Flavor, side: NameSide) -> Vec<String> {
    let mut out = Vec::new();
    let pow = |name: String, e: i32| if e == 1 { name } else { format!("{name}^{e}") };
    for i in 0..flavor.main_count() {
        if m.e[i] != 0 {
            out.push(pow(flavor.gen_name(i, side), m.e[i]));
        }
    }
    let h = m.e[flavor.h_slot()];
    if h != 0 {
        out.push(pow("h".into(), h));
    }
    for idx in 0..flavor.k_count() {
        let e = m.e[flavor.main_count() + 1 + idx];
        if e != 0 {
            let (i, j) = flavor.k_pair(idx);
            out.push(pow(k_name(i, j), e));
        }
    }
    out
}

/// Canonical text: terms in descending graded-lex order, generators in the
/// fixed normal order.
pub fn print_terms<F: Field>(t: &Terms<F>, flavor: &Flavor, side: NameSide) -> String {
    if t.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (idx, (m, c)) in t.sorted_desc().into_iter().enumerate() {
        let negative = c.is_negative();
        let mag = if negative { c.neg() } else { c.clone() };
        if idx == 0 {
            if negative {
                s.push('-');
            }
        } else {
            s.push_str(if negative { " - " } else { " + " });
        }
        let factors = mono_factors(m, flavor, side);
        let coeff = mag.to_string();
        let coeff = if coeff.contains('+') { format!("({coeff})") } else { coeff };
        if factors.is_empty() {
            s.push_str(&coeff);
        } else {
            if !mag.is_one() {
                s.push_str(&coeff);
                s.push('*');
            }
            s.push_str(&factors.join("*"));
        }
    }
    s
}

pub fn print_poly<F: Field>(f: &Poly<F>) -> String {
    print_terms(&f.terms, &f.flavor, NameSide::P)
}

pub fn print_center<F: Field>(f: &Poly<F>) -> String {
    print_terms(&f.terms, &f.flavor, NameSide::Center)
}

pub fn print_weyl<F: Field>(a: &WeylElt<F>) -> String {
    print_terms(&a.terms, &a.flavor, NameSide::W)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{Gf, GfSpec, Rational};

    #[test]
    fn parse_examples() {
        let f = Flavor::standard(1);
        let a = parse_poly::<Rational>("x1 + p1^2", f, &()).unwrap();
        assert_eq!(print_poly(&a), "p1^2 + x1");
        let w = parse_weyl::<Rational>("d1*x1", f, &()).unwrap();
        assert_eq!(print_weyl(&w), "x1*d1 + 1");
        assert!(matches!(parse_poly::<Rational>("x1 + q2", f, &()), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let f = Flavor::standard(1);
        match parse_poly::<Rational>("x1 + * p1", f, &()) {
            Err(Error::SyntaxError { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly::<Rational>("x1 p1", f, &()), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse_poly::<Rational>("(x1", f, &()), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse_poly::<Rational>("x1^-1", f, &()), Err(Error::SyntaxError { .. })));
    }

    #[test]
    fn skew_names_and_signs() {
        let s = Flavor::skew(1);
        let a = parse_poly::<Rational>("k21 + xi1*h", s, &()).unwrap();
        assert_eq!(print_poly(&a), "xi1*h - k12");
    }

    #[test]
    fn rationals_and_extension_constants() {
        let f = Flavor::h_augmented(1).with_aux();
        let a = parse_poly::<Rational>("-3/2*x1*u + h^-1*v", f, &()).unwrap();
        let again = parse_poly::<Rational>(&print_poly(&a), f, &()).unwrap();
        assert_eq!(a, again);
        let f4 = GfSpec::extension(2, vec![1, 1, 1]).unwrap();
        let b = parse_poly::<Gf>("a*x1 + (a+1)*p1", Flavor::standard(1), &f4).unwrap();
        let printed = print_poly(&b);
        assert_eq!(parse_poly::<Gf>(&printed, Flavor::standard(1), &f4).unwrap(), b);
        assert!(matches!(parse_poly::<Rational>("a*x1", Flavor::standard(1), &()), Err(Error::UnknownGenerator(_))));
    }
}
