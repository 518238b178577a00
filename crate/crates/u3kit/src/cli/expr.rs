//! Function expressions: `e(P)` for a polynomial `P` in the coordinates with rational
//! coefficients, `ind{...}`, numbers, `i`, sums, differences, products, and division by scalars.
//!
//! Variables are `x` on a cyclic group and `x1, ..., xk` on any group; coordinates are read as
//! integers in `[0, n_i)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{e_rat, frac_rat, GroupFunction, GroupSpec, PhaseMap, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            out.push((pos, Tok::Num(chars[start..i].iter().map(|c| c.1).collect())));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|c| c.1).collect())));
        } else if "+-*/^(){},".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

/// A polynomial with rational coefficients, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
struct Poly(BTreeMap<Vec<u32>, Rational>);

impl Poly {
    fn constant(k: usize, c: Rational) -> Self {
        let mut m = BTreeMap::new();
        if c != Rational::from_integer(0) {
            m.insert(vec![0; k], c);
        }
        Poly(m)
    }

    fn var(k: usize, i: usize) -> Self {
        let mut e = vec![0; k];
        e[i] = 1;
        Poly(BTreeMap::from([(e, Rational::from_integer(1))]))
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::from_integer(0)),
            1 => self.0.iter().find(|(e, _)| e.iter().all(|&d| d == 0)).map(|(_, &c)| c),
            _ => None,
        }
    }

    fn add(mut self, other: &Poly, sign: i64) -> Poly {
        for (e, &c) in &other.0 {
            let v = *self.0.get(e).unwrap_or(&Rational::from_integer(0)) + c * sign;
            if v == Rational::from_integer(0) {
                self.0.remove(e);
            } else {
                self.0.insert(e.clone(), v);
            }
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let k = self.0.keys().next().or(other.0.keys().next()).map_or(0, Vec::len);
        let mut out = Poly::constant(k, Rational::from_integer(0));
        for (ea, &ca) in &self.0 {
            for (eb, &cb) in &other.0 {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out = out.add(&Poly(BTreeMap::from([(e, ca * cb)])), 1);
            }
        }
        out
    }

    /// `P(x) mod 1`, exactly.
    fn eval(&self, x: &[u64]) -> Rational {
        let mut acc = Rational::from_integer(0);
        for (e, c) in &self.0 {
            let q = *c.denom() as i128;
            let mut v = (*c.numer() as i128).rem_euclid(q);
            for (&xi, &d) in x.iter().zip(e) {
                for _ in 0..d {
                    v = v * (xi as i128 % q) % q;
                }
            }
            acc = frac_rat(acc + Rational::new(v as i64, q as i64));
        }
        acc
    }
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(Complex64),
    Func(Vec<Complex64>),
}

impl Val {
    fn combine(self, other: Val, op: impl Fn(Complex64, Complex64) -> Complex64) -> Val {
        match (self, other) {
            (Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(op(a, b)),
            (Val::Scalar(a), Val::Func(v)) => Val::Func(v.into_iter().map(|b| op(a, b)).collect()),
            (Val::Func(v), Val::Scalar(b)) => Val::Func(v.into_iter().map(|a| op(a, b)).collect()),
            (Val::Func(u), Val::Func(v)) => Val::Func(u.into_iter().zip(v).map(|(a, b)| op(a, b)).collect()),
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    g: &'a GroupSpec,
}

impl<'a> Parser<'a> {
    fn new(s: &str, g: &'a GroupSpec) -> Result<Self> {
        Ok(Self { toks: tokenize(s)?, at: 0, end: s.len(), g })
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn finish(&self) -> Result<()> {
        if self.at < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Val> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v = v.combine(self.term()?, |a, b| a + b);
            } else if self.eat('-') {
                v = v.combine(self.term()?, |a, b| a - b);
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<Val> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v = v.combine(self.unary()?, |a, b| a * b);
            } else if self.eat('/') {
                let pos = self.pos();
                match self.unary()? {
                    Val::Scalar(d) if d.norm() > 0.0 => v = v.combine(Val::Scalar(d), |a, b| a / b),
                    _ => return Err(Error::Parse { pos, msg: "divisor must be a nonzero scalar".into() }),
                }
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Val> {
        if self.eat('-') {
            return Ok(self.unary()?.combine(Val::Scalar(Complex64::new(-1.0, 0.0)), |a, b| a * b));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Val> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.at += 1;
                let v: f64 = s.parse().map_err(|_| Error::Parse { pos, msg: format!("bad number {s:?}") })?;
                Ok(Val::Scalar(Complex64::new(v, 0.0)))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(id)) => {
                self.at += 1;
                match id.as_str() {
                    "i" => Ok(Val::Scalar(Complex64::new(0.0, 1.0))),
                    "e" => {
                        self.expect('(')?;
                        let p = self.poly()?;
                        self.expect(')')?;
                        let g = self.g;
                        Ok(Val::Func((0..g.len()).map(|i| e_rat(p.eval(&g.coords(i)))).collect()))
                    }
                    "ind" => {
                        self.expect('{')?;
                        let mut v = vec![Complex64::new(0.0, 0.0); self.g.len()];
                        if !self.eat('}') {
                            loop {
                                let x = self.element()?;
                                v[x] = Complex64::new(1.0, 0.0);
                                if self.eat('}') {
                                    break;
                                }
                                self.expect(',')?;
                            }
                        }
                        Ok(Val::Func(v))
                    }
                    _ => Err(Error::Parse { pos, msg: format!("unknown name {id:?} (variables only appear inside e(...))") }),
                }
            }
            _ => self.err("expected a number, e(...), ind{...} or parenthesis"),
        }
    }

    /// An element index, or a coordinate tuple `(a, b, ...)`.
    fn element(&mut self) -> Result<usize> {
        let pos = self.pos();
        let g = self.g;
        if self.eat('(') {
            let mut coords = vec![self.integer()?];
            while self.eat(',') {
                coords.push(self.integer()?);
            }
            self.expect(')')?;
            if coords.len() != g.rank() {
                return Err(Error::Parse { pos, msg: format!("expected {} coordinates", g.rank()) });
            }
            return Ok(g.index_of_ints(&coords));
        }
        let x = self.integer()?;
        if x < 0 || x as usize >= g.len() {
            return Err(Error::Parse { pos, msg: format!("element {x} out of range for {g}") });
        }
        Ok(x as usize)
    }

    fn integer(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.at += 1;
                let v: i64 = s.parse().map_err(|_| Error::Parse { pos, msg: format!("expected an integer, got {s:?}") })?;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn poly(&mut self) -> Result<Poly> {
        let mut p = self.pterm()?;
        loop {
            if self.eat('+') {
                p = p.add(&self.pterm()?, 1);
            } else if self.eat('-') {
                p = p.add(&self.pterm()?, -1);
            } else {
                return Ok(p);
            }
        }
    }

    fn pterm(&mut self) -> Result<Poly> {
        let mut p = self.punary()?;
        loop {
            if self.eat('*') {
                p = p.mul(&self.punary()?);
            } else if self.eat('/') {
                let pos = self.pos();
                match self.punary()?.as_constant() {
                    Some(c) if c != Rational::from_integer(0) => {
                        p = p.mul(&Poly::constant(self.g.rank(), c.recip()));
                    }
                    _ => return Err(Error::Parse { pos, msg: "divisor must be a nonzero constant".into() }),
                }
            } else {
                return Ok(p);
            }
        }
    }

    fn punary(&mut self) -> Result<Poly> {
        if self.eat('-') {
            let k = self.g.rank();
            return Ok(Poly::constant(k, Rational::from_integer(0)).add(&self.punary()?, -1));
        }
        let base = self.patom()?;
        if self.eat('^') {
            let pos = self.pos();
            let d = self.integer()?;
            if !(0..=16).contains(&d) {
                return Err(Error::Parse { pos, msg: "exponent must lie in 0..=16".into() });
            }
            let mut out = Poly::constant(self.g.rank(), Rational::from_integer(1));
            for _ in 0..d {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn patom(&mut self) -> Result<Poly> {
        let k = self.g.rank();
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.at += 1;
                Ok(Poly::constant(k, decimal(&s).ok_or_else(|| Error::Parse { pos, msg: format!("bad number {s:?}") })?))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let p = self.poly()?;
                self.expect(')')?;
                Ok(p)
            }
            Some(Tok::Ident(id)) => {
                self.at += 1;
                let i = if id == "x" && k == 1 {
                    0
                } else {
                    match id.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                        Some(i) if (1..=k).contains(&i) => i - 1,
                        _ => return Err(Error::Parse { pos, msg: format!("unknown variable {id:?} for {}", self.g) }),
                    }
                };
                Ok(Poly::var(k, i))
            }
            _ => self.err("expected a number, variable or parenthesis"),
        }
    }
}

/// Exact value of a decimal literal.
fn decimal(s: &str) -> Option<Rational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().ok()?;
    Some(Rational::new(num, 10i64.pow(frac.len() as u32)))
}

/// Build a function on `g` from an expression such as `e((3*x^2+x)/101)` or `ind{0,1,2,4}`.
pub fn parse_expr(s: &str, g: &GroupSpec) -> Result<GroupFunction> {
    let mut p = Parser::new(s, g)?;
    let v = p.expr()?;
    p.finish()?;
    let values = match v {
        Val::Scalar(c) => vec![c; g.len()],
        Val::Func(v) => v,
    };
    GroupFunction::new(g.clone(), values)
}

/// An exact phase `x -> P(x) mod 1` from a polynomial such as `(x1^2 + 2*x1*x2)/5`.
pub fn parse_phase(s: &str, g: &GroupSpec) -> Result<PhaseMap> {
    let mut p = Parser::new(s, g)?;
    let poly = p.poly()?;
    p.finish()?;
    Ok(PhaseMap::from_fn(g, |x| poly.eval(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::e;

    #[test]
    fn planted_quadratic() {
        let g = GroupSpec::cyclic(101);
        let f = parse_expr("e((3*x^2+x)/101)", &g).unwrap();
        for x in 0..101u64 {
            let want = e_rat(Rational::new(((3 * x * x + x) % 101) as i64, 101));
            assert!((f.values[x as usize] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn indicator_and_mixture() {
        let g = GroupSpec::cyclic(13);
        let f = parse_expr("ind{0,1,2,4}", &g).unwrap();
        let ones: Vec<usize> = (0..13).filter(|&x| f.values[x].re == 1.0).collect();
        assert_eq!(ones, vec![0, 1, 2, 4]);
        let g7 = GroupSpec::cyclic(7);
        let m = parse_expr("0.5*e(x/7)+0.5*e(2*x/7)", &g7).unwrap();
        for x in 0..7 {
            let want = (e(x as f64 / 7.0) + e(2.0 * x as f64 / 7.0)) * 0.5;
            assert!((m.values[x] - want).norm() < 1e-12);
        }
        assert!(m.is_bounded());
    }

    #[test]
    fn products_and_coordinates() {
        let g: GroupSpec = "F5^2".parse().unwrap();
        let f = parse_expr("2*e(x1*x2/5) - i*ind{(1,2)}", &g).unwrap();
        let x = g.index(&[1, 2]);
        assert!((f.values[x] - (e(2.0 / 5.0) * 2.0 - Complex64::new(0.0, 1.0))).norm() < 1e-12);
        let phi = parse_phase("(x1^2 + 2*x1*x2)/5", &g).unwrap();
        assert_eq!(phi.values[x], Rational::new(0, 1));
        assert_eq!(phi.values[g.index(&[1, 1])], Rational::new(3, 5));
    }

    #[test]
    fn json_round_trip() {
        let g = GroupSpec::cyclic(11);
        let f = parse_expr("e(x^2/11) + 0.25", &g).unwrap();
        let back: GroupFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let g = GroupSpec::cyclic(5);
        assert_eq!(parse_expr("e(x^2/5", &g).unwrap_err(), Error::Parse { pos: 7, msg: "expected ')'".into() });
        assert!(matches!(parse_expr("e(y/5)", &g), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_expr("ind{7}", &g), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_expr("1 $", &g), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_expr("e(x)/e(x)", &g), Err(Error::Parse { pos: 5, .. })));
    }
}
