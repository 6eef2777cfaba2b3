//! Text form of polynomials.
//!
//! ```text
//! expr     := ['-'] term ( ('+'|'-') term )*
//! term     := factor ( '*' factor )*
//! factor   := rational | var [ '^' uint ] | '(' expr ')'
//! rational := int [ '/' uint ]
//! ```

use std::collections::HashMap;
use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{HomPoly, Monomial, PolyError, Result};

/// Ordered list of variable names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarNames(Vec<String>);

impl VarNames {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(PolyError::Syntax {
                    pos: 0,
                    msg: format!("invalid variable name `{n}`"),
                });
            }
            if out.iter().any(|o| o == n) {
                return Err(PolyError::DuplicateVariable(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(VarNames(out))
    }

    pub fn zwt() -> Self {
        VarNames(vec!["z".into(), "w".into(), "t".into()])
    }

    /// `z, w, t` for three variables, `x0, x1, ...` otherwise.
    pub fn default_for(nvars: usize) -> Self {
        if nvars == 3 {
            Self::zwt()
        } else {
            VarNames((0..nvars).map(|i| format!("x{i}")).collect())
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

/// Affine scratch polynomial used while parsing; homogeneity is checked
/// only at the end.
type Scratch = HashMap<Monomial, BigRational>;

fn scratch_mul(a: &Scratch, b: &Scratch) -> Scratch {
    let mut out = Scratch::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(ma.mul(mb)).or_insert_with(BigRational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn scratch_add(a: &mut Scratch, b: Scratch, sign: bool) {
    for (m, c) in b {
        let e = a.entry(m).or_insert_with(BigRational::zero);
        if sign {
            *e += c;
        } else {
            *e -= c;
        }
    }
    a.retain(|_, c| !c.is_zero());
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a VarNames,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an unsigned integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn expr(&mut self) -> Result<Scratch> {
        let nv = self.vars.len();
        let mut acc = Scratch::new();
        let first_neg = self.eat(b'-');
        let t = self.term()?;
        scratch_add(&mut acc, t, !first_neg);
        loop {
            let sign = match self.peek() {
                Some(b'+') => true,
                Some(b'-') => false,
                _ => break,
            };
            self.pos += 1;
            let t = self.term()?;
            scratch_add(&mut acc, t, sign);
        }
        debug_assert!(acc.keys().all(|m| m.nvars() == nv));
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scratch> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = scratch_mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scratch> {
        let nv = self.vars.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.uint()?;
                let den = if self.eat(b'/') {
                    let d = self.uint()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    d
                } else {
                    BigInt::one()
                };
                let mut s = Scratch::new();
                let v = BigRational::new(num, den);
                if !v.is_zero() {
                    s.insert(Monomial::one(nv), v);
                }
                Ok(s)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let idx = self
                    .vars
                    .index(name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                let mut m = Monomial::one(nv);
                let exp = if self.eat(b'^') {
                    let e = self.uint()?;
                    match u32::try_from(e) {
                        Ok(e) => e,
                        Err(_) => return self.err("exponent too large"),
                    }
                } else {
                    1
                };
                m.exps_mut()[idx] = exp;
                let mut s = Scratch::new();
                s.insert(m, BigRational::one());
                Ok(s)
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `text` over the given ordered variables.
pub fn parse_poly(text: &str, vars: &VarNames) -> Result<HomPoly> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let s = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    HomPoly::from_terms(vars.len(), s)
}

fn write_monomial(out: &mut String, m: &Monomial, vars: &VarNames) {
    let mut first = true;
    for (i, &e) in m.exps().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            out.push('*');
        }
        first = false;
        out.push_str(&vars.names()[i]);
        if e > 1 {
            write!(out, "^{e}").unwrap();
        }
    }
}

pub(super) fn print_poly(p: &HomPoly, vars: &VarNames) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        if m.is_one() {
            write!(out, "{a}").unwrap();
        } else {
            if !a.is_one() {
                write!(out, "{a}*").unwrap();
            }
            write_monomial(&mut out, m, vars);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zwt(s: &str) -> Result<HomPoly> {
        parse_poly(s, &VarNames::zwt())
    }

    #[test]
    fn reads_simple_forms() {
        let p = zwt("z^2 - w*t").unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.degree().unwrap(), 2);
        assert_eq!(p.to_string(), "z^2 - w*t");

        let q = zwt("3/2*z*w^2").unwrap();
        assert_eq!(q.num_terms(), 1);
        assert_eq!(q.degree().unwrap(), 3);
        assert_eq!(q.leading_coeff().unwrap(), &BigRational::new(3.into(), 2.into()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(zwt("z + w^2"), Err(PolyError::NonHomogeneous(..))));
        assert!(matches!(zwt("z + q"), Err(PolyError::UnknownVariable(_))));
        assert!(matches!(zwt("z + "), Err(PolyError::Syntax { .. })));
        assert!(matches!(zwt("z ** w"), Err(PolyError::Syntax { .. })));
        assert!(matches!(zwt("1/0*z"), Err(PolyError::Syntax { .. })));
        assert!(matches!(zwt("(z + w"), Err(PolyError::Syntax { .. })));
        assert!(matches!(zwt("z w"), Err(PolyError::Syntax { .. })));
        assert!(VarNames::new(&["z", "z"]).is_err());
    }

    #[test]
    fn parentheses_expand() {
        let p = zwt("(z - w)*(z + w) - 2*(t^2)").unwrap();
        assert_eq!(p.to_string(), "z^2 - w^2 - 2*t^2");
        assert_eq!(zwt("z - z").unwrap().to_string(), "0");
        assert_eq!(zwt("-(1/2)*w*t").unwrap().to_string(), "-1/2*w*t");
    }

    #[test]
    fn constants_print() {
        assert_eq!(zwt("4/6").unwrap().to_string(), "2/3");
        assert_eq!(zwt("-7").unwrap().to_string(), "-7");
    }
}
