//! Sparse multivariate polynomials over the integers.
//!
//! This is the arithmetic kernel behind [`HomPoly`](super::HomPoly): terms
//! are kept sorted by descending graded-lex order and never carry a zero
//! coefficient. Homogeneity is not required here, which lets the GCD code
//! work on dehomogenized inputs.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZPoly {
    pub nvars: usize,
    pub terms: Vec<(Monomial, BigInt)>,
}

impl ZPoly {
    pub fn zero(nvars: usize) -> Self {
        ZPoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(nvars);
        }
        ZPoly {
            nvars,
            terms: vec![(Monomial::one(nvars), c)],
        }
    }

    /// Builds a polynomial from unsorted terms, merging duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigInt::zero) += c;
        }
        Self::from_btree(nvars, map)
    }

    fn from_btree(nvars: usize, map: BTreeMap<Monomial, BigInt>) -> Self {
        let terms = map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect();
        ZPoly { nvars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &BigInt {
        &self.terms[0].1
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exps()[var]).max().unwrap_or(0)
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn neg(&self) -> Self {
        ZPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        ZPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Divides every coefficient by `k`; caller guarantees exactness.
    pub fn div_scalar(&self, k: &BigInt) -> Self {
        ZPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c / k)).collect(),
        }
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        self.div_scalar(&g)
    }

    pub fn add(&self, other: &ZPoly) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match ma.cmp(mb) {
                std::cmp::Ordering::Greater => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((mb.clone(), cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((ma.clone(), s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        ZPoly {
            nvars: self.nvars,
            terms: out,
        }
    }

    pub fn sub(&self, other: &ZPoly) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ZPoly) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                match acc.get_mut(&m) {
                    Some(v) => *v += ca * cb,
                    None => {
                        acc.insert(m, ca * cb);
                    }
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        ZPoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigInt) -> Self {
        ZPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(mm, cc)| (mm.mul(m), cc * c)).collect(),
        }
    }

    /// Exact quotient `self / divisor` over the integers, or `None` when the
    /// division leaves a remainder (or needs non-integral coefficients).
    pub fn div_exact(&self, divisor: &ZPoly) -> Option<ZPoly> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero(self.nvars));
        }
        if divisor.is_constant() {
            let k = divisor.lc();
            if self.terms.iter().any(|(_, c)| !c.is_multiple_of(k)) {
                return None;
            }
            return Some(self.div_scalar(k));
        }
        let (lmb, lcb) = (&divisor.terms[0].0, &divisor.terms[0].1);
        // Cheap rejection on a degree bound per variable.
        for v in 0..self.nvars {
            if divisor.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        let mut rem: BTreeMap<Monomial, BigInt> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            if !lmb.divides(&m) {
                return None;
            }
            let (qc, r) = c.div_rem(lcb);
            if !r.is_zero() {
                return None;
            }
            let qm = lmb.div_into(&m);
            for (bm, bc) in &divisor.terms[1..] {
                let key = qm.mul(bm);
                let delta = &qc * bc;
                match rem.get_mut(&key) {
                    Some(v) => {
                        *v -= delta;
                        if v.is_zero() {
                            rem.remove(&key);
                        }
                    }
                    None => {
                        rem.insert(key, -delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(ZPoly {
            nvars: self.nvars,
            terms: quot,
        })
    }

    /// Sets the last variable to 1 and drops it.
    pub fn dehomogenize_last(&self) -> ZPoly {
        ZPoly::from_terms(
            self.nvars - 1,
            self.terms.iter().map(|(m, c)| (m.truncate_last(), c.clone())),
        )
    }

    /// Inverse of [`dehomogenize_last`](Self::dehomogenize_last) for a
    /// target total degree.
    pub fn homogenize_last(&self, degree: u32) -> ZPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.push(degree - m.degree()), c.clone()));
        ZPoly::from_terms(self.nvars + 1, terms)
    }

    /// Splits into coefficients of powers of the last variable:
    /// `self = sum_i out[i] * x_last^i`, with `out[i]` in one fewer variable.
    pub fn to_univariate_last(&self) -> Vec<ZPoly> {
        let deg = self.degree_in(self.nvars - 1) as usize;
        let mut buckets: Vec<Vec<(Monomial, BigInt)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            buckets[m.last() as usize].push((m.truncate_last(), c.clone()));
        }
        buckets
            .into_iter()
            .map(|t| ZPoly::from_terms(self.nvars - 1, t))
            .collect()
    }

    pub fn from_univariate_last(nvars: usize, coeffs: &[ZPoly]) -> ZPoly {
        let terms = coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms.iter().map(move |(m, c)| (m.push(i as u32), c.clone())));
        ZPoly::from_terms(nvars, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(&[u32], i64)]) -> ZPoly {
        let nv = terms[0].0.len();
        ZPoly::from_terms(nv, terms.iter().map(|(e, c)| (Monomial::new(e), BigInt::from(*c))))
    }

    #[test]
    fn mul_and_divide() {
        let a = p(&[(&[1, 0], 1), (&[0, 1], -1)]);
        let b = p(&[(&[1, 0], 1), (&[0, 1], 1)]);
        let prod = a.mul(&b);
        assert_eq!(prod, p(&[(&[2, 0], 1), (&[0, 2], -1)]));
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        let sq = p(&[(&[2, 0], 1), (&[0, 2], 1)]);
        assert_eq!(sq.div_exact(&a), None);
    }

    #[test]
    fn non_integral_quotient_rejected() {
        let a = p(&[(&[1, 0], 2), (&[0, 0], 1)]);
        let b = p(&[(&[1, 0], 1)]);
        assert_eq!(b.div_exact(&a), None);
    }

    #[test]
    fn univariate_split_roundtrip() {
        let a = p(&[(&[2, 1], 3), (&[0, 2], -1), (&[1, 0], 5)]);
        let parts = a.to_univariate_last();
        assert_eq!(parts.len(), 3);
        assert_eq!(ZPoly::from_univariate_last(2, &parts), a);
    }
}
