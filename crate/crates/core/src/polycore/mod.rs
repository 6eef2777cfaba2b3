//! Exact sparse arithmetic on homogeneous polynomials with rational
//! coefficients.
//!
//! [`HomPoly`] is the value type used everywhere else in the crate: map
//! components, extracted factors, the polynomials of a family instance.
//! Heavy kernels (products, composition, division, GCD) run on integer
//! representatives obtained from [`HomPoly::primitive_form`].

mod gcd;
mod modp;
mod monomial;
mod parse;
mod zpoly;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use monomial::Monomial;
pub use parse::{parse_poly, VarNames};
pub use zpoly::ZPoly;

/// Default cap on the number of terms any single operation may produce.
pub const DEFAULT_TERM_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("polynomial is not homogeneous (degrees {0} and {1})")]
    NonHomogeneous(u32, u32),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("arity mismatch: {0} vs {1} variables")]
    ArityMismatch(usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("polynomial is not divisible")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("degree of the zero polynomial is undefined")]
    ZeroDegree,
    #[error("gcd of two zero polynomials is undefined")]
    ZeroGcd,
    #[error("variable index {0} out of range")]
    BadIndex(usize),
    #[error("result would exceed {cap} terms (estimated {estimate})")]
    ResourceLimit { estimate: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, PolyError>;

/// Resource caps shared by the expensive operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_terms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_terms: DEFAULT_TERM_CAP,
        }
    }
}

/// Number of monomials of total degree `deg` in `nvars` variables.
pub fn monomial_count(nvars: usize, deg: u32) -> usize {
    if nvars == 0 {
        return usize::from(deg == 0);
    }
    // C(deg + nvars - 1, nvars - 1), saturating.
    let mut acc: u128 = 1;
    let k = (nvars - 1) as u128;
    for i in 1..=k {
        acc = acc * (deg as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Homogeneous polynomial in a fixed number of variables with exact
/// rational coefficients. Terms are sorted by descending graded-lex order,
/// contain no zero coefficients, and all share one total degree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HomPoly {
    nvars: usize,
    degree: u32,
    terms: Vec<(Monomial, BigRational)>,
}

/// `content * primitive` with `primitive` integral, of unit content, and
/// with positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPrimitiveForm {
    pub content: BigRational,
    pub primitive: HomPoly,
}

impl fmt::Display for IntPrimitiveForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*({})", self.content, self.primitive)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl HomPoly {
    pub fn zero(nvars: usize) -> Self {
        HomPoly {
            nvars,
            degree: 0,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(nvars);
        }
        HomPoly {
            nvars,
            degree: 0,
            terms: vec![(Monomial::one(nvars), c)],
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        HomPoly {
            nvars,
            degree: 1,
            terms: vec![(Monomial::var(nvars, i), BigRational::one())],
        }
    }

    /// Builds a polynomial from arbitrary terms: merges duplicates, drops
    /// zeros, sorts, and checks homogeneity.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Result<Self> {
        let mut map: HashMap<Monomial, BigRational> = HashMap::new();
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(PolyError::ArityMismatch(nvars, m.nvars()));
            }
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        let degree = terms.first().map_or(0, |t| t.0.degree());
        if let Some((m, _)) = terms.iter().find(|(m, _)| m.degree() != degree) {
            return Err(PolyError::NonHomogeneous(degree, m.degree()));
        }
        Ok(HomPoly { nvars, degree, terms })
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_int_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::from_terms(nvars, terms.iter().map(|(e, c)| (Monomial::new(e), rat(*c))))
    }

    pub(crate) fn from_zpoly(z: &ZPoly, scale: &BigRational) -> Self {
        let degree = z.terms.first().map_or(0, |t| t.0.degree());
        debug_assert!(z.terms.iter().all(|(m, _)| m.degree() == degree));
        HomPoly {
            nvars: z.nvars,
            degree,
            terms: z
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), scale * BigRational::from_integer(c.clone())))
                .collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.degree == 0
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.degree == 0 && self.terms[0].1.is_one()
    }

    /// Total degree; undefined (an error) for the zero polynomial.
    pub fn degree(&self) -> Result<u32> {
        if self.is_zero() {
            Err(PolyError::ZeroDegree)
        } else {
            Ok(self.degree)
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn leading_coeff(&self) -> Option<&BigRational> {
        self.terms.first().map(|t| &t.1)
    }

    fn check_arity(&self, other: &HomPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(PolyError::ArityMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    /// Splits into rational content and integer primitive part.
    pub fn primitive_form(&self) -> IntPrimitiveForm {
        if self.is_zero() {
            return IntPrimitiveForm {
                content: BigRational::one(),
                primitive: self.clone(),
            };
        }
        let (content, z) = self.to_zpoly();
        IntPrimitiveForm {
            content,
            primitive: HomPoly::from_zpoly(&z, &BigRational::one()),
        }
    }

    /// Shorthand for the primitive part alone.
    pub fn primitive(&self) -> HomPoly {
        self.primitive_form().primitive
    }

    /// `(content, Z)` with `self = content * Z`, `Z` primitive, `lc(Z) > 0`.
    pub(crate) fn to_zpoly(&self) -> (BigRational, ZPoly) {
        if self.is_zero() {
            return (BigRational::one(), ZPoly::zero(self.nvars));
        }
        let den_lcm = self.terms.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let ints: Vec<(Monomial, BigInt)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), (c * BigRational::from_integer(den_lcm.clone())).to_integer()))
            .collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, (_, c)| acc.gcd(c));
        if ints[0].1.is_negative() {
            g = -g;
        }
        let terms = ints.into_iter().map(|(m, c)| (m, c / &g)).collect();
        let content = BigRational::new(g, den_lcm);
        (
            content,
            ZPoly {
                nvars: self.nvars,
                terms,
            },
        )
    }

    pub fn neg(&self) -> HomPoly {
        HomPoly {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> HomPoly {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        HomPoly {
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &HomPoly) -> Result<HomPoly> {
        self.check_arity(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != other.degree {
            return Err(PolyError::DegreeMismatch(self.degree, other.degree));
        }
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
        let degree = if out.is_empty() { 0 } else { self.degree };
        Ok(HomPoly {
            nvars: self.nvars,
            degree,
            terms: out,
        })
    }

    pub fn sub(&self, other: &HomPoly) -> Result<HomPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HomPoly) -> Result<HomPoly> {
        self.mul_limited(other, &Limits::default())
    }

    pub fn mul_limited(&self, other: &HomPoly, limits: &Limits) -> Result<HomPoly> {
        self.check_arity(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        let estimate = monomial_count(self.nvars, self.degree + other.degree)
            .min(self.terms.len().saturating_mul(other.terms.len()));
        if estimate > limits.max_terms {
            return Err(PolyError::ResourceLimit {
                estimate,
                cap: limits.max_terms,
            });
        }
        let (ca, za) = self.to_zpoly();
        let (cb, zb) = other.to_zpoly();
        Ok(HomPoly::from_zpoly(&za.mul(&zb), &(ca * cb)))
    }

    pub fn pow(&self, e: u32) -> Result<HomPoly> {
        self.pow_limited(e, &Limits::default())
    }

    pub fn pow_limited(&self, e: u32, limits: &Limits) -> Result<HomPoly> {
        let mut result = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_limited(&base, limits)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_limited(&base, limits)?;
            }
        }
        Ok(result)
    }

    /// Substitutes `comps[i]` for the i-th variable. All nonzero components
    /// must share one degree.
    pub fn compose(&self, comps: &[HomPoly]) -> Result<HomPoly> {
        self.compose_limited(comps, &Limits::default())
    }

    pub fn compose_limited(&self, comps: &[HomPoly], limits: &Limits) -> Result<HomPoly> {
        if comps.len() != self.nvars {
            return Err(PolyError::ArityMismatch(self.nvars, comps.len()));
        }
        let target_nvars = comps.first().map_or(0, |c| c.nvars);
        let mut comp_deg: Option<u32> = None;
        for c in comps {
            if c.nvars != target_nvars {
                return Err(PolyError::ArityMismatch(target_nvars, c.nvars));
            }
            if !c.is_zero() {
                match comp_deg {
                    None => comp_deg = Some(c.degree),
                    Some(d) if d != c.degree => return Err(PolyError::DegreeMismatch(d, c.degree)),
                    _ => {}
                }
            }
        }
        if self.is_zero() {
            return Ok(Self::zero(target_nvars));
        }
        let e = comp_deg.unwrap_or(0);
        let estimate = monomial_count(target_nvars, self.degree * e);
        if estimate > limits.max_terms {
            return Err(PolyError::ResourceLimit {
                estimate,
                cap: limits.max_terms,
            });
        }
        // Work with integer representatives: comps[i] = s_i * Z_i.
        let parts: Vec<(BigRational, ZPoly)> = comps.iter().map(|c| c.to_zpoly()).collect();
        let (pc, pz) = self.to_zpoly();
        // Powers of each Z_i, built lazily up to the largest exponent.
        let mut max_exp = vec![0u32; self.nvars];
        for (m, _) in &pz.terms {
            for (i, &x) in m.exps().iter().enumerate() {
                max_exp[i] = max_exp[i].max(x);
            }
        }
        let mut powers: Vec<Vec<ZPoly>> = Vec::with_capacity(self.nvars);
        for (i, (_, z)) in parts.iter().enumerate() {
            let mut row = vec![ZPoly::constant(target_nvars, BigInt::one())];
            for k in 1..=max_exp[i] {
                let next = row[k as usize - 1].mul(z);
                row.push(next);
            }
            powers.push(row);
        }
        // sum_m c_m * prod_i s_i^{m_i} * prod_i Z_i^{m_i}; clear denominators
        // of the scalar factors to keep the accumulation integral.
        let scalars: Vec<BigRational> = pz
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = BigRational::from_integer(c.clone());
                for (i, &x) in m.exps().iter().enumerate() {
                    if x > 0 {
                        s *= num_traits::pow(parts[i].0.clone(), x as usize);
                    }
                }
                s
            })
            .collect();
        let den = scalars.iter().fold(BigInt::one(), |acc, s| acc.lcm(s.denom()));
        let mut acc = ZPoly::zero(target_nvars);
        for ((m, _), s) in pz.terms.iter().zip(&scalars) {
            if s.is_zero() {
                continue;
            }
            let k = (s * BigRational::from_integer(den.clone())).to_integer();
            let mut prod: Option<ZPoly> = None;
            for (i, &x) in m.exps().iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let pw = &powers[i][x as usize];
                prod = Some(match prod {
                    None => pw.clone(),
                    Some(p) => p.mul(pw),
                });
            }
            let term = match prod {
                None => ZPoly::constant(target_nvars, k),
                Some(p) => p.scale(&k),
            };
            acc = acc.add(&term);
        }
        let scale = pc / BigRational::from_integer(den);
        Ok(HomPoly::from_zpoly(&acc, &scale))
    }

    /// Exact quotient `self / divisor`.
    pub fn exact_div(&self, divisor: &HomPoly) -> Result<HomPoly> {
        self.check_arity(divisor)?;
        if divisor.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        if divisor.degree > self.degree {
            return Err(PolyError::NotDivisible);
        }
        let (ca, za) = self.to_zpoly();
        let (cb, zb) = divisor.to_zpoly();
        // zb is primitive, so an exact quotient over Q is integral (Gauss).
        let q = za.div_exact(&zb).ok_or(PolyError::NotDivisible)?;
        Ok(HomPoly::from_zpoly(&q, &(ca / cb)))
    }

    /// Greatest common divisor, normalized to its integer primitive form.
    pub fn gcd(&self, other: &HomPoly) -> Result<HomPoly> {
        self.check_arity(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::ZeroGcd);
        }
        if self.is_zero() {
            return Ok(other.primitive());
        }
        if other.is_zero() {
            return Ok(self.primitive());
        }
        let (_, za) = self.to_zpoly();
        let (_, zb) = other.to_zpoly();
        let g = hom_gcd_z(&za, &zb);
        let g = HomPoly::from_zpoly(&g, &BigRational::one()).primitive();
        // The modular route may guess; the contract is verified here.
        self.exact_div(&g)?;
        other.exact_div(&g)?;
        Ok(g)
    }

    /// Same as [`gcd`](Self::gcd) but forced through the pseudo-remainder
    /// route; used to cross-check the modular algorithm.
    pub fn gcd_prs(&self, other: &HomPoly) -> Result<HomPoly> {
        self.check_arity(other)?;
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::ZeroGcd);
        }
        let (_, za) = self.to_zpoly();
        let (_, zb) = other.to_zpoly();
        let g = gcd::gcd_prs(&za, &zb);
        Ok(HomPoly::from_zpoly(&g, &BigRational::one()).primitive())
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch(self.nvars, point.len()));
        }
        let mut sum = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    pub fn eval_complex(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch(self.nvars, point.len()));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (x, &e) in point.iter().zip(m.exps()) {
                if e > 0 {
                    t *= x.powu(e);
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Result<HomPoly> {
        if var >= self.nvars {
            return Err(PolyError::BadIndex(var));
        }
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exps()[var];
            (e > 0).then(|| {
                let mut nm = m.clone();
                nm.exps_mut()[var] -= 1;
                (nm, c * rat(e as i64))
            })
        });
        HomPoly::from_terms(self.nvars, terms)
    }

    /// Sum of absolute values of the coefficients, as a float.
    pub fn coeff_l1_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }

    /// Renders with the given variable names.
    pub fn to_string_with(&self, vars: &VarNames) -> String {
        parse::print_poly(self, vars)
    }
}

/// GCD of homogeneous integer polynomials: strip monomial factors,
/// dehomogenize in the last variable, take the affine GCD, rehomogenize.
fn hom_gcd_z(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let nv = a.nvars;
    let mono = |p: &ZPoly| {
        p.terms
            .iter()
            .skip(1)
            .fold(p.terms[0].0.clone(), |acc, (m, _)| acc.gcd(m))
    };
    let ma = mono(a);
    let mb = mono(b);
    let mg = ma.gcd(&mb);
    let strip = |p: &ZPoly, m: &Monomial| ZPoly {
        nvars: p.nvars,
        terms: p.terms.iter().map(|(x, c)| (m.div_into(x), c.clone())).collect(),
    };
    let a1 = strip(a, &ma);
    let b1 = strip(b, &mb);
    let one = BigInt::one();
    let core = if nv == 1 {
        ZPoly::constant(1, one)
    } else {
        let g = gcd::gcd_z(&a1.dehomogenize_last(), &b1.dehomogenize_last());
        let g = g.primitive();
        g.homogenize_last(g.total_degree())
    };
    core.mul_term(&mg, &BigInt::one())
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = VarNames::default_for(self.nvars);
        f.write_str(&parse::print_poly(self, &names))
    }
}

impl fmt::Debug for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zwt(s: &str) -> HomPoly {
        parse_poly(s, &VarNames::zwt()).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        assert_eq!(zwt("z - w").mul(&zwt("z + w")).unwrap(), zwt("z^2 - w^2"));
        assert!(zwt("z - w").mul(&HomPoly::zero(3)).unwrap().is_zero());
    }

    #[test]
    fn arity_and_degree_errors() {
        let two = parse_poly("x + y", &VarNames::new(&["x", "y"]).unwrap()).unwrap();
        assert_eq!(zwt("z").mul(&two), Err(PolyError::ArityMismatch(3, 2)));
        assert!(matches!(
            zwt("z").add(&zwt("w^2")),
            Err(PolyError::DegreeMismatch(1, 2))
        ));
        assert_eq!(HomPoly::zero(3).degree(), Err(PolyError::ZeroDegree));
    }

    #[test]
    fn compose_examples() {
        let p = zwt("z*w");
        let comps = [zwt("w"), zwt("t"), zwt("z")];
        assert_eq!(p.compose(&comps).unwrap(), zwt("w*t"));
        let q = zwt("z^2 + w*t");
        let c3 = [zwt("z^3"), zwt("w^3 - t^3"), zwt("z*w*t")];
        assert_eq!(q.compose(&c3).unwrap().degree().unwrap(), 6);
        let bad = [zwt("z"), zwt("w^2"), zwt("t")];
        assert!(matches!(q.compose(&bad), Err(PolyError::DegreeMismatch(..))));
    }

    #[test]
    fn compose_with_rational_scalars() {
        let p = zwt("1/2*z^2 - 3*w*t");
        let comps = [zwt("2/3*z"), zwt("5*w"), zwt("-1/7*t")];
        let expect = zwt("2/9*z^2 + 15/7*w*t");
        assert_eq!(p.compose(&comps).unwrap(), expect);
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(zwt("z^2*w").gcd(&zwt("z*w*t")).unwrap(), zwt("z*w"));
        assert_eq!(zwt("z^2 - w^2").gcd(&zwt("z^2 - 2*z*w + w^2")).unwrap(), zwt("z - w"));
        assert_eq!(zwt("2*z + 4*w").gcd(&zwt("6*z + 12*w")).unwrap(), zwt("z + 2*w"));
        assert_eq!(zwt("-3*z").gcd(&HomPoly::zero(3)).unwrap(), zwt("z"));
        assert_eq!(HomPoly::zero(3).gcd(&HomPoly::zero(3)), Err(PolyError::ZeroGcd));
    }

    #[test]
    fn gcd_involving_last_variable() {
        let a = zwt("t^2*(z - w)*(z + t)");
        let b = zwt("t*(z - w)*(w - t)");
        assert_eq!(a.gcd(&b).unwrap(), zwt("z*t - w*t"));
        assert_eq!(a.gcd_prs(&b).unwrap(), zwt("z*t - w*t"));
    }

    #[test]
    fn exact_division_examples() {
        assert_eq!(zwt("z^2 - w^2").exact_div(&zwt("z - w")).unwrap(), zwt("z + w"));
        assert_eq!(zwt("z^2 + w^2").exact_div(&zwt("z - w")), Err(PolyError::NotDivisible));
        assert_eq!(zwt("z").exact_div(&HomPoly::zero(3)), Err(PolyError::DivisionByZero));
        assert_eq!(
            zwt("1/2*z^2 - 1/2*w^2").exact_div(&zwt("3*z + 3*w")).unwrap(),
            zwt("1/6*z - 1/6*w")
        );
    }

    #[test]
    fn evaluation_examples() {
        let p = zwt("z^2 - w*t");
        let pt = |a: i64, b: i64, c: i64| [rat(a), rat(b), rat(c)];
        assert_eq!(p.eval_rational(&pt(1, 1, 1)).unwrap(), rat(0));
        assert_eq!(p.eval_rational(&pt(2, 1, 1)).unwrap(), rat(3));
        assert!(p.eval_rational(&[rat(1)]).is_err());
    }

    #[test]
    fn partial_examples() {
        assert_eq!(zwt("z^2*w").partial(0).unwrap(), zwt("2*z*w"));
        assert!(zwt("w^3").partial(0).unwrap().is_zero());
        assert_eq!(zwt("z").partial(3), Err(PolyError::BadIndex(3)));
    }

    #[test]
    fn primitive_form_reproduces_input() {
        let p = zwt("-3/4*z*w + 9/2*t^2");
        let f = p.primitive_form();
        assert_eq!(f.primitive, zwt("z*w - 6*t^2"));
        assert_eq!(f.content, BigRational::new((-3).into(), 4.into()));
        assert_eq!(f.primitive.scale(&f.content), p);
        assert!(f.primitive.leading_coeff().unwrap().is_positive());
    }

    #[test]
    fn resource_limit_trips() {
        let lim = Limits { max_terms: 10 };
        let p = zwt("z + w + t");
        assert!(matches!(p.pow_limited(8, &lim), Err(PolyError::ResourceLimit { .. })));
        assert!(p.pow_limited(2, &lim).is_ok());
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomial_count(3, 2), 6);
        assert_eq!(monomial_count(3, 63), 2080);
        assert_eq!(monomial_count(1, 7), 1);
    }
}
