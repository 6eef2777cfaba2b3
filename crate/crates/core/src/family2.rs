//! Maps of the form `[P Q1 - R : P Q2 - R : P Q3 - R]` on `P^2`.
//!
//! Construction enforces `P(1,1,1) Qj(1,1,1) = R(1,1,1) != 0`, which sends
//! every point of `{P = 0}` to the indeterminate point `[1:1:1]`. The
//! preflight checks are sufficient conditions for quasi-algebraic
//! stability with `H = P` and `n0 = 1`; the authoritative answer is always
//! the symbolic certificate from [`crate::mapiter`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{det_bareiss, nullspace, rank};
use crate::mapiter::{make_map, parse_map_file_with, MapError, ProjMap};
use crate::numeric::{big_from_rational, big_int, certified_roots, Big, CBig, CertifiedRoot};
use crate::polycore::{parse_poly, HomPoly, Monomial, PolyError, VarNames};
use crate::specdeg::{RecurrenceSpec, SpecError};

/// Attempts made by [`random_family`] before giving up.
pub const MAX_GENERATION_ATTEMPTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("family polynomials must be in 3 variables, got {0}")]
    Arity(usize),
    #[error("degree constraint violated: {0}")]
    DegreeConstraintViolated(String),
    #[error("normalization violated: {0}")]
    NormalizationViolated(String),
    #[error("components share the factor {0}")]
    CommonFactor(String),
    #[error("map is not dominant")]
    NotDominant,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no admissible instance after {0} attempts")]
    GenerationExhausted(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, FamilyError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyInstance {
    pub p: HomPoly,
    pub q: [HomPoly; 3],
    pub r: HomPoly,
    pub vars: VarNames,
    pub map: ProjMap,
    pub spec: RecurrenceSpec,
}

impl FamilyInstance {
    /// The unreduced components `P Qj - R`.
    pub fn raw_components(&self) -> Vec<HomPoly> {
        self.q
            .iter()
            .map(|qj| self.p.mul(qj).and_then(|pq| pq.sub(&self.r)).expect("arity checked"))
            .collect()
    }
}

fn ones() -> Vec<BigRational> {
    vec![BigRational::one(); 3]
}

pub fn build_family_map(p: HomPoly, q1: HomPoly, q2: HomPoly, q3: HomPoly, r: HomPoly) -> Result<FamilyInstance> {
    build_family_map_with(VarNames::zwt(), p, q1, q2, q3, r)
}

pub fn build_family_map_with(
    vars: VarNames,
    p: HomPoly,
    q1: HomPoly,
    q2: HomPoly,
    q3: HomPoly,
    r: HomPoly,
) -> Result<FamilyInstance> {
    for f in [&p, &q1, &q2, &q3, &r] {
        if f.nvars() != 3 {
            return Err(FamilyError::Arity(f.nvars()));
        }
    }
    if vars.len() != 3 {
        return Err(FamilyError::Arity(vars.len()));
    }
    let deg = |f: &HomPoly, name: &str| {
        f.degree()
            .map_err(|_| FamilyError::DegreeConstraintViolated(format!("{name} is zero")))
    };
    let dp = deg(&p, "P")?;
    let dq = [deg(&q1, "Q1")?, deg(&q2, "Q2")?, deg(&q3, "Q3")?];
    let dr = deg(&r, "R")?;
    if dp == 0 || dq[0] == 0 {
        return Err(FamilyError::DegreeConstraintViolated(
            "P and Q1 must be nonconstant".into(),
        ));
    }
    if dq[1] != dq[0] || dq[2] != dq[0] {
        return Err(FamilyError::DegreeConstraintViolated(format!(
            "deg Q = ({}, {}, {}) must agree",
            dq[0], dq[1], dq[2]
        )));
    }
    if dr != dp + dq[0] {
        return Err(FamilyError::DegreeConstraintViolated(format!(
            "deg R = {dr} but deg P + deg Q1 = {}",
            dp + dq[0]
        )));
    }
    let one = ones();
    let p1 = p.eval_rational(&one)?;
    let r1 = r.eval_rational(&one)?;
    if r1.is_zero() {
        return Err(FamilyError::NormalizationViolated("R(1,1,1) = 0".into()));
    }
    for (j, qj) in [&q1, &q2, &q3].into_iter().enumerate() {
        let lhs = &p1 * qj.eval_rational(&one)?;
        if lhs != r1 {
            return Err(FamilyError::NormalizationViolated(format!(
                "P(1,1,1)*Q{}(1,1,1) = {lhs} but R(1,1,1) = {r1}",
                j + 1
            )));
        }
    }
    let q = [q1, q2, q3];
    let comps: Vec<HomPoly> = q
        .iter()
        .map(|qj| p.mul(qj)?.sub(&r))
        .collect::<std::result::Result<_, _>>()?;
    let mut g = HomPoly::zero(3);
    for c in &comps {
        g = if g.is_zero() { c.primitive() } else { g.gcd(c)? };
    }
    if g.is_zero() {
        return Err(FamilyError::CommonFactor("0 (all components vanish)".into()));
    }
    if !g.is_constant() {
        return Err(FamilyError::CommonFactor(g.to_string_with(&vars)));
    }
    let map = make_map(comps, vars.clone()).map_err(|e| match e {
        MapError::NotDominant => FamilyError::NotDominant,
        other => other.into(),
    })?;
    let spec = RecurrenceSpec::new((dp + dq[0]) as u64, dp as u64, 1)?;
    Ok(FamilyInstance {
        p,
        q,
        r,
        vars,
        map,
        spec,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub detail: String,
}

impl CheckResult {
    fn new(verdict: Verdict, detail: impl Into<String>) -> Self {
        CheckResult {
            verdict,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankResult {
    pub verdict: Verdict,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PencilResult {
    pub verdict: Verdict,
    /// `"exact"` or `"randomized"`.
    pub method: &'static str,
    pub triples_tested: usize,
    /// A triple `(a, b, c)` for which `P` and `a Q1 + b Q2 + c Q3` share a
    /// factor, as decimal strings.
    pub witness: Option<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreflightReport {
    pub cor1: CheckResult,
    pub cor2: CheckResult,
    pub cor3_rank: RankResult,
    pub cor3_pencil: PencilResult,
    pub overall: Verdict,
}

pub fn combine(verdicts: &[Verdict]) -> Verdict {
    if verdicts.contains(&Verdict::Fail) {
        Verdict::Fail
    } else if verdicts.iter().all(|v| *v == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Unknown
    }
}

pub fn preflight(inst: &FamilyInstance, precision_bits: usize, samples: usize, seed: u64) -> Result<PreflightReport> {
    let cor1 = check_cor1(inst)?;
    let cor2 = check_cor2(inst, precision_bits)?;
    let (cor3_rank, cor3_pencil) = check_cor3(inst, samples, seed)?;
    let overall = combine(&[cor1.verdict, cor2.verdict, cor3_rank.verdict, cor3_pencil.verdict]);
    Ok(PreflightReport {
        cor1,
        cor2,
        cor3_rank,
        cor3_pencil,
        overall,
    })
}

fn coprime(a: &HomPoly, b: &HomPoly) -> Result<bool> {
    match a.gcd(b) {
        Ok(g) => Ok(g.is_constant()),
        Err(PolyError::ZeroGcd) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// `gcd(Q2 - Q1, Q3 - Q1) = 1` and `gcd(P, R) = 1`, decided exactly.
pub fn check_cor1(inst: &FamilyInstance) -> Result<CheckResult> {
    let a = inst.q[1].sub(&inst.q[0])?;
    let b = inst.q[2].sub(&inst.q[0])?;
    if !coprime(&a, &b)? {
        return Ok(CheckResult::new(Verdict::Fail, "Q2 - Q1 and Q3 - Q1 share a factor"));
    }
    if !coprime(&inst.p, &inst.r)? {
        return Ok(CheckResult::new(Verdict::Fail, "P and R share a factor"));
    }
    Ok(CheckResult::new(
        Verdict::Pass,
        "Q2 - Q1, Q3 - Q1 coprime; P, R coprime",
    ))
}

/// Jacobian of the raw components at `(1,1,1)`; row `j` holds the partials
/// of `P Qj - R`.
pub fn jacobian_at_ones(inst: &FamilyInstance) -> Result<Vec<Vec<BigRational>>> {
    let one = ones();
    inst.raw_components()
        .iter()
        .map(|c| {
            (0..3)
                .map(|i| Ok(c.partial(i)?.eval_rational(&one)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Each Jacobian row sums to zero: Euler's relation turns the row sum into
/// `deg * (P Qj - R)(1,1,1)`, which the normalization makes vanish.
pub fn euler_relation_holds(jac: &[Vec<BigRational>]) -> bool {
    jac.iter()
        .all(|row| row.iter().fold(BigRational::zero(), |a, x| a + x).is_zero())
}

fn pencil_member(inst: &FamilyInstance, abc: &[BigRational]) -> Result<HomPoly> {
    let mut m = HomPoly::zero(3);
    for (qj, c) in inst.q.iter().zip(abc) {
        m = m.add(&qj.scale(c))?;
    }
    Ok(m)
}

fn witness_strings(abc: &[BigRational]) -> [String; 3] {
    [abc[0].to_string(), abc[1].to_string(), abc[2].to_string()]
}

/// Rank of the Jacobian at `(1,1,1)` and coprimality of `P` with every
/// member `a Q1 + b Q2 + c Q3` of the net.
pub fn check_cor3(inst: &FamilyInstance, samples: usize, seed: u64) -> Result<(RankResult, PencilResult)> {
    let jac = jacobian_at_ones(inst)?;
    if !euler_relation_holds(&jac) {
        return Err(FamilyError::Invariant("jacobian rows do not sum to zero".into()));
    }
    let rk = rank(jac);
    if rk > 2 {
        return Err(FamilyError::Invariant(format!("jacobian rank {rk} exceeds 2")));
    }
    let rank_result = RankResult {
        verdict: if rk == 2 { Verdict::Pass } else { Verdict::Fail },
        rank: rk,
    };
    let pencil = if inst.p.degree()? == 1 {
        pencil_exact_linear(inst)?
    } else {
        pencil_sampled(inst, samples, seed)?
    };
    Ok((rank_result, pencil))
}

/// For linear `P` the question is whether `Q1, Q2, Q3` restricted to the
/// line `{P = 0}` are linearly dependent.
fn pencil_exact_linear(inst: &FamilyInstance) -> Result<PencilResult> {
    let coeff = |i: usize| -> BigRational {
        inst.p
            .terms()
            .iter()
            .find(|(m, _)| m.exps()[i] == 1)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    };
    let (al, be, ga) = (coeff(0), coeff(1), coeff(2));
    let z = BigRational::zero;
    let (u, v) = if !ga.is_zero() {
        ([ga.clone(), z(), -al.clone()], [z(), ga.clone(), -be.clone()])
    } else if !be.is_zero() {
        ([be.clone(), -al.clone(), z()], [z(), z(), BigRational::one()])
    } else {
        ([z(), BigRational::one(), z()], [z(), z(), BigRational::one()])
    };
    let line: Vec<HomPoly> = (0..3)
        .map(|i| {
            HomPoly::from_terms(
                2,
                [(Monomial::var(2, 0), u[i].clone()), (Monomial::var(2, 1), v[i].clone())],
            )
        })
        .collect::<std::result::Result<_, _>>()?;
    let dq = inst.q[0].degree()?;
    let mut rows = Vec::with_capacity(3);
    for qj in &inst.q {
        let restricted = qj.compose(&line)?;
        let mut row = vec![BigRational::zero(); dq as usize + 1];
        for (m, c) in restricted.terms() {
            row[m.exps()[1] as usize] = c.clone();
        }
        rows.push(row);
    }
    // Dependencies among the rows are the kernel of the transpose.
    let cols = dq as usize + 1;
    let transpose: Vec<Vec<BigRational>> = (0..cols).map(|k| rows.iter().map(|r| r[k].clone()).collect()).collect();
    let kernel = nullspace(transpose, 3);
    if let Some(abc) = kernel.first() {
        let member = pencil_member(inst, abc)?;
        if coprime(&inst.p, &member)? {
            return Err(FamilyError::Invariant(
                "restriction kernel vector is not a pencil witness".into(),
            ));
        }
        return Ok(PencilResult {
            verdict: Verdict::Fail,
            method: "exact",
            triples_tested: 1,
            witness: Some(witness_strings(abc)),
        });
    }
    Ok(PencilResult {
        verdict: Verdict::Pass,
        method: "exact",
        triples_tested: 0,
        witness: None,
    })
}

fn pencil_sampled(inst: &FamilyInstance, samples: usize, seed: u64) -> Result<PencilResult> {
    let q = |x: i64| BigRational::from_integer(x.into());
    let mut triples: Vec<Vec<BigRational>> = [
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [1, -1, 0],
        [1, 0, -1],
        [0, 1, -1],
        [1, 1, 1],
    ]
    .iter()
    .map(|t| t.iter().map(|&x| q(x)).collect())
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while triples.len() < 7 + samples {
        let t: Vec<BigRational> = (0..3)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.random_range(-1000i64..=1000)),
                    BigInt::from(rng.random_range(1i64..=97)),
                )
            })
            .collect();
        if t.iter().any(|x| !x.is_zero()) {
            triples.push(t);
        }
    }
    for (i, abc) in triples.iter().enumerate() {
        let member = pencil_member(inst, abc)?;
        if !coprime(&inst.p, &member)? {
            return Ok(PencilResult {
                verdict: Verdict::Fail,
                method: "randomized",
                triples_tested: i + 1,
                witness: Some(witness_strings(abc)),
            });
        }
    }
    Ok(PencilResult {
        verdict: Verdict::Pass,
        method: "randomized",
        triples_tested: triples.len(),
        witness: None,
    })
}

// ---------------------------------------------------------------------
// Common zeros of P and R.

type Mat3 = [[i64; 3]; 3];

fn linear_form(row: &[i64; 3]) -> HomPoly {
    HomPoly::from_terms(
        3,
        (0..3).map(|k| (Monomial::var(3, k), BigRational::from_integer(row[k].into()))),
    )
    .expect("linear form")
}

fn change_coords(f: &HomPoly, m: &Mat3) -> Result<HomPoly> {
    let comps: Vec<HomPoly> = m.iter().map(linear_form).collect();
    Ok(f.compose(&comps)?)
}

fn det3(m: &Mat3) -> BigInt {
    det_bareiss(m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
}

/// Terms without the last variable, as a form in the first two.
fn at_infinity(f: &HomPoly) -> Result<HomPoly> {
    Ok(HomPoly::from_terms(
        2,
        f.terms()
            .iter()
            .filter(|(m, _)| m.exps()[2] == 0)
            .map(|(m, c)| (Monomial::new(&m.exps()[..2]), c.clone())),
    )?)
}

/// Integer coefficients of `f(x, y, 1)` as a polynomial in variable `var`
/// (0 or 1) at the other coordinate fixed to `c`, ascending.
fn slice_coeffs(f: &HomPoly, var: usize, c: &BigInt) -> Vec<BigInt> {
    let other = 1 - var;
    let deg = f.degree().unwrap_or(0) as usize;
    let mut out = vec![BigInt::zero(); deg + 1];
    for (m, coef) in f.terms() {
        let e = m.exps();
        out[e[var] as usize] += coef.to_integer() * num_traits::pow(c.clone(), e[other] as usize);
    }
    out
}

fn sylvester_det(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    let mut rows = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            rows[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            rows[n + i][i + k] = c.clone();
        }
    }
    det_bareiss(rows)
}

/// Newton interpolation through `(i, values[i])`, returned ascending.
fn interpolate(values: &[BigInt]) -> Vec<BigRational> {
    let n = values.len();
    let mut dd: Vec<BigRational> = values.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / BigRational::from_integer(BigInt::from(level));
        }
    }
    let mut poly = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        // poly = poly * (x - k) + dd[k]
        let mut next = vec![BigRational::zero(); n];
        for i in 0..n {
            if poly[i].is_zero() {
                continue;
            }
            if i + 1 < n {
                next[i + 1] += &poly[i];
            }
            next[i] -= &poly[i] * BigRational::from_integer(BigInt::from(k));
        }
        next[0] += &dd[k];
        poly = next;
    }
    poly
}

/// Resultant of `f(x, y, 1)` and `g(x, y, 1)` eliminating variable `var`,
/// as an integer polynomial in the other coordinate (ascending). Both
/// inputs must have integer coefficients and a nonzero pure power of the
/// eliminated variable.
fn resultant(f: &HomPoly, g: &HomPoly, var: usize) -> Vec<BigInt> {
    let bound = (f.degree().unwrap() * g.degree().unwrap()) as usize;
    let values: Vec<BigInt> = (0..=bound)
        .map(|c| {
            let c = BigInt::from(c);
            sylvester_det(&slice_coeffs(f, var, &c), &slice_coeffs(g, var, &c))
        })
        .collect();
    let mut out: Vec<BigInt> = interpolate(&values).into_iter().map(|q| q.to_integer()).collect();
    while out.len() > 1 && out.last().unwrap().is_zero() {
        out.pop();
    }
    out
}

fn univariate_to_form(c: &[BigInt]) -> HomPoly {
    let d = (c.len() - 1) as u32;
    HomPoly::from_terms(
        2,
        c.iter().enumerate().map(|(i, v)| {
            (
                Monomial::new(&[i as u32, d - i as u32]),
                BigRational::from_integer(v.clone()),
            )
        }),
    )
    .expect("homogeneous")
}

fn form_to_univariate(f: &HomPoly) -> Vec<BigInt> {
    let p = f.primitive();
    let d = p.terms().iter().map(|(m, _)| m.exps()[0]).max().unwrap_or(0) as usize;
    let mut out = vec![BigInt::zero(); d + 1];
    for (m, c) in p.terms() {
        out[m.exps()[0] as usize] = c.to_integer();
    }
    out
}

/// Squarefree part of the gcd of the given univariate polynomials.
fn squarefree_gcd(polys: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let mut g: Option<HomPoly> = None;
    for p in polys {
        let f = univariate_to_form(p);
        g = Some(match g {
            None => f.primitive(),
            Some(g) => g.gcd(&f)?,
        });
    }
    let g = univariate_to_form(&form_to_univariate(&g.expect("nonempty")));
    if g.degree()? == 0 {
        return Ok(vec![BigInt::one()]);
    }
    let dg = g.partial(0)?;
    let common = g.gcd(&dg)?;
    Ok(form_to_univariate(&g.exact_div(&common)?))
}

/// Value of `f(x, y, 1)` on discs of radius `rx`, `ry` around the centres,
/// with a rigorous bound on the deviation (including rounding slack).
fn eval_ball(f: &HomPoly, x: &CertifiedRoot, y: &CertifiedRoot, prec: usize) -> (CBig, Big) {
    let ax = x.z.abs();
    let ay = y.z.abs();
    let axr = &ax + &x.radius;
    let ayr = &ay + &y.radius;
    let mut val = CBig::zero(prec);
    let mut err = big_int(0, prec);
    let mut mag = big_int(0, prec);
    let pw = |b: &Big, e: u32| (0..e).fold(big_int(1, prec), |acc, _| acc * b);
    let cpw = |b: &CBig, e: u32| (0..e).fold(CBig::real(big_int(1, prec), prec), |acc, _| acc.mul(b));
    for (m, c) in f.terms() {
        let e = m.exps();
        let cb = big_from_rational(c, prec);
        let cabs = crate::numeric::big_abs(&cb);
        val = val.add(&cpw(&x.z, e[0]).mul(&cpw(&y.z, e[1])).scale(&cb));
        let centre = pw(&ax, e[0]) * pw(&ay, e[1]);
        err += &cabs * (pw(&axr, e[0]) * pw(&ayr, e[1]) - &centre);
        mag += &cabs * centre;
    }
    let slack = Big::from(1).with_precision(prec).value() >> (prec as isize - 16);
    err += mag * slack;
    (val, err)
}

fn decided_nonzero(v: &(CBig, Big)) -> bool {
    v.0.abs() > v.1
}

/// Divisors of `n` when `n` is small enough to factor by trial division.
fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64().filter(|&n| n <= 1_000_000_000_000)?;
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    Some(out)
}

/// An exact rational root of `poly` inside the disc, if there is one.
fn rational_root_in(poly: &[BigInt], root: &CertifiedRoot) -> Option<BigRational> {
    let lc = poly.last()?;
    let re = crate::numeric::to_f64(&root.z.re);
    for q in small_divisors(lc)? {
        let p = (re * q as f64).round();
        if !p.is_finite() {
            continue;
        }
        let cand = BigRational::new(BigInt::from(p as i64), BigInt::from(q));
        let val = poly.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * &cand + BigRational::from_integer(c.clone())
        });
        if val.is_zero() {
            return Some(cand);
        }
    }
    None
}

/// Finiteness of the preimage of `[1:1:1]` under `[Q1:Q2:Q3]` (exact),
/// and at every common zero of `P` and `R` that `Q1 - Q3`, `Q2 - Q3` do
/// not vanish together.
pub fn check_cor2(inst: &FamilyInstance, precision_bits: usize) -> Result<CheckResult> {
    let a = inst.q[1].sub(&inst.q[0])?;
    let b = inst.q[2].sub(&inst.q[0])?;
    if !coprime(&a, &b)? {
        return Ok(CheckResult::new(
            Verdict::Fail,
            "preimage of [1:1:1] under [Q1:Q2:Q3] is not finite",
        ));
    }
    if !coprime(&inst.p, &inst.r)? {
        return Ok(CheckResult::new(
            Verdict::Unknown,
            "P and R share a factor; their common zeros are not isolated",
        ));
    }
    let da = inst.q[0].sub(&inst.q[2])?;
    let db = inst.q[1].sub(&inst.q[2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_2c0f);
    for _ in 0..64 {
        let mut m: Mat3 = [[0; 3]; 3];
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.random_range(-3i64..=3);
            }
        }
        if det3(&m).is_zero() {
            continue;
        }
        let moved: Vec<HomPoly> = [&inst.p, &inst.r, &da, &db]
            .iter()
            .map(|f| Ok(change_coords(f, &m)?.primitive()))
            .collect::<Result<_>>()?;
        let generic = moved.iter().filter(|f| !f.is_zero()).all(|f| {
            let d = f.degree().unwrap();
            let has = |e: [u32; 3]| f.terms().iter().any(|(m, _)| m.exps() == e);
            has([d, 0, 0]) && has([0, d, 0])
        });
        if !generic {
            continue;
        }
        let (pi, ri) = (at_infinity(&moved[0])?, at_infinity(&moved[1])?);
        if !coprime(&pi, &ri)? {
            continue;
        }
        return common_zero_check(inst, &moved, &m, precision_bits);
    }
    Ok(CheckResult::new(Verdict::Unknown, "no generic coordinate chart found"))
}

fn common_zero_check(inst: &FamilyInstance, moved: &[HomPoly], m: &Mat3, prec: usize) -> Result<CheckResult> {
    let (p, r) = (&moved[0], &moved[1]);
    let diffs: Vec<&HomPoly> = moved[2..].iter().filter(|f| !f.is_zero()).collect();
    let mut projections = Vec::with_capacity(2);
    for var in [1usize, 0] {
        let mut polys = vec![resultant(p, r, var)];
        for f in &diffs {
            let res = resultant(p, f, var);
            if res.iter().any(|c| !c.is_zero()) {
                polys.push(res);
            }
        }
        projections.push(squarefree_gcd(&polys)?);
    }
    if projections.iter().any(|g| g.len() == 1) {
        return Ok(CheckResult::new(
            Verdict::Pass,
            "no common zero of P, R, Q1 - Q3, Q2 - Q3 (exact)",
        ));
    }
    let work = prec.max(8);
    let Some(xs) = certified_roots(&projections[0], work) else {
        return Ok(CheckResult::new(
            Verdict::Unknown,
            format!("root isolation failed at {work} bits; increase the precision"),
        ));
    };
    let Some(ys) = certified_roots(&projections[1], work) else {
        return Ok(CheckResult::new(
            Verdict::Unknown,
            format!("root isolation failed at {work} bits; increase the precision"),
        ));
    };
    let mut undecided = 0usize;
    for x in &xs {
        for y in &ys {
            if decided_nonzero(&eval_ball(p, x, y, work)) || decided_nonzero(&eval_ball(r, x, y, work)) {
                continue;
            }
            if diffs.iter().any(|f| decided_nonzero(&eval_ball(f, x, y, work))) {
                continue;
            }
            if let Some(w) = exact_witness(inst, moved, m, &projections, x, y)? {
                return Ok(CheckResult::new(
                    Verdict::Fail,
                    format!("Q1 = Q2 = Q3 at the common zero [{}] of P and R", w.join(":")),
                ));
            }
            undecided += 1;
        }
    }
    if undecided > 0 {
        return Ok(CheckResult::new(
            Verdict::Unknown,
            format!("{undecided} candidate point(s) undecided at {work} bits; increase the precision"),
        ));
    }
    Ok(CheckResult::new(
        Verdict::Pass,
        format!("{} x {} candidate points separated at {work} bits", xs.len(), ys.len()),
    ))
}

fn exact_witness(
    inst: &FamilyInstance,
    moved: &[HomPoly],
    m: &Mat3,
    projections: &[Vec<BigInt>],
    x: &CertifiedRoot,
    y: &CertifiedRoot,
) -> Result<Option<Vec<String>>> {
    let (Some(xr), Some(yr)) = (
        rational_root_in(&projections[0], x),
        rational_root_in(&projections[1], y),
    ) else {
        return Ok(None);
    };
    let pt = vec![xr, yr, BigRational::one()];
    for f in moved {
        if !f.eval_rational(&pt)?.is_zero() {
            return Ok(None);
        }
    }
    let orig: Vec<BigRational> = m
        .iter()
        .map(|row| {
            row.iter()
                .zip(&pt)
                .map(|(a, b)| BigRational::from_integer((*a).into()) * b)
                .sum()
        })
        .collect();
    for f in [&inst.p, &inst.r] {
        if !f.eval_rational(&orig)?.is_zero() {
            return Err(FamilyError::Invariant("witness does not map back".into()));
        }
    }
    let canon = crate::mapiter::canonical_point(&orig)?;
    Ok(Some(canon.iter().map(|c| c.to_string()).collect()))
}

// ---------------------------------------------------------------------
// Random instances.

fn monomials(deg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for a in (0..=deg).rev() {
        for b in (0..=deg - a).rev() {
            out.push(Monomial::new(&[a, b, deg - a - b]));
        }
    }
    out
}

fn random_form(rng: &mut ChaCha8Rng, deg: u32, bound: i64) -> HomPoly {
    HomPoly::from_terms(
        3,
        monomials(deg)
            .into_iter()
            .map(|m| (m, BigRational::from_integer(rng.random_range(-bound..=bound).into()))),
    )
    .expect("homogeneous")
}

/// Adds `(target - f(1,1,1)) * m` for a random monomial `m` of the same
/// degree, so that afterwards `f(1,1,1) = target`.
fn adjust(rng: &mut ChaCha8Rng, f: HomPoly, deg: u32, target: &BigRational) -> Result<HomPoly> {
    let ms = monomials(deg);
    let m = ms[rng.random_range(0..ms.len())].clone();
    let gap = target - f.eval_rational(&ones())?;
    Ok(f.add(&HomPoly::from_terms(3, [(m, gap)])?)?)
}

/// A seeded instance with integer coefficients in `[-coeff_bound,
/// coeff_bound]` (before the normalizing monomial adjustments) that passes
/// [`build_family_map`] and [`check_cor1`].
pub fn random_family(deg_p: u32, deg_q: u32, coeff_bound: i64, seed: u64) -> Result<FamilyInstance> {
    if deg_p < 1 {
        return Err(FamilyError::InvalidParameter("deg_p must be at least 1".into()));
    }
    if deg_q == 1 {
        return Err(FamilyError::InvalidParameter(
            "deg_q = 1 gives P(1) = 1 - deg_q = 0, so the dynamical degree degenerates to 1".into(),
        ));
    }
    if deg_q < 2 {
        return Err(FamilyError::InvalidParameter("deg_q must be at least 2".into()));
    }
    if coeff_bound < 1 {
        return Err(FamilyError::InvalidParameter("coeff_bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let p = random_form(&mut rng, deg_p, coeff_bound);
        let q1 = random_form(&mut rng, deg_q, coeff_bound);
        let one = ones();
        let (p1, q11) = (p.eval_rational(&one)?, q1.eval_rational(&one)?);
        if p1.is_zero() || q11.is_zero() {
            continue;
        }
        let q2 = random_form(&mut rng, deg_q, coeff_bound);
        let q2 = adjust(&mut rng, q2, deg_q, &q11)?;
        let q3 = random_form(&mut rng, deg_q, coeff_bound);
        let q3 = adjust(&mut rng, q3, deg_q, &q11)?;
        let r = random_form(&mut rng, deg_p + deg_q, coeff_bound);
        let r = adjust(&mut rng, r, deg_p + deg_q, &(&p1 * &q11))?;
        let Ok(inst) = build_family_map(p, q1, q2, q3, r) else {
            continue;
        };
        if check_cor1(&inst)?.verdict == Verdict::Pass {
            return Ok(inst);
        }
    }
    Err(FamilyError::GenerationExhausted(MAX_GENERATION_ATTEMPTS))
}

// ---------------------------------------------------------------------
// Family files.

/// Parses the family format: a map file whose `map` lines are optional,
/// plus one line each for `P`, `Q1`, `Q2`, `Q3`, `R`. When `map` lines are
/// present they must agree with the induced map.
pub fn parse_family_file(text: &str) -> Result<FamilyInstance> {
    let keys = ["P", "Q1", "Q2", "Q3", "R"];
    let mut raw: [Option<(usize, String)>; 5] = Default::default();
    let (vars, comps) = parse_map_file_with(text, |line, key, rest| {
        let Some(i) = keys.iter().position(|k| *k == key) else {
            return Ok(false);
        };
        if raw[i].is_some() {
            return Err(MapError::File {
                line,
                msg: format!("duplicate `{key}` line"),
            });
        }
        raw[i] = Some((line, rest.to_string()));
        Ok(true)
    })?;
    let mut polys = Vec::with_capacity(5);
    for (i, slot) in raw.iter().enumerate() {
        let (line, src) = slot.as_ref().ok_or_else(|| MapError::File {
            line: 0,
            msg: format!("missing `{}` line", keys[i]),
        })?;
        let poly = parse_poly(src, &vars).map_err(|e| MapError::File {
            line: *line,
            msg: e.to_string(),
        })?;
        polys.push(poly);
    }
    let mut it = polys.into_iter();
    let mut next = || it.next().unwrap();
    let inst = build_family_map_with(vars.clone(), next(), next(), next(), next(), next())?;
    if !comps.is_empty() {
        let given = make_map(comps, vars)?;
        if given.components() != inst.map.components() {
            return Err(MapError::File {
                line: 0,
                msg: "`map` lines disagree with the map induced by P, Q1, Q2, Q3, R".into(),
            }
            .into());
        }
    }
    Ok(inst)
}

pub fn write_family_file(inst: &FamilyInstance) -> String {
    let v = &inst.vars;
    let mut out = format!("vars {}\n", v.names().join(" "));
    out.push_str(&format!("P {}\n", inst.p.to_string_with(v)));
    for (j, q) in inst.q.iter().enumerate() {
        out.push_str(&format!("Q{} {}\n", j + 1, q.to_string_with(v)));
    }
    out.push_str(&format!("R {}\n", inst.r.to_string_with(v)));
    for c in inst.map.components() {
        out.push_str(&format!("map {}\n", c.to_string_with(v)));
    }
    out
}
