//! Numerical Green potential of a (quasi-)algebraically stable map.
//!
//! The potential is the limit of `log ||F_n(z)|| / d_n` where `F_n` follows
//! the pointwise recursion `F_n = F(F_{n-1}) / H(F_{n-n0-1})` (plain
//! iteration in the stable case). Raw log-heights overflow quickly, so the
//! orbit is carried as unit vectors `w_n` and normalized heights
//! `gamma_n = log ||F_n(z)|| / d_n`, with exact degree ratios.
//!
//! With this normalization `u(F z) = lambda u(z) + kappa log|H(z)|` holds
//! with `kappa = (d - lambda)/h = lambda^(-n0)`, and no additive constant.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::mapiter::{ProjMap, QasCertificate};
use crate::numeric::{big_from_f64, big_from_rational, to_f64, Big};
use crate::polycore::HomPoly;
use crate::specdeg::{extend_degrees, RecurrenceSpec, SpecError, SpectralReport};

/// Relative threshold below which `||F(w)||` or `|H(w)|` counts as zero.
pub const SINGULAR_TOL: f64 = 1e-14;

/// Largest `n` accepted by [`telescope_residual`].
pub const MAX_TELESCOPE_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("inconsistent model: {0}")]
    Model(String),
    #[error("the zero vector is not a point")]
    ZeroVector,
    #[error("orbit hit the indeterminacy locus at step {step}")]
    OrbitHitIndeterminacy { step: usize },
    #[error("orbit hit the divisor H = 0 at step {step}")]
    OrbitHitDivisor { step: usize },
    #[error("not converged: final increment {increment:e} exceeds {tolerance:e}")]
    NotConverged { increment: f64, tolerance: f64 },
    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },
    #[error("n = {n} exceeds the telescoping bound {max}")]
    AmplificationOverflow { n: usize, max: usize },
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
    #[error("grid has no interior node with a full OK stencil")]
    InsufficientOkRegion,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GreenError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GreenMode {
    As,
    Qas(QasCertificate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "bits", rename_all = "lowercase")]
pub enum Precision {
    Double,
    Bits(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub n_iters: usize,
    pub precision: Precision,
    /// Maximum final increment `|gamma_N - gamma_(N-1)|`; `None` accepts any.
    pub tolerance: Option<f64>,
}

impl EvalConfig {
    pub fn new(n_iters: usize) -> Self {
        EvalConfig {
            n_iters,
            precision: Precision::Double,
            tolerance: None,
        }
    }

    pub fn with_precision(mut self, p: Precision) -> Self {
        self.precision = p;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenValue {
    pub u: f64,
    /// `|gamma_n - gamma_(n-1)|` for `n = 1..=N`.
    pub history: Vec<f64>,
}

/// A map together with its stability data, ready for evaluation.
#[derive(Debug, Clone)]
pub struct GreenModel {
    map: ProjMap,
    h_poly: Option<HomPoly>,
    spec: RecurrenceSpec,
    lambda: Big,
    digest: String,
    scale_f: f64,
    scale_h: f64,
}

impl GreenModel {
    pub fn new(map: ProjMap, mode: GreenMode, report: &SpectralReport) -> Result<Self> {
        let d = map.degree() as u64;
        let (h_poly, expect) = match mode {
            GreenMode::As => (None, (d, 0)),
            GreenMode::Qas(cert) => {
                if cert.d as u64 != d {
                    return Err(GreenError::Model(format!(
                        "certificate degree {} but map degree {d}",
                        cert.d
                    )));
                }
                if cert.h_poly.nvars() != map.nvars() {
                    return Err(GreenError::Model("H has the wrong number of variables".into()));
                }
                let spec = RecurrenceSpec::new(d, cert.h as u64, cert.n0 as u64)?;
                let seq = extend_degrees(&spec, cert.degrees.len().saturating_sub(1))?;
                if seq != cert.degrees {
                    return Err(GreenError::Model(
                        "certificate degrees differ from the recurrence".into(),
                    ));
                }
                if report.spec.n0 != cert.n0 as u64 {
                    return Err(GreenError::Model("report n0 differs from certificate".into()));
                }
                (Some(cert.h_poly), (d, cert.h as u64))
            }
        };
        if (report.spec.d, report.spec.h) != expect {
            return Err(GreenError::Model(format!(
                "spectral report is for (d, h) = ({}, {}), expected {expect:?}",
                report.spec.d, report.spec.h
            )));
        }
        let scale_f = map.components().iter().map(|c| c.coeff_l1_norm()).fold(0.0, f64::max);
        let scale_h = h_poly.as_ref().map_or(1.0, |h| h.coeff_l1_norm());
        Ok(GreenModel {
            map,
            h_poly,
            spec: report.spec,
            lambda: report.lambda.clone(),
            digest: String::new(),
            scale_f,
            scale_h,
        })
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.digest = digest.into();
        self
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn map(&self) -> &ProjMap {
        &self.map
    }

    pub fn is_qas(&self) -> bool {
        self.h_poly.is_some()
    }

    pub fn lambda(&self) -> f64 {
        to_f64(&self.lambda)
    }

    /// Coefficient of `log|H|` in the functional equation.
    pub fn kappa(&self) -> f64 {
        if self.spec.h == 0 {
            0.0
        } else {
            (self.spec.d as f64 - self.lambda()) / self.spec.h as f64
        }
    }

    /// Exact degrees `d_0..=d_n` used by the evaluator.
    pub fn degrees(&self, n: usize) -> Result<Vec<BigInt>> {
        Ok(extend_degrees(&self.spec, n)?)
    }
}

// ---------------------------------------------------------------------
// Scalar back ends.

trait Scalar: Clone + Send + Sync {
    fn from_f64(x: f64, prec: usize) -> Self;
    fn from_ratio(q: &BigRational, prec: usize) -> Self;
    fn from_big(x: &Big, prec: usize) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64, _: usize) -> Self {
        x
    }
    fn from_ratio(q: &BigRational, _: usize) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn from_big(x: &Big, _: usize) -> Self {
        to_f64(x)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Big {
    fn from_f64(x: f64, prec: usize) -> Self {
        big_from_f64(x, prec)
    }
    fn from_ratio(q: &BigRational, prec: usize) -> Self {
        big_from_rational(q, prec)
    }
    fn from_big(x: &Big, prec: usize) -> Self {
        x.clone().with_precision(prec).value()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sqrt(&self) -> Self {
        Big::sqrt(self)
    }
    fn ln(&self) -> Self {
        Big::ln(self)
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
}

#[derive(Clone)]
struct Cx<S> {
    re: S,
    im: S,
}

impl<S: Scalar> Cx<S> {
    fn from_c64(z: Complex64, prec: usize) -> Self {
        Cx {
            re: S::from_f64(z.re, prec),
            im: S::from_f64(z.im, prec),
        }
    }
    fn add(&self, o: &Self) -> Self {
        Cx {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Cx {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }
    fn scale(&self, k: &S) -> Self {
        Cx {
            re: self.re.mul(k),
            im: self.im.mul(k),
        }
    }
    fn norm_sq(&self) -> S {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }
}

fn vec_norm<S: Scalar>(v: &[Cx<S>], prec: usize) -> S {
    v.iter()
        .fold(S::from_f64(0.0, prec), |acc, c| acc.add(&c.norm_sq()))
        .sqrt()
}

struct Compiled<S> {
    terms: Vec<(Vec<u32>, S)>,
}

impl<S: Scalar> Compiled<S> {
    fn new(p: &HomPoly, prec: usize) -> Self {
        Compiled {
            terms: p
                .terms()
                .iter()
                .map(|(m, c)| (m.exps().to_vec(), S::from_ratio(c, prec)))
                .collect(),
        }
    }

    fn eval(&self, pw: &[Vec<Cx<S>>], prec: usize) -> Cx<S> {
        let mut acc = Cx {
            re: S::from_f64(0.0, prec),
            im: S::from_f64(0.0, prec),
        };
        for (e, c) in &self.terms {
            let mut t: Option<Cx<S>> = None;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let p = &pw[i][k as usize];
                    t = Some(match t {
                        None => p.clone(),
                        Some(t) => t.mul(p),
                    });
                }
            }
            acc = match t {
                None => Cx {
                    re: acc.re.add(c),
                    im: acc.im,
                },
                Some(t) => acc.add(&t.scale(c)),
            };
        }
        acc
    }
}

fn powers<S: Scalar>(w: &[Cx<S>], max_deg: u32, prec: usize) -> Vec<Vec<Cx<S>>> {
    w.iter()
        .map(|x| {
            let mut row = vec![Cx::from_c64(Complex64::new(1.0, 0.0), prec)];
            for k in 1..=max_deg as usize {
                let next = row[k - 1].mul(x);
                row.push(next);
            }
            row
        })
        .collect()
}

/// Everything an orbit needs at one precision and depth.
struct Plan<S> {
    prec: usize,
    n0: usize,
    degrees: Vec<BigInt>,
    /// `d d_(n-1) / d_n`, `h d_(n-n0-1) / d_n`, `1 / d_n`.
    a: Vec<S>,
    b: Vec<S>,
    inv: Vec<S>,
    comps: Vec<Compiled<S>>,
    h: Option<Compiled<S>>,
    max_deg: u32,
    tol_f: S,
    tol_h: S,
}

impl<S: Scalar> Plan<S> {
    fn new(model: &GreenModel, depth: usize, prec: usize) -> Result<Self> {
        let degrees = model.degrees(depth)?;
        let n0 = model.spec.n0 as usize;
        let d = BigInt::from(model.spec.d);
        let h = BigInt::from(model.spec.h);
        let mut a = vec![S::from_f64(0.0, prec)];
        let mut b = vec![S::from_f64(0.0, prec)];
        let mut inv = vec![S::from_f64(1.0, prec)];
        for n in 1..=depth {
            let dn = &degrees[n];
            a.push(S::from_ratio(&BigRational::new(&d * &degrees[n - 1], dn.clone()), prec));
            let bn = if n > n0 && model.h_poly.is_some() {
                BigRational::new(&h * &degrees[n - n0 - 1], dn.clone())
            } else {
                BigRational::from_integer(0.into())
            };
            b.push(S::from_ratio(&bn, prec));
            inv.push(S::from_ratio(&BigRational::new(1.into(), dn.clone()), prec));
        }
        let comps: Vec<Compiled<S>> = model.map.components().iter().map(|c| Compiled::new(c, prec)).collect();
        let hc = model.h_poly.as_ref().map(|hp| Compiled::new(hp, prec));
        let max_deg = model
            .map
            .degree()
            .max(model.h_poly.as_ref().map_or(0, |p| p.degree().unwrap_or(0)));
        Ok(Plan {
            prec,
            n0,
            degrees,
            a,
            b,
            inv,
            comps,
            h: hc,
            max_deg,
            tol_f: S::from_f64(SINGULAR_TOL * model.scale_f, prec),
            tol_h: S::from_f64(SINGULAR_TOL * model.scale_h, prec),
        })
    }

    fn eval_map(&self, w: &[Cx<S>]) -> Vec<Cx<S>> {
        let pw = powers(w, self.max_deg, self.prec);
        self.comps.iter().map(|c| c.eval(&pw, self.prec)).collect()
    }

    fn eval_h_abs(&self, w: &[Cx<S>]) -> Option<S> {
        let h = self.h.as_ref()?;
        let pw = powers(w, self.max_deg, self.prec);
        Some(h.eval(&pw, self.prec).norm_sq().sqrt())
    }
}

fn below<S: Scalar>(x: &S, tol: &S) -> bool {
    x.to_f64() <= tol.to_f64()
}

struct Orbit<S> {
    gammas: Vec<S>,
    points: Vec<Vec<Cx<S>>>,
    history: Vec<f64>,
}

/// Runs the normalized recursion from `z` for `n` steps.
fn orbit<S: Scalar>(plan: &Plan<S>, z: Vec<Cx<S>>, n: usize, keep_points: bool) -> Result<Orbit<S>> {
    let prec = plan.prec;
    let nz = vec_norm(&z, prec);
    if nz.to_f64() == 0.0 {
        return Err(GreenError::ZeroVector);
    }
    let w0: Vec<Cx<S>> = z.iter().map(|c| c.scale(&S::from_f64(1.0, prec).div(&nz))).collect();
    let mut gammas = vec![nz.ln()];
    let mut points = vec![w0];
    let mut history = Vec::with_capacity(n);
    let lag = plan.n0 + 1;
    for step in 1..=n {
        // The divisor is tested first: a point of {H = 0} is sent into the
        // indeterminacy locus one step later, and the divisor is the cause.
        let mut h_log = None;
        if step >= lag {
            if let Some(hv) = plan.eval_h_abs(&points[step - lag]) {
                if below(&hv, &plan.tol_h) {
                    return Err(GreenError::OrbitHitDivisor { step });
                }
                h_log = Some(hv.ln());
            }
        }
        let fw = plan.eval_map(points.last().unwrap());
        let nf = vec_norm(&fw, prec);
        if below(&nf, &plan.tol_f) {
            return Err(GreenError::OrbitHitIndeterminacy { step });
        }
        let mut incr = nf.ln();
        let mut g = plan.a[step].mul(&gammas[step - 1]);
        if let Some(hl) = h_log {
            incr = incr.sub(&hl);
            g = g.sub(&plan.b[step].mul(&gammas[step - lag]));
        }
        g = g.add(&plan.inv[step].mul(&incr));
        let gf = g.to_f64();
        if !gf.is_finite() {
            return Err(GreenError::NonFinite { step });
        }
        history.push((gf - gammas[step - 1].to_f64()).abs());
        let inv_nf = S::from_f64(1.0, prec).div(&nf);
        let next: Vec<Cx<S>> = fw.iter().map(|c| c.scale(&inv_nf)).collect();
        gammas.push(g);
        points.push(next);
        if !keep_points && points.len() > lag {
            // Only the last n0 + 1 points are ever read again.
            let drop = points.len() - lag;
            for p in points.iter_mut().take(drop) {
                p.clear();
            }
        }
    }
    Ok(Orbit {
        gammas,
        points,
        history,
    })
}

fn lift<S: Scalar>(z: &[Complex64], prec: usize) -> Vec<Cx<S>> {
    z.iter().map(|&c| Cx::from_c64(c, prec)).collect()
}

fn check_point(model: &GreenModel, z: &[Complex64]) -> Result<()> {
    if z.len() != model.map.nvars() {
        return Err(GreenError::InvalidArgument(format!(
            "point has {} coordinates, map needs {}",
            z.len(),
            model.map.nvars()
        )));
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(GreenError::InvalidArgument("non-finite coordinate".into()));
    }
    Ok(())
}

fn finish(orbit: Orbit<impl Scalar>, cfg: &EvalConfig) -> Result<GreenValue> {
    let u = orbit.gammas.last().unwrap().to_f64();
    if let (Some(tol), Some(&last)) = (cfg.tolerance, orbit.history.last()) {
        if last > tol {
            return Err(GreenError::NotConverged {
                increment: last,
                tolerance: tol,
            });
        }
    }
    Ok(GreenValue {
        u,
        history: orbit.history,
    })
}

fn green_eval_with<S: Scalar>(
    model: &GreenModel,
    plan: &Plan<S>,
    z: &[Complex64],
    cfg: &EvalConfig,
) -> Result<GreenValue> {
    check_point(model, z)?;
    let o = orbit(plan, lift::<S>(z, plan.prec), cfg.n_iters, false)?;
    finish(o, cfg)
}

/// Estimate of the Green potential at `z` after `cfg.n_iters` steps.
pub fn green_eval(model: &GreenModel, z: &[Complex64], cfg: &EvalConfig) -> Result<GreenValue> {
    match cfg.precision {
        Precision::Double => {
            let plan = Plan::<f64>::new(model, cfg.n_iters, 53)?;
            green_eval_with(model, &plan, z, cfg)
        }
        Precision::Bits(bits) => {
            let plan = Plan::<Big>::new(model, cfg.n_iters, bits.max(64))?;
            green_eval_with(model, &plan, z, cfg)
        }
    }
}

fn unit(z: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(GreenError::ZeroVector);
    }
    Ok(z.iter().map(|c| c / n).collect())
}

fn u_of<S: Scalar>(plan: &Plan<S>, z: Vec<Cx<S>>, n: usize) -> Result<S> {
    Ok(orbit(plan, z, n, false)?.gammas.pop().unwrap())
}

fn functional_eq_with<S: Scalar>(model: &GreenModel, plan: &Plan<S>, z: &[Complex64], n: usize) -> Result<f64> {
    let prec = plan.prec;
    let zt = lift::<S>(&unit(z)?, prec);
    let fz = plan.eval_map(&zt);
    if below(&vec_norm(&fz, prec), &plan.tol_f) {
        return Err(GreenError::OrbitHitIndeterminacy { step: 1 });
    }
    let u1 = u_of(plan, fz, n)?;
    let u0 = u_of(plan, zt.clone(), n)?;
    let lambda = S::from_big(&model.lambda, prec);
    let mut rhs = lambda.mul(&u0);
    if let Some(hv) = plan.eval_h_abs(&zt) {
        if below(&hv, &plan.tol_h) {
            return Err(GreenError::OrbitHitDivisor { step: 0 });
        }
        let d = S::from_f64(model.spec.d as f64, prec);
        let h = S::from_f64(model.spec.h as f64, prec);
        let kappa = d.sub(&lambda).div(&h);
        rhs = rhs.add(&kappa.mul(&hv.ln()));
    }
    Ok(u1.sub(&rhs).to_f64().abs())
}

/// `|u(F z~) - lambda u(z~) - kappa log|H(z~)||` at the unit vector
/// `z~ = z / ||z||`; in the stable case `|u(F z~) - d u(z~)|`.
pub fn functional_eq_residual(model: &GreenModel, z: &[Complex64], cfg: &EvalConfig) -> Result<f64> {
    check_point(model, z)?;
    match cfg.precision {
        Precision::Double => {
            let plan = Plan::<f64>::new(model, cfg.n_iters, 53)?;
            functional_eq_with(model, &plan, z, cfg.n_iters)
        }
        Precision::Bits(bits) => {
            let plan = Plan::<Big>::new(model, cfg.n_iters, bits.max(64))?;
            functional_eq_with(model, &plan, z, cfg.n_iters)
        }
    }
}

fn telescope_with<S: Scalar>(
    model: &GreenModel,
    plan: &Plan<S>,
    z: &[Complex64],
    n: usize,
    depth: usize,
) -> Result<f64> {
    let prec = plan.prec;
    let zt = lift::<S>(&unit(z)?, prec);
    let head = orbit(plan, zt.clone(), n, true)?;
    let l = |m: usize| S::from_ratio(&BigRational::from_integer(plan.degrees[m].clone()), prec).mul(&head.gammas[m]);
    // u(F_n z~) = u(w_n) + log ||F_n(z~)||.
    let lhs = u_of(plan, head.points[n].clone(), depth)?.add(&l(n));
    let u0 = u_of(plan, zt, depth)?;
    let lambda = S::from_big(&model.lambda, prec);
    let mut lam_pow = S::from_f64(1.0, prec);
    for _ in 0..n {
        lam_pow = lam_pow.mul(&lambda);
    }
    let mut rhs = lam_pow.mul(&u0);
    if model.h_poly.is_some() {
        let d = S::from_f64(model.spec.d as f64, prec);
        let h = S::from_f64(model.spec.h as f64, prec);
        let kappa = d.sub(&lambda).div(&h);
        let mut weight = S::from_f64(1.0, prec);
        let mut sum = S::from_f64(0.0, prec);
        for j in 1..=n.min(plan.n0) {
            // log|H(F_(n-j) z~)| = h log ||F_(n-j) z~|| + log|H(w_(n-j))|.
            let hv = plan.eval_h_abs(&head.points[n - j]).unwrap();
            if below(&hv, &plan.tol_h) {
                return Err(GreenError::OrbitHitDivisor { step: n - j });
            }
            let term = h.mul(&l(n - j)).add(&hv.ln());
            sum = sum.add(&weight.mul(&term));
            weight = weight.mul(&lambda);
        }
        rhs = rhs.add(&kappa.mul(&sum));
    }
    Ok(lhs.sub(&rhs).div(&lam_pow).to_f64().abs())
}

/// Residual of `u(F_n) = lambda^n u + kappa sum_(j<=min(n,n0))
/// lambda^(j-1) log|H(F_(n-j))|`, divided by `lambda^n`. The potential
/// values use `cfg.n_iters` steps.
pub fn telescope_residual(model: &GreenModel, z: &[Complex64], n: usize, cfg: &EvalConfig) -> Result<f64> {
    check_point(model, z)?;
    if n == 0 {
        return Err(GreenError::InvalidArgument("n must be at least 1".into()));
    }
    if n > MAX_TELESCOPE_N || !model.lambda().powi(n as i32).is_finite() {
        return Err(GreenError::AmplificationOverflow {
            n,
            max: MAX_TELESCOPE_N,
        });
    }
    let depth = cfg.n_iters.max(n);
    match cfg.precision {
        Precision::Double => {
            let plan = Plan::<f64>::new(model, depth, 53)?;
            telescope_with(model, &plan, z, n, depth)
        }
        Precision::Bits(bits) => {
            let plan = Plan::<Big>::new(model, depth, bits.max(64))?;
            telescope_with(model, &plan, z, n, depth)
        }
    }
}

/// Seeded points uniformly distributed on the unit sphere of `C^nvars`.
pub fn sphere_points(nvars: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        // Box-Muller; 1 - u keeps the logarithm finite.
        let u: f64 = 1.0 - rng.random::<f64>();
        let v: f64 = rng.random();
        let r = (-2.0 * u.ln()).sqrt();
        let a = std::f64::consts::TAU * v;
        Complex64::new(r * a.cos(), r * a.sin())
    };
    (0..count)
        .map(|_| loop {
            let z: Vec<Complex64> = (0..nvars).map(|_| gauss()).collect();
            let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-3 {
                break z.into_iter().map(|c| c / n).collect();
            }
        })
        .collect()
}

// ---------------------------------------------------------------------
// Grids.

/// Real 2-plane `base + x e1 + y e2` with `(x, y)` in a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slice {
    #[serde(serialize_with = "ser_cvec")]
    pub base: Vec<Complex64>,
    #[serde(serialize_with = "ser_cvec")]
    pub e1: Vec<Complex64>,
    #[serde(serialize_with = "ser_cvec")]
    pub e2: Vec<Complex64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

fn ser_cvec<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

impl Slice {
    pub fn node(&self, x: f64, y: f64) -> Vec<Complex64> {
        self.base
            .iter()
            .zip(&self.e1)
            .zip(&self.e2)
            .map(|((b, a), c)| b + a * x + c * y)
            .collect()
    }

    fn validate(&self, nvars: usize) -> Result<()> {
        if [&self.base, &self.e1, &self.e2].iter().any(|v| v.len() != nvars) {
            return Err(GreenError::InvalidSlice(format!("vectors must have {nvars} entries")));
        }
        let n1: f64 = self.e1.iter().map(|c| c.norm_sqr()).sum();
        let n2: f64 = self.e2.iter().map(|c| c.norm_sqr()).sum();
        // The parameters are real, so independence over R is what matters:
        // `e2 = i e1` spans a complex line through the base point.
        let ip: f64 = self.e1.iter().zip(&self.e2).map(|(a, b)| (a.conj() * b).re).sum();
        if n1 * n2 - ip * ip <= 1e-12 * n1 * n2 || n1 == 0.0 || n2 == 0.0 {
            return Err(GreenError::InvalidSlice("direction vectors are dependent".into()));
        }
        let finite = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite();
        if !finite(self.x_range) || !finite(self.y_range) {
            return Err(GreenError::InvalidSlice("non-finite range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeStatus {
    #[serde(rename = "OK")]
    Ok,
    HitIndeterminacy,
    HitDivisor,
    NotConverged,
}

impl NodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeStatus::Ok => "OK",
            NodeStatus::HitIndeterminacy => "HitIndeterminacy",
            NodeStatus::HitDivisor => "HitDivisor",
            NodeStatus::NotConverged => "NotConverged",
        }
    }
}

/// Potential values on a `resolution x resolution` grid, row-major with
/// `y` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenGrid {
    pub slice: Slice,
    pub resolution: usize,
    pub values: Vec<f64>,
    pub status: Vec<NodeStatus>,
    pub n_iters: usize,
    pub precision: Precision,
    pub digest: String,
}

impl GreenGrid {
    pub fn coord(&self, i: usize) -> f64 {
        axis(self.slice.x_range, self.resolution, i)
    }

    pub fn row_coord(&self, j: usize) -> f64 {
        axis(self.slice.y_range, self.resolution, j)
    }

    pub fn at(&self, i: usize, j: usize) -> (f64, NodeStatus) {
        let k = j * self.resolution + i;
        (self.values[k], self.status[k])
    }
}

fn axis(range: (f64, f64), res: usize, i: usize) -> f64 {
    if res <= 1 {
        range.0
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (res - 1) as f64
    }
}

fn node_value(model: &GreenModel, plan: &Plan<f64>, z: &[Complex64], cfg: &EvalConfig) -> (f64, NodeStatus) {
    match green_eval_with(model, plan, z, cfg) {
        Ok(v) => (v.u, NodeStatus::Ok),
        Err(GreenError::OrbitHitDivisor { .. }) => (f64::NAN, NodeStatus::HitDivisor),
        Err(GreenError::NotConverged { .. }) | Err(GreenError::NonFinite { .. }) => {
            (f64::NAN, NodeStatus::NotConverged)
        }
        // The origin of the slice lifts to no point at all; it is reported
        // with the indeterminate nodes.
        Err(_) => (f64::NAN, NodeStatus::HitIndeterminacy),
    }
}

/// Evaluates the potential at every node. Per-node failures are recorded
/// in `status`; the result does not depend on the number of workers.
pub fn grid_sample(model: &GreenModel, slice: Slice, resolution: usize, cfg: &EvalConfig) -> Result<GreenGrid> {
    slice.validate(model.map.nvars())?;
    if resolution == 0 {
        return Err(GreenError::InvalidArgument("resolution must be positive".into()));
    }
    if let Precision::Bits(_) = cfg.precision {
        return Err(GreenError::InvalidArgument(
            "grid sampling runs in double precision".into(),
        ));
    }
    let plan = Plan::<f64>::new(model, cfg.n_iters, 53)?;
    let eval = |k: usize| {
        let (i, j) = (k % resolution, k / resolution);
        let z = slice.node(axis(slice.x_range, resolution, i), axis(slice.y_range, resolution, j));
        node_value(model, &plan, &z, cfg)
    };
    let total = resolution * resolution;
    #[cfg(feature = "parallel")]
    let out: Vec<(f64, NodeStatus)> = {
        use rayon::prelude::*;
        (0..total).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<(f64, NodeStatus)> = (0..total).map(eval).collect();
    let (values, status) = out.into_iter().unzip();
    Ok(GreenGrid {
        slice,
        resolution,
        values,
        status,
        n_iters: cfg.n_iters,
        precision: cfg.precision,
        digest: model.digest.clone(),
    })
}

/// Absolute 5-point Laplacian in slice coordinates at interior nodes whose
/// whole stencil is OK; `None` elsewhere.
pub fn laplacian_diagnostic(grid: &GreenGrid) -> Result<Vec<Option<f64>>> {
    let n = grid.resolution;
    let mut out = vec![None; n * n];
    if n < 3 {
        return Err(GreenError::InsufficientOkRegion);
    }
    let hx = (grid.slice.x_range.1 - grid.slice.x_range.0) / (n - 1) as f64;
    let hy = (grid.slice.y_range.1 - grid.slice.y_range.0) / (n - 1) as f64;
    let ok = |i: usize, j: usize| grid.status[j * n + i] == NodeStatus::Ok;
    let v = |i: usize, j: usize| grid.values[j * n + i];
    let mut any = false;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            if !(ok(i, j) && ok(i - 1, j) && ok(i + 1, j) && ok(i, j - 1) && ok(i, j + 1)) {
                continue;
            }
            let lx = (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) / (hx * hx);
            let ly = (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) / (hy * hy);
            out[j * n + i] = Some((lx + ly).abs());
            any = true;
        }
    }
    if !any {
        return Err(GreenError::InsufficientOkRegion);
    }
    Ok(out)
}

/// CSV with header `x,y,u,status`; `u` is empty on non-OK nodes.
pub fn grid_to_csv(grid: &GreenGrid) -> String {
    let mut s = String::from("x,y,u,status\n");
    for j in 0..grid.resolution {
        for i in 0..grid.resolution {
            let (u, st) = grid.at(i, j);
            let u = if st == NodeStatus::Ok {
                format!("{u:?}")
            } else {
                String::new()
            };
            s.push_str(&format!(
                "{:?},{:?},{},{}\n",
                grid.coord(i),
                grid.row_coord(j),
                u,
                st.as_str()
            ));
        }
    }
    s
}

fn ok_range(grid: &GreenGrid) -> Option<(f64, f64)> {
    grid.values
        .iter()
        .zip(&grid.status)
        .filter(|(_, s)| **s == NodeStatus::Ok)
        .map(|(v, _)| *v)
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

/// Plain 16-bit PGM. OK nodes map linearly onto `1..=65535`, other nodes
/// are 0. The first image row is the first grid row.
pub fn grid_to_pgm(grid: &GreenGrid) -> String {
    let n = grid.resolution;
    let (lo, hi) = ok_range(grid).unwrap_or((0.0, 0.0));
    let mut s = format!("P2\n{n} {n}\n65535\n");
    for j in 0..n {
        let row: Vec<String> = (0..n)
            .map(|i| {
                let (u, st) = grid.at(i, j);
                let px = if st != NodeStatus::Ok {
                    0
                } else if hi > lo {
                    1 + ((u - lo) / (hi - lo) * 65534.0).round() as u32
                } else {
                    1
                };
                px.to_string()
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub resolution: usize,
    pub slice: Slice,
    pub n_iters: usize,
    pub precision: Precision,
    pub certificate_digest: String,
    pub ok_nodes: usize,
}

pub fn grid_meta(grid: &GreenGrid) -> GridMeta {
    let r = ok_range(grid);
    GridMeta {
        min: r.map(|r| r.0),
        max: r.map(|r| r.1),
        resolution: grid.resolution,
        slice: grid.slice.clone(),
        n_iters: grid.n_iters,
        precision: grid.precision,
        certificate_digest: grid.digest.clone(),
        ok_nodes: grid.status.iter().filter(|s| **s == NodeStatus::Ok).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapiter::{infer_qas, iterate_degrees, parse_map_file, QasVerdict};
    use crate::polycore::Limits;
    use crate::specdeg::char_poly_roots;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn monomial_model() -> GreenModel {
        let map = parse_map_file("vars z w t\nmap z^2\nmap w^2\nmap t^2\n").unwrap();
        let rep = char_poly_roots(&RecurrenceSpec::new(2, 0, 1).unwrap(), 128).unwrap();
        GreenModel::new(map, GreenMode::As, &rep).unwrap()
    }

    pub(crate) fn qas_model() -> GreenModel {
        let map = parse_map_file(
            "vars z w t\nmap z*w^2 - w^2*t\nmap z*t^2 - w^2*t\nmap z^3 + 2*z^2*w - z*w*t - z*t^2 - w^2*t\n",
        )
        .unwrap();
        let tr = iterate_degrees(&map, 3, &Limits::default()).unwrap();
        let QasVerdict::Qas(cert) = infer_qas(&tr, 3, &Limits::default()).unwrap() else {
            panic!()
        };
        let rep = char_poly_roots(&RecurrenceSpec::new(3, 1, 1).unwrap(), 128).unwrap();
        GreenModel::new(map, GreenMode::Qas(cert), &rep).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..3)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn sphere_points_are_unit_and_seeded() {
        let a = sphere_points(3, 20, 5);
        assert_eq!(a, sphere_points(3, 20, 5));
        assert_ne!(a, sphere_points(3, 20, 6));
        for z in &a {
            let n: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monomial_closed_form() {
        let m = monomial_model();
        let cfg = EvalConfig::new(60);
        let v = green_eval(&m, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], &cfg).unwrap();
        assert!((v.u - 2f64.ln()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let z = random_point(&mut rng);
            let want = z.iter().map(|x| x.norm().ln()).fold(f64::NEG_INFINITY, f64::max);
            assert!((green_eval(&m, &z, &cfg).unwrap().u - want).abs() < 1e-9);
        }
    }

    #[test]
    fn kappa_is_limit_of_lagged_ratio() {
        // d_(n-n0)/d_n tends to (d - lambda)/h for any lag.
        for (d, h, n0) in [(3, 1, 1), (3, 2, 2), (4, 1, 3), (5, 4, 2)] {
            let spec = RecurrenceSpec::new(d, h, n0).unwrap();
            let rep = char_poly_roots(&spec, 128).unwrap();
            let seq = extend_degrees(&spec, 400).unwrap();
            let ratio = BigRational::new(seq[400 - n0 as usize].clone(), seq[400].clone())
                .to_f64()
                .unwrap();
            let kappa = (d as f64 - rep.lambda_f64()) / h as f64;
            assert!((ratio - kappa).abs() < 1e-9, "{d} {h} {n0}: {ratio} vs {kappa}");
        }
    }

    #[test]
    fn qas_functional_equation_and_divisor() {
        let m = qas_model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let z = random_point(&mut rng);
            let r = functional_eq_residual(&m, &z, &EvalConfig::new(40)).unwrap();
            assert!(r < 1e-6, "{r}");
        }
        // z = 0 lies on H.
        let z = [c(0.0, 0.0), c(0.3, 0.1), c(-0.5, 0.2)];
        assert_eq!(
            green_eval(&m, &z, &EvalConfig::new(10)),
            Err(GreenError::OrbitHitDivisor { step: 2 })
        );
        // [1:1:1] is indeterminate.
        let z = [c(1.0, 0.0); 3];
        assert_eq!(
            green_eval(&m, &z, &EvalConfig::new(10)),
            Err(GreenError::OrbitHitIndeterminacy { step: 1 })
        );
    }

    #[test]
    fn telescope_identities() {
        let m = qas_model();
        let z = [c(0.3, -0.2), c(0.7, 0.1), c(-0.4, 0.5)];
        let cfg = EvalConfig::new(40);
        let t1 = telescope_residual(&m, &z, 1, &cfg).unwrap();
        let fe = functional_eq_residual(&m, &z, &cfg).unwrap();
        assert!((t1 * m.lambda() - fe).abs() < 1e-9, "{t1} {fe}");
        for n in 2..=4 {
            assert!(telescope_residual(&m, &z, n, &cfg).unwrap() < 1e-6);
        }
        let big = cfg.with_precision(Precision::Bits(160));
        assert!(telescope_residual(&m, &z, 5, &big).unwrap() < 1e-6);
        assert!(matches!(
            telescope_residual(&m, &z, MAX_TELESCOPE_N + 1, &cfg),
            Err(GreenError::AmplificationOverflow { .. })
        ));
        let a = monomial_model();
        assert!(telescope_residual(&a, &z, 3, &EvalConfig::new(60)).unwrap() < 1e-12);
    }

    #[test]
    fn precision_modes_agree() {
        let m = qas_model();
        let z = [c(0.3, -0.2), c(0.7, 0.1), c(-0.4, 0.5)];
        let lo = green_eval(&m, &z, &EvalConfig::new(30)).unwrap().u;
        let hi = green_eval(&m, &z, &EvalConfig::new(30).with_precision(Precision::Bits(200)))
            .unwrap()
            .u;
        assert!((lo - hi).abs() < 1e-12, "{lo} {hi}");
    }

    #[test]
    fn convergence_tolerance() {
        let m = qas_model();
        let z = [c(0.3, -0.2), c(0.7, 0.1), c(-0.4, 0.5)];
        assert!(matches!(
            green_eval(&m, &z, &EvalConfig::new(3).with_tolerance(1e-12)),
            Err(GreenError::NotConverged { .. })
        ));
        let v = green_eval(&m, &z, &EvalConfig::new(40).with_tolerance(1e-12)).unwrap();
        assert_eq!(v.history.len(), 40);
    }

    fn slice(x: (f64, f64), y: (f64, f64)) -> Slice {
        Slice {
            base: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
            e1: vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            e2: vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
            x_range: x,
            y_range: y,
        }
    }

    #[test]
    fn grid_consistency_and_exports() {
        let m = monomial_model();
        let cfg = EvalConfig::new(50);
        let g = grid_sample(&m, slice((-1.0, 1.0), (-2.0, 2.0)), 5, &cfg).unwrap();
        let base = green_eval(&m, &g.slice.base, &cfg).unwrap().u;
        assert_eq!((g.coord(2), g.row_coord(2)), (0.0, 0.0));
        assert_eq!(g.at(2, 2).0, base);
        let csv = grid_to_csv(&g);
        assert_eq!(csv.lines().count(), 1 + 25);
        assert_eq!(csv.lines().next().unwrap(), "x,y,u,status");
        let pgm = grid_to_pgm(&g);
        assert!(pgm.starts_with("P2\n5 5\n65535\n"));
        let px: Vec<u32> = pgm
            .lines()
            .skip(3)
            .flat_map(|l| l.split(' ').map(|p| p.parse::<u32>().unwrap()))
            .collect();
        assert_eq!(px.len(), 25);
        assert!(px.iter().all(|&p| (1..=65535).contains(&p)));
        assert!(px.contains(&1) && px.contains(&65535));
        let bad = Slice {
            e2: vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
            ..slice((0.0, 1.0), (0.0, 1.0))
        };
        assert!(matches!(
            grid_sample(&m, bad, 3, &cfg),
            Err(GreenError::InvalidSlice(_))
        ));
    }

    #[test]
    fn grid_marks_divisor_nodes() {
        let m = qas_model();
        // The z-coordinate vanishes along x = 0.
        let s = Slice {
            base: vec![c(0.0, 0.0), c(0.4, 0.1), c(-0.3, 0.2)],
            e1: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            e2: vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
        };
        let g = grid_sample(&m, s, 4, &EvalConfig::new(20)).unwrap();
        for j in 0..4 {
            assert_eq!(g.at(0, j).1, NodeStatus::HitDivisor);
            assert!(g.at(0, j).0.is_nan());
        }
        let csv = grid_to_csv(&g);
        assert!(csv.lines().nth(1).unwrap().ends_with(",,HitDivisor"));
        assert!(grid_to_pgm(&g).lines().nth(3).unwrap().starts_with("0 "));
    }

    fn synthetic(f: impl Fn(f64, f64) -> f64) -> GreenGrid {
        let s = slice((-1.0, 1.0), (-2.0, 2.0));
        let n = 9;
        let mut values = Vec::new();
        for j in 0..n {
            for i in 0..n {
                values.push(f(axis(s.x_range, n, i), axis(s.y_range, n, j)));
            }
        }
        GreenGrid {
            slice: s,
            resolution: n,
            values,
            status: vec![NodeStatus::Ok; n * n],
            n_iters: 0,
            precision: Precision::Double,
            digest: String::new(),
        }
    }

    #[test]
    fn laplacian_stencil() {
        let lap = laplacian_diagnostic(&synthetic(|x, y| 3.0 * x - 2.0 * y + 1.0)).unwrap();
        assert!(lap.iter().flatten().all(|v| *v < 1e-9));
        let lap = laplacian_diagnostic(&synthetic(|x, y| x * x + y * y)).unwrap();
        assert!(lap.iter().flatten().all(|v| (v - 4.0).abs() < 1e-9));
        let mut g = synthetic(|x, _| x);
        g.status = vec![NodeStatus::HitDivisor; 81];
        assert_eq!(laplacian_diagnostic(&g), Err(GreenError::InsufficientOkRegion));
    }

    #[test]
    fn laplacian_follows_corner_locus() {
        // On (1, x + iy, 0.5) the potential is max(0, log|x + iy|).
        let m = monomial_model();
        let g = grid_sample(&m, slice((-2.0, 2.0), (-2.0, 2.0)), 41, &EvalConfig::new(60)).unwrap();
        let lap = laplacian_diagnostic(&g).unwrap();
        let h = 0.1;
        let mut peak = (0.0, 0.0);
        for j in 0..41 {
            for i in 0..41 {
                if let Some(v) = lap[j * 41 + i] {
                    let r = g.coord(i).hypot(g.row_coord(j));
                    // Away from the circle only the O(h^2) stencil error of
                    // the harmonic branch log r remains.
                    if (r - 1.0).abs() > 2.0 * h {
                        assert!(v < 1e-2, "{v} at r = {r}");
                    }
                    if v > peak.0 {
                        peak = (v, r);
                    }
                }
            }
        }
        assert!((peak.1 - 1.0).abs() <= 2.0 * h && peak.0 > 1.0);
    }
}
