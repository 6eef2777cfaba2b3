//! Degree sequences of quasi-algebraically stable maps and their spectral
//! data.
//!
//! The degrees obey `d_n = d*d_{n-1} - h*d_{n-n0-1}` with `d_n = d^n` for
//! `n <= n0` and `d_n = 0` for negative `n`. Their growth rate `lambda` is
//! the root of maximal modulus of `t^(n0+1) - d*t^n0 + h`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numeric::{
    big_abs, big_from_bigint, big_from_rational, big_int, certified_roots, decimal_string, log2_abs, to_f64, Big, CBig,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid recurrence parameters: {0}")]
    InvalidSpec(String),
    #[error("degree d_{n} is not positive")]
    NonPositiveDegree { n: usize },
    #[error("dominant root does not exceed 1 (P(1) = {p1})")]
    DegenerateLambda { p1: i128 },
    #[error("dominant root multiplicity {0} is outside {{1, 2}}")]
    MultiplicityOutOfRange(usize),
    #[error("roots could not be certified at {0} bits")]
    PrecisionExhausted(usize),
    #[error("precision must be at least 64 bits, got {0}")]
    InvalidPrecision(usize),
    #[error("need at least {needed} degrees, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, SpecError>;

/// Parameters `(d, h, n0)` of the degree recurrence; `h = 0` is the
/// algebraically stable case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RecurrenceSpec {
    pub d: u64,
    pub h: u64,
    pub n0: u64,
}

impl RecurrenceSpec {
    pub fn new(d: u64, h: u64, n0: u64) -> Result<Self> {
        if d < 2 {
            return Err(SpecError::InvalidSpec(format!("d = {d} < 2")));
        }
        if n0 < 1 {
            return Err(SpecError::InvalidSpec("n0 must be at least 1".into()));
        }
        if n0 > 4096 {
            return Err(SpecError::InvalidSpec(format!("n0 = {n0} is too large")));
        }
        Ok(RecurrenceSpec { d, h, n0 })
    }

    /// `P(1) = 1 - d + h`; negative values force `lambda > 1`.
    pub fn p_at_one(&self) -> i128 {
        1 - self.d as i128 + self.h as i128
    }

    /// Exact test for `lambda > 1`. On `t > 0` the polynomial has a single
    /// critical point `t* = d n0/(n0+1)`, so a root above 1 exists iff
    /// `P(1) < 0`, or `t* > 1` and `P(t*) <= 0`.
    pub fn lambda_exceeds_one(&self) -> bool {
        if self.p_at_one() < 0 {
            return true;
        }
        let n0 = self.n0 as i64;
        let tstar = BigRational::new(BigInt::from(self.d) * n0, BigInt::from(n0 + 1));
        tstar > BigRational::one() && !rational_poly_eval(&self.charpoly(), &tstar).is_positive()
    }

    /// Coefficients of `t^(n0+1) - d t^n0 + h`, highest degree first.
    pub fn charpoly(&self) -> Vec<BigInt> {
        let n0 = self.n0 as usize;
        let mut c = vec![BigInt::zero(); n0 + 2];
        c[0] = BigInt::one();
        c[1] = -BigInt::from(self.d);
        c[n0 + 1] += BigInt::from(self.h);
        c
    }
}

/// `d_0, ..., d_N` exactly.
pub fn extend_degrees(spec: &RecurrenceSpec, n_max: usize) -> Result<Vec<BigInt>> {
    let d = BigInt::from(spec.d);
    let h = BigInt::from(spec.h);
    let lag = spec.n0 as usize + 1;
    let mut out: Vec<BigInt> = Vec::with_capacity(n_max + 1);
    out.push(BigInt::one());
    for n in 1..=n_max {
        let mut next = &d * &out[n - 1];
        if n >= lag {
            next -= &h * &out[n - lag];
        }
        if !next.is_positive() {
            return Err(SpecError::NonPositiveDegree { n });
        }
        out.push(next);
    }
    Ok(out)
}

/// Dominant root data of the characteristic polynomial.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub spec: RecurrenceSpec,
    /// Highest degree first.
    pub charpoly: Vec<BigInt>,
    pub lambda: Big,
    /// Certified bound on `|lambda - true root|`.
    pub lambda_error: Big,
    pub r: usize,
    pub rho: f64,
    /// All roots as floats, sorted by decreasing modulus.
    pub roots: Vec<(f64, f64)>,
    /// `Q(n) = q_fit[0] + q_fit[1]*n` (second entry only when `r = 2`).
    pub q_fit: Vec<Big>,
    pub precision_bits: usize,
}

impl SpectralReport {
    pub fn lambda_f64(&self) -> f64 {
        to_f64(&self.lambda)
    }

    pub fn lambda_decimal(&self) -> String {
        decimal_string(
            &self.lambda,
            (self.precision_bits as f64 * std::f64::consts::LOG10_2) as usize,
        )
    }

    pub fn q_at(&self, n: usize) -> Big {
        let mut q = self.q_fit[0].clone();
        if self.q_fit.len() > 1 {
            q += &self.q_fit[1] * big_int(n as i64, self.precision_bits);
        }
        q
    }
}

fn rational_poly_eval(coeffs_desc: &[BigInt], t: &BigRational) -> BigRational {
    coeffs_desc.iter().fold(BigRational::zero(), |acc, c| {
        acc * t + BigRational::from_integer(c.clone())
    })
}

/// Divides `p` (descending, integer) by `(a t - b)^2` exactly; returns an
/// integer polynomial in ascending order proportional to the quotient.
fn deflate_double(p_desc: &[BigInt], a: &BigInt, b: &BigInt) -> Vec<BigInt> {
    let root = BigRational::new(b.clone(), a.clone());
    let mut cur: Vec<BigRational> = p_desc.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    for _ in 0..2 {
        // synthetic division by (t - root)
        let mut q = Vec::with_capacity(cur.len() - 1);
        let mut acc = BigRational::zero();
        for c in &cur[..cur.len() - 1] {
            acc = acc * &root + c;
            q.push(acc.clone());
        }
        cur = q;
    }
    let den = cur
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    cur.iter()
        .rev()
        .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
        .collect()
}

/// Roots of the characteristic polynomial, `lambda`, its multiplicity and
/// the spectral gap, with all roots certified to `2^(-precision_bits/2)`.
pub fn char_poly_roots(spec: &RecurrenceSpec, precision_bits: usize) -> Result<SpectralReport> {
    if precision_bits < 64 {
        return Err(SpecError::InvalidPrecision(precision_bits));
    }
    if !spec.lambda_exceeds_one() {
        return Err(SpecError::DegenerateLambda { p1: spec.p_at_one() });
    }
    let prec = precision_bits;
    let charpoly = spec.charpoly();
    let n0 = spec.n0 as usize;
    let d = BigInt::from(spec.d);

    if spec.h == 0 {
        // t^n0 (t - d): lambda = d exactly, every other root is 0.
        let mut roots = vec![(spec.d as f64, 0.0)];
        roots.extend(std::iter::repeat_n((0.0, 0.0), n0));
        return Ok(SpectralReport {
            spec: *spec,
            charpoly,
            lambda: big_int(spec.d as i64, prec),
            lambda_error: big_int(0, prec),
            r: 1,
            rho: 0.0,
            roots,
            q_fit: vec![big_int(1, prec)],
            precision_bits,
        });
    }

    // With h > 0 the only possible repeated root is t* = d n0/(n0+1), the
    // nonzero critical point.
    let a = BigInt::from(n0 + 1);
    let b = &d * BigInt::from(n0);
    let tstar = BigRational::new(b.clone(), a.clone());
    let double = rational_poly_eval(&charpoly, &tstar).is_zero();

    let mut work = prec + 64;
    let max_work = 4 * prec + 256;
    loop {
        let attempt = if double {
            let rest = deflate_double(&charpoly, &a, &b);
            certified_roots(&rest, work).map(|rs| (rs, Some(big_from_rational(&tstar, work))))
        } else {
            let asc: Vec<BigInt> = charpoly.iter().rev().cloned().collect();
            certified_roots(&asc, work).map(|rs| (rs, None))
        };
        let bound = -(precision_bits as f64) / 2.0;
        if let Some((roots, exact)) = attempt {
            if roots.iter().all(|r| log2_abs(&r.radius) < bound) {
                return finish_report(spec, charpoly, roots, exact, precision_bits, work);
            }
        }
        if work >= max_work {
            return Err(SpecError::PrecisionExhausted(work));
        }
        work *= 2;
    }
}

fn finish_report(
    spec: &RecurrenceSpec,
    charpoly: Vec<BigInt>,
    roots: Vec<crate::numeric::CertifiedRoot>,
    exact_double: Option<Big>,
    precision_bits: usize,
    work: usize,
) -> Result<SpectralReport> {
    let prec = precision_bits;
    let mut listed: Vec<(Big, CBig, Big)> = roots.into_iter().map(|r| (r.z.abs(), r.z, r.radius)).collect();
    listed.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let (lambda, lambda_error, r, others): (Big, Big, usize, &[(Big, CBig, Big)]) = match &exact_double {
        Some(t) => (t.clone(), big_int(0, work), 2, &listed[..]),
        None => {
            let (m, z, rad) = &listed[0];
            // Must be real and positive: |Im| within the inclusion disc.
            if big_abs(&z.im) > *rad || z.re <= Big::ZERO {
                return Err(SpecError::DegenerateLambda { p1: spec.p_at_one() });
            }
            let _ = m;
            (z.re.clone(), rad.clone(), 1, &listed[1..])
        }
    };
    if lambda <= big_int(1, work) {
        return Err(SpecError::DegenerateLambda { p1: spec.p_at_one() });
    }

    // Other roots must be strictly inside |t| = lambda once the cluster
    // tolerance is accounted for.
    let cluster = -(precision_bits as f64) / 4.0;
    let mut r = r;
    let mut second = 0.0f64;
    for (m, _, _) in others {
        let gap = &lambda - m;
        if log2_abs(&gap) < cluster + log2_abs(&lambda) {
            r += 1;
        } else {
            second = second.max(to_f64(m));
        }
    }
    if r > 2 {
        return Err(SpecError::MultiplicityOutOfRange(r));
    }
    let lam_f = to_f64(&lambda);
    let mut all: Vec<(f64, f64)> = Vec::new();
    if exact_double.is_some() {
        all.push((lam_f, 0.0));
        all.push((lam_f, 0.0));
    }
    all.extend(listed.iter().map(|(_, z, _)| {
        let c = z.to_c64();
        (c.re, c.im)
    }));
    all.sort_by(|x, y| {
        let mx = x.0.hypot(x.1);
        let my = y.0.hypot(y.1);
        my.partial_cmp(&mx).unwrap()
    });

    let q_fit = analytic_q(spec, &lambda, r, work)
        .into_iter()
        .map(|q| q.with_precision(prec).value())
        .collect();
    Ok(SpectralReport {
        spec: *spec,
        charpoly,
        lambda: lambda.with_precision(prec).value(),
        lambda_error,
        r,
        rho: second / lam_f,
        roots: all,
        q_fit,
        precision_bits,
    })
}

/// Leading asymptotic coefficients from the pole of `1/q(x)`,
/// `q(x) = 1 - d x + h x^(n0+1)`, at `x = 1/lambda`.
fn analytic_q(spec: &RecurrenceSpec, lambda: &Big, r: usize, prec: usize) -> Vec<Big> {
    let d = big_int(spec.d as i64, prec);
    let h = big_int(spec.h as i64, prec);
    let n0 = spec.n0 as i64;
    let x0 = big_int(1, prec) / lambda;
    let x0_pow = |k: i64| -> Big {
        if k <= 0 {
            big_int(1, prec)
        } else {
            x0.powi(k.into())
        }
    };
    let m = n0 + 1;
    if r == 1 {
        // d_n ~ -lambda^n / (x0 q'(x0))
        let qp = &h * big_int(m, prec) * x0_pow(n0) - &d;
        return vec![-(big_int(1, prec) / (&x0 * qp))];
    }
    // q = q2 (x-x0)^2 + q3 (x-x0)^3 + ...
    let q2 = &h * big_int(m * (m - 1) / 2, prec) * x0_pow(m - 2);
    let q3 = &h * big_int(m * (m - 1) * (m - 2) / 6, prec) * x0_pow(m - 3);
    let a = big_int(1, prec) / &q2;
    let b = -(&q3 / (&q2 * &q2));
    let l2 = lambda * lambda;
    let slope = &a * &l2;
    let intercept = &a * &l2 - &b * lambda;
    vec![intercept, slope]
}

/// Result of comparing `d_n lambda^(-n)` with a fitted `Q(n)`.
#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    /// Relative residual `|d_n lambda^-n - Q(n)| / Q(n)` for `n = 0..`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Fitted `Q` coefficients (constant term first).
    pub q: Vec<f64>,
}

impl AsymptoticsReport {
    /// Checks `res[n+1] <= rho * res[n] * (1 + slack)` on `range`, skipping
    /// entries already at the noise floor.
    pub fn decays_like(&self, rho: f64, slack: f64, range: std::ops::Range<usize>, floor: f64) -> bool {
        range.into_iter().all(|n| {
            let (a, b) = (self.residuals[n], self.residuals[n + 1]);
            a < floor || b < floor || b <= rho * a * (1.0 + slack)
        })
    }
}

/// Scaled degrees `d_n lambda^-n` at the report's precision.
fn scaled_degrees(degrees: &[BigInt], lambda: &Big, prec: usize) -> Vec<Big> {
    let inv = big_int(1, prec) / lambda;
    let mut pw = big_int(1, prec);
    degrees
        .iter()
        .map(|dn| {
            let v = big_from_bigint(dn, prec) * &pw;
            pw = &pw * &inv;
            v
        })
        .collect()
}

/// Fits `Q` from the last `r` entries and reports relative residuals.
pub fn check_asymptotics(degrees: &[BigInt], report: &SpectralReport) -> Result<AsymptoticsReport> {
    if degrees.len() < 10 {
        return Err(SpecError::InsufficientData {
            needed: 10,
            got: degrees.len(),
        });
    }
    let prec = report.precision_bits.max(128) * 2;
    let lambda = report.lambda.clone().with_precision(prec).value();
    let s = scaled_degrees(degrees, &lambda, prec);
    let last = degrees.len() - 1;
    let q: Vec<Big> = if report.r == 1 {
        vec![s[last].clone()]
    } else {
        let slope = &s[last] - &s[last - 1];
        let intercept = &s[last] - &slope * big_int(last as i64, prec);
        vec![intercept, slope]
    };
    let residuals: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let mut qn = q[0].clone();
            if q.len() > 1 {
                qn += &q[1] * big_int(n as i64, prec);
            }
            to_f64(&(big_abs(&(v - &qn)) / big_abs(&qn)))
        })
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(AsymptoticsReport {
        residuals,
        max_residual,
        q: q.iter().map(to_f64).collect(),
    })
}

/// Smallest `C1, C2 >= 0` with `(d_{n+1} - lambda d_n)/d_n <= C1/n^2` for
/// `n >= 1` and `sum_{j<=n} d_j <= C2 d_n` over the given range.
pub fn check_growth_bounds(degrees: &[BigInt], lambda: &Big) -> Result<(f64, f64)> {
    if degrees.len() < 10 {
        return Err(SpecError::InsufficientData {
            needed: 10,
            got: degrees.len(),
        });
    }
    let prec = lambda.precision().max(128);
    let lam = lambda.clone().with_precision(prec).value();
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    let mut partial = BigInt::zero();
    for n in 0..degrees.len() {
        partial += &degrees[n];
        let ratio = BigRational::new(partial.clone(), degrees[n].clone());
        c2 = c2.max(ratio.to_f64().unwrap_or(f64::INFINITY));
        if n >= 1 && n + 1 < degrees.len() {
            let q = big_from_bigint(&degrees[n + 1], prec) / big_from_bigint(&degrees[n], prec);
            let excess = to_f64(&(q - &lam));
            let nn = n as f64;
            c1 = c1.max(excess * nn * nn);
        }
    }
    Ok((c1, c2))
}

/// `max_n |S_n| / lambda^n` for
/// `S_n = lambda^n + (d - lambda) sum_{j=1}^{n0} lambda^(j-1) d_{n-j} - d_n`.
pub fn check_sn_identity(spec: &RecurrenceSpec, lambda: &Big, degrees: &[BigInt], n_max: usize) -> f64 {
    let prec = lambda.precision().max(64);
    let lam = lambda.clone().with_precision(prec).value();
    let d = big_int(spec.d as i64, prec);
    let dm = &d - &lam;
    let dn: Vec<Big> = degrees.iter().map(|x| big_from_bigint(x, prec)).collect();
    let n0 = spec.n0 as usize;
    let mut worst = 0.0f64;
    let mut lam_n = big_int(1, prec);
    for n in 0..=n_max.min(degrees.len() - 1) {
        let mut sum = big_int(0, prec);
        let mut lam_j = big_int(1, prec);
        for j in 1..=n0 {
            if j <= n {
                sum += &lam_j * &dn[n - j];
            }
            lam_j = &lam_j * &lam;
        }
        let s = &lam_n + &dm * sum - &dn[n];
        let rel = to_f64(&(big_abs(&s) / &lam_n));
        worst = worst.max(rel);
        lam_n = &lam_n * &lam;
    }
    worst
}

/// `lambda` at double precision from the report's exact data, kept as a
/// convenience for numeric consumers.
pub fn lambda_of(spec: &RecurrenceSpec) -> Result<f64> {
    Ok(char_poly_roots(spec, 64)?.lambda_f64())
}
