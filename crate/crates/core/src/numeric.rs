//! Arbitrary-precision real/complex helpers and a certified univariate root
//! finder.

use dashu_float::ops::Abs;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Binary floating point number with per-value precision.
pub type Big = FBig<HalfEven, 2>;

pub fn big_int(x: i64, prec: usize) -> Big {
    Big::from(x).with_precision(prec).value()
}

pub fn ibig(x: &BigInt) -> IBig {
    let (sign, bytes) = x.to_bytes_le();
    let mag = IBig::from(UBig::from_le_bytes(&bytes));
    if sign == Sign::Minus {
        -mag
    } else {
        mag
    }
}

pub fn big_from_bigint(x: &BigInt, prec: usize) -> Big {
    Big::from(ibig(x)).with_precision(prec).value()
}

pub fn big_from_rational(x: &BigRational, prec: usize) -> Big {
    big_from_bigint(x.numer(), prec) / big_from_bigint(x.denom(), prec)
}

pub fn big_from_f64(x: f64, prec: usize) -> Big {
    Big::try_from(x).expect("finite float").with_precision(prec).value()
}

pub fn to_f64(x: &Big) -> f64 {
    x.to_f64().value()
}

pub fn big_abs(x: &Big) -> Big {
    x.clone().abs()
}

/// Decimal rendering with `digits` significant digits.
pub fn decimal_string(x: &Big, digits: usize) -> String {
    let d = x.clone().with_base::<10>().value();
    d.with_precision(digits).value().to_string()
}

/// Base-2 logarithm of |x| as a float, `-inf` for zero. Works far outside
/// the f64 exponent range.
pub fn log2_abs(x: &Big) -> f64 {
    if *x == Big::ZERO {
        return f64::NEG_INFINITY;
    }
    let repr = x.repr();
    let sig = repr.significand().to_f64().value().abs();
    sig.log2() + repr.exponent() as f64
}

/// Complex number with [`Big`] parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CBig {
    pub re: Big,
    pub im: Big,
}

impl CBig {
    pub fn new(re: Big, im: Big) -> Self {
        CBig { re, im }
    }

    pub fn zero(prec: usize) -> Self {
        CBig::new(big_int(0, prec), big_int(0, prec))
    }

    pub fn real(re: Big, prec: usize) -> Self {
        CBig::new(re, big_int(0, prec))
    }

    pub fn from_c64(z: Complex64, prec: usize) -> Self {
        CBig::new(big_from_f64(z.re, prec), big_from_f64(z.im, prec))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    pub fn add(&self, o: &CBig) -> CBig {
        CBig::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &CBig) -> CBig {
        CBig::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &CBig) -> CBig {
        CBig::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    pub fn scale(&self, k: &Big) -> CBig {
        CBig::new(&self.re * k, &self.im * k)
    }

    pub fn norm_sq(&self) -> Big {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Big {
        self.norm_sq().sqrt()
    }

    pub fn div(&self, o: &CBig) -> CBig {
        let n = o.norm_sq();
        CBig::new(
            (&self.re * &o.re + &self.im * &o.im) / &n,
            (&self.im * &o.re - &self.re * &o.im) / &n,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re == Big::ZERO && self.im == Big::ZERO
    }
}

/// Horner evaluation of `p` (ascending coefficients) and its derivative.
fn eval_with_derivative(coeffs: &[Big], z: &CBig, prec: usize) -> (CBig, CBig) {
    let mut p = CBig::zero(prec);
    let mut dp = CBig::zero(prec);
    for c in coeffs.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z);
        p.re += c;
    }
    (p, dp)
}

/// All roots of a polynomial with f64 coefficients (ascending) by Aberth
/// iteration.
pub fn aberth_f64(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lc = coeffs[n];
    // Cauchy-type bound for the starting circle.
    let bound = 1.0 + coeffs[..n].iter().map(|c| (c / lc).abs()).fold(0.0f64, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(bound * 0.5, theta)
        })
        .collect();
    for _ in 0..800 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for c in coeffs.iter().rev() {
                dp = dp * z[i] + p;
                p = p * z[i] + c;
            }
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

/// A root together with a radius `r` such that the closed disc of radius
/// `r` around it contains exactly one root of the polynomial.
#[derive(Clone, Debug)]
pub struct CertifiedRoot {
    pub z: CBig,
    pub radius: Big,
}

/// Certified roots of a squarefree integer polynomial (ascending
/// coefficients) at working precision `prec`. Returns `None` when the
/// inclusion discs cannot be separated at this precision.
pub fn certified_roots(coeffs: &[BigInt], prec: usize) -> Option<Vec<CertifiedRoot>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let f64c: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect();
    if f64c.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let start = aberth_f64(&f64c);
    let bc: Vec<Big> = coeffs.iter().map(|c| big_from_bigint(c, prec)).collect();
    let mut z: Vec<CBig> = start.iter().map(|&s| CBig::from_c64(s, prec)).collect();
    let one = CBig::real(big_int(1, prec), prec);
    let tol = log2_tol(prec);
    for _ in 0..200 {
        let mut converged = true;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(&bc, &z[i], prec);
            if p.is_zero() {
                continue;
            }
            if dp.is_zero() {
                return None;
            }
            let ratio = p.div(&dp);
            let mut s = CBig::zero(prec);
            for j in 0..n {
                if j != i {
                    s = s.add(&one.div(&z[i].sub(&z[j])));
                }
            }
            let step = ratio.div(&one.sub(&ratio.mul(&s)));
            let scale = log2_abs(&z[i].abs()).max(0.0);
            if log2_abs(&step.abs()) > tol + scale {
                converged = false;
            }
            z[i] = z[i].sub(&step);
        }
        if converged {
            break;
        }
    }
    // Weierstrass corrections and inclusion radii n*|W_i|.
    let lc = CBig::real(bc[n].clone(), prec);
    let nb = big_int(n as i64, prec);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (p, _) = eval_with_derivative(&bc, &z[i], prec);
        let mut denom = lc.clone();
        for j in 0..n {
            if j != i {
                denom = denom.mul(&z[i].sub(&z[j]));
            }
        }
        if denom.is_zero() {
            return None;
        }
        let w = p.div(&denom);
        out.push(CertifiedRoot {
            z: z[i].clone(),
            radius: &nb * w.abs(),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let dist = out[i].z.sub(&out[j].z).abs();
            if dist <= &out[i].radius + &out[j].radius {
                return None;
            }
        }
    }
    Some(out)
}

fn log2_tol(prec: usize) -> f64 {
    -(prec as f64) + 8.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_square() {
        // t^2 - 3t + 1
        let c = [BigInt::from(1), BigInt::from(-3), BigInt::from(1)];
        let roots = certified_roots(&c, 256).unwrap();
        let prec = 256;
        let five = big_int(5, prec).sqrt();
        let lam = (big_int(3, prec) + five) / big_int(2, prec);
        let best = roots
            .iter()
            .map(|r| r.z.sub(&CBig::real(lam.clone(), prec)).abs())
            .map(|d| log2_abs(&d))
            .fold(f64::INFINITY, f64::min);
        assert!(best < -200.0, "{best}");
        for r in &roots {
            assert!(log2_abs(&r.radius) < -128.0);
        }
    }

    #[test]
    fn complex_pair() {
        // t^2 - 2t + 2 = (t - 1 - i)(t - 1 + i)
        let c = [BigInt::from(2), BigInt::from(-2), BigInt::from(1)];
        let roots = certified_roots(&c, 128).unwrap();
        for r in roots {
            let z = r.z.to_c64();
            assert!((z.re - 1.0).abs() < 1e-15 && (z.im.abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn conversions() {
        let x = BigInt::parse_bytes(b"-123456789012345678901234567890", 10).unwrap();
        let b = big_from_bigint(&x, 200);
        assert!((to_f64(&b) + 1.2345678901234568e29).abs() < 1e14);
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!((to_f64(&big_from_rational(&q, 100)) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(decimal_string(&big_int(7, 64), 5), "7");
        assert!((log2_abs(&big_int(1024, 64)) - 10.0).abs() < 1e-12);
    }
}
