//! Multivariate GCD over the integers.
//!
//! Two independent routes are provided:
//!
//! * [`gcd_modular`]: Brown's dense modular algorithm (multi-prime CRT over
//!   a recursive evaluation/interpolation GCD mod p). Fast; its answer is
//!   only accepted after trial division over `Z`.
//! * [`gcd_prs`]: recursive primitive pseudo-remainder sequences in the last
//!   variable. Slow on large inputs, but it never guesses.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::modp::{crt_combine, large_primes, pgcd, symmetric_lift, PPoly, Zp};
use super::monomial::Monomial;
use super::zpoly::ZPoly;

/// Upper bound on primes consumed by one modular GCD before giving up.
const MAX_PRIMES: usize = 400;

fn sign_normalize(mut p: ZPoly) -> ZPoly {
    if !p.is_zero() && p.lc().is_negative() {
        p = p.neg();
    }
    p
}

/// Modular GCD of two integer polynomials. Returns `None` if the prime
/// budget is exhausted; the result (when present) has been verified to
/// divide both inputs.
pub fn gcd_modular(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
    if a.is_zero() {
        return Some(sign_normalize(b.primitive()).scale(&b.content()));
    }
    if b.is_zero() {
        return Some(sign_normalize(a.primitive()).scale(&a.content()));
    }
    let ca = a.content();
    let cb = b.content();
    let c = ca.gcd(&cb);
    let a = a.div_scalar(&ca);
    let b = b.div_scalar(&cb);
    if a.is_constant() || b.is_constant() {
        return Some(ZPoly::constant(a.nvars, c));
    }
    let g = a.lc().gcd(b.lc());
    let nv = a.nvars;

    let mut acc: Option<(ZPoly, BigInt, Monomial)> = None;
    for p in large_primes().take(MAX_PRIMES) {
        let f = Zp { p };
        let pbig = BigInt::from(p);
        if (a.lc() % &pbig).is_zero() || (b.lc() % &pbig).is_zero() {
            continue;
        }
        let ap = PPoly::from_z(f, &a);
        let bp = PPoly::from_z(f, &b);
        let cp = pgcd(f, &ap, &bp)?;
        if cp.is_constant() {
            return Some(ZPoly::constant(nv, c));
        }
        let cp = cp.scale(f, f.reduce(&g));
        let lm = cp.lm().clone();
        match &acc {
            Some((_, _, cur_lm)) if lm > *cur_lm => continue,
            Some((h, m, cur_lm)) if lm == *cur_lm => {
                let h_new = crt_combine(h, m, f, &cp);
                let m_new = m * &pbig;
                if h_new == *h {
                    let cand = sign_normalize(h_new.primitive());
                    if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                        return Some(cand.scale(&c));
                    }
                }
                acc = Some((h_new, m_new, lm));
            }
            _ => {
                acc = Some((symmetric_lift(f, &cp), pbig, lm));
            }
        }
    }
    None
}

fn content_multi(polys: &[ZPoly], nvars: usize) -> ZPoly {
    let mut g = ZPoly::zero(nvars);
    for p in polys {
        if p.is_zero() {
            continue;
        }
        g = gcd_prs(&g, p);
        if g.is_constant() && g.lc().is_one() {
            break;
        }
    }
    g
}

/// Pseudo-remainder of univariate polynomials whose coefficients live in
/// `Z[x_1..x_{n-1}]` (ascending order of the main variable).
fn prem(a: &[ZPoly], b: &[ZPoly]) -> Vec<ZPoly> {
    let nv = b[0].nvars;
    let db = b.len() - 1;
    let lcb = &b[db];
    let mut r: Vec<ZPoly> = a.to_vec();
    let mut steps = a.len() as i64 - b.len() as i64 + 1;
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lcr = r[dr].clone();
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for (j, bc) in b.iter().enumerate() {
            let idx = dr - db + j;
            r[idx] = r[idx].sub(&bc.mul(&lcr));
        }
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
        steps -= 1;
    }
    // Pad to the full lc(b)^(deg a - deg b + 1) multiplier.
    if steps > 0 {
        let mut k = ZPoly::constant(nv, BigInt::one());
        for _ in 0..steps {
            k = k.mul(lcb);
        }
        for c in r.iter_mut() {
            *c = c.mul(&k);
        }
    }
    r
}

/// GCD by recursive primitive PRS in the last variable.
pub fn gcd_prs(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let nv = a.nvars;
    if a.is_zero() {
        return sign_normalize(b.clone());
    }
    if b.is_zero() {
        return sign_normalize(a.clone());
    }
    if nv == 0 {
        return ZPoly::constant(0, a.lc().gcd(b.lc()));
    }
    let ua = a.to_univariate_last();
    let ub = b.to_univariate_last();
    let ca = content_multi(&ua, nv - 1);
    let cb = content_multi(&ub, nv - 1);
    let c = gcd_prs(&ca, &cb);
    let divide = |u: &[ZPoly], k: &ZPoly| -> Vec<ZPoly> {
        u.iter()
            .map(|x| x.div_exact(k).expect("content divides coefficients"))
            .collect()
    };
    let mut pa = divide(&ua, &ca);
    let mut pb = divide(&ub, &cb);
    if pa.len() < pb.len() {
        std::mem::swap(&mut pa, &mut pb);
    }
    while !pb.is_empty() {
        if pb.len() == 1 {
            // Nonzero constant in the main variable: primitive parts coprime.
            pa = vec![ZPoly::constant(nv - 1, BigInt::one())];
            break;
        }
        let r = prem(&pa, &pb);
        pa = pb;
        if r.is_empty() {
            break;
        }
        let cr = content_multi(&r, nv - 1);
        pb = divide(&r, &cr);
    }
    let result = ZPoly::from_univariate_last(nv, &pa);
    let lifted_c = ZPoly::from_univariate_last(nv, &[c]);
    sign_normalize(result.primitive().mul(&lifted_c))
}

/// GCD of integer polynomials: modular route first, PRS if it gives up.
pub fn gcd_z(a: &ZPoly, b: &ZPoly) -> ZPoly {
    match gcd_modular(a, b) {
        Some(g) => g,
        None => gcd_prs(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(nv: usize, terms: &[(&[u32], i64)]) -> ZPoly {
        ZPoly::from_terms(nv, terms.iter().map(|(e, c)| (Monomial::new(e), BigInt::from(*c))))
    }

    #[test]
    fn both_routes_agree_on_small_case() {
        // a = (x - y)(x + 2y + 1), b = (x - y)(3x - 1)
        let common = p(2, &[(&[1, 0], 1), (&[0, 1], -1)]);
        let a = common.mul(&p(2, &[(&[1, 0], 1), (&[0, 1], 2), (&[0, 0], 1)]));
        let b = common.mul(&p(2, &[(&[1, 0], 3), (&[0, 0], -1)]));
        assert_eq!(gcd_modular(&a, &b).unwrap(), common);
        assert_eq!(gcd_prs(&a, &b), common);
    }

    #[test]
    fn integer_content_kept() {
        let a = p(1, &[(&[1], 4), (&[0], 6)]);
        let b = p(1, &[(&[1], 6), (&[0], 9)]);
        let expect = p(1, &[(&[1], 2), (&[0], 3)]);
        assert_eq!(gcd_modular(&a, &b).unwrap(), expect);
        assert_eq!(gcd_prs(&a, &b), expect);
    }

    #[test]
    fn coprime_gives_constant() {
        let a = p(2, &[(&[2, 0], 1), (&[0, 1], 1)]);
        let b = p(2, &[(&[1, 1], 1), (&[0, 0], 1)]);
        assert!(gcd_modular(&a, &b).unwrap().is_constant());
        assert!(gcd_prs(&a, &b).is_constant());
    }
}
