//! Dense-recursive GCD over `Z/pZ` (Brown's algorithm) and its helpers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::monomial::Monomial;
use super::zpoly::ZPoly;

#[derive(Clone, Copy, Debug)]
pub struct Zp {
    pub p: u64,
}

impl Zp {
    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.p as u128) as u64
    }
    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }
    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }
    pub fn reduce(self, c: &BigInt) -> u64 {
        c.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let f = Zp { p: n };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below 2^62, in decreasing order.
pub fn large_primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while n > 3 {
            let c = n;
            n -= 2;
            if is_prime_u64(c) {
                return Some(c);
            }
        }
        None
    })
}

// ---------------------------------------------------------------------------
// Univariate polynomials, ascending coefficients, no trailing zeros.

pub type Uni = Vec<u64>;

fn trim(a: &mut Uni) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn uni_deg(a: &Uni) -> usize {
    a.len().saturating_sub(1)
}

pub fn uni_eval(f: Zp, a: &Uni, x: u64) -> u64 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

fn uni_mul(f: Zp, a: &Uni, b: &Uni) -> Uni {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

fn uni_divrem(f: Zp, a: &Uni, b: &Uni) -> (Uni, Uni) {
    assert!(!b.is_empty());
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let inv = f.inv(*b.last().unwrap());
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = f.mul(*r.last().unwrap(), inv);
        q[shift] = c;
        for (j, &y) in b.iter().enumerate() {
            r[shift + j] = f.sub(r[shift + j], f.mul(c, y));
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn uni_monic(f: Zp, a: &Uni) -> Uni {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => {
            let inv = f.inv(lc);
            a.iter().map(|&c| f.mul(c, inv)).collect()
        }
    }
}

fn uni_gcd(f: Zp, a: &Uni, b: &Uni) -> Uni {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let (_, r) = uni_divrem(f, &x, &y);
        x = y;
        y = r;
    }
    uni_monic(f, &x)
}

// ---------------------------------------------------------------------------
// Multivariate polynomials mod p: sparse, descending grlex.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPoly {
    pub nvars: usize,
    pub terms: Vec<(Monomial, u64)>,
}

impl PPoly {
    pub fn from_z(f: Zp, a: &ZPoly) -> PPoly {
        let terms = a
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f.reduce(c)))
            .filter(|(_, c)| *c != 0)
            .collect();
        PPoly { nvars: a.nvars, terms }
    }

    fn from_map(nvars: usize, map: BTreeMap<Monomial, u64>) -> PPoly {
        PPoly {
            nvars,
            terms: map.into_iter().rev().filter(|(_, c)| *c != 0).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    pub fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    pub fn monic(&self, f: Zp) -> PPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = f.inv(self.terms[0].1);
        self.scale(f, inv)
    }

    pub fn scale(&self, f: Zp, k: u64) -> PPoly {
        PPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f.mul(*c, k)))
                .filter(|(_, c)| *c != 0)
                .collect(),
        }
    }

    fn mul_term(&self, f: Zp, m: &Monomial, c: u64) -> PPoly {
        PPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(mm, cc)| (mm.mul(m), f.mul(*cc, c))).collect(),
        }
    }

    /// Exact division test; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, f: Zp, divisor: &PPoly) -> Option<PPoly> {
        let (lmb, lcb) = (&divisor.terms[0].0, divisor.terms[0].1);
        let inv = f.inv(lcb);
        let mut rem: BTreeMap<Monomial, u64> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            if !lmb.divides(&m) {
                return None;
            }
            let qc = f.mul(c, inv);
            let qm = lmb.div_into(&m);
            for (bm, bc) in &divisor.terms[1..] {
                let key = qm.mul(bm);
                let delta = f.mul(qc, *bc);
                let e = rem.entry(key.clone()).or_insert(0);
                *e = f.sub(*e, delta);
                if *e == 0 {
                    rem.remove(&key);
                }
            }
            quot.push((qm, qc));
        }
        Some(PPoly {
            nvars: self.nvars,
            terms: quot,
        })
    }

    /// Views the polynomial as one in the first `nvars - 1` variables with
    /// coefficients in `Z_p[x_last]`.
    fn group_last(&self) -> BTreeMap<Monomial, Uni> {
        let mut out: BTreeMap<Monomial, Uni> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.last() as usize;
            let entry = out.entry(m.truncate_last()).or_default();
            if entry.len() <= e {
                entry.resize(e + 1, 0);
            }
            entry[e] = *c;
        }
        out
    }

    fn ungroup_last(nvars: usize, g: &BTreeMap<Monomial, Uni>) -> PPoly {
        let mut map = BTreeMap::new();
        for (m, u) in g {
            for (i, &c) in u.iter().enumerate() {
                if c != 0 {
                    map.insert(m.push(i as u32), c);
                }
            }
        }
        PPoly::from_map(nvars, map)
    }

    fn to_uni(&self) -> Uni {
        let mut out = vec![0u64; self.terms.first().map_or(0, |t| t.0.exps()[0] as usize + 1)];
        for (m, c) in &self.terms {
            out[m.exps()[0] as usize] = *c;
        }
        trim(&mut out);
        out
    }

    fn from_uni(u: &Uni) -> PPoly {
        let mut terms: Vec<_> = u
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, &c)| (Monomial::new(&[i as u32]), c))
            .collect();
        terms.reverse();
        PPoly { nvars: 1, terms }
    }
}

fn grouped_eval(f: Zp, g: &BTreeMap<Monomial, Uni>, nvars: usize, x: u64) -> PPoly {
    let map = g.iter().map(|(m, u)| (m.clone(), uni_eval(f, u, x))).collect();
    PPoly::from_map(nvars, map)
}

/// Monic GCD of `a` and `b` in `Z_p[x_1..x_n]`, or `None` if evaluation
/// points ran out (never expected for primes near 2^62).
pub fn pgcd(f: Zp, a: &PPoly, b: &PPoly) -> Option<PPoly> {
    if a.is_zero() {
        return Some(b.monic(f));
    }
    if b.is_zero() {
        return Some(a.monic(f));
    }
    let nv = a.nvars;
    if nv == 1 {
        return Some(PPoly::from_uni(&uni_gcd(f, &a.to_uni(), &b.to_uni())));
    }
    let mut ga = a.group_last();
    let mut gb = b.group_last();
    let cont = |g: &BTreeMap<Monomial, Uni>| {
        g.values().fold(
            Vec::new(),
            |acc: Uni, u| if acc.len() == 1 { acc } else { uni_gcd(f, &acc, u) },
        )
    };
    let ca = cont(&ga);
    let cb = cont(&gb);
    let c = uni_gcd(f, &ca, &cb);
    for u in ga.values_mut() {
        *u = uni_divrem(f, u, &ca).0;
    }
    for u in gb.values_mut() {
        *u = uni_divrem(f, u, &cb).0;
    }
    let lca = ga.last_key_value().unwrap().1.clone();
    let lcb = gb.last_key_value().unwrap().1.clone();
    let g = uni_gcd(f, &lca, &lcb);
    let max_deg = |gr: &BTreeMap<Monomial, Uni>| gr.values().map(uni_deg).max().unwrap_or(0);
    let limit = max_deg(&ga).min(max_deg(&gb)) + uni_deg(&g);
    let pa = PPoly::ungroup_last(nv, &ga);
    let pb = PPoly::ungroup_last(nv, &gb);
    let c_poly = |x: &Uni| {
        let map = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, &v)| {
                let mut m = Monomial::one(nv);
                m.exps_mut()[nv - 1] = i as u32;
                (m, v)
            })
            .collect();
        PPoly::from_map(nv, map)
    };

    let mut interp: Option<(BTreeMap<Monomial, Uni>, Monomial)> = None;
    let mut q: Uni = vec![1];
    let mut count = 0usize;
    let mut alpha = 0u64;
    let mut failures = 0usize;
    while alpha < f.p - 1 {
        alpha += 1;
        let g_at = uni_eval(f, &g, alpha);
        if g_at == 0 || uni_eval(f, &lca, alpha) == 0 || uni_eval(f, &lcb, alpha) == 0 {
            continue;
        }
        let a_at = grouped_eval(f, &ga, nv - 1, alpha);
        let b_at = grouped_eval(f, &gb, nv - 1, alpha);
        let c_at = pgcd(f, &a_at, &b_at)?;
        if c_at.is_constant() {
            // Images coprime, so the primitive parts are coprime.
            return Some(c_poly(&c).monic(f));
        }
        let c_at = c_at.scale(f, g_at);
        let lm_at = c_at.lm().clone();
        match &mut interp {
            Some((_, lm)) if lm_at > *lm => continue,
            Some((acc, lm)) if lm_at == *lm => {
                // Newton step: acc += (v - acc(alpha)) * q / q(alpha).
                let q_at_inv = f.inv(uni_eval(f, &q, alpha));
                let vals: BTreeMap<Monomial, u64> = c_at.terms.iter().cloned().collect();
                let keys: Vec<Monomial> = acc.keys().cloned().chain(vals.keys().cloned()).collect();
                for k in keys {
                    let cur = acc.get(&k).map_or(0, |u| uni_eval(f, u, alpha));
                    let target = vals.get(&k).copied().unwrap_or(0);
                    let delta = f.mul(f.sub(target, cur), q_at_inv);
                    if delta != 0 {
                        let upd: Uni = q.iter().map(|&x| f.mul(x, delta)).collect();
                        let e = acc.entry(k).or_default();
                        if e.len() < upd.len() {
                            e.resize(upd.len(), 0);
                        }
                        for (i, v) in upd.into_iter().enumerate() {
                            e[i] = f.add(e[i], v);
                        }
                        trim(e);
                    }
                }
                acc.retain(|_, u| !u.is_empty());
            }
            _ => {
                // First point, or all earlier points were unlucky.
                let acc = c_at.terms.iter().map(|(m, v)| (m.clone(), vec![*v])).collect();
                interp = Some((acc, lm_at));
                q = vec![1];
                count = 0;
            }
        }
        q = uni_mul(f, &q, &vec![f.neg(alpha), 1]);
        count += 1;
        if count > limit {
            let (acc, _) = interp.as_ref().unwrap();
            let cc = cont(acc);
            let prim: BTreeMap<Monomial, Uni> = acc.iter().map(|(m, u)| (m.clone(), uni_divrem(f, u, &cc).0)).collect();
            let cand = PPoly::ungroup_last(nv, &prim);
            if pa.div_exact(f, &cand).is_some() && pb.div_exact(f, &cand).is_some() {
                let full = ppoly_mul(f, &cand, &c_poly(&c));
                return Some(full.monic(f));
            }
            failures += 1;
            if failures > 3 {
                return None;
            }
            interp = None;
        }
    }
    None
}

fn ppoly_mul(f: Zp, a: &PPoly, b: &PPoly) -> PPoly {
    let mut map: BTreeMap<Monomial, u64> = BTreeMap::new();
    for (m, c) in &b.terms {
        for (mm, cc) in a.mul_term(f, m, *c).terms {
            let e = map.entry(mm).or_insert(0);
            *e = f.add(*e, cc);
        }
    }
    PPoly::from_map(a.nvars, map)
}

/// Lifts a polynomial mod `p` to the symmetric range `(-p/2, p/2]`.
pub fn symmetric_lift(f: Zp, a: &PPoly) -> ZPoly {
    let half = f.p / 2;
    let terms = a.terms.iter().map(|(m, c)| {
        let c = *c;
        let v = if c > half {
            BigInt::from(c) - BigInt::from(f.p)
        } else {
            BigInt::from(c)
        };
        (m.clone(), v)
    });
    ZPoly::from_terms(a.nvars, terms)
}

/// Chinese remaindering of `acc (mod m)` with `img (mod p)`, symmetric range.
pub fn crt_combine(acc: &ZPoly, m: &BigInt, f: Zp, img: &PPoly) -> ZPoly {
    let p = BigInt::from(f.p);
    let m_mod_p = f.reduce(m);
    let m_inv = f.inv(m_mod_p);
    let new_m = m * &p;
    let half = &new_m / 2;
    let acc_map: BTreeMap<&Monomial, &BigInt> = acc.terms.iter().map(|(a, b)| (a, b)).collect();
    let img_map: BTreeMap<&Monomial, u64> = img.terms.iter().map(|(a, b)| (a, *b)).collect();
    let mut keys: Vec<&Monomial> = acc_map.keys().copied().chain(img_map.keys().copied()).collect();
    keys.sort();
    keys.dedup();
    let zero = BigInt::zero();
    let terms = keys.into_iter().filter_map(|k| {
        let a = acc_map.get(k).copied().unwrap_or(&zero);
        let v = img_map.get(k).copied().unwrap_or(0);
        // x = a + m * ((v - a) * m^{-1} mod p)
        let t = f.mul(f.sub(v, f.reduce(a)), m_inv);
        let mut x = a + m * BigInt::from(t);
        x = x.mod_floor(&new_m);
        if x > half {
            x -= &new_m;
        }
        (!x.is_zero()).then(|| (k.clone(), x))
    });
    ZPoly::from_terms(acc.nvars, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_prime_and_large() {
        let ps: Vec<u64> = large_primes().take(3).collect();
        assert_eq!(ps.len(), 3);
        for p in ps {
            assert!(p > (1u64 << 61));
            assert!(is_prime_u64(p));
        }
        assert!(!is_prime_u64(561));
        assert!(is_prime_u64(1_000_000_007));
    }

    #[test]
    fn univariate_gcd_mod_p() {
        let f = Zp { p: 101 };
        // (x-1)(x-2) and (x-1)(x-3)
        let a = vec![2, f.neg(3), 1];
        let b = vec![3, f.neg(4), 1];
        assert_eq!(uni_gcd(f, &a, &b), vec![f.neg(1), 1]);
    }
}
