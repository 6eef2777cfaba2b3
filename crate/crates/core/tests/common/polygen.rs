//! Random homogeneous polynomials and the polycore properties checked on
//! them. Shared by the property suites and the acceptance run.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use qasmap::polycore::{parse_poly, HomPoly, Monomial, VarNames};

pub fn small_rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=5).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    small_rational().prop_filter("nonzero", |q| !q.is_zero())
}

/// Exponent vector of total degree `deg` from `nvars - 1` cut points.
pub fn monomial(nvars: usize, deg: u32) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0..=deg, nvars - 1).prop_map(move |mut cuts| {
        cuts.sort_unstable();
        let mut exps = Vec::with_capacity(nvars);
        let mut prev = 0;
        for c in cuts {
            exps.push(c - prev);
            prev = c;
        }
        exps.push(deg - prev);
        Monomial::new(&exps)
    })
}

pub fn hom_poly_of_degree(nvars: usize, deg: u32, max_terms: usize) -> impl Strategy<Value = HomPoly> {
    prop::collection::vec((monomial(nvars, deg), small_rational()), 1..=max_terms)
        .prop_map(move |terms| HomPoly::from_terms(nvars, terms).expect("homogeneous by construction"))
}

pub fn hom_poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = HomPoly> {
    (0..=max_deg).prop_flat_map(move |d| hom_poly_of_degree(nvars, d, max_terms))
}

pub fn nonzero_hom_poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = HomPoly> {
    hom_poly(nvars, max_deg, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

pub fn point(nvars: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(small_rational(), nvars)
}

/// Cofactors and a common factor, in 2 or 3 variables.
pub fn gcd_case() -> impl Strategy<Value = (HomPoly, HomPoly, HomPoly)> {
    (2usize..=3).prop_flat_map(|n| {
        (
            nonzero_hom_poly(n, 3, 4),
            nonzero_hom_poly(n, 3, 4),
            nonzero_hom_poly(n, 3, 4),
        )
    })
}

/// Two polynomials of one degree, a third of any degree, and a point.
pub fn ring_case() -> impl Strategy<Value = (HomPoly, HomPoly, HomPoly, Vec<BigRational>)> {
    (0u32..=4).prop_flat_map(|d| {
        (
            hom_poly_of_degree(3, d, 5),
            hom_poly_of_degree(3, d, 5),
            hom_poly(3, 3, 5),
            point(3),
        )
    })
}

pub fn names() -> impl Strategy<Value = VarNames> {
    prop_oneof![
        Just(VarNames::zwt()),
        Just(VarNames::new(&["x", "y", "u"]).unwrap()),
        Just(VarNames::new(&["a1", "b_2", "c3"]).unwrap()),
    ]
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// `gcd(a g, b g)` divides both products exactly and is divisible by `g`.
pub fn check_gcd_roundtrip(a: &HomPoly, b: &HomPoly, g: &HomPoly) -> Result<(), TestCaseError> {
    let x = a.mul(g).map_err(|e| fail(e.to_string()))?;
    let y = b.mul(g).map_err(|e| fail(e.to_string()))?;
    let d = x.gcd(&y).map_err(|e| fail(format!("gcd({x}, {y}): {e}")))?;
    let qx = x.exact_div(&d).map_err(|e| fail(format!("{x} / {d}: {e}")))?;
    let qy = y.exact_div(&d).map_err(|e| fail(format!("{y} / {d}: {e}")))?;
    prop_assert_eq!(qx.mul(&d).unwrap(), x.clone());
    prop_assert_eq!(qy.mul(&d).unwrap(), y.clone());
    d.exact_div(g)
        .map_err(|e| fail(format!("common factor {g} does not divide gcd {d}: {e}")))?;
    prop_assert_eq!(&d, &d.primitive());
    Ok(())
}

/// Evaluation is a ring homomorphism and composition evaluates pointwise.
pub fn check_ring_laws(a: &HomPoly, b: &HomPoly, c: &HomPoly, p: &[BigRational]) -> Result<(), TestCaseError> {
    let ev = |f: &HomPoly| f.eval_rational(p).unwrap();
    let (ea, eb, ec) = (ev(a), ev(b), ev(c));
    prop_assert_eq!(ev(&a.add(b).unwrap()), &ea + &eb);
    prop_assert_eq!(ev(&a.sub(b).unwrap()), &ea - &eb);
    prop_assert_eq!(ev(&a.mul(c).unwrap()), &ea * &ec);
    prop_assert_eq!(ev(&a.pow(2).unwrap()), &ea * &ea);
    // Distributivity and commutativity hold symbolically as well.
    let lhs = a.add(b).unwrap().mul(c).unwrap();
    let rhs = a.mul(c).unwrap().add(&b.mul(c).unwrap()).unwrap();
    prop_assert_eq!(&lhs, &rhs);
    prop_assert_eq!(a.mul(c).unwrap(), c.mul(a).unwrap());
    // Composition with (a, b, a + b) evaluates through the inner values.
    let inner = [a.clone(), b.clone(), a.add(b).unwrap()];
    let comp = c.compose(&inner).map_err(|e| fail(e.to_string()))?;
    let vals = [ea.clone(), eb.clone(), &ea + &eb];
    prop_assert_eq!(ev(&comp), c.eval_rational(&vals).unwrap());
    Ok(())
}

/// Printing then parsing gives back the same polynomial.
pub fn check_parse_roundtrip(f: &HomPoly, names: &VarNames) -> Result<(), TestCaseError> {
    let text = f.to_string_with(names);
    let back = parse_poly(&text, names).map_err(|e| fail(format!("`{text}`: {e}")))?;
    prop_assert_eq!(&back, f, "printed as `{}`", text);
    Ok(())
}

/// `sum x_i df/dx_i = deg(f) f`.
pub fn check_euler(f: &HomPoly) -> Result<(), TestCaseError> {
    if f.is_zero() {
        return Ok(());
    }
    let n = f.nvars();
    let mut sum = HomPoly::zero(n);
    for i in 0..n {
        let term = HomPoly::var(n, i).mul(&f.partial(i).unwrap()).unwrap();
        sum = sum.add(&term).unwrap();
    }
    let deg = BigRational::from_integer(BigInt::from(f.degree().unwrap()));
    prop_assert_eq!(sum, f.scale(&deg));
    Ok(())
}
