mod common;

use common::polygen::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn gcd_exact_div_roundtrip((a, b, g) in gcd_case()) {
        check_gcd_roundtrip(&a, &b, &g)?;
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn print_parse_roundtrip(f in hom_poly(3, 6, 8), names in names()) {
        check_parse_roundtrip(&f, &names)?;
    }

    #[test]
    fn euler_identity(f in hom_poly(3, 6, 8)) {
        check_euler(&f)?;
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn evaluation_is_a_ring_homomorphism((a, b, c, p) in ring_case()) {
        check_ring_laws(&a, &b, &c, &p)?;
    }

    #[test]
    fn modular_and_prs_gcd_agree((a, b, g) in gcd_case()) {
        let x = a.mul(&g).unwrap();
        let y = b.mul(&g).unwrap();
        prop_assert_eq!(x.gcd(&y).unwrap(), x.gcd_prs(&y).unwrap());
    }

    #[test]
    fn primitive_form_reconstructs(f in nonzero_hom_poly(3, 4, 6)) {
        let pf = f.primitive_form();
        prop_assert_eq!(pf.primitive.scale(&pf.content), f);
        let lc = pf.primitive.leading_coeff().unwrap();
        prop_assert!(lc.is_integer() && *lc.numer() > 0.into());
    }
}
