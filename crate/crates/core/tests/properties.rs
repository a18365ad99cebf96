use proptest::prelude::*;

use relhyp::bounds::{compute_k, BoundExpression};
use relhyp::filling::{self, Budget};
use relhyp::presentation::extract_omega;
use relhyp::words::{self, cyclic_shift, is_cyclically_reduced, is_reduced};
use relhyp::{bundled, parse_presentation, Word};

fn word_over(name: &'static str, max: usize) -> impl Strategy<Value = Word> {
    let alphabet = bundled::by_name(name).unwrap().alphabet().unwrap();
    prop::collection::vec(prop::sample::select(alphabet), 0..=max).prop_map(Word::from_letters)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduction_is_a_normal_form(w in word_over("d4", 10)) {
        let b = bundled::backend("d4");
        let p = b.presentation();
        let r = words::reduce(&w, p).unwrap();
        prop_assert!(is_reduced(&r));
        prop_assert_eq!(&words::reduce(&r, p).unwrap(), &r);
        prop_assert_eq!(b.evaluate(&r).unwrap(), b.evaluate(&w).unwrap());
        let inv = words::inverse(&w, p).unwrap();
        prop_assert!(b.is_trivial(&w.concat(&inv)).unwrap());
        prop_assert_eq!(words::inverse(&inv, p).unwrap(), w);
    }

    #[test]
    fn cyclically_reduced_powers_stay_reduced(w in word_over("s4cox", 8)) {
        let p = bundled::s4cox();
        let r = words::reduce(&w, &p).unwrap();
        if is_cyclically_reduced(&r) {
            for k in 1..=4 {
                prop_assert!(is_reduced(&r.power(k)));
            }
        }
    }

    #[test]
    fn cyclic_shifts_are_conjugate(w in word_over("s3", 8), k in 0usize..16) {
        let b = bundled::backend("s3");
        let s = cyclic_shift(&w, k);
        prop_assert_eq!(s.len(), w.len());
        prop_assert_eq!(b.order(&b.evaluate(&s).unwrap()).unwrap(), b.order(&b.evaluate(&w).unwrap()).unwrap());
        if !w.is_empty() {
            prop_assert_eq!(cyclic_shift(&w, w.len()), w);
        }
    }

    #[test]
    fn relative_length_is_symmetric_and_bounded(w in word_over("z2z3", 10)) {
        let b = bundled::backend("z2z3");
        let p = b.presentation();
        let g = b.evaluate(&w).unwrap();
        let len = b.relative_length(&g).unwrap();
        prop_assert!(len.exact);
        prop_assert!(len.value <= w.len());
        // normal forms of a free product are geodesic
        prop_assert_eq!(len.value, words::reduce(&w, p).unwrap().len());
        prop_assert_eq!(b.relative_length(&b.inverse(&g).unwrap()).unwrap().value, len.value);
    }

    #[test]
    fn shortlex_is_a_total_order(a in word_over("s3", 5), c in word_over("s3", 5)) {
        prop_assert_eq!(a.shortlex_cmp(&c), c.shortlex_cmp(&a).reverse());
        prop_assert_eq!(a.shortlex_cmp(&c) == std::cmp::Ordering::Equal, a == c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugated_relators_fill_consistently(u in word_over("s3", 2), j in 0usize..2, inv in any::<bool>()) {
        let b = bundled::backend("s3");
        let p = b.presentation();
        let mut r = p.relators()[j].clone();
        if inv {
            r = words::inverse(&r, p).unwrap();
        }
        let w = u.concat(&r).concat(&words::inverse(&u, p).unwrap());
        prop_assume!(!words::reduce(&w, p).unwrap().is_empty());
        let f = filling::fill(&w, b.as_ref(), Budget::default()).unwrap();
        prop_assert!(f.exact);
        prop_assert!(f.rel_area <= 1);
        prop_assert_eq!(filling::replay(&w, &f.script, p).unwrap(), (f.rel_area, f.area));
        let s = filling::verify_sandwich(&w, &f, &extract_omega(p)).unwrap();
        prop_assert!(s.holds);
    }

    #[test]
    fn k_depends_only_on_cardinalities(suffix in "[a-z]{1,4}") {
        let p = bundled::s3();
        let text = p.to_document().to_string()
            .replace("\"t\"", &format!("\"t{suffix}\""))
            .replace("\"t ", &format!("\"t{suffix} "))
            .replace(" t ", &format!(" t{suffix} "))
            .replace(" t\"", &format!(" t{suffix}\""));
        let q = parse_presentation(&text).unwrap();
        prop_assert_eq!(q.x_names()[0].clone(), format!("t{suffix}"));
        let kp = compute_k(&p, &extract_omega(&p), 1).unwrap();
        let kq = compute_k(&q, &extract_omega(&q), 1).unwrap();
        prop_assert_eq!(kp.k, kq.k);
    }

    #[test]
    fn log2_matches_the_exact_value(base in 2u64..64, exponent in 1u64..10) {
        let e = BoundExpression::power(base, exponent);
        if let Some(v) = e.exact() {
            let bits = v.bits() as f64;
            let l = e.log2_pre_factorial();
            prop_assert!(l >= bits - 1.0 - 1e-9 && l < bits);
            let direct = exponent as f64 * (base as f64).log2();
            prop_assert!((l - direct).abs() <= 1e-6 * direct.max(1.0));
        }
    }
}
