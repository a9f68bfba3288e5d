use chatelet_core::chatelet::{classify_pair, normalize_pair};
use chatelet_core::chi::{ChiContext, ChiValue};
use chatelet_core::cubic::{count_roots_cubic, Cubic};
use chatelet_core::hilbert::{hilbert, hilbert_classes, hilbert_oracle};
use chatelet_core::padic::{default_precision, format_rational, parse_rational, square_class};
use chatelet_core::quadratic_ext::{QuadExt, QuadExtElem};
use chatelet_core::{Error, PAdic};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])
}

fn nonzero(max: i64) -> impl Strategy<Value = i64> {
    (1..=max, any::<bool>()).prop_map(|(n, neg)| if neg { -n } else { n })
}

fn q(p: u64, n: i64) -> PAdic {
    PAdic::from_i64(p, n, default_precision(p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn square_class_ignores_square_factors(p in prime(), x in nonzero(10_000), y in nonzero(300)) {
        let xy2 = q(p, x).checked_mul(&q(p, y).square()).unwrap();
        prop_assert_eq!(square_class(&xy2).unwrap(), square_class(&q(p, x)).unwrap());
    }

    #[test]
    fn square_class_is_multiplicative(p in prime(), x in nonzero(5000), y in nonzero(5000)) {
        let (a, b) = (q(p, x), q(p, y));
        let ab = a.checked_mul(&b).unwrap();
        prop_assert_eq!(
            square_class(&ab).unwrap(),
            square_class(&a).unwrap().mul(&square_class(&b).unwrap())
        );
    }

    #[test]
    fn mul_div_round_trip(p in prime(), x in nonzero(1 << 20), y in nonzero(1 << 20)) {
        let (a, b) = (q(p, x), q(p, y));
        let back = a.checked_mul(&b).unwrap().checked_div(&b).unwrap();
        prop_assert!(back.agrees_with(&a));
    }

    #[test]
    fn rational_round_trip(n in -100_000i64..100_000, d in 1i64..1000) {
        let r = BigRational::new(BigInt::from(n), BigInt::from(d));
        let s = format_rational(&r);
        prop_assert_eq!(parse_rational(&s).unwrap(), r.clone());
        // Small integers survive a trip through Q_p when p^prec dominates them.
        if n != 0 {
            let x = PAdic::from_rational(101, &r, 8).unwrap();
            let xd = x.checked_mul(&PAdic::from_i64(101, d, 8).unwrap()).unwrap();
            prop_assert_eq!(xd.to_rational(), BigRational::from_integer(BigInt::from(n)));
        }
    }

    #[test]
    fn hilbert_symbol_depends_on_classes(p in prime(), a in nonzero(2000), b in nonzero(2000)) {
        let (x, y) = (q(p, a), q(p, b));
        let (h, _) = hilbert(&x, &y).unwrap();
        prop_assert_eq!(h, hilbert_classes(square_class(&x).unwrap(), square_class(&y).unwrap()));
        prop_assert_eq!(h, hilbert(&y, &x).unwrap().0);
    }

    #[test]
    fn hilbert_symbol_bilinear(p in prime(), a in nonzero(500), a2 in nonzero(500), b in nonzero(500)) {
        let (x, x2, y) = (q(p, a), q(p, a2), q(p, b));
        let lhs = hilbert(&x.checked_mul(&x2).unwrap(), &y).unwrap().0;
        let rhs = hilbert(&x, &y).unwrap().0.times(hilbert(&x2, &y).unwrap().0);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hilbert_formula_matches_conic_search(p in prop::sample::select(vec![2u64, 3, 5]), a in nonzero(200), b in nonzero(200)) {
        let (x, y) = (q(p, a), q(p, b));
        prop_assert_eq!(hilbert(&x, &y).unwrap().0, hilbert_oracle(&x, &y).unwrap().value);
    }

    #[test]
    fn hilbert_steinberg(p in prime(), a in nonzero(5000)) {
        let x = q(p, a);
        let one_minus = q(p, 1 - a);
        if a != 1 {
            prop_assert!(hilbert(&x, &one_minus).unwrap().0.is_plus());
        }
        prop_assert!(hilbert(&x, &x.neg()).unwrap().0.is_plus());
    }

    #[test]
    fn extension_norm_is_multiplicative(
        p in prime(), d in nonzero(50),
        a in -30i64..30, b in -30i64..30, c in -30i64..30, e in -30i64..30,
    ) {
        let dp = q(p, d);
        let Ok(l) = QuadExt::new(&dp) else { return Ok(()); };
        let x = QuadExtElem::from_ints(&l, a, b).unwrap();
        let y = QuadExtElem::from_ints(&l, c, e).unwrap();
        prop_assume!(!x.is_zero() && !y.is_zero());
        let nxy = x.mul(&y).unwrap().norm().unwrap();
        let nx_ny = x.norm().unwrap().checked_mul(&y.norm().unwrap()).unwrap();
        prop_assert!(nxy.agrees_with(&nx_ny));
        prop_assert!(l.is_norm(&x.norm().unwrap()).unwrap());
    }

    #[test]
    fn norm_routes_agree(p in prime(), d in nonzero(60), x in nonzero(5000)) {
        let Ok(l) = QuadExt::new(&q(p, d)) else { return Ok(()); };
        let xp = q(p, x);
        let a = l.is_norm(&xp).unwrap();
        prop_assert_eq!(a, l.is_norm_by_symbol(&xp).unwrap());
        if let Some(c) = l.is_norm_by_valuation(&xp).unwrap() {
            prop_assert_eq!(a, c);
        }
    }

    #[test]
    fn classifier_scaling_invariance(
        p in prime(), d in nonzero(500), e in nonzero(500), lambda in nonzero(60), k in -2i64..=2,
    ) {
        let (dp, ep) = (q(p, d), q(p, e));
        let base = classify_pair(&dp, &ep).unwrap();
        let d2 = dp.checked_mul(&q(p, lambda).square()).unwrap();
        prop_assert_eq!(&classify_pair(&d2, &ep).unwrap(), &base);
        prop_assert_eq!(&classify_pair(&dp, &ep.shift(4 * k)).unwrap(), &base);
        let (dn, en) = normalize_pair(&dp, &ep).unwrap();
        let ve = en.valuation().unwrap();
        prop_assert!((0..4).contains(&ve));
        prop_assert!(dn.valuation().unwrap() == 0 || dn.valuation().unwrap() == 1);
        prop_assert_eq!(&classify_pair(&dn, &en).unwrap(), &base);
    }

    #[test]
    fn chi_lands_in_the_diagonal(p in prime(), d in nonzero(100), e in nonzero(100), x in nonzero(2000), v in -4i64..=4) {
        let ctx = match ChiContext::new(&q(p, d), &q(p, e)) {
            Ok(c) => c,
            Err(Error::SplitCase | Error::SquareDefiningElement) => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let xp = q(p, x).shift(v);
        let cert = match ctx.certificate(&xp) {
            Ok(c) => c,
            // x^2 = e to working precision cannot happen for non-square e.
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        if cert.product_is_norm {
            prop_assert_eq!(cert.first_is_norm, cert.second_is_norm);
            let c = ctx.chi(&xp).unwrap();
            if ctx.is_isomorphic() {
                prop_assert_eq!(c, ChiValue::ZERO);
            } else {
                prop_assert!(c.is_diagonal());
            }
        } else {
            prop_assert_eq!(ctx.chi(&xp), Err(Error::NotInM));
        }
    }

    #[test]
    fn split_cubics_have_three_roots(p in prop::sample::select(vec![3u64, 5, 7, 11]), r1 in -20i64..20, r2 in -20i64..20, r3 in -20i64..20) {
        prop_assume!(r1 != r2 && r2 != r3 && r1 != r3);
        let a = -(r1 + r2 + r3);
        let b = r1 * r2 + r1 * r3 + r2 * r3;
        let c = -r1 * r2 * r3;
        let prec = chatelet_core::padic::max_precision(p);
        let coeffs = [a, b, c].map(|n| BigRational::from_integer(BigInt::from(n)));
        let f = Cubic::from_rationals(p, &coeffs, prec).unwrap();
        let rep = count_roots_cubic(&f).unwrap();
        prop_assert_eq!(rep.count, 3);
        for r in [r1, r2, r3] {
            let target = PAdic::from_i64(p, r, prec).unwrap();
            let close = |x: &PAdic| {
                let diff = x.sub_absorbing(&target).unwrap();
                diff.is_zero() || diff.valuation().unwrap() >= 4
            };
            prop_assert!(rep.roots.iter().any(close), "root {} not found", r);
        }
    }

    #[test]
    fn linear_times_irreducible_quadratic_has_one_root(p in prop::sample::select(vec![3u64, 5, 7]), r in -10i64..10, n in 1i64..30) {
        // (x - r)(x^2 - n) with n not a square in Q_p.
        prop_assume!(!chatelet_core::padic::is_square(&q(p, n)).unwrap());
        let f = Cubic::from_ints(p, -r, -n, r * n).unwrap();
        prop_assert_eq!(count_roots_cubic(&f).unwrap().count, 1);
    }
}
