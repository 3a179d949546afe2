mod support;

use proptest::prelude::*;

use ellsurf::cli::{parse_expr, parse_family, run, Command, Flags, Report};
use ellsurf::exactcore::expansion::expand;
use ellsurf::exactcore::place::{places_of_poly, support as support_places};
use ellsurf::exactcore::{factor, int, rat, Place, Poly, Rat, RatFunc, ResidueElem, Valuation};
use ellsurf::gaussmanin::{gauge_transform, picard_fuchs, DiffOp2};
use ellsurf::idrcohomology::{lattice, IdrContext};
use ellsurf::invariants::surface_invariants;
use ellsurf::localsolve::certificates;
use ellsurf::weiermodel::{legendre, WeierstrassModel};

fn poly_strategy(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-6i64..=6, 1..=max_deg + 1).prop_map(|c| Poly::from_ints(&c))
}

fn nonzero_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    poly_strategy(max_deg).prop_filter("nonzero", |p| !p.is_zero())
}

fn ratfunc_strategy(max_deg: usize) -> impl Strategy<Value = RatFunc> {
    (poly_strategy(max_deg), nonzero_poly(max_deg), 1i64..=5).prop_map(|(n, d, s)| RatFunc::new(n.scale(&rat(1, s)), d))
}

fn nonzero_ratfunc(max_deg: usize) -> impl Strategy<Value = RatFunc> {
    ratfunc_strategy(max_deg).prop_filter("nonzero", |f| !f.is_zero())
}

fn weighted_sum(f: &RatFunc) -> i64 {
    let mut total = 0;
    for pl in support_places(f).into_iter().chain(std::iter::once(Place::Infinity)) {
        if let Valuation::Finite(v) = pl.valuation(f) {
            total += pl.degree() as i64 * v;
        }
    }
    total
}

fn legendre_op() -> DiffOp2 {
    picard_fuchs(&legendre()).unwrap()
}

fn rank_one_op() -> DiffOp2 {
    picard_fuchs(&WeierstrassModel::short(RatFunc::var(), RatFunc::one())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_additive(f in nonzero_ratfunc(4), g in nonzero_ratfunc(4), a in -3i64..=3) {
        let mut places = vec![Place::Infinity, Place::rational(int(a))];
        places.extend(support_places(&(&f * &g)));
        for pl in places {
            let (vf, vg, vfg) = (pl.valuation(&f), pl.valuation(&g), pl.valuation(&(&f * &g)));
            prop_assert_eq!(vfg.expect_finite(), vf.expect_finite() + vg.expect_finite());
        }
    }

    #[test]
    fn degree_formula(f in nonzero_ratfunc(5)) {
        prop_assert_eq!(weighted_sum(&f), 0);
    }

    #[test]
    fn factor_round_trip(p in nonzero_poly(8)) {
        let fac = factor(&p).unwrap();
        prop_assert_eq!(fac.expand(), p);
        for (q, _) in &fac.factors {
            prop_assert!(q.is_monic());
        }
    }

    #[test]
    fn residue_inverse(p in nonzero_poly(6), e in nonzero_poly(5)) {
        for (pl, _) in places_of_poly(&p) {
            let field = pl.residue_field();
            let x = ResidueElem::new(&field, &e);
            if let Some(inv) = x.inv() {
                prop_assert!((&x * &inv) == ResidueElem::one(&field));
            } else {
                prop_assert!(x.is_zero());
            }
        }
    }

    #[test]
    fn laurent_product(f in nonzero_ratfunc(3), g in nonzero_ratfunc(3), a in -2i64..=2) {
        for pl in [Place::rational(int(a)), Place::Infinity] {
            let fg = expand(&(&f * &g), &pl, 5);
            let prod = expand(&f, &pl, 5).mul(&expand(&g, &pl, 5));
            let top = fg.prec().min(prod.prec());
            for k in fg.valuation().unwrap()..top {
                prop_assert_eq!(fg.coeff(k), prod.coeff(k));
            }
        }
    }

    #[test]
    fn parse_display_round_trip(f in ratfunc_strategy(4)) {
        let shown = f.display_with("t");
        prop_assert_eq!(parse_expr(&shown, "t").unwrap(), f);
    }

    #[test]
    fn gauge_is_a_group_action(g1 in nonzero_ratfunc(2), g2 in nonzero_ratfunc(2)) {
        let op = legendre_op();
        let twice = gauge_transform(&gauge_transform(&op, &g1).unwrap(), &g2).unwrap();
        prop_assert_eq!(twice, gauge_transform(&op, &(&g1 * &g2)).unwrap());
    }

    #[test]
    fn rescaling_keeps_fibers(u in nonzero_ratfunc(2)) {
        let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
        let r = m.rescale(&u);
        prop_assert_eq!(r.invariants().unwrap().j, m.invariants().unwrap().j);
        let strip = |m: &WeierstrassModel| m.fiber_table().into_iter().map(|d| (d.place, d.kodaira, d.vdelta)).collect::<Vec<_>>();
        prop_assert_eq!(strip(&r), strip(&m));
    }

    #[test]
    fn affine_substitution_keeps_invariants(c in -4i64..=4, s in prop::sample::select(vec![-3i64, -1, 2, 5])) {
        let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
        let g = RatFunc::from_poly(Poly::from_ints(&[c, s]));
        prop_assert_eq!(surface_invariants(&m.substitute(&g)).unwrap(), surface_invariants(&m).unwrap());
    }

    #[test]
    fn exact_functions_are_locally_exact(g in ratfunc_strategy(3)) {
        let op = rank_one_op();
        let z = op.apply(&g);
        prop_assert!(certificates(&op, &z).unwrap().iter().all(|c| c.locally_exact));
    }

    #[test]
    fn obstructions_are_linear(n1 in poly_strategy(2), n2 in poly_strategy(2), c in -5i64..=5, k in 1u32..=3) {
        let op = rank_one_op();
        let cubic = Poly::from_coeffs(vec![rat(27, 4), int(0), int(0), int(1)]);
        let z1 = RatFunc::new(n1, cubic.pow(k));
        let z2 = RatFunc::new(n2, Poly::from_ints(&[0, 1]).pow(k));
        let mut ctx = IdrContext::new(&op, &[Place::rational(int(0))]).unwrap();
        let (v1, v2) = (ctx.obstruction_vector(&z1), ctx.obstruction_vector(&z2));
        let sum = ctx.obstruction_vector(&(&z1 + &z2.scale(&int(c))));
        let combined: Vec<Rat> = v1.iter().zip(&v2).map(|(a, b)| a + b * int(c)).collect();
        prop_assert_eq!(sum, combined);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quotient_is_monotone(i in 0usize..200, j in 0usize..200) {
        let op = rank_one_op();
        let mut ctx = IdrContext::new(&op, &[]).unwrap();
        let places = ctx.places().to_vec();
        let divisors = lattice(&places, 6);
        let (a, b) = (&divisors[i % divisors.len()], &divisors[j % divisors.len()]);
        let (small, big) = if a.le(b) { (a, b) } else if b.le(a) { (b, a) } else { return Ok(()); };
        let (ds, db) = (ctx.space(small).unwrap().dimension(), ctx.space(big).unwrap().dimension());
        prop_assert!(ds <= db, "{} has {} but {} has {}", small, ds, big, db);
    }
}

#[test]
fn random_models_satisfy_discriminant_identity() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let m = support::random_model(&mut rng, 4);
        let inv = m.invariants().unwrap();
        assert_eq!(&inv.c4.pow(3) - &inv.c6.pow(2), RatFunc::from_int(1728) * &inv.disc);
        let s = surface_invariants(&m).unwrap();
        assert_eq!(s.e % 12, 0);
        assert!(s.rho_given_r(s.rank_bound) <= s.h11);
    }
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let spec = parse_family("name = legendre\nvariable = l\na2 = -(1+l); a4 = l").unwrap();
    let flags = Flags::default();
    let a = run(Command::Analyze, &[spec.clone()], &flags).unwrap();
    let b = run(Command::Analyze, &[spec], &flags).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(Report::from_json(&a.to_json()).unwrap(), a);
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn family_render_round_trips() {
    let text = "name = rank1\na4 = t; a6 = 1\nsection = (0, 1)";
    let spec = parse_family(text).unwrap();
    let again = parse_family(&spec.render()).unwrap();
    assert_eq!(again.model, spec.model);
    assert_eq!(again.sections, spec.sections);
}
