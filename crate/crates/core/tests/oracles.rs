//! Independent numerical and combinatorial oracles for the named families.

use ellsurf::exactcore::rat::rat_to_f64;
use ellsurf::exactcore::{int, rat, Place, Poly, Rat, RatFunc};
use ellsurf::gaussmanin::{manin_map, picard_fuchs, DiffOp2};
use ellsurf::idrcohomology::expected_dimension;
use ellsurf::localsolve::frobenius_basis;
use ellsurf::monodromy::{expected_determinant, local_monodromies, MonodromyConfig};
use ellsurf::weiermodel::{hesse, hesse_torsion_section, legendre, KodairaType, Section, WeierstrassModel};

fn eval(f: &RatFunc, x: f64) -> f64 {
    rat_to_f64(&f.eval(&Rat::from_float(x).unwrap()).unwrap())
}

fn apply_numeric(op: &DiffOp2, f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    let (d1, d2) = ((4.0 * d1(h / 2.0) - d1(h)) / 3.0, (4.0 * d2(h / 2.0) - d2(h)) / 3.0);
    d2 + eval(&op.p, x) * d1 + eval(&op.q, x) * f(x)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `int_0^inf dx / sqrt(x^3 + t x + 1)`, the real elliptic integral from `(0, 1)` to the origin.
fn rank_one_log(t: f64) -> f64 {
    let near = simpson(|x| 1.0 / (x * x * x + t * x + 1.0).sqrt(), 0.0, 1.0, 4000);
    let far = simpson(|w| 2.0 / (1.0 + t * w.powi(4) + w.powi(6)).sqrt(), 0.0, 1.0, 4000);
    near + far
}

#[test]
fn manin_map_matches_quadrature() {
    let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
    let op = picard_fuchs(&m).unwrap();
    let z = manin_map(&m, &op, Some(&Section::new(RatFunc::zero(), RatFunc::one()))).unwrap();
    assert_eq!(z, RatFunc::new(Poly::constant(rat(-9, 8)), Poly::from_coeffs(vec![rat(27, 4), int(0), int(0), int(1)])));
    for t in [0.5, 1.0, 2.0, 3.5] {
        // the integral from the origin to (0, 1) is minus the quadrature
        let numeric = -apply_numeric(&op, rank_one_log, t, 1e-2);
        let exact = eval(&z, t);
        assert!((numeric - exact).abs() < 1e-6 * exact.abs(), "t = {t}: {numeric} vs {exact}");
    }
}

#[test]
fn torsion_sections_map_to_zero() {
    let m = hesse();
    let op = picard_fuchs(&m).unwrap();
    assert!(manin_map(&m, &op, Some(&hesse_torsion_section())).unwrap().is_zero());
    let l = legendre();
    let lop = picard_fuchs(&l).unwrap();
    for x in [RatFunc::zero(), RatFunc::one(), RatFunc::var()] {
        assert!(manin_map(&l, &lop, Some(&Section::new(x, RatFunc::zero()))).unwrap().is_zero());
    }
}

fn pochhammer_half_squared(n: usize) -> Rat {
    // ((1/2)_n / n!)^2
    let mut c = int(1);
    for k in 0..n {
        let f = (rat(1, 2) + int(k as i64)) / int(k as i64 + 1);
        c = &c * &f * &f;
    }
    c
}

#[test]
fn legendre_frobenius_is_hypergeometric() {
    let op = picard_fuchs(&legendre()).unwrap();
    let (y2, _) = frobenius_basis(&op, &Place::rational(int(0)), 12).unwrap();
    assert_eq!(y2.log_degree, 0);
    for (n, c) in y2.coefficients.iter().enumerate().take(12) {
        assert_eq!(c.as_rat().unwrap(), pochhammer_half_squared(n), "coefficient {n}");
    }
    // the truncated series is annihilated up to its truncation order
    let series = Poly::from_coeffs((0..12).map(pochhammer_half_squared).collect());
    let (a2, a1, a0) = op.cleared();
    let f = RatFunc::from_poly(series.clone());
    let r = (RatFunc::from_poly(a2) * f.derivative().derivative() + RatFunc::from_poly(a1) * f.derivative() + RatFunc::from_poly(a0) * f).num().clone();
    for k in 0..11 {
        assert_eq!(r.coeff(k), int(0), "order {k}");
    }
}

/// Euler characteristic of `R^1 pi_* Q` on the complement of the bad fibers, negated.
fn leray_from_types(m: &WeierstrassModel) -> i64 {
    let table = m.fiber_table();
    let points: i64 = table.iter().map(|d| d.place.degree() as i64).sum();
    let invariant: i64 = table
        .iter()
        .filter(|d| matches!(d.kodaira, KodairaType::I(n) if n >= 1))
        .map(|d| d.place.degree() as i64)
        .sum();
    2 * points - 4 - invariant
}

#[test]
fn expected_dimension_matches_euler_characteristic() {
    let t = RatFunc::var();
    let families = [
        (legendre(), 0),
        (hesse(), 0),
        (WeierstrassModel::short(t.clone(), RatFunc::one()), 1),
        (WeierstrassModel::short(t.clone(), t.pow(7) + RatFunc::one()), 12),
    ];
    for (m, frozen) in families {
        assert_eq!(leray_from_types(&m), frozen);
        assert_eq!(expected_dimension(&m).unwrap(), frozen);
    }
}

#[test]
fn local_euler_numbers_follow_discriminant_valuations() {
    // Ogg's formula in residue characteristic zero: e = v(minimal discriminant)
    let t = RatFunc::var();
    for m in [legendre(), hesse(), WeierstrassModel::short(t.clone(), RatFunc::one())] {
        for d in m.fiber_table() {
            assert_eq!(d.vdelta, d.e_loc, "{}", d.place);
        }
    }
}

#[test]
fn monodromy_determinants_match_residues() {
    let t = RatFunc::var();
    for m in [legendre(), WeierstrassModel::short(t, RatFunc::one())] {
        let op = picard_fuchs(&m).unwrap();
        let data = local_monodromies(&op, None, MonodromyConfig::default()).unwrap();
        for (sp, mm) in &data.local {
            let want = expected_determinant(&op, sp.root);
            assert!((mm.det() - want).norm() < 1e-6, "{}: {} vs {}", sp.place, mm.det(), want);
        }
        let traces: Vec<f64> = data.local.iter().map(|(_, mm)| mm.trace().re).collect();
        let kodaira: Vec<f64> = data
            .local
            .iter()
            .map(|(sp, _)| m.fiber_table().iter().find(|d| d.place == sp.place).map_or(2.0, |d| d.trace as f64))
            .collect();
        for (a, b) in traces.iter().zip(&kodaira) {
            assert!((a - b).abs() < 1e-6, "{traces:?} vs {kodaira:?}");
        }
        assert!(data.infinity.trace().im.abs() < 1e-6);
    }
}
