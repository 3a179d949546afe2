//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod support;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ellsurf::exactcore::rat::rat_to_f64;
use ellsurf::exactcore::{int, rat, Place, Poly, Rat, RatFunc};
use ellsurf::gaussmanin::{fuchs_relation_sum, gauge_transform, manin_map, picard_fuchs, DiffOp2};
use ellsurf::idrcohomology::{expected_dimension, hodge_search, stabilization_search, IdrContext, PoleDivisor};
use ellsurf::invariants::{invariants_from_fibers, surface_invariants, SurfaceInvariants};
use ellsurf::localsolve::{certificates, rational_solutions};
use ellsurf::monodromy::{integrate, local_monodromies, MonodromyConfig, MonodromyMatrix};
use ellsurf::weiermodel::{hesse, legendre, KodairaType, LocalFiberData, Section, WeierstrassModel};

type Verdict = Result<String, String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn kinds(table: &[LocalFiberData]) -> Vec<(String, String)> {
    table.iter().map(|d| (d.place.to_string(), d.kodaira.to_string())).collect()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("runtime {elapsed:.2?} exceeds {limit:?}"))
}

fn legendre_end_to_end() -> Verdict {
    let start = Instant::now();
    let m = legendre();
    let table = m.fiber_table();
    let types: Vec<String> = table.iter().map(|d| d.kodaira.to_string()).collect();
    ensure(types == ["I2", "I2", "I2*"], || format!("fiber types {types:?}"))?;
    let ms: Vec<i64> = table.iter().map(|d| d.m).collect();
    ensure(ms == [2, 2, 7], || format!("components {ms:?}"))?;
    let s = surface_invariants(&m).map_err(|e| e.to_string())?;
    let want = SurfaceInvariants { e: 12, chi: 1, p_g: 0, q: 0, b1: 0, b2: 10, h11: 10, sum_m_minus_1: 8, rank_bound: 0, j_degree: 6 };
    ensure(s == want, || format!("invariants {s:?}"))?;
    ensure(s.rho_given_r(0) == 10 && s.rho_given_r(0) == s.h11, || "rho identity".into())?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("I2, I2, I2*; e = 12, h11 = 10, rank bound 0, deg j = 6 in {:.2?}", start.elapsed()))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        (a, b) = ((a + b) / 2.0, (a * b).sqrt());
    }
    a
}

fn period(l: f64) -> f64 {
    1.0 / agm(1.0, (1.0 - l).sqrt())
}

/// First and second derivatives by central differences, Richardson-extrapolated from steps `h` and `h/2`.
fn derivatives(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let d1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    ((4.0 * d1(h / 2.0) - d1(h)) / 3.0, (4.0 * d2(h / 2.0) - d2(h)) / 3.0)
}

fn eval(f: &RatFunc, x: f64) -> f64 {
    rat_to_f64(&f.eval(&Rat::from_float(x).unwrap()).unwrap())
}

fn legendre_picard_fuchs() -> Verdict {
    let m = legendre();
    let op = picard_fuchs(&m).map_err(|e| e.to_string())?;
    let (a2, a1, a0) = op.cleared();
    let target = [Poly::from_ints(&[0, 1, -1]), Poly::from_ints(&[1, -2]), Poly::constant(rat(-1, 4))];
    let scale = a2.leading() / target[0].leading();
    let same = [&a2, &a1, &a0].iter().zip(&target).all(|(c, t)| **c == t.scale(&scale));
    ensure(same, || format!("cleared operator ({a2}, {a1}, {a0})"))?;
    let places = [Place::rational(int(0)), Place::rational(int(1)), Place::Infinity];
    let want = [(int(0), int(0)), (int(0), int(0)), (rat(1, 2), rat(1, 2))];
    for (pl, w) in places.iter().zip(&want) {
        let ex = op.local_exponents(pl).map_err(|e| e.to_string())?;
        ensure(&ex == w, || format!("exponents at {pl}: {ex:?}"))?;
    }
    let mut worst: f64 = 0.0;
    for l in [0.2, 0.25, 0.5] {
        let (d1, d2) = derivatives(period, l, 1e-3);
        let (p, q) = (eval(&op.p, l), eval(&op.q, l));
        let f = period(l);
        let residual = (d2 + p * d1 + q * f).abs() / (d2.abs() + (p * d1).abs() + (q * f).abs());
        worst = worst.max(residual);
    }
    ensure(worst < 1e-6, || format!("AGM residual {worst:.3e}"))?;
    Ok(format!("cleared {a2} D^2 + ({a1}) D + {a0}; exponents (0,0), (0,0), (1/2,1/2); AGM residual {worst:.1e}"))
}

fn legendre_monodromy() -> Verdict {
    let op = picard_fuchs(&legendre()).map_err(|e| e.to_string())?;
    let cfg = MonodromyConfig::default();
    let data = local_monodromies(&op, None, cfg).map_err(|e| e.to_string())?;
    let mut traces: BTreeMap<String, f64> = BTreeMap::new();
    for (sp, mm) in &data.local {
        let tr = mm.trace();
        ensure(tr.im.abs() < 1e-6, || format!("trace at {} not real: {tr}", sp.place))?;
        traces.insert(sp.place.to_string(), tr.re);
    }
    let tinf = data.infinity.trace();
    let got = [traces.get("t"), traces.get("t - 1")];
    let ok = matches!(got, [Some(a), Some(b)] if (a - 2.0).abs() < 1e-6 && (b - 2.0).abs() < 1e-6)
        && (tinf.re + 2.0).abs() < 1e-6
        && tinf.im.abs() < 1e-6;
    ensure(ok, || format!("traces {traces:?}, infinity {tinf}"))?;
    ensure(data.product_residual < 1e-5, || format!("ordered product residual {:.3e}", data.product_residual))?;
    let center = Complex64::new(0.5, 0.5);
    let path: Vec<Complex64> = (0..=32).map(|k| center + Complex64::from_polar(0.2, 2.0 * std::f64::consts::PI * k as f64 / 32.0)).collect();
    let empty = integrate(&op, None, &path, cfg).map_err(|e| e.to_string())?;
    let d = empty.distance(&MonodromyMatrix::identity());
    ensure(d < 1e-9, || format!("empty loop distance {d:.3e}"))?;
    Ok(format!("traces 2, 2, -2; product residual {:.1e}; empty loop {d:.1e}", data.product_residual))
}

fn level_three() -> Verdict {
    let m = hesse();
    let table = m.fiber_table();
    let got = kinds(&table);
    let want = vec![
        ("t - 3".to_string(), "I3".to_string()),
        ("t^2 + 3*t + 9".to_string(), "I3".to_string()),
        ("infinity".to_string(), "I3".to_string()),
    ];
    let places_ok = table.len() == 3
        && table[0].place == Place::rational(int(3))
        && table[1].place == Place::finite(Poly::from_ints(&[9, 3, 1])).unwrap()
        && table[2].place == Place::Infinity;
    let types_ok = table.iter().all(|d| d.kodaira == KodairaType::I(3));
    ensure(places_ok && types_ok, || format!("fibers {got:?}, expected {want:?}"))?;
    let geometric: usize = table.iter().map(|d| d.place.degree()).sum();
    ensure(geometric == 4, || format!("{geometric} geometric fibers"))?;
    let s = surface_invariants(&m).map_err(|e| e.to_string())?;
    ensure(s.e == 12 && s.sum_m_minus_1 == 8 && s.rank_bound == 0 && s.j_degree == 12, || format!("invariants {s:?}"))?;
    Ok("four geometric I3 fibers; e = 12, sum(m-1) = 8, rank bound 0, deg j = 12".into())
}

fn rank_one() -> Verdict {
    let start = Instant::now();
    let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
    let table = m.fiber_table();
    let cubic = Place::finite(Poly::from_coeffs(vec![rat(27, 4), int(0), int(0), int(1)])).unwrap();
    let fibers_ok = table.len() == 2
        && table[0].place == cubic
        && table[0].kodaira == KodairaType::I(1)
        && table[1].place == Place::Infinity
        && table[1].kodaira == KodairaType::IIIStar;
    ensure(fibers_ok, || format!("fibers {:?}", kinds(&table)))?;
    let s = surface_invariants(&m).map_err(|e| e.to_string())?;
    ensure(s.sum_m_minus_1 == 7 && s.rank_bound == 1, || format!("invariants {s:?}"))?;
    let op = picard_fuchs(&m).map_err(|e| e.to_string())?;
    let z = manin_map(&m, &op, Some(&Section::new(RatFunc::zero(), RatFunc::one()))).map_err(|e| e.to_string())?;
    let certs = certificates(&op, &z).map_err(|e| e.to_string())?;
    ensure(certs.iter().all(|c| c.locally_exact), || "Z is obstructed somewhere".into())?;
    let sol = rational_solutions(&op, &z).map_err(|e| e.to_string())?;
    ensure(sol.is_none(), || "Z has a rational solution".into())?;
    let stab = stabilization_search(&op, 1, 24).map_err(|e| e.to_string())?;
    ensure(stab.dimension() == 1, || format!("stabilized dimension {}", stab.dimension()))?;
    let dz = PoleDivisor::new(BTreeMap::from([(cubic, 1)]), 0);
    let sp = IdrContext::new(&op, &[]).map_err(|e| e.to_string())?.space(&dz).map_err(|e| e.to_string())?;
    let (parabolic, exact) = sp.membership(&z);
    ensure(sp.dimension() == 1 && parabolic && !exact, || format!("quotient at {dz}: dim {}, parabolic {parabolic}, exact {exact}", sp.dimension()))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("Z = {z}; quotient stabilizes at 1 ({}) and contains [Z]; {:.2?}", stab.divisor, start.elapsed()))
}

fn k3_checks(m: &WeierstrassModel, expect_fibers: Option<(usize, KodairaType, KodairaType)>) -> Verdict {
    let start = Instant::now();
    let table = m.fiber_table();
    if let Some((count, finite, inf)) = expect_fibers {
        let finite_ok = table
            .iter()
            .filter(|d| !d.place.is_infinity())
            .all(|d| d.kodaira == finite);
        let geometric: usize = table.iter().filter(|d| !d.place.is_infinity()).map(|d| d.place.degree()).sum();
        let inf_ok = table.iter().any(|d| d.place.is_infinity() && d.kodaira == inf);
        ensure(finite_ok && inf_ok && geometric == count, || format!("fibers {:?}", kinds(&table)))?;
    }
    let s = invariants_from_fibers(&table, 0);
    ensure(s.e == 24 && s.p_g == 1 && s.h11 == 20, || format!("e = {}, p_g = {}, h11 = {}", s.e, s.p_g, s.h11))?;
    let op = picard_fuchs(m).map_err(|e| format!("fibers ok (e = 24, p_g = 1, h11 = 20); Picard-Fuchs: {e}"))?;
    let h = hodge_search(m, &op, 24).map_err(|e| e.to_string())?;
    ensure(h.expected == 12, || format!("expected dimension {}", h.expected))?;
    let reached = h.stabilized.as_ref().is_some_and(|(_, n)| *n as i64 >= 12);
    ensure(reached, || "dimension 12 not reached".into())?;
    ensure(h.a0_basis.len() == 1, || format!("L(A0) has dimension {}", h.a0_basis.len()))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    let (d, _) = h.stabilized.unwrap();
    Ok(format!("e = 24, p_g = 1, h11 = 20; A0 = {} with 1-dimensional L(A0); dimension 12 at {d}; {:.2?}", h.a0, start.elapsed()))
}

fn k3_family() -> Verdict {
    let t7 = RatFunc::var().pow(7) + RatFunc::one();
    k3_checks(&WeierstrassModel::short(RatFunc::zero(), t7), Some((7, KodairaType::II, KodairaType::IIStar)))
}

fn k3_deformed() -> Verdict {
    let t7 = RatFunc::var().pow(7) + RatFunc::one();
    k3_checks(&WeierstrassModel::short(RatFunc::var(), t7), None)
}

/// `dim H^1(P^1, R^1 pi_* Q)` from the Euler characteristic of the local system.
fn leray_oracle(table: &[LocalFiberData]) -> i64 {
    let points: i64 = table.iter().map(|d| d.place.degree() as i64).sum();
    let invariant: i64 = table
        .iter()
        .map(|d| d.place.degree() as i64 * i64::from(matches!(d.kodaira, KodairaType::I(n) if n >= 1)))
        .sum();
    2 * points - 4 - invariant
}

fn fuzz_model(m: &WeierstrassModel, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let inv = m.invariants().map_err(|e| e.to_string())?;
    ensure(&inv.c4.pow(3) - &inv.c6.pow(2) == RatFunc::from_int(1728) * &inv.disc, || "c4^3 - c6^2 != 1728 disc".into())?;
    let s = surface_invariants(m).map_err(|e| e.to_string())?;
    ensure(s.e % 12 == 0, || format!("e = {}", s.e))?;
    let op = picard_fuchs(m).map_err(|e| e.to_string())?;
    ensure(op.is_fuchsian(), || "operator not Fuchsian".into())?;
    let fs = fuchs_relation_sum(&op).map_err(|e| e.to_string())?;
    ensure(fs == int(-2), || format!("Fuchs sum {fs}"))?;
    let g1 = nonzero(rng);
    let g2 = nonzero(rng);
    let twice = gauge(&gauge(&op, &g1)?, &g2)?;
    ensure(twice == gauge(&op, &(&g1 * &g2))?, || format!("gauge action fails for {g1}, {g2}"))?;
    let g = nonzero(rng);
    let z = op.apply(&g);
    let certs = certificates(&op, &z).map_err(|e| e.to_string())?;
    ensure(certs.iter().all(|c| c.locally_exact), || format!("Lambda({g}) not locally exact"))?;
    let h1 = expected_dimension(m).map_err(|e| e.to_string())?;
    ensure(h1 + 2 + s.sum_m_minus_1 == s.b2, || format!("Leray: {h1} + 2 + {} != {}", s.sum_m_minus_1, s.b2))?;
    let oracle = leray_oracle(&m.fiber_table());
    ensure(h1 == oracle, || format!("expected dimension {h1}, Euler characteristic gives {oracle}"))
}

fn nonzero(rng: &mut ChaCha8Rng) -> RatFunc {
    loop {
        let g = support::random_ratfunc(rng, 2);
        if !g.is_zero() {
            return g;
        }
    }
}

fn gauge(op: &DiffOp2, g: &RatFunc) -> Result<DiffOp2, String> {
    gauge_transform(op, g).map_err(|e| e.to_string())
}

fn property_fuzz() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let count = 200;
    for i in 0..count {
        let m = support::random_model(&mut rng, 6);
        fuzz_model(&m, &mut rng).map_err(|e| format!("model {i} ({m:?}): {e}"))?;
    }
    Ok(format!("{count} random models of coefficient degree <= 6 in {:.2?}", start.elapsed()))
}

fn isotriviality_gate() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("isotrivial.fam");
    std::fs::write(&path, "a6 = 1\n").map_err(|e| e.to_string())?;
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ellsurf"))
        .arg("analyze")
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(out.status.code() == Some(2), || format!("exit status {:?}", out.status.code()))?;
    ensure(stderr.contains("isotrivial"), || format!("stderr {stderr:?}"))?;
    Ok(format!("exit 2: {}", stderr.trim()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Verdict); 9] = [
        ("1", "Legendre end-to-end", legendre_end_to_end),
        ("2", "Legendre Picard-Fuchs", legendre_picard_fuchs),
        ("3", "Legendre monodromy", legendre_monodromy),
        ("4", "level-3 family", level_three),
        ("5", "rank-1 family", rank_one),
        ("6", "K3 family y^2 = x^3 + t^7 + 1", k3_family),
        ("6+", "K3 family y^2 = x^3 + t x + t^7 + 1", k3_deformed),
        ("7", "property fuzz", property_fuzz),
        ("8", "isotriviality gate", isotriviality_gate),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("PASS {id:<3} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:<3} {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
