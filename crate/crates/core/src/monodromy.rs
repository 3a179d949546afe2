//! Numerical analytic continuation of solutions of `y'' + p y' + q y = Z`
//! and the resulting monodromy representation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::exactcore::rat::rat_to_f64;
use crate::exactcore::{Place, Poly, RatFunc};
use crate::gaussmanin::{DiffOp2, OperatorError};

type C = Complex64;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("step size underflow near {at}")]
    StepUnderflow { at: C },
    #[error("error estimate {achieved:e} exceeds tolerance {tol:e}")]
    ToleranceNotMet { achieved: f64, tol: f64 },
    #[error("no admissible base point found")]
    NoBasePoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonodromyConfig {
    pub tol: f64,
    pub order: usize,
    /// Step length as a fraction of the distance to the nearest singular point.
    pub step_fraction: f64,
    pub circle_chords: usize,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        MonodromyConfig { tol: 1e-9, order: 40, step_fraction: 0.5, circle_chords: 16 }
    }
}

fn cpoly(p: &Poly) -> Vec<C> {
    p.coeffs().iter().map(|c| C::new(rat_to_f64(c), 0.0)).collect()
}

fn ceval(p: &[C], x: C) -> C {
    p.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn cderiv(p: &[C]) -> Vec<C> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Coefficients of `p(t0 + u)` in `u`.
fn taylor_shift(p: &[C], t0: C) -> Vec<C> {
    let mut a = p.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = a[j + 1];
            a[j] += t0 * next;
        }
    }
    a
}

fn series_div(n: &[C], d: &[C], len: usize) -> Vec<C> {
    let get = |v: &[C], k: usize| v.get(k).copied().unwrap_or_default();
    let d0 = get(d, 0);
    let mut out = vec![C::default(); len];
    for k in 0..len {
        let mut s = get(n, k);
        for j in 1..=k {
            s -= get(d, j) * out[k - j];
        }
        out[k] = s / d0;
    }
    out
}

/// Roots of a polynomial by Aberth iteration followed by Newton polishing.
pub fn complex_roots(p: &Poly) -> Vec<C> {
    let c = cpoly(p);
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<C> = c.iter().map(|x| x / lead).collect();
    let dm = cderiv(&monic);
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<C> = (0..n)
        .map(|k| C::from_polar(radius * 0.5, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let f = ceval(&monic, z[i]);
            let fp = ceval(&dm, z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / fp;
            let s: C = (0..n).filter(|&j| j != i).map(|j| C::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (C::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..3 {
            let fp = ceval(&dm, *r);
            if fp.norm() > 0.0 {
                *r -= ceval(&monic, *r) / fp;
            }
        }
    }
    z
}

/// A finite singular point of the operator with the place it lies over.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularPoint {
    pub place: Place,
    pub root: C,
}

pub fn singular_points(op: &DiffOp2) -> Vec<SingularPoint> {
    let mut out = Vec::new();
    for place in op.singular_places() {
        if let Some(poly) = place.polynomial() {
            for root in complex_roots(poly) {
                out.push(SingularPoint { place: place.clone(), root });
            }
        }
    }
    out
}

/// Continuation matrix acting on `(y, y', 1)` at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyMatrix {
    pub m: [[C; 3]; 3],
    pub error_estimate: f64,
}

impl MonodromyMatrix {
    pub fn identity() -> Self {
        let mut m = [[C::default(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C::new(1.0, 0.0);
        }
        MonodromyMatrix { m, error_estimate: 0.0 }
    }

    /// The 2x2 homogeneous block.
    pub fn linear(&self) -> [[C; 2]; 2] {
        [[self.m[0][0], self.m[0][1]], [self.m[1][0], self.m[1][1]]]
    }

    /// Translation from continuing the particular solution vanishing at the base point.
    pub fn translation(&self) -> [C; 2] {
        [self.m[0][2], self.m[1][2]]
    }

    pub fn trace(&self) -> C {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self * other`, i.e. `other` traversed first.
    pub fn compose(&self, other: &MonodromyMatrix) -> MonodromyMatrix {
        let mut m = [[C::default(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        MonodromyMatrix { m, error_estimate: self.error_estimate + other.error_estimate }
    }

    pub fn distance(&self, other: &MonodromyMatrix) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// Distance of the translation from the range of `M - I`; zero for locally exact forcing.
    pub fn affine_obstruction(&self, eps: f64) -> f64 {
        let one = C::new(1.0, 0.0);
        let n = [[self.m[0][0] - one, self.m[0][1]], [self.m[1][0], self.m[1][1] - one]];
        let v = self.translation();
        let norm = n.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
        if norm < eps {
            return v[0].norm().hypot(v[1].norm());
        }
        let det = n[0][0] * n[1][1] - n[0][1] * n[1][0];
        if det.norm() > eps * norm.max(1.0) {
            return 0.0;
        }
        let c0 = [n[0][0], n[1][0]];
        let c1 = [n[0][1], n[1][1]];
        let nn = |c: &[C; 2]| c[0].norm_sqr() + c[1].norm_sqr();
        let c = if nn(&c0) >= nn(&c1) { c0 } else { c1 };
        let proj = (c[0].conj() * v[0] + c[1].conj() * v[1]) / nn(&c);
        let r = [v[0] - proj * c[0], v[1] - proj * c[1]];
        r[0].norm().hypot(r[1].norm())
    }
}

struct Coefficients {
    pn: Vec<C>,
    pd: Vec<C>,
    qn: Vec<C>,
    qd: Vec<C>,
    z: Option<(Vec<C>, Vec<C>)>,
}

impl Coefficients {
    fn new(op: &DiffOp2, z: Option<&RatFunc>) -> Self {
        Coefficients {
            pn: cpoly(op.p.num()),
            pd: cpoly(op.p.den()),
            qn: cpoly(op.q.num()),
            qd: cpoly(op.q.den()),
            z: z.map(|z| (cpoly(z.num()), cpoly(z.den()))),
        }
    }

    fn series(&self, t0: C, len: usize) -> (Vec<C>, Vec<C>, Vec<C>) {
        let s = |n: &[C], d: &[C]| series_div(&taylor_shift(n, t0), &taylor_shift(d, t0), len);
        let z = match &self.z {
            Some((n, d)) => s(n, d),
            None => vec![C::default(); len],
        };
        (s(&self.pn, &self.pd), s(&self.qn, &self.qd), z)
    }
}

/// Taylor integrator for the homogeneous basis and one particular solution.
pub struct Integrator {
    coeffs: Coefficients,
    singular: Vec<C>,
    cfg: MonodromyConfig,
}

impl Integrator {
    pub fn new(op: &DiffOp2, z: Option<&RatFunc>, cfg: MonodromyConfig) -> Self {
        let mut singular: Vec<C> = singular_points(op).into_iter().map(|s| s.root).collect();
        if let Some(z) = z {
            singular.extend(complex_roots(z.den()));
        }
        Integrator { coeffs: Coefficients::new(op, z), singular, cfg }
    }

    pub fn singular(&self) -> &[C] {
        &self.singular
    }

    fn distance(&self, t: C) -> f64 {
        self.singular.iter().map(|s| (s - t).norm()).fold(4.0, f64::min)
    }

    /// One Taylor step of length `h` from `t0`; columns are the two basis solutions and the particular one.
    fn step(&self, t0: C, state: &mut [[C; 3]; 2], h: C) -> f64 {
        let n = self.cfg.order;
        let (p, q, z) = self.coeffs.series(t0, n + 1);
        let mut err = 0.0f64;
        for col in 0..3 {
            let mut c = vec![C::default(); n + 1];
            c[0] = state[0][col];
            c[1] = state[1][col];
            for k in 0..n - 1 {
                let mut s = if col == 2 { z[k] } else { C::default() };
                for j in 0..=k {
                    s -= p[j] * c[k - j + 1] * (k - j + 1) as f64 + q[j] * c[k - j];
                }
                c[k + 2] = s / ((k + 2) * (k + 1)) as f64;
            }
            let mut y = C::default();
            let mut dy = C::default();
            let mut hk = C::new(1.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                if k >= 1 {
                    dy += ck * hk * k as f64 / h;
                }
                y += ck * hk;
                hk *= h;
            }
            let scale = 1.0 + y.norm() + dy.norm();
            let tail = (c[n] * h.powu(n as u32)).norm() + (c[n - 1] * h.powu(n as u32 - 1)).norm();
            err = err.max(tail / scale);
            state[0][col] = y;
            state[1][col] = dy;
        }
        err
    }

    /// Continues the identity data at `path[0]` along the polyline.
    pub fn continue_along(&self, path: &[C]) -> Result<MonodromyMatrix, MonodromyError> {
        let mut state = [[C::new(1.0, 0.0), C::default(), C::default()], [C::default(), C::new(1.0, 0.0), C::default()]];
        let mut err = 0.0;
        for w in path.windows(2) {
            let (mut t, end) = (w[0], w[1]);
            while (end - t).norm() > 0.0 {
                let room = (end - t).norm();
                let hmax = self.cfg.step_fraction * self.distance(t);
                if hmax < 1e-12 {
                    return Err(MonodromyError::StepUnderflow { at: t });
                }
                let h = if room <= hmax { end - t } else { (end - t) * (hmax / room) };
                err += self.step(t, &mut state, h);
                t = if room <= hmax { end } else { t + h };
            }
        }
        let mut m = MonodromyMatrix::identity();
        for i in 0..2 {
            for j in 0..3 {
                m.m[i][j] = state[i][j];
            }
        }
        m.error_estimate = err;
        Ok(m)
    }
}

/// Polyline for a counterclockwise circle starting and ending at `start`.
fn circle(center: C, start: C, chords: usize, clockwise: bool) -> Vec<C> {
    let r = (start - center).norm();
    let a0 = (start - center).arg();
    let sign = if clockwise { -1.0 } else { 1.0 };
    (0..=chords).map(|k| center + C::from_polar(r, a0 + sign * 2.0 * PI * k as f64 / chords as f64)).collect()
}

fn segment_distance(a: C, b: C, s: C) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (s - a).norm();
    }
    let tau = (((s - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * tau - s).norm()
}

/// A loop based at `base` encircling `point` counterclockwise.
#[derive(Clone, Debug)]
pub struct Lasso {
    pub point: SingularPoint,
    pub radius: f64,
    pub path: Vec<C>,
}

/// Base point, lassos sorted by angle, and a clockwise loop enclosing every finite singular point.
#[derive(Clone, Debug)]
pub struct PathPlan {
    pub base: C,
    pub lassos: Vec<Lasso>,
    pub infinity_loop: Vec<C>,
}

impl PathPlan {
    pub fn new(points: &[SingularPoint], extra: &[C], chords: usize) -> Result<Self, MonodromyError> {
        let all: Vec<C> = points.iter().map(|p| p.root).chain(extra.iter().copied()).collect();
        let n = all.len().max(1) as f64;
        let center = all.iter().sum::<C>() / n;
        let spread = all.iter().map(|s| (s - center).norm()).fold(1.0, f64::max);
        for attempt in 0..20 {
            let base = center + C::new(spread * (0.1234567 + 0.071 * attempt as f64), -1.5 * spread);
            if let Some(plan) = Self::try_base(points, &all, base, center, chords) {
                return Ok(plan);
            }
        }
        Err(MonodromyError::NoBasePoint)
    }

    fn try_base(points: &[SingularPoint], all: &[C], base: C, center: C, chords: usize) -> Option<Self> {
        let mut lassos = Vec::new();
        let min_sep = |s: C| all.iter().filter(|o| (*o - s).norm() > 0.0).map(|o| (o - s).norm()).fold(f64::INFINITY, f64::min);
        for sp in points {
            let s = sp.root;
            let rho = 0.25 * min_sep(s).min((s - base).norm());
            let entry = s + (base - s) * (rho / (base - s).norm());
            for o in all {
                if (*o - s).norm() > 0.0 && segment_distance(base, entry, *o) < 0.05 * min_sep(*o) {
                    return None;
                }
            }
            let mut path = vec![base];
            path.extend(circle(s, entry, chords, false));
            path.push(base);
            lassos.push(Lasso { point: sp.clone(), radius: rho, path });
        }
        lassos.sort_by(|a, b| (a.point.root - base).arg().total_cmp(&(b.point.root - base).arg()));
        let big = 2.0 * (base - center).norm();
        let exit = center + (base - center) * (big / (base - center).norm());
        let mut infinity_loop = vec![base];
        infinity_loop.extend(circle(center, exit, 8 * chords, true));
        infinity_loop.push(base);
        Some(PathPlan { base, lassos, infinity_loop })
    }
}

/// Monodromy around each finite singular point and around infinity.
#[derive(Clone, Debug)]
pub struct MonodromyData {
    pub base: C,
    pub local: Vec<(SingularPoint, MonodromyMatrix)>,
    pub infinity: MonodromyMatrix,
    /// Max-norm distance of `M_inf * M_n * ... * M_1` from the identity.
    pub product_residual: f64,
    pub error_estimate: f64,
}

impl MonodromyData {
    /// `M_n * ... * M_1` over the lassos in angular order.
    pub fn ordered_product(&self) -> MonodromyMatrix {
        self.local.iter().fold(MonodromyMatrix::identity(), |acc, (_, m)| m.compose(&acc))
    }
}

fn run(op: &DiffOp2, z: Option<&RatFunc>, cfg: MonodromyConfig) -> Result<MonodromyData, MonodromyError> {
    let integ = Integrator::new(op, z, cfg);
    let points = singular_points(op);
    let extra: Vec<C> = integ.singular()[points.len()..].to_vec();
    let plan = PathPlan::new(&points, &extra, cfg.circle_chords)?;
    let mut local = Vec::new();
    let mut err = 0.0;
    for l in &plan.lassos {
        let m = integ.continue_along(&l.path)?;
        err += m.error_estimate;
        local.push((l.point.clone(), m));
    }
    let infinity = integ.continue_along(&plan.infinity_loop)?;
    err += infinity.error_estimate;
    let mut data = MonodromyData { base: plan.base, local, infinity, product_residual: 0.0, error_estimate: err };
    let total = data.infinity.compose(&data.ordered_product());
    data.product_residual = total.distance(&MonodromyMatrix::identity());
    Ok(data)
}

/// Local monodromies, retrying once at higher order when the error estimate exceeds `cfg.tol`.
pub fn local_monodromies(op: &DiffOp2, z: Option<&RatFunc>, cfg: MonodromyConfig) -> Result<MonodromyData, MonodromyError> {
    let first = run(op, z, cfg)?;
    if first.error_estimate <= cfg.tol {
        return Ok(first);
    }
    let finer = MonodromyConfig { order: cfg.order + 20, step_fraction: cfg.step_fraction * 0.7, ..cfg };
    let second = run(op, z, finer)?;
    if second.error_estimate <= cfg.tol {
        Ok(second)
    } else {
        Err(MonodromyError::ToleranceNotMet { achieved: second.error_estimate, tol: cfg.tol })
    }
}

/// Continuation along an arbitrary polyline.
pub fn integrate(op: &DiffOp2, z: Option<&RatFunc>, path: &[C], cfg: MonodromyConfig) -> Result<MonodromyMatrix, MonodromyError> {
    Integrator::new(op, z, cfg).continue_along(path)
}

/// `exp(-2 pi i res_s p)` for a simple pole `s` of `p`.
pub fn expected_determinant(op: &DiffOp2, s: C) -> C {
    let n = cpoly(op.p.num());
    let d = cpoly(op.p.den());
    let res = ceval(&n, s) / ceval(&cderiv(&d), s);
    (C::new(0.0, -2.0 * PI) * res).exp()
}

/// `exp(2 pi i lim t p(t))`, the determinant of the loop around infinity.
pub fn expected_determinant_at_infinity(op: &DiffOp2) -> C {
    let (n, d) = (op.p.num(), op.p.den());
    let lim = if n.deg() + 1 == d.deg() { rat_to_f64(&(n.leading() / d.leading())) } else { 0.0 };
    (C::new(0.0, 2.0 * PI * lim)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmanin::picard_fuchs;
    use crate::weiermodel::legendre;

    #[test]
    fn roots() {
        let p = Poly::from_ints(&[-6, 11, -6, 1]);
        let mut r: Vec<f64> = complex_roots(&p).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_and_divide() {
        let p = vec![C::new(1.0, 0.0), C::new(2.0, 0.0), C::new(3.0, 0.0)];
        let s = taylor_shift(&p, C::new(1.0, 0.0));
        assert_eq!(s, vec![C::new(6.0, 0.0), C::new(8.0, 0.0), C::new(3.0, 0.0)]);
        let inv = series_div(&[C::new(1.0, 0.0)], &[C::new(1.0, 0.0), C::new(-1.0, 0.0)], 5);
        assert!(inv.iter().all(|c| (c - C::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn legendre_monodromy() {
        let op = picard_fuchs(&legendre()).unwrap();
        let data = local_monodromies(&op, None, MonodromyConfig::default()).unwrap();
        assert_eq!(data.local.len(), 2);
        for (sp, m) in &data.local {
            assert!((m.trace() - C::new(2.0, 0.0)).norm() < 1e-6, "{sp:?}");
            assert!((m.det() - expected_determinant(&op, sp.root)).norm() < 1e-8);
        }
        assert!((data.infinity.trace() + C::new(2.0, 0.0)).norm() < 1e-6);
        assert!(data.product_residual < 1e-5);
        let empty = integrate(&op, None, &[data.base], MonodromyConfig::default()).unwrap();
        assert!(empty.distance(&MonodromyMatrix::identity()) < 1e-9);
    }
}
