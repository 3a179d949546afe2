//! Picard-Fuchs operators by Griffiths-Dwork style reduction, gauge changes,
//! local exponents and the section-to-rational-function map.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactcore::expansion::expand;
use crate::exactcore::rat::rat_sqrt;
use crate::exactcore::{int, rat, Place, Poly, Rat, RatFunc, Valuation};
use crate::localsolve;
use crate::weiermodel::{ModelError, Section, WeierstrassModel};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-generic reduction: {0}")]
    NonGenericReduction(String),
    #[error("irregular singularity at {place}")]
    IrregularSingularity { place: String },
    #[error("exponents at {place} are not rational")]
    NonRationalExponents { place: String },
    #[error("gauge factor is zero")]
    ZeroGauge,
    #[error("section meets the zero section identically")]
    ZeroDenominator,
}

/// The operator `D^2 + p D + q` with `D = d/dt`.
#[derive(Clone)]
pub struct DiffOp2 {
    pub p: RatFunc,
    pub q: RatFunc,
    places: Arc<OnceLock<Vec<Place>>>,
}

impl PartialEq for DiffOp2 {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q
    }
}

impl Eq for DiffOp2 {}

impl fmt::Debug for DiffOp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffOp2").field("p", &self.p).field("q", &self.q).finish()
    }
}

impl DiffOp2 {
    pub fn new(p: RatFunc, q: RatFunc) -> Self {
        DiffOp2 { p, q, places: Arc::default() }
    }

    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let d1 = f.derivative();
        let d2 = d1.derivative();
        d2 + &self.p * &d1 + &self.q * f
    }

    /// The operator in `u = 1/t`, acting on `f(1/u)`.
    pub fn at_infinity(&self) -> DiffOp2 {
        let u = RatFunc::var();
        let pi = self.p.invert_variable();
        let qi = self.q.invert_variable();
        let p_u = RatFunc::from_int(2) / &u - pi / (&u * &u);
        let q_u = qi / u.pow(4);
        DiffOp2::new(p_u, q_u)
    }

    /// Coefficients `(P2, P1, P0)` of `P2 D^2 + P1 D + P0`, integral and primitive with `P2` of positive leading coefficient.
    pub fn cleared(&self) -> (Poly, Poly, Poly) {
        let l = lcm(self.p.den(), self.q.den());
        let p1 = &self.p.num().clone() * &l.exact_div(self.p.den()).unwrap();
        let p0 = &self.q.num().clone() * &l.exact_div(self.q.den()).unwrap();
        let mut den = l.denominator_lcm();
        for x in [&p1, &p0] {
            den = num_integer::Integer::lcm(&den, &x.denominator_lcm());
        }
        let scale = Rat::from_integer(den);
        let (a, b, c) = (l.scale(&scale), p1.scale(&scale), p0.scale(&scale));
        let mut g = num_bigint::BigInt::zero();
        for x in [&a, &b, &c] {
            for co in x.coeffs() {
                g = num_integer::Integer::gcd(&g, co.numer());
            }
        }
        let inv = Rat::new(1.into(), g);
        (a.scale(&inv), b.scale(&inv), c.scale(&inv))
    }

    /// Finite places where `p` or `q` has a pole, then infinity if singular there.
    pub fn singular_places(&self) -> Vec<Place> {
        self.places.get_or_init(|| self.compute_singular_places()).clone()
    }

    fn compute_singular_places(&self) -> Vec<Place> {
        let mut out = crate::exactcore::place::places_of_poly(&lcm(self.p.den(), self.q.den()))
            .into_iter()
            .map(|(pl, _)| pl)
            .collect::<Vec<_>>();
        out.sort();
        let inf = self.at_infinity();
        let zero = Place::rational(Rat::zero());
        if zero.valuation(&inf.p) < Valuation::Finite(0) || zero.valuation(&inf.q) < Valuation::Finite(0) {
            out.push(Place::Infinity);
        }
        out
    }

    /// `(v(p), v(q))` in the local parameter at `place`.
    fn local_valuations(&self, place: &Place) -> (Valuation, Valuation) {
        match place {
            Place::Infinity => {
                let inf = self.at_infinity();
                let z = Place::rational(Rat::zero());
                (z.valuation(&inf.p), z.valuation(&inf.q))
            }
            _ => (place.valuation(&self.p), place.valuation(&self.q)),
        }
    }

    pub fn is_fuchsian_at(&self, place: &Place) -> bool {
        let (vp, vq) = self.local_valuations(place);
        vp >= Valuation::Finite(-1) && vq >= Valuation::Finite(-2)
    }

    pub fn is_fuchsian(&self) -> bool {
        self.singular_places().iter().all(|pl| self.is_fuchsian_at(pl))
    }

    /// The coefficients `(P0, Q0)` of the indicial polynomial `r(r-1) + P0 r + Q0`.
    pub fn indicial_coefficients(&self, place: &Place) -> Result<(Rat, Rat), OperatorError> {
        if !self.is_fuchsian_at(place) {
            return Err(OperatorError::IrregularSingularity { place: place.to_string() });
        }
        let (op, pl) = match place {
            Place::Infinity => (self.at_infinity(), Place::rational(Rat::zero())),
            _ => (self.clone(), place.clone()),
        };
        let sp = expand(&op.p, &pl, 1);
        let sq = expand(&op.q, &pl, 2);
        let (p0, q0) = (sp.coeff(-1), sq.coeff(-2));
        match (p0.as_rat(), q0.as_rat()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(OperatorError::NonRationalExponents { place: place.to_string() }),
        }
    }

    /// Roots `rho1 <= rho2` of the indicial polynomial.
    pub fn local_exponents(&self, place: &Place) -> Result<(Rat, Rat), OperatorError> {
        let (p0, q0) = self.indicial_coefficients(place)?;
        indicial_roots(&p0, &q0).ok_or_else(|| OperatorError::NonRationalExponents { place: place.to_string() })
    }

    pub fn display_with(&self, var: &str) -> String {
        format!("D^2 + ({})*D + ({})", self.p.display_with(var), self.q.display_with(var))
    }
}

impl fmt::Display for DiffOp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("t"))
    }
}

/// Rational roots `rho1 <= rho2` of `r^2 + (p0 - 1) r + q0`, if any.
pub fn indicial_roots(p0: &Rat, q0: &Rat) -> Option<(Rat, Rat)> {
    let b = p0 - Rat::one();
    let disc = &b * &b - Rat::from_integer(4.into()) * q0;
    let s = rat_sqrt(&disc)?;
    let two = int(2);
    Some(((-&b - &s) / &two, (-&b + &s) / &two))
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = Poly::gcd(a, b);
    (a * b).exact_div(&g).unwrap().monic()
}

pub fn gauge_transform(op: &DiffOp2, g: &RatFunc) -> Result<DiffOp2, OperatorError> {
    if g.is_zero() {
        return Err(OperatorError::ZeroGauge);
    }
    let l = &g.derivative() / g;
    let l2 = &g.derivative().derivative() / g;
    let p = &op.p - &(RatFunc::from_int(2) * &l);
    let q = &op.q - &(&op.p * &l) + RatFunc::from_int(2) * &l * &l - l2;
    Ok(DiffOp2::new(p, q))
}

/// Sum over all singular places of `deg * (rho1 + rho2 - 1)`, which is `-2` for a Fuchsian operator.
pub fn fuchs_relation_sum(op: &DiffOp2) -> Result<Rat, OperatorError> {
    let mut s = Rat::zero();
    for pl in op.singular_places() {
        let (a, b) = op.local_exponents(&pl)?;
        s += Rat::from_integer((pl.degree() as i64).into()) * (a + b - Rat::one());
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingKind {
    TrueSingular,
    Apparent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingPoint {
    pub place: Place,
    pub exponents: (Rat, Rat),
    pub kind: SingKind,
    pub logarithmic: bool,
}

pub fn classify_singularity(op: &DiffOp2, place: &Place, model: &WeierstrassModel) -> Result<SingPoint, OperatorError> {
    let exponents = op.local_exponents(place)?;
    let basis = localsolve::frobenius_basis(op, place, 8)?;
    let logarithmic = basis.1.log_degree > 0;
    let integral = exponents.0.is_integer() && exponents.1.is_integer() && exponents.0 >= Rat::zero();
    let kind = if model.is_good_at(place) && integral && !logarithmic {
        SingKind::Apparent
    } else {
        SingKind::TrueSingular
    };
    Ok(SingPoint { place: place.clone(), exponents, kind, logarithmic })
}

/// Polynomials in `x` over `Q(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct KPoly(Vec<RatFunc>);

impl KPoly {
    fn zero() -> Self {
        KPoly(Vec::new())
    }

    fn trimmed(mut v: Vec<RatFunc>) -> Self {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        KPoly(v)
    }

    fn constant(c: RatFunc) -> Self {
        KPoly::trimmed(vec![c])
    }

    fn deg(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    fn coeff(&self, i: usize) -> RatFunc {
        self.0.get(i).cloned().unwrap_or_else(RatFunc::zero)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, o: &KPoly) -> KPoly {
        let n = self.0.len().max(o.0.len());
        KPoly::trimmed((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    fn sub(&self, o: &KPoly) -> KPoly {
        self.add(&o.scale(&RatFunc::from_int(-1)))
    }

    fn scale(&self, c: &RatFunc) -> KPoly {
        KPoly::trimmed(self.0.iter().map(|a| a * c).collect())
    }

    fn mul(&self, o: &KPoly) -> KPoly {
        if self.is_zero() || o.is_zero() {
            return KPoly::zero();
        }
        let mut out = vec![RatFunc::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        KPoly::trimmed(out)
    }

    fn div_rem(&self, d: &KPoly) -> (KPoly, KPoly) {
        let dd = d.deg();
        assert!(dd >= 0);
        let lc_inv = d.0.last().unwrap().inv().unwrap();
        let mut r = self.0.clone();
        let mut q = vec![RatFunc::zero(); (self.deg() - dd + 1).max(0) as usize];
        while r.len() as i64 - 1 >= dd && !r.is_empty() {
            let k = r.len() - 1 - dd as usize;
            let c = r.last().unwrap() * &lc_inv;
            for (i, b) in d.0.iter().enumerate() {
                r[k + i] = &r[k + i] - &(&c * b);
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (KPoly::trimmed(q), KPoly::trimmed(r))
    }

    fn dx(&self) -> KPoly {
        KPoly::trimmed(self.0.iter().enumerate().skip(1).map(|(i, c)| c * &RatFunc::from_int(i as i64)).collect())
    }

    fn dt(&self) -> KPoly {
        KPoly::trimmed(self.0.iter().map(|c| c.derivative()).collect())
    }

    fn eval(&self, x: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero();
        for c in self.0.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }
}

/// Extended Euclid in `K[x]`: returns `(s, r)` with `s a + r b = 1`, or `None` if not coprime.
fn bezout(a: &KPoly, b: &KPoly) -> Option<(KPoly, KPoly)> {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (KPoly::constant(RatFunc::one()), KPoly::zero());
    let (mut t0, mut t1) = (KPoly::zero(), KPoly::constant(RatFunc::one()));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.deg() != 0 {
        return None;
    }
    let inv = r0.0[0].inv()?;
    Some((s0.scale(&inv), t0.scale(&inv)))
}

/// Cohomological reduction data for `y^2 = f(x)` over `Q(t)`.
struct Reducer {
    f: KPoly,
    fx: KPoly,
    /// `r` with `s f + r f_x = 1`.
    r: KPoly,
}

/// A form `sum_k A_k dx / y^(2k+1)`.
type Form = Vec<KPoly>;

/// Exact pieces `b / y^(2k-1)` (with coefficient) accumulated during reduction.
#[derive(Clone, Debug, Default)]
struct ExactPart {
    terms: Vec<(usize, KPoly)>,
}

impl ExactPart {
    fn eval(&self, x: &RatFunc, y: &RatFunc) -> RatFunc {
        let mut s = RatFunc::zero();
        for (k, b) in &self.terms {
            s = s + b.eval(x) / y.pow((2 * k - 1) as i32);
        }
        s
    }
}

impl Reducer {
    fn new(f: KPoly) -> Result<Self, OperatorError> {
        let fx = f.dx();
        let (_, r) = bezout(&f, &fx)
            .ok_or_else(|| OperatorError::NonGenericReduction("cubic and its x-derivative are not coprime".into()))?;
        Ok(Reducer { f, fx, r })
    }

    /// Reduces to `A_0 dx/y` with `deg A_0 <= 1`; returns `A_0` and `G` with `form = A_0 dx/y + dG`.
    fn reduce(&self, form: &Form) -> Result<(KPoly, ExactPart), OperatorError> {
        let mut form = form.clone();
        let mut exact = ExactPart::default();
        for k in (1..form.len()).rev() {
            let a_k = std::mem::replace(&mut form[k], KPoly::zero());
            if a_k.is_zero() {
                continue;
            }
            let b = a_k.mul(&self.r).div_rem(&self.f).1;
            let (a, rem) = a_k.sub(&b.mul(&self.fx)).div_rem(&self.f);
            if !rem.is_zero() {
                return Err(OperatorError::NonGenericReduction("Bezout decomposition failed".into()));
            }
            let c = RatFunc::constant(Rat::new(2.into(), (2 * k as i64 - 1).into()));
            let lowered = a.add(&b.dx().scale(&c));
            form[k - 1] = form[k - 1].add(&lowered);
            exact.terms.push((k, b.scale(&(-&c))));
        }
        let a0 = form.into_iter().next().unwrap_or_else(KPoly::zero);
        if a0.deg() > 1 {
            return Err(OperatorError::NonGenericReduction("residual numerator of degree above one".into()));
        }
        Ok((a0, exact))
    }
}

/// The cubic `f` with `y'^2 = f(x)` after `y' = y + (a1 x + a3)/2`.
fn model_cubic(model: &WeierstrassModel) -> Result<KPoly, OperatorError> {
    let inv = model.validate()?;
    let c = |r: Rat| RatFunc::constant(r);
    Ok(KPoly::trimmed(vec![
        &inv.b6 * &c(rat(1, 4)),
        &inv.b4 * &c(rat(1, 2)),
        &inv.b2 * &c(rat(1, 4)),
        RatFunc::one(),
    ]))
}

/// Everything needed by both the operator and the section map.
struct Derivation {
    op: DiffOp2,
    f: KPoly,
    reducer: Reducer,
}

fn derive(model: &WeierstrassModel) -> Result<Derivation, OperatorError> {
    let f = model_cubic(model)?;
    let reducer = Reducer::new(f.clone())?;
    let ft = f.dt();
    let ftt = ft.dt();
    let half = RatFunc::constant(rat(-1, 2));
    // d/dt (dx/y) = -1/2 f_t dx/y^3
    let d1: Form = vec![KPoly::zero(), ft.scale(&half)];
    // d^2/dt^2 (dx/y) = -1/2 f_tt dx/y^3 + 3/4 f_t^2 dx/y^5
    let d2: Form = vec![KPoly::zero(), ftt.scale(&half), ft.mul(&ft).scale(&RatFunc::constant(rat(3, 4)))];
    let (alpha, _) = reducer.reduce(&d1)?;
    let (beta, _) = reducer.reduce(&d2)?;
    let a1 = alpha.coeff(1);
    if a1.is_zero() {
        return Err(OperatorError::NonGenericReduction("d/dt of dx/y is proportional to dx/y".into()));
    }
    let p = -(&beta.coeff(1) / &a1);
    let q = -beta.coeff(0) - &p * &alpha.coeff(0);
    Ok(Derivation { op: DiffOp2::new(p, q), f, reducer })
}

/// The Picard-Fuchs operator annihilating the periods of `dx/y'`.
pub fn picard_fuchs(model: &WeierstrassModel) -> Result<DiffOp2, OperatorError> {
    Ok(derive(model)?.op)
}

/// `Z = Lambda(integral of dx/y' from the zero section to s)`, computed exactly.
///
/// `None` stands for the zero section. The operator must be the one returned by
/// [`picard_fuchs`] for this model.
pub fn manin_map(model: &WeierstrassModel, op: &DiffOp2, s: Option<&Section>) -> Result<RatFunc, OperatorError> {
    let Some(s) = s else { return Ok(RatFunc::zero()) };
    model.check_point(&s.x, &s.y)?;
    let der = derive(model)?;
    if &der.op != op {
        return Err(OperatorError::NonGenericReduction("operator does not match the model".into()));
    }
    let x = &s.x;
    let y = &s.y + &((&model.a1 * x + &model.a3) * RatFunc::constant(rat(1, 2)));
    if y.is_zero() {
        // points with y' = 0 are 2-torsion; the integral is a half period
        return Ok(RatFunc::zero());
    }
    let f = &der.f;
    let ft = f.dt();
    let ftt = ft.dt();
    let c = |r: Rat| RatFunc::constant(r);
    // Lambda applied to dx/y as a form: must reduce to an exact form dG
    let form: Form = vec![
        KPoly::constant(op.q.clone()),
        ftt.scale(&c(rat(-1, 2))).add(&ft.scale(&(&op.p * &c(rat(-1, 2))))),
        ft.mul(&ft).scale(&c(rat(3, 4))),
    ];
    let (residual, g) = der.reducer.reduce(&form)?;
    if !residual.is_zero() {
        return Err(OperatorError::NonGenericReduction("operator does not annihilate the class of dx/y".into()));
    }
    if g.terms.iter().any(|(k, b)| *k == 1 && b.deg() > 1) {
        return Err(OperatorError::NonGenericReduction("exact part has a pole at the zero section".into()));
    }
    let xp = x.derivative();
    let v = &xp / &y;
    let z = v.derivative() + (&op.p - &(ft.eval(x) * c(rat(1, 2)) / (&y * &y))) * &v + g.eval(x, &y);
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weiermodel::{add_points, hesse, hesse_torsion_section, legendre};

    fn legendre_op() -> DiffOp2 {
        let l = Poly::var();
        let one_minus = Poly::from_ints(&[1, -1]);
        let den = &l * &one_minus;
        DiffOp2::new(
            RatFunc::new(Poly::from_ints(&[1, -2]), den.clone()),
            RatFunc::new(Poly::constant(rat(-1, 4)), den),
        )
    }

    #[test]
    fn legendre_operator() {
        let op = picard_fuchs(&legendre()).unwrap();
        assert_eq!(op, legendre_op());
        let (a, b, c) = op.cleared();
        assert_eq!(a, Poly::from_ints(&[0, -4, 4]));
        assert_eq!(b, Poly::from_ints(&[-4, 8]));
        assert_eq!(c, Poly::from_ints(&[1]));
    }

    #[test]
    fn legendre_exponents() {
        let op = legendre_op();
        let z = Place::rational(int(0));
        assert_eq!(op.local_exponents(&z).unwrap(), (int(0), int(0)));
        assert_eq!(op.local_exponents(&Place::rational(int(1))).unwrap(), (int(0), int(0)));
        assert_eq!(op.local_exponents(&Place::Infinity).unwrap(), (rat(1, 2), rat(1, 2)));
        assert_eq!(op.local_exponents(&Place::rational(int(2))).unwrap(), (int(0), int(1)));
        assert_eq!(fuchs_relation_sum(&op).unwrap(), int(-2));
        assert_eq!(op.singular_places(), vec![z, Place::rational(int(1)), Place::Infinity]);
    }

    #[test]
    fn gauge_group_action() {
        let op = legendre_op();
        let g = RatFunc::var();
        let back = gauge_transform(&gauge_transform(&op, &g).unwrap(), &g.inv().unwrap()).unwrap();
        assert_eq!(back, op);
        assert_eq!(gauge_transform(&op, &RatFunc::one()).unwrap(), op);
        assert!(matches!(gauge_transform(&op, &RatFunc::zero()), Err(OperatorError::ZeroGauge)));
    }

    #[test]
    fn gauge_transports_solutions() {
        let op = DiffOp2::new(RatFunc::zero(), RatFunc::zero());
        let g = RatFunc::new(Poly::one(), Poly::from_ints(&[1, 1]));
        let gop = gauge_transform(&op, &g).unwrap();
        // f = t solves D^2; g f must solve the gauged operator
        let h = &g * &RatFunc::var();
        assert!(gop.apply(&h).is_zero());
    }

    #[test]
    fn manin_of_torsion() {
        let m = legendre();
        let op = picard_fuchs(&m).unwrap();
        assert!(manin_map(&m, &op, None).unwrap().is_zero());
        let p = Section::new(RatFunc::zero(), RatFunc::zero());
        assert!(manin_map(&m, &op, Some(&p)).unwrap().is_zero());
        let h = hesse();
        let hop = picard_fuchs(&h).unwrap();
        let s = hesse_torsion_section();
        assert!(manin_map(&h, &hop, Some(&s)).unwrap().is_zero());
    }

    #[test]
    fn manin_is_additive() {
        let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
        let op = picard_fuchs(&m).unwrap();
        let s = Section::new(RatFunc::zero(), RatFunc::one());
        let z = manin_map(&m, &op, Some(&s)).unwrap();
        assert!(!z.is_zero());
        let s2 = add_points(&m, Some(&s), Some(&s)).unwrap();
        let z2 = manin_map(&m, &op, Some(&s2)).unwrap();
        assert_eq!(z2, RatFunc::from_int(2) * &z);
        let neg = crate::weiermodel::negate_point(&m, &s);
        assert_eq!(manin_map(&m, &op, Some(&neg)).unwrap(), -z);
    }
}
