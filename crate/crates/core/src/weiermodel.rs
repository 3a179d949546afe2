//! Weierstrass models over `Q(t)`, minimal valuations and Kodaira types.

use std::fmt;

use crate::exactcore::place::{places_of_poly, Valuation};
use crate::exactcore::{Place, Poly, RatFunc};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("singular model: discriminant is zero ({invariant})")]
    SingularModel { invariant: String },
    #[error("isotrivial: j is constant (j = {j})")]
    Isotrivial { j: String },
    #[error("unclassified valuations (vc4, vc6, vdelta) = ({vc4}, {vc6}, {vdelta})")]
    UnclassifiedValuations { vc4: Valuation, vc6: Valuation, vdelta: Valuation },
    #[error("section ({x}, {y}) is not on the curve")]
    SectionNotOnCurve { x: String, y: String },
}

/// `y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6` over `Q(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassModel {
    pub a1: RatFunc,
    pub a2: RatFunc,
    pub a3: RatFunc,
    pub a4: RatFunc,
    pub a6: RatFunc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: RatFunc,
    pub b4: RatFunc,
    pub b6: RatFunc,
    pub b8: RatFunc,
    pub c4: RatFunc,
    pub c6: RatFunc,
    pub disc: RatFunc,
    pub j: RatFunc,
}

impl WeierstrassModel {
    pub fn new(a1: RatFunc, a2: RatFunc, a3: RatFunc, a4: RatFunc, a6: RatFunc) -> Self {
        WeierstrassModel { a1, a2, a3, a4, a6 }
    }

    /// `y^2 = x^3 + a x + b`.
    pub fn short(a: RatFunc, b: RatFunc) -> Self {
        WeierstrassModel::new(RatFunc::zero(), RatFunc::zero(), RatFunc::zero(), a, b)
    }

    pub fn coefficients(&self) -> [&RatFunc; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    /// `(b2, b4, b6, b8, c4, c6, disc)` without the smoothness check.
    fn raw_invariants(&self) -> (RatFunc, RatFunc, RatFunc, RatFunc, RatFunc, RatFunc, RatFunc) {
        let c = |n: i64| RatFunc::from_int(n);
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = a1 * a1 + c(4) * a2;
        let b4 = a1 * a3 + c(2) * a4;
        let b6 = a3 * a3 + c(4) * a6;
        let b8 = a1 * a1 * a6 + c(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - c(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + c(36) * &b2 * &b4 - c(216) * &b6;
        let disc = -(&b2 * &b2 * &b8) - c(8) * &b4 * &b4 * &b4 - c(27) * &b6 * &b6 + c(9) * &b2 * &b4 * &b6;
        (b2, b4, b6, b8, c4, c6, disc)
    }

    pub fn invariants(&self) -> Result<Invariants, ModelError> {
        let (b2, b4, b6, b8, c4, c6, disc) = self.raw_invariants();
        if disc.is_zero() {
            return Err(ModelError::SingularModel { invariant: format!("c4 = {c4}, c6 = {c6}") });
        }
        let j = &(&c4 * &c4) * &c4 / &disc;
        Ok(Invariants { b2, b4, b6, b8, c4, c6, disc, j })
    }

    pub fn discriminant(&self) -> RatFunc {
        self.raw_invariants().6
    }

    pub fn validate(&self) -> Result<Invariants, ModelError> {
        let inv = self.invariants()?;
        if inv.j.is_constant() {
            return Err(ModelError::Isotrivial { j: inv.j.to_string() });
        }
        Ok(inv)
    }

    /// Rescaling `x -> u^2 x, y -> u^3 y`: `a_i -> u^i a_i`.
    pub fn rescale(&self, u: &RatFunc) -> WeierstrassModel {
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        WeierstrassModel::new(u * &self.a1, &u2 * &self.a2, &u3 * &self.a3, &u4 * &self.a4, &u6 * &self.a6)
    }

    /// Base change `t -> g(t)`.
    pub fn substitute(&self, g: &RatFunc) -> WeierstrassModel {
        let s = |f: &RatFunc| f.compose(g);
        WeierstrassModel::new(s(&self.a1), s(&self.a2), s(&self.a3), s(&self.a4), s(&self.a6))
    }

    /// Left minus right side of the equation at `(x, y)`.
    pub fn equation_at(&self, x: &RatFunc, y: &RatFunc) -> RatFunc {
        let lhs = y * y + &self.a1 * x * y + &self.a3 * y;
        let rhs = x * x * x + &self.a2 * x * x + &self.a4 * x + &self.a6;
        lhs - rhs
    }

    pub fn check_point(&self, x: &RatFunc, y: &RatFunc) -> Result<(), ModelError> {
        if self.equation_at(x, y).is_zero() {
            Ok(())
        } else {
            Err(ModelError::SectionNotOnCurve { x: x.to_string(), y: y.to_string() })
        }
    }

    /// Valuations of the minimal model at `place`.
    pub fn minimalize_at(&self, place: &Place) -> MinimalValuations {
        let inv = self.invariants().expect("minimalize_at requires a smooth model");
        minimalize(&inv, place)
    }

    /// Candidate places for bad reduction: supports of `c4`, `c6`, `disc`, and infinity.
    fn candidate_places(inv: &Invariants) -> Vec<Place> {
        let mut polys: Vec<&Poly> = Vec::new();
        for f in [&inv.c4, &inv.c6, &inv.disc] {
            if !f.is_zero() {
                polys.push(f.num());
                polys.push(f.den());
            }
        }
        let mut out: Vec<Place> = Vec::new();
        for p in polys {
            for (pl, _) in places_of_poly(p) {
                if !out.contains(&pl) {
                    out.push(pl);
                }
            }
        }
        out.sort();
        out.push(Place::Infinity);
        out
    }

    pub fn bad_places(&self) -> Vec<Place> {
        self.fiber_table().into_iter().map(|d| d.place).collect()
    }

    /// Fiber data at every bad place, in place order.
    pub fn fiber_table(&self) -> Vec<LocalFiberData> {
        let inv = self.invariants().expect("fiber_table requires a smooth model");
        WeierstrassModel::candidate_places(&inv)
            .into_iter()
            .filter_map(|pl| {
                let mv = minimalize(&inv, &pl);
                (mv.vdelta > 0).then(|| local_fiber_data(pl, mv).expect("valuations of a minimal model classify"))
            })
            .collect()
    }

    /// Fiber data at one place (type I0 at good places).
    pub fn local_fiber_data(&self, place: &Place) -> Result<LocalFiberData, ModelError> {
        local_fiber_data(place.clone(), self.minimalize_at(place))
    }

    pub fn is_good_at(&self, place: &Place) -> bool {
        self.minimalize_at(place).vdelta == 0
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[a1, a2, a3, a4, a6] = [{}, {}, {}, {}, {}]",
            self.a1, self.a2, self.a3, self.a4, self.a6
        )
    }
}

/// Valuations of `c4`, `c6`, `disc` after the minimal twist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinimalValuations {
    pub vc4: Valuation,
    pub vc6: Valuation,
    pub vdelta: i64,
    pub twist: i64,
}

fn minimalize(inv: &Invariants, place: &Place) -> MinimalValuations {
    let vc4 = place.valuation(&inv.c4);
    let vc6 = place.valuation(&inv.c6);
    let vd = place.valuation(&inv.disc).expect_finite();
    let mut k = i64::MAX;
    if let Valuation::Finite(v) = vc4 {
        k = k.min(v.div_euclid(4));
    }
    if let Valuation::Finite(v) = vc6 {
        k = k.min(v.div_euclid(6));
    }
    if k == i64::MAX {
        k = vd.div_euclid(12);
    }
    let twist = -k;
    let shift = |v: Valuation, w: i64| match v {
        Valuation::Finite(x) => Valuation::Finite(x + w * twist),
        Valuation::Infinite => Valuation::Infinite,
    };
    MinimalValuations { vc4: shift(vc4, 4), vc6: shift(vc6, 6), vdelta: vd + 12 * twist, twist }
}

/// Kodaira fiber types in residue characteristic zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KodairaType {
    I0,
    I(u32),
    II,
    III,
    IV,
    I0Star,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl KodairaType {
    /// Number of irreducible components of the fiber.
    pub fn components(self) -> i64 {
        match self {
            KodairaType::I0 => 1,
            KodairaType::I(n) => n as i64,
            KodairaType::II => 1,
            KodairaType::III => 2,
            KodairaType::IV => 3,
            KodairaType::I0Star => 5,
            KodairaType::IStar(n) => 5 + n as i64,
            KodairaType::IVStar => 7,
            KodairaType::IIIStar => 8,
            KodairaType::IIStar => 9,
        }
    }

    /// Euler number of the fiber.
    pub fn euler(self) -> i64 {
        match self {
            KodairaType::I0 => 0,
            KodairaType::I(n) => n as i64,
            KodairaType::II => 2,
            KodairaType::III => 3,
            KodairaType::IV => 4,
            KodairaType::I0Star => 6,
            KodairaType::IStar(n) => 6 + n as i64,
            KodairaType::IVStar => 8,
            KodairaType::IIIStar => 9,
            KodairaType::IIStar => 10,
        }
    }

    /// Trace of the local monodromy.
    pub fn trace(self) -> i64 {
        match self {
            KodairaType::I0 | KodairaType::I(_) => 2,
            KodairaType::II => 1,
            KodairaType::III => 0,
            KodairaType::IV => -1,
            KodairaType::I0Star | KodairaType::IStar(_) => -2,
            KodairaType::IVStar => -1,
            KodairaType::IIIStar => 0,
            KodairaType::IIStar => 1,
        }
    }

    pub fn parse(s: &str) -> Option<KodairaType> {
        Some(match s {
            "I0" => KodairaType::I0,
            "II" => KodairaType::II,
            "III" => KodairaType::III,
            "IV" => KodairaType::IV,
            "I0*" => KodairaType::I0Star,
            "IV*" => KodairaType::IVStar,
            "III*" => KodairaType::IIIStar,
            "II*" => KodairaType::IIStar,
            _ => {
                let rest = s.strip_prefix('I')?;
                if let Some(n) = rest.strip_suffix('*') {
                    KodairaType::IStar(n.parse().ok().filter(|&n| n > 0)?)
                } else {
                    KodairaType::I(rest.parse().ok().filter(|&n| n > 0)?)
                }
            }
        })
    }
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaType::I0 => write!(f, "I0"),
            KodairaType::I(n) => write!(f, "I{n}"),
            KodairaType::II => write!(f, "II"),
            KodairaType::III => write!(f, "III"),
            KodairaType::IV => write!(f, "IV"),
            KodairaType::I0Star => write!(f, "I0*"),
            KodairaType::IStar(n) => write!(f, "I{n}*"),
            KodairaType::IVStar => write!(f, "IV*"),
            KodairaType::IIIStar => write!(f, "III*"),
            KodairaType::IIStar => write!(f, "II*"),
        }
    }
}

/// Classifies minimal valuations of `c4`, `c6`, `disc`.
pub fn kodaira_type(vc4: Valuation, vc6: Valuation, vdelta: i64) -> Result<KodairaType, ModelError> {
    let fin = |v: Valuation| v.finite().unwrap_or(i64::MAX);
    let (a, b, d) = (fin(vc4), fin(vc6), vdelta);
    let t = match () {
        _ if d == 0 => Some(KodairaType::I0),
        _ if a == 0 && d > 0 => Some(KodairaType::I(d as u32)),
        _ if b == 1 && d == 2 => Some(KodairaType::II),
        _ if a == 1 && d == 3 => Some(KodairaType::III),
        _ if b == 2 && d == 4 => Some(KodairaType::IV),
        _ if d == 6 && a >= 2 && b >= 3 && (a == 2 || b == 3) => Some(KodairaType::I0Star),
        _ if a == 2 && b == 3 && d > 6 => Some(KodairaType::IStar((d - 6) as u32)),
        _ if b == 4 && d == 8 => Some(KodairaType::IVStar),
        _ if a == 3 && d == 9 => Some(KodairaType::IIIStar),
        _ if b == 5 && d == 10 => Some(KodairaType::IIStar),
        _ => None,
    };
    t.ok_or(ModelError::UnclassifiedValuations { vc4, vc6, vdelta: Valuation::Finite(vdelta) })
}

/// Per-place fiber record of the minimal model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFiberData {
    pub place: Place,
    pub kodaira: KodairaType,
    pub vc4: Valuation,
    pub vc6: Valuation,
    pub vdelta: i64,
    pub twist: i64,
    pub m: i64,
    pub e_loc: i64,
    pub trace: i64,
}

fn local_fiber_data(place: Place, mv: MinimalValuations) -> Result<LocalFiberData, ModelError> {
    let kodaira = kodaira_type(mv.vc4, mv.vc6, mv.vdelta)?;
    Ok(LocalFiberData {
        place,
        kodaira,
        vc4: mv.vc4,
        vc6: mv.vc6,
        vdelta: mv.vdelta,
        twist: mv.twist,
        m: kodaira.components(),
        e_loc: kodaira.euler(),
        trace: kodaira.trace(),
    })
}

/// A point `(X, Y)` of the generic fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub x: RatFunc,
    pub y: RatFunc,
}

impl Section {
    pub fn new(x: RatFunc, y: RatFunc) -> Self {
        Section { x, y }
    }
}

/// Group law on the generic fiber; `None` is the zero section.
pub fn add_points(model: &WeierstrassModel, p: Option<&Section>, q: Option<&Section>) -> Option<Section> {
    let (p, q) = match (p, q) {
        (None, q) => return q.cloned(),
        (p, None) => return p.cloned(),
        (Some(p), Some(q)) => (p, q),
    };
    let WeierstrassModel { a1, a2, a3, a4, a6 } = model;
    let neg_qy = -&q.y - a1 * &q.x - a3;
    let (lambda, nu) = if p.x == q.x {
        if p.y == neg_qy {
            return None;
        }
        let num = RatFunc::from_int(3) * &p.x * &p.x + RatFunc::from_int(2) * a2 * &p.x + a4 - a1 * &p.y;
        let den = RatFunc::from_int(2) * &p.y + a1 * &p.x + a3;
        let l = &num / &den;
        let nu = (-(&p.x * &p.x * &p.x) + a4 * &p.x + RatFunc::from_int(2) * a6 - a3 * &p.y) / den;
        (l, nu)
    } else {
        let l = (&q.y - &p.y) / (&q.x - &p.x);
        let nu = (&p.y * &q.x - &q.y * &p.x) / (&q.x - &p.x);
        (l, nu)
    };
    let x3 = &lambda * &lambda + a1 * &lambda - a2 - &p.x - &q.x;
    let y3 = -(&lambda + a1) * &x3 - &nu - a3;
    Some(Section::new(x3, y3))
}

pub fn negate_point(model: &WeierstrassModel, p: &Section) -> Section {
    Section::new(p.x.clone(), -&p.y - &model.a1 * &p.x - &model.a3)
}

/// The Legendre family `y^2 = x (x - 1)(x - l)`.
pub fn legendre() -> WeierstrassModel {
    let l = RatFunc::var();
    WeierstrassModel::new(
        RatFunc::zero(),
        -(RatFunc::one() + &l),
        RatFunc::zero(),
        l,
        RatFunc::zero(),
    )
}

/// Weierstrass form of the Hesse pencil `x^3 + y^3 + 1 = m x y`, from the flex `(1 : -1 : 0)`.
pub fn hesse() -> WeierstrassModel {
    let m = RatFunc::var();
    let m3 = m.pow(3);
    let k = &m3 - &RatFunc::from_int(27);
    WeierstrassModel::new(
        RatFunc::one(),
        RatFunc::from_int(-27) / &m3,
        RatFunc::zero(),
        RatFunc::from_int(-9) * &k / m.pow(6),
        -(&k * &k) / m.pow(9),
    )
}

/// The rational 3-torsion section of [`hesse`] coming from `(1 : 0 : -1)`.
pub fn hesse_torsion_section() -> Section {
    let m = RatFunc::var();
    let m3 = m.pow(3);
    let k = &m3 - &RatFunc::from_int(27);
    let u = RatFunc::one() / (RatFunc::from_int(3) - &m);
    let x = -(&u * &k) / &m3;
    let y = &u * &k / &m3;
    Section::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::rat::{int, rat};

    fn t() -> RatFunc {
        RatFunc::var()
    }

    #[test]
    fn legendre_invariants() {
        let inv = legendre().validate().unwrap();
        assert_eq!(inv.c4, RatFunc::from_poly(Poly::from_ints(&[16, -16, 16])));
        assert_eq!(inv.disc, RatFunc::from_poly(Poly::from_ints(&[0, 0, 16, -32, 16])));
        let lhs = &inv.c4 * &inv.c4 * &inv.c4 - &inv.c6 * &inv.c6;
        assert_eq!(lhs, RatFunc::from_int(1728) * &inv.disc);
    }

    #[test]
    fn short_form_invariants() {
        let m = WeierstrassModel::short(t(), RatFunc::one());
        let inv = m.validate().unwrap();
        assert_eq!(inv.c4, RatFunc::from_int(-48) * &t());
        assert_eq!(inv.c6, RatFunc::from_int(-864));
        assert_eq!(inv.disc, RatFunc::from_poly(Poly::from_ints(&[-432, 0, 0, -64])));
    }

    #[test]
    fn isotrivial_and_singular_rejected() {
        let m = WeierstrassModel::short(RatFunc::zero(), RatFunc::one());
        assert!(matches!(m.validate(), Err(ModelError::Isotrivial { .. })));
        assert_eq!(m.invariants().unwrap().disc, RatFunc::from_int(-432));
        let c = WeierstrassModel::short(RatFunc::zero(), RatFunc::zero());
        assert!(matches!(c.validate(), Err(ModelError::SingularModel { .. })));
    }

    #[test]
    fn legendre_fibers() {
        let table = legendre().fiber_table();
        let types: Vec<String> = table.iter().map(|d| d.kodaira.to_string()).collect();
        assert_eq!(types, vec!["I2", "I2", "I2*"]);
        assert_eq!(table[0].place, Place::rational(int(0)));
        assert_eq!(table[1].place, Place::rational(int(1)));
        let inf = &table[2];
        assert_eq!((inf.vc4, inf.vdelta, inf.twist), (Valuation::Finite(2), 8, 1));
    }

    #[test]
    fn rank_one_fibers() {
        let m = WeierstrassModel::short(t(), RatFunc::one());
        let table = m.fiber_table();
        assert_eq!(table.len(), 2);
        assert_eq!(table[0].place.polynomial().unwrap(), &Poly::from_coeffs(vec![rat(27, 4), int(0), int(0), int(1)]));
        assert_eq!(table[0].kodaira, KodairaType::I(1));
        let mv = m.minimalize_at(&Place::Infinity);
        assert_eq!((mv.vc4, mv.vc6, mv.vdelta, mv.twist), (Valuation::Finite(3), Valuation::Finite(6), 9, 1));
        assert_eq!(table[1].kodaira, KodairaType::IIIStar);
    }

    #[test]
    fn hesse_fibers_and_torsion() {
        let m = hesse();
        let inv = m.validate().unwrap();
        assert_eq!(inv.j.height_degree(), 12);
        let table = m.fiber_table();
        let names: Vec<String> = table.iter().map(|d| format!("{}:{}", d.place, d.kodaira)).collect();
        assert_eq!(names, vec!["t - 3:I3", "t^2 + 3*t + 9:I3", "infinity:I3"]);
        let s = hesse_torsion_section();
        m.check_point(&s.x, &s.y).unwrap();
        let s2 = add_points(&m, Some(&s), Some(&s)).unwrap();
        assert!(add_points(&m, Some(&s2), Some(&s)).is_none());
    }

    #[test]
    fn kodaira_table_examples() {
        let f = Valuation::Finite;
        assert_eq!(kodaira_type(f(0), f(0), 2).unwrap(), KodairaType::I(2));
        assert_eq!(kodaira_type(f(2), f(3), 8).unwrap(), KodairaType::IStar(2));
        assert_eq!(kodaira_type(f(3), f(6), 9).unwrap(), KodairaType::IIIStar);
        assert!(kodaira_type(f(5), f(7), 14).is_err());
        for s in ["I0", "I5", "II", "I0*", "I3*", "II*"] {
            assert_eq!(KodairaType::parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn group_law_legendre_two_torsion() {
        let m = legendre();
        let p = Section::new(RatFunc::zero(), RatFunc::zero());
        assert!(add_points(&m, Some(&p), Some(&p)).is_none());
        let q = Section::new(RatFunc::one(), RatFunc::zero());
        let r = add_points(&m, Some(&p), Some(&q)).unwrap();
        assert_eq!(r, Section::new(t(), RatFunc::zero()));
    }
}
