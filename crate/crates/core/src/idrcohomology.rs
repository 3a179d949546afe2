//! Inhomogeneous de Rham cohomology: locally exact functions modulo
//! globally exact ones, on pole-bounded subspaces, and the Hodge-divisor search.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::exactcore::expansion::expand;
use crate::exactcore::linalg::{rank_of, row_basis, Matrix};
use crate::exactcore::{Place, Poly, Rat, RatFunc};
use crate::gaussmanin::{DiffOp2, OperatorError};
use crate::invariants::surface_invariants;
use crate::localsolve::{self, local_obstructions, ExactnessCertificate, LocalOperator};
use crate::weiermodel::WeierstrassModel;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum IdrError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("search exhausted at total degree {bound}: {what}")]
    SearchExhausted { bound: i64, what: String },
}

/// Shift between function and quadratic-differential pole orders at infinity.
pub const INFINITY_SHIFT: i64 = 4;

/// Allowed pole orders of `Z`, in function normalization (`Z` itself, not `Z dt^2`).
///
/// Finite orders are nonnegative; the order at infinity may be negative,
/// meaning `Z` must vanish there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoleDivisor {
    finite: BTreeMap<Place, i64>,
    infinity: i64,
}

impl PoleDivisor {
    /// The divisor with no poles allowed at finite places and `Z` bounded at infinity.
    pub fn zero() -> Self {
        PoleDivisor { finite: BTreeMap::new(), infinity: 0 }
    }

    pub fn new(finite: BTreeMap<Place, i64>, infinity: i64) -> Self {
        let finite = finite.into_iter().filter(|(p, v)| *v != 0 && !p.is_infinity()).collect::<BTreeMap<_, _>>();
        assert!(finite.values().all(|&v| v > 0), "finite pole orders must be nonnegative");
        PoleDivisor { finite, infinity }
    }

    /// From quadratic-differential orders (all nonnegative).
    pub fn from_intrinsic(orders: &[(Place, i64)]) -> Self {
        let mut finite = BTreeMap::new();
        let mut infinity = -INFINITY_SHIFT;
        for (p, v) in orders {
            if p.is_infinity() {
                infinity = v - INFINITY_SHIFT;
            } else if *v > 0 {
                finite.insert(p.clone(), *v);
            }
        }
        PoleDivisor { finite, infinity }
    }

    pub fn order(&self, place: &Place) -> i64 {
        match place {
            Place::Infinity => self.infinity,
            _ => self.finite.get(place).copied().unwrap_or(0),
        }
    }

    pub fn intrinsic_order(&self, place: &Place) -> i64 {
        match place {
            Place::Infinity => self.infinity + INFINITY_SHIFT,
            _ => self.order(place),
        }
    }

    pub fn finite_places(&self) -> impl Iterator<Item = (&Place, &i64)> {
        self.finite.iter()
    }

    /// `sum deg(P) * order` in quadratic-differential normalization.
    pub fn intrinsic_degree(&self) -> i64 {
        self.finite.iter().map(|(p, v)| p.degree() as i64 * v).sum::<i64>() + self.infinity + INFINITY_SHIFT
    }

    /// `dim L(D)` over `Q`.
    pub fn dimension(&self) -> i64 {
        let fin: i64 = self.finite.iter().map(|(p, v)| p.degree() as i64 * v).sum();
        (fin + self.infinity + 1).max(0)
    }

    pub fn le(&self, other: &PoleDivisor) -> bool {
        self.infinity <= other.infinity && self.finite.iter().all(|(p, v)| *v <= other.order(p))
    }

    /// Display in both normalizations.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.finite.iter().map(|(p, v)| format!("{v}*[{p}]")).collect();
        parts.push(format!("{}*[infinity]", self.infinity));
        let fun = parts.join(" + ");
        let mut ip: Vec<String> = self.finite.iter().map(|(p, v)| format!("{v}*[{p}]")).collect();
        ip.push(format!("{}*[infinity]", self.infinity + INFINITY_SHIFT));
        format!("function: {fun}; quadratic differential: {}", ip.join(" + "))
    }
}

impl fmt::Display for PoleDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Basis functions of `L(D)`: `t^i / pi^k` for `i < deg pi`, `1 <= k <= D_pi`, then `t^j` for `j <= D_inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum BasisKey {
    Frac(Place, u32, u32),
    Mono(u32),
}

impl BasisKey {
    fn function(&self) -> RatFunc {
        match self {
            BasisKey::Frac(p, k, i) => {
                RatFunc::new(Poly::monomial(Rat::one(), *i as usize), p.polynomial().unwrap().pow(*k))
            }
            BasisKey::Mono(j) => RatFunc::from_poly(Poly::monomial(Rat::one(), *j as usize)),
        }
    }
}

fn basis_keys(finite: &[(Place, i64)], infinity: i64) -> Vec<BasisKey> {
    let mut keys = Vec::new();
    for (p, v) in finite {
        for k in 1..=*v {
            for i in 0..p.degree() {
                keys.push(BasisKey::Frac(p.clone(), k as u32, i as u32));
            }
        }
    }
    for j in 0..=infinity {
        keys.push(BasisKey::Mono(j as u32));
    }
    keys
}

/// Cached local data for repeated cohomology computations with one operator.
pub struct IdrContext {
    op: DiffOp2,
    places: Vec<Place>,
    locals: Vec<LocalOperator>,
    obstruction_cache: HashMap<BasisKey, Vec<Rat>>,
    image_cache: HashMap<BasisKey, RatFunc>,
}

/// One evaluated pole-bounded subspace.
#[derive(Clone, Debug)]
pub struct IdrSpace {
    pub divisor: PoleDivisor,
    /// Basis of `L(D)`.
    pub ambient: Vec<RatFunc>,
    /// Basis of the locally exact subspace.
    pub parabolic: Vec<RatFunc>,
    /// Basis of `Lambda K(X) ∩ L(D)`.
    pub exact: Vec<RatFunc>,
    /// Parabolic elements spanning a complement of the exact subspace.
    pub representatives: Vec<RatFunc>,
}

impl IdrSpace {
    pub fn dimension(&self) -> usize {
        self.representatives.len()
    }

    /// `(Z in parabolic span, Z in exact span)`.
    pub fn membership(&self, z: &RatFunc) -> (bool, bool) {
        (in_span(&self.parabolic, z), in_span(&self.exact, z))
    }
}

/// Whether `z` lies in the `Q`-span of `fs`.
pub fn in_span(fs: &[RatFunc], z: &RatFunc) -> bool {
    if z.is_zero() {
        return true;
    }
    if fs.is_empty() {
        return false;
    }
    let (cols, rhs) = localsolve::common_numerators(fs, z);
    Matrix::from_columns(&cols, rhs.len()).solve(&rhs).is_some()
}

impl IdrContext {
    /// Context tracking the singular places of `op`, infinity, and any `extra` places.
    pub fn new(op: &DiffOp2, extra: &[Place]) -> Result<Self, OperatorError> {
        let mut places = op.singular_places();
        for p in extra.iter().chain(std::iter::once(&Place::Infinity)) {
            if !places.contains(p) {
                places.push(p.clone());
            }
        }
        places.sort();
        let locals = places.iter().map(|p| LocalOperator::new(op, p)).collect::<Result<Vec<_>, _>>()?;
        Ok(IdrContext {
            op: op.clone(),
            places,
            locals,
            obstruction_cache: HashMap::new(),
            image_cache: HashMap::new(),
        })
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn operator(&self) -> &DiffOp2 {
        &self.op
    }

    /// Concatenated obstruction functionals of `z` over all tracked places.
    pub fn obstruction_vector(&mut self, z: &RatFunc) -> Vec<Rat> {
        let mut out = Vec::new();
        for lo in self.locals.iter_mut() {
            for o in local_obstructions(lo, z) {
                out.extend(o.coordinates());
            }
        }
        out
    }

    pub fn certificates(&mut self, z: &RatFunc) -> Vec<ExactnessCertificate> {
        self.locals.iter_mut().map(|lo| localsolve::local_certificate(lo, z)).collect()
    }

    fn cached_obstruction(&mut self, key: &BasisKey) -> Vec<Rat> {
        if let Some(v) = self.obstruction_cache.get(key) {
            return v.clone();
        }
        let v = self.obstruction_vector(&key.function());
        self.obstruction_cache.insert(key.clone(), v.clone());
        v
    }

    fn cached_image(&mut self, key: &BasisKey) -> RatFunc {
        if let Some(v) = self.image_cache.get(key) {
            return v.clone();
        }
        let v = self.op.apply(&key.function());
        self.image_cache.insert(key.clone(), v.clone());
        v
    }

    fn ensure_places(&mut self, d: &PoleDivisor) -> Result<(), OperatorError> {
        let missing: Vec<Place> = d.finite_places().map(|(p, _)| p.clone()).filter(|p| !self.places.contains(p)).collect();
        if missing.is_empty() {
            return Ok(());
        }
        for p in missing {
            self.places.push(p);
        }
        self.places.sort();
        self.locals = self.places.iter().map(|p| LocalOperator::new(&self.op, p)).collect::<Result<Vec<_>, _>>()?;
        self.obstruction_cache.clear();
        Ok(())
    }

    /// Pole bounds on `g` such that `Lambda g` can lie in `L(D)`.
    fn induced_divisor(&self, d: &PoleDivisor) -> Result<(Vec<(Place, i64)>, i64), OperatorError> {
        let mut finite = Vec::new();
        for p in self.places.iter().filter(|p| !p.is_infinity()) {
            let m = (d.order(p) - 2).max(localsolve::exponent_pole_bound(&self.op, p)?).max(0);
            if m > 0 {
                finite.push((p.clone(), m));
            }
        }
        let m_inf = localsolve::exponent_pole_bound(&self.op, &Place::Infinity)?;
        Ok((finite, (d.infinity + 2).max(m_inf)))
    }

    /// Parabolic, exact and quotient data for `L(D)`.
    pub fn space(&mut self, d: &PoleDivisor) -> Result<IdrSpace, OperatorError> {
        self.ensure_places(d)?;
        let finite: Vec<(Place, i64)> = d.finite_places().map(|(p, v)| (p.clone(), *v)).collect();
        let keys = basis_keys(&finite, d.infinity.max(-1));
        let ambient_fns: Vec<RatFunc> = keys.iter().map(|k| k.function()).collect();
        let n = keys.len();
        // subspace V of the ambient span satisfying the vanishing order at infinity
        let vbasis: Vec<Vec<Rat>> = if d.infinity >= -1 || n == 0 {
            (0..n).map(|i| unit(n, i)).collect()
        } else {
            let w = -d.infinity;
            let rows: Vec<Vec<Rat>> = (1..w)
                .map(|ord| {
                    ambient_fns
                        .iter()
                        .map(|f| {
                            let s = expand(f, &Place::Infinity, w as usize + 1);
                            if ord < s.prec() { s.coeff(ord).as_rat().unwrap() } else { Rat::zero() }
                        })
                        .collect()
                })
                .collect();
            Matrix::from_rows(rows, n).nullspace()
        };
        let combine = |coords: &[Rat]| -> RatFunc {
            let mut acc = RatFunc::zero();
            for (c, f) in coords.iter().zip(&ambient_fns) {
                if !c.is_zero() {
                    acc = acc + f.scale(c);
                }
            }
            acc
        };
        let ambient: Vec<RatFunc> = vbasis.iter().map(|v| combine(v)).collect();
        if vbasis.is_empty() {
            return Ok(IdrSpace {
                divisor: d.clone(),
                ambient,
                parabolic: Vec::new(),
                exact: Vec::new(),
                representatives: Vec::new(),
            });
        }
        // obstruction matrix on V
        let ob_cols: Vec<Vec<Rat>> = keys.iter().map(|k| self.cached_obstruction(k)).collect();
        let nrows = ob_cols.first().map_or(0, |c| c.len());
        let parabolic_coords: Vec<Vec<Rat>> = if nrows == 0 {
            vbasis.clone()
        } else {
            let o = Matrix::from_columns(&ob_cols, nrows);
            let on_v: Vec<Vec<Rat>> = vbasis.iter().map(|v| o.mul_vec(v)).collect();
            let m = Matrix::from_columns(&on_v, nrows);
            m.nullspace().iter().map(|w| lin_comb(&vbasis, w)).collect()
        };
        // exact intersection
        let (gfin, ginf) = self.induced_divisor(d)?;
        let gkeys = basis_keys(&gfin, ginf);
        let images: Vec<RatFunc> = gkeys.iter().map(|k| self.cached_image(k)).collect();
        let exact_coords: Vec<Vec<Rat>> = if images.is_empty() {
            Vec::new()
        } else {
            let mut all: Vec<RatFunc> = images.clone();
            all.extend(ambient.iter().cloned());
            let (cols, _) = localsolve::common_numerators(&all, &RatFunc::one());
            let rows = cols[0].len();
            let mut mcols = cols[..images.len()].to_vec();
            for c in &cols[images.len()..] {
                mcols.push(c.iter().map(|x| -x).collect());
            }
            let m = Matrix::from_columns(&mcols, rows);
            let ns = m.nullspace();
            let ys: Vec<Vec<Rat>> = ns.iter().map(|v| lin_comb(&vbasis, &v[images.len()..])).collect();
            row_basis(&ys)
        };
        let parabolic_coords = row_basis(&parabolic_coords);
        let mut reps = Vec::new();
        let mut span = exact_coords.clone();
        let mut r = rank_of(&span);
        for p in &parabolic_coords {
            span.push(p.clone());
            let r2 = rank_of(&span);
            if r2 > r {
                reps.push(p.clone());
                r = r2;
            } else {
                span.pop();
            }
        }
        debug_assert_eq!(rank_of(&[parabolic_coords.clone(), exact_coords.clone()].concat()), parabolic_coords.len());
        Ok(IdrSpace {
            divisor: d.clone(),
            ambient,
            parabolic: parabolic_coords.iter().map(|c| combine(c)).collect(),
            exact: exact_coords.iter().map(|c| combine(c)).collect(),
            representatives: reps.iter().map(|c| combine(c)).collect(),
        })
    }
}

fn unit(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    v[i] = Rat::one();
    v
}

fn lin_comb(vs: &[Vec<Rat>], w: &[Rat]) -> Vec<Rat> {
    let n = vs.first().map_or(0, |v| v.len());
    let mut out = vec![Rat::zero(); n];
    for (v, c) in vs.iter().zip(w) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// `b2 - 2 - sum (m - 1)`, the dimension of `H^1(X, R^1 pi_* Q)`.
pub fn expected_dimension(model: &WeierstrassModel) -> Result<i64, IdrError> {
    let s = surface_invariants(model).map_err(OperatorError::from)?;
    Ok(s.b2 - 2 - s.sum_m_minus_1)
}

/// Basis of the locally exact functions in `L(D)`.
pub fn parabolic_subspace(op: &DiffOp2, d: &PoleDivisor) -> Result<Vec<RatFunc>, OperatorError> {
    let extra: Vec<Place> = d.finite_places().map(|(p, _)| p.clone()).collect();
    Ok(IdrContext::new(op, &extra)?.space(d)?.parabolic)
}

/// Dimension and representatives of parabolic modulo exact in `L(D)`.
pub fn idr_quotient(op: &DiffOp2, d: &PoleDivisor) -> Result<(usize, Vec<RatFunc>), OperatorError> {
    let extra: Vec<Place> = d.finite_places().map(|(p, _)| p.clone()).collect();
    let s = IdrContext::new(op, &extra)?.space(d)?;
    Ok((s.dimension(), s.representatives))
}

/// A rational function with its local exactness certificates and global exactness.
#[derive(Clone, Debug)]
pub struct IdrClass {
    pub z: RatFunc,
    pub certificates: Vec<ExactnessCertificate>,
    pub is_exact: bool,
}

impl IdrClass {
    pub fn is_parabolic(&self) -> bool {
        self.certificates.iter().all(|c| c.locally_exact)
    }
}

pub fn classify_class(op: &DiffOp2, z: &RatFunc) -> Result<IdrClass, OperatorError> {
    let certificates = localsolve::certificates(op, z)?;
    let is_exact = localsolve::rational_solutions(op, z)?.is_some();
    Ok(IdrClass { z: z.clone(), certificates, is_exact })
}

/// Intrinsic (quadratic-differential) pole vectors over `places` with weighted degree `total`, lexicographically ascending.
fn lattice_level(places: &[Place], total: i64) -> Vec<Vec<i64>> {
    fn rec(places: &[Place], idx: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if idx == places.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = places[idx].degree() as i64;
        let mut k = 0;
        while k * w <= left {
            cur.push(k);
            rec(places, idx + 1, left - k * w, cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(places, 0, total, &mut Vec::new(), &mut out);
    out
}

fn divisor_of(places: &[Place], v: &[i64]) -> PoleDivisor {
    let pairs: Vec<(Place, i64)> = places.iter().cloned().zip(v.iter().copied()).collect();
    PoleDivisor::from_intrinsic(&pairs)
}

/// Result of the Hodge-divisor search.
#[derive(Clone, Debug)]
pub struct HodgeSearch {
    pub p_g: i64,
    pub h11_prime: i64,
    pub expected: i64,
    pub a0: PoleDivisor,
    pub a: PoleDivisor,
    /// Basis of `L(A0)` ∩ parabolic.
    pub a0_basis: Vec<RatFunc>,
    /// Representatives of parabolic modulo exact in `L(A)`.
    pub a_basis: Vec<RatFunc>,
    /// Smallest divisor found whose quotient reaches the expected dimension.
    pub stabilized: Option<(PoleDivisor, usize)>,
}

/// Iterative deepening over intrinsic pole-order vectors on the singular places and infinity.
pub fn hodge_search(model: &WeierstrassModel, op: &DiffOp2, bound: i64) -> Result<HodgeSearch, IdrError> {
    let s = surface_invariants(model).map_err(OperatorError::from)?;
    let expected = s.b2 - 2 - s.sum_m_minus_1;
    let p_g = s.p_g;
    let h11_prime = expected - 2 * p_g;
    let mut ctx = IdrContext::new(op, &[])?;
    let places: Vec<Place> = ctx.places().to_vec();
    let mut memo: HashMap<Vec<i64>, IdrSpace> = HashMap::new();
    let mut eval = |ctx: &mut IdrContext, v: &[i64]| -> Result<IdrSpace, IdrError> {
        if let Some(sp) = memo.get(v) {
            return Ok(sp.clone());
        }
        let sp = ctx.space(&divisor_of(&places, v))?;
        memo.insert(v.to_vec(), sp.clone());
        Ok(sp)
    };
    let mut a0: Option<(Vec<i64>, IdrSpace)> = None;
    'outer: for total in 0..=bound {
        for v in lattice_level(&places, total) {
            let sp = eval(&mut ctx, &v)?;
            if sp.parabolic.len() as i64 == p_g && sp.exact.is_empty() {
                a0 = Some((v, sp));
                break 'outer;
            }
        }
    }
    let Some((v0, sp0)) = a0 else {
        return Err(IdrError::SearchExhausted { bound, what: format!("no divisor with {p_g}-dimensional parabolic space and no exact classes") });
    };
    let target = (p_g + h11_prime) as usize;
    let mut a: Option<(Vec<i64>, IdrSpace)> = None;
    let base: i64 = v0.iter().zip(&places).map(|(k, p)| k * p.degree() as i64).sum();
    'outer2: for total in base..=bound {
        for v in lattice_level(&places, total) {
            if v.iter().zip(&v0).any(|(x, y)| x < y) {
                continue;
            }
            let sp = eval(&mut ctx, &v)?;
            if sp.dimension() == target {
                a = Some((v, sp));
                break 'outer2;
            }
        }
    }
    let Some((va, spa)) = a else {
        return Err(IdrError::SearchExhausted { bound, what: format!("no divisor with quotient dimension {target}") });
    };
    let mut stabilized = None;
    'outer3: for total in 0..=bound {
        for v in lattice_level(&places, total) {
            let sp = eval(&mut ctx, &v)?;
            if sp.dimension() as i64 >= expected {
                stabilized = Some((sp.divisor.clone(), sp.dimension()));
                break 'outer3;
            }
        }
    }
    Ok(HodgeSearch {
        p_g,
        h11_prime,
        expected,
        a0: divisor_of(&places, &v0),
        a: divisor_of(&places, &va),
        a0_basis: sp0.parabolic,
        a_basis: spa.representatives,
        stabilized,
    })
}

/// Smallest divisor (by intrinsic degree, then lexicographically) on the tracked places whose quotient reaches `target`.
pub fn stabilization_search(op: &DiffOp2, target: usize, bound: i64) -> Result<IdrSpace, IdrError> {
    let mut ctx = IdrContext::new(op, &[])?;
    let places: Vec<Place> = ctx.places().to_vec();
    for total in 0..=bound {
        for v in lattice_level(&places, total) {
            let sp = ctx.space(&divisor_of(&places, &v))?;
            if sp.dimension() >= target {
                return Ok(sp);
            }
        }
    }
    Err(IdrError::SearchExhausted { bound, what: format!("quotient dimension {target} not reached") })
}

/// All intrinsic divisors on the tracked places with weighted degree at most `bound`.
pub fn lattice(places: &[Place], bound: i64) -> Vec<PoleDivisor> {
    (0..=bound).flat_map(|t| lattice_level(places, t).into_iter().map(|v| divisor_of(places, &v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::int;
    use crate::gaussmanin::{manin_map, picard_fuchs};
    use crate::weiermodel::{legendre, Section};

    #[test]
    fn divisor_normalizations() {
        let d = PoleDivisor::from_intrinsic(&[(Place::rational(int(0)), 2), (Place::Infinity, 3)]);
        assert_eq!(d.order(&Place::Infinity), -1);
        assert_eq!(d.intrinsic_order(&Place::Infinity), 3);
        assert_eq!(d.intrinsic_degree(), 5);
        assert_eq!(d.dimension(), 2);
        assert!(PoleDivisor::from_intrinsic(&[]).le(&d));
    }

    #[test]
    fn legendre_quotient_is_zero() {
        let op = picard_fuchs(&legendre()).unwrap();
        let mut ctx = IdrContext::new(&op, &[]).unwrap();
        let places = ctx.places().to_vec();
        for d in lattice(&places, 6) {
            let sp = ctx.space(&d).unwrap();
            assert_eq!(sp.dimension(), 0, "{d}");
            assert_eq!(sp.parabolic.len(), sp.exact.len());
        }
        assert_eq!(expected_dimension(&legendre()).unwrap(), 0);
    }

    #[test]
    fn rank_one_quotient_contains_manin_class() {
        let m = WeierstrassModel::short(RatFunc::var(), RatFunc::one());
        let op = picard_fuchs(&m).unwrap();
        let z = manin_map(&m, &op, Some(&Section::new(RatFunc::zero(), RatFunc::one()))).unwrap();
        assert_eq!(stabilization_search(&op, 1, 12).unwrap().dimension(), 1);
        let cubic = z.den().clone();
        let d = PoleDivisor::new(BTreeMap::from([(Place::finite(cubic).unwrap(), 1)]), 0);
        let sp = IdrContext::new(&op, &[]).unwrap().space(&d).unwrap();
        assert_eq!(sp.dimension(), 1);
        let (par, ex) = sp.membership(&z);
        assert!(par && !ex, "{}", sp.divisor);
    }
}
