//! Frobenius series at regular singular points, local exactness of
//! `Lambda f = Z`, and global rational solutions.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::exactcore::expansion::{expand_in, LaurentSeries};
use crate::exactcore::linalg::Matrix;
use crate::exactcore::place::{places_of_poly, Valuation};
use crate::exactcore::{Place, Poly, Rat, RatFunc, ResidueElem, ResidueField};
use crate::gaussmanin::{DiffOp2, OperatorError};

/// Local data of an operator at a place: `u^2 f'' + u P f' + Q f` in the local parameter `u`.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    pub place: Place,
    field: Arc<ResidueField>,
    /// Operator in the local variable (`u = 1/t` at infinity).
    op: DiffOp2,
    /// Place of the local variable's origin for `op`.
    origin: Place,
    p_coeffs: Vec<ResidueElem>,
    q_coeffs: Vec<ResidueElem>,
    pub exponents: (Rat, Rat),
    resonance: Option<ResidueElem>,
}

impl LocalOperator {
    pub fn new(op: &DiffOp2, place: &Place) -> Result<Self, OperatorError> {
        if !op.is_fuchsian_at(place) {
            return Err(OperatorError::IrregularSingularity { place: place.to_string() });
        }
        let (lop, origin) = match place {
            Place::Infinity => (op.at_infinity(), Place::rational(Rat::zero())),
            _ => (op.clone(), place.clone()),
        };
        let field = origin.residue_field();
        let mut lo = LocalOperator {
            place: place.clone(),
            field,
            op: lop,
            origin,
            p_coeffs: Vec::new(),
            q_coeffs: Vec::new(),
            exponents: (Rat::zero(), Rat::zero()),
            resonance: None,
        };
        lo.ensure(1);
        let non_rational = || OperatorError::NonRationalExponents { place: place.to_string() };
        let p0 = lo.p_coeffs[0].as_rat().ok_or_else(non_rational)?;
        let q0 = lo.q_coeffs[0].as_rat().ok_or_else(non_rational)?;
        lo.exponents = crate::gaussmanin::indicial_roots(&p0, &q0).ok_or_else(non_rational)?;
        Ok(lo)
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    /// Makes `P_j`, `Q_j` available for `j < n`.
    fn ensure(&mut self, n: usize) {
        if self.p_coeffs.len() >= n {
            return;
        }
        let n = n.max(self.p_coeffs.len() * 3 / 2);
        let sp = expand_in(&self.op.p, &self.origin, &self.field, n).shift(1);
        let sq = expand_in(&self.op.q, &self.origin, &self.field, n).shift(2);
        self.p_coeffs = (0..n as i64).map(|j| sp.coeff(j)).collect();
        self.q_coeffs = (0..n as i64).map(|j| sq.coeff(j)).collect();
    }

    fn elem(&self, r: &Rat) -> ResidueElem {
        ResidueElem::from_rat(&self.field, r.clone())
    }

    /// Indicial polynomial `I(r) = r(r-1) + P_0 r + Q_0` at a rational value.
    pub fn indicial(&self, r: &Rat) -> Rat {
        let p0 = self.p_coeffs[0].as_rat().unwrap();
        let q0 = self.q_coeffs[0].as_rat().unwrap();
        r * (r - Rat::one()) + p0 * r + q0
    }

    /// `sum_{j=1..k} (P_j (r + k - j) + Q_j) c_{k-j}` for the series `c` with exponent shift `r`.
    fn tail(&mut self, c: &[ResidueElem], r: &Rat, k: usize) -> ResidueElem {
        self.ensure(k + 1);
        let mut s = ResidueElem::zero(&self.field);
        for j in 1..=k {
            let cj = &c[k - j];
            if cj.is_zero() {
                continue;
            }
            let e = r + Rat::from_integer(((k - j) as i64).into());
            let coeff = &self.p_coeffs[j].scale(&e) + &self.q_coeffs[j];
            s = &s + &(&coeff * cj);
        }
        s
    }

    /// The local form of `Z`: `u^2 Z` in the local variable.
    pub fn local_rhs(&self, z: &RatFunc, terms: usize) -> LaurentSeries {
        let zl = match self.place {
            Place::Infinity => z.invert_variable() / RatFunc::var().pow(4),
            _ => z.clone(),
        };
        expand_in(&zl, &self.origin, &self.field, terms).shift(2)
    }

    /// Valuation of `u^2 Z` in the local variable, `None` for `Z = 0`.
    pub fn rhs_valuation(&self, z: &RatFunc) -> Option<i64> {
        let v = match self.place {
            Place::Infinity => Place::Infinity.valuation(z).finite().map(|v| v - 4),
            _ => self.place.valuation(z).finite(),
        };
        v.map(|v| v + 2)
    }

    /// Integer roots of the indicial polynomial, ascending and without repetition.
    pub fn integer_roots(&self) -> Vec<i64> {
        let (a, b) = &self.exponents;
        let mut r: Vec<i64> = [a, b]
            .iter()
            .filter(|x| x.is_integer())
            .map(|x| x.to_integer().try_into().expect("exponent fits in i64"))
            .collect();
        r.dedup();
        r
    }
}

/// `sum_k c_k u^(rho + k) (log u)^j`: for `log_degree = 1` the solution is
/// `log_coefficient * y1 * log u + u^rho sum_k c_k u^k` with `y1` the power solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusSolution {
    pub place: Place,
    pub exponent: Rat,
    pub log_degree: u32,
    pub coefficients: Vec<ResidueElem>,
    pub log_coefficient: Option<ResidueElem>,
}

/// Solutions for `rho2` (power series, leading coefficient 1) and `rho1`.
pub fn frobenius_basis(
    op: &DiffOp2,
    place: &Place,
    n: usize,
) -> Result<(FrobeniusSolution, FrobeniusSolution), OperatorError> {
    let mut lo = LocalOperator::new(op, place)?;
    frobenius_with(&mut lo, n.max(1))
}

pub fn frobenius_with(
    lo: &mut LocalOperator,
    n: usize,
) -> Result<(FrobeniusSolution, FrobeniusSolution), OperatorError> {
    let (r1, r2) = lo.exponents.clone();
    let gap = &r2 - &r1;
    let n = if gap.is_integer() { n.max(gap.to_integer().try_into().unwrap_or(0) + 1) } else { n };
    let one = ResidueElem::one(&lo.field);
    let mut a = vec![one.clone()];
    for k in 1..n {
        let t = lo.tail(&a, &r2, k);
        let ik = lo.indicial(&(&r2 + Rat::from_integer((k as i64).into())));
        a.push(&(-&t) * &lo.elem(&ik.recip()));
    }
    let first = FrobeniusSolution {
        place: lo.place.clone(),
        exponent: r2.clone(),
        log_degree: 0,
        coefficients: a.clone(),
        log_coefficient: None,
    };
    if !gap.is_integer() {
        let mut d = vec![one];
        for k in 1..n {
            let t = lo.tail(&d, &r1, k);
            let ik = lo.indicial(&(&r1 + Rat::from_integer((k as i64).into())));
            d.push(&(-&t) * &lo.elem(&ik.recip()));
        }
        let second = FrobeniusSolution {
            place: lo.place.clone(),
            exponent: r1,
            log_degree: 0,
            coefficients: d,
            log_coefficient: None,
        };
        return Ok((first, second));
    }
    let big_n: usize = gap.to_integer().try_into().unwrap();
    // log forcing term (2 theta + P - 1) y1 at u^(r1 + k)
    let forcing = |lo: &mut LocalOperator, k: usize| -> ResidueElem {
        if k < big_n {
            return ResidueElem::zero(&lo.field);
        }
        let m = k - big_n;
        lo.ensure(m + 1);
        let e = &r2 + Rat::from_integer((m as i64).into());
        let mut s = a[m].scale(&(Rat::from_integer(2.into()) * e - Rat::one()));
        for j in 0..=m {
            s = &s + &(&lo.p_coeffs[j] * &a[m - j]);
        }
        s
    };
    let mut d: Vec<ResidueElem> = Vec::with_capacity(n);
    d.push(if big_n == 0 { ResidueElem::zero(&lo.field) } else { ResidueElem::one(&lo.field) });
    let mut kappa = if big_n == 0 { ResidueElem::one(&lo.field) } else { ResidueElem::zero(&lo.field) };
    for k in 1..n {
        let t = lo.tail(&d, &r1, k);
        if k == big_n {
            // S_N + kappa N a_0 = 0 fixes kappa; c_N is free and set to zero
            kappa = &(-&t) * &lo.elem(&Rat::from_integer((big_n as i64).into()).recip());
            d.push(ResidueElem::zero(&lo.field));
            continue;
        }
        let f = forcing(lo, k);
        let ik = lo.indicial(&(&r1 + Rat::from_integer((k as i64).into())));
        let rhs = &(-&t) - &(&kappa * &f);
        d.push(&rhs * &lo.elem(&ik.recip()));
    }
    let log = !kappa.is_zero();
    let second = FrobeniusSolution {
        place: lo.place.clone(),
        exponent: r1,
        log_degree: log as u32,
        coefficients: d,
        log_coefficient: log.then_some(kappa),
    };
    Ok((first, second))
}

/// Residual of the recurrence for a solution, `I(rho+k) c_k + tail + kappa * forcing`, for `k < n`.
pub fn frobenius_residuals(op: &DiffOp2, sols: &(FrobeniusSolution, FrobeniusSolution)) -> Vec<ResidueElem> {
    let mut lo = LocalOperator::new(op, &sols.0.place).expect("Fuchsian place");
    let mut out = Vec::new();
    let a = &sols.0.coefficients;
    let r2 = &sols.0.exponent;
    for k in 0..a.len() {
        let t = lo.tail(a, r2, k);
        let ik = lo.indicial(&(r2 + Rat::from_integer((k as i64).into())));
        out.push(&(&a[k] * &lo.elem(&ik)) + &t);
    }
    let d = &sols.1.coefficients;
    let r1 = &sols.1.exponent;
    let gap = r2 - r1;
    let kappa = sols.1.log_coefficient.clone().unwrap_or_else(|| ResidueElem::zero(lo.field()));
    let n = d.len().min(a.len());
    for k in 0..n {
        let t = lo.tail(d, r1, k);
        let ik = lo.indicial(&(r1 + Rat::from_integer((k as i64).into())));
        let mut res = &(&d[k] * &lo.elem(&ik)) + &t;
        if gap.is_integer() {
            let big_n = gap.to_integer().try_into().unwrap_or(usize::MAX);
            if k >= big_n {
                let m = k - big_n;
                lo.ensure(m + 1);
                let e = r2 + Rat::from_integer((m as i64).into());
                let mut f = a[m].scale(&(Rat::from_integer(2.into()) * e - Rat::one()));
                for j in 0..=m {
                    f = &f + &(&lo.p_coeffs[j] * &a[m - j]);
                }
                res = &res + &(&kappa * &f);
            }
        }
        out.push(res);
    }
    out
}

/// Local exactness verdict with the resonance obstructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessCertificate {
    pub place: Place,
    pub locally_exact: bool,
    pub obstructions: Vec<ResidueElem>,
}

impl ExactnessCertificate {
    /// Obstructions as rational coordinates (`deg place` per obstruction).
    pub fn functionals(&self) -> Vec<Rat> {
        self.obstructions.iter().flat_map(|o| o.coordinates()).collect()
    }
}

/// Number of obstruction slots at a place (independent of `Z`).
pub fn obstruction_count(lo: &mut LocalOperator) -> usize {
    match lo.integer_roots().len() {
        0 => 0,
        1 => 1,
        _ => 1 + usize::from(resonance_coefficient(lo).is_zero()),
    }
}

/// The coefficient `K` of the free parameter at the larger integer root.
fn resonance_coefficient(lo: &mut LocalOperator) -> ResidueElem {
    if let Some(k) = &lo.resonance {
        return k.clone();
    }
    let k = resonance_run(lo);
    lo.resonance = Some(k.clone());
    k
}

fn resonance_run(lo: &mut LocalOperator) -> ResidueElem {
    let roots = lo.integer_roots();
    let (r1, r2) = (roots[0], roots[1]);
    // homogeneous run starting at r1 with c_{r1} = 1
    let len = (r2 - r1) as usize;
    let mut c = vec![ResidueElem::one(&lo.field)];
    let base = Rat::from_integer(r1.into());
    for k in 1..=len {
        let t = lo.tail(&c, &base, k);
        if k == len {
            return t;
        }
        let ik = lo.indicial(&(&base + Rat::from_integer((k as i64).into())));
        c.push(&(-&t) * &lo.elem(&ik.recip()));
    }
    unreachable!()
}

/// Decides whether `Lambda f = Z` has a single-valued formal solution at the place.
pub fn is_locally_exact(op: &DiffOp2, z: &RatFunc, place: &Place) -> Result<ExactnessCertificate, OperatorError> {
    let mut lo = LocalOperator::new(op, place)?;
    Ok(local_certificate(&mut lo, z))
}

pub fn local_certificate(lo: &mut LocalOperator, z: &RatFunc) -> ExactnessCertificate {
    let obstructions = local_obstructions(lo, z);
    let locally_exact = obstructions.iter().all(|o| o.is_zero());
    ExactnessCertificate { place: lo.place.clone(), locally_exact, obstructions }
}

/// Obstruction values, one per slot of [`obstruction_count`].
pub fn local_obstructions(lo: &mut LocalOperator, z: &RatFunc) -> Vec<ResidueElem> {
    let roots = lo.integer_roots();
    if roots.is_empty() {
        return Vec::new();
    }
    let r_max = *roots.last().unwrap();
    let zero = ResidueElem::zero(&lo.field);
    // z = u^2 Z; its valuation bounds the order of a solution from below
    let z_val = lo.rhs_valuation(z);
    if z_val.is_some_and(|v| v > r_max) || (z_val.is_none() && roots.len() == 1) {
        return vec![zero; obstruction_count(lo)];
    }
    let k0 = match z_val {
        Some(v) => v.min(roots[0]),
        None => roots[0],
    };
    let needed = (r_max - k0 + 1).max(1) as usize;
    let zs = if z.is_zero() { None } else { Some(lo.local_rhs(z, needed + 1)) };
    let zk = |k: i64| zs.as_ref().map_or(zero.clone(), |s| s.coeff(k));
    // c_k = c0_k + s * c1_k with s the free value at the first integer root
    let mut c0: Vec<ResidueElem> = Vec::with_capacity(needed);
    let mut c1: Vec<ResidueElem> = Vec::with_capacity(needed);
    let base = Rat::from_integer(k0.into());
    let mut obstructions = Vec::new();
    for idx in 0..needed {
        let k = k0 + idx as i64;
        let t0 = lo.tail(&c0, &base, idx);
        let t1 = lo.tail(&c1, &base, idx);
        let rhs0 = &zk(k) - &t0;
        let rhs1 = -&t1;
        let ik = lo.indicial(&Rat::from_integer(k.into()));
        if ik.is_zero() {
            if k == roots[0] {
                obstructions.push(rhs0);
                c0.push(zero.clone());
                c1.push(ResidueElem::one(&lo.field));
            } else {
                // residual rhs0 + s * rhs1 at the second root
                if rhs1.is_zero() {
                    obstructions.push(rhs0);
                }
                c0.push(zero.clone());
                c1.push(zero.clone());
            }
        } else {
            let inv = lo.elem(&ik.recip());
            c0.push(&rhs0 * &inv);
            c1.push(&rhs1 * &inv);
        }
    }
    debug_assert_eq!(obstructions.len(), obstruction_count(lo));
    obstructions
}

/// Certificates at every singular place of the operator and every pole of `Z`.
pub fn certificates(op: &DiffOp2, z: &RatFunc) -> Result<Vec<ExactnessCertificate>, OperatorError> {
    let mut places = op.singular_places();
    places.extend(new_pole_places(&places, z));
    if !places.contains(&Place::Infinity) {
        places.push(Place::Infinity);
    }
    places.sort();
    places.iter().map(|pl| is_locally_exact(op, z, pl)).collect()
}

/// Finite poles of `z` outside `known`, factoring only what the known places leave over.
fn new_pole_places(known: &[Place], z: &RatFunc) -> Vec<Place> {
    let mut rest = z.den().clone();
    for pl in known {
        if let Some(pi) = pl.polynomial() {
            while let Some(q) = rest.exact_div(pi) {
                rest = q;
            }
        }
    }
    places_of_poly(&rest).into_iter().map(|(pl, _)| pl).collect()
}

/// `f` with `Lambda f = Z`, plus a basis of rational homogeneous solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSolution {
    pub particular: RatFunc,
    pub homogeneous: Vec<RatFunc>,
}

impl RationalSolution {
    /// The zero solution of the homogeneous equation with nothing else.
    pub fn is_trivial(&self) -> bool {
        self.particular.is_zero() && self.homogeneous.is_empty()
    }
}

/// Smallest integer exponent at a place, or `None` if there is none.
fn min_integer_exponent(op: &DiffOp2, place: &Place) -> Result<Option<i64>, OperatorError> {
    let (a, b) = op.local_exponents(place)?;
    Ok([a, b].iter().filter(|x| x.is_integer()).map(|x| x.to_integer().try_into().unwrap()).min())
}

/// Pole bound from integer exponents: `max(0, -min integer exponent)`.
pub fn exponent_pole_bound(op: &DiffOp2, place: &Place) -> Result<i64, OperatorError> {
    Ok(min_integer_exponent(op, place)?.map_or(0, |m| (-m).max(0)))
}

/// Solves `Lambda f = Z` over `Q(t)`; `None` if no rational solution exists.
pub fn rational_solutions(op: &DiffOp2, z: &RatFunc) -> Result<Option<RationalSolution>, OperatorError> {
    let sing = op.singular_places();
    let mut den = Poly::one();
    let mut finite: Vec<Place> = sing.iter().filter(|p| !p.is_infinity()).cloned().collect();
    finite.extend(new_pole_places(&finite, z));
    for pl in &finite {
        let oz = match pl.valuation(z) {
            Valuation::Finite(v) => -v,
            Valuation::Infinite => 0,
        };
        let m = if sing.contains(pl) {
            (oz - 2).max(exponent_pole_bound(op, pl)?).max(0)
        } else {
            match oz {
                1 | 2 => return Ok(None),
                k if k >= 3 => k - 2,
                _ => 0,
            }
        };
        den = &den * &pl.polynomial().unwrap().pow(m as u32);
    }
    let d_inf = {
        let vz = match Place::Infinity.valuation(z) {
            Valuation::Finite(v) => 2 - v,
            Valuation::Infinite => i64::MIN,
        };
        let m_inf = if sing.contains(&Place::Infinity) { exponent_pole_bound(op, &Place::Infinity)? } else { 0 };
        vz.max(m_inf)
    };
    let n_unknowns = den.deg() + d_inf + 1;
    if n_unknowns <= 0 {
        return Ok(z.is_zero().then(|| RationalSolution { particular: RatFunc::zero(), homogeneous: Vec::new() }));
    }
    let images: Vec<RatFunc> = (0..n_unknowns as usize)
        .map(|i| op.apply(&RatFunc::new(Poly::monomial(Rat::one(), i), den.clone())))
        .collect();
    let (cols, rhs) = common_numerators(&images, z);
    let rows = rhs.len();
    let m = Matrix::from_columns(&cols, rows);
    let Some(x) = m.solve(&rhs) else { return Ok(None) };
    let to_f = |v: &[Rat]| RatFunc::new(Poly::from_coeffs(v.to_vec()), den.clone());
    let homogeneous = m.nullspace().iter().map(|v| to_f(v)).collect();
    Ok(Some(RationalSolution { particular: to_f(&x), homogeneous }))
}

/// Coefficient vectors of the numerators over a common denominator.
pub(crate) fn common_numerators(fs: &[RatFunc], z: &RatFunc) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let mut l = z.den().clone();
    for f in fs {
        let g = Poly::gcd(&l, f.den());
        l = (&l * f.den()).exact_div(&g).unwrap();
    }
    let num_of = |f: &RatFunc| f.num() * &l.exact_div(f.den()).unwrap();
    let nums: Vec<Poly> = fs.iter().map(num_of).collect();
    let zn = num_of(z);
    let len = nums.iter().chain(std::iter::once(&zn)).map(|p| p.coeffs().len()).max().unwrap_or(0).max(1);
    let pad = |p: &Poly| (0..len).map(|i| p.coeff(i)).collect::<Vec<_>>();
    (nums.iter().map(pad).collect(), pad(&zn))
}

/// True when every coefficient is zero (for test assertions).
pub fn all_zero(v: &[ResidueElem]) -> bool {
    v.iter().all(|x| x.is_zero())
}
