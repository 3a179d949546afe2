//! Truncated Laurent expansions at places.
//!
//! At a finite place `pi` the local parameter is `u = t - theta` with `theta`
//! the class of `t` in the residue field; at infinity it is `u = 1/t`.

use std::fmt;
use std::sync::Arc;

use super::place::Place;
use super::poly::Poly;
use super::rat::Rat;
use super::ratfunc::RatFunc;
use super::residue::{ResidueElem, ResidueField};

/// `sum_{k >= order} c_k u^k`, known for exponents below `prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    field: Arc<ResidueField>,
    order: i64,
    coeffs: Vec<ResidueElem>,
}

impl LaurentSeries {
    pub fn new(field: &Arc<ResidueField>, order: i64, coeffs: Vec<ResidueElem>) -> Self {
        LaurentSeries { field: field.clone(), order, coeffs }
    }

    /// The zero series known up to (excluding) `prec`.
    pub fn zero(field: &Arc<ResidueField>, prec: i64) -> Self {
        LaurentSeries { field: field.clone(), order: prec, coeffs: Vec::new() }
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    /// Exponent below which every coefficient is known.
    pub fn prec(&self) -> i64 {
        self.order + self.coeffs.len() as i64
    }

    /// Coefficient of `u^k`; panics past the known precision.
    pub fn coeff(&self, k: i64) -> ResidueElem {
        assert!(k < self.prec(), "coefficient u^{k} beyond precision {}", self.prec());
        if k < self.order {
            ResidueElem::zero(&self.field)
        } else {
            self.coeffs[(k - self.order) as usize].clone()
        }
    }

    /// Exponent of the first nonzero known coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.order + i as i64)
    }

    pub fn truncate(&self, prec: i64) -> LaurentSeries {
        if prec >= self.prec() {
            return self.clone();
        }
        if prec <= self.order {
            return LaurentSeries::zero(&self.field, prec);
        }
        LaurentSeries::new(&self.field, self.order, self.coeffs[..(prec - self.order) as usize].to_vec())
    }

    /// Drops leading zeros.
    pub fn normalized(&self) -> LaurentSeries {
        match self.valuation() {
            Some(v) => LaurentSeries::new(&self.field, v, self.coeffs[(v - self.order) as usize..].to_vec()),
            None => LaurentSeries::zero(&self.field, self.prec()),
        }
    }

    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries::new(&self.field, self.order + k, self.coeffs.clone())
    }

    pub fn scale(&self, c: &ResidueElem) -> LaurentSeries {
        LaurentSeries::new(&self.field, self.order, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        let lo = self.order.min(other.order);
        let hi = self.prec().min(other.prec());
        if hi <= lo {
            return LaurentSeries::zero(&self.field, hi);
        }
        let coeffs = (lo..hi).map(|k| &self.coeff(k) + &other.coeff(k)).collect();
        LaurentSeries::new(&self.field, lo, coeffs)
    }

    pub fn neg(&self) -> LaurentSeries {
        LaurentSeries::new(&self.field, self.order, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        let a = self.normalized();
        let b = other.normalized();
        let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) else {
            // a zero factor: precision follows from the other factor's order
            let prec = match (a.valuation(), b.valuation()) {
                (None, Some(vb)) => a.prec() + vb,
                (Some(va), None) => b.prec() + va,
                _ => a.prec() + b.prec(),
            };
            return LaurentSeries::zero(&self.field, prec);
        };
        let n = (a.coeffs.len()).min(b.coeffs.len());
        let mut out = vec![ResidueElem::zero(&self.field); n];
        for i in 0..n {
            if a.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                out[i + j] = &out[i + j] + &(&a.coeffs[i] * &b.coeffs[j]);
            }
        }
        LaurentSeries::new(&self.field, va + vb, out)
    }

    /// Multiplicative inverse; `None` if no nonzero coefficient is known.
    pub fn inv(&self) -> Option<LaurentSeries> {
        let a = self.normalized();
        let v = a.valuation()?;
        let n = a.coeffs.len();
        let c0inv = a.coeffs[0].inv()?;
        let mut out: Vec<ResidueElem> = Vec::with_capacity(n);
        out.push(c0inv.clone());
        for k in 1..n {
            let mut s = ResidueElem::zero(&self.field);
            for j in 1..=k {
                s = &s + &(&a.coeffs[j] * &out[k - j]);
            }
            out.push(&(-&s) * &c0inv);
        }
        Some(LaurentSeries::new(&self.field, -v, out))
    }

    pub fn div(&self, other: &LaurentSeries) -> Option<LaurentSeries> {
        Some(self.mul(&other.inv()?))
    }

    /// Derivative in the local parameter `u`.
    pub fn derivative(&self) -> LaurentSeries {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale(&Rat::from_integer((self.order + i as i64).into())))
            .collect();
        LaurentSeries::new(&self.field, self.order - 1, coeffs)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*u^{}", self.order + i as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(u^{})", self.prec())
    }
}

/// Taylor coefficients of `p(theta + u)` in the residue field.
/// Taylor coefficients of `p` at the generator of `field`, from the first nonzero one through `terms` more.
fn taylor_from_valuation(field: &Arc<ResidueField>, p: &Poly, terms: usize) -> (i64, Vec<ResidueElem>) {
    let mut d = p.clone();
    let mut k = 0usize;
    let mut out = Vec::new();
    let mut v = None;
    loop {
        let c = ResidueElem::new(field, &d);
        if v.is_none() && !c.is_zero() {
            v = Some(k as i64);
        }
        if v.is_some() {
            out.push(c);
            if out.len() == terms {
                break;
            }
        }
        if d.is_zero() {
            if v.is_none() {
                break;
            }
            out.resize(terms, ResidueElem::zero(field));
            break;
        }
        k += 1;
        d = d.derivative().scale(&Rat::new(1.into(), (k as i64).into()));
    }
    (v.unwrap_or(0), out)
}

fn poly_series(field: &Arc<ResidueField>, coeffs: Vec<ResidueElem>, order: i64, prec: i64) -> LaurentSeries {
    let mut coeffs = coeffs;
    let len = (prec - order).max(0) as usize;
    coeffs.resize(len.max(coeffs.len()), ResidueElem::zero(field));
    coeffs.truncate(len);
    LaurentSeries::new(field, order, coeffs)
}

/// Expansion of `f` at `place` with `terms` known coefficients past its order.
pub fn expand(f: &RatFunc, place: &Place, terms: usize) -> LaurentSeries {
    let field = place.residue_field();
    expand_in(f, place, &field, terms)
}

/// As [`expand`], reusing an existing residue field handle.
pub fn expand_in(f: &RatFunc, place: &Place, field: &Arc<ResidueField>, terms: usize) -> LaurentSeries {
    if f.is_zero() {
        return LaurentSeries::zero(field, terms as i64);
    }
    let n = terms as i64;
    if let Place::Finite(_) = place {
        let (vn, nc) = taylor_from_valuation(field, f.num(), terms);
        let (vd, dc) = taylor_from_valuation(field, f.den(), terms);
        let ns = poly_series(field, nc, 0, n);
        let ds = poly_series(field, dc, 0, n);
        return ns.div(&ds).unwrap().shift(vn - vd);
    }
    // f(1/u) = u^(dd - dn) * rev(num)(u) / rev(den)(u)
    let r = |p: &Poly| -> Vec<ResidueElem> { p.reversed().coeffs().iter().map(|c| ResidueElem::from_rat(field, c.clone())).collect() };
    let (num, den, shift) = (r(f.num()), r(f.den()), f.den().deg() - f.num().deg());
    let vn = num.iter().position(|c| !c.is_zero()).unwrap() as i64;
    let vd = den.iter().position(|c| !c.is_zero()).unwrap() as i64;
    let ns = poly_series(field, num[vn as usize..].to_vec(), 0, n);
    let ds = poly_series(field, den[vd as usize..].to_vec(), 0, n);
    ns.div(&ds).unwrap().shift(vn - vd + shift)
}
