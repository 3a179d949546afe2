//! Residue fields `Q[t]/(pi)` of places.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::Poly;
use super::rat::Rat;

/// The number field `Q[t]/(pi)` for monic irreducible `pi`.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct ResidueField {
    modulus: Poly,
    /// `t^(n+i) = powers[i] / power_den` modulo the modulus, for `i < n - 1`.
    powers: Vec<Vec<BigInt>>,
    power_den: BigInt,
}

/// `(A, d)` with `p = A / d` and `A` integral.
fn integral(p: &Poly) -> (Vec<BigInt>, BigInt) {
    let d = p.denominator_lcm();
    let a = p.coeffs().iter().map(|c| (c * Rat::from_integer(d.clone())).to_integer()).collect();
    (a, d)
}

impl ResidueField {
    pub fn new(modulus: Poly) -> Self {
        assert!(modulus.is_monic() && modulus.deg() >= 1, "residue modulus must be monic of positive degree");
        let n = modulus.deg() as usize;
        let mut reps = Vec::new();
        let mut cur = Poly::var().pow(n as u32).rem(&modulus);
        for _ in 0..n.saturating_sub(1) {
            reps.push(cur.clone());
            cur = (&cur * &Poly::var()).rem(&modulus);
        }
        let power_den = reps.iter().fold(BigInt::one(), |acc, p| num_integer::Integer::lcm(&acc, &p.denominator_lcm()));
        let powers = reps
            .iter()
            .map(|p| (0..n).map(|i| (p.coeff(i) * Rat::from_integer(power_den.clone())).to_integer()).collect())
            .collect();
        ResidueField { modulus, powers, power_den }
    }

    /// `a b` reduced modulo the modulus, computed over the integers.
    fn mul_reduce(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let n = self.degree();
        let ((ai, da), (bi, db)) = (integral(a), integral(b));
        let mut c = vec![BigInt::zero(); ai.len() + bi.len() - 1];
        for (i, x) in ai.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in bi.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        let mut out: Vec<BigInt> = (0..n).map(|i| c.get(i).map_or(BigInt::zero(), |x| x * &self.power_den)).collect();
        for (k, ck) in c.iter().enumerate().skip(n) {
            if ck.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&self.powers[k - n]) {
                *o += ck * r;
            }
        }
        let den = da * db * &self.power_den;
        Poly::from_coeffs(out.into_iter().map(|x| Rat::new(x, den.clone())).collect())
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }
}

/// An element of a residue field, stored as its reduced representative.
#[derive(Clone, Debug)]
pub struct ResidueElem {
    field: Arc<ResidueField>,
    rep: Poly,
}

impl ResidueElem {
    pub fn new(field: &Arc<ResidueField>, p: &Poly) -> Self {
        ResidueElem { field: field.clone(), rep: p.rem(&field.modulus) }
    }

    pub fn zero(field: &Arc<ResidueField>) -> Self {
        ResidueElem { field: field.clone(), rep: Poly::zero() }
    }

    pub fn one(field: &Arc<ResidueField>) -> Self {
        ResidueElem::from_rat(field, Rat::one())
    }

    pub fn from_rat(field: &Arc<ResidueField>, c: Rat) -> Self {
        ResidueElem { field: field.clone(), rep: Poly::constant(c) }
    }

    /// The class of `t`, a root of the modulus.
    pub fn generator(field: &Arc<ResidueField>) -> Self {
        ResidueElem::new(field, &Poly::var())
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    pub fn rep(&self) -> &Poly {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.rep.is_constant().then(|| self.rep.coeff(0))
    }

    /// Coordinates in the basis `1, theta, ..., theta^(d-1)`.
    pub fn coordinates(&self) -> Vec<Rat> {
        (0..self.field.degree()).map(|i| self.rep.coeff(i)).collect()
    }

    pub fn inv(&self) -> Option<ResidueElem> {
        if self.is_zero() {
            return None;
        }
        if self.field.degree() >= 4 {
            if let Some(s) = super::modular::inverse_mod(&self.rep, &self.field.modulus) {
                return Some(ResidueElem::new(&self.field, &s));
            }
        }
        let (g, s, _) = Poly::xgcd(&self.rep, &self.field.modulus);
        debug_assert!(g.is_one());
        Some(ResidueElem::new(&self.field, &s))
    }

    pub fn scale(&self, c: &Rat) -> ResidueElem {
        ResidueElem { field: self.field.clone(), rep: self.rep.scale(c) }
    }

    pub fn pow(&self, e: u32) -> ResidueElem {
        let mut acc = ResidueElem::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Evaluates a rational polynomial at this element.
    pub fn eval_poly(&self, p: &Poly) -> ResidueElem {
        ResidueElem::new(&self.field, &p.compose(&self.rep))
    }

    /// Trace down to `Q`.
    pub fn trace(&self) -> Rat {
        let d = self.field.degree();
        let mut tr = Rat::zero();
        let mut col = ResidueElem::one(&self.field);
        let theta = ResidueElem::generator(&self.field);
        for i in 0..d {
            tr += (self * &col).rep.coeff(i);
            col = &col * &theta;
        }
        tr
    }
}

impl PartialEq for ResidueElem {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep && (Arc::ptr_eq(&self.field, &other.field) || self.field == other.field)
    }
}

impl Eq for ResidueElem {}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_rational() {
            write!(f, "{}", self.rep.display_with("t"))
        } else {
            write!(f, "{}", self.rep.display_with("theta"))
        }
    }
}

impl Add<&ResidueElem> for &ResidueElem {
    type Output = ResidueElem;
    fn add(self, rhs: &ResidueElem) -> ResidueElem {
        ResidueElem { field: self.field.clone(), rep: &self.rep + &rhs.rep }
    }
}

impl Sub<&ResidueElem> for &ResidueElem {
    type Output = ResidueElem;
    fn sub(self, rhs: &ResidueElem) -> ResidueElem {
        ResidueElem { field: self.field.clone(), rep: &self.rep - &rhs.rep }
    }
}

impl Mul<&ResidueElem> for &ResidueElem {
    type Output = ResidueElem;
    fn mul(self, rhs: &ResidueElem) -> ResidueElem {
        if self.field.is_rational() {
            return ResidueElem { field: self.field.clone(), rep: &self.rep * &rhs.rep };
        }
        ResidueElem { field: self.field.clone(), rep: self.field.mul_reduce(&self.rep, &rhs.rep) }
    }
}

impl Neg for &ResidueElem {
    type Output = ResidueElem;
    fn neg(self) -> ResidueElem {
        ResidueElem { field: self.field.clone(), rep: -&self.rep }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::rat::int;

    #[test]
    fn gaussian_field() {
        let k = Arc::new(ResidueField::new(Poly::from_ints(&[1, 0, 1])));
        let i = ResidueElem::generator(&k);
        assert_eq!(&i * &i, ResidueElem::from_rat(&k, int(-1)));
        let a = &i + &ResidueElem::one(&k);
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, ResidueElem::one(&k));
        assert_eq!(a.trace(), int(2));
    }

    #[test]
    fn trace_of_cube_root_field() {
        let k = Arc::new(ResidueField::new(Poly::from_ints(&[-2, 0, 0, 1])));
        let th = ResidueElem::generator(&k);
        assert_eq!(th.trace(), int(0));
        assert_eq!(th.pow(3).trace(), int(6));
    }
}
