//! Closed points of the projective line over `Q` and valuations.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::factor;
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::residue::ResidueField;
use super::ExactError;

/// Order of vanishing; `Infinite` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// Finite value, panicking on the valuation of zero.
    pub fn expect_finite(self) -> i64 {
        self.finite().expect("valuation of the zero function")
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// A place of `Q(t)`: a monic irreducible polynomial or the point at infinity.
///
/// Ordering puts finite places first (by degree, then coefficients) and
/// infinity last.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

impl Place {
    /// Checked constructor: `pi` must be monic and irreducible over `Q`.
    pub fn finite(pi: Poly) -> Result<Place, ExactError> {
        if !pi.is_monic() || !factor::is_irreducible(&pi) {
            return Err(ExactError::NotIrreducible(pi.to_string()));
        }
        Ok(Place::Finite(pi))
    }

    /// The rational point `t = a`.
    pub fn rational(a: crate::exactcore::Rat) -> Place {
        Place::Finite(Poly::linear_root(a))
    }

    pub(crate) fn from_factor(pi: Poly) -> Place {
        debug_assert!(pi.is_monic());
        Place::Finite(pi)
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.degree().unwrap(),
            Place::Infinity => 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn polynomial(&self) -> Option<&Poly> {
        match self {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        }
    }

    pub fn valuation_poly(&self, f: &Poly) -> Valuation {
        if f.is_zero() {
            return Valuation::Infinite;
        }
        match self {
            Place::Infinity => Valuation::Finite(-f.deg()),
            Place::Finite(pi) => {
                let mut v = 0;
                let mut g = f.clone();
                while let Some(q) = g.exact_div(pi) {
                    g = q;
                    v += 1;
                }
                Valuation::Finite(v)
            }
        }
    }

    pub fn valuation(&self, f: &RatFunc) -> Valuation {
        if f.is_zero() {
            return Valuation::Infinite;
        }
        match self {
            Place::Infinity => Valuation::Finite(f.den().deg() - f.num().deg()),
            Place::Finite(_) => Valuation::Finite(
                self.valuation_poly(f.num()).expect_finite() - self.valuation_poly(f.den()).expect_finite(),
            ),
        }
    }

    /// Residue field; at infinity this is `Q` presented as `Q[u]/(u)`.
    pub fn residue_field(&self) -> Arc<ResidueField> {
        match self {
            Place::Finite(pi) => Arc::new(ResidueField::new(pi.clone())),
            Place::Infinity => Arc::new(ResidueField::new(Poly::var())),
        }
    }

    pub fn name_with(&self, var: &str) -> String {
        match self {
            Place::Finite(p) => p.display_with(var).to_string(),
            Place::Infinity => "infinity".to_string(),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name_with("t"))
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Place {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Place::Finite(a), Place::Finite(b)) => a.canonical_cmp(b),
            (Place::Finite(_), Place::Infinity) => Ordering::Less,
            (Place::Infinity, Place::Finite(_)) => Ordering::Greater,
            (Place::Infinity, Place::Infinity) => Ordering::Equal,
        }
    }
}

/// Finite places dividing a nonzero polynomial, with multiplicities.
pub fn places_of_poly(p: &Poly) -> Vec<(Place, u32)> {
    if p.is_constant() {
        return Vec::new();
    }
    factor::factor(p)
        .expect("nonzero polynomial")
        .factors
        .into_iter()
        .map(|(f, m)| (Place::from_factor(f), m))
        .collect()
}

/// Finite places where `f` has a zero or pole.
pub fn support(f: &RatFunc) -> Vec<Place> {
    let mut out: Vec<Place> = places_of_poly(f.num())
        .into_iter()
        .chain(places_of_poly(f.den()))
        .map(|(p, _)| p)
        .collect();
    out.sort();
    out.dedup();
    out
}
