//! Exact arithmetic over `Q` and `Q(t)`: polynomials, factorization,
//! places, residue fields and local expansions.

pub mod expansion;
pub mod factor;
pub mod linalg;
pub mod modular;
pub mod place;
pub mod poly;
pub mod rat;
pub mod ratfunc;
pub mod residue;

pub use expansion::{expand, LaurentSeries};
pub use factor::{factor, Factorization};
pub use place::{Place, Valuation};
pub use poly::Poly;
pub use rat::{int, rat, Rat};
pub use ratfunc::RatFunc;
pub use residue::{ResidueElem, ResidueField};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("cannot factor the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial {0} is not monic irreducible")]
    NotIrreducible(String),
    #[error("division by zero")]
    DivisionByZero,
}
