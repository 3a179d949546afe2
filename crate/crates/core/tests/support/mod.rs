#![allow(dead_code)]

use ellsurf::exactcore::{Poly, RatFunc};
use ellsurf::weiermodel::WeierstrassModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    let deg = rng.gen_range(0..=max_deg);
    let coeffs: Vec<i64> = (0..=deg)
        .map(|_| if rng.gen_bool(0.5) { rng.gen_range(-3..=3) } else { 0 })
        .collect();
    Poly::from_ints(&coeffs)
}

/// A Weierstrass model with polynomial coefficients of degree at most `max_deg` that passes validation.
pub fn random_model(rng: &mut ChaCha8Rng, max_deg: usize) -> WeierstrassModel {
    loop {
        let m = if rng.gen_bool(0.6) {
            WeierstrassModel::short(
                RatFunc::from_poly(random_poly(rng, max_deg)),
                RatFunc::from_poly(random_poly(rng, max_deg)),
            )
        } else {
            let mut c = (0..5).map(|_| RatFunc::from_poly(random_poly(rng, max_deg)));
            WeierstrassModel::new(c.next().unwrap(), c.next().unwrap(), c.next().unwrap(), c.next().unwrap(), c.next().unwrap())
        };
        if m.validate().is_ok() {
            return m;
        }
    }
}

pub fn random_ratfunc(rng: &mut ChaCha8Rng, max_deg: usize) -> RatFunc {
    let n = random_poly(rng, max_deg);
    let mut d = random_poly(rng, max_deg);
    while d.is_zero() {
        d = random_poly(rng, max_deg);
    }
    RatFunc::new(n, d)
}
