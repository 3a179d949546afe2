//! Multi-modular inversion in `Q[t]/(m)` with rational reconstruction.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::Poly;
use super::rat::Rat;

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes below `2^61`, descending.
fn primes() -> impl Iterator<Item = u64> {
    let mut n = (1u64 << 61) - 1;
    std::iter::from_fn(move || {
        while !is_prime(n) {
            n -= 2;
        }
        let p = n;
        n -= 2;
        Some(p)
    })
}

fn reduce_int(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().unwrap()
}

fn reduce_rat(r: &Rat, p: u64) -> Option<u64> {
    let d = reduce_int(r.denom(), p);
    if d == 0 {
        return None;
    }
    Some(mulmod(reduce_int(r.numer(), p), powmod(d, p - 2, p), p))
}

fn reduce_poly(f: &Poly, p: u64) -> Option<Vec<u64>> {
    f.coeffs().iter().map(|c| reduce_rat(c, p)).collect()
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn sub_mul(a: &[u64], c: u64, shift: usize, b: &[u64], p: u64) -> Vec<u64> {
    let mut out = a.to_vec();
    if out.len() < b.len() + shift {
        out.resize(b.len() + shift, 0);
    }
    for (i, &x) in b.iter().enumerate() {
        let s = mulmod(c, x, p);
        out[i + shift] = (out[i + shift] + p - s) % p;
    }
    trim(&mut out);
    out
}

/// `s` with `s a = 1 mod m` over `F_p`, or `None` if `a` and `m` are not coprime mod `p`.
fn inverse_fp(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let inv_lc = powmod(*r1.last().unwrap(), p - 2, p);
        let mut r = r0.clone();
        let mut s = s0.clone();
        while r.len() >= r1.len() && !r.is_empty() {
            let shift = r.len() - r1.len();
            let c = mulmod(*r.last().unwrap(), inv_lc, p);
            r = sub_mul(&r, c, shift, &r1, p);
            s = sub_mul(&s, c, shift, &s1, p);
        }
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let inv = powmod(r0[0], p - 2, p);
    Some(s0.iter().map(|&x| mulmod(x, inv, p)).collect())
}

/// Rational `n/d` with `n = x d mod m` and `|n|, d <= sqrt(m/2)`.
fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<Rat> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (n, d) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(Rat::new(n, d))
}

/// Inverse of `a` modulo the monic `m`, or `None` if they are not coprime.
pub fn inverse_mod(a: &Poly, m: &Poly) -> Option<Poly> {
    let n = m.degree()?;
    let a = a.rem(m);
    if a.is_zero() {
        return None;
    }
    let mut modulus = BigInt::one();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut used = 0usize;
    let mut next_check = 1usize;
    let mut failures = 0usize;
    for p in primes() {
        let (Some(ap), Some(mp)) = (reduce_poly(&a, p), reduce_poly(m, p)) else {
            continue;
        };
        let Some(mut sp) = inverse_fp(&ap, &mp, p) else {
            failures += 1;
            if failures > 8 && used == 0 {
                return None;
            }
            continue;
        };
        sp.resize(n, 0);
        let pb = BigInt::from(p);
        let minv = BigInt::from(powmod(reduce_int(&modulus, p), p - 2, p));
        for (x, &r) in acc.iter_mut().zip(&sp) {
            let diff = (BigInt::from(r) - reduce_int(x, p)).mod_floor(&pb);
            let k = (diff * &minv).mod_floor(&pb);
            *x += &modulus * k;
        }
        modulus *= &pb;
        used += 1;
        if used == next_check {
            next_check = (next_check * 3).div_ceil(2).max(used + 1);
            let cand: Option<Vec<Rat>> = acc.iter().map(|x| rational_reconstruct(x, &modulus)).collect();
            if let Some(c) = cand {
                let s = Poly::from_coeffs(c);
                if (&a * &s).rem(m).is_one() {
                    return Some(s);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactcore::rat::rat;

    #[test]
    fn small_primes() {
        assert!(is_prime((1u64 << 61) - 1));
        assert!(!is_prime(1u64 << 40));
    }

    #[test]
    fn reconstruct() {
        let m = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        let x = rat(-7, 13);
        let enc = (x.numer() * x.denom().modinv(&m).unwrap()).mod_floor(&m);
        assert_eq!(rational_reconstruct(&enc, &m), Some(x));
    }

    #[test]
    fn inverse_matches_euclid() {
        let m = Poly::from_ints(&[-3, 0, 0, 0, 0, 0, 0, 11]).monic();
        let a = Poly::from_coeffs(vec![rat(1, 2), rat(-5, 3), Rat::zero(), rat(7, 11)]);
        let s = inverse_mod(&a, &m).unwrap();
        assert!((&a * &s).rem(&m).is_one());
        let (_, s2, _) = Poly::xgcd(&a, &m);
        assert_eq!(s, s2.rem(&m));
    }
}
