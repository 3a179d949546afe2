//! Factorization over the rationals.
//!
//! Squarefree decomposition followed by Zassenhaus: factor modulo a small
//! odd prime (Cantor-Zassenhaus), Hensel-lift the modular factorization
//! past a Mignotte bound, then recombine subsets of lifted factors by trial
//! division over the integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{zpoly_primitive, zpoly_trim, Poly};
use super::rat::Rat;
use super::ExactError;

/// `content * prod factor^multiplicity`, with monic irreducible factors in
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub content: Rat,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn expand(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(self.content.clone()), |acc, (f, m)| &acc * &f.pow(*m))
    }
}

pub fn factor(p: &Poly) -> Result<Factorization, ExactError> {
    if p.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    let mut factors = Vec::new();
    for (i, part) in p.squarefree_decomposition().into_iter().enumerate() {
        for f in factor_squarefree(&part) {
            factors.push((f, i as u32 + 1));
        }
    }
    factors.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    Ok(Factorization { content: p.leading(), factors })
}

/// Monic irreducible factors of a squarefree polynomial.
pub fn factor_squarefree(p: &Poly) -> Vec<Poly> {
    match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(1) => return vec![p.monic()],
        _ => {}
    }
    let f = p.primitive_int();
    let mut out: Vec<Poly> = zassenhaus(&f).iter().map(|g| Poly::from_int_coeffs(g).monic()).collect();
    out.sort_by(|a, b| a.canonical_cmp(b));
    out
}

pub fn is_irreducible(p: &Poly) -> bool {
    match p.degree() {
        None | Some(0) => false,
        Some(1) => true,
        _ => p.is_squarefree() && factor_squarefree(p).len() == 1,
    }
}

const PRIMES: &[u64] = &[
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307,
    311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409, 419, 421,
    431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521, 523, 541, 547,
    557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613, 617, 619, 631, 641, 643, 647, 653, 659,
    661, 673, 677, 683, 691, 701, 709, 719, 727, 733, 739, 743, 751, 757, 761, 769, 773, 787, 797,
    809, 811, 821, 823, 827, 829, 839, 853, 857, 859, 863, 877, 881, 883, 887, 907, 911, 919, 929,
    937, 941, 947, 953, 967, 971, 977, 983, 991, 997, 1009, 1013, 1019, 1021, 1031, 1033, 1039,
];

/// Irreducible primitive factors of a squarefree primitive integer polynomial.
fn zassenhaus(f: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = f.len() - 1;
    let lc = f[n].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e111);

    let mut best: Option<(u64, Vec<Vec<u64>>)> = None;
    let mut good = 0;
    // degrees a true factor can have, intersected over the primes tried
    let mut possible = vec![true; n + 1];
    for &p in PRIMES {
        if (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = fp_from_z(f, p);
        if fp.len() != f.len() {
            continue;
        }
        if fp_gcd(&fp, &fp_derivative(&fp, p), p).len() != 1 {
            continue;
        }
        let monic = fp_monic(&fp, p);
        let mut facs = Vec::new();
        for (g, d) in ddf(&monic, p) {
            edf(&g, d, p, &mut rng, &mut facs);
        }
        if facs.len() == 1 {
            return vec![f.to_vec()];
        }
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for g in &facs {
            let d = g.len() - 1;
            for k in (d..=n).rev() {
                sums[k] |= sums[k - d];
            }
        }
        possible.iter_mut().zip(&sums).for_each(|(a, b)| *a &= b);
        if possible[1..n].iter().all(|x| !x) {
            return vec![f.to_vec()];
        }
        if best.as_ref().map_or(true, |(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        good += 1;
        if good >= 6 {
            break;
        }
    }
    let (p, facs) = best.expect("some prime keeps the polynomial squarefree");

    // coefficient bound for lc * (any factor)
    let max_coeff = f.iter().map(|c| c.abs()).max().unwrap();
    let bound = (max_coeff * lc.abs() * BigInt::from(n + 2)) << (n + 1);
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    let mut k = 1u32;
    while modulus <= bound {
        modulus *= &pb;
        k += 1;
    }
    let lifted = hensel_lift_all(f, &facs, p, k);

    recombine(f, lifted, &modulus, &possible)
}

fn recombine(f: &[BigInt], mut lifted: Vec<Vec<BigInt>>, modulus: &BigInt, possible: &[bool]) -> Vec<Vec<BigInt>> {
    let mut result = Vec::new();
    let mut current = f.to_vec();
    let mut s = 1;
    'outer: while 2 * s <= lifted.len() {
        let lc = current.last().unwrap().clone();
        let lc0 = &lc * &current[0];
        for subset in combinations(lifted.len(), s) {
            let deg: usize = subset.iter().map(|&i| lifted[i].len() - 1).sum();
            if !possible[deg] {
                continue;
            }
            if !current[0].is_zero() {
                let c0 = subset.iter().fold(lc.clone(), |acc, &i| (acc * &lifted[i][0]).mod_floor(modulus));
                let c0 = if &c0 * 2 > *modulus { c0 - modulus } else { c0 };
                if c0.is_zero() || !(&lc0 % &c0).is_zero() {
                    continue;
                }
            }
            let mut g = vec![lc.clone()];
            for &i in &subset {
                g = zp_mod(&zp_mul(&g, &lifted[i]), modulus);
            }
            let g = zpoly_primitive(&zp_symmetric(&g, modulus));
            let gp = Poly::from_int_coeffs(&g);
            let cp = Poly::from_int_coeffs(&current);
            if let Some(q) = cp.exact_div(&gp) {
                if q.coeffs().iter().all(|c| c.is_integer()) {
                    result.push(g);
                    current = q.coeffs().iter().map(|c| c.to_integer()).collect();
                    for &i in subset.iter().rev() {
                        lifted.remove(i);
                    }
                    continue 'outer;
                }
            }
        }
        s += 1;
    }
    if current.len() > 1 {
        let mut c = zpoly_primitive(&current);
        if c.last().unwrap().is_negative() {
            c.iter_mut().for_each(|x| *x = -x.clone());
        }
        result.push(c);
    }
    result
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Lifts `f = lc * prod g_i (mod p)` to monic factors modulo `p^k` by
/// recursive binary splitting.
fn hensel_lift_all(f: &[BigInt], facs: &[Vec<u64>], p: u64, k: u32) -> Vec<Vec<BigInt>> {
    if facs.len() == 1 {
        // the lone factor is f / lc modulo p^k
        let m = BigInt::from(p).pow(k);
        let inv = mod_inverse(f.last().unwrap(), &m);
        return vec![zp_mod(&f.iter().map(|c| c * &inv).collect::<Vec<_>>(), &m)];
    }
    let half = facs.len() / 2;
    let g0 = facs[..half].iter().fold(vec![1u64], |acc, g| fp_mul(&acc, g, p));
    let h0 = facs[half..].iter().fold(vec![1u64], |acc, g| fp_mul(&acc, g, p));
    let (g, h) = hensel_pair(f, &g0, &h0, p, k);
    let mut out = hensel_lift_all(&g, &facs[..half], p, k);
    // h carries the leading coefficient of f
    out.extend(hensel_lift_all(&h, &facs[half..], p, k));
    out
}

/// Given `f = lc * g * h (mod p)` with `g, h` monic and coprime mod `p`,
/// returns `(G, H)` with `G` monic, `f = G * H (mod p^k)`, `lc(H) = lc(f)`.
fn hensel_pair(f: &[BigInt], g0: &[u64], h0: &[u64], p: u64, k: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let lc = f.last().unwrap().clone();
    let lc_p = (((&lc % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p)).to_u64().unwrap();
    let h0 = fp_scale(h0, lc_p, p);
    let (_, s, t) = fp_xgcd(g0, &h0, p);
    let mut g = fp_to_z(g0);
    let mut h = fp_to_z(&h0);
    let pb = BigInt::from(p);
    let mut m = pb.clone();
    for _ in 1..k {
        let e = zp_sub(f, &zp_mul(&g, &h));
        let e: Vec<BigInt> = e.iter().map(|c| c / &m).collect();
        let e = fp_from_z(&e, p);
        let te = fp_mul(&t, &e, p);
        let (q, r) = fp_divrem(&te, g0_like(&g, p).as_slice(), p);
        let tau = fp_add(&fp_mul(&q, &fp_from_z(&h, p), p), &fp_mul(&s, &e, p), p);
        let next = &m * &pb;
        g = zp_mod(&zp_add(&g, &zp_scale(&fp_to_z(&r), &m)), &next);
        h = zp_mod(&zp_add(&h, &zp_scale(&fp_to_z(&tau), &m)), &next);
        m = next;
    }
    let g = zp_symmetric(&g, &m);
    let h = zp_symmetric(&h, &m);
    (g, h)
}

fn g0_like(g: &[BigInt], p: u64) -> Vec<u64> {
    fp_from_z(g, p)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    ((e.x % m) + m) % m
}

// --- integer polynomial helpers ---

fn zp_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zpoly_trim(out)
}

fn zp_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    zpoly_trim(
        (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
            .collect(),
    )
}

fn zp_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    zpoly_trim(
        (0..n)
            .map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default())
            .collect(),
    )
}

fn zp_scale(a: &[BigInt], c: &BigInt) -> Vec<BigInt> {
    zpoly_trim(a.iter().map(|x| x * c).collect())
}

fn zp_mod(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    zpoly_trim(a.iter().map(|x| x.mod_floor(m)).collect())
}

fn zp_symmetric(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let half = m >> 1;
    zpoly_trim(
        a.iter()
            .map(|x| {
                let r = x.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

// --- polynomials over F_p, p an odd prime below 2^31 ---

fn fp_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_from_z(a: &[BigInt], p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    fp_trim(a.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
}

fn fp_to_z(a: &[u64]) -> Vec<BigInt> {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

fn fp_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    fp_trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    fp_trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn fp_scale(a: &[u64], c: u64, p: u64) -> Vec<u64> {
    fp_trim(a.iter().map(|x| x * c % p).collect())
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_trim(out)
}

fn fp_pow_u(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn fp_inv(x: u64, p: u64) -> u64 {
    fp_pow_u(x, p - 2, p)
}

fn fp_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return (Vec::new(), a.to_vec());
    }
    let inv = fp_inv(b[db], p);
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] * inv % p;
        q[i] = c;
        if c == 0 {
            continue;
        }
        for (j, &bc) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + p - c * bc % p) % p;
        }
    }
    r.truncate(db);
    (fp_trim(q), fp_trim(r))
}

fn fp_monic(a: &[u64], p: u64) -> Vec<u64> {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => fp_scale(a, fp_inv(lc, p), p),
    }
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    while !b.is_empty() {
        let r = fp_divrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    fp_monic(&a, p)
}

fn fp_xgcd(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = fp_inv(*r0.last().unwrap(), p);
    (fp_scale(&r0, inv, p), fp_scale(&s0, inv, p), fp_scale(&t0, inv, p))
}

fn fp_derivative(a: &[u64], p: u64) -> Vec<u64> {
    fp_trim(a.iter().enumerate().skip(1).map(|(k, &c)| (k as u64 % p) * c % p).collect())
}

fn fp_powmod(base: &[u64], e: &BigUint, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = fp_divrem(base, m, p).1;
    for i in 0..e.bits() {
        if e.bit(i) {
            result = fp_divrem(&fp_mul(&result, &b, p), m, p).1;
        }
        b = fp_divrem(&fp_mul(&b, &b, p), m, p).1;
    }
    result
}

/// Distinct-degree factorization of a monic squarefree polynomial.
fn ddf(f: &[u64], p: u64) -> Vec<(Vec<u64>, usize)> {
    let mut out = Vec::new();
    let mut cur = f.to_vec();
    let x = vec![0u64, 1];
    let mut h = fp_divrem(&x, &cur, p).1;
    let pe = BigUint::from(p);
    let mut d = 1;
    while cur.len() - 1 >= 2 * d {
        h = fp_powmod(&h, &pe, &cur, p);
        let g = fp_gcd(&fp_sub(&h, &x, p), &cur, p);
        if g.len() > 1 {
            cur = fp_divrem(&cur, &g, p).0;
            h = fp_divrem(&h, &cur, p).1;
            out.push((g, d));
        }
        d += 1;
    }
    if cur.len() > 1 {
        let deg = cur.len() - 1;
        out.push((cur, deg));
    }
    out
}

/// Equal-degree splitting (Cantor-Zassenhaus) into irreducibles of degree `d`.
fn edf(g: &[u64], d: usize, p: u64, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<u64>>) {
    let n = g.len() - 1;
    if n == d {
        out.push(g.to_vec());
        return;
    }
    let e = (BigUint::from(p).pow(d as u32) - BigUint::one()) >> 1;
    loop {
        let a: Vec<u64> = fp_trim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.len() < 2 {
            continue;
        }
        let b = fp_sub(&fp_powmod(&a, &e, g, p), &[1], p);
        let h = fp_gcd(&b, g, p);
        if h.len() > 1 && h.len() < g.len() {
            let other = fp_monic(&fp_divrem(g, &h, p).0, p);
            edf(&h, d, p, rng, out);
            edf(&other, d, p, rng, out);
            return;
        }
    }
}
