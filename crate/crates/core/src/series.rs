//! Exact integer power-series arithmetic.
//!
//! Large products go through number-theoretic transforms modulo several
//! ~62-bit primes and are lifted back with Garner's mixed-radix CRT. The
//! number of primes is chosen from a coefficient bound of the inputs, so
//! the lift is exact.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

const SCHOOLBOOK_WORK: usize = 1 << 22;
const NTT_MAX_LOG: u32 = 24;

#[derive(Clone, Copy, Debug)]
struct NttPrime {
    p: u64,
    root: u64,
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn ntt_primes() -> &'static [NttPrime] {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let mut c = ((1u64 << 62) - 1) >> NTT_MAX_LOG;
        while out.len() < 12 {
            let p = (c << NTT_MAX_LOG) + 1;
            if is_prime_u64(p) {
                let factors = distinct_prime_factors(p - 1);
                let g = (2..)
                    .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
                    .unwrap();
                out.push(NttPrime { p, root: g });
            }
            c -= 1;
        }
        out
    })
}

fn ntt(a: &mut [u64], invert: bool, prime: NttPrime) {
    let n = a.len();
    let p = prime.p;
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(prime.root, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut t = 1u64;
        for _ in 0..half {
            twiddles.push(t);
            t = mul_mod(t, w, p);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = mul_mod(hi[k], twiddles[k], p);
                lo[k] = if u + v >= p { u + v - p } else { u + v };
                hi[k] = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = mul_mod(*x, inv_n, p);
        }
    }
}

fn residue(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

fn max_bits(xs: &[BigInt]) -> u64 {
    xs.iter().map(|x| x.bits()).max().unwrap_or(0)
}

/// Truncated product `a·b mod q^len`, schoolbook.
pub fn schoolbook_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Truncated product `a·b mod q^len` with exact integer coefficients.
pub fn mul_truncated(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    if a.is_empty() || b.is_empty() {
        return vec![BigInt::zero(); len];
    }
    if a.len().saturating_mul(b.len()) <= SCHOOLBOOK_WORK {
        return schoolbook_mul(a, b, len);
    }
    ntt_mul(a, b, len)
}

fn ntt_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let full = a.len() + b.len() - 1;
    let size = full.next_power_of_two();
    assert!(
        size <= 1 << NTT_MAX_LOG,
        "product length {full} beyond transform capacity"
    );
    // |c_k| <= min(la, lb) * max|a| * max|b|; the CRT range must cover 2|c_k|
    let terms = a.len().min(b.len()) as u64;
    let bound_bits = max_bits(a) + max_bits(b) + (64 - terms.leading_zeros() as u64) + 2;
    let primes = ntt_primes();
    let mut count = 0;
    let mut bits = 0u64;
    while bits <= bound_bits {
        bits += 61;
        count += 1;
    }
    assert!(count <= primes.len(), "coefficients too large for the prime set");
    let primes = &primes[..count];

    let residues: Vec<Vec<u64>> = primes
        .iter()
        .map(|&prime| {
            let mut fa = vec![0u64; size];
            let mut fb = vec![0u64; size];
            for (dst, x) in fa.iter_mut().zip(a) {
                *dst = residue(x, prime.p);
            }
            for (dst, x) in fb.iter_mut().zip(b) {
                *dst = residue(x, prime.p);
            }
            ntt(&mut fa, false, prime);
            ntt(&mut fb, false, prime);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = mul_mod(*x, *y, prime.p);
            }
            ntt(&mut fa, true, prime);
            fa.truncate(len.min(full));
            fa
        })
        .collect();

    let moduli: Vec<u64> = primes.iter().map(|q| q.p).collect();
    let mut modulus = BigInt::from(1u8);
    for &p in &moduli {
        modulus *= p;
    }
    let half = &modulus >> 1;
    // prefix-product inverses for Garner's algorithm
    let mut inverses = vec![0u64; count];
    for i in 1..count {
        let mut prod = 1u64;
        for &pj in &moduli[..i] {
            prod = mul_mod(prod, pj % moduli[i], moduli[i]);
        }
        inverses[i] = pow_mod(prod, moduli[i] - 2, moduli[i]);
    }

    let mut out = vec![BigInt::zero(); len];
    for (k, slot) in out.iter_mut().enumerate().take(len.min(full)) {
        let mut digits = vec![0u64; count];
        for i in 0..count {
            let pi = moduli[i];
            // value of the partial mixed-radix number modulo p_i
            let mut acc = 0u64;
            for j in (0..i).rev() {
                acc = (mul_mod(acc, moduli[j] % pi, pi) + digits[j] % pi) % pi;
            }
            let r = residues[i][k];
            let diff = (r + pi - acc) % pi;
            digits[i] = if i == 0 { r } else { mul_mod(diff, inverses[i], pi) };
        }
        let mut value = BigInt::zero();
        for i in (0..count).rev() {
            value = value * moduli[i] + digits[i];
        }
        if value > half {
            value -= &modulus;
        }
        *slot = value;
    }
    out
}

/// Exact division of every coefficient; panics if a remainder is nonzero.
pub fn div_exact(xs: &[BigInt], d: i64) -> Vec<BigInt> {
    let d = BigInt::from(d);
    xs.iter()
        .map(|x| {
            let (q, r) = x.div_rem(&d);
            assert!(r.is_zero(), "division by {d} is not exact");
            q
        })
        .collect()
}

pub(crate) fn sign_of(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn miller_rabin_small_cases() {
        let primes: Vec<u64> = (0..100).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(primes.len(), 25);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2, 3, 5, 7
    }

    #[test]
    fn ntt_primes_have_primitive_roots() {
        for q in ntt_primes() {
            assert!(q.p < 1 << 62 && q.p > 1 << 61);
            assert_eq!((q.p - 1) % (1 << NTT_MAX_LOG), 0);
            assert_eq!(pow_mod(q.root, q.p - 1, q.p), 1);
            assert_ne!(pow_mod(q.root, (q.p - 1) / 2, q.p), 1);
        }
    }

    #[test]
    fn ntt_product_matches_schoolbook_with_huge_coefficients() {
        let a: Vec<BigInt> = (0..300)
            .map(|i| BigInt::from(-7i64 + i).pow(25) * if i % 3 == 0 { -1 } else { 1 })
            .collect();
        let b: Vec<BigInt> = (0..250).map(|i| BigInt::from(i * i + 1).pow(11)).collect();
        assert_eq!(ntt_mul(&a, &b, 400), schoolbook_mul(&a, &b, 400));
        assert_eq!(ntt_mul(&a, &b, 549), schoolbook_mul(&a, &b, 549));
    }

    proptest! {
        #[test]
        fn ntt_product_matches_schoolbook(
            a in prop::collection::vec(-1_000_000_000_000i64..1_000_000_000_000, 1..40),
            b in prop::collection::vec(-1_000_000i64..1_000_000, 1..40),
            len in 1usize..90,
        ) {
            let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
            let b: Vec<BigInt> = b.into_iter().map(BigInt::from).collect();
            prop_assert_eq!(ntt_mul(&a, &b, len), schoolbook_mul(&a, &b, len));
        }
    }
}
