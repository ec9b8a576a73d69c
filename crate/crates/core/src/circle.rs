//! Weighted ternary prime problems `N = p₁ + p₂ + p₃` by direct additive
//! convolution.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_range, Error, Result};
use crate::hecke::HeckeFn;
use crate::numeric::NeumaierSum;
use crate::sieve::SieveTables;

pub const MAX_TERNARY: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TernaryReport {
    pub n: u64,
    /// ordered representations `N = p₁ + p₂ + p₃`
    pub r3: u64,
    /// `∑ λ(p₁)` over representations
    pub weighted: f64,
    /// `∑ λ(p₁)λ(p₂)λ(p₃)`
    pub weighted3: f64,
    /// the ternary problem is degenerate for even `N` (one prime must be 2)
    pub even: bool,
    /// `|weighted| <= 2 r3`
    pub deligne_ok: bool,
}

impl TernaryReport {
    /// `weighted / r3`, or 0 when there are no representations.
    pub fn ratio(&self) -> f64 {
        if self.r3 == 0 {
            0.0
        } else {
            self.weighted / self.r3 as f64
        }
    }
}

/// Reports for every `N <= n_max`.
pub fn ternary_weighted(lambda: &HeckeFn, sieve: &SieveTables, n_max: u64) -> Result<Vec<TernaryReport>> {
    if n_max > MAX_TERNARY {
        return Err(Error::Capacity {
            what: "ternary range",
            requested: n_max,
            cap: MAX_TERNARY,
        });
    }
    ensure_range(n_max <= lambda.limit().min(sieve.limit()), || {
        format!("N_max = {n_max} outside table range")
    })?;
    let primes: Vec<u64> = sieve.primes_up_to(n_max).iter().map(|&p| p as u64).collect();
    let len = n_max as usize + 1;
    // two-prime counts and λ-weighted counts
    let mut r2 = vec![0u64; len];
    let mut w2 = vec![NeumaierSum::default(); len];
    for &p in &primes {
        let lp = lambda.get(p);
        for &p2 in &primes {
            let m = p + p2;
            if m > n_max {
                break;
            }
            r2[m as usize] += 1;
            w2[m as usize].add(lp * lambda.get(p2));
        }
    }
    let w2: Vec<f64> = w2.iter().map(NeumaierSum::value).collect();
    Ok((1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut r3 = 0u64;
            let mut weighted = NeumaierSum::default();
            let mut weighted3 = NeumaierSum::default();
            for &p in primes.iter().take_while(|&&p| p < n) {
                let rest = (n - p) as usize;
                let lp = lambda.get(p);
                r3 += r2[rest];
                weighted.add(lp * r2[rest] as f64);
                weighted3.add(lp * w2[rest]);
            }
            let weighted = weighted.value();
            TernaryReport {
                n,
                r3,
                weighted,
                weighted3: weighted3.value(),
                even: n % 2 == 0,
                deligne_ok: weighted.abs() <= 2.0 * r3 as f64 * (1.0 + 1e-12),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BilinearCircle {
    pub n: u64,
    /// `∑_{p + a + b = N} λ(p)` over `a ∈ A`, `b ∈ B`
    pub value: f64,
    pub count: u64,
    /// `|A|^{1/2}`
    pub norm_a: f64,
    /// `|B|^{1/2}`
    pub norm_b: f64,
}

/// `∑∑∑_{N = p + a + b} λ(p) 1_A(a) 1_B(b)` by direct evaluation.
pub fn bilinear_circle(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    n: u64,
    set_a: &[u64],
    set_b: &[u64],
) -> Result<BilinearCircle> {
    ensure_range(n <= lambda.limit().min(sieve.limit()), || {
        format!("N = {n} outside table range")
    })?;
    if set_a.iter().chain(set_b).any(|&v| v == 0 || v > n) {
        return Err(Error::InvalidArgument("set elements must lie in [1, N]".into()));
    }
    let mut value = NeumaierSum::default();
    let mut count = 0;
    for &a in set_a {
        for &b in set_b {
            if a + b < n {
                let p = n - a - b;
                if sieve.is_prime(p) {
                    value.add(lambda.get(p));
                    count += 1;
                }
            }
        }
    }
    Ok(BilinearCircle {
        n,
        value: value.value(),
        count,
        norm_a: (set_a.len() as f64).sqrt(),
        norm_b: (set_b.len() as f64).sqrt(),
    })
}

/// `{m <= N : every prime factor of m is at most N^θ}`.
pub fn smooth_set(sieve: &SieveTables, n: u64, theta: f64) -> Result<Vec<u64>> {
    ensure_range(n <= sieve.limit(), || format!("N = {n} beyond sieve"))?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta must be in (0, 1], got {theta}")));
    }
    let bound = (n as f64).powf(theta);
    Ok((1..=n)
        .filter(|&m| m == 1 || sieve.largest_prime_factor(m) as f64 <= bound)
        .collect())
}
