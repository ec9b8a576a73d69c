//! Finite exponential sums `∑ c(n) e(nα)` and the exact identities between
//! them.
//!
//! All sums run through one engine: the range is cut at multiples of
//! [`RESYNC_BLOCK`], each block is summed with its own phase walk into an
//! exact accumulator, and the accumulators are merged. Phases depend on `n`
//! only and merging is exact, so results are bitwise independent of the
//! split and of the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_range, Error, Result};
use crate::hecke::{HeckeFn, LambdaStar};
use crate::numeric::{canonical_alpha, e_reduced, ComplexSum, ExactSum, PhaseWalk, RESYNC_BLOCK};
use crate::sieve::SieveTables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Linear,
    Moebius,
    Prime,
    PrimeLog,
    Twisted { n: u64 },
    Square { a: u64 },
}

/// Exact accumulator for a partial range; merge to combine ranges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialSum {
    pub sum: ComplexSum,
    pub abs: ExactSum,
    pub terms: u64,
}

impl PartialSum {
    pub fn merge(&mut self, other: &PartialSum) {
        self.sum.merge(&other.sum);
        self.abs.merge(&other.abs);
        self.terms += other.terms;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpSumResult {
    pub re: f64,
    pub im: f64,
    pub x: u64,
    pub alpha: f64,
    pub variant: Variant,
    /// number of nonzero coefficients
    pub terms: u64,
    /// ∑ |c(n)|
    pub abs_sum: f64,
}

impl ExpSumResult {
    fn from_partial(p: &PartialSum, x: u64, alpha: f64, variant: Variant) -> Self {
        let v = p.sum.value();
        ExpSumResult {
            re: v.re,
            im: v.im,
            x,
            alpha,
            variant,
            terms: p.terms,
            abs_sum: p.abs.value(),
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }

    /// Triangle inequality `|value| <= ∑|c(n)|` with rounding slack.
    pub fn triangle_ok(&self) -> bool {
        self.abs() <= self.abs_sum * (1.0 + 1e-12) + 1e-12
    }
}

/// `∑_{lo < n <= hi} c(n) e(nα)`, accumulated exactly.
pub fn coefficient_sum<F>(lo: u64, hi: u64, alpha: f64, coeff: F) -> PartialSum
where
    F: Fn(u64) -> f64 + Sync,
{
    if hi <= lo {
        return PartialSum::default();
    }
    let alpha = canonical_alpha(alpha);
    let first = lo + 1;
    let blocks: Vec<u64> = (first / RESYNC_BLOCK..=hi / RESYNC_BLOCK).collect();
    let parts: Vec<PartialSum> = blocks
        .par_iter()
        .map(|&b| {
            let start = (b * RESYNC_BLOCK).max(first);
            let end = ((b + 1) * RESYNC_BLOCK - 1).min(hi);
            let mut walk = PhaseWalk::starting_at(alpha, start);
            let mut part = PartialSum::default();
            for n in start..=end {
                let z = walk.next_phase();
                let c = coeff(n);
                if c != 0.0 {
                    part.sum.add_scaled(c, z);
                    part.abs.add(c.abs());
                    part.terms += 1;
                }
            }
            part
        })
        .collect();
    let mut total = PartialSum::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

fn check_limit(what: &str, needed: u64, limit: u64) -> Result<()> {
    ensure_range(needed <= limit, || format!("{what}: needs tables to {needed}, have {limit}"))
}

/// `∑_{n≤X} λ(n) e(nα)`.
pub fn linear_sum(lambda: &HeckeFn, x: u64, alpha: f64) -> Result<ExpSumResult> {
    check_limit("linear sum", x, lambda.limit())?;
    let p = coefficient_sum(0, x, alpha, |n| lambda.get(n));
    Ok(ExpSumResult::from_partial(&p, x, canonical_alpha(alpha), Variant::Linear))
}

/// Coefficient of the variant at `n`, for the variants indexed by `n ≤ X`.
fn coefficient(variant: Variant, lambda: &HeckeFn, sieve: &SieveTables, n: u64) -> f64 {
    match variant {
        Variant::Linear => lambda.get(n),
        Variant::Moebius => sieve.mobius(n) as f64 * lambda.get(n),
        Variant::Prime => {
            if sieve.is_prime(n) {
                lambda.get(n)
            } else {
                0.0
            }
        }
        Variant::PrimeLog => {
            if sieve.is_prime(n) {
                lambda.get(n) * (n as f64).ln()
            } else {
                0.0
            }
        }
        Variant::Twisted { n: big_n } => lambda.get(big_n * n),
        Variant::Square { a } => lambda.get(a * n * n),
    }
}

fn variant_reach(variant: Variant, x: u64) -> Option<u64> {
    match variant {
        Variant::Twisted { n } => n.checked_mul(x),
        Variant::Square { a } => x.checked_mul(x).and_then(|s| s.checked_mul(a)),
        _ => Some(x),
    }
}

/// Partial sum over `(lo, hi]` for any variant.
pub fn variant_partial(
    variant: Variant,
    lambda: &HeckeFn,
    sieve: &SieveTables,
    lo: u64,
    hi: u64,
    alpha: f64,
) -> Result<PartialSum> {
    let reach = variant_reach(variant, hi).unwrap_or(u64::MAX);
    check_limit("exponential sum", reach, lambda.limit())?;
    if !matches!(variant, Variant::Linear | Variant::Twisted { .. } | Variant::Square { .. }) {
        check_limit("exponential sum", hi, sieve.limit())?;
    }
    if let Variant::Twisted { n: 0 } | Variant::Square { a: 0 } = variant {
        return Err(Error::InvalidArgument("twist parameter must be positive".into()));
    }
    Ok(coefficient_sum(lo, hi, alpha, |n| coefficient(variant, lambda, sieve, n)))
}

pub fn variant_sum(
    variant: Variant,
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    alpha: f64,
) -> Result<ExpSumResult> {
    let p = variant_partial(variant, lambda, sieve, 0, x, alpha)?;
    Ok(ExpSumResult::from_partial(&p, x, canonical_alpha(alpha), variant))
}

/// `∑_{n≤X} μ(n)λ(n) e(nα)`.
pub fn moebius_sum(lambda: &HeckeFn, sieve: &SieveTables, x: u64, alpha: f64) -> Result<ExpSumResult> {
    variant_sum(Variant::Moebius, lambda, sieve, x, alpha)
}

/// `∑_{p≤X} λ(p) e(pα)`, optionally weighted by `log p`.
pub fn prime_sum(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    alpha: f64,
    log_weighted: bool,
) -> Result<ExpSumResult> {
    let v = if log_weighted { Variant::PrimeLog } else { Variant::Prime };
    variant_sum(v, lambda, sieve, x, alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwistedSum {
    pub result: ExpSumResult,
    /// `√X · log 2X · d(N)^{1/2} · λ*(N)`
    pub comparison: f64,
}

/// `∑_{n≤X} λ(Nn) e(nα)` with its type I comparison quantity.
pub fn twisted_linear_sum(
    lambda: &HeckeFn,
    star: &LambdaStar,
    sieve: &SieveTables,
    big_n: u64,
    x: u64,
    alpha: f64,
) -> Result<TwistedSum> {
    let result = variant_sum(Variant::Twisted { n: big_n }, lambda, sieve, x, alpha)?;
    let xf = x as f64;
    let comparison =
        xf.sqrt() * (2.0 * xf).ln() * (sieve.num_divisors(big_n) as f64).sqrt() * star.get(big_n);
    Ok(TwistedSum { result, comparison })
}

/// The same twisted sum expanded with the dual Hecke relation:
/// `∑_{d|N} μ(d) λ(N/d) ∑_{m≤X/d} λ(m) e(dmα)`.
pub fn twisted_via_dual(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    big_n: u64,
    x: u64,
    alpha: f64,
) -> Result<Complex64> {
    let mut total = ComplexSum::new();
    for (d, mu) in sieve.squarefree_divisors(big_n) {
        let inner = linear_sum(lambda, x / d, canonical_alpha(d as f64 * alpha))?;
        total.add_scaled(mu as f64 * lambda.get(big_n / d), inner.value());
    }
    Ok(total.value())
}

/// `S(T, A, α) = ∑_{n≤T} λ(An²) e(nα)`.
pub fn square_sum(lambda: &HeckeFn, t: f64, a: u64, alpha: f64) -> Result<ExpSumResult> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("T must be nonnegative, got {t}")));
    }
    let x = t.floor() as u64;
    let reach = x.checked_mul(x).and_then(|s| s.checked_mul(a)).unwrap_or(u64::MAX);
    check_limit("square sum", reach, lambda.limit())?;
    if a == 0 {
        return Err(Error::InvalidArgument("A must be positive".into()));
    }
    let p = coefficient_sum(0, x, alpha, |n| lambda.get(a * n * n));
    Ok(ExpSumResult::from_partial(&p, x, canonical_alpha(alpha), Variant::Square { a }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(lhs: Complex64, rhs: Complex64, rel: f64) -> Self {
        let abs_diff = (lhs - rhs).norm();
        let tolerance = rel * (1.0 + lhs.norm());
        IdentityCheck {
            lhs: (lhs.re, lhs.im),
            rhs: (rhs.re, rhs.im),
            abs_diff,
            tolerance,
            passed: abs_diff <= tolerance,
        }
    }
}

/// Both sides of
/// `S(T,A,α) = ∑_{ℓ|A} μ(ℓ) λ(A/ℓ) S(T/ℓ, ℓ, ℓα)`.
pub fn verify_square_expansion(lambda: &HeckeFn, sieve: &SieveTables, t: f64, a: u64, alpha: f64) -> Result<IdentityCheck> {
    let lhs = square_sum(lambda, t, a, alpha)?.value();
    let mut rhs = ComplexSum::new();
    for (l, mu) in sieve.squarefree_divisors(a) {
        let inner = square_sum(lambda, t / l as f64, l, canonical_alpha(l as f64 * alpha))?;
        rhs.add_scaled(mu as f64 * lambda.get(a / l), inner.value());
    }
    Ok(IdentityCheck::new(lhs, rhs.value(), 1e-8))
}

/// `M(T, α) = ∑_{n≤T} g(n) e(nα)` with `g(n) = ∑_{n = md²} λ(m²)`.
pub fn square_class_sum(lambda: &HeckeFn, t: f64, alpha: f64) -> Result<Complex64> {
    let x = t.max(0.0).floor() as u64;
    check_limit("square-class sum", x.saturating_mul(x), lambda.limit())?;
    let mut g = vec![0.0f64; x as usize + 1];
    let mut d = 1u64;
    while d * d <= x {
        for m in 1..=x / (d * d) {
            g[(m * d * d) as usize] += lambda.get(m * m);
        }
        d += 1;
    }
    Ok(coefficient_sum(0, x, alpha, |n| g[n as usize]).sum.value())
}

/// Both sides of `S(T,α) = ∑_{r≤√T} μ(r) M(T/r², r²α)`.
pub fn verify_square_inversion(lambda: &HeckeFn, sieve: &SieveTables, t: f64, alpha: f64) -> Result<IdentityCheck> {
    let lhs = square_sum(lambda, t, 1, alpha)?.value();
    let mut rhs = ComplexSum::new();
    let mut r = 1u64;
    while ((r * r) as f64) <= t {
        let mu = sieve.mobius(r);
        if mu != 0 {
            let rr = (r * r) as f64;
            let m = square_class_sum(lambda, t / rr, canonical_alpha(rr * alpha))?;
            rhs.add_scaled(mu as f64, m);
        }
        r += 1;
    }
    Ok(IdentityCheck::new(lhs, rhs.value(), 1e-8))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub x: u64,
    pub r: u64,
    /// `(1/R) ∑_j |∑_n c(n) e(nj/R)|²`
    pub mean_square: f64,
    /// `∑_n |c(n)|²`
    pub energy: f64,
    pub rel_err: f64,
    pub passed: bool,
}

/// Discrete Parseval identity for `c(1..=X)` sampled at `R >= X + 1` points.
/// Phases use exact residues `nj mod R`.
pub fn parseval_check(c: &[f64], r: u64) -> Result<ParsevalReport> {
    let x = c.len() as u64;
    if r < x + 1 {
        return Err(Error::InvalidArgument(format!("need R >= X + 1, got R = {r}, X = {x}")));
    }
    let roots: Vec<Complex64> = (0..r).map(|k| e_reduced(k as f64 / r as f64)).collect();
    let samples: Vec<f64> = (0..r)
        .into_par_iter()
        .map(|j| {
            let mut s = ComplexSum::new();
            for (i, &cn) in c.iter().enumerate() {
                let n = i as u64 + 1;
                s.add_scaled(cn, roots[((n * j) % r) as usize]);
            }
            s.value().norm_sqr()
        })
        .collect();
    let mean_square = samples.into_iter().collect::<ExactSum>().value() / r as f64;
    let energy = c.iter().map(|v| v * v).collect::<ExactSum>().value();
    let rel_err = (mean_square - energy).abs() / energy.abs().max(f64::MIN_POSITIVE);
    Ok(ParsevalReport {
        x,
        r,
        mean_square,
        energy,
        rel_err,
        passed: rel_err <= 1e-6,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub x: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    /// |S|/X
    pub per_x: f64,
    /// |S| / (X exp(−c₀ √log X))
    pub normalized: f64,
}

/// Values of a sum along a sorted grid of `X`, built by merging the partial
/// sums over consecutive ranges.
pub fn decay_profile(
    variant: Variant,
    lambda: &HeckeFn,
    sieve: &SieveTables,
    alpha: f64,
    xs: &[u64],
    c0: f64,
) -> Result<Vec<DecayRow>> {
    ensure_range(xs.windows(2).all(|w| w[0] < w[1]) && xs.first().is_some_and(|&x| x >= 2), || {
        "decay grid must be strictly increasing and start at 2 or more".to_string()
    })?;
    let mut running = PartialSum::default();
    let mut prev = 0;
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        running.merge(&variant_partial(variant, lambda, sieve, prev, x, alpha)?);
        prev = x;
        let v = running.sum.value();
        let xf = x as f64;
        rows.push(DecayRow {
            x,
            re: v.re,
            im: v.im,
            abs: v.norm(),
            per_x: v.norm() / xf,
            normalized: v.norm() / (xf * (-c0 * xf.ln().sqrt()).exp()),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuspform::{delta_series, normalize};
    use crate::hecke::{divisor_function, lambda_star, synthetic};
    use crate::numeric::e;
    use crate::sieve::build_sieves;
    use proptest::prelude::*;

    fn delta_fn(limit: u64) -> HeckeFn {
        HeckeFn::from_form(&normalize(&delta_series(limit).unwrap()))
    }

    fn naive(x: u64, alpha: f64, c: impl Fn(u64) -> f64) -> Complex64 {
        (1..=x).map(|n| c(n) * e(n as f64 * alpha)).sum()
    }

    #[test]
    fn trivial_values() {
        let one = HeckeFn::constant_one(1000);
        assert_eq!(linear_sum(&one, 1000, 0.0).unwrap().value(), Complex64::new(1000.0, 0.0));
        assert_eq!(linear_sum(&one, 1000, 0.5).unwrap().value(), Complex64::new(0.0, 0.0));
        let s = build_sieves(1000).unwrap();
        let p = prime_sum(&one, &s, 1000, 0.0, false).unwrap();
        assert_eq!(p.re, 168.0);
        assert_eq!(p.terms, 168);
        let l = delta_fn(100);
        let alpha = 0.37;
        let m1 = moebius_sum(&l, &s, 1, alpha).unwrap();
        assert!((m1.value() - e(alpha)).norm() < 1e-15);
        let p2 = prime_sum(&l, &s, 2, alpha, false).unwrap();
        assert!((p2.value() - l.get(2) * e(2.0 * alpha)).norm() < 1e-15);
    }

    #[test]
    fn sums_agree_with_naive_loops() {
        let s = build_sieves(3000).unwrap();
        let l = delta_fn(3000);
        let m0 = moebius_sum(&l, &s, 1000, 0.0).unwrap();
        let direct: f64 = (1..=1000).map(|n| s.mobius(n) as f64 * l.get(n)).sum();
        assert!((m0.re - direct).abs() < 1e-10 && m0.im == 0.0);
        for alpha in [0.1234, 0.5 + 1e-9, 0.999] {
            let got = prime_sum(&l, &s, 3000, alpha, true).unwrap().value();
            let want = naive(3000, alpha, |n| {
                if s.is_prime(n) {
                    l.get(n) * (n as f64).ln()
                } else {
                    0.0
                }
            });
            assert!((got - want).norm() < 1e-9, "{alpha}");
        }
    }

    #[test]
    fn twisted_sums() {
        let s = build_sieves(2000).unwrap();
        let l = delta_fn(2000);
        let star = lambda_star(&l);
        let t1 = twisted_linear_sum(&l, &star, &s, 1, 500, 0.3).unwrap();
        assert_eq!(t1.result.value(), linear_sum(&l, 500, 0.3).unwrap().value());
        let t2 = twisted_linear_sum(&l, &star, &s, 2, 100, 0.0).unwrap();
        let direct: f64 = (1..=100).map(|n| l.get(2 * n)).sum();
        assert!((t2.result.re - direct).abs() < 1e-10);
        let t6 = twisted_linear_sum(&l, &star, &s, 6, 300, 0.271).unwrap();
        let dual = twisted_via_dual(&l, &s, 6, 300, 0.271).unwrap();
        assert!((t6.result.value() - dual).norm() < 1e-9);
        assert!(t6.comparison > 0.0);
        assert!(twisted_linear_sum(&l, &star, &s, 7, 300, 0.1).is_err());
    }

    #[test]
    fn square_sum_identities() {
        let s = build_sieves(80_000).unwrap();
        let l = delta_fn(80_000);
        let a = square_sum(&l, 1.0, 1, 0.2).unwrap();
        assert!((a.value() - e(0.2)).norm() < 1e-15);
        for aa in [1u64, 2, 6, 30] {
            for alpha in [0.3, 0.61803, 0.0] {
                let c = verify_square_expansion(&l, &s, 50.0, aa, alpha).unwrap();
                assert!(c.passed, "A={aa} alpha={alpha}: {c:?}");
            }
        }
        let c = verify_square_inversion(&l, &s, 1.0, 0.4).unwrap();
        assert!(c.passed && (Complex64::new(c.lhs.0, c.lhs.1) - e(0.4)).norm() < 1e-15);
        assert!(verify_square_inversion(&l, &s, 10.0, 0.3).unwrap().passed);
        let d = divisor_function(&s, 1000).unwrap();
        assert!(verify_square_inversion(&d, &s, 25.0, 0.77).unwrap().passed);
        let syn = synthetic(&s, 80_000, 4).unwrap();
        assert!(verify_square_inversion(&syn, &s, 50.5, 0.123).unwrap().passed);
    }

    #[test]
    fn parseval() {
        let mut c = vec![0.0; 10];
        c[0] = 1.0;
        let r = parseval_check(&c, 11).unwrap();
        assert!(r.passed && (r.energy - 1.0).abs() < 1e-15);
        let s = build_sieves(512).unwrap();
        let l = delta_fn(512);
        let c: Vec<f64> = (1..=512).map(|n| s.mobius(n) as f64 * l.get(n)).collect();
        let r = parseval_check(&c, 1024).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(parseval_check(&c, 512).is_err());
    }

    #[test]
    fn decay_profile_merges_ranges() {
        let s = build_sieves(200_000).unwrap();
        let one = HeckeFn::constant_one(200_000);
        let rows = decay_profile(Variant::Moebius, &one, &s, 0.0, &[100, 10_000, 200_000], 1.0).unwrap();
        let mertens: i64 = (1..=200_000).map(|n| s.mobius(n) as i64).sum();
        assert_eq!(rows[2].re, mertens as f64);
        assert!(rows[2].per_x < 0.01);
        let whole = moebius_sum(&one, &s, 10_000, 0.0).unwrap();
        assert_eq!(rows[1].re, whole.re);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn split_is_exact(seed in 0u64..1000, cut in 1u64..150_000, alpha in 0.0f64..1.0) {
            let s = build_sieves(150_000).unwrap();
            let l = synthetic(&s, 150_000, seed).unwrap();
            let whole = variant_partial(Variant::Moebius, &l, &s, 0, 150_000, alpha).unwrap();
            let mut left = variant_partial(Variant::Moebius, &l, &s, 0, cut, alpha).unwrap();
            let right = variant_partial(Variant::Moebius, &l, &s, cut, 150_000, alpha).unwrap();
            left.merge(&right);
            prop_assert_eq!(whole.sum.value(), left.sum.value());
        }

        #[test]
        fn periodicity_and_conjugation(alpha in 0.0f64..1.0, x in 1u64..5000) {
            let s = build_sieves(5000).unwrap();
            let l = synthetic(&s, 5000, 11).unwrap();
            let base = linear_sum(&l, x, alpha).unwrap();
            prop_assert!(base.triangle_ok());
            let shifted = linear_sum(&l, x, alpha + 1.0).unwrap();
            prop_assert!((base.value() - shifted.value()).norm() <= 1e-10 * (1.0 + base.abs()));
            let conj = linear_sum(&l, x, -alpha).unwrap();
            prop_assert!((base.value().conj() - conj.value()).norm() <= 1e-10 * (1.0 + base.abs()));
        }
    }
}
