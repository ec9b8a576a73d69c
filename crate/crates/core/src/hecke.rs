//! Real Hecke-multiplicative functions, the majorant λ*, and moment sums.
//!
//! A function λ with λ(1) = 1 is Hecke multiplicative when
//! `λ(m)λ(n) = ∑_{d|(m,n)} λ(mn/d²)`. It is determined by its values at
//! primes through `λ(p^{j+1}) = λ(p)λ(p^j) − λ(p^{j−1})`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cuspform::NormalizedForm;
use crate::error::{ensure_range, Error, Result};
use crate::numeric::ExactSum;
use crate::sieve::SieveTables;

/// Relative slack used by every inequality check on float tables.
pub const SLACK: f64 = 1e-9;

/// `lhs <= rhs` up to `SLACK·(1 + |rhs|)`.
#[inline]
pub fn le_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + SLACK * (1.0 + rhs.abs())
}

#[inline]
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Form { weight: u32 },
    Synthetic { seed: u64 },
    PrimePowers,
    /// λ ≡ 1; not Hecke multiplicative, kept as a reference sequence.
    Constant,
    Table,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeckeFn {
    // index 0 unused
    values: Vec<f64>,
    source: Source,
}

impl HeckeFn {
    /// Wraps `λ(1..=limit)`; requires `λ(1) = 1`.
    pub fn from_values(values: Vec<f64>, source: Source) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::InvalidArgument("lambda(1) must equal 1".into()));
        }
        let mut all = Vec::with_capacity(values.len() + 1);
        all.push(0.0);
        all.extend(values);
        Ok(HeckeFn { values: all, source })
    }

    pub fn from_form(form: &NormalizedForm) -> Self {
        Self::from_values(form.values().to_vec(), Source::Form { weight: form.weight() })
            .expect("normalized forms have lambda(1) = 1")
    }

    pub fn constant_one(limit: u64) -> Self {
        Self::from_values(vec![1.0; limit as usize], Source::Constant).unwrap()
    }

    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Whether the table is expected to satisfy the Hecke relation.
    pub fn is_hecke(&self) -> bool {
        !matches!(self.source, Source::Constant)
    }

    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        self.values[n as usize]
    }

    /// `λ(1..=limit)`.
    pub fn values(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn truncated(&self, limit: u64) -> Self {
        let limit = limit.min(self.limit()) as usize;
        HeckeFn {
            values: self.values[..=limit].to_vec(),
            source: self.source.clone(),
        }
    }

    /// `λ(p^j)` from `λ(p)` by the Chebyshev recursion, for any `j`.
    pub fn prime_power_by_recursion(lambda_p: f64, j: u32) -> f64 {
        let (mut prev, mut cur) = (1.0, lambda_p);
        if j == 0 {
            return 1.0;
        }
        for _ in 1..j {
            let next = lambda_p * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// CSV with columns `n,lambda,lambda_star`.
    pub fn write_csv<W: Write>(&self, star: &LambdaStar, mut w: W) -> Result<()> {
        writeln!(w, "n,lambda,lambda_star")?;
        for n in 1..=self.limit() {
            writeln!(w, "{},{},{}", n, self.get(n), star.get(n))?;
        }
        Ok(())
    }

    /// Reads a table written by [`HeckeFn::write_csv`]; extra columns and
    /// `#` comment lines are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (line_no, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line_no == 0 && line.starts_with('n') {
                continue;
            }
            let mut cols = line.split(',');
            let n: u64 = parse_col(cols.next(), line_no)?;
            let v: f64 = parse_col(cols.next(), line_no)?;
            if n != values.len() as u64 + 1 {
                return Err(Error::Format(format!("line {}: expected n = {}", line_no + 1, values.len() + 1)));
            }
            values.push(v);
        }
        Self::from_values(values, Source::Table)
    }
}

fn parse_col<T: std::str::FromStr>(col: Option<&str>, line_no: usize) -> Result<T> {
    col.and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("line {}: malformed column", line_no + 1)))
}

/// Multiplicative extension of prescribed prime-power values to `1..=limit`.
/// `at(p, j)` supplies `λ(p^j)` for `j >= 1`.
pub fn hecke_extend_from_primes<F>(sieve: &SieveTables, limit: u64, mut at: F) -> Result<HeckeFn>
where
    F: FnMut(u64, u32) -> Option<f64>,
{
    ensure_range(limit <= sieve.limit() && limit >= 1, || {
        format!("limit {limit} outside sieve range 1..={}", sieve.limit())
    })?;
    let len = limit as usize + 1;
    let mut values = vec![0.0; len];
    values[1] = 1.0;
    // prime powers first
    for &p in sieve.primes_up_to(limit) {
        let p = p as u64;
        let mut pk = p;
        let mut j = 1;
        loop {
            values[pk as usize] = at(p, j).ok_or(Error::MissingPrimePower { p, exponent: j })?;
            match pk.checked_mul(p) {
                Some(next) if next <= limit => {
                    pk = next;
                    j += 1;
                }
                _ => break,
            }
        }
    }
    for n in 2..=limit {
        let p = sieve.smallest_prime_factor(n);
        let mut pk = p;
        while (n / pk) % p == 0 {
            pk *= p;
        }
        if pk != n {
            values[n as usize] = values[pk as usize] * values[(n / pk) as usize];
        }
    }
    values.remove(0);
    HeckeFn::from_values(values, Source::PrimePowers)
}

/// Hecke-multiplicative function with `λ(p)` drawn uniformly from `[−2, 2]`
/// in increasing order of `p` from a seeded ChaCha stream.
pub fn synthetic(sieve: &SieveTables, limit: u64, seed: u64) -> Result<HeckeFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at_prime = vec![0.0; limit as usize + 1];
    for &p in sieve.primes_up_to(limit) {
        at_prime[p as usize] = rng.gen_range(-2.0..=2.0);
    }
    let mut f = hecke_extend_from_primes(sieve, limit, |p, j| {
        Some(HeckeFn::prime_power_by_recursion(at_prime[p as usize], j))
    })?;
    f.source = Source::Synthetic { seed };
    Ok(f)
}

/// The divisor function d(n), which is Hecke multiplicative with λ(p) = 2.
pub fn divisor_function(sieve: &SieveTables, limit: u64) -> Result<HeckeFn> {
    hecke_extend_from_primes(sieve, limit, |_, j| Some((j + 1) as f64))
}

fn check_product_range(lambda: &HeckeFn, m: u64, n: u64) -> Result<()> {
    ensure_range(m >= 1 && n >= 1 && m.saturating_mul(n) <= lambda.limit(), || {
        format!("m·n = {m}·{n} exceeds table limit {}", lambda.limit())
    })
}

/// Right side of the Hecke relation, `∑_{d|(m,n)} λ(mn/d²)`.
pub fn hecke_product(lambda: &HeckeFn, sieve: &SieveTables, m: u64, n: u64) -> Result<f64> {
    check_product_range(lambda, m, n)?;
    let g = num_integer::gcd(m, n);
    Ok(sieve
        .divisors(g)
        .iter()
        .map(|&d| lambda.get(m * n / (d * d)))
        .collect::<ExactSum>()
        .value())
}

/// Dual form of the Hecke relation, `∑_{d|(m,n)} μ(d) λ(m/d) λ(n/d)`,
/// which equals `λ(mn)` for Hecke-multiplicative λ.
pub fn dual_formula(lambda: &HeckeFn, sieve: &SieveTables, m: u64, n: u64) -> Result<f64> {
    check_product_range(lambda, m, n)?;
    let g = num_integer::gcd(m, n);
    Ok(sieve
        .squarefree_divisors(g)
        .iter()
        .map(|&(d, mu)| mu as f64 * lambda.get(m / d) * lambda.get(n / d))
        .collect::<ExactSum>()
        .value())
}

/// `λ*(n) = (∑_{d|n} λ²(d))^{1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaStar {
    values: Vec<f64>,
}

impl LambdaStar {
    #[inline]
    pub fn get(&self, n: u64) -> f64 {
        self.values[n as usize]
    }

    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }
}

/// Tabulates λ* with one sweep over multiples; every divisor sum is
/// accumulated in increasing order of `d`.
pub fn lambda_star(lambda: &HeckeFn) -> LambdaStar {
    let limit = lambda.limit() as usize;
    let mut sums = vec![0.0f64; limit + 1];
    for d in 1..=limit {
        let sq = lambda.values[d] * lambda.values[d];
        for m in (d..=limit).step_by(d) {
            sums[m] += sq;
        }
    }
    sums[0] = 0.0;
    LambdaStar {
        values: sums.into_iter().map(f64::sqrt).collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropertyTally {
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<(u64, u64)>,
}

impl PropertyTally {
    fn record(&mut self, ok: bool, m: u64, n: u64) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            self.first_violation.get_or_insert((m, n));
        }
    }
}

/// Tallies of the seven λ* inequalities over sampled pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StarReport {
    pub samples: u64,
    /// λ*(n) ≥ 1
    pub at_least_one: PropertyTally,
    /// |λ(m)| ≤ λ*(m)
    pub majorizes: PropertyTally,
    /// m | n ⇒ λ*(m) ≤ λ*(n)
    pub monotone: PropertyTally,
    /// (m, n) = 1 ⇒ λ*(mn) = λ*(m)λ*(n)
    pub coprime_multiplicative: PropertyTally,
    /// |λ(mn)| ≤ λ*(m)λ*(n)
    pub product_bound: PropertyTally,
    /// λ*(mn) ≤ d(m)^{1/2} d(n)^{1/2} λ*(m)λ*(n)
    pub submultiplicative: PropertyTally,
    /// |λ(m)λ(n)| ≤ d((m,n))^{1/2} λ*(mn)
    pub pair_bound: PropertyTally,
}

impl StarReport {
    pub fn tallies(&self) -> [(&'static str, &PropertyTally); 7] {
        [
            ("at_least_one", &self.at_least_one),
            ("majorizes", &self.majorizes),
            ("monotone", &self.monotone),
            ("coprime_multiplicative", &self.coprime_multiplicative),
            ("product_bound", &self.product_bound),
            ("submultiplicative", &self.submultiplicative),
            ("pair_bound", &self.pair_bound),
        ]
    }

    pub fn passed(&self) -> bool {
        self.tallies().iter().all(|(_, t)| t.violations == 0)
    }
}

/// Draws `(m, n)` with `mn <= limit`: `m` log-uniform, then `n` uniform.
pub fn sample_pair<R: Rng>(rng: &mut R, limit: u64) -> (u64, u64) {
    let lnx = (limit as f64).ln();
    let m = ((rng.gen::<f64>() * lnx).exp() as u64).clamp(1, limit);
    let n = rng.gen_range(1..=limit / m);
    if rng.gen::<bool>() {
        (m, n)
    } else {
        (n, m)
    }
}

pub fn check_star_pair(
    lambda: &HeckeFn,
    star: &LambdaStar,
    sieve: &SieveTables,
    m: u64,
    n: u64,
    report: &mut StarReport,
) {
    let mn = m * n;
    let g = num_integer::gcd(m, n);
    let (lm, ln, lmn) = (lambda.get(m), lambda.get(n), lambda.get(mn));
    let (sm, sn, smn) = (star.get(m), star.get(n), star.get(mn));
    let dm = (sieve.num_divisors(m) as f64).sqrt();
    let dn = (sieve.num_divisors(n) as f64).sqrt();
    let dg = (sieve.num_divisors(g) as f64).sqrt();

    report.samples += 1;
    report.at_least_one.record(le_with_slack(1.0, sm) && le_with_slack(1.0, sn), m, n);
    report.majorizes.record(le_with_slack(lm.abs(), sm) && le_with_slack(ln.abs(), sn), m, n);
    // m | mn and (m, n) | n always hold, so (c) is exercised on every pair
    report
        .monotone
        .record(le_with_slack(sm, smn) && le_with_slack(star.get(g), sn), m, n);
    if g == 1 {
        report.coprime_multiplicative.record(close(smn, sm * sn, SLACK), m, n);
    }
    report.product_bound.record(le_with_slack(lmn.abs(), sm * sn), m, n);
    report.submultiplicative.record(le_with_slack(smn, dm * dn * sm * sn), m, n);
    report.pair_bound.record(le_with_slack((lm * ln).abs(), dg * smn), m, n);
}

/// Checks the λ* inequalities on `samples` random pairs with `mn <= limit`.
pub fn check_star_inequalities(
    lambda: &HeckeFn,
    star: &LambdaStar,
    sieve: &SieveTables,
    samples: u64,
    seed: u64,
) -> StarReport {
    let limit = lambda.limit().min(star.limit()).min(sieve.limit());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = StarReport::default();
    for _ in 0..samples {
        let (m, n) = sample_pair(&mut rng, limit);
        check_star_pair(lambda, star, sieve, m, n, &mut report);
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentWeight {
    /// λ(n)²
    Square,
    /// λ(n)^{2j}
    EvenPower { j: u32 },
    /// d(n)^A λ*(n)⁴
    DivisorStar4 { a: u32 },
    /// |λ(n)|
    Abs,
}

impl MomentWeight {
    fn term(&self, lambda: &HeckeFn, star: &LambdaStar, sieve: &SieveTables, n: u64) -> f64 {
        let l = lambda.get(n);
        match *self {
            MomentWeight::Square => l * l,
            MomentWeight::EvenPower { j } => (l * l).powi(j as i32),
            MomentWeight::DivisorStar4 { a } => {
                let s = star.get(n);
                (sieve.num_divisors(n) as f64).powi(a as i32) * (s * s) * (s * s)
            }
            MomentWeight::Abs => l.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentPoint {
    pub x: u64,
    pub sum: f64,
    /// S(X)/X
    pub per_x: f64,
    /// S(X)/(X (log X)^{A₁})
    pub per_x_log: f64,
}

/// Running sums `S(X) = ∑_{n≤X} w(n)` at each checkpoint of `xs` (sorted).
pub fn moment_sum(
    lambda: &HeckeFn,
    star: &LambdaStar,
    sieve: &SieveTables,
    weight: MomentWeight,
    xs: &[u64],
    log_power: f64,
) -> Result<Vec<MomentPoint>> {
    let top = xs.iter().copied().max().unwrap_or(0);
    ensure_range(top <= lambda.limit().min(star.limit()).min(sieve.limit()), || {
        format!("moment range {top} exceeds table limit {}", lambda.limit())
    })?;
    ensure_range(xs.windows(2).all(|w| w[0] <= w[1]) && xs.first() != Some(&0), || {
        "checkpoints must be positive and sorted".to_string()
    })?;
    let mut acc = ExactSum::new();
    let mut n = 0;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        while n < x {
            n += 1;
            acc.add(weight.term(lambda, star, sieve, n));
        }
        let sum = acc.value();
        let xf = x as f64;
        out.push(MomentPoint {
            x,
            sum,
            per_x: sum / xf,
            per_x_log: sum / (xf * xf.ln().powf(log_power)),
        });
    }
    Ok(out)
}

/// Minorant `f(x) = 0.01 + 0.09(x²−1) + 0.1(x⁴−2) − 0.05(x⁶−5)` of `|x|`.
pub fn minorant(x: f64) -> f64 {
    let x2 = x * x;
    0.01 + 0.09 * (x2 - 1.0) + 0.1 * (x2 * x2 - 2.0) - 0.05 * (x2 * x2 * x2 - 5.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeSums {
    pub x: u64,
    pub prime_count: u64,
    /// ∑_{p≤X} |λ(p)| log p
    pub abs_log: f64,
    /// ∑_{p≤X} |λ(p)|
    pub abs: f64,
    /// ∑_{p≤X} λ(p^j) for j = 1..=8, prime powers from the recursion
    pub sym_powers: [f64; 8],
    /// ∑_{p≤X} f(λ(p)) for the minorant f
    pub minorant_sum: f64,
    /// (∑|λ(p)|)·log X / X
    pub abs_normalized: f64,
    /// (∑|λ(p)| log p) / X
    pub abs_log_normalized: f64,
}

impl PrimeSums {
    pub fn minorant_below_abs(&self) -> bool {
        self.minorant_sum <= self.abs
    }
}

pub fn prime_sums(lambda: &HeckeFn, sieve: &SieveTables, x: u64) -> Result<PrimeSums> {
    ensure_range(x >= 2 && x <= lambda.limit().min(sieve.limit()), || {
        format!("prime sum range {x} outside 2..={}", lambda.limit())
    })?;
    let primes = sieve.primes_up_to(x);
    let mut abs_log = ExactSum::new();
    let mut abs = ExactSum::new();
    let mut minor = ExactSum::new();
    let mut sym: Vec<ExactSum> = vec![ExactSum::new(); 8];
    for &p in primes {
        let l = lambda.get(p as u64);
        abs_log.add(l.abs() * (p as f64).ln());
        abs.add(l.abs());
        minor.add(minorant(l));
        let (mut prev, mut cur) = (1.0, l);
        for s in sym.iter_mut() {
            s.add(cur);
            let next = l * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    let xf = x as f64;
    let abs_v = abs.value();
    let abs_log_v = abs_log.value();
    let mut sym_powers = [0.0; 8];
    for (dst, s) in sym_powers.iter_mut().zip(&sym) {
        *dst = s.value();
    }
    Ok(PrimeSums {
        x,
        prime_count: primes.len() as u64,
        abs_log: abs_log_v,
        abs: abs_v,
        sym_powers,
        minorant_sum: minor.value(),
        abs_normalized: abs_v * xf.ln() / xf,
        abs_log_normalized: abs_log_v / xf,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerIdentityReport {
    pub checks: u64,
    pub max_abs_error: f64,
    pub passed: bool,
}

/// Checks, against the tabulated values wherever the prime power is in
/// range, that
/// `λ(p)²−1 = λ(p²)`, `λ(p)⁴−2 = λ(p⁴)+3λ(p²)` and
/// `λ(p)⁶−5 = λ(p⁶)+5λ(p⁴)+9λ(p²)`.
pub fn prime_power_identities(lambda: &HeckeFn, sieve: &SieveTables) -> PowerIdentityReport {
    let limit = lambda.limit().min(sieve.limit());
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for &p in sieve.primes_up_to(limit) {
        let p = p as u64;
        let l = lambda.get(p);
        // tabulated where in range, recursion otherwise
        let at = |j: u32| match p.checked_pow(j) {
            Some(pj) if pj <= limit => lambda.get(pj),
            _ => HeckeFn::prime_power_by_recursion(l, j),
        };
        let (l2, l4, l6) = (at(2), at(4), at(6));
        let errs = [
            (l * l - 1.0) - l2,
            (l.powi(4) - 2.0) - (l4 + 3.0 * l2),
            (l.powi(6) - 5.0) - (l6 + 5.0 * l4 + 9.0 * l2),
        ];
        let scale = 1.0 + l.abs().powi(6);
        for e in errs {
            worst = worst.max(e.abs() / scale);
            checks += 1;
        }
    }
    PowerIdentityReport {
        checks,
        max_abs_error: worst,
        passed: worst <= SLACK,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorantReport {
    pub bound: f64,
    pub step: f64,
    pub grid_points: u64,
    /// max over the grid of f(x) − |x|
    pub max_excess: f64,
    /// f(x) < 0 for every |x| ≥ bound
    pub tail_certified: bool,
}

impl MinorantReport {
    pub fn passed(&self) -> bool {
        self.max_excess <= 0.0 && self.tail_certified
    }
}

/// Grid check of `f(x) <= |x|` on `[−bound, bound]` plus the tail argument:
/// with t = x², `f = −0.03 + t·g(t)` where `g(t) = 0.09 + 0.1t − 0.05t²` is
/// decreasing for t > 1, so `g(bound²) < 0` gives `f < 0` for |x| ≥ bound.
pub fn minorant_check(bound: f64, step: f64) -> Result<MinorantReport> {
    if !(bound >= 3.0) {
        return Err(Error::InvalidArgument(format!("bound must be at least 3, got {bound}")));
    }
    if !(step > 0.0) || step > bound {
        return Err(Error::InvalidArgument(format!("bad grid step {step}")));
    }
    let count = (2.0 * bound / step).ceil() as u64;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=count {
        let x = (-bound + i as f64 * step).min(bound);
        worst = worst.max(minorant(x) - x.abs());
    }
    let t = bound * bound;
    let g = 0.09 + 0.1 * t - 0.05 * t * t;
    Ok(MinorantReport {
        bound,
        step,
        grid_points: count + 1,
        max_excess: worst,
        tail_certified: g < 0.0 && t > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuspform::{delta_series, normalize};
    use crate::sieve::build_sieves;

    fn delta_fn(limit: u64) -> HeckeFn {
        HeckeFn::from_form(&normalize(&delta_series(limit).unwrap()))
    }

    #[test]
    fn extension_examples() {
        let s = build_sieves(200).unwrap();
        let d = divisor_function(&s, 200).unwrap();
        assert_eq!(d.get(12), 6.0);
        assert_eq!(d.get(1), 1.0);
        for n in 1..=200 {
            assert_eq!(d.get(n), s.num_divisors(n) as f64);
        }
        let delta = delta_fn(200);
        assert!(close(delta.get(6), delta.get(2) * delta.get(3), 1e-12));
        let missing = hecke_extend_from_primes(&s, 50, |p, j| (j < 2 || p > 3).then_some(0.5));
        assert!(matches!(missing, Err(Error::MissingPrimePower { p: 2, exponent: 2 })));
    }

    #[test]
    fn dual_formula_examples() {
        let s = build_sieves(1000).unwrap();
        let l = delta_fn(1000);
        assert_eq!(dual_formula(&l, &s, 5, 7).unwrap(), l.get(5) * l.get(7));
        // λ(4) = λ(2)² − 1 with τ(4) = −1472, τ(2) = −24
        let lambda4 = -1472.0 / 2f64.powi(11);
        let lambda2 = -24.0 / 2f64.powf(5.5);
        assert!(close(lambda4, lambda2 * lambda2 - 1.0, 1e-12));
        assert!(close(dual_formula(&l, &s, 2, 2).unwrap(), lambda4, 1e-12));
        // λ(8) = λ(4)λ(2) − λ(2)λ(1)
        let via_dual = dual_formula(&l, &s, 4, 2).unwrap();
        assert!(close(via_dual, l.get(4) * l.get(2) - l.get(2), 1e-12));
        assert!(close(via_dual, l.get(8), 1e-9));
        assert!(matches!(dual_formula(&l, &s, 40, 40), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn hecke_relation_on_synthetic_functions() {
        let s = build_sieves(5000).unwrap();
        for seed in 0..3 {
            let l = synthetic(&s, 5000, seed).unwrap();
            for m in 1..70u64 {
                for n in 1..=5000 / m {
                    let product = hecke_product(&l, &s, m, n).unwrap();
                    assert!(close(l.get(m) * l.get(n), product, 1e-9), "product formula at ({m},{n})");
                    let dual = dual_formula(&l, &s, m, n).unwrap();
                    assert!(close(l.get(m * n), dual, 1e-9), "dual formula at ({m},{n})");
                }
            }
        }
    }

    #[test]
    fn lambda_star_examples() {
        let s = build_sieves(3000).unwrap();
        let one = HeckeFn::constant_one(3000);
        let star = lambda_star(&one);
        for n in 1..=3000 {
            assert!(close(star.get(n), (s.num_divisors(n) as f64).sqrt(), 1e-14));
        }
        let l = delta_fn(3000);
        let star = lambda_star(&l);
        assert_eq!(star.get(1), 1.0);
        for &p in s.primes_up_to(3000) {
            let lp = l.get(p as u64);
            assert!(close(star.get(p as u64), (1.0 + lp * lp).sqrt(), 1e-14));
        }
    }

    #[test]
    fn lambda_star_sweep_matches_divisor_enumeration() {
        let s = build_sieves(50_000).unwrap();
        let l = synthetic(&s, 50_000, 5).unwrap();
        let star = lambda_star(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=50_000u64);
            let direct: f64 = s.divisors(n).iter().map(|&d| l.get(d).powi(2)).sum::<f64>().sqrt();
            assert!(close(star.get(n), direct, 1e-12));
        }
    }

    #[test]
    fn star_inequalities_pairs_and_degenerate_cases() {
        let s = build_sieves(10_000).unwrap();
        let l = delta_fn(10_000);
        let star = lambda_star(&l);
        let mut report = StarReport::default();
        for k in 1..=100 {
            check_star_pair(&l, &star, &s, 1, k, &mut report);
        }
        check_star_pair(&l, &star, &s, 2, 2, &mut report);
        assert!(report.passed(), "{report:?}");
        // (f) at (2,2): λ*(4) ≤ √2·√2·λ*(2)²
        assert!(star.get(4) <= 2.0 * star.get(2).powi(2));

        let d = divisor_function(&s, 10_000).unwrap();
        let dstar = lambda_star(&d);
        for (m, n) in [(4u64, 9u64), (7, 11), (8, 125)] {
            assert!(close(dstar.get(m * n), dstar.get(m) * dstar.get(n), 1e-14));
        }
        let report = check_star_inequalities(&d, &dstar, &s, 2000, 9);
        assert!(report.passed());
        assert!(report.coprime_multiplicative.checked > 100);
    }

    #[test]
    fn star_inequalities_flags_a_broken_table() {
        let s = build_sieves(1000).unwrap();
        let mut vals = vec![1.0; 1000];
        vals[5] = 50.0; // λ(6) far above λ*(6)
        let l = HeckeFn::from_values(vals, Source::Table).unwrap();
        let mut star = lambda_star(&HeckeFn::constant_one(1000));
        star.values[6] = 1.0;
        let mut report = StarReport::default();
        check_star_pair(&l, &star, &s, 6, 1, &mut report);
        assert!(!report.passed());
        assert_eq!(report.majorizes.first_violation, Some((6, 1)));
    }

    #[test]
    fn moments() {
        let s = build_sieves(10_000).unwrap();
        let one = HeckeFn::constant_one(10_000);
        let star1 = lambda_star(&one);
        let m = moment_sum(&one, &star1, &s, MomentWeight::Square, &[10, 10_000], 0.0).unwrap();
        assert_eq!(m[0].sum, 10.0);
        assert_eq!(m[1].sum, 10_000.0);

        let l = delta_fn(10_000);
        let star = lambda_star(&l);
        let abs = moment_sum(&l, &star, &s, MomentWeight::Abs, &[10_000], 0.0).unwrap();
        assert!(abs[0].per_x <= 1.0, "mean |λ| = {}", abs[0].per_x);
        assert!(moment_sum(&l, &star, &s, MomentWeight::Abs, &[20_000], 0.0).is_err());
    }

    #[test]
    fn minorant_values() {
        assert!((minorant(0.0) - (-0.03)).abs() < 1e-15);
        assert!((minorant(2.0) - (-1.27)).abs() < 1e-12);
        assert!((minorant(1.0) - 0.11).abs() < 1e-15);
        let r = minorant_check(3.0, 1e-4).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(minorant_check(2.0, 0.1).is_err());
        assert!(minorant_check(3.0, 0.0).is_err());
    }

    #[test]
    fn power_identities_for_delta() {
        let s = build_sieves(20_000).unwrap();
        let l = delta_fn(20_000);
        let r = prime_power_identities(&l, &s);
        assert!(r.passed, "{r:?}");
        let sums = prime_sums(&l, &s, 10_000).unwrap();
        assert!(sums.minorant_below_abs());
        assert!(sums.abs_normalized > 0.1 && sums.abs_normalized < 2.0, "{sums:?}");
        assert_eq!(sums.prime_count, 1229);
    }

    #[test]
    fn csv_round_trip() {
        let s = build_sieves(100).unwrap();
        let l = synthetic(&s, 100, 1).unwrap();
        let star = lambda_star(&l);
        let mut buf = Vec::new();
        l.write_csv(&star, &mut buf).unwrap();
        let back = HeckeFn::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), l.values());
        assert_eq!(back.source(), &Source::Table);
    }
}
