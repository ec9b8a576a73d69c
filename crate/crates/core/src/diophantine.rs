//! Continued fractions, Dirichlet approximation and major/minor arcs.
//!
//! A double is an exact dyadic rational, so its continued fraction is
//! computed exactly with big integers. For float input the expansion is cut
//! once `q² > 1/ulp(α)`, past which the quotients describe the rounding of
//! `α` rather than the number the caller had in mind.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{float::FloatCore, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{dist_to_int, frac_mul};

pub const MAX_DEPTH: usize = 64;

/// Largest denominator handled, so that `q` and `αq` stay exact in a double.
pub const MAX_DENOMINATOR: u64 = 1 << 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub a: i64,
    pub q: u64,
}

impl Convergent {
    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }

    /// `|α − a/q|`, from a fused `αq − a`.
    pub fn error(&self, alpha: f64) -> f64 {
        (alpha.mul_add(self.q as f64, -(self.a as f64))).abs() / self.q as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuedFraction {
    pub quotients: Vec<i64>,
    pub convergents: Vec<Convergent>,
    /// The expansion ended because the remainder vanished.
    pub terminated: bool,
}

fn dyadic(alpha: f64) -> (BigInt, BigInt) {
    let (mantissa, exponent, sign) = FloatCore::integer_decode(alpha);
    let m = BigInt::from(mantissa) * sign;
    if exponent >= 0 {
        (m << exponent as usize, BigInt::one())
    } else {
        let (num, den) = (m, BigInt::one() << (-exponent) as usize);
        let g = num.gcd(&den);
        (num / &g, den / g)
    }
}

/// Euclid on `num/den`, keeping convergents while `keep(q)` holds.
fn expand(mut num: BigInt, mut den: BigInt, depth: usize, keep: impl Fn(u64) -> bool) -> ContinuedFraction {
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    let mut terminated = false;
    while quotients.len() < depth {
        let (a, r) = num.div_mod_floor(&den);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        let (Some(ai), Some(pi), Some(qi)) = (a.to_i64(), p_next.to_i64(), q_next.to_u64()) else {
            break;
        };
        if qi > MAX_DENOMINATOR || !convergents.is_empty() && !keep(qi) {
            break;
        }
        quotients.push(ai);
        convergents.push(Convergent { a: pi, q: qi });
        (p_prev, p) = (p, p_next);
        (q_prev, q) = (q, q_next);
        if r.is_zero() {
            terminated = true;
            break;
        }
        num = den;
        den = r;
    }
    ContinuedFraction {
        quotients,
        convergents,
        terminated,
    }
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1) - x
    }
}

/// Continued fraction of a float, at most `depth` quotients.
pub fn continued_fraction(alpha: f64, depth: usize) -> Result<ContinuedFraction> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("alpha must be finite".into()));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!("depth must be in 1..={MAX_DEPTH}")));
    }
    let limit = 1.0 / ulp(alpha);
    let (num, den) = dyadic(alpha);
    Ok(expand(num, den, depth, |q| (q as f64) * (q as f64) <= limit))
}

/// Exact continued fraction of `num/den`.
pub fn continued_fraction_rational(num: i64, den: u64, depth: usize) -> Result<ContinuedFraction> {
    if den == 0 {
        return Err(Error::InvalidArgument("zero denominator".into()));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!("depth must be in 1..={MAX_DEPTH}")));
    }
    Ok(expand(BigInt::from(num), BigInt::from(den), depth, |_| true))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub err: f64,
    #[serde(rename = "Q")]
    pub bound: f64,
}

/// A fraction `a/q` with `1 <= q <= Q` and `|α − a/q| <= 1/(qQ)`: the last
/// convergent of the exact expansion of `α` with denominator at most `Q`.
pub fn dirichlet_approx(alpha: f64, bound: f64) -> Result<RationalApprox> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("alpha must be finite".into()));
    }
    if !(bound >= 1.0) || bound > MAX_DENOMINATOR as f64 {
        return Err(Error::InvalidArgument(format!("Q must be in [1, 2^53], got {bound}")));
    }
    let (num, den) = dyadic(alpha);
    let cf = expand(num, den, usize::MAX, |q| q as f64 <= bound);
    let c = *cf.convergents.last().expect("the first convergent has q = 1");
    let approx = RationalApprox {
        a: c.a,
        q: c.q,
        err: c.error(alpha),
        bound,
    };
    assert!(approx.q as f64 <= bound);
    assert!(
        approx.err <= (1.0 + 1e-12) / (approx.q as f64 * bound),
        "Dirichlet bound fails for {alpha} at Q = {bound}: {approx:?}"
    );
    Ok(approx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcKind {
    Major,
    Minor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcLabel {
    pub kind: ArcKind,
    pub approx: RationalApprox,
    pub c1: f64,
    /// `exp((c₁/3) √log X)`; major arcs have `q` at most this
    pub threshold: f64,
}

/// Major iff the Dirichlet denominator at `Q = X exp(−(c₁/3)√log X)` is at
/// most `exp((c₁/3)√log X)`.
pub fn classify_arc(alpha: f64, x: f64, c1: f64) -> Result<ArcLabel> {
    if !(x >= 16.0) {
        return Err(Error::InvalidArgument(format!("X must be at least 16, got {x}")));
    }
    if !(c1 > 0.0) {
        return Err(Error::InvalidArgument(format!("c1 must be positive, got {c1}")));
    }
    let threshold = (c1 / 3.0 * x.ln().sqrt()).exp();
    let bound = (x / threshold).max(1.0);
    let approx = dirichlet_approx(alpha, bound)?;
    let kind = if approx.q as f64 <= threshold {
        ArcKind::Major
    } else {
        ArcKind::Minor
    };
    Ok(ArcLabel {
        kind,
        approx,
        c1,
        threshold,
    })
}

/// First convergent of `α` with `lo < q < hi`.
pub fn convergent_in_window(alpha: f64, lo: f64, hi: f64) -> Option<Convergent> {
    let cf = continued_fraction(alpha, MAX_DEPTH).ok()?;
    cf.convergents
        .into_iter()
        .find(|c| (c.q as f64) > lo && (c.q as f64) < hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinNormSum {
    /// `∑_{0<|m|≤M} min(N, ‖αm‖⁻¹)`
    pub lhs: f64,
    /// `(M + N + MN/q + q) log 2q`
    pub rhs: f64,
    pub ratio: f64,
}

pub fn min_norm_sum(alpha: f64, m: u64, n: u64, approx: &RationalApprox) -> Result<MinNormSum> {
    let q = approx.q as f64;
    let gap = Convergent { a: approx.a, q: approx.q }.error(alpha);
    if gap > (1.0 + 1e-12) / (q * q) {
        return Err(Error::InvalidArgument(format!(
            "{}/{} is not within 1/q² of alpha",
            approx.a, approx.q
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("M and N must be positive".into()));
    }
    let cap = n as f64;
    let half: f64 = (1..=m)
        .map(|k| {
            let d = dist_to_int(frac_mul(k, alpha));
            if d * cap >= 1.0 {
                1.0 / d
            } else {
                cap
            }
        })
        .collect::<crate::numeric::ExactSum>()
        .value();
    // ‖−αm‖ = ‖αm‖
    let lhs = 2.0 * half;
    let (mf, nf) = (m as f64, n as f64);
    let rhs = (mf + nf + mf * nf / q + q) * (2.0 * q).ln();
    Ok(MinNormSum { lhs, rhs, ratio: lhs / rhs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinNormSurvey {
    /// `(α, q, ratio)` per sample
    pub samples: Vec<(f64, u64, f64)>,
    pub max_ratio: f64,
    pub median_ratio: f64,
}

/// `min_norm_sum` at random `α` uniform in `(0, 1)`, each paired with its
/// first convergent denominator in `[q_lo, q_hi]`. Draws without such a
/// convergent are skipped.
pub fn min_norm_survey(samples: usize, q_lo: u64, q_hi: u64, m: u64, n: u64, seed: u64) -> Result<MinNormSurvey> {
    use rand::{Rng, SeedableRng};
    if samples == 0 || q_lo == 0 || q_lo > q_hi {
        return Err(Error::InvalidArgument("need samples > 0 and 1 <= q_lo <= q_hi".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let alpha: f64 = rng.gen();
        let Some(c) = convergent_in_window(alpha, q_lo as f64 - 0.5, q_hi as f64 + 0.5) else {
            continue;
        };
        let approx = RationalApprox { a: c.a, q: c.q, err: c.error(alpha), bound: c.q as f64 };
        out.push((alpha, c.q, min_norm_sum(alpha, m, n, &approx)?.ratio));
    }
    let mut ratios: Vec<f64> = out.iter().map(|s| s.2).collect();
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    let median_ratio = if ratios.len() % 2 == 1 { ratios[mid] } else { 0.5 * (ratios[mid - 1] + ratios[mid]) };
    Ok(MinNormSurvey { max_ratio: ratios[ratios.len() - 1], median_ratio, samples: out })
}

/// `min_{a} |qα − a|`, by brute force over nearby integers.
pub fn best_numerator(alpha: f64, q: u64) -> (i64, f64) {
    let base = (alpha * q as f64).round() as i64;
    (base - 1..=base + 1)
        .map(|a| (a, alpha.mul_add(q as f64, -(a as f64)).abs()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

pub fn reduced(a: i64, q: u64) -> bool {
    num_integer::gcd(a.unsigned_abs(), q) == 1
}

/// Exact sign of `α − a/q`.
pub fn fraction_sign(alpha: f64, c: &Convergent) -> i32 {
    let (num, den) = dyadic(alpha);
    let diff = num * BigInt::from(c.q) - BigInt::from(c.a) * den;
    if diff.is_zero() {
        0
    } else if diff.is_positive() {
        1
    } else {
        -1
    }
}
