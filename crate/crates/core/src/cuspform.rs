//! Exact Fourier coefficients of the level-one eigenforms Δ (weight 12) and
//! Δ·E₄ (weight 16), and their normalized Hecke eigenvalues.

use std::io::{self, Read, Write};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series;

/// Default cap on the number of exactly computed coefficients.
pub const DEFAULT_EXACT_CAP: u64 = 100_000;

const CACHE_MAGIC: &[u8; 4] = b"OLCF";
const CACHE_VERSION: u32 = 1;

/// Exact coefficients `a(1..=limit)` of a normalized Hecke eigenform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspFormSeries {
    weight: u32,
    // index 0 is unused and holds zero
    coeffs: Vec<BigInt>,
}

impl CuspFormSeries {
    /// Wraps coefficients `a(1), a(2), ...`; `a(1)` must be 1.
    pub fn from_coefficients(weight: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if weight < 12 || weight % 2 == 1 {
            return Err(Error::InvalidArgument(format!(
                "cusp form weight must be even and at least 12, got {weight}"
            )));
        }
        if coeffs.first() != Some(&BigInt::one()) {
            return Err(Error::InvalidArgument("a(1) must equal 1".into()));
        }
        let mut all = Vec::with_capacity(coeffs.len() + 1);
        all.push(BigInt::zero());
        all.extend(coeffs);
        Ok(CuspFormSeries { weight, coeffs: all })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn limit(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    pub fn coeff(&self, n: u64) -> &BigInt {
        assert!(n >= 1 && n <= self.limit(), "coefficient index {n} out of range");
        &self.coeffs[n as usize]
    }

    /// `a(1..=limit)`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs[1..]
    }

    /// q-expansion with the zero constant term at index 0.
    fn q_series(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.weight.to_le_bytes())?;
        w.write_all(&self.limit().to_le_bytes())?;
        for a in self.coeffs() {
            let bytes = a.to_signed_bytes_le();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(&bytes)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 20];
        read_exact(&mut r, &mut head)?;
        if &head[..4] != CACHE_MAGIC {
            return Err(Error::Format("bad coefficient cache magic".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported coefficient cache version {version}")));
        }
        let weight = u32::from_le_bytes(head[8..12].try_into().unwrap());
        let limit = u64::from_le_bytes(head[12..20].try_into().unwrap());
        let mut coeffs = Vec::with_capacity(limit.min(1 << 24) as usize);
        for _ in 0..limit {
            let mut len = [0u8; 4];
            read_exact(&mut r, &mut len)?;
            let mut bytes = vec![0u8; u32::from_le_bytes(len) as usize];
            read_exact(&mut r, &mut bytes)?;
            coeffs.push(BigInt::from_signed_bytes_le(&bytes));
        }
        Self::from_coefficients(weight, coeffs).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn cache_file_name(weight: u32, limit: u64) -> String {
        format!("coeffs-w{weight}-{limit}.bin")
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("truncated coefficient cache".into()),
        _ => Error::Io(e),
    })
}

fn check_limit(limit: u64, cap: u64) -> Result<()> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    if limit > cap {
        return Err(Error::Capacity {
            what: "exact coefficient limit",
            requested: limit,
            cap,
        });
    }
    Ok(())
}

/// Euler's pentagonal expansion of `∏(1 − qⁿ)` truncated to `len` terms, as
/// sparse `(exponent, sign)` pairs sorted by exponent.
pub fn pentagonal_terms(len: usize) -> Vec<(usize, i8)> {
    let mut terms = vec![(0usize, 1i8)];
    let mut k = 1usize;
    loop {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let lo = k * (3 * k - 1) / 2;
        let hi = k * (3 * k + 1) / 2;
        if lo >= len {
            break;
        }
        terms.push((lo, sign));
        if hi < len {
            terms.push((hi, sign));
        }
        k += 1;
    }
    terms.sort_unstable();
    terms
}

fn sparse_times_dense_i128(sparse: &[(usize, i8)], dense: &[i128]) -> Vec<i128> {
    let len = dense.len();
    let mut out = vec![0i128; len];
    out.par_chunks_mut(4096).enumerate().for_each(|(chunk, slot)| {
        let start = chunk * 4096;
        for &(e, s) in sparse {
            if e >= start + slot.len() {
                break;
            }
            let from = start.max(e);
            for i in from..start + slot.len() {
                let v = dense[i - e];
                if s > 0 {
                    slot[i - start] += v;
                } else {
                    slot[i - start] -= v;
                }
            }
        }
    });
    out
}

fn sparse_times_dense_big(sparse: &[(usize, i8)], dense: &[BigInt]) -> Vec<BigInt> {
    let len = dense.len();
    (0..len)
        .into_par_iter()
        .map(|i| {
            let mut acc = BigInt::zero();
            for &(e, s) in sparse {
                if e > i {
                    break;
                }
                if s > 0 {
                    acc += &dense[i - e];
                } else {
                    acc -= &dense[i - e];
                }
            }
            acc
        })
        .collect()
}

/// `P^power mod q^len` for `P = ∏(1 − qⁿ)`, by repeated sparse-by-dense
/// multiplication. Runs in `i128` while a coefficient bound proves that no
/// partial sum can overflow, and switches to arbitrary precision otherwise.
fn eta_product_power(len: usize, power: u32) -> Vec<BigInt> {
    let sparse = pentagonal_terms(len);
    let mut small = vec![0i128; len];
    small[0] = 1;
    let mut done = 0;
    while done < power {
        let max_abs = small.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let safe = max_abs
            .checked_mul(sparse.len() as u128)
            .is_some_and(|b| b <= i128::MAX as u128);
        if !safe {
            break;
        }
        small = sparse_times_dense_i128(&sparse, &small);
        done += 1;
    }
    let mut big: Vec<BigInt> = small.into_iter().map(BigInt::from).collect();
    while done < power {
        big = sparse_times_dense_big(&sparse, &big);
        done += 1;
    }
    big
}

/// Ramanujan's τ(1..=limit) as the weight-12 series `q·∏(1 − qⁿ)²⁴`.
pub fn delta_series(limit: u64) -> Result<CuspFormSeries> {
    delta_series_capped(limit, DEFAULT_EXACT_CAP)
}

pub fn delta_series_capped(limit: u64, cap: u64) -> Result<CuspFormSeries> {
    check_limit(limit, cap)?;
    let coeffs = eta_product_power(limit as usize, 24);
    CuspFormSeries::from_coefficients(12, coeffs)
}

/// Divisor power sums σ_k(n) for `n = 0..=limit` (σ_k(0) = 0).
fn divisor_power_sums(k: u32, limit: usize) -> Vec<i128> {
    let mut sigma = vec![0i128; limit + 1];
    for d in 1..=limit {
        let dk = (d as i128).pow(k);
        for m in (d..=limit).step_by(d) {
            sigma[m] += dk;
        }
    }
    sigma
}

/// Eisenstein series `E₄ = 1 + 240∑σ₃(n)qⁿ` or `E₆ = 1 − 504∑σ₅(n)qⁿ`,
/// coefficients of `q^0..=q^limit`.
pub fn eisenstein_series(k: u32, limit: u64) -> Result<Vec<BigInt>> {
    let (scale, power) = match k {
        4 => (240i128, 3),
        6 => (-504i128, 5),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Eisenstein series supported for weights 4 and 6, got {k}"
            )))
        }
    };
    if limit > 10_000_000 {
        return Err(Error::Capacity {
            what: "Eisenstein series length",
            requested: limit,
            cap: 10_000_000,
        });
    }
    let sigma = divisor_power_sums(power, limit as usize);
    Ok(sigma
        .iter()
        .enumerate()
        .map(|(n, &s)| if n == 0 { BigInt::one() } else { BigInt::from(scale * s) })
        .collect())
}

/// Independent route to τ: `Δ = (E₄³ − E₆²)/1728`.
pub fn delta_from_eisenstein(limit: u64) -> Result<CuspFormSeries> {
    check_limit(limit, DEFAULT_EXACT_CAP)?;
    let len = limit as usize + 1;
    let e4 = eisenstein_series(4, limit)?;
    let e6 = eisenstein_series(6, limit)?;
    let e4_sq = series::mul_truncated(&e4, &e4, len);
    let e4_cubed = series::mul_truncated(&e4_sq, &e4, len);
    let e6_sq = series::mul_truncated(&e6, &e6, len);
    let diff: Vec<BigInt> = e4_cubed.into_iter().zip(e6_sq).map(|(a, b)| a - b).collect();
    let delta = series::div_exact(&diff, 1728);
    debug_assert!(delta[0].is_zero());
    CuspFormSeries::from_coefficients(12, delta[1..].to_vec())
}

/// The normalized weight-16 eigenform `Δ·E₄`, which spans the
/// one-dimensional space of weight-16 cusp forms.
pub fn weight16_series(limit: u64) -> Result<CuspFormSeries> {
    weight16_series_capped(limit, DEFAULT_EXACT_CAP)
}

pub fn weight16_series_capped(limit: u64, cap: u64) -> Result<CuspFormSeries> {
    check_limit(limit, cap)?;
    let delta = delta_series_capped(limit, cap)?;
    let e4 = eisenstein_series(4, limit)?;
    let product = series::mul_truncated(delta.q_series(), &e4, limit as usize + 1);
    CuspFormSeries::from_coefficients(16, product[1..].to_vec())
}

/// Normalized eigenvalues `λ(n) = a(n)/n^{(k−1)/2}` in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedForm {
    weight: u32,
    // index 0 unused
    lambda: Vec<f64>,
}

impl NormalizedForm {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn limit(&self) -> u64 {
        (self.lambda.len() - 1) as u64
    }

    pub fn lambda(&self, n: u64) -> f64 {
        assert!(n >= 1 && n <= self.limit(), "index {n} out of range");
        self.lambda[n as usize]
    }

    /// `λ(1..=limit)`.
    pub fn values(&self) -> &[f64] {
        &self.lambda[1..]
    }
}

pub fn normalize(form: &CuspFormSeries) -> NormalizedForm {
    let half_even = (form.weight - 2) / 2;
    let lambda = std::iter::once(0.0)
        .chain(form.coeffs().par_iter().enumerate().map(|(i, a)| {
            let n = (i + 1) as f64;
            let scale = n.powi(half_even as i32) * n.sqrt();
            a.to_f64().expect("finite coefficient") / scale
        }).collect::<Vec<_>>())
        .collect();
    NormalizedForm {
        weight: form.weight,
        lambda,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeckeIntegralReport {
    pub bound: u64,
    pub pairs_checked: u64,
    pub first_counterexample: Option<(u64, u64)>,
}

impl HeckeIntegralReport {
    pub fn passed(&self) -> bool {
        self.first_counterexample.is_none()
    }
}

/// Checks `a(m)a(n) = ∑_{d|(m,n)} d^{k−1} a(mn/d²)` exactly for all
/// `m, n <= bound`.
pub fn verify_hecke_integral(form: &CuspFormSeries, bound: u64) -> Result<HeckeIntegralReport> {
    if bound.checked_mul(bound).is_none_or(|b| b > form.limit()) {
        return Err(Error::OutOfRange(format!(
            "bound {bound} needs {bound}^2 <= limit {}",
            form.limit()
        )));
    }
    let k1 = form.weight - 1;
    let mut pairs = 0;
    for m in 1..=bound {
        for n in 1..=bound {
            pairs += 1;
            let lhs = form.coeff(m) * form.coeff(n);
            let g = num_integer::gcd(m, n);
            let mut rhs = BigInt::zero();
            for d in (1..=g).filter(|d| g % d == 0) {
                rhs += BigInt::from(d).pow(k1) * form.coeff(m * n / (d * d));
            }
            if lhs != rhs {
                return Ok(HeckeIntegralReport {
                    bound,
                    pairs_checked: pairs,
                    first_counterexample: Some((m, n)),
                });
            }
        }
    }
    Ok(HeckeIntegralReport {
        bound,
        pairs_checked: pairs,
        first_counterexample: None,
    })
}

/// `|a(p)| <= 2 p^{(k−1)/2}` checked exactly as `a(p)² <= 4 p^{k−1}`.
/// Returns the first prime that violates it.
pub fn deligne_violation(form: &CuspFormSeries, primes: &[u32]) -> Option<u64> {
    primes
        .iter()
        .map(|&p| p as u64)
        .filter(|&p| p <= form.limit())
        .find(|&p| {
            let a = form.coeff(p);
            let lhs = a * a;
            let rhs = BigInt::from(4u8) * BigInt::from(p).pow(form.weight - 1);
            lhs > rhs
        })
}

/// Largest `|a(n)|` bit length, useful to size fixed-width exports.
pub fn max_coefficient_bits(form: &CuspFormSeries) -> u64 {
    form.coeffs().iter().map(|a| a.abs().bits()).max().unwrap_or(0)
}

/// Sign of `a(n)` as −1, 0 or 1.
pub fn coefficient_sign(form: &CuspFormSeries, n: u64) -> i32 {
    series::sign_of(form.coeff(n))
}
