//! Vaughan's identity for μ, the type I / type II split of
//! `T(X, α) = ∑_{n≤X} λ(n)μ(n)e(nα)`, and the bilinear form `A(C, L, α)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_range, Error, Result};
use crate::expsums::{coefficient_sum, ExpSumResult, Variant};
use crate::hecke::HeckeFn;
use crate::numeric::{canonical_alpha, e_reduced, frac_mul, ComplexSum, ExactSum};
use crate::sieve::SieveTables;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VaughanParams {
    pub y: f64,
    pub z: f64,
}

/// `x^{1/5}`, exact when `x` is a perfect fifth power.
pub fn fifth_root(x: u64) -> f64 {
    let r = (x as f64).powf(0.2);
    let k = r.round();
    if (k as u128).pow(5) == x as u128 {
        k
    } else {
        r
    }
}

impl VaughanParams {
    pub fn new(y: f64, z: f64) -> Result<Self> {
        if !(y >= 1.0 && z >= 1.0) {
            return Err(Error::InvalidArgument(format!("need y, z >= 1, got ({y}, {z})")));
        }
        Ok(VaughanParams { y, z })
    }

    /// `y = z = X^{1/5}`.
    pub fn auto(x: u64) -> Self {
        let v = fifth_root(x).max(1.0);
        VaughanParams { y: v, z: v }
    }

    fn y_floor(&self) -> u64 {
        self.y.floor() as u64
    }

    fn z_floor(&self) -> u64 {
        self.z.floor() as u64
    }

    /// Integers `m > max(y, z)` are exactly those above this value.
    pub fn cutoff(&self) -> u64 {
        self.y_floor().max(self.z_floor())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VaughanCheck {
    pub m: u64,
    pub mobius: i64,
    pub type1: i64,
    pub type2: i64,
    pub passed: bool,
}

/// `μ(m) = −∑_{bc|m, b≤y, c≤z} μ(b)μ(c) + ∑_{bc|m, b>y, c>z} μ(b)μ(c)`,
/// evaluated by enumerating all factorizations `bc | m`.
pub fn vaughan_identity_check(sieve: &SieveTables, m: u64, params: VaughanParams) -> Result<VaughanCheck> {
    if m <= params.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "m = {m} must exceed max(y, z) = {}",
            params.y.max(params.z)
        )));
    }
    let (y, z) = (params.y_floor(), params.z_floor());
    let (mut type1, mut type2) = (0i64, 0i64);
    for e in sieve.divisors(m) {
        for (b, mu_b) in sieve.squarefree_divisors(e) {
            let c = e / b;
            let mu_c = sieve.mobius(c) as i64;
            let term = mu_b as i64 * mu_c;
            if b <= y && c <= z {
                type1 += term;
            } else if b > y && c > z {
                type2 += term;
            }
        }
    }
    let mobius = sieve.mobius(m) as i64;
    Ok(VaughanCheck {
        m,
        mobius,
        type1,
        type2,
        passed: mobius == -type1 + type2,
    })
}

/// `w₁(n) = ∑_{bc|n, b≤y, c≤z} μ(b)μ(c)` and `w₂(n)` with `b>y, c>z`.
fn vaughan_weights(sieve: &SieveTables, x: u64, params: VaughanParams) -> (Vec<i32>, Vec<i32>) {
    let (y, z) = (params.y_floor(), params.z_floor());
    let len = x as usize + 1;
    let mut w1 = vec![0i32; len];
    let mut w2 = vec![0i32; len];
    for b in 1..=x {
        let mu_b = sieve.mobius(b) as i32;
        if mu_b == 0 {
            continue;
        }
        for c in 1..=x / b {
            let mu_c = sieve.mobius(c) as i32;
            let target = if b <= y && c <= z {
                &mut w1
            } else if b > y && c > z {
                &mut w2
            } else {
                continue;
            };
            if mu_c == 0 {
                continue;
            }
            let bc = b * c;
            for n in (bc..=x).step_by(bc as usize) {
                target[n as usize] += mu_b * mu_c;
            }
        }
    }
    (w1, w2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub x: u64,
    pub alpha: f64,
    pub params: VaughanParams,
    pub t_direct: (f64, f64),
    /// type I sum restricted to `kbc > max(y, z)`
    pub t1: (f64, f64),
    /// type II sum restricted to `kbc > max(y, z)`
    pub t2: (f64, f64),
    /// `∑_{n≤max(y,z)} λ(n)μ(n)e(nα)`
    pub boundary: (f64, f64),
    /// `|T − (boundary − T₁ + T₂)|`
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// unrestricted type I and II sums
    pub t1_full: (f64, f64),
    pub t2_full: (f64, f64),
    /// `|T − (−T₁ + T₂)|` for the unrestricted sums
    pub full_residual: f64,
}

fn pair(z: Complex64) -> (f64, f64) {
    (z.re, z.im)
}

/// Exact type I / type II decomposition of `T(X, α)`.
pub fn decompose(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    alpha: f64,
    params: VaughanParams,
) -> Result<Decomposition> {
    ensure_range(x >= 1 && x <= lambda.limit().min(sieve.limit()), || {
        format!("X = {x} outside table range")
    })?;
    let alpha = canonical_alpha(alpha);
    let cut = params.cutoff().min(x);
    let (w1, w2) = vaughan_weights(sieve, x, params);
    let mu_lambda = |n: u64| sieve.mobius(n) as f64 * lambda.get(n);

    let t_direct = coefficient_sum(0, x, alpha, mu_lambda).sum.value();
    let boundary = coefficient_sum(0, cut, alpha, mu_lambda).sum.value();
    let t1 = coefficient_sum(cut, x, alpha, |n| w1[n as usize] as f64 * lambda.get(n)).sum.value();
    let t2 = coefficient_sum(cut, x, alpha, |n| w2[n as usize] as f64 * lambda.get(n)).sum.value();
    let low1 = coefficient_sum(0, cut, alpha, |n| w1[n as usize] as f64 * lambda.get(n)).sum.value();
    let low2 = coefficient_sum(0, cut, alpha, |n| w2[n as usize] as f64 * lambda.get(n)).sum.value();
    let (t1_full, t2_full) = (t1 + low1, t2 + low2);

    let residual = (t_direct - (boundary - t1 + t2)).norm();
    let tolerance = 1e-8 * (1.0 + t_direct.norm());
    Ok(Decomposition {
        x,
        alpha,
        params,
        t_direct: pair(t_direct),
        t1: pair(t1),
        t2: pair(t2),
        boundary: pair(boundary),
        residual,
        tolerance,
        passed: residual <= tolerance,
        t1_full: pair(t1_full),
        t2_full: pair(t2_full),
        full_residual: (t_direct - (t2_full - t1_full)).norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Type1Sum {
    pub result: ExpSumResult,
    /// `(Xyz)^{1/2+ε}`
    pub comparison: f64,
}

/// `T₁(X, α) = ∑_{b≤y} μ(b) ∑_{c≤z} μ(c) ∑_{k≤X/bc} λ(kbc)e(kbcα)`, summed
/// in the nested order.
pub fn type1_sum(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    alpha: f64,
    params: VaughanParams,
    eps: f64,
) -> Result<Type1Sum> {
    ensure_range(x >= 1 && x <= lambda.limit().min(sieve.limit()), || {
        format!("X = {x} outside table range")
    })?;
    let alpha = canonical_alpha(alpha);
    let mut total = ComplexSum::new();
    let mut abs = ExactSum::new();
    let mut terms = 0;
    for b in 1..=params.y_floor().min(x) {
        let mu_b = sieve.mobius(b);
        if mu_b == 0 {
            continue;
        }
        for c in 1..=params.z_floor().min(x / b) {
            let mu_c = sieve.mobius(c);
            if mu_c == 0 {
                continue;
            }
            let bc = b * c;
            let mut part = ComplexSum::new();
            for k in 1..=x / bc {
                let v = lambda.get(k * bc);
                if v != 0.0 {
                    part.add_scaled(v, e_reduced(frac_mul(k * bc, alpha)));
                    abs.add(v.abs());
                    terms += 1;
                }
            }
            total.add_scaled((mu_b * mu_c) as f64, part.value());
        }
    }
    let v = total.value();
    let xf = x as f64;
    Ok(Type1Sum {
        result: ExpSumResult {
            re: v.re,
            im: v.im,
            x,
            alpha,
            variant: Variant::Linear,
            terms,
            abs_sum: abs.value(),
        },
        comparison: (xf * params.y * params.z).powf(0.5 + eps),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaCoeffs {
    pub y: f64,
    /// `β_ℓ` for `ℓ = 0..=limit` (index 0 unused)
    pub values: Vec<i64>,
}

impl BetaCoeffs {
    pub fn get(&self, l: u64) -> i64 {
        self.values[l as usize]
    }

    /// `∑_{lo<ℓ≤hi} β_ℓ²`.
    pub fn square_sum(&self, lo: u64, hi: u64) -> u64 {
        ((lo + 1)..=hi).map(|l| (self.get(l) * self.get(l)) as u64).sum()
    }
}

/// `β_ℓ = ∑_{b|ℓ, b>y} μ(b)` for `ℓ <= limit`; asserts `|β_ℓ| <= d(ℓ)`.
pub fn beta_coeffs(sieve: &SieveTables, limit: u64, y: f64) -> Result<BetaCoeffs> {
    if !(y >= 1.0) {
        return Err(Error::InvalidArgument(format!("y must be at least 1, got {y}")));
    }
    ensure_range(limit <= sieve.limit(), || format!("limit {limit} beyond sieve"))?;
    let mut values = vec![0i64; limit as usize + 1];
    for b in (y.floor() as u64 + 1)..=limit {
        let mu = sieve.mobius(b) as i64;
        if mu != 0 {
            for l in (b..=limit).step_by(b as usize) {
                values[l as usize] += mu;
            }
        }
    }
    for l in 1..=limit {
        assert!(values[l as usize].unsigned_abs() <= sieve.num_divisors(l) as u64);
    }
    Ok(BetaCoeffs { y, values })
}

/// A dyadic block: `c ∈ (c_lo, c_hi]`, `ℓ ∈ (l_lo, l_hi]`, `cℓ <= X`, with
/// nominal scales `C = 2^i`, `L = 2^j`. The lower edges are raised to
/// `⌊z⌋` and `⌊y⌋` so that only `c > z` and `ℓ > y` occur.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BilinearBlock {
    pub i: u32,
    pub j: u32,
    pub c_lo: u64,
    pub c_hi: u64,
    pub l_lo: u64,
    pub l_hi: u64,
    /// some pair in the box has `cℓ > X`
    pub constraint_binds: bool,
}

impl BilinearBlock {
    pub fn scale_c(&self) -> f64 {
        (1u64 << self.i) as f64
    }

    pub fn scale_l(&self) -> f64 {
        (1u64 << self.j) as f64
    }
}

/// All nonempty blocks covering `c > z`, `ℓ > y`, `cℓ <= X`, in
/// lexicographic `(i, j)` order.
pub fn dyadic_blocks(x: u64, params: VaughanParams) -> Vec<BilinearBlock> {
    let (y, z) = (params.y_floor(), params.z_floor());
    let mut out = Vec::new();
    let mut i = 0;
    while (1u64 << i) < x {
        let (c_lo, c_hi) = ((1u64 << i).max(z), 1u64 << (i + 1));
        if c_lo < c_hi {
            let mut j = 0;
            while (1u64 << j) < x {
                let (l_lo, l_hi) = ((1u64 << j).max(y), 1u64 << (j + 1));
                if l_lo < l_hi && (c_lo + 1).saturating_mul(l_lo + 1) <= x {
                    out.push(BilinearBlock {
                        i,
                        j,
                        c_lo,
                        c_hi,
                        l_lo,
                        l_hi,
                        constraint_binds: c_hi.saturating_mul(l_hi) > x,
                    });
                }
                j += 1;
            }
        }
        i += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockReport {
    pub block: BilinearBlock,
    /// `T₂(C, L, α)`
    pub t2: (f64, f64),
    /// `∑_{ℓ} |β_ℓ|²` over the block's ℓ range
    pub beta_square_sum: f64,
    /// `A(C, L, α)` from its definition
    pub a: f64,
    /// `A` from the expanded double sum, when within budget
    pub a_expanded: Option<f64>,
    pub diag: f64,
    pub offdiag: f64,
    /// `(#c) ∑_ℓ ∑_c λ(cℓ)²`, a rigorous upper bound for `A`
    pub cauchy_bound: f64,
    /// `∑_{m} d(m)λ(m)²` over the products the block can reach
    pub divisor_moment: f64,
    /// `C²L (log 2CL)²`
    pub trivial_scale: f64,
    /// `|T₂(C,L)|² <= (∑|β|²)·A`
    pub cauchy_schwarz_holds: bool,
}

fn block_report(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    beta: &BetaCoeffs,
    block: BilinearBlock,
    alpha: f64,
    x: u64,
    expanded_budget: u64,
) -> BlockReport {
    let mut t2 = ComplexSum::new();
    let mut a = ExactSum::new();
    let mut diag = ExactSum::new();
    let mut beta_sq = ExactSum::new();
    let mut cauchy = ExactSum::new();
    let c_count = block.c_hi - block.c_lo;
    for l in (block.l_lo + 1)..=block.l_hi {
        let c_top = block.c_hi.min(x / l);
        if c_top <= block.c_lo {
            continue;
        }
        let mut inner = ComplexSum::new();
        let mut sq = ExactSum::new();
        for c in (block.c_lo + 1)..=c_top {
            let mu = sieve.mobius(c);
            if mu == 0 {
                continue;
            }
            let v = lambda.get(c * l);
            inner.add_scaled(mu as f64 * v, e_reduced(frac_mul(c * l, alpha)));
            sq.add(v * v);
        }
        let inner = inner.value();
        let b = beta.get(l) as f64;
        t2.add_scaled(b, inner);
        a.add(inner.norm_sqr());
        let sq = sq.value();
        diag.add(sq);
        cauchy.add(c_count as f64 * sq);
        beta_sq.add(b * b);
    }
    let a = a.value();
    let diag = diag.value();
    let beta_sq = beta_sq.value();
    let t2 = t2.value();

    let l_count = block.l_hi - block.l_lo;
    let a_expanded = (c_count * c_count * l_count <= expanded_budget)
        .then(|| expanded_a(lambda, sieve, block, alpha, x));

    let m_lo = block.c_lo * block.l_lo;
    let m_hi = (block.c_hi * block.l_hi).min(x);
    let divisor_moment = ((m_lo + 1)..=m_hi)
        .map(|m| sieve.num_divisors(m) as f64 * lambda.get(m).powi(2))
        .collect::<ExactSum>()
        .value();

    let (cs, ls) = (block.scale_c(), block.scale_l());
    let log = (2.0 * cs * ls).ln();
    let rhs = beta_sq * a;
    BlockReport {
        block,
        t2: pair(t2),
        beta_square_sum: beta_sq,
        a,
        a_expanded,
        diag,
        offdiag: a - diag,
        cauchy_bound: cauchy.value(),
        divisor_moment,
        trivial_scale: cs * cs * ls * log * log,
        cauchy_schwarz_holds: t2.norm_sqr() <= rhs * (1.0 + 1e-12) + 1e-12,
    }
}

/// `∑_{c₁,c₂} μ(c₁)μ(c₂) ∑_{ℓ ≤ min(X/c₁, X/c₂)} λ(c₁ℓ)λ(c₂ℓ) e(α(c₁−c₂)ℓ)`.
fn expanded_a(lambda: &HeckeFn, sieve: &SieveTables, block: BilinearBlock, alpha: f64, x: u64) -> f64 {
    let cs: Vec<u64> = ((block.c_lo + 1)..=block.c_hi)
        .filter(|&c| sieve.mobius(c) != 0 && c * (block.l_lo + 1) <= x)
        .collect();
    let mut total = ExactSum::new();
    for &c1 in &cs {
        for &c2 in &cs {
            let sign = (sieve.mobius(c1) * sieve.mobius(c2)) as f64;
            let l_top = block.l_hi.min(x / c1.max(c2));
            let mut inner = ComplexSum::new();
            for l in (block.l_lo + 1)..=l_top {
                let diff = c1.abs_diff(c2) * l;
                let mut ph = e_reduced(frac_mul(diff, alpha));
                if c1 < c2 {
                    ph = ph.conj();
                }
                inner.add_scaled(lambda.get(c1 * l) * lambda.get(c2 * l), ph);
            }
            total.add(sign * inner.value().re);
        }
    }
    total.value()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BilinearConstants {
    pub c_eps: f64,
    pub eps: f64,
    pub k_prime: f64,
    pub k: f64,
}

impl Default for BilinearConstants {
    fn default() -> Self {
        BilinearConstants {
            c_eps: 1.0,
            eps: 0.01,
            k_prime: 1.0,
            k: 2.0,
        }
    }
}

/// The two shapes of the bilinear bound at scales `C, L` and denominator `q`:
/// `C²L^{5/6}(CL)^ε` and `(C^{3/2}L + C²Lq^{−1/2} + C^{3/2}L^{1/2}q^{1/2})`.
pub fn bilinear_shapes(c: f64, l: f64, q: f64, eps: f64) -> (f64, f64) {
    let first = c * c * l.powf(5.0 / 6.0) * (c * l).powf(eps);
    let second = c.powf(1.5) * l + c * c * l / q.sqrt() + c.powf(1.5) * l.sqrt() * q.sqrt();
    (first, second)
}

pub fn bilinear_rhs(c: f64, l: f64, q: f64, k: &BilinearConstants) -> f64 {
    let (first, second) = bilinear_shapes(c, l, q, k.eps);
    k.c_eps * first + k.k_prime * second * (2.0 * c * l).ln().powf(k.k)
}

/// Constants fitted so that `A(C, L, α) ≈ bilinear_rhs` over a set of blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BilinearFit {
    pub constants: BilinearConstants,
    /// largest `A / rhs` with the fitted constants
    pub max_ratio: f64,
    pub blocks: usize,
}

/// Log-scale least squares over blocks with `A > 0`: `K` and `log K′` from
/// regressing `log(A / second)` on `log log 2CL`, and `C(ε)` as the
/// geometric-mean ratio of `A` to the first shape.
pub fn fit_bilinear_bound(blocks: &[BlockReport], q: f64, eps: f64) -> Result<BilinearFit> {
    let rows: Vec<(f64, f64, f64, f64)> = blocks
        .iter()
        .filter(|b| b.a > 0.0)
        .map(|b| {
            let (c, l) = (b.block.scale_c(), b.block.scale_l());
            let (first, second) = bilinear_shapes(c, l, q, eps);
            (b.a, first, second, (2.0 * c * l).ln())
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.3.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.0 / r.2).ln()).collect();
    let line = crate::fit::linear_fit(&xs, &ys)?;
    let first = crate::fit::fit_constant(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>())?;
    let constants = BilinearConstants {
        c_eps: first.constant,
        eps,
        k_prime: line.intercept.exp(),
        k: line.slope,
    };
    let max_ratio = rows
        .iter()
        .map(|r| r.0 / (constants.c_eps * r.1 + constants.k_prime * r.2 * r.3.powf(constants.k)))
        .fold(0.0, f64::max);
    Ok(BilinearFit { constants, max_ratio, blocks: rows.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Type2Report {
    pub x: u64,
    pub alpha: f64,
    pub params: VaughanParams,
    pub blocks: Vec<BlockReport>,
    /// ∑ over blocks of `T₂(C, L, α)`
    pub t2_blocks: (f64, f64),
    /// unrestricted `T₂` from the decomposition
    pub t2_full: (f64, f64),
    pub blocks_match: bool,
    pub cauchy_schwarz_holds: bool,
    pub constraint_binds: usize,
}

/// Evaluates every dyadic block of the type II sum in parallel.
pub fn type2_blocks(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    alpha: f64,
    params: VaughanParams,
    expanded_budget: u64,
) -> Result<Type2Report> {
    let dec = decompose(lambda, sieve, x, alpha, params)?;
    let alpha = canonical_alpha(alpha);
    let beta = beta_coeffs(sieve, x, params.y)?;
    let blocks: Vec<BlockReport> = dyadic_blocks(x, params)
        .into_par_iter()
        .map(|b| block_report(lambda, sieve, &beta, b, alpha, x, expanded_budget))
        .collect();
    let mut total = ComplexSum::new();
    for b in &blocks {
        total.add(Complex64::new(b.t2.0, b.t2.1));
    }
    let total = total.value();
    let full = Complex64::new(dec.t2_full.0, dec.t2_full.1);
    Ok(Type2Report {
        x,
        alpha,
        params,
        t2_blocks: pair(total),
        t2_full: dec.t2_full,
        blocks_match: (total - full).norm() <= 1e-8 * (1.0 + full.norm()),
        cauchy_schwarz_holds: blocks.iter().all(|b| b.cauchy_schwarz_holds),
        constraint_binds: blocks.iter().filter(|b| b.block.constraint_binds).count(),
        blocks,
    })
}

/// `A(C, L, α)` for one explicit block.
pub fn bilinear_a(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    block: BilinearBlock,
    alpha: f64,
    x: u64,
    expanded_budget: u64,
) -> Result<BlockReport> {
    ensure_range(
        block.c_hi.saturating_mul(block.l_hi).min(x) <= lambda.limit().min(sieve.limit()),
        || "block reaches beyond the tables".to_string(),
    )?;
    let beta = beta_coeffs(sieve, block.l_hi.min(sieve.limit()), 1.0)?;
    Ok(block_report(lambda, sieve, &beta, block, canonical_alpha(alpha), x, expanded_budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuspform::{delta_series, normalize};
    use crate::expsums::{linear_sum, moebius_sum};
    use crate::sieve::build_sieves;

    fn delta_fn(limit: u64) -> HeckeFn {
        HeckeFn::from_form(&normalize(&delta_series(limit).unwrap()))
    }

    fn params(y: f64, z: f64) -> VaughanParams {
        VaughanParams::new(y, z).unwrap()
    }

    /// Factorization pairs `(b, c)` with `bc | m`, by brute force.
    fn brute_vaughan(s: &SieveTables, m: u64, y: u64, z: u64) -> i64 {
        let mut total = 0i64;
        for b in 1..=m {
            for c in 1..=m / b {
                if m % (b * c) != 0 {
                    continue;
                }
                let t = (s.mobius(b) * s.mobius(c)) as i64;
                if b <= y && c <= z {
                    total -= t;
                } else if b > y && c > z {
                    total += t;
                }
            }
        }
        total
    }

    #[test]
    fn identity_examples() {
        let s = build_sieves(10_000).unwrap();
        let r = vaughan_identity_check(&s, 7, params(2.0, 2.0)).unwrap();
        assert_eq!((r.mobius, r.type1, r.type2, r.passed), (-1, 1, 0, true));
        assert_eq!(brute_vaughan(&s, 30, 3, 3), -1);
        assert!(vaughan_identity_check(&s, 30, params(3.0, 3.0)).unwrap().passed);
        assert!(vaughan_identity_check(&s, 2, params(2.0, 2.0)).is_err());
        for m in 11..=2000 {
            let r = vaughan_identity_check(&s, m, params(10.0, 10.0)).unwrap();
            assert!(r.passed, "m = {m}");
            assert_eq!(-r.type1 + r.type2, brute_vaughan(&s, m, 10, 10));
        }
    }

    #[test]
    fn decomposition_is_exact() {
        let s = build_sieves(20_000).unwrap();
        let one = HeckeFn::constant_one(20_000);
        let d = decompose(&one, &s, 1000, 0.3, params(4.0, 4.0)).unwrap();
        assert!(d.passed, "{d:?}");
        let small = decompose(&one, &s, 3, 0.3, params(4.0, 4.0)).unwrap();
        assert_eq!((small.t1, small.t2), ((0.0, 0.0), (0.0, 0.0)));
        assert_eq!(small.boundary, small.t_direct);
        let l = delta_fn(20_000);
        let d = decompose(&l, &s, 20_000, 0.414_213_562_373_095_1, params(10.0, 10.0)).unwrap();
        assert!(d.passed, "{d:?}");
        let direct = moebius_sum(&l, &s, 20_000, 0.414_213_562_373_095_1).unwrap();
        assert_eq!(d.t_direct, (direct.re, direct.im));
        // the unrestricted split misses only n ≤ max(y, z)
        assert!(d.full_residual <= 4.0 * 10.0 * 10.0, "{}", d.full_residual);
    }

    #[test]
    fn type1_cases() {
        let s = build_sieves(5000).unwrap();
        let l = delta_fn(5000);
        let t = type1_sum(&l, &s, 5000, 0.17, params(1.0, 1.0), 0.01).unwrap();
        let lin = linear_sum(&l, 5000, 0.17).unwrap();
        assert!((t.result.value() - lin.value()).norm() < 1e-9);
        let p = params(6.0, 4.0);
        let t = type1_sum(&l, &s, 5000, 0.17, p, 0.01).unwrap();
        let d = decompose(&l, &s, 5000, 0.17, p).unwrap();
        assert!((t.result.value() - Complex64::new(d.t1_full.0, d.t1_full.1)).norm() < 1e-9);
        let one = HeckeFn::constant_one(5000);
        let t = type1_sum(&one, &s, 300, 0.0, p, 0.0).unwrap();
        let naive: i64 = (1..=6u64)
            .flat_map(|b| (1..=4u64).map(move |c| (b, c)))
            .map(|(b, c)| (s.mobius(b) * s.mobius(c)) as i64 * (300 / (b * c)) as i64)
            .sum();
        assert!((t.result.re - naive as f64).abs() < 1e-9);
    }

    #[test]
    fn beta_examples() {
        let s = build_sieves(1000).unwrap();
        let b = beta_coeffs(&s, 1000, 3.0).unwrap();
        assert_eq!(b.get(12), 1);
        assert_eq!(b.get(3), 0);
        let b1 = beta_coeffs(&s, 1000, 1.0).unwrap();
        assert_eq!(b1.get(1), 0);
        assert!((2..=1000).all(|l| b1.get(l) == -1));
        let big = beta_coeffs(&s, 50, 60.0).unwrap();
        assert!(big.values.iter().all(|&v| v == 0));
        assert!(beta_coeffs(&s, 10, 0.0).is_err());
    }

    #[test]
    fn blocks_reassemble_type2_and_obey_cauchy_schwarz() {
        let s = build_sieves(20_000).unwrap();
        let l = delta_fn(20_000);
        let r = type2_blocks(&l, &s, 20_000, 0.618_033_988_749_894_9, VaughanParams::auto(20_000), 1 << 20).unwrap();
        assert!(r.blocks_match, "{:?} vs {:?}", r.t2_blocks, r.t2_full);
        assert!(r.cauchy_schwarz_holds);
        assert!(r.constraint_binds > 0);
        for b in &r.blocks {
            assert!(b.a <= b.cauchy_bound * (1.0 + 1e-12) + 1e-12);
            assert!(b.diag <= b.divisor_moment * (1.0 + 1e-12) + 1e-12);
            if let Some(e) = b.a_expanded {
                assert!((e - b.a).abs() <= 1e-8 * (1.0 + b.a), "{b:?}");
            }
        }
    }

    #[test]
    fn bilinear_double_evaluation() {
        let s = build_sieves(4096).unwrap();
        let one = HeckeFn::constant_one(4096);
        let block = BilinearBlock { i: 3, j: 3, c_lo: 8, c_hi: 16, l_lo: 8, l_hi: 16, constraint_binds: false };
        let r = bilinear_a(&one, &s, block, 1.0 / 3.0, 4096, u64::MAX).unwrap();
        assert!((r.a_expanded.unwrap() - r.a).abs() < 1e-9 * r.a);
        let unit = BilinearBlock { i: 0, j: 0, c_lo: 1, c_hi: 2, l_lo: 1, l_hi: 2, constraint_binds: false };
        let r = bilinear_a(&one, &s, unit, 0.3, 4096, u64::MAX).unwrap();
        assert_eq!(r.a, r.diag);
        assert_eq!(r.offdiag, 0.0);
    }

    #[test]
    fn block_enumeration() {
        let blocks = dyadic_blocks(1000, params(10.0, 3.0));
        assert!(blocks.iter().all(|b| b.c_lo >= 3 && b.l_lo >= 10));
        assert!(blocks.windows(2).all(|w| (w[0].i, w[0].j) < (w[1].i, w[1].j)));
        // every admissible pair is covered exactly once
        let mut seen = 0;
        for b in &blocks {
            for c in b.c_lo + 1..=b.c_hi {
                for l in b.l_lo + 1..=b.l_hi {
                    if c * l <= 1000 {
                        seen += 1;
                    }
                }
            }
        }
        let want = (4..=1000u64).map(|c| (1000 / c).saturating_sub(10)).sum::<u64>();
        assert_eq!(seen, want);
    }
}
