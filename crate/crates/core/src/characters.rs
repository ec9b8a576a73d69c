//! Dirichlet characters, twisted sums, the residue-class decomposition of
//! `∑ λ(n)μ(n)e(an/q)`, and a certified lower bound for `|1 − 2uz + z²|`.
//!
//! `(ℤ/qℤ)^×` is written as a product of cyclic groups: one per odd prime
//! power (generated by a primitive root that works for every power of `p`),
//! and `{±1} × ⟨5⟩` for `2^e`. A character is an exponent vector over these
//! generators and its values are `e(k/D)` with `D` the group exponent, read
//! from one table of roots of unity.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_range, Error, Result};
use crate::hecke::HeckeFn;
use crate::numeric::{e_reduced, ComplexSum};
use crate::sieve::SieveTables;

pub const MAX_MODULUS: u64 = 1_000_000;

#[derive(Clone, Debug)]
struct Factor {
    p: u64,
    /// modulus `p^e` of the component this factor lives in
    modulus: u64,
    order: u64,
    /// discrete log modulo `modulus`, `u32::MAX` off the units
    dlog: Vec<u32>,
}

#[derive(Debug)]
struct GroupTables {
    q: u64,
    factors: Vec<Factor>,
    exponent: u64,
    roots: Vec<Complex64>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn factor_modulus(mut q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut e = 0;
            while q % p == 0 {
                q /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if q > 1 {
        out.push((q, 1));
    }
    out
}

/// Smallest primitive root modulo `p²` (odd `p`), which generates
/// `(ℤ/p^e)^×` for every `e`.
fn universal_primitive_root(p: u64) -> u64 {
    let primes = prime_divisors(p - 1);
    (2..p)
        .find(|&g| {
            primes.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1) && pow_mod(g, p - 1, p * p) != 1
        })
        .expect("primitive roots exist")
}

fn cyclic_dlog(generator: u64, order: u64, modulus: u64) -> Vec<u32> {
    let mut dlog = vec![u32::MAX; modulus as usize];
    let mut x = 1 % modulus;
    for k in 0..order {
        dlog[x as usize] = k as u32;
        x = x * generator % modulus;
    }
    dlog
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

impl GroupTables {
    fn build(q: u64) -> Self {
        let mut factors = Vec::new();
        for (p, e) in factor_modulus(q) {
            let modulus = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    let mut dlog = vec![u32::MAX; modulus as usize];
                    for n in (1..modulus).step_by(2) {
                        dlog[n as usize] = if n % 4 == 1 { 0 } else { 1 };
                    }
                    factors.push(Factor { p, modulus, order: 2, dlog });
                }
                if e >= 3 {
                    let order = modulus / 4;
                    let five = cyclic_dlog(5, order, modulus);
                    let mut dlog = vec![u32::MAX; modulus as usize];
                    for n in (1..modulus).step_by(2) {
                        let m = if n % 4 == 1 { n } else { modulus - n };
                        dlog[n as usize] = five[m as usize];
                    }
                    factors.push(Factor { p, modulus, order, dlog });
                }
            } else {
                let order = modulus / p * (p - 1);
                let g = universal_primitive_root(p);
                let dlog = cyclic_dlog(g, order, modulus);
                factors.push(Factor { p, modulus, order, dlog });
            }
        }
        let exponent = factors
            .iter()
            .fold(1u64, |acc, f| acc / gcd(acc, f.order) * f.order);
        let roots = (0..exponent).map(|k| e_reduced(k as f64 / exponent as f64)).collect();
        GroupTables {
            q,
            factors,
            exponent,
            roots,
        }
    }
}

/// A character modulo `q`, as exponents over the cyclic generators.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<GroupTables>,
    exponents: Vec<u64>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.q == other.group.q && self.exponents == other.exponents
    }
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.group.q
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// `k` with `χ(n) = e(k/D)`, or `None` when `(n, q) > 1`.
    pub fn phase_index(&self, n: u64) -> Option<u64> {
        let g = &self.group;
        if gcd(n, g.q) != 1 {
            return None;
        }
        let mut k = 0u64;
        for (f, &a) in g.factors.iter().zip(&self.exponents) {
            let l = f.dlog[(n % f.modulus) as usize];
            if l == u32::MAX {
                return None;
            }
            k = (k + a * l as u64 % f.order * (g.exponent / f.order)) % g.exponent;
        }
        Some(k)
    }

    pub fn value(&self, n: u64) -> Complex64 {
        match self.phase_index(n) {
            Some(k) => self.group.roots[k as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Group exponent `D`; every value is a `D`-th root of unity or zero.
    pub fn root_order(&self) -> u64 {
        self.group.exponent
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    pub fn is_real(&self) -> bool {
        self.group
            .factors
            .iter()
            .zip(&self.exponents)
            .all(|(f, &a)| (2 * a) % f.order == 0)
    }

    pub fn conjugate(&self) -> Self {
        let exponents = self
            .group
            .factors
            .iter()
            .zip(&self.exponents)
            .map(|(f, &a)| (f.order - a) % f.order)
            .collect();
        DirichletCharacter {
            group: self.group.clone(),
            exponents,
        }
    }

    /// Smallest `p^f` such that the `p`-part of χ is trivial on units that
    /// are `1 mod p^f`, found by direct search.
    fn local_conductor(&self, p: u64, e: u32) -> (u32, Vec<u64>) {
        let g = &self.group;
        let idx: Vec<usize> = g.factors.iter().enumerate().filter(|(_, f)| f.p == p).map(|(i, _)| i).collect();
        let modulus = p.pow(e);
        let local = |n: u64| -> u64 {
            idx.iter()
                .map(|&i| {
                    let f = &g.factors[i];
                    self.exponents[i] * f.dlog[n as usize] as u64 % f.order * (g.exponent / f.order)
                })
                .sum::<u64>()
                % g.exponent
        };
        for f in 0..=e {
            let pf = p.pow(f);
            let trivial = (0..modulus / pf)
                .map(|t| 1 + t * pf)
                .filter(|&n| n % p != 0)
                .all(|n| local(n % modulus) == 0);
            if trivial {
                return (f, idx.iter().map(|&i| self.exponents[i]).collect());
            }
        }
        unreachable!("the full modulus always works")
    }

    pub fn conductor(&self) -> u64 {
        factor_modulus(self.group.q)
            .into_iter()
            .map(|(p, e)| p.pow(self.local_conductor(p, e).0))
            .product()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// The primitive character modulo the conductor that induces χ.
    pub fn primitive(&self) -> DirichletCharacter {
        let group = Arc::new(GroupTables::build(self.conductor()));
        let mut exponents = Vec::with_capacity(group.factors.len());
        for (p, e) in factor_modulus(self.group.q) {
            let (f, local) = self.local_conductor(p, e);
            if f == 0 {
                continue;
            }
            let old: Vec<&Factor> = self.group.factors.iter().filter(|x| x.p == p).collect();
            let new: Vec<&Factor> = group.factors.iter().filter(|x| x.p == p).collect();
            if p == 2 {
                // sign factor first, then the ⟨5⟩ factor when present
                exponents.push(local[0]);
                if new.len() == 2 {
                    exponents.push(local[1] * new[1].order / old[1].order);
                }
            } else {
                exponents.push(local[0] * new[0].order / old[0].order);
            }
        }
        DirichletCharacter { group, exponents }
    }
}

/// All `φ(q)` characters modulo `q`, principal first.
pub fn character_group(q: u64) -> Result<Vec<DirichletCharacter>> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if q > MAX_MODULUS {
        return Err(Error::Capacity {
            what: "character modulus",
            requested: q,
            cap: MAX_MODULUS,
        });
    }
    let group = Arc::new(GroupTables::build(q));
    let orders: Vec<u64> = group.factors.iter().map(|f| f.order).collect();
    let total: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut exponents = Vec::with_capacity(orders.len());
        for &o in &orders {
            exponents.push(idx % o);
            idx /= o;
        }
        out.push(DirichletCharacter {
            group: group.clone(),
            exponents,
        });
    }
    Ok(out)
}

fn check_range(lambda: &HeckeFn, sieve: &SieveTables, x: u64) -> Result<()> {
    ensure_range(x >= 1 && x <= lambda.limit().min(sieve.limit()), || {
        format!("X = {x} outside table range")
    })
}

/// `∑_{p≤X} λ(p)χ(p) log p`.
pub fn twisted_prime_sum(lambda: &HeckeFn, sieve: &SieveTables, chi: &DirichletCharacter, x: u64) -> Result<Complex64> {
    check_range(lambda, sieve, x)?;
    let mut s = ComplexSum::new();
    for &p in sieve.primes_up_to(x) {
        let p = p as u64;
        s.add_scaled(lambda.get(p) * (p as f64).ln(), chi.value(p));
    }
    Ok(s.value())
}

/// `∑_{n≤X} λ(n)μ(n)χ(n)`.
pub fn twisted_moebius_sum(lambda: &HeckeFn, sieve: &SieveTables, chi: &DirichletCharacter, x: u64) -> Result<Complex64> {
    check_range(lambda, sieve, x)?;
    let mut s = ComplexSum::new();
    for n in 1..=x {
        let mu = sieve.mobius(n);
        if mu != 0 {
            s.add_scaled(mu as f64 * lambda.get(n), chi.value(n));
        }
    }
    Ok(s.value())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueCheck {
    pub x: u64,
    pub a: i64,
    pub q: u64,
    pub direct: (f64, f64),
    pub residue_split: (f64, f64),
    pub character_split: (f64, f64),
    pub max_diff: f64,
    pub passed: bool,
}

/// Three evaluations of `T(x, a/q) = ∑_{n≤x} λ(n)μ(n)e(an/q)`: directly;
/// as `∑_b e(ab/q) ∑_{n≡b} λμ(n)`; and with each class `b`, `d = (b, q)`,
/// written as
/// `λ(d)μ(d)/φ(q₁) ∑_{χ mod q₁} χ̄(b₁) ∑_{n₁≤x/d} λμ(n₁) χ(n₁) χ_d(n₁)`
/// where `q = dq₁`, `b = db₁` and `χ_d` is principal modulo `d`.
pub fn residue_decomposition_check(
    lambda: &HeckeFn,
    sieve: &SieveTables,
    x: u64,
    a: i64,
    q: u64,
) -> Result<ResidueCheck> {
    check_range(lambda, sieve, x)?;
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let a_mod = a.rem_euclid(q as i64) as u64;
    let phase = |b: u64| e_reduced(((a_mod * b) % q) as f64 / q as f64);
    let mu_lambda = |n: u64| sieve.mobius(n) as f64 * lambda.get(n);

    let mut direct = ComplexSum::new();
    let mut class_real = vec![crate::numeric::ExactSum::new(); q as usize];
    for n in 1..=x {
        let c = mu_lambda(n);
        if c != 0.0 {
            direct.add_scaled(c, phase(n % q));
            class_real[(n % q) as usize].add(c);
        }
    }
    let mut split = ComplexSum::new();
    for b in 0..q {
        split.add_scaled(class_real[b as usize].value(), phase(b));
    }

    let mut chars = ComplexSum::new();
    for d in sieve.divisors(q) {
        let mu_d = sieve.mobius(d);
        if mu_d == 0 {
            continue;
        }
        let q1 = q / d;
        let group = character_group(q1)?;
        let inner: Vec<Complex64> = group
            .par_iter()
            .map(|chi| {
                let mut s = ComplexSum::new();
                for n1 in 1..=x / d {
                    if gcd(n1, d) == 1 {
                        let c = mu_lambda(n1);
                        if c != 0.0 {
                            s.add_scaled(c, chi.value(n1));
                        }
                    }
                }
                s.value()
            })
            .collect();
        let scale = lambda.get(d) * mu_d as f64 / group.len() as f64;
        for b1 in 0..q1 {
            if gcd(b1, q1) != 1 {
                continue;
            }
            let b = d * b1;
            let mut class = ComplexSum::new();
            for (chi, s) in group.iter().zip(&inner) {
                class.add(chi.value(b1).conj() * s);
            }
            chars.add(phase(b % q) * scale * class.value());
        }
    }
    let (direct, split, chars) = (direct.value(), split.value(), chars.value());
    let max_diff = (direct - split).norm().max((direct - chars).norm());
    Ok(ResidueCheck {
        x,
        a,
        q,
        direct: (direct.re, direct.im),
        residue_split: (split.re, split.im),
        character_split: (chars.re, chars.im),
        max_diff,
        passed: max_diff <= 1e-8 * (1.0 + direct.norm()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateStatus {
    Certified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalFactorCertificate {
    pub step: f64,
    /// `2^{7/64}`
    pub u_max: f64,
    /// `2^{−99/100}`
    pub z_max: f64,
    pub grid_points: u64,
    /// smallest `min_u |G(u, z)|` over the `z` grid
    pub grid_min: f64,
    pub grid_argmin: (f64, f64, f64),
    /// Lipschitz constant of `z ↦ min_u |G(u, z)|` on the covered region
    pub lipschitz: f64,
    /// worst distance from a point of the domain to the nearest grid point
    pub cover_radius: f64,
    /// `grid_min − lipschitz · cover_radius`
    pub certified_min: f64,
    pub status: CertificateStatus,
    /// `1 − 2·3^{−1409/1600} − 3^{−99/50}`
    pub odd_prime_margin: f64,
    pub odd_prime_margin_exceeds_eighth: bool,
    /// `½(2^{99/100} + 2^{−99/100})`, which must exceed `2^{7/64}`
    pub real_root_gap: f64,
}

/// Exact `min_{|u|≤U} |1 − 2uz + z²|` for fixed `z`: the distance from
/// `w = 1 + z²` to the segment `{2uz}`.
pub fn min_over_u(z: Complex64, u_max: f64) -> (f64, f64) {
    let w = Complex64::new(1.0, 0.0) + z * z;
    let zz = z.norm_sqr();
    let u = if zz == 0.0 {
        0.0
    } else {
        ((w * z.conj()).re / (2.0 * zz)).clamp(-u_max, u_max)
    };
    ((w - 2.0 * u * z).norm(), u)
}

/// Lower bound for `|1 − 2uz + z²|` on `|u| <= 2^{7/64}` (u real),
/// `|z| <= 2^{−99/100}`. The minimum over `u` is taken exactly; `z` runs
/// over a square grid of the upper half disk (conjugation symmetry) and the
/// gap between grid points is covered by a Lipschitz bound.
pub fn local_factor_certificate(step: f64) -> Result<LocalFactorCertificate> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::InvalidArgument(format!("grid step must be in (0, 1e-3], got {step}")));
    }
    let u_max = 2f64.powf(7.0 / 64.0);
    let z_max = 2f64.powf(-0.99);
    let cover_radius = step / 2f64.sqrt();
    // grid points up to this radius are needed to cover the disk
    let reach = z_max + cover_radius;
    let lipschitz = 2.0 * u_max + 2.0 * reach;
    let nx = (reach / step).ceil() as i64;
    let rows: Vec<(f64, (f64, f64, f64), u64)> = (0..=nx)
        .into_par_iter()
        .map(|iy| {
            let y = iy as f64 * step;
            let mut best = (f64::INFINITY, (0.0, 0.0, 0.0));
            let mut count = 0;
            for ix in -nx..=nx {
                let xr = ix as f64 * step;
                if xr * xr + y * y > reach * reach {
                    continue;
                }
                let z = Complex64::new(xr, y);
                let (m, u) = min_over_u(z, u_max);
                count += 1;
                if m < best.0 {
                    best = (m, (u, xr, y));
                }
            }
            (best.0, best.1, count)
        })
        .collect();
    let mut grid_min = f64::INFINITY;
    let mut argmin = (0.0, 0.0, 0.0);
    let mut grid_points = 0;
    for (m, arg, count) in rows {
        grid_points += count;
        if m < grid_min {
            grid_min = m;
            argmin = arg;
        }
    }
    // rounding in the evaluation is far below this allowance
    let certified_min = grid_min - lipschitz * cover_radius - 1e-12;
    let odd_prime_margin = 1.0 - 2.0 * 3f64.powf(-1409.0 / 1600.0) - 3f64.powf(-99.0 / 50.0);
    let real_root_gap = 0.5 * (2f64.powf(0.99) + 2f64.powf(-0.99));
    Ok(LocalFactorCertificate {
        step,
        u_max,
        z_max,
        grid_points,
        grid_min,
        grid_argmin: argmin,
        lipschitz,
        cover_radius,
        certified_min,
        status: if certified_min > 0.0 {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Inconclusive
        },
        odd_prime_margin,
        odd_prime_margin_exceeds_eighth: odd_prime_margin > 0.125,
        real_root_gap,
    })
}
