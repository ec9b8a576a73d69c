//! Elementary arithmetic functions over `1..=limit`, built once by a linear
//! (smallest-prime-factor) sieve and read-only afterwards.
//!
//! Index 0 of every column is unused. Accessors panic when `n` is zero or
//! beyond the limit, the same way slice indexing does.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Default guardrail on the number of table entries.
pub const DEFAULT_MEMORY_CAP: u64 = 200_000_000;

const CACHE_MAGIC: &[u8; 4] = b"OLSV";
const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveTables {
    limit: usize,
    spf: Vec<u32>,
    mobius: Vec<i8>,
    is_prime: Vec<bool>,
    num_divisors: Vec<u32>,
    num_divisors3: Vec<u32>,
    omega: Vec<u8>,
    totient: Vec<u32>,
    primes: Vec<u32>,
}

/// Builds all tables for `1..=limit` with the default memory cap.
pub fn build_sieves(limit: u64) -> Result<SieveTables> {
    build_sieves_capped(limit, DEFAULT_MEMORY_CAP)
}

pub fn build_sieves_capped(limit: u64, cap: u64) -> Result<SieveTables> {
    if limit == 0 {
        return Err(Error::InvalidArgument("sieve limit must be at least 1".into()));
    }
    if limit > cap || limit >= u32::MAX as u64 {
        return Err(Error::Capacity {
            what: "sieve limit",
            requested: limit,
            cap: cap.min(u32::MAX as u64 - 1),
        });
    }
    Ok(SieveTables::linear_sieve(limit as usize))
}

/// `(gcd(m, n), lcm(m, n))`.
pub fn gcd_lcm(m: u64, n: u64) -> (u64, u64) {
    num_integer::Integer::gcd_lcm(&m, &n)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DivisorMoment {
    pub power: u32,
    pub x: u64,
    /// `∑_{n<=x} d(n)^A`
    pub sum: u128,
    /// `sum / (x (log x)^{2^A - 1})` at `x`
    pub ratio_at_x: f64,
    /// the largest such ratio over `2 <= y <= x`, a constant valid on the whole range
    pub constant: f64,
    pub argmax: u64,
}

/// Running moments `∑ d(n)^A` with the smallest constant `C_A` such that
/// `∑_{n<=y} d^A(n) <= C_A y (log y)^{2^A - 1}` for every `2 <= y <= x`.
pub fn divisor_moment(sieve: &SieveTables, power: u32, x: u64) -> Result<DivisorMoment> {
    if !(1..=4).contains(&power) {
        return Err(Error::InvalidArgument(format!("divisor moment power {power} not in 1..=4")));
    }
    if x < 2 || x > sieve.limit() {
        return Err(Error::OutOfRange(format!("x = {x} outside [2, {}]", sieve.limit())));
    }
    let log_power = (1i32 << power) - 1;
    let mut sum = 1u128;
    let (mut constant, mut argmax, mut ratio) = (0.0f64, 2, 0.0);
    for n in 2..=x {
        sum += (sieve.num_divisors(n) as u128).pow(power);
        ratio = sum as f64 / (n as f64 * (n as f64).ln().powi(log_power));
        if ratio > constant {
            constant = ratio;
            argmax = n;
        }
    }
    Ok(DivisorMoment { power, x, sum, ratio_at_x: ratio, constant, argmax })
}

impl SieveTables {
    fn linear_sieve(limit: usize) -> Self {
        let len = limit + 1;
        let mut spf = vec![0u32; len];
        let mut mobius = vec![0i8; len];
        let mut is_prime = vec![false; len];
        let mut num_divisors = vec![0u32; len];
        let mut num_divisors3 = vec![0u32; len];
        let mut omega = vec![0u8; len];
        let mut totient = vec![0u32; len];
        let mut primes: Vec<u32> = Vec::new();
        // exponent of spf(n) in n, and n with that prime power removed
        let mut spf_exp = vec![0u8; len];
        let mut cofactor = vec![0u32; len];

        mobius[1] = 1;
        num_divisors[1] = 1;
        num_divisors3[1] = 1;
        totient[1] = 1;
        cofactor[1] = 1;

        for i in 2..len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                is_prime[i] = true;
                primes.push(i as u32);
                mobius[i] = -1;
                num_divisors[i] = 2;
                num_divisors3[i] = 3;
                omega[i] = 1;
                totient[i] = i as u32 - 1;
                spf_exp[i] = 1;
                cofactor[i] = 1;
            }
            let spf_i = spf[i];
            for &p in &primes {
                if p > spf_i {
                    break;
                }
                let n = i * p as usize;
                if n > limit {
                    break;
                }
                spf[n] = p;
                if p < spf_i {
                    // p appears to the first power
                    spf_exp[n] = 1;
                    cofactor[n] = i as u32;
                    mobius[n] = -mobius[i];
                    num_divisors[n] = num_divisors[i] * 2;
                    num_divisors3[n] = num_divisors3[i] * 3;
                    omega[n] = omega[i] + 1;
                    totient[n] = totient[i] * (p - 1);
                } else {
                    let e = spf_exp[i] as u32 + 1;
                    let rest = cofactor[i] as usize;
                    spf_exp[n] = e as u8;
                    cofactor[n] = rest as u32;
                    mobius[n] = 0;
                    num_divisors[n] = num_divisors[rest] * (e + 1);
                    num_divisors3[n] = num_divisors3[rest] * ((e + 1) * (e + 2) / 2);
                    omega[n] = omega[rest] + 1;
                    totient[n] = totient[i] * p;
                }
            }
        }

        SieveTables {
            limit,
            spf,
            mobius,
            is_prime,
            num_divisors,
            num_divisors3,
            omega,
            totient,
            primes,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    #[inline]
    fn idx(&self, n: u64) -> usize {
        assert!(
            n >= 1 && n as usize <= self.limit,
            "n = {n} outside sieve range 1..={}",
            self.limit
        );
        n as usize
    }

    #[inline]
    pub fn mobius(&self, n: u64) -> i8 {
        self.mobius[self.idx(n)]
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        self.is_prime[self.idx(n)]
    }

    /// d(n)
    #[inline]
    pub fn num_divisors(&self, n: u64) -> u32 {
        self.num_divisors[self.idx(n)]
    }

    /// d₃(n), the number of ordered factorizations n = n₁n₂n₃.
    #[inline]
    pub fn num_divisors3(&self, n: u64) -> u32 {
        self.num_divisors3[self.idx(n)]
    }

    /// ω(n), number of distinct prime factors.
    #[inline]
    pub fn omega(&self, n: u64) -> u8 {
        self.omega[self.idx(n)]
    }

    /// Euler's φ(n).
    #[inline]
    pub fn totient(&self, n: u64) -> u32 {
        self.totient[self.idx(n)]
    }

    /// Smallest prime factor; `spf(1) == 0`.
    #[inline]
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[self.idx(n)] as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= x`.
    pub fn primes_up_to(&self, x: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= x);
        &self.primes[..end]
    }

    /// Prime factorization as `(p, exponent)` pairs in increasing order of `p`.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        let mut n = n;
        self.idx(n);
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub fn largest_prime_factor(&self, n: u64) -> u64 {
        self.factorize(n).last().map_or(1, |&(p, _)| p)
    }

    /// All positive divisors of `n`, sorted.
    pub fn divisors(&self, n: u64) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, e) in self.factorize(n) {
            let base = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..base {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Squarefree divisors of `n` paired with μ(d).
    pub fn squarefree_divisors(&self, n: u64) -> Vec<(u64, i8)> {
        let mut divs = vec![(1u64, 1i8)];
        for (p, _) in self.factorize(n) {
            let base = divs.len();
            for i in 0..base {
                let (d, mu) = divs[i];
                divs.push((d * p, -mu));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Writes the versioned binary cache: magic, version, limit, then the
    /// packed columns (spf, μ, prime bitmap, d, d₃, ω, φ) for `0..=limit`.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(self.limit as u64).to_le_bytes())?;
        write_u32s(&mut w, &self.spf)?;
        let mob: Vec<u8> = self.mobius.iter().map(|&m| m as u8).collect();
        w.write_all(&mob)?;
        let mut bits = vec![0u8; self.limit / 8 + 1];
        for (n, &p) in self.is_prime.iter().enumerate() {
            if p {
                bits[n / 8] |= 1 << (n % 8);
            }
        }
        w.write_all(&bits)?;
        write_u32s(&mut w, &self.num_divisors)?;
        write_u32s(&mut w, &self.num_divisors3)?;
        w.write_all(&self.omega)?;
        write_u32s(&mut w, &self.totient)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad sieve cache magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported sieve cache version {version}")));
        }
        let limit = read_u64(&mut r)?;
        if limit == 0 || limit >= u32::MAX as u64 {
            return Err(Error::Format(format!("implausible sieve limit {limit}")));
        }
        let limit = limit as usize;
        let len = limit + 1;
        let spf = read_u32s(&mut r, len)?;
        let mut mob = vec![0u8; len];
        read_exact(&mut r, &mut mob)?;
        let mobius = mob.into_iter().map(|b| b as i8).collect();
        let mut bits = vec![0u8; limit / 8 + 1];
        read_exact(&mut r, &mut bits)?;
        let is_prime: Vec<bool> = (0..len).map(|n| bits[n / 8] >> (n % 8) & 1 == 1).collect();
        let num_divisors = read_u32s(&mut r, len)?;
        let num_divisors3 = read_u32s(&mut r, len)?;
        let mut omega = vec![0u8; len];
        read_exact(&mut r, &mut omega)?;
        let totient = read_u32s(&mut r, len)?;
        let primes = (0..len as u32).filter(|&n| is_prime[n as usize]).collect();
        Ok(SieveTables {
            limit,
            spf,
            mobius,
            is_prime,
            num_divisors,
            num_divisors3,
            omega,
            totient,
            primes,
        })
    }

    pub fn cache_path(dir: &Path, limit: u64) -> PathBuf {
        dir.join(format!("sieve-{limit}.bin"))
    }

    /// Loads `sieve-<limit>.bin` from `dir` if present, otherwise builds the
    /// tables and writes the cache file.
    pub fn load_or_build(dir: &Path, limit: u64) -> Result<Self> {
        let path = Self::cache_path(dir, limit);
        if path.exists() {
            let file = fs::File::open(&path)?;
            let tables = Self::read_cache(io::BufReader::new(file))?;
            if tables.limit() != limit {
                return Err(Error::Format(format!(
                    "{} holds limit {}, expected {limit}",
                    path.display(),
                    tables.limit()
                )));
            }
            return Ok(tables);
        }
        let tables = build_sieves(limit)?;
        fs::create_dir_all(dir)?;
        let file = fs::File::create(&path)?;
        tables.write_cache(io::BufWriter::new(file))?;
        Ok(tables)
    }
}

fn write_u32s<W: Write>(w: &mut W, xs: &[u32]) -> Result<()> {
    let mut buf = Vec::with_capacity(xs.len() * 4);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("truncated cache file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32s<R: Read>(r: &mut R, len: usize) -> Result<Vec<u32>> {
    let mut buf = vec![0u8; len * 4];
    read_exact(r, &mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
