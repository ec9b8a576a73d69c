//! Experiment configuration and table loading shared by the command line
//! front end and the verification suite.

use std::fmt;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cuspform::{self, CuspFormSeries, DEFAULT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::hecke::{self, lambda_star, HeckeFn, LambdaStar};
use crate::sieve::{build_sieves, SieveTables, DEFAULT_MEMORY_CAP};
use crate::vaughan::VaughanParams;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormSelector {
    Delta,
    Weight16,
    Synthetic { seed: u64 },
    /// pre-normalized values read from a CSV file written by `HeckeFn::write_csv`
    Table { path: PathBuf },
}

impl FormSelector {
    pub fn weight(&self) -> Option<u32> {
        match self {
            FormSelector::Delta => Some(12),
            FormSelector::Weight16 => Some(16),
            _ => None,
        }
    }
}

impl FromStr for FormSelector {
    type Err = Error;

    /// `delta`, `weight12`, `weight16`, `synthetic:<seed>`, `table:<path>`
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "delta" | "weight12" | "12" => return Ok(FormSelector::Delta),
            "weight16" | "16" => return Ok(FormSelector::Weight16),
            "synthetic" => return Ok(FormSelector::Synthetic { seed: 0 }),
            _ => {}
        }
        if let Some(seed) = lower.strip_prefix("synthetic:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad synthetic seed in {s:?}")))?;
            return Ok(FormSelector::Synthetic { seed });
        }
        if let Some(path) = s.trim().strip_prefix("table:") {
            return Ok(FormSelector::Table { path: PathBuf::from(path) });
        }
        Err(Error::InvalidArgument(format!("unknown form {s:?}")))
    }
}

impl fmt::Display for FormSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSelector::Delta => write!(f, "delta"),
            FormSelector::Weight16 => write!(f, "weight16"),
            FormSelector::Synthetic { seed } => write!(f, "synthetic:{seed}"),
            FormSelector::Table { path } => write!(f, "table:{}", path.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSource {
    Decimal { value: f64 },
    Rational { a: i64, q: u64 },
    /// `(√5 − 1)/2`
    Golden,
    /// `√2 − 1`
    Sqrt2Minus1,
}

impl AlphaSource {
    pub fn value(&self) -> f64 {
        match *self {
            AlphaSource::Decimal { value } => value,
            AlphaSource::Rational { a, q } => a as f64 / q as f64,
            AlphaSource::Golden => (5f64.sqrt() - 1.0) / 2.0,
            AlphaSource::Sqrt2Minus1 => 2f64.sqrt() - 1.0,
        }
    }
}

impl FromStr for AlphaSource {
    type Err = Error;

    /// `golden`, `sqrt2-1`, `third`, `a/q`, or a decimal.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "golden" | "phi" => return Ok(AlphaSource::Golden),
            "sqrt2-1" | "sqrt2m1" => return Ok(AlphaSource::Sqrt2Minus1),
            "third" => return Ok(AlphaSource::Rational { a: 1, q: 3 }),
            _ => {}
        }
        let bad = || Error::InvalidArgument(format!("cannot parse alpha {s:?}"));
        if let Some((a, q)) = t.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(Error::InvalidArgument("alpha denominator is zero".into()));
            }
            return Ok(AlphaSource::Rational { a, q });
        }
        let value: f64 = t.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(AlphaSource::Decimal { value })
    }
}

impl fmt::Display for AlphaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSource::Decimal { value } => write!(f, "{value}"),
            AlphaSource::Rational { a, q } => write!(f, "{a}/{q}"),
            AlphaSource::Golden => write!(f, "golden"),
            AlphaSource::Sqrt2Minus1 => write!(f, "sqrt2-1"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamPolicy {
    /// `X^{1/5}`
    Auto,
    Fixed(f64),
}

impl ParamPolicy {
    pub fn resolve(self, x: u64) -> f64 {
        match self {
            ParamPolicy::Auto => crate::vaughan::fifth_root(x),
            ParamPolicy::Fixed(v) => v,
        }
    }
}

impl FromStr for ParamPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(ParamPolicy::Auto);
        }
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("expected 'auto' or a number, got {s:?}")))?;
        if !(v >= 1.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("parameter must be >= 1, got {v}")));
        }
        Ok(ParamPolicy::Fixed(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub form: FormSelector,
    pub limit: u64,
    pub alpha: AlphaSource,
    pub c1: f64,
    pub y: ParamPolicy,
    pub z: ParamPolicy,
    pub format: OutputFormat,
    pub seed: u64,
    /// worker count; deliberately not serialized, outputs must not depend on it
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            form: FormSelector::Delta,
            limit: 10_000,
            alpha: AlphaSource::Golden,
            c1: 1.0,
            y: ParamPolicy::Auto,
            z: ParamPolicy::Auto,
            format: OutputFormat::Csv,
            seed: 0,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.limit < 2 {
            return Err(Error::InvalidArgument("limit must be at least 2".into()));
        }
        if self.limit > DEFAULT_MEMORY_CAP {
            return Err(Error::Capacity { what: "limit", requested: self.limit, cap: DEFAULT_MEMORY_CAP });
        }
        if self.form.weight().is_some() && self.limit > DEFAULT_EXACT_CAP {
            return Err(Error::Capacity {
                what: "exact coefficient limit",
                requested: self.limit,
                cap: DEFAULT_EXACT_CAP,
            });
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::InvalidArgument(format!("c1 must be positive, got {}", self.c1)));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        self.vaughan_params()?;
        Ok(())
    }

    pub fn vaughan_params(&self) -> Result<VaughanParams> {
        VaughanParams::new(self.y.resolve(self.limit), self.z.resolve(self.limit))
    }
}

/// `"1e5"`, `"100000"`, `"10_000"` → integer limit.
pub fn parse_limit(s: &str) -> Result<u64> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse limit {s:?}")))?;
    if !(v >= 0.0 && v < 2f64.powi(63) && v.fract() == 0.0) {
        return Err(Error::InvalidArgument(format!("limit {s:?} is not a nonnegative integer")));
    }
    Ok(v as u64)
}

/// Sieve, normalized eigenvalues and λ* up to a common limit.
#[derive(Clone, Debug)]
pub struct Lab {
    pub sieve: SieveTables,
    pub lambda: HeckeFn,
    pub star: LambdaStar,
    /// exact coefficients when the form is a shipped eigenform
    pub series: Option<CuspFormSeries>,
}

impl Lab {
    /// Builds or loads everything needed for `form` up to `limit`. With a
    /// cache directory, sieve tables and exact coefficients are reused from it.
    pub fn load(form: &FormSelector, limit: u64, cache_dir: Option<&Path>) -> Result<Lab> {
        let sieve = match cache_dir {
            Some(dir) => SieveTables::load_or_build(dir, limit)?,
            None => build_sieves(limit)?,
        };
        let (lambda, series) = match form {
            FormSelector::Delta | FormSelector::Weight16 => {
                let weight = form.weight().unwrap_or(12);
                let series = exact_series(weight, limit, cache_dir)?;
                (HeckeFn::from_form(&cuspform::normalize(&series)), Some(series))
            }
            FormSelector::Synthetic { seed } => (hecke::synthetic(&sieve, limit, *seed)?, None),
            FormSelector::Table { path } => {
                let table = HeckeFn::read_csv(BufReader::new(fs::File::open(path)?))?;
                if table.limit() < limit {
                    return Err(Error::OutOfRange(format!(
                        "table {} holds {} values, {limit} requested",
                        path.display(),
                        table.limit()
                    )));
                }
                (table.truncated(limit), None)
            }
        };
        let star = lambda_star(&lambda);
        Ok(Lab { sieve, lambda, star, series })
    }
}

fn exact_series(weight: u32, limit: u64, cache_dir: Option<&Path>) -> Result<CuspFormSeries> {
    let compute = || match weight {
        12 => cuspform::delta_series(limit),
        _ => cuspform::weight16_series(limit),
    };
    let Some(dir) = cache_dir else {
        return compute();
    };
    let path = dir.join(CuspFormSeries::cache_file_name(weight, limit));
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(series) = CuspFormSeries::read_cache(BufReader::new(file)) {
            if series.weight() == weight && series.limit() == limit {
                return Ok(series);
            }
        }
    }
    let series = compute()?;
    fs::create_dir_all(dir)?;
    series.write_cache(io::BufWriter::new(fs::File::create(&path)?))?;
    Ok(series)
}
