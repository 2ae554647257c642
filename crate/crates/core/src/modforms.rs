//! Normalized Hecke eigenforms with exact integer Fourier coefficients.
//!
//! Level-one forms of the weights whose cusp space is one-dimensional are
//! built from Eisenstein series: Δ = (E₄³ − E₆²)/1728 and Δ·E₄^i·E₆^j for
//! the remaining weights. Forms of higher level enter only through
//! coefficient files, which are re-verified on load.
//!
//! Signs are always read from the exact integers; λ_f(n) in binary64 is for
//! summation and display.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ntkernel::{self, SpfSieve};
use crate::numerics::ratio_to_f64;
use crate::series::{self, IntSeries};
use crate::{Error, Result, ENGINE_VERSION};

/// Weights for which the level-one cusp space is spanned by one eigenform.
pub const LEVEL_ONE_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Environment variable naming the coefficient cache directory.
pub const CACHE_DIR_ENV: &str = "LFOLD_CACHE_DIR";

/// The first structural invariant a coefficient table fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrityViolation {
    /// a(1) is not 1.
    Normalization { a1: String },
    /// a(m·n) ≠ a(m)·a(n) for the coprime pair (m, n).
    Multiplicativity { m: u64, n: u64 },
    /// a(p^{r+1}) ≠ a(p)a(p^r) − p^{k−1}a(p^{r−1}).
    HeckeRecursion { p: u64, r: u32 },
    /// a(n)² > d(n)²·n^{k−1}.
    Deligne { n: u64 },
}

impl std::fmt::Display for IntegrityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Normalization { a1 } => write!(f, "a(1) = {a1}, expected 1"),
            Self::Multiplicativity { m, n } => {
                write!(f, "multiplicativity fails for the pair ({m}, {n})")
            }
            Self::HeckeRecursion { p, r } => {
                write!(f, "Hecke recursion fails at p = {p}, exponent {}", r + 1)
            }
            Self::Deligne { n } => write!(f, "Deligne bound fails at n = {n}"),
        }
    }
}

/// A normalized Hecke eigenform with coefficients a(1..=x_max).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenform {
    weight: u32,
    level: u64,
    label: String,
    /// index n holds a(n); index 0 is an unused zero
    coeffs: Vec<BigInt>,
}

/// λ_f(n) = a_f(n)/n^{(k−1)/2} with the sign of the exact integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEigenvalue {
    pub n: u64,
    pub value: f64,
    pub exact_sign: i8,
}

/// θ_p ∈ [0, π] with λ_f(p) = 2cos θ_p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakeAngle {
    pub p: u64,
    pub theta: f64,
}

impl SatakeAngle {
    pub fn from_lambda(p: u64, lambda: f64) -> Result<Self> {
        if lambda.abs() > 2.0 + 1e-9 {
            return Err(Error::Invariant(format!(
                "|λ({p})| = {} exceeds 2; coefficient table is corrupt",
                lambda.abs()
            )));
        }
        let theta = (lambda / 2.0).clamp(-1.0, 1.0).acos();
        Ok(Self { p, theta })
    }

    /// Satake parameters (α_p, β_p) = (e^{iθ}, e^{−iθ}) as (re, im) pairs.
    pub fn parameters(&self) -> ((f64, f64), (f64, f64)) {
        let (s, c) = self.theta.sin_cos();
        ((c, s), (c, -s))
    }
}

/// Outcome of the exact Deligne check a(n)² ≤ d(n)²·n^{k−1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeligneReport {
    pub upto: u64,
    pub violations: Vec<u64>,
}

impl DeligneReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// λ_f(n) for 1 ≤ n ≤ upto, together with the exact signs.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTable {
    values: Vec<f64>,
    signs: Vec<i8>,
}

impl LambdaTable {
    pub fn upto(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn sign(&self, n: usize) -> i8 {
        self.signs[n]
    }
}

/// Sidecar metadata stored next to a coefficient file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientMetadata {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    pub count: u64,
}

impl Eigenform {
    /// Wraps a coefficient list a(1), a(2), … after verifying normalization,
    /// multiplicativity, the Hecke recursion and the Deligne bound.
    pub fn from_coefficients(
        weight: u32,
        level: u64,
        label: impl Into<String>,
        coefficients: Vec<BigInt>,
    ) -> Result<Self> {
        let f = Self::from_coefficients_unchecked(weight, level, label, coefficients)?;
        if let Some(v) = f.first_violation() {
            return Err(Error::Integrity(v));
        }
        Ok(f)
    }

    /// As [`Eigenform::from_coefficients`] without the invariant checks.
    pub fn from_coefficients_unchecked(
        weight: u32,
        level: u64,
        label: impl Into<String>,
        coefficients: Vec<BigInt>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Input("empty coefficient table".into()));
        }
        if level == 0 {
            return Err(Error::Input("level must be positive".into()));
        }
        if weight < 2 || weight % 2 == 1 {
            return Err(Error::Input(format!("weight {weight} is not an even integer >= 2")));
        }
        let mut coeffs = Vec::with_capacity(coefficients.len() + 1);
        coeffs.push(BigInt::zero());
        coeffs.extend(coefficients);
        Ok(Self {
            weight,
            level,
            label: label.into(),
            coeffs,
        })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn x_max(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    /// a(n) for 1 ≤ n ≤ x_max.
    pub fn coefficient(&self, n: u64) -> Result<&BigInt> {
        if n == 0 || n > self.x_max() {
            return Err(Error::Range {
                index: n,
                max: self.x_max(),
            });
        }
        Ok(&self.coeffs[n as usize])
    }

    /// a(1), …, a(x_max).
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs[1..]
    }

    pub fn metadata(&self) -> CoefficientMetadata {
        CoefficientMetadata {
            label: self.label.clone(),
            weight: self.weight,
            level: self.level,
            count: self.x_max(),
        }
    }

    /// Truncates the table to a(1..=upto).
    pub fn truncated(&self, upto: u64) -> Result<Self> {
        if upto == 0 || upto > self.x_max() {
            return Err(Error::Range {
                index: upto,
                max: self.x_max(),
            });
        }
        let mut f = self.clone();
        f.coeffs.truncate(upto as usize + 1);
        Ok(f)
    }

    /// Returns a copy with a(n) replaced; for building corrupted fixtures.
    pub fn with_coefficient(&self, n: u64, value: BigInt) -> Result<Self> {
        self.coefficient(n)?;
        let mut f = self.clone();
        f.coeffs[n as usize] = value;
        Ok(f)
    }

    pub fn normalized_lambda(&self, n: u64) -> Result<NormalizedEigenvalue> {
        let a = self.coefficient(n)?;
        Ok(normalized_value(a, n, self.weight))
    }

    /// λ_f(n) for every n ≤ upto, computed in parallel; each entry is
    /// independent so the table does not depend on the thread count.
    pub fn lambda_table(&self, upto: u64) -> Result<LambdaTable> {
        if upto > self.x_max() {
            return Err(Error::Range {
                index: upto,
                max: self.x_max(),
            });
        }
        let entries: Vec<NormalizedEigenvalue> = (1..upto as usize + 1)
            .into_par_iter()
            .with_min_len(512)
            .map(|n| normalized_value(&self.coeffs[n], n as u64, self.weight))
            .collect();
        let mut values = Vec::with_capacity(entries.len() + 1);
        let mut signs = Vec::with_capacity(entries.len() + 1);
        values.push(0.0);
        signs.push(0);
        for e in entries {
            values.push(e.value);
            signs.push(e.exact_sign);
        }
        Ok(LambdaTable { values, signs })
    }

    /// a(p^m), from the table when p^m ≤ x_max and otherwise by the Hecke
    /// recursion a(p^{r+1}) = a(p)a(p^r) − p^{k−1}a(p^{r−1}).
    pub fn coefficient_prime_power(&self, p: u64, m: u32) -> Result<BigInt> {
        if !ntkernel::is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if self.level % p == 0 {
            return Err(Error::Input(format!(
                "p = {p} divides the level {}; ramified primes are unsupported",
                self.level
            )));
        }
        if m == 0 {
            return Ok(BigInt::one());
        }
        if let Some(pm) = p.checked_pow(m) {
            if pm <= self.x_max() {
                return Ok(self.coeffs[pm as usize].clone());
            }
        }
        let ap = self.coefficient(p)?.clone();
        let pk1 = BigInt::from(p).pow(self.weight - 1);
        let mut prev = BigInt::one();
        let mut cur = ap.clone();
        for _ in 1..m {
            let next = &ap * &cur - &pk1 * &prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    pub fn satake_angle(&self, p: u64) -> Result<SatakeAngle> {
        if !ntkernel::is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if self.level % p == 0 {
            return Err(Error::Input(format!("p = {p} divides the level")));
        }
        let lambda = self.normalized_lambda(p)?.value;
        SatakeAngle::from_lambda(p, lambda)
    }

    /// Exact check a(n)² ≤ d(n)²·n^{k−1} for n ≤ upto.
    pub fn verify_deligne(&self, upto: u64) -> Result<DeligneReport> {
        if upto > self.x_max() {
            return Err(Error::Range {
                index: upto,
                max: self.x_max(),
            });
        }
        let sieve = SpfSieve::new(upto as usize);
        let k1 = self.weight - 1;
        let violations: Vec<u64> = (1..upto as usize + 1)
            .into_par_iter()
            .with_min_len(256)
            .filter(|&n| {
                let a = &self.coeffs[n];
                let d = sieve.factorize(n).divisor_count();
                let rhs = BigInt::from(d * d) * BigInt::from(n).pow(k1);
                a * a > rhs
            })
            .map(|n| n as u64)
            .collect();
        Ok(DeligneReport { upto, violations })
    }

    /// First failing pair (m, n), m a prime power and n > 1 coprime to it.
    ///
    /// Checking a(n) = a(p^e)·a(n/p^e) with p the smallest prime of n for
    /// every n implies multiplicativity over all coprime pairs.
    pub fn verify_multiplicativity(&self) -> Option<(u64, u64)> {
        let x = self.x_max() as usize;
        let sieve = SpfSieve::new(x);
        (2..=x).find_map(|n| {
            let p = sieve.spf(n) as usize;
            let mut pe = 1usize;
            while n % (pe * p) == 0 {
                pe *= p;
            }
            let rest = n / pe;
            if rest == 1 {
                return None;
            }
            let (m, r) = (pe.min(rest), pe.max(rest));
            if self.coeffs[n] != &self.coeffs[pe] * &self.coeffs[rest] {
                Some((m as u64, r as u64))
            } else {
                None
            }
        })
    }

    /// First (p, r) at which the Hecke recursion fails on stored prime
    /// powers, for p ∤ N.
    pub fn verify_hecke(&self) -> Option<(u64, u32)> {
        let x = self.x_max();
        let pk1_of = |p: u64| BigInt::from(p).pow(self.weight - 1);
        for p in ntkernel::sieve_primes((x as f64).sqrt() as u64 + 1) {
            if p * p > x || self.level % p == 0 {
                continue;
            }
            let pk1 = pk1_of(p);
            let ap = &self.coeffs[p as usize];
            let mut r = 1u32;
            let mut prev = 1u64;
            let mut cur = p;
            while let Some(next) = cur.checked_mul(p).filter(|&v| v <= x) {
                let expected = ap * &self.coeffs[cur as usize]
                    - &pk1 * if prev == 1 { BigInt::one() } else { self.coeffs[prev as usize].clone() };
                if self.coeffs[next as usize] != expected {
                    return Some((p, r));
                }
                prev = cur;
                cur = next;
                r += 1;
            }
        }
        None
    }

    /// First failing invariant in the order normalization, multiplicativity,
    /// Hecke recursion, Deligne.
    pub fn first_violation(&self) -> Option<IntegrityViolation> {
        if !self.coeffs[1].is_one() {
            return Some(IntegrityViolation::Normalization {
                a1: self.coeffs[1].to_string(),
            });
        }
        if let Some((m, n)) = self.verify_multiplicativity() {
            return Some(IntegrityViolation::Multiplicativity { m, n });
        }
        if let Some((p, r)) = self.verify_hecke() {
            return Some(IntegrityViolation::HeckeRecursion { p, r });
        }
        let report = self.verify_deligne(self.x_max()).expect("in range");
        report
            .violations
            .first()
            .map(|&n| IntegrityViolation::Deligne { n })
    }

    /// Writes the `n,a` table to `path` and the metadata sidecar next to it.
    pub fn write_coefficient_file(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["n", "a"]).map_err(csv_err)?;
        for (n, a) in self.coeffs.iter().enumerate().skip(1) {
            w.write_record([n.to_string(), a.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        let meta = serde_json::to_string_pretty(&self.metadata())
            .map_err(|e| Error::Parse(e.to_string()))?;
        let mut side = File::create(sidecar_path(path))?;
        side.write_all(meta.as_bytes())?;
        side.write_all(b"\n")?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn normalized_value(a: &BigInt, n: u64, weight: u32) -> NormalizedEigenvalue {
    let (value, exact_sign) = normalize_coefficient(a, &BigInt::from(n), weight);
    NormalizedEigenvalue {
        n,
        value,
        exact_sign,
    }
}

/// (a/n^{(k−1)/2}, sign a) for an exact coefficient a = a_f(n).
pub fn normalize_coefficient(a: &BigInt, n: &BigInt, weight: u32) -> (f64, i8) {
    let exact_sign = if a.is_zero() {
        0
    } else if a.is_negative() {
        -1
    } else {
        1
    };
    // λ² = a²/n^{k−1} rounded once, then a correctly rounded sqrt: total
    // error stays below one ulp.
    let lambda_sq = ratio_to_f64(&(a * a), &n.pow(weight - 1));
    (exact_sign as f64 * lambda_sq.sqrt(), exact_sign)
}

/// Sidecar path for a coefficient file: `tau.csv` → `tau.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Exact q-expansion of the level-one cusp eigenform of the given weight,
/// a(1..=upto).
pub fn build_level_one_eigenform(weight: u32, upto: u64) -> Result<Eigenform> {
    if !LEVEL_ONE_WEIGHTS.contains(&weight) {
        return Err(Error::Input(format!(
            "weight {weight} unsupported; expected one of {LEVEL_ONE_WEIGHTS:?}"
        )));
    }
    if upto == 0 {
        return Err(Error::Input("upto must be at least 1".into()));
    }
    let len = upto as usize + 1;
    let e4 = series::eisenstein(4, 240, len);
    let e6 = series::eisenstein(6, -504, len);
    let e4_cubed = series::product(&[&e4, &e4, &e4]);
    let e6_squared = series::product(&[&e6, &e6]);
    let delta = e4_cubed.sub(&e6_squared).div_exact(1728)?;

    let (i, j) = match weight {
        12 => (0, 0),
        16 => (1, 0),
        18 => (0, 1),
        20 => (2, 0),
        22 => (1, 1),
        26 => (2, 1),
        _ => unreachable!(),
    };
    let mut factors: Vec<&IntSeries> = vec![&delta];
    factors.extend(std::iter::repeat_n(&e4, i));
    factors.extend(std::iter::repeat_n(&e6, j));
    let form = series::product(&factors);

    let mut coeffs = form.into_coeffs();
    if !coeffs[0].is_zero() || !coeffs.get(1).is_some_and(|c| c.is_one()) {
        return Err(Error::Internal(format!(
            "weight {weight} series is not a normalized cusp form"
        )));
    }
    coeffs.remove(0);
    let label = match weight {
        12 => "Delta".to_string(),
        _ => format!("level1_weight{weight}"),
    };
    Eigenform::from_coefficients_unchecked(weight, 1, label, coeffs)
}

/// Reads a coefficient file and its sidecar, re-verifying every invariant.
pub fn load_eigenform(path: &Path) -> Result<Eigenform> {
    let meta_raw = std::fs::read_to_string(sidecar_path(path)).map_err(|e| {
        Error::Parse(format!(
            "cannot read metadata {}: {e}",
            sidecar_path(path).display()
        ))
    })?;
    let meta: CoefficientMetadata =
        serde_json::from_str(&meta_raw).map_err(|e| Error::Parse(format!("metadata: {e}")))?;

    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?;
    if headers.len() != 2 || &headers[0] != "n" || &headers[1] != "a" {
        return Err(Error::Parse(format!(
            "expected header `n,a`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut coeffs = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let expected = row as u64 + 1;
        let n: u64 = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("row {expected}: bad index")))?;
        if n != expected {
            return Err(Error::Parse(format!(
                "row {expected}: index {n} breaks the 1, 2, 3, … sequence"
            )));
        }
        let a: BigInt = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("row {expected}: bad coefficient")))?;
        coeffs.push(a);
    }
    if coeffs.len() as u64 != meta.count {
        return Err(Error::Parse(format!(
            "metadata count {} but {} rows",
            meta.count,
            coeffs.len()
        )));
    }
    Eigenform::from_coefficients(meta.weight, meta.level, meta.label, coeffs)
}

/// Directory of cached coefficient tables keyed by weight, level, length and
/// engine version.
#[derive(Clone, Debug)]
pub struct EigenformCache {
    dir: PathBuf,
}

impl EigenformCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The cache named by `LFOLD_CACHE_DIR`, if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(Self::new)
    }

    pub fn path_for(&self, weight: u32, level: u64, upto: u64) -> PathBuf {
        self.dir.join(format!(
            "w{weight}_N{level}_x{upto}_e{ENGINE_VERSION}.csv"
        ))
    }

    /// Loads the level-one form from the cache or builds and stores it.
    pub fn level_one(&self, weight: u32, upto: u64) -> Result<Eigenform> {
        let path = self.path_for(weight, 1, upto);
        if path.exists() {
            log::debug!("loading cached coefficients from {}", path.display());
            return load_eigenform(&path);
        }
        let f = build_level_one_eigenform(weight, upto)?;
        std::fs::create_dir_all(&self.dir)?;
        f.write_coefficient_file(&path)?;
        Ok(f)
    }
}

/// Uses the environment cache when configured, otherwise builds directly.
pub fn level_one_eigenform(weight: u32, upto: u64) -> Result<Eigenform> {
    match EigenformCache::from_env() {
        Some(cache) => cache.level_one(weight, upto),
        None => build_level_one_eigenform(weight, upto),
    }
}
