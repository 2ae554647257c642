//! Shared number-theoretic kernel: primes, factorization, divisor functions,
//! the squarefree sieve and the Kronecker symbol.
//!
//! Everything here works on machine integers. Targets in this crate stay
//! below 10^7, so sieve-assisted trial division is all the factoring needed.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Canonical factorization `n = prod p^e` with primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// d(n), the number of divisors.
    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// All divisors in ascending order, generated mixed-radix from the
    /// factorization.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let base = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..base {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Primes `<= limit` in ascending order (sieve of Eratosthenes).
///
/// Returns an empty list for `limit < 2`.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Factor `n` by trial division with a 2-3 wheel.
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    let mut factors = Vec::new();
    let mut m = n;
    for p in [2u64, 3] {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    let mut p = 5u64;
    let mut step = 2u64;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += step;
        step = 6 - step;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInteger { n, factors })
}

/// ω(n); ω(1) = 0. `n = 0` is treated as having no prime factors.
pub fn omega(n: u64) -> u32 {
    factorize(n).map(|f| f.omega()).unwrap_or(0)
}

/// Divisors of `n` in ascending order; empty for `n = 0`.
pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).map(|f| f.divisors()).unwrap_or_default()
}

/// `table[n]` is true iff `n` is squarefree, for `1 <= n <= limit`.
/// Index 0 is present and false.
pub fn squarefree_sieve(limit: usize) -> Vec<bool> {
    let mut table = vec![true; limit + 1];
    table[0] = false;
    let mut q = 2usize;
    while q * q <= limit {
        let sq = q * q;
        let mut j = sq;
        while j <= limit {
            table[j] = false;
            j += sq;
        }
        q += 1;
    }
    table
}

/// Smallest-prime-factor table built by a linear sieve. Used for bulk
/// evaluation of multiplicative functions over `1..=limit`.
#[derive(Clone, Debug)]
pub struct SpfSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let j = i * p as usize;
                if p > si || j > limit {
                    break;
                }
                spf[j] = p;
            }
        }
        Self { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Smallest prime factor of `n >= 2`.
    pub fn spf(&self, n: usize) -> u32 {
        self.spf[n]
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Squarefree kernel split: for squarefree `n >= 2` returns
    /// `Some((p, n / p))` with `p` the smallest prime; `None` when `p^2 | n`.
    pub fn squarefree_split(&self, n: usize) -> Option<(usize, usize)> {
        let p = self.spf[n] as usize;
        let m = n / p;
        if m % p == 0 {
            None
        } else {
            Some((p, m))
        }
    }

    pub fn factorize(&self, n: usize) -> FactoredInteger {
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        FactoredInteger {
            n: n as u64,
            factors,
        }
    }
}

/// Primality test by trial division, for small arguments.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    match factorize(n) {
        Ok(f) => f.factors.len() == 1 && f.factors[0].1 == 1,
        Err(_) => false,
    }
}

/// Jacobi symbol (a | m) for odd m > 0.
fn jacobi(a: i64, m: u64) -> i8 {
    debug_assert!(m % 2 == 1);
    let mut a = a.rem_euclid(m as i64) as u64;
    let mut m = m;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            t = -t;
        }
        a %= m;
    }
    if m == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (d | n) for n >= 1.
///
/// At 2: 0 if d is even, +1 if d ≡ ±1 (mod 8), −1 if d ≡ ±3 (mod 8).
pub fn kronecker(d: i64, n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::Domain("kronecker symbol needs n >= 1".into()));
    }
    let v = n.trailing_zeros();
    let odd = n >> v;
    let mut result = 1i8;
    if v > 0 {
        let at_two = match d.rem_euclid(8) {
            0 | 2 | 4 | 6 => 0,
            1 | 7 => 1,
            _ => -1,
        };
        if at_two == 0 {
            return Ok(0);
        }
        if v % 2 == 1 {
            result = at_two;
        }
    }
    Ok(result * jacobi(d, odd))
}

/// The real character n ↦ (D | n) attached to a negative discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletCharacterD {
    d: i64,
}

impl DirichletCharacterD {
    pub fn new(d: i64) -> Result<Self> {
        check_negative_discriminant(d)?;
        Ok(Self { d })
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn eval(&self, n: u64) -> i8 {
        if n == 0 {
            return 0;
        }
        kronecker(self.d, n).expect("n >= 1")
    }
}

/// Validates `d < 0` and `d ≡ 0, 1 (mod 4)`.
pub fn check_negative_discriminant(d: i64) -> Result<()> {
    if d >= 0 {
        return Err(Error::Domain(format!("discriminant {d} is not negative")));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::Domain(format!(
            "discriminant {d} is not congruent to 0 or 1 mod 4"
        )));
    }
    Ok(())
}

/// True when `d` is a fundamental discriminant (`d < 0` assumed).
pub fn is_fundamental_discriminant(d: i64) -> bool {
    let squarefree = |m: u64| factorize(m).map(|f| f.is_squarefree()).unwrap_or(false);
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// gcd for u64 via num-integer.
pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}
