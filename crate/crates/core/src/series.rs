//! Exact integer power series truncated at a fixed length.
//!
//! Products are computed by a multi-modular number-theoretic transform: every
//! factor is reduced modulo enough NTT-friendly primes below 2^31 to cover a
//! rigorous bit bound on the result, convolved per prime, and the exact
//! coefficients are recovered by Garner's CRT in the symmetric residue range.
//! Primes are independent, so they are processed in parallel; the result does
//! not depend on the thread count.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::{Error, Result};

/// Power of two dividing p − 1 for every prime in the basis.
const TWO_ADICITY: u32 = 22;

/// Dense truncated series Σ_{n < len} c_n q^n with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    coeffs: Vec<BigInt>,
}

impl IntSeries {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Number of bits of the largest coefficient magnitude.
    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// Coefficient-wise `self - other`; lengths must agree.
    pub fn sub(&self, other: &IntSeries) -> IntSeries {
        assert_eq!(self.len(), other.len());
        IntSeries::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Exact division of every coefficient by `d`. Fails on the first
    /// coefficient that is not divisible.
    pub fn div_exact(&self, d: i64) -> Result<IntSeries> {
        let d = BigInt::from(d);
        let mut out = Vec::with_capacity(self.len());
        for (n, c) in self.coeffs.iter().enumerate() {
            let (q, r) = num_integer::Integer::div_rem(c, &d);
            if !r.is_zero() {
                return Err(Error::Internal(format!(
                    "coefficient {n} = {c} is not divisible by {d}"
                )));
            }
            out.push(q);
        }
        Ok(IntSeries::new(out))
    }

    /// Schoolbook truncated product; quadratic, used for short series.
    pub fn mul_schoolbook(&self, other: &IntSeries) -> IntSeries {
        let len = self.len().min(other.len());
        let mut out = vec![BigInt::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] += a * b;
            }
        }
        IntSeries::new(out)
    }
}

/// Truncated product of all `factors`, computed exactly.
///
/// The output length is the minimum factor length.
pub fn product(factors: &[&IntSeries]) -> IntSeries {
    assert!(!factors.is_empty(), "product of no series");
    let len = factors.iter().map(|f| f.len()).min().unwrap();
    if len == 0 {
        return IntSeries::zeros(0);
    }
    if factors.len() == 1 {
        let mut c = factors[0].coeffs.clone();
        c.truncate(len);
        return IntSeries::new(c);
    }
    if len <= 48 {
        let mut acc = factors[0].clone();
        acc.coeffs.truncate(len);
        for f in &factors[1..] {
            acc = acc.mul_schoolbook(f);
        }
        return acc;
    }

    // |coefficient| of a k-fold truncated product is bounded by
    // prod max|f_i| * len^(k-1); add one bit for the sign.
    let len_bits = 64 - (len as u64 - 1).leading_zeros() as u64 + 1;
    let bound_bits: u64 = factors.iter().map(|f| f.max_bits()).sum::<u64>()
        + (factors.len() as u64 - 1) * len_bits
        + 2;
    let primes = basis_for_bits(bound_bits);
    let size = (2 * len).next_power_of_two();
    assert!(
        size.trailing_zeros() <= TWO_ADICITY,
        "series length {len} exceeds the NTT capacity"
    );

    let residues: Vec<Vec<u32>> = primes
        .par_iter()
        .map(|prime| prime.truncated_product(factors, len, size))
        .collect();

    let moduli: Vec<u64> = primes.iter().map(|p| p.p).collect();
    let crt = Crt::new(&moduli);
    let coeffs: Vec<BigInt> = (0..len)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let r: Vec<u64> = residues.iter().map(|v| v[i] as u64).collect();
            crt.reconstruct_symmetric(&r)
        })
        .collect();
    IntSeries::new(coeffs)
}

#[derive(Clone, Debug)]
struct NttPrime {
    p: u64,
    /// Generator of the full multiplicative group.
    g: u64,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
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

fn is_prime_u32(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13] {
        if n % p == 0 {
            return n == p;
        }
    }
    // deterministic Miller-Rabin for n < 2^32
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        if a % n == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn all_ntt_primes() -> &'static [NttPrime] {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let step = 1u64 << TWO_ADICITY;
        let mut out = Vec::new();
        let mut c = (1u64 << 31) / step;
        while c > 0 {
            let p = c * step + 1;
            if p < (1u64 << 31) && is_prime_u32(p) {
                let odd_factors = crate::ntkernel::factorize(c)
                    .expect("c >= 1")
                    .factors()
                    .iter()
                    .map(|&(q, _)| q)
                    .filter(|&q| q != 2)
                    .collect::<Vec<_>>();
                let g = (2..p)
                    .find(|&g| {
                        pow_mod(g, (p - 1) / 2, p) != 1
                            && odd_factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1)
                    })
                    .expect("prime has a primitive root");
                out.push(NttPrime { p, g });
            }
            c -= 1;
        }
        out
    })
}

/// The smallest prefix of the prime list whose product exceeds 2^bits.
fn basis_for_bits(bits: u64) -> &'static [NttPrime] {
    let all = all_ntt_primes();
    let mut acc = 0f64;
    for (i, p) in all.iter().enumerate() {
        // floor keeps the accumulated bound conservative
        acc += (p.p as f64).log2().floor();
        if acc > bits as f64 {
            return &all[..=i];
        }
    }
    panic!("coefficient bound of {bits} bits exceeds the prime basis");
}

impl NttPrime {
    fn reduce(&self, c: &BigInt) -> u32 {
        let p = self.p;
        let r = c
            .magnitude()
            .iter_u32_digits()
            .rev()
            .fold(0u64, |acc, d| ((acc << 32) | d as u64) % p);
        if c.sign() == Sign::Minus && r != 0 {
            (p - r) as u32
        } else {
            r as u32
        }
    }

    fn ntt(&self, a: &mut [u64], invert: bool) {
        let p = self.p;
        let n = a.len();
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let mut w = pow_mod(self.g, (p - 1) / len as u64, p);
            if invert {
                w = pow_mod(w, p - 2, p);
            }
            let half = len / 2;
            let mut twiddles = Vec::with_capacity(half);
            let mut t = 1u64;
            for _ in 0..half {
                twiddles.push(t);
                t = t * w % p;
            }
            for chunk in a.chunks_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = hi[k] * twiddles[k] % p;
                    lo[k] = if u + v >= p { u + v - p } else { u + v };
                    hi[k] = if u >= v { u - v } else { u + p - v };
                }
            }
            len <<= 1;
        }
        if invert {
            let inv_n = pow_mod(n as u64, p - 2, p);
            for x in a.iter_mut() {
                *x = *x * inv_n % p;
            }
        }
    }

    fn transform(&self, f: &IntSeries, len: usize, size: usize) -> Vec<u64> {
        let mut a = vec![0u64; size];
        for (slot, c) in a.iter_mut().zip(f.coeffs.iter().take(len)) {
            *slot = self.reduce(c) as u64;
        }
        self.ntt(&mut a, false);
        a
    }

    fn truncated_product(&self, factors: &[&IntSeries], len: usize, size: usize) -> Vec<u32> {
        let p = self.p;
        let mut acc = self.transform(factors[0], len, size);
        for (idx, f) in factors[1..].iter().enumerate() {
            let b = if std::ptr::eq(*f, factors[0]) && idx == 0 {
                acc.clone()
            } else {
                self.transform(f, len, size)
            };
            for (x, y) in acc.iter_mut().zip(&b) {
                *x = *x * y % p;
            }
            self.ntt(&mut acc, true);
            acc[len..].iter_mut().for_each(|x| *x = 0);
            if idx + 2 < factors.len() {
                self.ntt(&mut acc, false);
            }
        }
        acc.truncate(len);
        acc.into_iter().map(|x| x as u32).collect()
    }
}

/// Garner reconstruction for a fixed list of pairwise coprime moduli.
struct Crt {
    moduli: Vec<u64>,
    /// inv[i][j] = m_j^{-1} mod m_i for j < i
    inv: Vec<Vec<u64>>,
    product: BigInt,
    half: BigInt,
}

impl Crt {
    fn new(moduli: &[u64]) -> Self {
        let inv = moduli
            .iter()
            .enumerate()
            .map(|(i, &mi)| {
                moduli[..i]
                    .iter()
                    .map(|&mj| pow_mod(mj % mi, mi - 2, mi))
                    .collect()
            })
            .collect();
        let product = moduli.iter().fold(BigInt::from(1), |acc, &m| acc * m);
        let half = &product >> 1;
        Self {
            moduli: moduli.to_vec(),
            inv,
            product,
            half,
        }
    }

    fn reconstruct_symmetric(&self, residues: &[u64]) -> BigInt {
        let k = self.moduli.len();
        // mixed-radix digits
        let mut digits = vec![0u64; k];
        for i in 0..k {
            let mi = self.moduli[i];
            let mut x = residues[i] % mi;
            for j in 0..i {
                let diff = (x + mi - digits[j] % mi) % mi;
                x = diff * self.inv[i][j] % mi;
            }
            digits[i] = x;
        }
        let mut value = BigInt::from(digits[k - 1]);
        for i in (0..k - 1).rev() {
            value = value * self.moduli[i] + digits[i];
        }
        if value > self.half {
            value - &self.product
        } else {
            value
        }
    }
}

/// σ_k(n) for 0 <= n < len (σ_k(0) = 0), exact in u128.
///
/// Valid while σ_k(n) < 2^128; for k <= 5 that covers n up to ~10^7.
pub fn divisor_power_sums(k: u32, len: usize) -> Vec<u128> {
    let mut out = vec![0u128; len];
    for d in 1..len {
        let dk = (d as u128).pow(k);
        let mut m = d;
        while m < len {
            out[m] += dk;
            m += d;
        }
    }
    out
}

/// Eisenstein series 1 + c Σ σ_k(n) q^n truncated at `len`.
pub fn eisenstein(k: u32, c: i64, len: usize) -> IntSeries {
    let sigma = divisor_power_sums(k - 1, len);
    let mut coeffs = Vec::with_capacity(len);
    for (n, s) in sigma.into_iter().enumerate() {
        if n == 0 {
            coeffs.push(BigInt::from(1));
        } else {
            coeffs.push(BigInt::from(s) * c);
        }
    }
    IntSeries::new(coeffs)
}

/// Largest absolute coefficient as f64 (diagnostics only).
pub fn max_abs_f64(s: &IntSeries) -> f64 {
    s.coeffs
        .iter()
        .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
