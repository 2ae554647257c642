//! Chebyshev decomposition of x^ℓ, the constants A and B, ℓ-fold product
//! and symmetric-power coefficients, and exact prime-level identities.
//!
//! Here T_m(y) = U_m(y/2), so T_m(2cos θ) = sin((m+1)θ)/sin θ.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modforms::{normalize_coefficient, Eigenform};
use crate::ntkernel::{self, DirichletCharacterD};
use crate::{Error, Result};

/// C(n, k), zero outside 0 ≤ k ≤ n.
pub fn binom(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// C(ℓ, n) − C(ℓ, n−1).
pub fn binom_difference(ell: u64, n: u64) -> BigInt {
    binom(ell, n as i64) - binom(ell, n as i64 - 1)
}

/// Integer coefficients of T_m, lowest degree first.
pub fn chebyshev_t(m: u64) -> Vec<BigInt> {
    // U recurrence over rationals, then y = 2x: the y^i coefficient is u_i/2^i.
    let two = BigRational::from_integer(BigInt::from(2));
    let mut prev: Vec<BigRational> = vec![BigRational::one()];
    let mut cur: Vec<BigRational> = vec![BigRational::zero(), two.clone()];
    if m == 0 {
        return vec![BigInt::one()];
    }
    for _ in 1..m {
        let mut next = vec![BigRational::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += &two * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    let mut scale = BigRational::one();
    cur.iter()
        .map(|u| {
            let v = u / &scale;
            scale = &scale * &two;
            debug_assert!(v.is_integer());
            v.to_integer()
        })
        .collect()
}

/// x^ℓ = Σ_j A_{ℓ,j}·T_j(x), the sum running over j ≡ ℓ (mod 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChebyshevDecomposition {
    ell: u64,
    coeffs: Vec<BigInt>,
}

impl ChebyshevDecomposition {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// A_{ℓ,j}, the coefficient of T_j.
    pub fn coefficient(&self, j: u64) -> &BigInt {
        &self.coeffs[j as usize]
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }
}

/// A_{ℓ,j} = C(ℓ, (ℓ−j)/2) − C(ℓ, (ℓ−j)/2 − 1) for j ≡ ℓ (mod 2), checked
/// against the polynomial identity before returning.
pub fn cheb_decomposition(ell: u64) -> Result<ChebyshevDecomposition> {
    if ell == 0 {
        return Err(Error::Input("ell must be at least 1".into()));
    }
    let coeffs: Vec<BigInt> = (0..=ell)
        .map(|j| {
            if (ell - j) % 2 == 1 {
                BigInt::zero()
            } else {
                binom_difference(ell, (ell - j) / 2)
            }
        })
        .collect();
    let mut poly = vec![BigInt::zero(); ell as usize + 1];
    for (j, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (i, t) in chebyshev_t(j as u64).into_iter().enumerate() {
            poly[i] += a * t;
        }
    }
    let monomial = poly
        .iter()
        .enumerate()
        .all(|(i, c)| if i as u64 == ell { c.is_one() } else { c.is_zero() });
    if !monomial {
        return Err(Error::Internal(format!(
            "Chebyshev identity fails for ell = {ell}"
        )));
    }
    Ok(ChebyshevDecomposition { ell, coeffs })
}

/// The constants A and B of the ℓ-fold bound, kept as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldConstants {
    pub ell: u64,
    pub a: BigRational,
    pub b: BigRational,
}

impl FoldConstants {
    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64().unwrap_or(f64::NAN)
    }

    /// (A, B) as integers when both are integral.
    pub fn as_integers(&self) -> Option<(BigInt, BigInt)> {
        (self.a.is_integer() && self.b.is_integer())
            .then(|| (self.a.to_integer(), self.b.to_integer()))
    }
}

/// A = Σ (ℓ−2n+1)(ℓ−2n)/(ℓ−n+1)·C(ℓ,n) and B = Σ (ℓ−2n+1)²/(ℓ−n+1)·C(ℓ,n)
/// over 0 ≤ n ≤ ⌊ℓ/2⌋.
pub fn fold_constants(ell: u64) -> Result<FoldConstants> {
    if ell == 0 {
        return Err(Error::Input("ell must be at least 1".into()));
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    for n in 0..=ell / 2 {
        let top = BigInt::from(ell - 2 * n + 1);
        let den = BigInt::from(ell - n + 1);
        let c = binom(ell, n as i64);
        a += BigRational::new(&top * BigInt::from(ell - 2 * n) * &c, den.clone());
        b += BigRational::new(&top * &top * &c, den);
    }
    Ok(FoldConstants { ell, a, b })
}

/// C(ℓ,n) − C(ℓ,n−1) = (ℓ−2n+1)/(ℓ−n+1)·C(ℓ,n) for 0 ≤ n ≤ ⌊ℓ/2⌋.
pub fn binomial_identity_check(ell: u64) -> bool {
    (0..=ell / 2).all(|n| {
        let lhs = BigRational::from_integer(binom_difference(ell, n));
        let rhs = BigRational::new(
            BigInt::from(ell - 2 * n + 1) * binom(ell, n as i64),
            BigInt::from(ell - n + 1),
        );
        lhs == rhs
    })
}

/// λ_f(n)^ℓ with the sign of a_f(n)^ℓ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldValue {
    pub n: u64,
    pub ell: u64,
    pub value: f64,
    pub exact_sign: i8,
}

/// λ_{f⊗⋯⊗f}(n) = λ_f(n)^ℓ for odd ℓ and squarefree n coprime to the level.
pub fn lfold_coefficient(f: &Eigenform, ell: u64, n: u64) -> Result<FoldValue> {
    check_odd(ell)?;
    check_squarefree_coprime(f, n)?;
    let l = f.normalized_lambda(n)?;
    Ok(FoldValue {
        n,
        ell,
        value: l.value.powi(ell as i32),
        exact_sign: l.exact_sign,
    })
}

fn check_odd(ell: u64) -> Result<()> {
    if ell % 2 == 0 {
        return Err(Error::Input(format!("ell = {ell} must be odd")));
    }
    Ok(())
}

fn check_squarefree_coprime(f: &Eigenform, n: u64) -> Result<()> {
    let fact = ntkernel::factorize(n)?;
    if !fact.is_squarefree() {
        return Err(Error::Domain(format!("{n} is not squarefree")));
    }
    if n.gcd(&f.level()) != 1 {
        return Err(Error::Domain(format!(
            "{n} is not coprime to the level {}",
            f.level()
        )));
    }
    Ok(())
}

/// Unnormalized a_{sym^m f}(p^e): the degree-e complete homogeneous
/// polynomial in A^{m−j}B^j, where A + B = a_f(p) and AB = p^{k−1}.
///
/// Power sums of the x_j are integers, so Newton's identities stay exact.
fn sym_prime_power(ap: &BigInt, pk1: &BigInt, m: u32, e: u32) -> BigInt {
    // s_r = A^r + B^r
    let mut s = vec![BigInt::from(2), ap.clone()];
    for r in 2..=e as usize {
        let next = ap * &s[r - 1] - pk1 * &s[r - 2];
        s.push(next);
    }
    // q_r = Σ_j (A^r)^{m−j}(B^r)^j via c_i = s_r c_{i−1} − P^r c_{i−2}
    let q: Vec<BigInt> = (0..=e as usize)
        .map(|r| {
            if r == 0 {
                return BigInt::from(m + 1);
            }
            let pr = pk1.pow(r as u32);
            let (mut c0, mut c1) = (BigInt::one(), s[r].clone());
            for _ in 1..m {
                let c2 = &s[r] * &c1 - &pr * &c0;
                c0 = c1;
                c1 = c2;
            }
            c1
        })
        .collect();
    let mut h = vec![BigInt::one()];
    for n in 1..=e as usize {
        let total: BigInt = (1..=n).map(|r| &q[r] * &h[n - r]).sum();
        let (quot, rem) = total.div_rem(&BigInt::from(n));
        debug_assert!(rem.is_zero());
        h.push(quot);
    }
    h.pop().expect("non-empty")
}

/// λ_{sym^m f}(n) from the Euler product ∏_p ∏_j (1 − α_p^{m−j}β_p^j p^{−s})^{−1}.
///
/// At primes this is λ_f(p^m); for m = 2 it agrees with the coefficients of
/// ζ(2s)·Σ λ_f(n²)n^{−s}.
pub fn sym_coefficient(f: &Eigenform, m: u32, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Input("m must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if n.gcd(&f.level()) != 1 {
        return Err(Error::Domain(format!("{n} is not coprime to the level")));
    }
    let mut acc = 1.0;
    for &(p, e) in ntkernel::factorize(n)?.factors() {
        let ap = f.coefficient(p)?;
        let pk1 = BigInt::from(p).pow(f.weight() - 1);
        let h = sym_prime_power(ap, &pk1, m, e);
        let (v, _) = normalize_coefficient(&h, &BigInt::from(p).pow(m * e), f.weight());
        acc *= v;
    }
    Ok(acc)
}

/// Both sides of a_f(p)^ℓ = Σ_n (C(ℓ,n) − C(ℓ,n−1))·a_f(p^{ℓ−2n})·p^{n(k−1)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FcRelReport {
    pub ell: u64,
    pub p: u64,
    pub lhs: BigInt,
    pub rhs: BigInt,
}

impl FcRelReport {
    pub fn passed(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn verify_fcrel(f: &Eigenform, ell: u64, p: u64) -> Result<FcRelReport> {
    if ell == 0 {
        return Err(Error::Input("ell must be at least 1".into()));
    }
    let ap = f.coefficient_prime_power(p, 1)?;
    let lhs = ap.pow(ell as u32);
    let pk1 = BigInt::from(p).pow(f.weight() - 1);
    let mut rhs = BigInt::zero();
    let mut pk_pow = BigInt::one();
    for n in 0..=ell / 2 {
        let a = f.coefficient_prime_power(p, (ell - 2 * n) as u32)?;
        rhs += binom_difference(ell, n) * a * &pk_pow;
        pk_pow *= &pk1;
    }
    Ok(FcRelReport { ell, p, lhs, rhs })
}

/// Primes p ≤ p_max, p ∤ N, at which verify_fcrel fails.
pub fn fcrel_sweep(f: &Eigenform, ell: u64, p_max: u64) -> Result<Vec<u64>> {
    let primes: Vec<u64> = ntkernel::sieve_primes(p_max)
        .into_iter()
        .filter(|p| f.level() % p != 0)
        .collect();
    let results: Vec<Result<Option<u64>>> = primes
        .par_iter()
        .map(|&p| Ok((!verify_fcrel(f, ell, p)?.passed()).then_some(p)))
        .collect();
    let mut failures = Vec::new();
    for r in results {
        if let Some(p) = r? {
            failures.push(p);
        }
    }
    Ok(failures)
}

/// The prime-level decomposition λ_f(p)^ℓ·r*(p) against the symmetric-power
/// expansion times 1 + χ_D(p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub ell: u64,
    pub p: u64,
    pub discriminant: i64,
    pub chi: i8,
    pub lhs: f64,
    pub rhs: f64,
    pub exact: bool,
    pub passed: bool,
}

pub fn verify_decomposition_prime(
    f: &Eigenform,
    d: i64,
    ell: u64,
    p: u64,
) -> Result<DecompositionReport> {
    check_odd(ell)?;
    let chi = DirichletCharacterD::new(d)?.eval(p);
    let r_star = 1.0 + chi as f64;
    let lambda_p = sym_coefficient(f, 1, p)?;
    let lhs = lambda_p.powi(ell as i32) * r_star;
    let mut bracket = 0.0;
    for n in 0..=ell / 2 {
        let m = (ell - 2 * n) as u32;
        let c = binom_difference(ell, n).to_f64().unwrap_or(f64::NAN);
        bracket += c * sym_coefficient(f, m, p)?;
    }
    let rhs = bracket * r_star;
    let fc = verify_fcrel(f, ell, p)?;
    let factor = BigInt::from(1 + chi as i64);
    let exact = &fc.lhs * &factor == &fc.rhs * &factor;
    let tol = 1e-9 * (1.0 + lhs.abs());
    Ok(DecompositionReport {
        ell,
        p,
        discriminant: d,
        chi,
        lhs,
        rhs,
        exact,
        passed: exact && (lhs - rhs).abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::build_level_one_eigenform;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_t(0), ints(&[1]));
        assert_eq!(chebyshev_t(1), ints(&[0, 1]));
        assert_eq!(chebyshev_t(2), ints(&[-1, 0, 1]));
        assert_eq!(chebyshev_t(3), ints(&[0, -2, 0, 1]));
    }

    /// T_m(2cos θ) = sin((m+1)θ)/sin θ.
    #[test]
    fn chebyshev_trig_oracle() {
        for m in 0..=12u64 {
            let t = chebyshev_t(m);
            for &theta in &[0.3f64, 1.1, 2.0, 2.9] {
                let y = 2.0 * theta.cos();
                let val: f64 = t
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.to_f64().unwrap() * y.powi(i as i32))
                    .sum();
                let expect = ((m + 1) as f64 * theta).sin() / theta.sin();
                assert!((val - expect).abs() < 1e-8, "m = {m}");
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let d1 = cheb_decomposition(1).unwrap();
        assert_eq!(d1.coefficients(), &ints(&[0, 1])[..]);
        let d3 = cheb_decomposition(3).unwrap();
        assert_eq!(d3.coefficients(), &ints(&[0, 2, 0, 1])[..]);
        let d2 = cheb_decomposition(2).unwrap();
        assert_eq!(d2.coefficients(), &ints(&[1, 0, 1])[..]);
        for ell in 1..=15 {
            cheb_decomposition(ell).unwrap();
        }
        assert!(cheb_decomposition(0).is_err());
    }

    #[test]
    fn fold_constant_examples() {
        let pairs: Vec<_> = [3, 5, 7]
            .iter()
            .map(|&l| fold_constants(l).unwrap().as_integers().unwrap())
            .collect();
        assert_eq!(
            pairs,
            vec![
                (BigInt::from(5), BigInt::from(8)),
                (BigInt::from(22), BigInt::from(32)),
                // 8 + 36 + 56 + 28
                (BigInt::from(93), BigInt::from(128)),
            ]
        );
    }

    /// Independent routes: integer sums of (C(ℓ,n) − C(ℓ,n−1)) weights, and
    /// Σ_j A_{ℓ,j}·j, Σ_j A_{ℓ,j}·(j+1) from the Chebyshev table.
    #[test]
    fn fold_constants_match_brute_force() {
        fn c(n: i128, k: i128) -> i128 {
            if k < 0 || k > n {
                return 0;
            }
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        for ell in (1..=21u64).step_by(2) {
            let l = ell as i128;
            let (mut a, mut b) = (0i128, 0i128);
            for n in 0..=l / 2 {
                let w = c(l, n) - c(l, n - 1);
                a += w * (l - 2 * n);
                b += w * (l - 2 * n + 1);
            }
            let fc = fold_constants(ell).unwrap();
            let (fa, fb) = fc.as_integers().expect("integral for odd ell");
            assert_eq!((fa.clone(), fb.clone()), (BigInt::from(a), BigInt::from(b)), "ell = {ell}");
            assert!(fb > fa && fa >= BigInt::one());
            let dec = cheb_decomposition(ell).unwrap();
            let sa: BigInt = dec.coefficients().iter().enumerate().map(|(j, x)| x * BigInt::from(j)).sum();
            let sb: BigInt = dec.coefficients().iter().enumerate().map(|(j, x)| x * BigInt::from(j + 1)).sum();
            assert_eq!((sa, sb), (fa, fb));
        }
    }

    #[test]
    fn binomial_identity() {
        for ell in 1..=40 {
            assert!(binomial_identity_check(ell), "ell = {ell}");
        }
    }

    #[test]
    fn lfold_examples() {
        let f = build_level_one_eigenform(12, 100).unwrap();
        let v = lfold_coefficient(&f, 3, 1).unwrap();
        assert_eq!((v.value, v.exact_sign), (1.0, 1));
        // λ(2) = −24/2^{11/2}
        let v = lfold_coefficient(&f, 3, 2).unwrap();
        assert_eq!(v.exact_sign, -1);
        let exact3 = -13824.0 / (65536.0 * 2f64.sqrt());
        assert!((v.value - exact3).abs() < 1e-15);
        assert!((v.value + 0.149_155_3).abs() < 1e-7);
        let v = lfold_coefficient(&f, 5, 2).unwrap();
        let exact5 = -7962624.0 / (134217728.0 * 2f64.sqrt());
        assert!((v.value - exact5).abs() < 1e-15);
        assert!((v.value + 0.041_949_9).abs() < 1e-7);
        assert!(matches!(lfold_coefficient(&f, 3, 4), Err(Error::Domain(_))));
        assert!(matches!(lfold_coefficient(&f, 2, 3), Err(Error::Input(_))));
        assert!(matches!(lfold_coefficient(&f, 3, 101), Err(Error::Range { .. })));
    }

    #[test]
    fn sym_examples() {
        let f = build_level_one_eigenform(12, 100).unwrap();
        assert_eq!(sym_coefficient(&f, 3, 1).unwrap(), 1.0);
        assert!((sym_coefficient(&f, 2, 2).unwrap() + 0.71875).abs() < 1e-15);
        let v = sym_coefficient(&f, 2, 4).unwrap();
        assert!((v - (987136.0 / 4194304.0 + 1.0)).abs() < 1e-12);
    }

    /// m = 2 against the Dirichlet convolution ζ(2s)·Σ λ_f(n²)n^{−s}.
    #[test]
    fn sym_square_matches_convolution() {
        let f = build_level_one_eigenform(12, 10_000).unwrap();
        for n in 1..=100u64 {
            let mut conv = 0.0;
            for d in 1..=n {
                if n % (d * d) == 0 {
                    let j = n / (d * d);
                    conv += f.normalized_lambda(j * j).unwrap().value;
                }
            }
            let s = sym_coefficient(&f, 2, n).unwrap();
            assert!((s - conv).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn sym_one_is_the_form_itself() {
        let f = build_level_one_eigenform(16, 500).unwrap();
        for n in 1..=500u64 {
            let s = sym_coefficient(&f, 1, n).unwrap();
            assert!((s - f.normalized_lambda(n).unwrap().value).abs() < 1e-12);
        }
    }

    /// Satake route: λ_{sym^m}(p^e) = h_e(e^{imθ}, e^{i(m−2)θ}, …, e^{−imθ}).
    #[test]
    fn sym_prime_powers_match_satake() {
        let f = build_level_one_eigenform(12, 50).unwrap();
        for p in [2u64, 3, 5, 7] {
            let theta = f.satake_angle(p).unwrap().theta;
            for m in 1..=4u32 {
                // h_e via the generating product, real parts of complex numbers
                let roots: Vec<(f64, f64)> = (0..=m)
                    .map(|j| {
                        let a = (m as f64 - 2.0 * j as f64) * theta;
                        (a.cos(), a.sin())
                    })
                    .collect();
                let mut h = vec![(1.0f64, 0.0f64)];
                h.resize(4, (0.0, 0.0));
                for &(xr, xi) in &roots {
                    // multiply series by 1/(1 − x t)
                    for e in 1..4 {
                        let (pr, pi) = h[e - 1];
                        h[e].0 += xr * pr - xi * pi;
                        h[e].1 += xr * pi + xi * pr;
                    }
                }
                for e in 1..4u32 {
                    let s = sym_coefficient(&f, m, p.pow(e)).unwrap();
                    assert!((s - h[e as usize].0).abs() < 1e-9, "p = {p}, m = {m}, e = {e}");
                }
            }
        }
    }

    #[test]
    fn sym_at_primes_is_lambda_of_power() {
        let f = build_level_one_eigenform(12, 1000).unwrap();
        for p in ntkernel::sieve_primes(1000) {
            for m in 1..=4u32 {
                let pm = p.pow(m);
                let direct = if pm <= 1000 {
                    f.normalized_lambda(pm).unwrap().value
                } else {
                    // Chebyshev route: λ_f(p^m) = T_m(λ_f(p))
                    let y = f.normalized_lambda(p).unwrap().value;
                    chebyshev_t(m as u64)
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c.to_f64().unwrap() * y.powi(i as i32))
                        .sum()
                };
                let s = sym_coefficient(&f, m, p).unwrap();
                assert!((s - direct).abs() < 1e-10, "p = {p}, m = {m}");
            }
        }
    }

    #[test]
    fn sym_bounded_by_divisor_function() {
        let f = build_level_one_eigenform(12, 1000).unwrap();
        for m in 1..=3u32 {
            for n in 1..=1000u64 {
                // d_{m+1}(n) = Π C(e+m, m)
                let bound: f64 = ntkernel::factorize(n)
                    .unwrap()
                    .factors()
                    .iter()
                    .map(|&(_, e)| binom((e + m) as u64, m as i64).to_f64().unwrap())
                    .product();
                let s = sym_coefficient(&f, m, n).unwrap();
                assert!(s.abs() <= bound + 1e-9, "m = {m}, n = {n}");
            }
        }
    }

    #[test]
    fn fcrel_examples() {
        let f = build_level_one_eigenform(12, 1000).unwrap();
        let r = verify_fcrel(&f, 3, 2).unwrap();
        assert_eq!(r.lhs, BigInt::from(-13824));
        assert!(r.passed());
        assert!(fcrel_sweep(&f, 3, 1000).unwrap().is_empty());
        assert!(fcrel_sweep(&f, 1, 1000).unwrap().is_empty());
    }

    #[test]
    fn fcrel_sweep_to_ten_thousand() {
        let f = build_level_one_eigenform(12, 10_000).unwrap();
        for ell in [3, 5, 7] {
            assert!(fcrel_sweep(&f, ell, 10_000).unwrap().is_empty(), "ell = {ell}");
        }
    }

    #[test]
    fn fcrel_detects_corruption() {
        let f = build_level_one_eigenform(12, 20).unwrap();
        let bad = f.with_coefficient(8, BigInt::from(84481)).unwrap();
        assert!(!verify_fcrel(&bad, 3, 2).unwrap().passed());
    }

    #[test]
    fn decomposition_examples_at_primes() {
        let f = build_level_one_eigenform(12, 200).unwrap();
        let r = verify_decomposition_prime(&f, -4, 3, 5).unwrap();
        assert_eq!(r.chi, 1);
        assert!(r.passed);
        let l5 = f.normalized_lambda(5).unwrap().value;
        assert!((r.lhs - 2.0 * l5.powi(3)).abs() < 1e-12);
        let r = verify_decomposition_prime(&f, -4, 3, 3).unwrap();
        assert_eq!((r.chi, r.lhs, r.rhs), (-1, 0.0, 0.0));
        assert!(r.passed);
        let r = verify_decomposition_prime(&f, -4, 3, 2).unwrap();
        assert_eq!(r.chi, 0);
        assert!(r.passed);
        for p in ntkernel::sieve_primes(200) {
            for d in [-3, -23, -163] {
                assert!(verify_decomposition_prime(&f, d, 5, p).unwrap().passed);
            }
        }
    }

    proptest! {
        #[test]
        fn binom_symmetry(n in 0u64..60, k in 0i64..60) {
            prop_assume!(k as u64 <= n);
            prop_assert_eq!(binom(n, k), binom(n, n as i64 - k));
            if k >= 1 {
                prop_assert_eq!(binom(n + 1, k), binom(n, k) + binom(n, k - 1));
            }
        }
    }
}
