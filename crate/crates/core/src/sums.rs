//! Summatory functions of ℓ-fold coefficients over values of quadratic
//! forms, the η^ω mean value and its main term, the bound evaluators, and
//! first-sign-change searches.
//!
//! Every floating sum runs over ascending n with compensated accumulation,
//! so results are bit-stable for fixed inputs.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fold::fold_constants;
use crate::modforms::Eigenform;
use crate::ntkernel::{self, DirichletCharacterD, SpfSieve};
use crate::numerics::{gamma, ln_gamma, CompensatedSum};
use crate::quadforms::{class_set, r_star_table, unit_count, QuadraticForm, RepConvention};
use crate::sigma::{alpha_step, h_y_value, pow_step, solve_sigma};
use crate::{Error, Result};

/// ω(n) and squarefreeness for 0 ≤ n ≤ x.
struct OmegaTable {
    omega: Vec<u8>,
    squarefree: Vec<bool>,
    sieve: SpfSieve,
}

impl OmegaTable {
    fn new(x: u64) -> Self {
        let x = x as usize;
        let sieve = SpfSieve::new(x.max(1));
        let mut omega = vec![0u8; x + 1];
        let mut squarefree = vec![false; x + 1];
        if x >= 1 {
            squarefree[1] = true;
        }
        for n in 2..=x {
            let p = sieve.spf(n) as usize;
            let m = n / p;
            if m % p == 0 {
                continue;
            }
            squarefree[n] = squarefree[m];
            omega[n] = omega[m] + 1;
        }
        Self {
            omega,
            squarefree,
            sieve,
        }
    }

    fn admissible(&self, n: usize, level: u64) -> bool {
        self.squarefree[n] && (n as u64).gcd(&level) == 1
    }
}

fn check_odd_ell(ell: u32) -> Result<()> {
    if ell % 2 == 0 {
        return Err(Error::Input(format!("ell = {ell} must be odd")));
    }
    Ok(())
}

fn check_range(f: &Eigenform, x: u64) -> Result<()> {
    if x == 0 {
        return Err(Error::Input("X must be at least 1".into()));
    }
    if x > f.x_max() {
        return Err(Error::Range {
            index: x,
            max: f.x_max(),
        });
    }
    Ok(())
}

/// λ_f(n)^ℓ for squarefree n ≤ x coprime to the level, zero elsewhere.
pub struct FoldTerms {
    pub ell: u32,
    values: Vec<f64>,
    admissible: Vec<bool>,
}

impl FoldTerms {
    pub fn new(f: &Eigenform, ell: u32, x: u64) -> Result<Self> {
        check_odd_ell(ell)?;
        check_range(f, x)?;
        let table = OmegaTable::new(x);
        let admissible: Vec<bool> = (0..=x as usize)
            .map(|n| n >= 1 && table.admissible(n, f.level()))
            .collect();
        let values: Vec<f64> = (0..x as usize + 1)
            .into_par_iter()
            .with_min_len(1024)
            .map(|n| {
                if admissible[n] {
                    f.normalized_lambda(n as u64)
                        .map(|l| l.value.powi(ell as i32))
                        .unwrap_or(f64::NAN)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            ell,
            values,
            admissible,
        })
    }

    pub fn x_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn value(&self, n: u64) -> f64 {
        self.values[n as usize]
    }

    pub fn is_admissible(&self, n: u64) -> bool {
        self.admissible[n as usize]
    }

    /// Σ_{n ≤ X} λ(n)^ℓ·weight(n) over admissible n, read off at each grid
    /// point of an increasing grid.
    fn prefix_sums<W: Fn(usize) -> f64>(&self, grid: &[u64], weight: W) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = CompensatedSum::new();
        let mut n = 1usize;
        for &g in grid {
            while n <= g as usize {
                if self.admissible[n] {
                    let w = weight(n);
                    if w != 0.0 {
                        acc.add(self.values[n] * w);
                    }
                }
                n += 1;
            }
            out.push(acc.value());
        }
        out
    }
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(
            "grid must be non-empty, positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// S_ℓ(f, Q; X) = Σ♭ λ_f(n)^ℓ·r_Q(n) over n ≤ X coprime to N.
pub fn summatory_sq(f: &Eigenform, q: &QuadraticForm, ell: u32, x: u64) -> Result<f64> {
    Ok(summatory_sq_grid(f, q, ell, &[x])?[0])
}

/// S_ℓ(f, Q; X) at every X of an increasing grid, from a single pass.
pub fn summatory_sq_grid(
    f: &Eigenform,
    q: &QuadraticForm,
    ell: u32,
    grid: &[u64],
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let x = *grid.last().expect("non-empty");
    let terms = FoldTerms::new(f, ell, x)?;
    let reps = q.representation_counts(x);
    Ok(terms.prefix_sums(grid, |n| reps.as_slice()[n] as f64))
}

/// Σ♭ λ_f(n)^ℓ·r*(n), the divisor-sum convention.
pub fn summatory_sq_primitive(f: &Eigenform, d: i64, ell: u32, x: u64) -> Result<f64> {
    let terms = FoldTerms::new(f, ell, x)?;
    let star = r_star_table(d, x)?;
    Ok(terms.prefix_sums(&[x], |n| star[n] as f64)[0])
}

/// S_ℓ(f, D; X) = Σ♭ λ_f(n)^ℓ·Σ_{Q ∈ S_D} r_Q(n).
pub fn summatory_sd(f: &Eigenform, d: i64, ell: u32, x: u64) -> Result<f64> {
    let cs = class_set(d)?;
    let terms = FoldTerms::new(f, ell, x)?;
    let mut total = vec![0u64; x as usize + 1];
    for q in &cs.forms {
        for (t, r) in total.iter_mut().zip(q.representation_counts(x).as_slice()) {
            *t += r;
        }
    }
    Ok(terms.prefix_sums(&[x], |n| total[n] as f64)[0])
}

/// E_η(X) in both conventions: Σ♭ η^{ω(n)} r*(n), and the same weighted by
/// the class-set lattice counts Σ_Q r_Q(n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EEta {
    pub discriminant: i64,
    pub level: u64,
    pub eta: f64,
    pub x: u64,
    pub value: f64,
    pub convention: RepConvention,
    pub lattice_value: f64,
    pub w: u32,
}

pub fn e_eta(d: i64, level: u64, eta: f64, x: u64) -> Result<EEta> {
    Ok(e_eta_grid(d, level, eta, &[x])?.remove(0))
}

/// E_η at every point of an increasing grid.
pub fn e_eta_grid(d: i64, level: u64, eta: f64, grid: &[u64]) -> Result<Vec<EEta>> {
    check_grid(grid)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta = {eta} must be positive")));
    }
    if level == 0 {
        return Err(Error::Input("level must be positive".into()));
    }
    let x = *grid.last().expect("non-empty");
    let cs = class_set(d)?;
    let star = r_star_table(d, x)?;
    let mut lattice = vec![0u64; x as usize + 1];
    for q in &cs.forms {
        for (t, r) in lattice.iter_mut().zip(q.representation_counts(x).as_slice()) {
            *t += r;
        }
    }
    let table = OmegaTable::new(x);
    let mut out = Vec::with_capacity(grid.len());
    let (mut prim, mut latt) = (CompensatedSum::new(), CompensatedSum::new());
    let mut n = 1usize;
    for &g in grid {
        while n <= g as usize {
            if table.admissible(n, level) {
                let w = eta.powi(table.omega[n] as i32);
                prim.add(w * star[n] as f64);
                latt.add(w * lattice[n] as f64);
            }
            n += 1;
        }
        out.push(EEta {
            discriminant: d,
            level,
            eta,
            x: g,
            value: prim.value(),
            convention: RepConvention::Primitive,
            lattice_value: latt.value(),
            w: cs.w,
        });
    }
    Ok(out)
}

/// Truncated Euler product P(1) with a bound on the neglected tail of
/// log P.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerP1 {
    pub value: f64,
    pub cutoff: u64,
    pub tail_bound: f64,
}

/// P(1) = Π_{p|N} (1 − 1/p)^η(1 − χ(p)/p)^η ·
/// Π_{p∤N} (1 − 1/p)^η(1 − χ(p)/p)^η(1 + η(1 + χ(p))/p) over p ≤ cutoff.
pub fn euler_p1(d: i64, level: u64, eta: f64, cutoff: u64) -> Result<EulerP1> {
    if cutoff < 2 {
        return Err(Error::Input("prime cutoff must be at least 2".into()));
    }
    let chi = DirichletCharacterD::new(d)?;
    let mut log_sum = CompensatedSum::new();
    for p in ntkernel::sieve_primes(cutoff) {
        let pf = p as f64;
        let c = chi.eval(p) as f64;
        log_sum.add(eta * (-1.0 / pf).ln_1p());
        log_sum.add(eta * (-c / pf).ln_1p());
        if level % p != 0 {
            log_sum.add((eta * (1.0 + c) / pf).ln_1p());
        }
    }
    // each remaining factor is 1 + O((η+1)²/p²), and Σ_{p>P} 1/p² < 1/P
    let tail_bound = 2.0 * (eta + 1.0).powi(2) / cutoff as f64;
    log::debug!("P(1) truncated at {cutoff}, log-tail bound {tail_bound:e}");
    Ok(EulerP1 {
        value: log_sum.value().exp(),
        cutoff,
        tail_bound,
    })
}

/// L(1, χ_D) by the class number formula, with a partial-sum cross-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Chi {
    pub discriminant: i64,
    pub value: f64,
    pub h: usize,
    pub w: u32,
    pub fundamental: bool,
    pub partial_sum: f64,
    pub partial_limit: u64,
}

impl L1Chi {
    /// Class-number value and partial sum agree within `tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        (self.value - self.partial_sum).abs() <= tol
    }
}

/// 2πh(D)/(w_D√|D|).
pub fn l1_chi_value(d: i64) -> Result<f64> {
    let cs = class_set(d)?;
    Ok(2.0 * std::f64::consts::PI * cs.h as f64 / (cs.w as f64 * (d.unsigned_abs() as f64).sqrt()))
}

pub fn l1_chi(d: i64) -> Result<L1Chi> {
    l1_chi_checked(d, 1_000_000)
}

pub fn l1_chi_checked(d: i64, partial_limit: u64) -> Result<L1Chi> {
    let cs = class_set(d)?;
    let fundamental = ntkernel::is_fundamental_discriminant(d);
    if !fundamental {
        log::warn!("D = {d} is not fundamental; class number formula evaluated with h = {}", cs.h);
    }
    let chi = DirichletCharacterD::new(d)?;
    let mut acc = CompensatedSum::new();
    for n in 1..=partial_limit {
        let c = chi.eval(n);
        if c != 0 {
            acc.add(c as f64 / n as f64);
        }
    }
    Ok(L1Chi {
        discriminant: d,
        value: l1_chi_value(d)?,
        h: cs.h,
        w: cs.w,
        fundamental,
        partial_sum: acc.value(),
        partial_limit,
    })
}

/// Main term of E_η(X) and its error envelope (implied constants set to 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainTermE {
    pub main: f64,
    pub error_envelope: f64,
    pub p1: f64,
    pub l1: f64,
    pub gamma_eta: f64,
}

/// P(1)·L(1,χ_D)^η/Γ(η)·X(log X)^{η−1}, envelope main·L_N^{2eη+2}√N/log X
/// with L_N = log(ω(N) + 3).
pub fn main_term_e(d: i64, level: u64, eta: f64, x: f64, prime_cutoff: u64) -> Result<MainTermE> {
    if !(x >= 3.0) {
        return Err(Error::Domain(format!("X = {x} must be at least 3")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta = {eta} must be positive")));
    }
    let p1 = euler_p1(d, level, eta, prime_cutoff)?.value;
    let l1 = l1_chi_value(d)?;
    let gamma_eta = gamma(eta);
    let log_x = x.ln();
    let log_main = p1.ln() + eta * l1.ln() - ln_gamma(eta) + x.ln() + (eta - 1.0) * log_x.ln();
    let main = log_main.exp();
    let l_n = ((ntkernel::omega(level) + 3) as f64).ln();
    let envelope = main * l_n.powf(2.0 * std::f64::consts::E * eta + 2.0) * (level as f64).sqrt() / log_x;
    Ok(MainTermE {
        main,
        error_envelope: envelope,
        p1,
        l1,
        gamma_eta,
    })
}

/// X-exponent of the upper bound: 1 − 1/B as usually quoted, or the sharper
/// 1 − 2/B.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundExponent {
    #[default]
    Statement,
    Proof,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub ell: u32,
    pub k: u32,
    pub level: u64,
    pub d: i64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub epsilon: f64,
    pub u0: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_odd_ell(self.ell)?;
        if self.ell < 3 {
            return Err(Error::Input("ell must be at least 3".into()));
        }
        ntkernel::check_negative_discriminant(self.d)?;
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain("epsilon must be positive".into()));
        }
        if !(self.x >= 1.0 && self.y >= 1.0) {
            return Err(Error::Domain("X and Y must be at least 1".into()));
        }
        if !(self.u >= 1.0) {
            return Err(Error::Domain("u must be at least 1".into()));
        }
        if !(self.u0 > 1.0) {
            return Err(Error::Domain(format!("u0 = {} must exceed 1", self.u0)));
        }
        if self.k == 0 || self.level == 0 {
            return Err(Error::Input("weight and level must be positive".into()));
        }
        Ok(())
    }
}

/// A positive quantity carried in log space; `value` may overflow to ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
    pub value: f64,
}

impl LogValue {
    fn from_ln(ln: f64) -> Self {
        Self { ln, value: ln.exp() }
    }
}

fn constants_f64(ell: u32) -> Result<(f64, f64)> {
    let c = fold_constants(ell as u64)?;
    Ok((c.a_f64(), c.b_f64()))
}

/// X^{1−c/B+ε}·(N^A·(k|D|^{1/2})^B)^{1/B+ε}, c = 1 or 2 per `exponent`.
pub fn thm11_bound(inputs: &BoundInputs, exponent: BoundExponent) -> Result<LogValue> {
    inputs.validate()?;
    let (a, b) = constants_f64(inputs.ell)?;
    let c = match exponent {
        BoundExponent::Statement => 1.0,
        BoundExponent::Proof => 2.0,
    };
    let eps = inputs.epsilon;
    let inner = a * (inputs.level as f64).ln()
        + b * ((inputs.k as f64).ln() + 0.5 * (inputs.d.unsigned_abs() as f64).ln());
    Ok(LogValue::from_ln(
        (1.0 - c / b + eps) * inputs.x.ln() + (1.0 / b + eps) * inner,
    ))
}

/// (N^A k^B)^{1/(2u₀)+ε}·(2π/w_D)^{−2^{ℓ−1}B/u₀}·|D|^{(1−2^{ℓ−1})B/(2u₀)+ε},
/// times h(D)^{−(2^{ℓ−1}+1)B/(2u₀)} when a class number is supplied.
pub fn thm12_bound(inputs: &BoundInputs, class_number: Option<u64>) -> Result<LogValue> {
    inputs.validate()?;
    let (a, b) = constants_f64(inputs.ell)?;
    let u0 = inputs.u0;
    let eps = inputs.epsilon;
    let pow2 = 2f64.powi(inputs.ell as i32 - 1);
    let w = unit_count(inputs.d) as f64;
    let abs_d = inputs.d.unsigned_abs() as f64;
    let mut ln = (1.0 / (2.0 * u0) + eps)
        * (a * (inputs.level as f64).ln() + b * (inputs.k as f64).ln())
        - pow2 * b / u0 * (2.0 * std::f64::consts::PI / w).ln()
        + ((1.0 - pow2) * b / (2.0 * u0) + eps) * abs_d.ln();
    if let Some(h) = class_number {
        if h == 0 {
            return Err(Error::Domain("class number must be positive".into()));
        }
        ln -= (pow2 + 1.0) * b / (2.0 * u0) * (h as f64).ln();
    }
    Ok(LogValue::from_ln(ln))
}

/// Where the first negative coefficient is searched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SignTarget {
    /// all admissible integers
    I,
    /// integers represented by one form
    Q { form: QuadraticForm },
    /// integers represented by some form of discriminant D
    D { discriminant: i64 },
}

impl SignTarget {
    pub fn label(&self) -> &'static str {
        match self {
            Self::I => "I",
            Self::Q { .. } => "Q",
            Self::D { .. } => "D",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChangeResult {
    pub mode: String,
    pub ell: u32,
    pub n_star: Option<u64>,
    pub witness_a: Option<String>,
    pub witness_form: Option<QuadraticForm>,
    pub witness_point: Option<(i64, i64)>,
    pub search_limit: u64,
}

/// Smallest squarefree n ≤ limit, coprime to N, with a_f(n) < 0 (the sign
/// of λ_f(n)^ℓ for odd ℓ) that meets the target's representability test.
pub fn first_sign_change(
    f: &Eigenform,
    ell: u32,
    target: &SignTarget,
    limit: u64,
) -> Result<SignChangeResult> {
    check_odd_ell(ell)?;
    check_range(f, limit)?;
    let forms: Vec<QuadraticForm> = match target {
        SignTarget::I => Vec::new(),
        SignTarget::Q { form } => vec![*form],
        SignTarget::D { discriminant } => class_set(*discriminant)?.forms,
    };
    let tables: Vec<_> = forms.iter().map(|q| q.representation_counts(limit)).collect();
    let table = OmegaTable::new(limit);
    let mut result = SignChangeResult {
        mode: target.label().to_string(),
        ell,
        n_star: None,
        witness_a: None,
        witness_form: None,
        witness_point: None,
        search_limit: limit,
    };
    for n in 1..=limit {
        if !table.admissible(n as usize, f.level()) {
            continue;
        }
        let a = f.coefficient(n)?;
        if a.sign() != num_bigint::Sign::Minus {
            continue;
        }
        let form = if forms.is_empty() {
            None
        } else {
            match forms.iter().zip(&tables).find(|(_, t)| t.get(n) > 0) {
                Some((q, _)) => Some(*q),
                None => continue,
            }
        };
        result.n_star = Some(n);
        result.witness_a = Some(a.to_string());
        result.witness_point = form.and_then(|q| q.find_representation(n));
        result.witness_form = form;
        break;
    }
    Ok(result)
}

/// |S_ℓ(f, Q; X)| against the upper bound along an X grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub ell: u32,
    pub form: QuadraticForm,
    pub convention: RepConvention,
    pub exponent: BoundExponent,
    pub epsilon: f64,
    pub grid: Vec<u64>,
    pub s_values: Vec<f64>,
    pub log_bounds: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// running maximum of the ratio up to each grid point
    pub running_max: Vec<f64>,
}

pub fn bound_ratio_sweep(
    f: &Eigenform,
    q: &QuadraticForm,
    ell: u32,
    grid: &[u64],
    epsilon: f64,
    exponent: BoundExponent,
) -> Result<SumReport> {
    let s_values = summatory_sq_grid(f, q, ell, grid)?;
    let mut log_bounds = Vec::with_capacity(grid.len());
    let mut ratios = Vec::with_capacity(grid.len());
    let mut running_max = Vec::with_capacity(grid.len());
    let mut best = 0.0f64;
    for (&x, &s) in grid.iter().zip(&s_values) {
        let inputs = BoundInputs {
            ell,
            k: f.weight(),
            level: f.level(),
            d: q.discriminant(),
            x: x as f64,
            y: 1.0,
            u: 1.0,
            epsilon,
            u0: 2.0,
        };
        let lb = thm11_bound(&inputs, exponent)?.ln;
        let ratio = if s == 0.0 { 0.0 } else { (s.abs().ln() - lb).exp() };
        best = best.max(ratio);
        log_bounds.push(lb);
        ratios.push(ratio);
        running_max.push(best);
    }
    Ok(SumReport {
        ell,
        form: *q,
        convention: RepConvention::Lattice,
        exponent,
        epsilon,
        grid: grid.to_vec(),
        s_values,
        log_bounds,
        ratios,
        max_ratio: best,
        running_max,
    })
}

/// Σ♭ h_Y(n)^ℓ r*(n) over n ≤ Y^u coprime to N, against the predicted main
/// term σ(u)·P(1)·L(1,χ_D)^{β₀}/Γ(β₀)·(log Y^u)^{β₀−1}·Y^u with β₀ = 2^ℓ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub discriminant: i64,
    pub level: u64,
    pub ell: u32,
    pub y: u64,
    pub u: f64,
    pub x: u64,
    pub lhs: f64,
    pub sigma_u: f64,
    pub main_term: f64,
    pub ratio: f64,
    pub convention: RepConvention,
    pub truncation_k: usize,
    pub grid_step: f64,
    /// primes p ≤ Y, p ∤ N, r*(p) > 0 with λ_f(p)^ℓ < h_Y(p)^ℓ
    pub g_q_negative_primes: Option<Vec<u64>>,
    pub g_q_negative_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundParams {
    pub truncation_k: usize,
    pub grid_step: f64,
    pub prime_cutoff: u64,
}

impl Default for LowerBoundParams {
    fn default() -> Self {
        Self {
            truncation_k: 20,
            grid_step: 1e-4,
            prime_cutoff: 1_000_000,
        }
    }
}

pub fn lowerbound_lhs(
    d: i64,
    level: u64,
    ell: u32,
    y: u64,
    u: f64,
    params: &LowerBoundParams,
    f: Option<&Eigenform>,
) -> Result<LowerBoundReport> {
    check_odd_ell(ell)?;
    if y < 2 {
        return Err(Error::Domain("Y must be at least 2".into()));
    }
    if !(u >= 1.0) {
        return Err(Error::Domain(format!("u = {u} must be at least 1")));
    }
    if level == 0 {
        return Err(Error::Input("level must be positive".into()));
    }
    let yf = y as f64;
    let yu = yf.powf(u);
    let x = (yu * (1.0 + 1e-12)).floor() as u64;
    if x > 50_000_000 {
        return Err(Error::Input(format!("Y^u = {yu} is beyond the table range")));
    }
    let alpha = alpha_step(params.truncation_k)?;
    let table = OmegaTable::new(x);
    let star = r_star_table(d, x)?;

    // h_Y is multiplicative and supported on squarefree n
    let mut hv = vec![0.0f64; x as usize + 1];
    hv[1] = 1.0;
    let mut acc = CompensatedSum::new();
    acc.add(star[1] as f64);
    for n in 2..=x as usize {
        if !table.squarefree[n] {
            continue;
        }
        let p = table.sieve.spf(n) as u64;
        hv[n] = hv[n / p as usize] * h_y_value(p, yf, level, &alpha)?;
        if table.admissible(n, level) && hv[n] != 0.0 && star[n] != 0 {
            acc.add(hv[n].powi(ell as i32) * star[n] as f64);
        }
    }
    let lhs = acc.value();

    let beta = pow_step(&alpha, ell)?;
    let beta0 = beta.initial();
    let u_solve = (u + 0.5).clamp(1.5, 10.0);
    if u > u_solve {
        return Err(Error::Input(format!("u = {u} exceeds the solver range")));
    }
    let sol = solve_sigma(&beta, u_solve, params.grid_step, ell)?;
    let sigma_u = sol.at(u);
    let p1 = euler_p1(d, level, beta0, params.prime_cutoff)?.value;
    let l1 = l1_chi_value(d)?;
    let log_rest = p1.ln() + beta0 * l1.ln() - ln_gamma(beta0) + (beta0 - 1.0) * yu.ln().ln() + yu.ln();
    let main_term = sigma_u * log_rest.exp();

    let (neg, count) = match f {
        Some(f) => {
            if y > f.x_max() {
                return Err(Error::Range {
                    index: y,
                    max: f.x_max(),
                });
            }
            let chi = DirichletCharacterD::new(d)?;
            let mut neg = Vec::new();
            for p in ntkernel::sieve_primes(y) {
                if level % p == 0 || 1 + chi.eval(p) as i64 == 0 {
                    continue;
                }
                let lp = f.normalized_lambda(p)?.value.powi(ell as i32);
                let hp = h_y_value(p, yf, level, &alpha)?.powi(ell as i32);
                if lp < hp {
                    neg.push(p);
                }
            }
            let count = neg.len();
            neg.truncate(20);
            (Some(neg), Some(count))
        }
        None => (None, None),
    };

    Ok(LowerBoundReport {
        discriminant: d,
        level,
        ell,
        y,
        u,
        x,
        lhs,
        sigma_u,
        main_term,
        ratio: lhs / main_term,
        convention: RepConvention::Primitive,
        truncation_k: params.truncation_k,
        grid_step: params.grid_step,
        g_q_negative_primes: neg,
        g_q_negative_count: count,
    })
}
