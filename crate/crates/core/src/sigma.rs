//! The step kernel α, the sieve weight h_Y, and the delay equation for σ(u).
//!
//! σ solves u·σ(u) = ∫₀ᵘ σ(t)β(u − t) dt with β = α^ℓ, equivalently
//!
//!   d/du (u^{1−β₀}σ(u)) = −u^{−β₀} Σ_k σ(u − x_k)(β_{k−1} − β_k),
//!
//! seeded by σ(u) = u^{β₀−1} on (0, x₁].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::CompensatedSum;
use crate::{Error, Result};

/// Piecewise constant function on (0, ∞): `values[0]` on (0, x₁],
/// `values[j]` on (x_j, x_{j+1}], and the last value on (x_last, ∞).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || values.len() != breakpoints.len() + 1 {
            return Err(Error::Input(
                "a step function needs k >= 1 breakpoints and k + 1 values".into(),
            ));
        }
        if breakpoints[0] <= 0.0 || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input(
                "breakpoints must be positive and strictly increasing".into(),
            ));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Input("step function data must be finite".into()));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at t; t ≤ 0 reads the initial value.
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&x| x < t)]
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn tail(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    /// x₁, the end of the initial interval.
    pub fn first_breakpoint(&self) -> f64 {
        self.breakpoints[0]
    }

    /// Smallest distance between consecutive breakpoints (x₁ itself counts).
    pub fn min_gap(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(self.breakpoints[0], f64::min)
    }

    /// Jumps c_k = v_{k−1} − v_k at each breakpoint x_k.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, self.values[k] - self.values[k + 1]))
            .collect()
    }
}

/// The truncated kernel α: 2 on (0, 1/(K+1)], 2cos(π/(m+1)) on
/// (1/(m+1), 1/m] for 1 ≤ m ≤ K, and −2 beyond 1.
pub fn alpha_step(k: usize) -> Result<StepFunction> {
    if k == 0 {
        return Err(Error::Input("truncation order K must be at least 1".into()));
    }
    let mut breakpoints = Vec::with_capacity(k + 1);
    let mut values = Vec::with_capacity(k + 2);
    values.push(2.0);
    for m in (1..=k).rev() {
        breakpoints.push(1.0 / (m + 1) as f64);
        values.push(match m {
            1 => 0.0,
            2 => 1.0,
            _ => 2.0 * (std::f64::consts::PI / (m + 1) as f64).cos(),
        });
    }
    breakpoints.push(1.0);
    values.push(-2.0);
    StepFunction::new(breakpoints, values)
}

/// Pointwise ℓ-th power.
pub fn pow_step(alpha: &StepFunction, ell: u32) -> Result<StepFunction> {
    if ell == 0 {
        return Err(Error::Input("ell must be at least 1".into()));
    }
    StepFunction::new(
        alpha.breakpoints.clone(),
        alpha.values.iter().map(|v| v.powi(ell as i32)).collect(),
    )
}

/// h_Y(p): 0 if p | N, −2 if p > Y, else α(log p / log Y).
pub fn h_y_value(p: u64, y: f64, level: u64, alpha: &StepFunction) -> Result<f64> {
    if y < 2.0 {
        return Err(Error::Domain(format!("Y = {y} must be at least 2")));
    }
    if level % p == 0 {
        return Ok(0.0);
    }
    if p as f64 > y {
        return Ok(-2.0);
    }
    Ok(alpha.eval((p as f64).ln() / y.ln()))
}

/// σ on the uniform grid u_i = i·h, 0 ≤ i ≤ n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaSolution {
    pub ell: u32,
    pub beta0: f64,
    pub x1: f64,
    pub h: f64,
    pub u_max: f64,
    sigma: Vec<f64>,
    /// index of the last node ≤ x₁
    seed_end: usize,
    /// ∫ of σ from 0 to each node i ≥ seed_end + 1, exact on (0, x₁]
    primitive: Vec<f64>,
}

impl SigmaSolution {
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// σ at the grid nodes.
    pub fn values(&self) -> &[f64] {
        &self.sigma
    }

    /// (u_i, σ(u_i)) pairs.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sigma.iter().enumerate().map(|(i, &s)| (self.node(i), s))
    }

    /// σ(u): 0 for u ≤ 0, exact on (0, x₁], linear interpolation between
    /// nodes beyond.
    pub fn at(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u <= self.x1 {
            return u.powf(self.beta0 - 1.0);
        }
        let pos = u / self.h;
        let j = (pos.floor() as usize).min(self.sigma.len() - 2);
        let f = pos - j as f64;
        if f == 0.0 {
            return self.sigma[j];
        }
        self.sigma[j] + (self.sigma[j + 1] - self.sigma[j]) * f
    }

    /// ∫₀ᵗ σ with the same piecewise definition as [`SigmaSolution::at`].
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t <= self.x1 {
            return t.powf(self.beta0) / self.beta0;
        }
        let base = self.x1.powf(self.beta0) / self.beta0;
        let first = self.seed_end + 1;
        let u_first = self.node(first);
        if t <= u_first {
            return base + (t - self.x1) * (self.at(self.x1) + self.at(t)) / 2.0;
        }
        let j = ((t / self.h).floor() as usize).min(self.sigma.len() - 1);
        let uj = self.node(j);
        let to_node = base
            + (u_first - self.x1) * (self.at(self.x1) + self.sigma[first]) / 2.0
            + self.primitive[j - first];
        to_node + (t - uj) * (self.sigma[j] + self.at(t)) / 2.0
    }
}

/// Integrates the delay equation by the trapezoidal rule in g = u^{1−β₀}σ.
pub fn solve_sigma(beta: &StepFunction, u_max: f64, h: f64, ell: u32) -> Result<SigmaSolution> {
    let x1 = beta.first_breakpoint();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input(format!("grid step h = {h} must be positive")));
    }
    if h > beta.min_gap() {
        return Err(Error::Input(format!(
            "grid step h = {h} exceeds the smallest breakpoint gap {}",
            beta.min_gap()
        )));
    }
    if !(u_max > 1.0 && u_max <= 10.0) {
        return Err(Error::Input(format!("U = {u_max} must lie in (1, 10]")));
    }
    let beta0 = beta.initial();
    if (beta0 - 1.0) * u_max.log10() > 300.0 {
        return Err(Error::Input(format!(
            "u^(β₀−1) overflows binary64 for β₀ = {beta0}, U = {u_max}"
        )));
    }
    let n = (u_max / h).round() as usize;
    let seed_end = (x1 / h).floor() as usize;
    let mut sol = SigmaSolution {
        ell,
        beta0,
        x1,
        h,
        u_max: n as f64 * h,
        sigma: vec![0.0; n + 1],
        seed_end,
        primitive: Vec::new(),
    };
    for i in 1..=seed_end.min(n) {
        sol.sigma[i] = sol.node(i).powf(beta0 - 1.0);
    }
    let jumps = beta.jumps();
    // every delayed argument u − x_k with x_k ≥ h lies at or before the
    // previous node, so the step is explicit
    let rhs = |sol: &SigmaSolution, u: f64| -> f64 {
        let mut acc = CompensatedSum::new();
        for &(x, c) in &jumps {
            if c != 0.0 && u > x {
                acc.add(c * sol.at(u - x));
            }
        }
        -acc.value() * u.powf(-beta0)
    };
    let u0 = sol.node(seed_end);
    let mut g = if seed_end == 0 { 1.0 } else { u0.powf(1.0 - beta0) * sol.sigma[seed_end] };
    let mut f_prev = rhs(&sol, u0);
    for i in seed_end..n {
        let u = sol.node(i + 1);
        let f_next = rhs(&sol, u);
        g += h / 2.0 * (f_prev + f_next);
        f_prev = f_next;
        sol.sigma[i + 1] = u.powf(beta0 - 1.0) * g;
    }
    let first = seed_end + 1;
    let mut prim = Vec::with_capacity(n + 1 - first.min(n + 1));
    let mut acc = CompensatedSum::new();
    prim.push(0.0);
    for j in first..n {
        acc.add(h * (sol.sigma[j] + sol.sigma[j + 1]) / 2.0);
        prim.push(acc.value());
    }
    sol.primitive = prim;
    Ok(sol)
}

/// |u·σ(u) − ∫₀ᵘ σ(t)β(u − t) dt|, the integral taken exactly over the
/// piecewise linear σ and split at the kernel's jumps.
pub fn residual_integral_eq(sol: &SigmaSolution, beta: &StepFunction, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= sol.u_max) {
        return Err(Error::Input(format!("u = {u} outside (0, {}]", sol.u_max)));
    }
    // β(u − t) = values[j] for t ∈ [u − x_{j+1}, u − x_j)
    let mut acc = CompensatedSum::new();
    let mut hi = u;
    for (j, &x) in beta.breakpoints().iter().enumerate() {
        let lo = (u - x).max(0.0);
        if hi > lo {
            acc.add(beta.values()[j] * (sol.integral_to(hi) - sol.integral_to(lo)));
        }
        hi = lo;
        if hi <= 0.0 {
            break;
        }
    }
    if hi > 0.0 {
        acc.add(beta.tail() * sol.integral_to(hi));
    }
    Ok((u * sol.at(u) - acc.value()).abs())
}

/// Whether σ changed sign inside the solved range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U0Status {
    Crossing,
    NoCrossing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0Result {
    pub u0: f64,
    pub status: U0Status,
}

/// First zero of σ after x₁, located by bisection on the interpolant between
/// the bracketing nodes; U with `NoCrossing` when σ stays positive.
pub fn find_u0(sol: &SigmaSolution) -> U0Result {
    let start = sol.seed_end + 1;
    for i in start..sol.sigma.len() {
        if sol.sigma[i] <= 0.0 {
            let (mut lo, mut hi) = (sol.node(i - 1).max(sol.x1), sol.node(i));
            if sol.at(lo) <= 0.0 {
                return U0Result {
                    u0: lo,
                    status: U0Status::Crossing,
                };
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sol.at(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return U0Result {
                u0: lo,
                status: U0Status::Crossing,
            };
        }
    }
    U0Result {
        u0: sol.u_max,
        status: U0Status::NoCrossing,
    }
}

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

const MC_CHUNK: u64 = 1 << 16;

/// I_j(u) = ∫_{t₁+⋯+t_j ≤ u} (u − Σt)^{β₀−1} Π(β₀ − β(t_i)) Π dt_i/t_i for
/// j ∈ {1, 2}.
///
/// Each t_i is drawn with density ∝ 1/t on [x₁, u], where the integrand
/// lives. Chunk c uses stream c of a ChaCha8 generator seeded with `seed`, so
/// the estimate does not depend on the thread count.
pub fn i_j_montecarlo(
    beta: &StepFunction,
    u: f64,
    j: u32,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if !(j == 1 || j == 2) {
        return Err(Error::Input(format!("j = {j} must be 1 or 2")));
    }
    if !(u > 0.0) {
        return Err(Error::Domain(format!("u = {u} must be positive")));
    }
    if samples == 0 {
        return Err(Error::Input("samples must be positive".into()));
    }
    let x1 = beta.first_breakpoint();
    let beta0 = beta.initial();
    if u <= j as f64 * x1 {
        return Ok(MonteCarloEstimate {
            value: 0.0,
            std_error: 0.0,
            samples,
            seed,
        });
    }
    let log_range = (u / x1).ln();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
            for _ in 0..count {
                let mut total = 0.0;
                let mut weight = 1.0;
                for _ in 0..j {
                    let t = x1 * (log_range * rng.random::<f64>()).exp();
                    total += t;
                    weight *= log_range * (beta0 - beta.eval(t));
                }
                let v = if total < u {
                    weight * (u - total).powf(beta0 - 1.0)
                } else {
                    0.0
                };
                s1.add(v);
                s2.add(v * v);
            }
            (s1.value(), s2.value())
        })
        .collect();
    let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    for (a, b) in partials {
        s1.add(a);
        s2.add(b);
    }
    let n = samples as f64;
    let mean = s1.value() / n;
    let var = (s2.value() / n - mean * mean).max(0.0);
    Ok(MonteCarloEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        samples,
        seed,
    })
}
