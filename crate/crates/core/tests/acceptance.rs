//! Acceptance criteria. Runs without the libtest harness so the PASS/FAIL
//! lines show up in plain `cargo test` output.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use lfold::fold::{cheb_decomposition, chebyshev_t, fcrel_sweep, fold_constants};
use lfold::modforms::{build_level_one_eigenform, Eigenform, LEVEL_ONE_WEIGHTS};
use lfold::quadforms::{class_set, verify_rep_formula, QuadraticForm, RepFormulaStatus, CLASS_NUMBER_ONE};
use lfold::sigma::{alpha_step, find_u0, i_j_montecarlo, pow_step, residual_integral_eq, solve_sigma, U0Status};
use lfold::sums::{
    bound_ratio_sweep, e_eta, e_eta_grid, first_sign_change, lowerbound_lhs, main_term_e, summatory_sq,
    summatory_sq_grid, BoundExponent, LowerBoundParams, SignTarget,
};

/// Criterion 1 asks for B_7 = 126; the exact optimum is 128.
const KNOWN_UNATTAINABLE: &[u32] = &[1];

/// Frozen from the calibration run at X = 10⁶.
const C10_MEAN_LIMIT: f64 = 0.05;
const C10_GROWTH_LIMIT: f64 = 2.0;

const C9_RATIO_RANGE: (f64, f64) = (0.5, 2.0);
const C8_RESIDUAL_SCALE: f64 = 1e-3;
const C8_HALVING_TOL: f64 = 1e-4;
const C8_SOFT_U0: f64 = 2.235;
const C8_SOFT_TOL: f64 = 0.25;
const C6_REL_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn form(a: i64, b: i64, c: i64) -> QuadraticForm {
    QuadraticForm::new(a, b, c).unwrap()
}

fn is_squarefree(n: u64) -> bool {
    (2..).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let expected = [(3, 5, 8), (5, 22, 32), (7, 93, 126)];
    let mut got = Vec::new();
    let mut pass = true;
    for (ell, a, b) in expected {
        let (ca, cb) = fold_constants(ell).unwrap().as_integers().unwrap();
        pass &= ca == BigInt::from(a) && cb == BigInt::from(b);
        got.push(format!("ell={ell}: ({ca},{cb})"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "{} in {elapsed:?}; expected (93,126) for ell=7, exact value is (93,128)",
            got.join(", ")
        ),
    )
}

/// Σ_j A_{ℓ,j} T_j(x) = x^ℓ; the coefficient table is indexed by the degree
/// of the Chebyshev polynomial it multiplies.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    for ell in 1..=15u64 {
        let dec = cheb_decomposition(ell).unwrap();
        let mut acc = vec![BigInt::zero(); ell as usize + 1];
        for j in 0..=ell {
            let t = chebyshev_t(j);
            for (i, c) in t.iter().enumerate() {
                acc[i] += dec.coefficient(j) * c;
            }
        }
        let mut target = vec![BigInt::zero(); ell as usize + 1];
        target[ell as usize] = BigInt::one();
        pass &= acc == target;
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    outcome(pass, format!("x^ℓ recovered exactly for 1 ≤ ℓ ≤ 15 in {elapsed:?} (indexed by T_j degree)"))
}

fn criterion_3(delta: &Eigenform) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for ell in [3, 5, 7] {
        failures.extend(fcrel_sweep(delta, ell, 10_000).unwrap().into_iter().map(|p| (ell, p)));
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("primes p ≤ 10⁴, ℓ ∈ {{3,5,7}}: {} failures in {elapsed:?}", failures.len()),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for d in CLASS_NUMBER_ONE {
        let q = class_set(d).unwrap().forms[0];
        match verify_rep_formula(&q, 10_000).unwrap() {
            RepFormulaStatus::Pass { .. } => {}
            other => bad.push(format!("D={d}: {other:?}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && elapsed < Duration::from_secs(60),
        format!("9 discriminants, n ≤ 10⁴ in {elapsed:?} {}", bad.join("; ")),
    )
}

/// Δ = q·Π(1 − qⁿ)²⁴ by repeated multiplication with the pentagonal series.
fn eta24_oracle(x: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); x];
    let mut k: i64 = 0;
    loop {
        let mut any = false;
        for m in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
            if (m as usize) < x && (k != 0 || m == 0) {
                e[m as usize] = if k.is_even() { BigInt::one() } else { -BigInt::one() };
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    let mut acc = vec![BigInt::zero(); x];
    acc[0] = BigInt::one();
    for _ in 0..24 {
        let mut next = vec![BigInt::zero(); x];
        for (i, a) in acc.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in e.iter().enumerate().take(x - i).filter(|(_, b)| !b.is_zero()) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    for w in LEVEL_ONE_WEIGHTS {
        let f = build_level_one_eigenform(w, 10_000).unwrap();
        if let Some(v) = f.first_violation() {
            problems.push(format!("k={w}: {v}"));
        }
        if !f.verify_deligne(10_000).unwrap().passed() {
            problems.push(format!("k={w}: Deligne"));
        }
    }
    let oracle = eta24_oracle(1000);
    let delta = build_level_one_eigenform(12, 999).unwrap();
    let mismatch = (1..1000u64).find(|&n| *delta.coefficient(n).unwrap() != oracle[n as usize - 1]);
    if let Some(n) = mismatch {
        problems.push(format!("η²⁴ mismatch at n={n}"));
    }
    outcome(
        problems.is_empty(),
        format!(
            "weights {LEVEL_ONE_WEIGHTS:?} to 10⁴, η²⁴ oracle to 10³ {}",
            problems.join("; ")
        ),
    )
}

fn criterion_6(delta: &Eigenform) -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for q in [form(1, 0, 1), form(1, 1, 1), form(1, 0, 2), form(2, 1, 3), form(1, 1, 6)] {
        for x in [10u64, 100, 1000] {
            let r = (2.0 * (x as f64).sqrt()) as i64 + 2;
            let mut direct = Vec::new();
            for s in -r..=r {
                for t in -r..=r {
                    let v = q.eval(s, t);
                    if v >= 1 && v <= x as i128 && is_squarefree(v as u64) {
                        direct.push(v as u64);
                    }
                }
            }
            direct.sort_unstable();
            let reps = q.representation_counts(x);
            let tabled: Vec<u64> = (1..=x)
                .filter(|&n| is_squarefree(n))
                .flat_map(|n| std::iter::repeat_n(n, reps.get(n) as usize))
                .collect();
            pass &= direct == tabled;
            let direct_sum: f64 = direct
                .iter()
                .map(|&n| delta.normalized_lambda(n).unwrap().value.powi(3))
                .sum();
            let s = summatory_sq(delta, &q, 3, x).unwrap();
            let rel = (s - direct_sum).abs() / s.abs().max(1e-300);
            worst = worst.max(rel);
            pass &= rel <= C6_REL_TOL;
        }
    }
    outcome(pass, format!("term multisets identical, worst relative gap {worst:.2e}"))
}

fn criterion_7(delta: &Eigenform) -> Outcome {
    let q = form(1, 0, 1);
    let r3 = first_sign_change(delta, 3, &SignTarget::Q { form: q }, 1000).unwrap();
    let mut pass = r3.n_star == Some(2) && r3.witness_a.as_deref() == Some("-24");
    for ell in [5, 7] {
        pass &= first_sign_change(delta, ell, &SignTarget::Q { form: q }, 1000).unwrap().n_star == r3.n_star;
    }
    let mut pairs = 0;
    for w in [12, 16, 18, 20, 22, 26] {
        let f = build_level_one_eigenform(w, 2000).unwrap();
        let n_i = first_sign_change(&f, 3, &SignTarget::I, 2000).unwrap().n_star;
        for q in [form(1, 0, 1), form(1, 1, 1), form(1, 0, 5), form(2, 1, 3), form(1, 1, 41)] {
            let n_q = first_sign_change(&f, 3, &SignTarget::Q { form: q }, 2000).unwrap().n_star;
            if let Some(n_q) = n_q {
                pass &= n_i.is_some_and(|n| n <= n_q);
                pairs += 1;
            }
        }
    }
    outcome(
        pass,
        format!("n = {:?}, a = {:?}; n_I ≤ n_Q on {pairs} (f, Q) pairs", r3.n_star, r3.witness_a),
    )
}

fn criterion_8() -> Outcome {
    let beta = pow_step(&alpha_step(20).unwrap(), 3).unwrap();
    let s1 = solve_sigma(&beta, 3.0, 1e-4, 3).unwrap();
    let s2 = solve_sigma(&beta, 3.0, 5e-5, 3).unwrap();
    let x1 = beta.first_breakpoint();
    let exact_seed = s1
        .nodes()
        .take_while(|&(u, _)| u <= x1)
        .all(|(u, v)| v == u.powf(beta.initial() - 1.0));
    let mut worst_res: f64 = 0.0;
    let mut worst_half: f64 = 0.0;
    let mut u = x1;
    while u <= 3.0 {
        let r = residual_integral_eq(&s1, &beta, u).unwrap() / (1.0 + u.powf(beta.initial()));
        worst_res = worst_res.max(r);
        worst_half = worst_half.max((s1.at(u) - s2.at(u)).abs());
        u += 0.005;
    }
    let u0 = find_u0(&s1);
    let pass = exact_seed
        && worst_res < C8_RESIDUAL_SCALE
        && worst_half < C8_HALVING_TOL
        && u0.status == U0Status::Crossing
        && u0.u0 > 1.0;
    let soft = (u0.u0 - C8_SOFT_U0).abs() <= C8_SOFT_TOL;
    outcome(
        pass,
        format!(
            "seed exact {exact_seed}, residual/(1+u^β₀) ≤ {worst_res:.2e}, halving ≤ {worst_half:.2e}, u0 = {:.4} (soft check vs {C8_SOFT_U0}: {})",
            u0.u0,
            if soft { "within 0.25" } else { "outside 0.25, non-fatal" }
        ),
    )
}

fn criterion_9() -> Outcome {
    let small = e_eta(-4, 1, 2.0, 10).unwrap().value;
    let grid = [10_000u64, 100_000, 1_000_000];
    let values = e_eta_grid(-4, 1, 2.0, &grid).unwrap();
    let ratios: Vec<f64> = values
        .iter()
        .map(|e| e.value / main_term_e(-4, 1, 2.0, e.x as f64, 1_000_000).unwrap().main)
        .collect();
    let last = *ratios.last().unwrap();
    let toward_one = (ratios[2] - 1.0).abs() < (ratios[0] - 1.0).abs();
    let pass = small == 15.0 && (C9_RATIO_RANGE.0..=C9_RATIO_RANGE.1).contains(&last) && toward_one;
    outcome(
        pass,
        format!("E(10) = {small}; ratios at 10⁴,10⁵,10⁶ = {ratios:.4?}"),
    )
}

fn criterion_10(delta: &Eigenform) -> Outcome {
    let q = form(1, 0, 1);
    let grid = [1_000u64, 10_000, 100_000, 1_000_000];
    let rep = bound_ratio_sweep(delta, &q, 3, &grid, 0.01, BoundExponent::Statement).unwrap();
    let mean = rep.s_values[3].abs() / 1e6;
    let growth = rep.running_max[3] / rep.running_max[1];
    outcome(
        mean < C10_MEAN_LIMIT && growth <= C10_GROWTH_LIMIT,
        format!(
            "|S|/X = {mean:.3e}, S = {:.3e}, max ratio {:.3e}, max-ratio growth 10⁴→10⁶ = {growth:.3}",
            rep.s_values[3], rep.max_ratio
        ),
    )
}

fn reports(delta: &Eigenform) -> String {
    let q = form(1, 0, 1);
    let grid = [1_000u64, 10_000, 100_000];
    let mut out = Vec::new();
    out.push(serde_json::to_string(&summatory_sq_grid(delta, &q, 3, &grid).unwrap()).unwrap());
    out.push(serde_json::to_string(&bound_ratio_sweep(delta, &q, 5, &grid, 0.01, BoundExponent::Statement).unwrap()).unwrap());
    out.push(serde_json::to_string(&e_eta_grid(-23, 1, 2.0, &grid).unwrap()).unwrap());
    out.push(serde_json::to_string(&first_sign_change(delta, 3, &SignTarget::D { discriminant: -23 }, 1000).unwrap()).unwrap());
    out.push(serde_json::to_string(&delta.lambda_table(10_000).unwrap().value(9973)).unwrap());
    let params = LowerBoundParams {
        prime_cutoff: 100_000,
        ..Default::default()
    };
    out.push(serde_json::to_string(&lowerbound_lhs(-4, 1, 3, 100, 1.5, &params, Some(delta)).unwrap()).unwrap());
    let beta = pow_step(&alpha_step(20).unwrap(), 3).unwrap();
    out.push(serde_json::to_string(&find_u0(&solve_sigma(&beta, 3.0, 1e-4, 3).unwrap())).unwrap());
    out.push(serde_json::to_string(&i_j_montecarlo(&beta, 2.0, 2, 200_000, 7).unwrap()).unwrap());
    out.join("\n")
}

fn criterion_11(delta: &Eigenform) -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| reports(delta))
    };
    let one = run(1);
    let again = run(1);
    let four = run(4);
    outcome(
        one == again && one == four,
        format!("{} report lines compared across reruns and 1/4 threads", one.lines().count()),
    )
}

fn main() {
    let start = Instant::now();
    let delta = build_level_one_eigenform(12, 1_000_000).unwrap();
    println!("built Δ to 10⁶ in {:?}", start.elapsed());

    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "fold constants", Box::new(criterion_1)),
        (2, "Chebyshev identity", Box::new(criterion_2)),
        (3, "FCRel exactness", Box::new(|| criterion_3(&delta))),
        (4, "representation formula", Box::new(criterion_4)),
        (5, "eigenform integrity", Box::new(criterion_5)),
        (6, "dual-path sums", Box::new(|| criterion_6(&delta))),
        (7, "sign change", Box::new(|| criterion_7(&delta))),
        (8, "sigma solver", Box::new(criterion_8)),
        (9, "E_eta consistency", Box::new(criterion_9)),
        (10, "cancellation surrogate", Box::new(|| criterion_10(&delta))),
        (11, "determinism", Box::new(|| criterion_11(&delta))),
    ];

    let mut unexpected = Vec::new();
    for (id, name, run) in &criteria {
        let t = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_UNATTAINABLE.contains(id);
        let tag = if !o.pass && known { " (known unattainable)" } else { "" };
        println!("criterion {id:>2} {status}{tag} [{name}] {} ({:.2?})", o.detail, t.elapsed());
        if o.pass == known {
            unexpected.push(*id);
        }
    }

    // the faithful value behind the known failure
    let (_, b7) = fold_constants(7).unwrap().as_integers().unwrap();
    assert_eq!(b7, BigInt::from(128));

    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
    println!("acceptance: all criteria behaved as expected in {:.2?}", start.elapsed());
}
