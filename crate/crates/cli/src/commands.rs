//! Subcommand arguments and handlers.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lfold::fold::{cheb_decomposition, fold_constants};
use lfold::modforms::{build_level_one_eigenform, load_eigenform, Eigenform, EigenformCache};
use lfold::quadforms::{class_set, verify_rep_formula, QuadraticForm, RepFormulaStatus};
use lfold::sigma::{alpha_step, find_u0, i_j_montecarlo, pow_step, solve_sigma, U0Status};
use lfold::sums::{
    bound_ratio_sweep, first_sign_change, lowerbound_lhs, summatory_sd, thm11_bound, thm12_bound,
    BoundExponent, BoundInputs, LowerBoundParams, SignTarget,
};

use crate::{CliError, Config, Outcome};

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn ok(inputs: Value, result: Value) -> Result<Outcome, CliError> {
    Ok(Outcome {
        inputs,
        result,
        passed: true,
        seed: None,
    })
}

/// Coefficient source shared by the commands that need λ_f.
#[derive(Args, Debug, Clone)]
pub struct FormSource {
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    /// Read coefficients from a file instead of building them
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

impl FormSource {
    fn load(&self, cfg: &Config, upto: u64) -> Result<Eigenform, CliError> {
        if let Some(path) = &self.input {
            return Ok(load_eigenform(path)?);
        }
        if self.level != 1 {
            return Err(input(format!(
                "level {} has no built-in construction; pass a coefficient file with --in",
                self.level
            )));
        }
        let f = match &cfg.cache_dir {
            Some(dir) => EigenformCache::new(dir).level_one(self.weight, upto)?,
            None => build_level_one_eigenform(self.weight, upto)?,
        };
        Ok(f)
    }
}

/// Form coefficients, or a discriminant whose principal form stands in.
#[derive(Args, Debug, Clone)]
pub struct FormArgs {
    #[arg(short = 'a', allow_hyphen_values = true)]
    pub a: Option<i64>,
    #[arg(short = 'b', allow_hyphen_values = true)]
    pub b: Option<i64>,
    #[arg(short = 'c', allow_hyphen_values = true)]
    pub c: Option<i64>,
    /// Negative discriminant
    #[arg(short = 'D', allow_hyphen_values = true)]
    pub d: Option<i64>,
}

impl FormArgs {
    fn explicit(&self) -> Result<Option<QuadraticForm>, CliError> {
        match (self.a, self.b, self.c) {
            (Some(a), Some(b), Some(c)) => Ok(Some(QuadraticForm::new(a, b, c)?)),
            (None, None, None) => Ok(None),
            _ => Err(input("give all of -a, -b, -c")),
        }
    }

    fn discriminant(&self) -> Result<i64, CliError> {
        match (self.d, self.explicit()?) {
            (Some(d), _) => Ok(d),
            (None, Some(q)) => Ok(q.discriminant()),
            (None, None) => Err(input("give -D or -a -b -c")),
        }
    }

    /// The explicit form, else the principal form of -D.
    fn form(&self) -> Result<QuadraticForm, CliError> {
        if let Some(q) = self.explicit()? {
            if let Some(d) = self.d {
                if d != q.discriminant() {
                    return Err(input(format!("form has discriminant {}, not {d}", q.discriminant())));
                }
            }
            return Ok(q);
        }
        let d = self.discriminant()?;
        Ok(class_set(d)?.forms[0])
    }
}

fn form_json(q: &QuadraticForm) -> Value {
    json!([q.a(), q.b(), q.c()])
}

#[derive(Subcommand, Debug)]
pub enum EigenformCmd {
    /// Build the level-one eigenform of a weight and write it out
    Build {
        #[arg(long)]
        weight: u32,
        #[arg(long, default_value_t = 1000)]
        upto: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a coefficient file and check its structural invariants
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print n, a(n), λ(n) rows
    Export {
        #[command(flatten)]
        source: FormSource,
        #[arg(long, default_value_t = 100)]
        upto: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl EigenformCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Build { .. } => "build",
            Self::Verify { .. } => "verify",
            Self::Export { .. } => "export",
        }
    }
}

pub fn eigenform(cmd: &EigenformCmd, cfg: &Config) -> Result<Outcome, CliError> {
    match cmd {
        EigenformCmd::Build { weight, upto, out } => {
            let source = FormSource {
                weight: *weight,
                level: 1,
                input: None,
            };
            let f = source.load(cfg, *upto)?;
            if let Some(path) = out {
                f.write_coefficient_file(path)?;
            }
            ok(
                json!({"weight": weight, "upto": upto, "out": out}),
                json!({
                    "label": f.label(),
                    "weight": f.weight(),
                    "level": f.level(),
                    "count": f.x_max(),
                    "a2": f.coefficient(2).ok().map(|a| a.to_string()),
                    "out": out,
                }),
            )
        }
        EigenformCmd::Verify { input: path } => {
            let inputs = json!({"in": path});
            match load_eigenform(path) {
                Ok(f) => {
                    let deligne = f.verify_deligne(f.x_max())?;
                    Ok(Outcome {
                        inputs,
                        result: json!({
                            "label": f.label(),
                            "weight": f.weight(),
                            "level": f.level(),
                            "count": f.x_max(),
                            "deligne_violations": deligne.violations,
                        }),
                        passed: deligne.passed(),
                        seed: None,
                    })
                }
                Err(lfold::Error::Integrity(v)) => Ok(Outcome {
                    inputs,
                    result: json!({"violation": v.to_string(), "detail": v}),
                    passed: false,
                    seed: None,
                }),
                Err(e) => Err(e.into()),
            }
        }
        EigenformCmd::Export { source, upto, out } => {
            let f = source.load(cfg, *upto)?;
            let f = f.truncated(*upto)?;
            if let Some(path) = out {
                f.write_coefficient_file(path)?;
            }
            let table = f.lambda_table(*upto)?;
            let rows: Vec<Value> = (1..=*upto)
                .map(|n| {
                    json!({
                        "n": n,
                        "a": f.coefficient(n).unwrap().to_string(),
                        "lambda": table.value(n as usize),
                    })
                })
                .collect();
            ok(
                json!({"weight": source.weight, "level": source.level, "in": source.input, "upto": upto}),
                json!({"label": f.label(), "rows": rows}),
            )
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum QformCmd {
    /// Reduce a positive definite form
    Reduce {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Reduced forms of a discriminant
    Class {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Representation numbers r_Q(n) for n ≤ upto
    Represent {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 20)]
        upto: u64,
    },
    /// Compare r_Q(n) with w_D·Σχ_D(d) for a class-number-one discriminant
    CheckFormula {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long, default_value_t = 10_000)]
        upto: u64,
    },
}

impl QformCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Reduce { .. } => "reduce",
            Self::Class { .. } => "class",
            Self::Represent { .. } => "represent",
            Self::CheckFormula { .. } => "check-formula",
        }
    }
}

pub fn qform(cmd: &QformCmd) -> Result<Outcome, CliError> {
    match cmd {
        QformCmd::Reduce { form } => {
            let q = form.explicit()?.ok_or_else(|| input("reduce needs -a -b -c"))?;
            let r = q.reduce();
            ok(
                json!({"form": form_json(&q)}),
                json!({"discriminant": q.discriminant(), "reduced": form_json(&r), "was_reduced": q.is_reduced()}),
            )
        }
        QformCmd::Class { form } => {
            let d = form.discriminant()?;
            let cs = class_set(d)?;
            let rows: Vec<Value> = cs
                .forms
                .iter()
                .map(|q| json!({"a": q.a(), "b": q.b(), "c": q.c()}))
                .collect();
            ok(json!({"D": d}), json!({"D": d, "h": cs.h, "w": cs.w, "rows": rows}))
        }
        QformCmd::Represent { form, upto } => {
            let q = form.form()?;
            let t = q.representation_counts(*upto);
            let rows: Vec<Value> = (1..=*upto).map(|n| json!({"n": n, "r": t.get(n)})).collect();
            ok(
                json!({"form": form_json(&q), "upto": upto}),
                json!({"form": form_json(&q), "discriminant": q.discriminant(), "rows": rows}),
            )
        }
        QformCmd::CheckFormula { form, upto } => {
            let q = form.form()?;
            let status = verify_rep_formula(&q, *upto)?;
            let passed = match status {
                RepFormulaStatus::Pass { .. } => true,
                RepFormulaStatus::Fail { .. } => false,
                RepFormulaStatus::NotApplicable { h } => {
                    return Err(input(format!(
                        "D = {} has class number {h}; the formula needs h = 1",
                        q.discriminant()
                    )))
                }
            };
            Ok(Outcome {
                inputs: json!({"form": form_json(&q), "upto": upto}),
                result: serde_json::to_value(&status).unwrap(),
                passed,
                seed: None,
            })
        }
    }
}

fn odd_ell(ell: u64) -> Result<(), CliError> {
    if ell < 3 || ell % 2 == 0 {
        return Err(input(format!("--ell {ell} must be odd and at least 3")));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub ell: u64,
}

pub fn constants(args: &ConstantsArgs) -> Result<Outcome, CliError> {
    odd_ell(args.ell)?;
    let c = fold_constants(args.ell)?;
    ok(
        json!({"ell": args.ell}),
        json!({"ell": args.ell, "A": c.a.to_string(), "B": c.b.to_string(), "A_f64": c.a_f64(), "B_f64": c.b_f64()}),
    )
}

#[derive(Args, Debug)]
pub struct ChebArgs {
    #[arg(long)]
    pub ell: u64,
}

pub fn cheb(args: &ChebArgs) -> Result<Outcome, CliError> {
    // the decomposition re-expands Σ A_j T_j and compares with x^ℓ exactly
    let dec = cheb_decomposition(args.ell)?;
    let rows: Vec<Value> = (0..=args.ell)
        .rev()
        .filter(|&j| !num_traits::Zero::is_zero(dec.coefficient(j)))
        .map(|j| json!({"j": j, "A": dec.coefficient(j).to_string()}))
        .collect();
    ok(
        json!({"ell": args.ell}),
        json!({"ell": args.ell, "identity": "pass", "rows": rows}),
    )
}

#[derive(Args, Debug)]
pub struct SumArgs {
    #[arg(long)]
    pub ell: u64,
    #[command(flatten)]
    pub form: FormArgs,
    #[command(flatten)]
    pub source: FormSource,
    #[arg(long, default_value_t = 1000)]
    pub upto: u64,
    /// Comma-separated X values; defaults to --upto
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<u64>,
    #[arg(long, value_enum, default_value = "statement")]
    pub exponent: ExponentArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExponentArg {
    Statement,
    Proof,
}

impl From<ExponentArg> for BoundExponent {
    fn from(e: ExponentArg) -> Self {
        match e {
            ExponentArg::Statement => Self::Statement,
            ExponentArg::Proof => Self::Proof,
        }
    }
}

fn ell_u32(ell: u64) -> Result<u32, CliError> {
    u32::try_from(ell).map_err(|_| input("ell too large"))
}

/// With -a -b -c the sum runs over one form and is compared with the upper
/// bound; with -D alone it runs over the whole class set.
pub fn sum(args: &SumArgs, cfg: &Config) -> Result<Outcome, CliError> {
    odd_ell(args.ell)?;
    let ell = ell_u32(args.ell)?;
    let mut grid = if args.grid.is_empty() { vec![args.upto] } else { args.grid.clone() };
    grid.sort_unstable();
    grid.dedup();
    let x_max = *grid.last().unwrap();
    let f = args.source.load(cfg, x_max)?;
    let inputs = json!({"ell": ell, "grid": grid, "weight": f.weight(), "level": f.level()});
    let explicit = args.form.explicit()?;
    let d = args.form.discriminant()?;
    let cs = class_set(d)?;
    if explicit.is_some() || cs.h == 1 {
        let q = args.form.form()?;
        let rep = bound_ratio_sweep(&f, &q, ell, &grid, cfg.epsilon, args.exponent.into())?;
        let rows: Vec<Value> = (0..grid.len())
            .map(|i| {
                json!({
                    "X": rep.grid[i],
                    "S": rep.s_values[i],
                    "log_bound": rep.log_bounds[i],
                    "ratio": rep.ratios[i],
                })
            })
            .collect();
        ok(
            inputs,
            json!({
                "form": form_json(&q),
                "convention": "lattice",
                "exponent": rep.exponent,
                "epsilon": cfg.epsilon,
                "max_ratio": rep.max_ratio,
                "rows": rows,
            }),
        )
    } else {
        let rows = grid
            .iter()
            .map(|&x| Ok(json!({"X": x, "S": summatory_sd(&f, d, ell, x)?})))
            .collect::<Result<Vec<Value>, CliError>>()?;
        ok(
            inputs,
            json!({"D": d, "h": cs.h, "convention": "lattice, summed over the class set", "rows": rows}),
        )
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    #[value(name = "I")]
    I,
    #[value(name = "Q")]
    Q,
    #[value(name = "D")]
    D,
}

#[derive(Args, Debug)]
pub struct SignChangeArgs {
    #[arg(long, value_enum, ignore_case = true)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 3)]
    pub ell: u64,
    #[command(flatten)]
    pub form: FormArgs,
    #[command(flatten)]
    pub source: FormSource,
    #[arg(long, default_value_t = 1000)]
    pub limit: u64,
}

pub fn signchange(args: &SignChangeArgs, cfg: &Config) -> Result<Outcome, CliError> {
    if args.ell % 2 == 0 {
        return Err(input(format!("--ell {} must be odd", args.ell)));
    }
    let target = match args.mode {
        ModeArg::I => SignTarget::I,
        ModeArg::Q => SignTarget::Q { form: args.form.form()? },
        ModeArg::D => SignTarget::D {
            discriminant: args.form.discriminant()?,
        },
    };
    let f = args.source.load(cfg, args.limit)?;
    let r = first_sign_change(&f, ell_u32(args.ell)?, &target, args.limit)?;
    ok(
        json!({"target": target, "ell": args.ell, "limit": args.limit, "weight": f.weight(), "level": f.level()}),
        json!({
            "mode": r.mode,
            "n": r.n_star,
            "a": r.witness_a,
            "form": r.witness_form.map(|q| form_json(&q)),
            "point": r.witness_point,
            "search_limit": r.search_limit,
            "found": r.n_star.is_some(),
        }),
    )
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ThmArg {
    #[value(name = "1.1")]
    Upper,
    #[value(name = "1.2")]
    Lower,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub thm: ThmArg,
    #[arg(long)]
    pub ell: u64,
    #[arg(short = 'D', allow_hyphen_values = true)]
    pub d: i64,
    #[arg(long, default_value_t = 12)]
    pub weight: u32,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    #[arg(long = "X", default_value_t = 1e6)]
    pub x: f64,
    #[arg(long = "Y", default_value_t = 10.0)]
    pub y: f64,
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    /// Threshold u₀; solved from the delay equation when absent
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long, value_enum, default_value = "statement")]
    pub exponent: ExponentArg,
    /// Include the h(D) factor in the lower bound
    #[arg(long)]
    pub with_class_number: bool,
}

fn solve_u0(ell: u32, cfg: &Config) -> Result<(f64, bool), CliError> {
    let beta = pow_step(&alpha_step(cfg.truncation_k)?, ell)?;
    let sol = solve_sigma(&beta, 10.0, cfg.step, ell)?;
    let r = find_u0(&sol);
    Ok((r.u0, r.status == U0Status::Crossing))
}

pub fn bounds(args: &BoundsArgs, cfg: &Config) -> Result<Outcome, CliError> {
    odd_ell(args.ell)?;
    let ell = ell_u32(args.ell)?;
    let (u0, u0_source) = match (args.thm, args.u0) {
        (_, Some(u0)) => (u0, "given"),
        (ThmArg::Upper, None) => (2.0, "unused"),
        (ThmArg::Lower, None) => {
            let (u0, crossed) = solve_u0(ell, cfg)?;
            if !crossed {
                return Err(input(format!("sigma has no zero below 10 for ell = {ell}; pass --u0")));
            }
            (u0, "solved")
        }
    };
    let inputs = BoundInputs {
        ell,
        k: args.weight,
        level: args.level,
        d: args.d,
        x: args.x,
        y: args.y,
        u: args.u,
        epsilon: cfg.epsilon,
        u0,
    };
    let (value, thm) = match args.thm {
        ThmArg::Upper => (thm11_bound(&inputs, args.exponent.into())?, "1.1"),
        ThmArg::Lower => {
            let h = if args.with_class_number {
                Some(class_set(args.d)?.h as u64)
            } else {
                None
            };
            (thm12_bound(&inputs, h)?, "1.2")
        }
    };
    let c = fold_constants(args.ell)?;
    ok(
        serde_json::to_value(&inputs).unwrap(),
        json!({
            "thm": thm,
            "exponent": match args.thm {
                ThmArg::Upper => Some(BoundExponent::from(args.exponent)),
                ThmArg::Lower => None,
            },
            "ln_value": value.ln,
            "value": value.value,
            "A": c.a.to_string(),
            "B": c.b.to_string(),
            "u0": if u0_source == "unused" { None } else { Some(u0) },
            "u0_source": u0_source,
        }),
    )
}

#[derive(Args, Debug)]
pub struct LowerBoundArgs {
    #[arg(long, default_value_t = 3)]
    pub ell: u64,
    #[arg(short = 'D', allow_hyphen_values = true, default_value_t = -4)]
    pub d: i64,
    #[arg(long, default_value_t = 1)]
    pub level: u64,
    #[arg(long = "Y")]
    pub y: u64,
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub prime_cutoff: u64,
    /// Report primes where λ_f(p)^ℓ < h_Y(p)^ℓ for this weight
    #[arg(long)]
    pub diagnose_weight: Option<u32>,
}

pub fn lowerbound(args: &LowerBoundArgs, cfg: &Config) -> Result<Outcome, CliError> {
    if args.ell % 2 == 0 {
        return Err(input(format!("--ell {} must be odd", args.ell)));
    }
    let params = LowerBoundParams {
        truncation_k: cfg.truncation_k,
        grid_step: cfg.step,
        prime_cutoff: args.prime_cutoff,
    };
    let f = match args.diagnose_weight {
        Some(w) => Some(
            FormSource {
                weight: w,
                level: args.level,
                input: None,
            }
            .load(cfg, args.y)?,
        ),
        None => None,
    };
    let r = lowerbound_lhs(args.d, args.level, ell_u32(args.ell)?, args.y, args.u, &params, f.as_ref())?;
    ok(
        json!({"ell": args.ell, "D": args.d, "level": args.level, "Y": args.y, "u": args.u, "prime_cutoff": args.prime_cutoff}),
        serde_json::to_value(&r).unwrap(),
    )
}

#[derive(Args, Debug)]
pub struct SigmaArgs {
    #[arg(long, default_value_t = 3)]
    pub ell: u32,
    /// Upper end of the solve and of the table
    #[arg(long = "U", default_value_t = 4.0)]
    pub u_max: f64,
    #[arg(long)]
    pub find_u0: bool,
    /// Emit σ(u) rows
    #[arg(long)]
    pub table: bool,
    /// Spacing of table rows
    #[arg(long, default_value_t = 0.01)]
    pub table_step: f64,
    /// Monte-Carlo estimates of I_1(u) and I_2(u) at this u
    #[arg(long)]
    pub mc: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn sigma(args: &SigmaArgs, cfg: &Config) -> Result<Outcome, CliError> {
    if !(args.table_step > 0.0) {
        return Err(input("--table-step must be positive"));
    }
    let alpha = alpha_step(cfg.truncation_k)?;
    let beta = pow_step(&alpha, args.ell)?;
    // the solver needs U > 1; shorter tables read off a slightly longer solve
    let solve_to = args.u_max.max(1.01);
    let sol = solve_sigma(&beta, solve_to, cfg.step, args.ell)?;
    let mut result = json!({
        "ell": args.ell,
        "beta0": sol.beta0,
        "x1": sol.x1,
        "U": args.u_max,
    });
    if args.find_u0 {
        let r = find_u0(&sol);
        result["u0"] = json!(r.u0);
        result["u0_status"] = json!(r.status);
    }
    let mut seed = None;
    if let Some(u) = args.mc {
        let i1 = i_j_montecarlo(&beta, u, 1, args.samples, args.seed)?;
        let i2 = i_j_montecarlo(&beta, u, 2, args.samples, args.seed)?;
        result["mc_u"] = json!(u);
        result["I1"] = json!(i1.value);
        result["I1_std_error"] = json!(i1.std_error);
        result["I2"] = json!(i2.value);
        result["I2_std_error"] = json!(i2.std_error);
        seed = Some(args.seed);
    }
    if args.table {
        let n = (args.u_max / args.table_step + 1e-9).floor() as u64;
        let rows: Vec<Value> = (1..=n)
            .map(|i| {
                let u = i as f64 * args.table_step;
                json!({"u": u, "sigma": sol.at(u)})
            })
            .collect();
        result["rows"] = json!(rows);
    }
    Ok(Outcome {
        inputs: json!({"ell": args.ell, "U": args.u_max, "find_u0": args.find_u0, "table": args.table, "mc": args.mc, "samples": args.samples}),
        result,
        passed: true,
        seed,
    })
}
