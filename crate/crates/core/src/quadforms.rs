//! Positive-definite binary quadratic forms Q(x, y) = ax² + bxy + cy².

use num_integer::{Integer, Roots};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ntkernel::{self, DirichletCharacterD};
use crate::{Error, Result};

/// A primitive positive-definite form (a, b, c).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticForm {
    a: i64,
    b: i64,
    c: i64,
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let d = disc(a, b, c);
        if a <= 0 || d >= 0 {
            return Err(Error::Domain(format!(
                "({a}, {b}, {c}) is not positive definite"
            )));
        }
        if a.gcd(&b).gcd(&c) != 1 {
            return Err(Error::Domain(format!("({a}, {b}, {c}) is not primitive")));
        }
        if d < i64::MIN as i128 / 4 {
            return Err(Error::Input("discriminant out of range".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn coefficients(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    pub fn discriminant(&self) -> i64 {
        disc(self.a, self.b, self.c) as i64
    }

    /// Q(x, y) evaluated exactly.
    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    /// |b| ≤ a ≤ c, with b ≥ 0 whenever |b| = a or a = c.
    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// The unique reduced form properly equivalent to `self`.
    pub fn reduce(&self) -> QuadraticForm {
        let d = disc(self.a, self.b, self.c);
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            if !(-a < b && b <= a) {
                let two_a = 2 * a;
                let mut r = b.rem_euclid(two_a);
                if r > a {
                    r -= two_a;
                }
                b = r;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
            } else {
                break;
            }
        }
        if a == c && b < 0 {
            b = -b;
        }
        QuadraticForm {
            a: a as i64,
            b: b as i64,
            c: c as i64,
        }
    }

    /// A lattice point with Q(x, y) = n, smallest |y| first, if one exists.
    pub fn find_representation(&self, n: u64) -> Option<(i64, i64)> {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let nn = n as i128;
        let abs_d = -disc(self.a, self.b, self.c);
        let y_max = ceil_sqrt_ratio(4 * a * nn, abs_d);
        for y_abs in 0..=y_max {
            for y in [y_abs, -y_abs] {
                let disc_row = b * b * y * y - 4 * a * (c * y * y - nn);
                if disc_row < 0 {
                    continue;
                }
                let s = (disc_row as u128).sqrt() as i128;
                if s * s != disc_row {
                    continue;
                }
                for num in [-b * y + s, -b * y - s] {
                    if num % (2 * a) == 0 {
                        let x = num / (2 * a);
                        return Some((x as i64, y as i64));
                    }
                }
            }
        }
        None
    }

    /// r_Q(n) for 0 ≤ n ≤ x by exact enumeration of the ellipse Q ≤ x.
    pub fn representation_counts(&self, x: u64) -> RepresentationTable {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let xx = x as i128;
        let abs_d = -disc(self.a, self.b, self.c);
        // |y| ≤ √(4aX/|D|), from minimizing over x for fixed y
        let y_max = ceil_sqrt_ratio(4 * a * xx, abs_d);
        let rows: Vec<i128> = (-y_max..=y_max).collect();
        let chunk = rows.len().div_ceil(16).max(1);
        let partials: Vec<Vec<u64>> = rows
            .par_chunks(chunk)
            .map(|ys| {
                let mut counts = vec![0u64; x as usize + 1];
                for &y in ys {
                    // a t² + b y t + (c y² − X) ≤ 0
                    let disc_row = b * b * y * y - 4 * a * (c * y * y - xx);
                    if disc_row < 0 {
                        continue;
                    }
                    let s = (disc_row as u128).sqrt() as i128;
                    let lo = Integer::div_floor(&(-b * y - s), &(2 * a)) - 1;
                    let hi = Integer::div_floor(&(-b * y + s), &(2 * a)) + 1;
                    for t in lo..=hi {
                        let q = a * t * t + b * t * y + c * y * y;
                        if q <= xx {
                            counts[q as usize] += 1;
                        }
                    }
                }
                counts
            })
            .collect();
        let mut counts = vec![0u64; x as usize + 1];
        for p in &partials {
            for (dst, src) in counts.iter_mut().zip(p) {
                *dst += src;
            }
        }
        RepresentationTable { counts }
    }
}

fn disc(a: i64, b: i64, c: i64) -> i128 {
    b as i128 * b as i128 - 4 * a as i128 * c as i128
}

/// ⌈√(num/den)⌉ for num ≥ 0, den > 0.
fn ceil_sqrt_ratio(num: i128, den: i128) -> i128 {
    let q = Integer::div_ceil(&num, &den) as u128;
    let mut r = q.sqrt();
    if r * r < q {
        r += 1;
    }
    r as i128
}

/// r_Q(n) for 0 ≤ n ≤ X; index 0 holds r_Q(0) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationTable {
    counts: Vec<u64>,
}

impl RepresentationTable {
    pub fn x_max(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> u64 {
        self.counts[n as usize]
    }

    /// r_Q(0), r_Q(1), …, r_Q(X).
    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }
}

/// Which representation function a lattice-point report is expressed in:
/// r_Q itself, or the primitive count r* = r_Q / w_D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepConvention {
    Lattice,
    Primitive,
}

/// Reduced primitive forms of discriminant D with h(D) and w_D.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    pub discriminant: i64,
    pub forms: Vec<QuadraticForm>,
    pub h: usize,
    pub w: u32,
}

/// All reduced primitive forms of discriminant D, sorted by (a, b).
pub fn class_set(d: i64) -> Result<ClassSet> {
    ntkernel::check_negative_discriminant(d)?;
    let abs_d = d.unsigned_abs() as i128;
    let a_max = (abs_d / 3).sqrt() as i64;
    let mut forms = Vec::new();
    for a in 1..=a_max {
        for b in -a..=a {
            let num = b as i128 * b as i128 - d as i128;
            if num % (4 * a as i128) != 0 {
                continue;
            }
            let c = (num / (4 * a as i128)) as i64;
            if let Ok(q) = QuadraticForm::new(a, b, c) {
                if q.is_reduced() {
                    forms.push(q);
                }
            }
        }
    }
    forms.sort_by_key(|q| (q.a, std::cmp::Reverse(q.b)));
    Ok(ClassSet {
        discriminant: d,
        h: forms.len(),
        forms,
        w: unit_count(d),
    })
}

/// Number of units of the order of discriminant D: 6, 4 or 2.
pub fn unit_count(d: i64) -> u32 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// r*(n) = Σ_{d | n} χ_D(d).
pub fn r_star(d: i64, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::Domain("r* needs n >= 1".into()));
    }
    let chi = DirichletCharacterD::new(d)?;
    Ok(ntkernel::divisors(n)
        .into_iter()
        .map(|m| chi.eval(m) as i64)
        .sum())
}

/// r*(n) for 0 ≤ n ≤ x by a divisor sieve; index 0 is unused and set to 0.
pub fn r_star_table(d: i64, x: u64) -> Result<Vec<i64>> {
    let chi = DirichletCharacterD::new(d)?;
    let x = x as usize;
    let mut out = vec![0i64; x + 1];
    for m in 1..=x {
        let v = chi.eval(m as u64) as i64;
        if v != 0 {
            for k in (m..=x).step_by(m) {
                out[k] += v;
            }
        }
    }
    Ok(out)
}

/// Outcome of comparing r_Q(n) with w_D·r*(n).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RepFormulaStatus {
    Pass { checked: u64 },
    Fail { n: u64, lattice: u64, formula: i64 },
    NotApplicable { h: usize },
}

/// Checks r_Q(n) = w_D·r*(n) for n ≤ x; only meaningful when h(D) = 1.
pub fn verify_rep_formula(q: &QuadraticForm, x: u64) -> Result<RepFormulaStatus> {
    let d = q.discriminant();
    let cs = class_set(d)?;
    if cs.h != 1 {
        return Ok(RepFormulaStatus::NotApplicable { h: cs.h });
    }
    let lattice = q.representation_counts(x);
    let star = r_star_table(d, x)?;
    let w = cs.w as i64;
    for n in 1..=x {
        let formula = w * star[n as usize];
        if lattice.get(n) as i64 != formula {
            return Ok(RepFormulaStatus::Fail {
                n,
                lattice: lattice.get(n),
                formula,
            });
        }
    }
    Ok(RepFormulaStatus::Pass { checked: x })
}

/// The nine fundamental discriminants of class number one.
pub const CLASS_NUMBER_ONE: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];
