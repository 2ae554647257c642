//! Exact eigenform coefficients, binary quadratic forms and the sparse
//! summatory functions of ℓ-fold product coefficients over integers
//! represented by a positive definite binary quadratic form.
//!
//! Module map:
//!
//! * [`ntkernel`]: primes, factorization, squarefree sieve, Kronecker symbol.
//! * [`series`]: exact integer power series via multi-modular NTT.
//! * [`modforms`]: level-one Hecke eigenforms, coefficient files, λ_f(n).
//! * [`quadforms`]: reduction, class sets, representation numbers.
//! * [`fold`]: Chebyshev decomposition, fold constants, prime-level identities.
//! * [`sums`]: summatory functions, bound evaluators, first sign changes.
//! * [`sigma`]: step kernels and the delay equation for σ(u).

pub mod fold;
pub mod modforms;
pub mod ntkernel;
pub mod numerics;
pub mod quadforms;
pub mod series;
pub mod sigma;
pub mod sums;

use thiserror::Error;

/// Version tag folded into cache keys of built coefficient tables.
pub const ENGINE_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller input that is well-formed but unsupported.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("index {index} is outside the stored range 1..={max}")]
    Range { index: u64, max: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    /// Loaded or supplied data violates a structural invariant.
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("coefficient table rejected: {0}")]
    Integrity(modforms::IntegrityViolation),
    /// An internal consistency check failed; indicates a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
