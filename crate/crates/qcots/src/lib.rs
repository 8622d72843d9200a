//! A quasi-cyclic one-time code-based signature scheme, a single-signature
//! statistical key-recovery attack against it, and the closed-form model of
//! the attack's cost.
//!
//! The scheme signs with a sparse secret e(x) in R^2, R = F2[x]/(x^p+1),
//! publishing s_e = synd_h(e). A signature {c, z} with z = c·e + y leaks e:
//! shifting z by the challenge support, lifting to integer counts, and
//! thresholding recovers most of e from a single signature, and a short
//! Lee-Brickell ISD run finishes the job. The `analysis` module evaluates
//! the whole probability chain in closed form; `experiment` reproduces it
//! by Monte Carlo.
//!
//! Start with the examples: `sign_verify`, `recover_key`, `security_tables`,
//! `estimator_accuracy`, `threshold_choice`, `isd_small`.

pub mod analysis;
pub mod attack;
pub mod envelope;
pub mod experiment;
pub mod isd;
pub mod ring;
pub mod scheme;

/// Crate-wide error type. Precondition violations inside the hot numeric
/// and algebraic kernels panic instead; these variants cover recoverable
/// conditions that reach files, CLI input, or cost evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("enumeration too large: {0}")]
    EnumerationGuard(String),
    #[error("undefined cost: {0}")]
    UndefinedCost(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
