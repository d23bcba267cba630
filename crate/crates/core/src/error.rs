use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // Input validation.
    #[error("{0} is not a prime >= 3")]
    NotPrime(u64),
    #[error("F is not squarefree modulo {p}")]
    NotSquarefree { p: u64 },
    #[error("leading coefficient of F vanishes modulo {p} (or F is constant)")]
    LeadingCoeffVanishes { p: u64 },
    #[error("p = {p} is too small: need p > d(N+eps)r = {bound} (N = {n})")]
    PTooSmall { p: u64, bound: u64, n: u32 },
    #[error("degenerate cover: need r >= 2 and r + d >= 5 (r = {r}, d = {d})")]
    DegenerateCover { r: u64, d: usize },
    #[error("curve too large for brute force counting: p^i = {size} exceeds {limit}")]
    TooLarge { size: u128, limit: u128 },

    // Ring arithmetic.
    #[error("element is not a unit modulo p")]
    NonUnit,
    #[error("inexact division by p^{v}")]
    InexactDivision { v: u32 },
    #[error("precision exhausted: needed {needed} digits, have {have}")]
    PrecisionExhausted { needed: u32, have: u32 },
    #[error("polynomials are not coprime modulo p")]
    NotCoprime,
    #[error("interpolation nodes coincide modulo p")]
    SingularNodes,

    // Reduction pipeline.
    #[error("unexpected zero denominator at s = {s}, t = {t}")]
    UnexpectedZeroDenominator { s: i128, t: i128 },
    #[error("integrality violated: {0}")]
    IntegralityViolation(String),
    #[error("reduction hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("linear recurrence preconditions failed: {0}")]
    PreconditionFailed(String),

    // Lifting to integers.
    #[error("power sum s_{i} cannot be lifted uniquely at precision N = {n}")]
    LiftAmbiguous { i: usize, n: u32 },
    #[error("lifted power sum s_{i} violates the Weil bound")]
    BoundViolated { i: usize },
    #[error("Newton identities produced a non-integral coefficient a_{i}")]
    NonIntegralCoefficient { i: usize },
}

impl Error {
    /// True for errors caused by bad user input, as opposed to internal
    /// consistency failures of the pipeline.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_)
                | Error::NotSquarefree { .. }
                | Error::LeadingCoeffVanishes { .. }
                | Error::PTooSmall { .. }
                | Error::DegenerateCover { .. }
                | Error::TooLarge { .. }
        )
    }
}
