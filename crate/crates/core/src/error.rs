use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building states, applying the channel or
/// evaluating entanglement.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not symmetric (max |s_kl - s_lk| = {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {min_nu} < 1 - {tol:e}")]
    Unphysical { min_nu: f64, tol: f64 },

    #[error("local mixednesses ({}, {}, {}) violate the triangle inequality", .a[0], .a[1], .a[2])]
    TriangleViolation { a: [f64; 3] },

    #[error("argument outside the function domain: {0}")]
    DomainError(String),

    #[error("m- denominator (s-d)^2 - 1 = {value:e} is degenerate")]
    DegenerateDenominator { value: f64 },

    #[error("negative discriminant delta = {delta:e}")]
    NegativeDiscriminant { delta: f64 },

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("eigenvalue constraint {index} is violated at the saturating solution (slack {slack:e})")]
    UnsaturatedAssumptionViolated { index: usize, slack: f64 },

    #[error("solution violates the full PSD constraint (min eigenvalue {min_eigenvalue:e})")]
    PsdCheckFailed { min_eigenvalue: f64 },

    #[error("initial GTE is zero; relative loss undefined")]
    DivisionByZero,

    #[error("no feasible grid point (grid step {grid_step:e})")]
    Infeasible { grid_step: f64 },

    #[error("residual contangle {g_res:e} is negative beyond rounding")]
    MonogamyViolation { g_res: f64 },

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("malformed acceleration table at line {line}: {reason}")]
    MalformedTable { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse classification used for CLI exit codes and the CSV `error` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Domain,
    Convergence,
    Io,
}

impl Error {
    /// Stable variant name, written into the `error` column of sweep output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::NonSymmetric { .. } => "NonSymmetric",
            Error::Unphysical { .. } => "Unphysical",
            Error::TriangleViolation { .. } => "TriangleViolation",
            Error::DomainError(_) => "DomainError",
            Error::DegenerateDenominator { .. } => "DegenerateDenominator",
            Error::NegativeDiscriminant { .. } => "NegativeDiscriminant",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::UnsaturatedAssumptionViolated { .. } => "UnsaturatedAssumptionViolated",
            Error::PsdCheckFailed { .. } => "PsdCheckFailed",
            Error::DivisionByZero => "DivisionByZero",
            Error::Infeasible { .. } => "Infeasible",
            Error::MonogamyViolation { .. } => "MonogamyViolation",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::MalformedTable { .. } => "MalformedTable",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ConvergenceFailure { .. }
            | Error::UnsaturatedAssumptionViolated { .. }
            | Error::PsdCheckFailed { .. }
            | Error::Infeasible { .. } => ErrorClass::Convergence,
            Error::MalformedTable { .. } | Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Domain,
        }
    }

    /// Process exit status: 1 domain, 2 convergence, 3 I/O or parse.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Domain => 1,
            ErrorClass::Convergence => 2,
            ErrorClass::Io => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_class() {
        assert_eq!(Error::TriangleViolation { a: [1.0, 1.0, 3.0] }.exit_code(), 1);
        assert_eq!(
            Error::ConvergenceFailure {
                method: "bisection",
                iterations: 3,
                residual: 1.0
            }
            .exit_code(),
            2
        );
        assert_eq!(
            Error::MalformedTable {
                line: 2,
                reason: "x".into()
            }
            .exit_code(),
            3
        );
        assert_eq!(Error::Io("gone".into()).name(), "Io");
    }
}
