use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    Domain { arg: &'static str, value: f64, expected: &'static str },
    /// `p` was 0 or 1, whose quantile is infinite.
    UnboundedQuantile { p: f64 },
    /// The sample standard deviation was zero.
    DegenerateSample,
    /// Two-sample designs require both groups to have the same size.
    UnequalGroups { n1: u64, n2: u64 },
    /// The replication critical value is infinite at `q = 0`.
    DivergentAtZero,
    /// The replication level must exceed the significance level.
    InvalidCriteria { alpha: f64, beta: f64 },
    /// An iterative solver did not reach its tolerance.
    SolverFailure { what: &'static str },
}

impl Error {
    pub fn domain(arg: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain { arg, value, expected }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { arg, value, expected } => {
                write!(f, "invalid {arg} = {value}: expected {expected}")
            }
            Error::UnboundedQuantile { p } => write!(f, "quantile at p = {p} is unbounded"),
            Error::DegenerateSample => f.write_str("sample standard deviation is zero"),
            Error::UnequalGroups { n1, n2 } => write!(
                f,
                "two-sample design requires equal group sizes (got {n1} and {n2})"
            ),
            Error::DivergentAtZero => {
                f.write_str("replication critical value diverges at q = 0")
            }
            Error::InvalidCriteria { alpha, beta } => write!(
                f,
                "invalid criteria alpha = {alpha}, beta = {beta}: need 0 < alpha < 0.5 and alpha < beta < 1"
            ),
            Error::SolverFailure { what } => write!(f, "solver failed to converge: {what}"),
        }
    }
}

impl core::error::Error for Error {}
