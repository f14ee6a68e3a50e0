use core::fmt;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    Domain {
        /// Name of the offending argument.
        what: &'static str,
        /// Value that was supplied.
        value: f64,
    },
    /// A root or extremum could not be bracketed.
    NoBracket {
        /// Quantity being solved for.
        what: &'static str,
    },
    /// An iteration ran out of steps.
    NoConvergence {
        /// Quantity being solved for.
        what: &'static str,
        /// Number of iterations performed.
        iterations: usize,
    },
    /// Every profit extremum requires a price below cost.
    NoViableStrategy,
    /// A tabulated distribution was rejected.
    InvalidTable(&'static str),
}

/// Result alias for the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} = {value} is outside its domain"),
            Error::NoBracket { what } => write!(f, "could not bracket {what}"),
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge after {iterations} iterations")
            }
            Error::NoViableStrategy => write!(f, "no pricing strategy with a non-negative price"),
            Error::InvalidTable(why) => write!(f, "invalid distribution table: {why}"),
        }
    }
}

impl core::error::Error for Error {}
