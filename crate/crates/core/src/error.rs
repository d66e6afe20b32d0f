use alloc::string::String;
use core::fmt;

/// Errors reported by the solver, the flow integrator and the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum HjError {
    /// A non-finite coordinate or value was passed where a finite one is required.
    Domain(String),
    /// Grid size outside the supported range or not a power of two.
    GridSize(usize),
    /// A time step that breaks the monotonicity condition of the scheme.
    Cfl { courant: f64, limit: f64 },
    /// The gradient scan hit its cap: the Hamiltonian is not coercive in the
    /// orientation it is tagged with.
    Coercivity(String),
    /// Convexity/coercivity tags that do not match the sampled Hamiltonian.
    Tags(String),
    /// An operation precondition does not hold.
    Precondition(String),
    /// Bad argument (negative time, empty input, ...).
    InvalidArgument(String),
    /// The flow integrator produced a non-finite state.
    Integration(String),
}

pub type Result<T> = core::result::Result<T, HjError>;

impl fmt::Display for HjError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HjError::Domain(msg) => write!(f, "domain error: {msg}"),
            HjError::GridSize(n) => {
                write!(f, "grid size {n} is not a power of two in [64, 8192]")
            }
            HjError::Cfl { courant, limit } => {
                write!(f, "CFL violation: dt*theta/dx = {courant} exceeds {limit}")
            }
            HjError::Coercivity(msg) => write!(f, "coercivity violation: {msg}"),
            HjError::Tags(msg) => write!(f, "inconsistent Hamiltonian tags: {msg}"),
            HjError::Precondition(msg) => write!(f, "precondition failed: {msg}"),
            HjError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            HjError::Integration(msg) => write!(f, "integration error: {msg}"),
        }
    }
}

impl core::error::Error for HjError {}
