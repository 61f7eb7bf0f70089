use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "inverse mapping did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("point ({x:.6}, {y:.6}) lies outside element {element}")]
    OutsideElement { element: usize, x: f64, y: f64 },

    #[error("degenerate element {element}: non-positive Jacobian {det:.3e}")]
    DegenerateElement { element: usize, det: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("mesh contrast undefined: no blending elements")]
    UndefinedContrast,

    #[error("coarse-graining parameter {kappa} out of range [1, {max}]")]
    KappaOutOfRange { kappa: usize, max: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from geometric processing (cutting, mapping,
    /// segment construction) rather than input or the linear solve.
    pub fn is_geometric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::OutsideElement { .. }
                | Error::DegenerateElement { .. }
                | Error::InvalidGeometry(_)
                | Error::UndefinedContrast
        )
    }

    pub fn is_solver(&self) -> bool {
        matches!(self, Error::SingularSystem(_) | Error::Solver(_))
    }
}
