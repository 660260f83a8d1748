use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto CLI exit codes: config errors exit 4, invariant
/// violations exit 2, positivity aborts exit 3.
#[derive(Error, Debug)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDim(usize),

    #[error("degree {degree} outside supported range {min}..={max} for {what}")]
    DegreeOutOfRange {
        what: &'static str,
        degree: usize,
        min: usize,
        max: usize,
    },

    #[error("quadrature rule too weak: {0}")]
    QuadratureTooWeak(String),

    #[error("point ({x}, {y}, {z}) lies outside the reference simplex")]
    PointOutsideSimplex { x: f64, y: f64, z: f64 },

    #[error("operator identity violated: {identity} residual {residual:.3e} exceeds {tol:.1e}")]
    OperatorIdentity {
        identity: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("nonpositive Jacobian ({j:.3e}) in element {element}")]
    NonpositiveJacobian { element: usize, j: f64 },

    #[error("positivity violated ({quantity} = {value:.3e}) in element {element} at t = {time:.6}")]
    Positivity {
        quantity: &'static str,
        value: f64,
        element: usize,
        time: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Positivity { .. } => 3,
            Error::Config(_) | Error::Io(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
