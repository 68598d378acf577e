use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial is not harmonic")]
    NotHarmonic,

    #[error("polynomial is not annihilated by L")]
    NotLAnnihilated,

    #[error("odd degree {0}: only even degrees descend")]
    OddDegree(u32),

    #[error("inconsistent descent system at degree {0}")]
    InconsistentSystem(u32),

    #[error("series has a term of odd order {order} in the y-block{}", gamma_suffix(.gamma))]
    EvennessViolation { order: u32, gamma: Option<Vec<u32>> },

    #[error("degree-{degree} layer is not annihilated by L, input is not a pullback{}", gamma_suffix(.gamma))]
    NotPullback { degree: u32, gamma: Option<Vec<u32>> },

    #[error("zero series has no growth bound")]
    ZeroSeries,

    #[error("truncation degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),

    #[error("point lies outside the problem region")]
    OutOfRegion,

    #[error("y = 0 is excluded from pointwise lift checks")]
    SingularPoint,

    #[error("evaluation failed at {point:?}: {reason}")]
    Evaluation { point: Vec<f64>, reason: String },

    #[error("analytic derivatives are not available for this field")]
    DerivativesUnavailable,

    #[error("quadrature did not converge within {0} subdivisions")]
    QuadratureBudget(usize),

    #[error("malformed input: {0}")]
    Parse(String),
}

fn gamma_suffix(gamma: &Option<Vec<u32>>) -> String {
    match gamma {
        Some(g) => format!(" (x' exponent {g:?})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHomogeneous => "not_homogeneous",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotHarmonic => "not_harmonic",
            Error::NotLAnnihilated => "not_l_annihilated",
            Error::OddDegree(_) => "odd_degree",
            Error::InconsistentSystem(_) => "inconsistent_system",
            Error::EvennessViolation { .. } => "evenness_violation",
            Error::NotPullback { .. } => "not_pullback",
            Error::ZeroSeries => "zero_series",
            Error::DegreeMismatch(..) => "degree_mismatch",
            Error::OutOfRegion => "out_of_region",
            Error::SingularPoint => "singular_point",
            Error::Evaluation { .. } => "evaluation",
            Error::DerivativesUnavailable => "derivatives_unavailable",
            Error::QuadratureBudget(_) => "quadrature_budget",
            Error::Parse(_) => "parse",
        }
    }
}
