use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("face {face} is not inscribed in a unit circle (deviation {deviation:.3e})")]
    Isoradiality { face: usize, deviation: f64 },

    #[error("edge {edge} has degenerate rhombus half-angle {theta}")]
    DegenerateAngle { edge: usize, theta: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("matrix of odd size {0} has no Pfaffian")]
    OddSize(usize),

    #[error("edges are not pairwise vertex-disjoint")]
    NotDisjoint,

    #[error("not a contour: vertex {0} has odd degree")]
    NotAContour(usize),

    #[error("Kasteleyn orientation failure: {0}")]
    OrientationFailure(String),

    #[error("interpolation residual {0:.3e} exceeds tolerance")]
    InterpolationResidual(f64),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("identity ({which}) violated: relative residual {residual:.3e}")]
    IdentityViolation { which: String, residual: f64 },

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("discrete exponential hits a pole at lambda = {0}")]
    PoleHit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
