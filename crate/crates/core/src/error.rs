use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} is not strictly convex")]
    NonConvexCell { cell: usize },

    #[error("mesh file parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("norm {kind} is not defined for a {field}")]
    UnsupportedNorm { kind: String, field: &'static str },

    #[error("dual-flux orientation mismatch in cell {cell}: conservativity residual {residual:e}")]
    DualFluxOrientation { cell: usize, residual: f64 },

    #[error("alpha table derivation failed: mass-balance residual {residual:e}")]
    AlphaDerivation { residual: f64 },

    #[error("linear solver failure ({context}): {msg}")]
    LinearSolve { context: String, msg: String },

    #[error("boundary velocity must vanish, face {face} carries ({u0}, {u1})")]
    NonzeroBoundaryVelocity { face: usize, u0: f64, u1: f64 },

    #[error("time step dt = {dt:e} exceeds the CFL bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("the explicit scheme requires upwind momentum convection")]
    ExplicitRequiresUpwind,

    #[error("Picard iteration did not converge in {iterations} iterations (residual history: {history:?})")]
    PicardDivergence { iterations: usize, history: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
