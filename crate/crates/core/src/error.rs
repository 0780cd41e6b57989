use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{a}, {b}]: partial value {partial}, error estimate {err_est}")]
    NonConvergence {
        a: f64,
        b: f64,
        partial: f64,
        err_est: f64,
    },

    #[error("irregular profile: {0}")]
    IrregularProfile(String),

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("non-manifold edge ({0}, {1})")]
    NonManifoldEdge(usize, usize),

    #[error("inconsistent orientation at edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),

    #[error("open mesh: boundary edge ({0}, {1})")]
    OpenMesh(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh is disconnected ({0} components)")]
    Disconnected(usize),

    #[error("orientation unresolved: {0}")]
    Orientation(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("profile self-intersects at segments {0} and {1}")]
    SelfIntersection(usize, usize),

    #[error("degenerate segment {index} (length {length:e})")]
    DegenerateSegment { index: usize, length: f64 },

    #[error("trace did not converge")]
    NotConverged,

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
