//! Error type shared by all solver modules.

use crate::engines::RunRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate element: Jacobian determinant {det:.3e} at integration point {point}")]
    DegenerateElement { det: f64, point: usize },

    #[error("subdomain `{name}`: interior stiffness block is singular (floating interior)")]
    SingularInterior { name: String },

    #[error("assembled global interface operator is not positive definite (insufficient Dirichlet constraints)")]
    SingularGlobal,

    #[error("assembled reference interface operator is not positive definite")]
    SingularReference,

    #[error(
        "interface construction: nodes at {a:?} and {b:?} lie within the rounding \
         tolerance but deduplicate to different interface entries"
    )]
    InconsistentGeometry { a: [f64; 3], b: [f64; 3] },

    #[error("invalid solver setting: {0}")]
    InvalidSetting(String),

    #[error("{mode} iteration diverged at iteration {iteration} (omega {omega}): residual is not finite")]
    Diverged {
        mode: &'static str,
        iteration: usize,
        omega: f64,
        record: Box<RunRecord>,
    },

    #[error("worker {worker} failed: {message}")]
    WorkerFailed { worker: usize, message: String },
}
