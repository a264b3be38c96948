use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    #[error("specular requires no gradient: a zero steering angle has no finite period")]
    SpecularNoGradient,

    /// `sin(theta_i) + varrho/k0` left [-1, 1]; the +1 order does not propagate.
    #[error("evanescent order: sin(theta_r) would be {sin_theta:.6}")]
    EvanescentOrder { sin_theta: f64 },

    #[error(
        "phase unreachable{}: target {target_deg:.3} deg, curve covers [{lo_deg:.3}, {hi_deg:.3}] deg",
        cell.map(|c| format!(" at cell {c}")).unwrap_or_default()
    )]
    PhaseUnreachable {
        target_deg: f64,
        lo_deg: f64,
        hi_deg: f64,
        cell: Option<usize>,
    },

    #[error("invalid phase table at row {row}: {reason}")]
    TableInvalid { row: usize, reason: String },

    #[error("patch size {size_mm:.6} mm outside curve range [{min_mm:.6}, {max_mm:.6}] mm")]
    InterpolationOutOfRange { size_mm: f64, min_mm: f64, max_mm: f64 },

    #[error("directivity undefined for an all-zero pattern")]
    UndefinedDirectivity,

    #[error("invalid layout: {0}")]
    LayoutInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
