//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced while building, solving or auditing a geodesic problem.
#[derive(Debug, Error)]
pub enum Error {
    /// The metric `F_uu` (or the space-time determinant) lost positivity.
    #[error("positivity lost at node (i={i}, j={j}): {what} = {value:e}")]
    PositivityLoss {
        i: usize,
        j: usize,
        what: &'static str,
        value: f64,
    },

    /// A weight vanished on the audited grid and no exclusion zone was given.
    #[error("weight degenerates at u = {u}: value {value:e} below tolerance")]
    DegenerateWeight { u: f64, value: f64 },

    /// Boundary slices are not admissible in the space direction.
    #[error("boundary slice t = {t} is not u-admissible at i = {i} (F_uu = {value:e})")]
    BadBoundary { t: f64, i: usize, value: f64 },

    /// A boundary profile handed to the Legendre oracle is not strictly convex.
    #[error("boundary profile is not strictly convex near u = {u} (F_uu = {value:e})")]
    NonConvexBoundary { u: f64, value: f64 },

    /// Newton iteration ran out of iterations.
    #[error("Newton did not converge in {max_iter} iterations (residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    /// The banded linear solve hit an exactly singular pivot.
    #[error("singular linear system at row {row}")]
    SingularSystem { row: usize },

    /// A failure inside a continuity run, tagged with the schedule entry.
    #[error("schedule entry {entry}: {source}")]
    Entry {
        entry: usize,
        #[source]
        source: Box<Error>,
    },

    /// Two grids that must share a shape do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Invalid input values (schedule, grid sizes, exponents, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Config parse failure with location.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Config validation failure listing every violated invariant.
    #[error("invalid config: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
