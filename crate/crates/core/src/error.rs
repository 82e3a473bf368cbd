use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed metric document at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("in field '{field}': {source}")]
    Expr {
        field: String,
        #[source]
        source: ParseError,
    },

    #[error("unknown builtin metric '{0}' (expected minkowski, einstein, de_sitter, conformal_flat or flrw)")]
    UnknownBuiltin(String),

    #[error("missing field '{0}'")]
    MissingField(String),

    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),

    #[error("event ({t}, {x}) lies outside the domain box t in [{t_min}, {t_max}]")]
    OutsideDomain {
        t: f64,
        x: f64,
        t_min: f64,
        t_max: f64,
    },

    #[error("metric is not Lorentzian in adapted form at ({t}, {x}): {reason}")]
    InvalidMetricAt { t: f64, x: f64, reason: String },

    #[error("null curve from ({t0}, {x0}) did not reach t = 0 within {steps} steps (stopped at t = {t})")]
    MaxSteps { t0: f64, x0: f64, t: f64, steps: usize },

    #[error("null curve left the domain at t = {t} (x = {x})")]
    LeftDomain { t: f64, x: f64 },

    #[error("cannot integrate {direction} from t = {t}: null curves are only traced toward t = 0")]
    WrongDirection { t: f64, direction: &'static str },

    #[error("surface map is not strictly increasing near x = {x}; a decreasing map produces the anti-causal alternative, which is not supported")]
    NotMonotone { x: f64 },

    #[error("surface map is not equivariant: f(x + L) - f(x) = {shift} at x = {x}, expected 2*pi")]
    NotEquivariant { x: f64, shift: f64 },

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("conformal factor is not positive ({0})")]
    NonPositiveFactor(f64),

    #[error("map is not conformal at ({t}, {x}): residual {residual:e} exceeds {tol:e}")]
    NonConformal {
        t: f64,
        x: f64,
        residual: f64,
        tol: f64,
    },

    #[error("degenerate jacobian at ({t}, {x})")]
    DegenerateJacobian { t: f64, x: f64 },

    #[error("classification differs between probes: {0}")]
    InconsistentClassification(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// bad input or contract violations.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::MaxSteps { .. }
                | Error::LeftDomain { .. }
                | Error::InvalidMetricAt { .. }
                | Error::DegenerateJacobian { .. }
                | Error::NonPositiveFactor(_)
        )
    }
}
