use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("open surface: edge ({0}, {1}) is shared by {2} panel(s), expected 2")]
    OpenSurface(usize, usize, usize),

    #[error("inconsistent orientation across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),

    #[error("degenerate panel {panel} (area {area:e})")]
    DegeneratePanel { panel: usize, area: f64 },

    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),

    #[error("empty mesh: no triangle panels")]
    EmptyMesh,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objects {i} and {j} overlap or touch (separation {separation:e})")]
    Overlap { i: usize, j: usize, separation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed for panel pair ({panel_a}, {panel_b}): {message}")]
    Quadrature {
        panel_a: usize,
        panel_b: usize,
        message: String,
    },

    #[error("matrix of dimension {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("negative determinant ratio det M / det M_inf (log|ratio| = {log_abs_ratio})")]
    NegativeDeterminantRatio { log_abs_ratio: f64 },

    #[error("at kappa = {kappa:e}: {source}")]
    AtKappa {
        kappa: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("geometry file line {line}: {message}")]
    Geometry { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_kappa(self, kappa: f64) -> Self {
        Error::AtKappa {
            kappa,
            source: Box::new(self),
        }
    }
}
