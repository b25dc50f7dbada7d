use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A thermodynamic input left the admissible set (rho > 0, theta > 0,
    /// positive internal energy).
    #[error("inadmissible state: {0}")]
    Domain(String),

    /// Eigendecomposition requested too close to vacuum (c^2 below threshold).
    #[error("near-vacuum state: c^2 = {c2:.3e} below threshold")]
    Conditioning { c2: f64 },

    /// The two end states do not bound a 3-rarefaction.
    #[error("not a rarefaction: {0}")]
    NotARarefaction(String),

    /// A grid does not resolve the feature it is asked to measure.
    #[error("under-resolved grid: {0}")]
    Resolution(String),

    /// A caller broke an operation contract (mismatched grids, missing
    /// derivative orders, empty windows, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration values.
    #[error("configuration error: {0}")]
    Config(String),

    /// A time step produced NaN or an inadmissible cell.
    #[error("solver diverged at t = {t:.6}: {reason}")]
    Divergence { t: f64, reason: String },

    /// A rate fit was requested on unusable data.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
