use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Rejection sampling could not place a UE in the served area.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Horizontal positions coincide so the link bearing is undefined.
    #[error("undefined bearing: transmitter and receiver are horizontally coincident")]
    UndefinedBearing,

    #[error("element index {index} out of range for array with {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    /// An input falls outside the model's applicability or validity range.
    #[error("{quantity} = {value} outside valid range [{min}, {max}]")]
    Range {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// A state that the model rules out, e.g. type-2 LOS below 13.5 m.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("inconsistent geometry: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("link drop={drop} site={site} sector={sector} ue={ue}: {source}")]
    Link {
        drop: u32,
        site: u32,
        sector: u32,
        ue: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(quantity: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::Range {
            quantity,
            value,
            min,
            max,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
