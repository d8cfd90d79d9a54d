use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("duplicate (country, discipline, year) triple at rows {first} and {second}")]
    DuplicateTriple { first: usize, second: usize },
    #[error("negative count at row {row}")]
    NegativeCount { row: usize },
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("year {year} outside panel range {range}")]
    YearOutOfRange { year: i32, range: String },
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("no countries in flag matrix")]
    EmptyFlags,
    #[error("unknown country `{0}`")]
    UnknownCountry(String),
    #[error("country mismatch: `{0}` vs `{1}`")]
    CountryMismatch(String, String),
    #[error("start year {start} is not before end year {end}")]
    YearOrder { start: i32, end: i32 },
    #[error("metric mismatch: {0} vs {1}")]
    MetricMismatch(String, String),
    #[error("start value {0} is not positive")]
    NonpositiveStart(f64),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid period grid: {0}")]
    InvalidGrid(String),
    #[error("no RCA slice for year {0}")]
    MissingYearSlice(i32),
    #[error("rank-deficient design; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("cluster-robust covariance needs at least two clusters")]
    SingleCluster,
    #[error("not enough degrees of freedom: {n_obs} observations for {n_params} parameters")]
    InsufficientDof { n_obs: usize, n_params: usize },
    #[error("missing coefficient `{0}`")]
    MissingCoefficient(String),
    #[error("missing density for {0}")]
    MissingDensity(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
