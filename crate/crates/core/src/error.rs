use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0} vs {1} points per axis")]
    GridMismatch(usize, usize),
    #[error("derivative order {order} overflows at wavenumber {kmax}")]
    OrderTooLarge { order: u32, kmax: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid capacity: {0}")]
    GridCapacity(String),

    #[error("family invariant violated: {0}")]
    FamilyInvariant(String),
    #[error("matrix outside the certified ball: |R - Id| = {distance:.6e} >= r0 = {r0:.6e}")]
    OutOfBall { distance: f64, r0: f64 },
    #[error("nonpositive coefficient {value:.3e} for k = {k:?} inside the ball")]
    NegativeCoefficient { k: [i32; 3], value: f64 },
    #[error("certified radius {0:.3e} is below 1e-3")]
    RadiusTooSmall(f64),
    #[error("amplitudes are not conjugate symmetric at k = {0:?}")]
    NotConjugateSymmetric([i32; 3]),

    #[error("cutoff overlap {overlap:.3e} is narrower than 4 time steps of {dt:.3e}")]
    OverlapTooNarrow { overlap: f64, dt: f64 },
    #[error("flow map: doubling substeps from {substeps} moved the map by {change:.3e}")]
    StepCountTooSmall { substeps: usize, change: f64 },
    #[error("flow map for l = {l}: |DPhi - Id| = {distortion:.4} exceeds 0.2 at t = {t}")]
    FlowDistortion { l: i64, t: f64, distortion: f64 },
    #[error("ball violation at l = {l}, t = {t}, x = {x:?}: radius {radius:.4e} >= r0 {r0:.4e}")]
    BallViolation {
        l: i64,
        t: f64,
        x: [f64; 3],
        radius: f64,
        r0: f64,
    },
    #[error("temporal support {0:?} leaves [-1/2, 1/2]")]
    SupportOverflow((f64, f64)),

    #[error("seed too small: {inequality} fails at q = {q}")]
    SeedTooSmall { inequality: String, q: usize },
    #[error("no seed up to 2^{0} passes the global ledger")]
    NoSeed(f64),

    #[error("snapshot format: {0}")]
    Snapshot(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
