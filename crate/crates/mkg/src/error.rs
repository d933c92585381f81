use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("shooting bracket does not straddle the crossing/turn-up dichotomy: {0}")]
    Bracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("field blow-up at step {step}: {what}")]
    Blowup { step: usize, what: String },

    #[error("hylenic charge is undefined at beta = 0; use the beta-scaled variant `hylenic_charge_scaled`")]
    BetaZeroHylenic,

    #[error("degenerate hylenic charge (|H| ~ 0)")]
    DegenerateHylenic,

    #[error("soliton support exceeds the lattice: {0}")]
    Geometry(String),

    #[error("superposition constraint violated: {0}")]
    Superposition(String),

    #[error("tracking aborted, soliton separation below 2 r0 (assumption A-2 violated) at t = {0}")]
    TrackingSeparation(f64),

    #[error("field sample outside lattice domain at {0:?}")]
    SampleOutOfDomain([f64; 3]),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("snapshot checksum mismatch in field `{0}`")]
    SnapshotChecksum(String),

    #[error("snapshot format version {found} unsupported (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code class: 2 validation, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Geometry(_) | Error::Superposition(_) => 2,
            Error::Snapshot(_)
            | Error::SnapshotChecksum(_)
            | Error::SnapshotVersion { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
