//! Effective entanglement of bipartite quantum states under imperfect or
//! restricted measurements.
//!
//! Measurement restrictions are modeled as completely positive maps acting on
//! the shared state; the attenuation they cause is captured by a quality
//! factor (the G-concurrence of the channel's Choi state). The crate provides
//! the linear-algebra substrate, Kraus channels, pure- and mixed-state
//! G-concurrence (convex roof), semiquantum nonlocal game evaluation with
//! seesaw payoff optimization, superselection-rule projections, and a
//! BEC phase-reference model with exact truncated-Fock validation.

pub mod acceptance;
pub mod bec;
pub mod channels;
pub mod cli;
pub mod effective;
pub mod entanglement;
pub mod games;
pub mod io;
pub mod qcore;
pub mod sampling;

pub use qcore::{CMat, CVec, C64};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code classification for the CLI: 2 for validation problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
