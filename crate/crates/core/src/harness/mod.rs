//! Experiment registry, calibration of the EU-style network, configuration
//! and result tables.

pub mod config;
pub mod eu;
pub mod experiments;
pub mod models;
pub mod output;

use thiserror::Error;

use crate::cascade_fixed::FixedError;
use crate::cascade_lti::LtiError;
use crate::cascade_mc::McError;
use crate::dists::DistError;
use crate::ensemble::EnsembleError;
use crate::netgen::NetError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("numerical guard: {0}")]
    Numerical(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Fixed(#[from] FixedError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for numerical-guard
    /// aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Fixed(FixedError::Format(_) | FixedError::Csv(_)) => 2,
            HarnessError::Net(NetError::Format(_) | NetError::InvalidParameter(_)) => 2,
            HarnessError::Numerical(_) | HarnessError::Dist(_) | HarnessError::Lti(_) => 3,
            HarnessError::Ensemble(_) | HarnessError::Fixed(FixedError::Dist(_)) => 3,
            _ => 1,
        }
    }
}
