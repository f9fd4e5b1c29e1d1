//! Exact simulation of the double cascade on a realized network.
//!
//! All nodes update synchronously from the step-`n` state. Default shocks
//! along an edge carry the fraction `xi` of its exposure to the creditor and
//! stress shocks carry the fraction `zeta` to the debtor.

mod dynamics;
mod montecarlo;
mod realize;

pub use dynamics::{breaches, cascade_step, run_cascade, CascadeReport, CascadeState, InitialShock, Status};
pub use montecarlo::{
    TrialShock,
    monte_carlo, monte_carlo_sweep, percentile, write_aggregate_csv, write_trials_csv, EnsembleSource,
    McAggregate, RealizationSource, SkeletonSource, TrialOutcome,
};
pub use realize::{realize_network, NetworkRealization};

use thiserror::Error;

use crate::ensemble::EnsembleError;
use crate::netgen::NetError;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("invalid realization: {0}")]
    InvalidRealization(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
