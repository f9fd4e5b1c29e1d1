//! Double cascade analytics for interbank networks.
//!
//! Default (insolvency) shocks travel downstream from debtors to creditors,
//! stress (illiquidity) shocks travel upstream from creditors to debtors.
//! The crate computes the joint fixed point by exact simulation on realized
//! networks and by locally tree-like probability recursions on random or
//! fixed skeletons.

pub mod dists;
pub mod cascade_fixed;
pub mod cascade_lti;
pub mod ensemble;
pub mod harness;
pub mod cascade_mc;
pub mod netgen;
pub mod rng;
