use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{realize_network, run_cascade, InitialShock, McError, NetworkRealization};
use crate::ensemble::Ensemble;
use crate::netgen::{
    configuration_skeleton, poisson_skeleton, preferential_attachment, top_connected_subnetwork, NodeTypeLaw, Skeleton,
};
use crate::rng::{stream, StreamRng};

/// Produces one realized network per trial from the trial's random stream.
pub trait RealizationSource: Sync {
    fn realize(&self, rng: &mut StreamRng) -> Result<NetworkRealization, McError>;
}

impl RealizationSource for NetworkRealization {
    fn realize(&self, _rng: &mut StreamRng) -> Result<NetworkRealization, McError> {
        Ok(self.clone())
    }
}

/// Where each trial's skeleton comes from.
#[derive(Debug, Clone)]
pub enum SkeletonSource {
    /// Reused in every trial.
    Fixed(Arc<Skeleton>),
    Poisson { n: usize, z: f64 },
    Configuration { law: NodeTypeLaw, n: usize },
    PreferentialAttachment { n: usize, alpha: f64, gamma: f64, delta_in: f64, delta_out: f64, keep: Option<usize> },
}

impl SkeletonSource {
    pub fn skeleton<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Arc<Skeleton>, McError> {
        Ok(match self {
            SkeletonSource::Fixed(g) => g.clone(),
            SkeletonSource::Poisson { n, z } => Arc::new(poisson_skeleton(*n, *z, rng)?),
            SkeletonSource::Configuration { law, n } => Arc::new(configuration_skeleton(law, *n, rng)?.0),
            SkeletonSource::PreferentialAttachment { n, alpha, gamma, delta_in, delta_out, keep } => {
                let g = preferential_attachment(*n, *alpha, *gamma, *delta_in, *delta_out, rng)?;
                match keep {
                    Some(m) => Arc::new(top_connected_subnetwork(&g, *m)?.skeleton),
                    None => Arc::new(g),
                }
            }
        })
    }
}

/// Skeleton source plus type-indexed laws.
#[derive(Debug, Clone)]
pub struct EnsembleSource {
    pub skeleton: SkeletonSource,
    pub ensemble: Arc<Ensemble>,
}

impl RealizationSource for EnsembleSource {
    fn realize(&self, rng: &mut StreamRng) -> Result<NetworkRealization, McError> {
        let g = self.skeleton.skeleton(rng)?;
        realize_network(g, &self.ensemble, rng)
    }
}

/// Day-0 shocks applied in every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialShock {
    /// Only the nodes with zero buffers.
    FromBuffers,
    /// Also default this many distinct nodes drawn uniformly per trial.
    UniformDefaults(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub lambda: f64,
    pub trial: usize,
    pub steps: usize,
    pub default_frac: f64,
    pub stress_frac: f64,
    #[serde(skip)]
    pub trajectory: Vec<(f64, f64)>,
}

/// Trial outcomes at one `lambda` with their summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McAggregate {
    pub lambda: f64,
    pub mean_default: f64,
    pub p10_default: f64,
    pub p90_default: f64,
    pub mean_stress: f64,
    pub p10_stress: f64,
    pub p90_stress: f64,
    /// Mean `(default, stress)` fractions per step; finished trials hold
    /// their final values.
    pub step_means: Vec<(f64, f64)>,
    pub outcomes: Vec<TrialOutcome>,
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn aggregate(lambda: f64, outcomes: Vec<TrialOutcome>) -> McAggregate {
    let d: Vec<f64> = outcomes.iter().map(|o| o.default_frac).collect();
    let s: Vec<f64> = outcomes.iter().map(|o| o.stress_frac).collect();
    let len = outcomes.iter().map(|o| o.trajectory.len()).max().unwrap_or(0);
    let step_means = (0..len)
        .map(|i| {
            let (mut a, mut b) = (0.0, 0.0);
            for o in &outcomes {
                let (x, y) = o.trajectory.get(i).or(o.trajectory.last()).copied().unwrap_or((0.0, 0.0));
                a += x;
                b += y;
            }
            (a / outcomes.len() as f64, b / outcomes.len() as f64)
        })
        .collect();
    McAggregate {
        lambda,
        mean_default: mean(&d),
        p10_default: percentile(&d, 0.1),
        p90_default: percentile(&d, 0.9),
        mean_stress: mean(&s),
        p10_stress: percentile(&s, 0.1),
        p90_stress: percentile(&s, 0.9),
        step_means,
        outcomes,
    }
}

/// Monte Carlo over `trials` realizations at each `lambda`.
///
/// Trial `t` draws everything from stream `t` of `master_seed`, so the same
/// realization is used at every `lambda` and results do not depend on the
/// thread count. Trials run in parallel on the current rayon pool.
pub fn monte_carlo_sweep(
    source: &dyn RealizationSource,
    lambdas: &[f64],
    trials: usize,
    master_seed: u64,
    shock: TrialShock,
) -> Result<Vec<McAggregate>, McError> {
    if trials == 0 {
        return Err(McError::InvalidParameter("at least one trial is required".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(McError::InvalidParameter(format!("lambda {l} outside [0, 1]")));
    }
    let per_trial: Vec<Vec<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(master_seed, t as u64);
            let real = source.realize(&mut rng)?;
            let initial = match shock {
                TrialShock::FromBuffers => InitialShock::FromBuffers,
                TrialShock::UniformDefaults(m) => {
                    let n = real.node_count();
                    if m > n {
                        return Err(McError::InvalidParameter(format!("cannot seed {m} defaults in {n} nodes")));
                    }
                    InitialShock::Defaults(rand::seq::index::sample(&mut rng, n, m).into_vec())
                }
            };
            lambdas
                .iter()
                .map(|&lambda| {
                    let r = run_cascade(&real, lambda, &initial)?;
                    Ok(TrialOutcome {
                        lambda,
                        trial: t,
                        steps: r.steps_taken,
                        default_frac: r.default_frac,
                        stress_frac: r.stress_frac,
                        trajectory: r.trajectory,
                    })
                })
                .collect()
        })
        .collect::<Result<_, McError>>()?;
    let mut by_lambda: Vec<Vec<TrialOutcome>> = vec![Vec::with_capacity(trials); lambdas.len()];
    for outcomes in per_trial {
        for (i, o) in outcomes.into_iter().enumerate() {
            by_lambda[i].push(o);
        }
    }
    Ok(lambdas.iter().zip(by_lambda).map(|(&l, o)| aggregate(l, o)).collect())
}

/// Single-`lambda` form of [`monte_carlo_sweep`].
pub fn monte_carlo(
    source: &dyn RealizationSource,
    lambda: f64,
    trials: usize,
    master_seed: u64,
    shock: TrialShock,
) -> Result<McAggregate, McError> {
    Ok(monte_carlo_sweep(source, &[lambda], trials, master_seed, shock)?.remove(0))
}

/// Per-trial table `lambda,trial,steps,default_frac,stress_frac`.
pub fn write_trials_csv<W: Write>(results: &[McAggregate], out: W) -> Result<(), McError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "trial", "steps", "default_frac", "stress_frac"])?;
    for agg in results {
        for o in &agg.outcomes {
            w.write_record([
                o.lambda.to_string(),
                o.trial.to_string(),
                o.steps.to_string(),
                o.default_frac.to_string(),
                o.stress_frac.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Summary table, one row per `lambda`.
pub fn write_aggregate_csv<W: Write>(results: &[McAggregate], out: W) -> Result<(), McError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "mean_default", "p10_default", "p90_default", "mean_stress", "p10_stress", "p90_stress"])?;
    for a in results {
        w.write_record(
            [a.lambda, a.mean_default, a.p10_default, a.p90_default, a.mean_stress, a.p10_stress, a.p90_stress]
                .map(|x| x.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}
