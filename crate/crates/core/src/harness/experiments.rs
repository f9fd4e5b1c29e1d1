//! Sweeps of the numerical experiments.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::config::{CustomModel, CustomSkeleton, Engine, ExperimentConfig, ExperimentId, ExposureSpec, LawSpec};
use super::eu::{eu_skeleton, EuBalanceSheets, EU_GRID_TAIL};
use super::models::{default_k_max, exp1_ensemble, exp1_grid, poisson_model, poisson_types, point_buffer, GRID_TAIL};
use super::HarnessError;
use crate::cascade_fixed::{
    fixed_lti_run, grid_for_rows, model_from_rows, read_edge_laws, read_node_laws, FixedLtiModel,
};
use crate::cascade_lti::{iterate_to_fixed_point, LtiOptions};
use crate::cascade_mc::{
    monte_carlo_sweep, EnsembleSource, McAggregate, McError, NetworkRealization, RealizationSource, SkeletonSource,
    TrialShock,
};
use crate::dists::{BufferLaw, ExposureLaw, Grid, LogNormal};
use crate::ensemble::{Ensemble, EnsembleError};
use crate::netgen::{read_skeleton_file, Skeleton};
use crate::rng::{stream, StreamRng};

/// Final default and stress fractions from an analytic engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fractions {
    pub default: f64,
    pub stress: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Mean and 10th/90th percentiles of the Monte Carlo fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub mean_default: f64,
    pub p10_default: f64,
    pub p90_default: f64,
    pub mean_stress: f64,
    pub p10_stress: f64,
    pub p90_stress: f64,
}

impl From<&McAggregate> for McSummary {
    fn from(a: &McAggregate) -> Self {
        McSummary {
            mean_default: a.mean_default,
            p10_default: a.p10_default,
            p90_default: a.p90_default,
            mean_stress: a.mean_stress,
            p10_stress: a.p10_stress,
            p90_stress: a.p90_stress,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub coords: Vec<f64>,
    pub lti: Option<Fractions>,
    pub fixed: Option<Fractions>,
    pub mc: Option<McSummary>,
}

impl Row {
    fn new(coords: Vec<f64>) -> Self {
        Row { coords, lti: None, fixed: None, mc: None }
    }

    /// Analytic default fraction, from whichever analytic engine ran.
    pub fn analytic(&self) -> Option<Fractions> {
        self.lti.or(self.fixed)
    }
}

/// Which fractions a table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Measure {
    Both,
    Default,
    Stress,
}

/// One figure analog: a sweep over `axes` with a row per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub axes: Vec<String>,
    pub measure: Measure,
    pub engines: Vec<Engine>,
    pub rows: Vec<Row>,
}

/// A sweep point an engine could not compute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub table: String,
    pub engine: Engine,
    pub coords: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub skipped: Vec<Skipped>,
    /// Full Monte Carlo output per table, in sweep order.
    pub mc: Vec<(String, Vec<McAggregate>)>,
}

/// Index `i` of the largest jump `|y[i + 1] - y[i]|`.
pub fn knife_edge(values: &[f64]) -> Option<usize> {
    values
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, (w[1] - w[0]).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
}

fn skip_or_fail(err: HarnessError) -> Result<String, HarnessError> {
    match err {
        HarnessError::Config(_) | HarnessError::Io(_) => Err(err),
        other => Ok(other.to_string()),
    }
}

struct Sweep {
    table: Table,
    skipped: Vec<Skipped>,
    mc: Vec<McAggregate>,
}

impl Sweep {
    fn new(name: &str, axes: &[&str], measure: Measure, engines: &[Engine], points: Vec<Vec<f64>>) -> Self {
        Sweep {
            table: Table {
                name: name.into(),
                axes: axes.iter().map(|a| a.to_string()).collect(),
                measure,
                engines: engines.to_vec(),
                rows: points.into_iter().map(Row::new).collect(),
            },
            skipped: Vec::new(),
            mc: Vec::new(),
        }
    }

    fn analytic<F>(&mut self, engine: Engine, mut eval: F) -> Result<(), HarnessError>
    where
        F: FnMut(&[f64]) -> Result<Fractions, HarnessError>,
    {
        for row in &mut self.table.rows {
            match eval(&row.coords) {
                Ok(f) => {
                    log::info!("{} {:?} {}: default {:.4} stress {:.4}", self.table.name, row.coords, engine.name(), f.default, f.stress);
                    match engine {
                        Engine::Lti => row.lti = Some(f),
                        _ => row.fixed = Some(f),
                    }
                }
                Err(e) => {
                    let reason = skip_or_fail(e)?;
                    log::warn!("{} {:?} {} skipped: {reason}", self.table.name, row.coords, engine.name());
                    self.skipped.push(Skipped { table: self.table.name.clone(), engine, coords: row.coords.clone(), reason });
                }
            }
        }
        Ok(())
    }

    /// Runs `eval` on groups of rows; it returns one aggregate per row.
    fn monte_carlo<F>(&mut self, groups: &[Vec<usize>], mut eval: F) -> Result<(), HarnessError>
    where
        F: FnMut(&[Vec<f64>]) -> Result<Vec<McAggregate>, HarnessError>,
    {
        for group in groups {
            let coords: Vec<Vec<f64>> = group.iter().map(|&i| self.table.rows[i].coords.clone()).collect();
            match eval(&coords) {
                Ok(aggs) => {
                    for (&i, a) in group.iter().zip(&aggs) {
                        log::info!("{} {:?} mc: default {:.4} stress {:.4}", self.table.name, self.table.rows[i].coords, a.mean_default, a.mean_stress);
                        self.table.rows[i].mc = Some(a.into());
                    }
                    self.mc.extend(aggs);
                }
                Err(e) => {
                    let reason = skip_or_fail(e)?;
                    for c in coords {
                        log::warn!("{} {c:?} mc skipped: {reason}", self.table.name);
                        self.skipped.push(Skipped { table: self.table.name.clone(), engine: Engine::Mc, coords: c, reason: reason.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self, out: &mut ExperimentResults) -> Result<(), HarnessError> {
        for &engine in &self.table.engines {
            let failed = self.skipped.iter().filter(|s| s.engine == engine).count();
            if failed > 0 && failed == self.table.rows.len() {
                return Err(HarnessError::Numerical(format!(
                    "{}: every sweep point failed for {}; first reason: {}",
                    self.table.name,
                    engine.name(),
                    self.skipped.iter().find(|s| s.engine == engine).map_or("", |s| s.reason.as_str())
                )));
            }
        }
        out.skipped.extend(self.skipped);
        if !self.mc.is_empty() {
            out.mc.push((self.table.name.clone(), self.mc));
        }
        out.tables.push(self.table);
        Ok(())
    }
}

fn lti_fractions(o: &crate::cascade_lti::LtiOutcome) -> Fractions {
    Fractions { default: o.default_frac, stress: o.stress_frac, iterations: o.iterations, converged: o.converged }
}

fn fixed_fractions(model: &FixedLtiModel, c: &ExperimentConfig) -> Fractions {
    let o = fixed_lti_run(model, c.tol, c.max_iter);
    let n = model.skeleton.node_count().max(1) as f64;
    Fractions { default: o.expected_defaults / n, stress: o.expected_stressed / n, iterations: o.iterations, converged: o.converged }
}

fn lti_options(c: &ExperimentConfig) -> LtiOptions {
    LtiOptions { tol: c.tol, max_iter: c.max_iter, ..LtiOptions::default() }
}

fn each(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

fn exp1_source(c: &ExperimentConfig, ensemble: Arc<Ensemble>, z: f64) -> EnsembleSource {
    EnsembleSource { skeleton: SkeletonSource::Poisson { n: c.n, z }, ensemble }
}

fn k_max(c: &ExperimentConfig, z: f64) -> usize {
    if c.k_max > 0 {
        c.k_max
    } else {
        default_k_max(z)
    }
}

fn run_exp1(c: &ExperimentConfig, out: &mut ExperimentResults) -> Result<(), HarnessError> {
    let k = k_max(c, c.z);
    let grid = exp1_grid(c.delta.max(c.sigma), c.grid_cells)?;
    let ensemble = Arc::new(exp1_ensemble(c.delta, c.sigma, k, grid)?);
    let points = c.lambdas.iter().map(|&l| vec![l]).collect();
    let mut sweep = Sweep::new("fig3", &["lambda"], Measure::Both, &c.engines, points);
    if c.engines.contains(&Engine::Lti) {
        sweep.analytic(Engine::Lti, |x| {
            let model = poisson_model(c.n, c.z, k, ensemble.clone(), x[0])?;
            Ok(lti_fractions(&iterate_to_fixed_point(&model, lti_options(c))?))
        })?;
    }
    if c.engines.contains(&Engine::Mc) {
        let source = exp1_source(c, ensemble.clone(), c.z);
        let all = vec![(0..c.lambdas.len()).collect()];
        sweep.monte_carlo(&all, |_| Ok(monte_carlo_sweep(&source, &c.lambdas, c.trials, c.seed, TrialShock::FromBuffers)?))?;
    }
    sweep.finish(out)
}

fn run_exp2a(c: &ExperimentConfig, out: &mut ExperimentResults) -> Result<(), HarnessError> {
    let k = k_max(c, c.z);
    let build = |delta: f64, sigma: f64| -> Result<Arc<Ensemble>, HarnessError> {
        let grid = exp1_grid(delta.max(sigma), c.grid_cells)?;
        Ok(Arc::new(exp1_ensemble(delta, sigma, k, grid)?))
    };
    for (name, axis, values) in [("fig4a", "delta", &c.deltas), ("fig4b", "sigma", &c.sigmas)] {
        let buffers = |x: f64| if axis == "delta" { (x, c.sigma) } else { (c.delta, x) };
        let points = values.iter().map(|&x| vec![x]).collect();
        let mut sweep = Sweep::new(name, &[axis], Measure::Both, &c.engines, points);
        if c.engines.contains(&Engine::Lti) {
            sweep.analytic(Engine::Lti, |x| {
                let (d, s) = buffers(x[0]);
                let model = poisson_model(c.n, c.z, k, build(d, s)?, c.lambda)?;
                Ok(lti_fractions(&iterate_to_fixed_point(&model, lti_options(c))?))
            })?;
        }
        if c.engines.contains(&Engine::Mc) {
            sweep.monte_carlo(&each(values.len()), |x| {
                let (d, s) = buffers(x[0][0]);
                let source = exp1_source(c, build(d, s)?, c.z);
                Ok(monte_carlo_sweep(&source, &[c.lambda], c.trials, c.seed, TrialShock::FromBuffers)?)
            })?;
        }
        sweep.finish(out)?;
    }
    Ok(())
}

fn run_exp2b(c: &ExperimentConfig, out: &mut ExperimentResults) -> Result<(), HarnessError> {
    let points: Vec<Vec<f64>> = c.zs.iter().flat_map(|&z| c.lambdas.iter().map(move |&l| vec![z, l])).collect();
    let grid = c.exp2b.grid(c.grid_cells)?;
    let ensembles = c
        .zs
        .iter()
        .map(|&z| {
            let k = k_max(c, z);
            let (_, edges) = poisson_types(c.n, z, k)?;
            Ok((z, k, Arc::new(c.exp2b.ensemble(&edges, grid)?)))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let lookup = |z: f64| ensembles.iter().find(|e| e.0 == z).cloned().expect("ensemble per z");
    let mut sweep = Sweep::new("fig5", &["z", "lambda"], Measure::Both, &c.engines, points);
    if c.engines.contains(&Engine::Lti) {
        sweep.analytic(Engine::Lti, |x| {
            let (z, k, ens) = lookup(x[0]);
            let model = poisson_model(c.n, z, k, ens, x[1])?;
            Ok(lti_fractions(&iterate_to_fixed_point(&model, lti_options(c))?))
        })?;
    }
    if c.engines.contains(&Engine::Mc) {
        let per_z = c.lambdas.len();
        let groups: Vec<Vec<usize>> = (0..c.zs.len()).map(|i| (i * per_z..(i + 1) * per_z).collect()).collect();
        sweep.monte_carlo(&groups, |x| {
            let (z, _, ens) = lookup(x[0][0]);
            let source = exp1_source(c, ens, z);
            Ok(monte_carlo_sweep(&source, &c.lambdas, c.trials, c.seed, TrialShock::FromBuffers)?)
        })?;
    }
    let mut stress = sweep.table.clone();
    sweep.table.name = "fig5a".into();
    sweep.table.measure = Measure::Default;
    stress.name = "fig5b".into();
    stress.measure = Measure::Stress;
    sweep.finish(out)?;
    out.tables.push(stress);
    Ok(())
}

/// Skeleton of the EU-style experiments.
pub fn eu_network(c: &ExperimentConfig) -> Result<Arc<Skeleton>, HarnessError> {
    Ok(Arc::new(eu_skeleton(&c.eu, &mut stream(c.network_seed, 0))?))
}

fn run_exp3(c: &ExperimentConfig, out: &mut ExperimentResults) -> Result<(), HarnessError> {
    let g = eu_network(c)?;
    let p0 = 1.0 / g.node_count() as f64;
    let seed_one = TrialShock::UniformDefaults(1);
    let fixed = |bs: &EuBalanceSheets, lambda: f64| -> Result<Fractions, HarnessError> {
        let grid = bs.grid(c.grid_cells, EU_GRID_TAIL)?;
        Ok(fixed_fractions(&bs.fixed_model(grid, p0, lambda)?, c))
    };
    if c.experiment == ExperimentId::Exp3a {
        let bs = EuBalanceSheets::new(g, &c.eu, 1.0, 1.0)?;
        let points = c.lambdas.iter().map(|&l| vec![l]).collect();
        let mut sweep = Sweep::new("fig6a", &["lambda"], Measure::Both, &c.engines, points);
        if c.engines.contains(&Engine::Fixed) {
            sweep.analytic(Engine::Fixed, |x| fixed(&bs, x[0]))?;
        }
        if c.engines.contains(&Engine::Mc) {
            let all = vec![(0..c.lambdas.len()).collect()];
            sweep.monte_carlo(&all, |_| Ok(monte_carlo_sweep(&bs, &c.lambdas, c.trials, c.seed, seed_one)?))?;
        }
        sweep.finish(out)
    } else {
        let sheets = |f: f64| EuBalanceSheets::new(g.clone(), &c.eu, c.delta_fraction, f);
        let points = c.sigma_fractions.iter().map(|&f| vec![f]).collect();
        let mut sweep = Sweep::new("fig6b", &["sigma_fraction"], Measure::Both, &c.engines, points);
        if c.engines.contains(&Engine::Fixed) {
            sweep.analytic(Engine::Fixed, |x| fixed(&sheets(x[0])?, c.lambda))?;
        }
        if c.engines.contains(&Engine::Mc) {
            sweep.monte_carlo(&each(c.sigma_fractions.len()), |x| {
                Ok(monte_carlo_sweep(&sheets(x[0][0])?, &[c.lambda], c.trials, c.seed, seed_one)?)
            })?;
        }
        sweep.finish(out)
    }
}

fn buffer_law(spec: &LawSpec, grid: Grid) -> Result<BufferLaw, HarnessError> {
    if spec.std == 0.0 || spec.mean <= 0.0 {
        point_buffer(spec.atom, spec.mean, grid)
    } else {
        Ok(BufferLaw::lognormal_folded(spec.atom, spec.mean, spec.std, grid)?.0)
    }
}

fn exposure_law(spec: &ExposureSpec, k: usize, j: usize, grid: Grid) -> Result<ExposureLaw, HarnessError> {
    let mean = spec.mean * (j.max(1) as f64).powf(spec.in_exponent) * (k.max(1) as f64).powf(spec.out_exponent);
    if spec.cv == 0.0 {
        let cell = grid.cell_of(mean).clamp(1, grid.cells() - 1);
        return Ok(ExposureLaw::deterministic(grid.value_of(cell), grid)?);
    }
    Ok(ExposureLaw::lognormal(mean, spec.cv * mean, grid)?)
}

fn custom_grid(m: &CustomModel, cells: usize) -> Result<Grid, HarnessError> {
    let top = [m.default, m.stress]
        .iter()
        .filter(|s| s.mean > 0.0)
        .map(|s| {
            if s.std == 0.0 {
                Ok(2.0 * s.mean)
            } else {
                LogNormal::new(s.mean, s.std).map(|l| l.quantile(1.0 - GRID_TAIL))
            }
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let top = if top > 0.0 { top } else { 1.0 };
    Ok(Grid::new(top / (cells as f64 - 1.5), cells)?)
}

fn custom_ensemble(m: &CustomModel, k: usize, grid: Grid) -> Result<Ensemble, HarnessError> {
    let d = Arc::new(buffer_law(&m.default, grid)?);
    let s = Arc::new(buffer_law(&m.stress, grid)?);
    Ok(Ensemble::build(
        grid,
        k,
        |_, _| Ok(Some((d.clone(), s.clone()))),
        |kk, j| {
            if kk == 0 || j == 0 {
                return Ok(None);
            }
            exposure_law(&m.exposure, kk, j, grid)
                .map(|w| Some(Arc::new(w)))
                .map_err(|e| match e {
                    HarnessError::Dist(d) => EnsembleError::Dist(d),
                    other => EnsembleError::Dist(crate::dists::DistError::InvalidParameter(other.to_string())),
                })
        },
    )?)
}

/// Draws every node's buffers and every edge's exposure from the laws of a
/// fixed-skeleton model.
pub struct FixedLawSource<'a>(pub &'a FixedLtiModel);

impl RealizationSource for FixedLawSource<'_> {
    fn realize(&self, rng: &mut StreamRng) -> Result<NetworkRealization, McError> {
        use rand::Rng;
        let m = self.0;
        let h = m.grid().map_or(1.0, |g| g.step());
        let mut delta = Vec::with_capacity(m.default.len());
        let mut sigma = Vec::with_capacity(m.stress.len());
        for (d, s) in m.default.iter().zip(&m.stress) {
            delta.push(d.sample_cell(rng.random()) as f64 * h);
            sigma.push(s.sample_cell(rng.random()) as f64 * h);
        }
        let omega = m.exposure.iter().map(|w| w.sample_cell(rng.random()) as f64 * h).collect();
        NetworkRealization::new(m.skeleton.clone(), delta, sigma, omega)
    }
}

/// Fixed-skeleton model of a custom experiment on a skeleton file.
pub fn custom_fixed_model(m: &CustomModel, cells: usize, lambda: f64) -> Result<FixedLtiModel, HarnessError> {
    let CustomSkeleton::File { path, node_laws, edge_laws } = &m.skeleton else {
        return Err(HarnessError::Config("the fixed engine needs a skeleton file".into()));
    };
    let g = Arc::new(read_skeleton_file(path)?);
    if let (Some(nodes), Some(edges)) = (node_laws, edge_laws) {
        let nodes = read_node_laws(std::fs::File::open(nodes)?)?;
        let edges = read_edge_laws(std::fs::File::open(edges)?)?;
        let grid = grid_for_rows(&nodes, cells)?;
        return Ok(model_from_rows(g, &nodes, &edges, grid, lambda)?);
    }
    let grid = custom_grid(m, cells)?;
    let d = Arc::new(buffer_law(&m.default, grid)?);
    let s = Arc::new(buffer_law(&m.stress, grid)?);
    let n = g.node_count();
    let exposure = (0..g.edge_count())
        .map(|e| {
            let (k, j) = g.edge_type(e);
            Ok(Arc::new(exposure_law(&m.exposure, k, j, grid)?))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(FixedLtiModel::new(g, vec![d; n], vec![s; n], exposure, lambda)?)
}

fn run_custom(c: &ExperimentConfig, out: &mut ExperimentResults) -> Result<(), HarnessError> {
    let m = c.custom.as_ref().ok_or_else(|| HarnessError::Config("missing [custom] model".into()))?;
    let points = c.lambdas.iter().map(|&l| vec![l]).collect();
    let mut sweep = Sweep::new("custom", &["lambda"], Measure::Both, &c.engines, points);
    match &m.skeleton {
        CustomSkeleton::Poisson { n, z } => {
            let k = k_max(c, *z);
            let ensemble = Arc::new(custom_ensemble(m, k, custom_grid(m, c.grid_cells)?)?);
            if c.engines.contains(&Engine::Lti) {
                sweep.analytic(Engine::Lti, |x| {
                    let model = poisson_model(*n, *z, k, ensemble.clone(), x[0])?;
                    Ok(lti_fractions(&iterate_to_fixed_point(&model, lti_options(c))?))
                })?;
            }
            if c.engines.contains(&Engine::Mc) {
                let source = EnsembleSource { skeleton: SkeletonSource::Poisson { n: *n, z: *z }, ensemble };
                let all = vec![(0..c.lambdas.len()).collect()];
                sweep.monte_carlo(&all, |_| Ok(monte_carlo_sweep(&source, &c.lambdas, c.trials, c.seed, TrialShock::FromBuffers)?))?;
            }
        }
        CustomSkeleton::File { .. } => {
            let model = custom_fixed_model(m, c.grid_cells, c.lambdas[0])?;
            if c.engines.contains(&Engine::Fixed) {
                sweep.analytic(Engine::Fixed, |x| Ok(fixed_fractions(&model.with_lambda(x[0])?, c)))?;
            }
            if c.engines.contains(&Engine::Mc) {
                let all = vec![(0..c.lambdas.len()).collect()];
                let source = FixedLawSource(&model);
                sweep.monte_carlo(&all, |_| Ok(monte_carlo_sweep(&source, &c.lambdas, c.trials, c.seed, TrialShock::FromBuffers)?))?;
            }
        }
    }
    sweep.finish(out)
}

/// Runs every sweep point of the configured experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults, HarnessError> {
    config.validate()?;
    let mut out = ExperimentResults { config: config.clone(), tables: Vec::new(), skipped: Vec::new(), mc: Vec::new() };
    match config.experiment {
        ExperimentId::Exp1 => run_exp1(config, &mut out)?,
        ExperimentId::Exp2a => run_exp2a(config, &mut out)?,
        ExperimentId::Exp2b => run_exp2b(config, &mut out)?,
        ExperimentId::Exp3a | ExperimentId::Exp3b => run_exp3(config, &mut out)?,
        ExperimentId::Custom => run_custom(config, &mut out)?,
    }
    Ok(out)
}

/// Runs the experiment and writes all result files to `config.out`.
pub fn run_and_write(config: &ExperimentConfig) -> Result<ExperimentResults, HarnessError> {
    let results = run_experiment(config)?;
    super::output::write_results(&results, Path::new(&config.out))?;
    Ok(results)
}
