//! Effective experiment configuration: per-experiment defaults, overlaid by
//! a TOML file, overlaid by command-line values.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::eu::EuCalibration;
use super::models::Exp2bLaws;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Exp1,
    Exp2a,
    Exp2b,
    Exp3a,
    Exp3b,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] =
        [Self::Exp1, Self::Exp2a, Self::Exp2b, Self::Exp3a, Self::Exp3b, Self::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2a => "exp2a",
            Self::Exp2b => "exp2b",
            Self::Exp3a => "exp3a",
            Self::Exp3b => "exp3b",
            Self::Custom => "custom",
        }
    }

    fn on_eu_network(self) -> bool {
        matches!(self, Self::Exp3a | Self::Exp3b)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

/// Computation engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Random-skeleton cascade mapping.
    Lti,
    /// Fixed-skeleton cascade mapping.
    Fixed,
    /// Monte Carlo simulation.
    Mc,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Lti => "lti",
            Engine::Fixed => "fixed",
            Engine::Mc => "mc",
        }
    }
}

impl FromStr for Engine {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lti" => Ok(Engine::Lti),
            "fixed" => Ok(Engine::Fixed),
            "mc" => Ok(Engine::Mc),
            _ => Err(HarnessError::Config(format!("unknown engine {s:?}"))),
        }
    }
}

/// Log-normal law with an atom at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub mean: f64,
    #[serde(default)]
    pub std: f64,
    #[serde(default)]
    pub atom: f64,
}

/// Exposure of edge type `(k, j)`: log-normal with mean
/// `mean * j^in_exponent * k^out_exponent` and the given coefficient of
/// variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureSpec {
    pub mean: f64,
    #[serde(default)]
    pub cv: f64,
    #[serde(default)]
    pub in_exponent: f64,
    #[serde(default)]
    pub out_exponent: f64,
}

/// Skeleton of a custom experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CustomSkeleton {
    Poisson { n: usize, z: f64 },
    /// A skeleton file; node and edge law files replace the law specs for
    /// the fixed engine when given.
    File { path: PathBuf, node_laws: Option<PathBuf>, edge_laws: Option<PathBuf> },
}

/// Model specification of the `custom` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub skeleton: CustomSkeleton,
    pub default: LawSpec,
    pub stress: LawSpec,
    pub exposure: ExposureSpec,
}

/// Full configuration of one run; every field is explicit so the file
/// written next to the results reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub engines: Vec<Engine>,
    /// Stress responses swept (exp1, exp2b, exp3a, custom).
    pub lambdas: Vec<f64>,
    /// Stress response held fixed (exp2a, exp3b).
    pub lambda: f64,
    /// Default buffers swept in exp2a.
    pub deltas: Vec<f64>,
    /// Stress buffers swept in exp2a.
    pub sigmas: Vec<f64>,
    /// Stress-buffer fractions swept in exp3b.
    pub sigma_fractions: Vec<f64>,
    /// Mean degrees swept in exp2b.
    pub zs: Vec<f64>,
    /// Default and stress buffers of exp1 and exp2a.
    pub delta: f64,
    pub sigma: f64,
    /// Default-buffer fraction of exp3b.
    pub delta_fraction: f64,
    pub n: usize,
    pub z: f64,
    pub trials: usize,
    pub seed: u64,
    /// Seed of the EU skeleton.
    pub network_seed: u64,
    pub grid_cells: usize,
    /// Degree cap; zero picks one from the mean degree.
    pub k_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub exp2b: Exp2bLaws,
    pub eu: EuCalibration,
    pub custom: Option<CustomModel>,
    pub out: PathBuf,
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        (x * 1e9).round() / 1e9
    }).collect()
}

impl ExperimentConfig {
    /// Desk-scale defaults of each experiment.
    pub fn defaults(id: ExperimentId) -> Self {
        let mut c = ExperimentConfig {
            experiment: id,
            engines: vec![Engine::Lti, Engine::Mc],
            lambdas: grid(0.0, 1.0, 12),
            lambda: 0.5,
            deltas: grid(0.03, 0.05, 8),
            sigmas: grid(0.01, 0.05, 8),
            sigma_fractions: grid(0.05, 1.0, 19),
            zs: grid(1.0, 15.0, 14),
            delta: 0.04,
            sigma: 0.035,
            delta_fraction: 0.1,
            n: 5000,
            z: 10.0,
            trials: 200,
            seed: 42,
            network_seed: 1,
            grid_cells: 4096,
            k_max: 0,
            tol: 1e-8,
            max_iter: 500,
            exp2b: Exp2bLaws::default(),
            eu: EuCalibration::default(),
            custom: None,
            out: PathBuf::from("results").join(id.name()),
        };
        match id {
            ExperimentId::Exp1 | ExperimentId::Exp2a | ExperimentId::Custom => {}
            ExperimentId::Exp2b => {
                c.engines = vec![Engine::Lti];
                c.lambdas = grid(0.0, 1.0, 4);
                c.grid_cells = 2048;
            }
            ExperimentId::Exp3a | ExperimentId::Exp3b => {
                c.engines = vec![Engine::Fixed, Engine::Mc];
                c.lambdas = grid(0.0, 1.0, 10);
                c.lambda = 0.7;
                c.trials = 500;
                c.grid_cells = 2048;
            }
        }
        c
    }

    /// Defaults of `id` overlaid by each TOML layer in turn.
    pub fn resolve(id: ExperimentId, layers: &[toml::Table]) -> Result<Self, HarnessError> {
        let base = toml::Table::try_from(Self::defaults(id)).map_err(|e| HarnessError::Config(e.to_string()))?;
        let merged = layers.iter().fold(base, |acc, layer| merge(acc, layer));
        let mut config: ExperimentConfig =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        if config.experiment != id {
            return Err(HarnessError::Config(format!(
                "configuration names experiment {} but {id} was requested",
                config.experiment
            )));
        }
        config.engines.sort();
        config.engines.dedup();
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.engines.is_empty() {
            return bad("no engine selected".into());
        }
        let allowed: &[Engine] = match self.experiment {
            ExperimentId::Exp3a | ExperimentId::Exp3b => &[Engine::Fixed, Engine::Mc],
            ExperimentId::Custom => match self.custom.as_ref().map(|c| &c.skeleton) {
                Some(CustomSkeleton::File { .. }) => &[Engine::Fixed, Engine::Mc],
                Some(CustomSkeleton::Poisson { .. }) => &[Engine::Lti, Engine::Mc],
                None => return bad("the custom experiment needs a [custom] model".into()),
            },
            _ => &[Engine::Lti, Engine::Mc],
        };
        if let Some(e) = self.engines.iter().find(|e| !allowed.contains(e)) {
            return bad(format!("engine {} is not available for {}", e.name(), self.experiment));
        }
        let axes: &[(&str, &[f64])] = match self.experiment {
            ExperimentId::Exp1 | ExperimentId::Exp3a | ExperimentId::Custom => &[("lambdas", &self.lambdas)],
            ExperimentId::Exp2a => &[("deltas", &self.deltas), ("sigmas", &self.sigmas)],
            ExperimentId::Exp2b => &[("zs", &self.zs), ("lambdas", &self.lambdas)],
            ExperimentId::Exp3b => &[("sigma_fractions", &self.sigma_fractions)],
        };
        for (name, values) in axes {
            if values.is_empty() {
                return bad(format!("sweep axis {name} is empty"));
            }
            if values.iter().any(|x| !x.is_finite()) {
                return bad(format!("sweep axis {name} has a non-finite value"));
            }
        }
        let unit = |name: &str, x: f64| if (0.0..=1.0).contains(&x) { Ok(()) } else { bad(format!("{name} = {x} outside [0, 1]")) };
        for &l in self.lambdas.iter().chain([self.lambda].iter()) {
            unit("lambda", l)?;
        }
        if self.experiment.on_eu_network() {
            for &f in &self.sigma_fractions {
                if f <= 0.0 {
                    return bad(format!("stress-buffer fraction {f} must be positive"));
                }
            }
            if self.delta_fraction <= 0.0 {
                return bad("delta_fraction must be positive".into());
            }
        }
        if self.zs.iter().any(|&z| z <= 0.0) || self.z <= 0.0 {
            return bad("mean degrees must be positive".into());
        }
        if self.grid_cells < 16 {
            return bad(format!("grid_cells = {} is too small", self.grid_cells));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol must be positive and max_iter at least one".into());
        }
        if self.engines.contains(&Engine::Mc) && self.trials == 0 {
            return bad("mc needs at least one trial".into());
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        Ok(())
    }
}

/// Recursive overlay: tables merge key by key, everything else is replaced.
fn merge(mut base: toml::Table, layer: &toml::Table) -> toml::Table {
    for (key, value) in layer {
        match (base.get_mut(key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(l)) => {
                let merged = merge(std::mem::take(b), l);
                *b = merged;
            }
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
    base
}

/// Reads a TOML configuration layer.
pub fn read_config_layer(path: &std::path::Path) -> Result<toml::Table, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    text.parse::<toml::Table>().map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(text: &str) -> toml::Table {
        text.parse().unwrap()
    }

    #[test]
    fn later_layers_win() {
        let file = layer("trials = 10\nseed = 5\n[eu]\na1 = 9.0\n");
        let flags = layer("trials = 3\n");
        let c = ExperimentConfig::resolve(ExperimentId::Exp1, &[file, flags]).unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.seed, 5);
        assert_eq!(c.eu.a1, 9.0);
        assert_eq!(c.eu.b1, 0.9);
    }

    #[test]
    fn rejects_bad_configurations() {
        let cases = [
            (ExperimentId::Exp1, "lambdas = []"),
            (ExperimentId::Exp3a, "engines = [\"lti\"]"),
            (ExperimentId::Exp1, "engines = [\"fixed\"]"),
            (ExperimentId::Exp1, "lambdas = [1.5]"),
            (ExperimentId::Exp1, "unknown_key = 1"),
            (ExperimentId::Custom, "trials = 1"),
            (ExperimentId::Exp1, "experiment = \"exp2a\""),
        ];
        for (id, text) in cases {
            assert!(matches!(ExperimentConfig::resolve(id, &[layer(text)]), Err(HarnessError::Config(_))), "{text}");
        }
    }

    #[test]
    fn lti_only_needs_no_trials() {
        let c = ExperimentConfig::resolve(ExperimentId::Exp1, &[layer("engines = [\"lti\"]\ntrials = 0")]).unwrap();
        assert_eq!(c.engines, vec![Engine::Lti]);
    }

    #[test]
    fn default_grids() {
        let c = ExperimentConfig::defaults(ExperimentId::Exp1);
        assert_eq!(c.lambdas.len(), 13);
        assert_eq!(c.lambdas[6], 0.5);
        let a = ExperimentConfig::defaults(ExperimentId::Exp2a);
        assert!(a.deltas.contains(&0.04) && a.deltas.contains(&0.045));
    }

    #[test]
    fn custom_model_round_trip() {
        let text = r#"
            [custom]
            skeleton = { kind = "poisson", n = 1000, z = 4.0 }
            default = { mean = 0.04, atom = 0.01 }
            stress = { mean = 0.035 }
            exposure = { mean = 0.2, cv = 0.383, in_exponent = -1.0 }
        "#;
        let c = ExperimentConfig::resolve(ExperimentId::Custom, &[layer(text)]).unwrap();
        let again = ExperimentConfig::resolve(ExperimentId::Custom, &[toml::Table::try_from(&c).unwrap()]).unwrap();
        assert_eq!(c, again);
    }
}
