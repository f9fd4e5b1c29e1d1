use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use super::{DistError, Grid, GridPmf, FOLD_TOLERANCE};

/// Log-normal law parameterized by its own mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormal {
    pub mean: f64,
    pub std: f64,
}

impl LogNormal {
    pub fn new(mean: f64, std: f64) -> Result<Self, DistError> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(DistError::InvalidParameter(format!("log-normal mean {mean} must be positive")));
        }
        if !(std.is_finite() && std >= 0.0) {
            return Err(DistError::InvalidParameter(format!("log-normal std {std} must be non-negative")));
        }
        Ok(LogNormal { mean, std })
    }

    /// Parameters `(mu, sigma)` of the underlying normal.
    pub fn normal_params(&self) -> (f64, f64) {
        let cv2 = (self.std / self.mean).powi(2);
        let sigma2 = cv2.ln_1p();
        (self.mean.ln() - 0.5 * sigma2, sigma2.sqrt())
    }

    /// Law of `c * X`.
    pub fn scaled(&self, c: f64) -> LogNormal {
        LogNormal { mean: self.mean * c, std: self.std * c }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (mu, sigma) = self.normal_params();
        if sigma == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        standard_normal_cdf((x.ln() - mu) / sigma)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let (mu, sigma) = self.normal_params();
        if sigma == 0.0 {
            return self.mean;
        }
        let z = StdNormal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p);
        (mu + sigma * z).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (mu, sigma) = self.normal_params();
        if sigma == 0.0 {
            return self.mean;
        }
        let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
        (mu + sigma * z).exp()
    }
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// A discretized law together with the tail mass folded into its last cell.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub pmf: GridPmf,
    pub folded_tail: f64,
}

/// Discretizes a log-normal law with the given mean and standard deviation.
///
/// Cell `i` receives the probability of `((i - 1/2) h, (i + 1/2) h]`; the tail
/// beyond `(M - 1/2) h` is folded into the last cell and must stay below
/// [`FOLD_TOLERANCE`].
pub fn discretize_lognormal(mean: f64, std: f64, grid: Grid) -> Result<Discretized, DistError> {
    let d = discretize_lognormal_folded(mean, std, grid)?;
    if d.folded_tail > FOLD_TOLERANCE {
        return Err(DistError::TailTooHeavy { mass: d.folded_tail, limit: FOLD_TOLERANCE });
    }
    Ok(d)
}

/// Like [`discretize_lognormal`] but accepts any folded tail.
///
/// Used where the last cell is read as "at least this much", e.g. exposures
/// that exceed every buffer on the grid.
pub fn discretize_lognormal_folded(mean: f64, std: f64, grid: Grid) -> Result<Discretized, DistError> {
    let law = LogNormal::new(mean, std)?;
    let m = grid.cells();
    let h = grid.step();
    let mut masses = vec![0.0; m];
    let (_, sigma) = law.normal_params();
    if sigma == 0.0 {
        let x = mean / h;
        let folded = if x > (m as f64 - 0.5) { 1.0 } else { 0.0 };
        masses[grid.cell_of(mean)] = 1.0;
        return Ok(Discretized { pmf: GridPmf::from_raw(grid, masses), folded_tail: folded });
    }
    let mut prev = 0.0;
    for (i, slot) in masses.iter_mut().enumerate().take(m - 1) {
        let upper = law.cdf((i as f64 + 0.5) * h);
        *slot = (upper - prev).max(0.0);
        prev = upper;
    }
    let edge = law.cdf((m as f64 - 0.5) * h);
    masses[m - 1] = (1.0 - prev).max(0.0);
    let folded = (1.0 - edge).max(0.0);
    Ok(Discretized { pmf: GridPmf::from_raw(grid, masses), folded_tail: folded })
}
