use super::lognormal::{discretize_lognormal, discretize_lognormal_folded};
use super::{DistError, Grid, GridPmf};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

fn normalized(pmf: &GridPmf, what: &str) -> Result<Vec<f64>, DistError> {
    let total = pmf.total();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(DistError::InvalidMass(format!("{what} has total mass {total}, expected 1")));
    }
    Ok(pmf.masses().iter().map(|m| m / total).collect())
}

fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Law of a non-negative buffer: an atom at zero (initially breached) plus a
/// distribution over strictly positive cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferLaw {
    atom0: f64,
    pmf: GridPmf,
    cdf: Vec<f64>,
}

impl BufferLaw {
    /// Combines `atom0` with the law of the buffer conditional on being
    /// positive. Conditional mass found at cell 0 is a positive buffer below
    /// half a grid step and is moved up to cell 1.
    pub fn new(atom0: f64, conditional: &GridPmf) -> Result<Self, DistError> {
        if !(0.0..=1.0).contains(&atom0) {
            return Err(DistError::InvalidParameter(format!("atom at zero {atom0} outside [0, 1]")));
        }
        let grid = conditional.grid();
        if grid.cells() < 2 {
            return Err(DistError::InvalidParameter("buffer grid needs at least two cells".into()));
        }
        let mut masses = normalized(conditional, "buffer law")?;
        let low = std::mem::take(&mut masses[0]);
        masses[1] += low;
        for m in masses.iter_mut() {
            *m *= 1.0 - atom0;
        }
        masses[0] = atom0;
        let pmf = GridPmf::from_raw(grid, masses);
        let cdf = pmf.cdf();
        Ok(BufferLaw { atom0, pmf, cdf })
    }

    /// Buffer equal to `value` unless initially breached.
    pub fn deterministic(atom0: f64, value: f64, grid: Grid) -> Result<Self, DistError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(DistError::InvalidParameter(format!("buffer value {value} must be positive")));
        }
        let cell = grid.cell_of(value).max(1);
        if value > grid.span() + 0.5 * grid.step() {
            return Err(DistError::TailTooHeavy { mass: 1.0, limit: super::FOLD_TOLERANCE });
        }
        Self::new(atom0, &GridPmf::point(grid, cell))
    }

    /// Log-normal positive part with the strict tail guard.
    pub fn lognormal(atom0: f64, mean: f64, std: f64, grid: Grid) -> Result<Self, DistError> {
        let d = discretize_lognormal(mean, std, grid)?;
        Self::new(atom0, &d.pmf)
    }

    /// Log-normal positive part whose tail is folded into the last cell.
    ///
    /// Returns the folded mass alongside the law.
    pub fn lognormal_folded(atom0: f64, mean: f64, std: f64, grid: Grid) -> Result<(Self, f64), DistError> {
        let d = discretize_lognormal_folded(mean, std, grid)?;
        Ok((Self::new(atom0, &d.pmf)?, d.folded_tail))
    }

    pub fn atom0(&self) -> f64 {
        self.atom0
    }

    pub fn grid(&self) -> Grid {
        self.pmf.grid()
    }

    /// Full law including the atom at cell 0.
    pub fn pmf(&self) -> &GridPmf {
        &self.pmf
    }

    /// Positive part only; its total is `1 - atom0`.
    pub fn density(&self) -> GridPmf {
        let mut masses = self.pmf.masses().to_vec();
        masses[0] = 0.0;
        GridPmf::from_raw(self.grid(), masses)
    }

    /// Inclusive CDF, `cdf[i] = P[buffer <= i h]`.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Highest cell with positive mass.
    pub fn support_end(&self) -> usize {
        self.pmf.support_end(0.0).unwrap_or(0)
    }

    /// Cell drawn by inverse transform of a uniform `u` in `[0, 1)`.
    pub fn sample_cell(&self, u: f64) -> usize {
        inverse_cdf(&self.cdf, u)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.mean()
    }
}

/// Law of a strictly positive interbank exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureLaw {
    pmf: GridPmf,
    cdf: Vec<f64>,
    folded_tail: f64,
}

impl ExposureLaw {
    /// Mass at cell 0 is moved to cell 1: exposures are never zero.
    pub fn new(pmf: &GridPmf) -> Result<Self, DistError> {
        let grid = pmf.grid();
        if grid.cells() < 2 {
            return Err(DistError::InvalidParameter("exposure grid needs at least two cells".into()));
        }
        let mut masses = normalized(pmf, "exposure law")?;
        let low = std::mem::take(&mut masses[0]);
        masses[1] += low;
        let pmf = GridPmf::from_raw(grid, masses);
        let cdf = pmf.cdf();
        Ok(ExposureLaw { pmf, cdf, folded_tail: 0.0 })
    }

    pub fn deterministic(value: f64, grid: Grid) -> Result<Self, DistError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(DistError::InvalidParameter(format!("exposure {value} must be positive")));
        }
        Self::new(&GridPmf::point(grid, grid.cell_of(value).max(1)))
    }

    /// Log-normal exposure; tail mass beyond the grid is folded into the last
    /// cell and recorded in [`ExposureLaw::folded_tail`].
    pub fn lognormal(mean: f64, std: f64, grid: Grid) -> Result<Self, DistError> {
        let d = discretize_lognormal_folded(mean, std, grid)?;
        let mut law = Self::new(&d.pmf)?;
        law.folded_tail = d.folded_tail;
        Ok(law)
    }

    pub fn grid(&self) -> Grid {
        self.pmf.grid()
    }

    pub fn pmf(&self) -> &GridPmf {
        &self.pmf
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn folded_tail(&self) -> f64 {
        self.folded_tail
    }

    pub fn sample_cell(&self, u: f64) -> usize {
        inverse_cdf(&self.cdf, u)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.mean()
    }
}
