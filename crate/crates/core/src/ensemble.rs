//! Type-indexed buffer and exposure laws shared by the engines.
//!
//! Node laws are indexed by the node type `(j, k)`, exposure laws by the
//! edge type `(k, j)`. Laws are reference counted so types with identical
//! laws share one table.

use std::sync::Arc;

use thiserror::Error;

use crate::dists::{BufferLaw, DistError, ExposureLaw, Grid};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("no {what} law for type ({a}, {b})")]
    MissingLaw { what: &'static str, a: usize, b: usize },
    #[error("law for type ({a}, {b}) is on {found:?}, ensemble grid is {expected:?}")]
    GridMismatch { a: usize, b: usize, found: Grid, expected: Grid },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Default buffer, stress buffer and exposure laws per type.
///
/// The stress law of type `(j, k)` is the law of `Sigma` given that the node
/// is not initially defaulted: its atom at zero is `q0 / (1 - p0)`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    grid: Grid,
    k_max: usize,
    default: Vec<Option<Arc<BufferLaw>>>,
    stress: Vec<Option<Arc<BufferLaw>>>,
    exposure: Vec<Option<Arc<ExposureLaw>>>,
}

/// Builder output for one type; `None` leaves the type unspecified.
pub type NodeLaws = Option<(Arc<BufferLaw>, Arc<BufferLaw>)>;

impl Ensemble {
    /// Fills every type up to `k_max` from the two callbacks.
    pub fn build<N, E>(grid: Grid, k_max: usize, mut node: N, mut edge: E) -> Result<Self, EnsembleError>
    where
        N: FnMut(usize, usize) -> Result<NodeLaws, EnsembleError>,
        E: FnMut(usize, usize) -> Result<Option<Arc<ExposureLaw>>, EnsembleError>,
    {
        let d = k_max + 1;
        let mut default = vec![None; d * d];
        let mut stress = vec![None; d * d];
        let mut exposure = vec![None; d * d];
        for a in 0..d {
            for b in 0..d {
                if let Some((dl, sl)) = node(a, b)? {
                    for law in [&dl, &sl] {
                        if law.grid() != grid {
                            return Err(EnsembleError::GridMismatch { a, b, found: law.grid(), expected: grid });
                        }
                    }
                    default[a * d + b] = Some(dl);
                    stress[a * d + b] = Some(sl);
                }
                if let Some(w) = edge(a, b)? {
                    if w.grid() != grid {
                        return Err(EnsembleError::GridMismatch { a, b, found: w.grid(), expected: grid });
                    }
                    exposure[a * d + b] = Some(w);
                }
            }
        }
        Ok(Ensemble { grid, k_max, default, stress, exposure })
    }

    /// The same three laws for every type.
    pub fn uniform(k_max: usize, default: BufferLaw, stress: BufferLaw, exposure: ExposureLaw) -> Result<Self, EnsembleError> {
        let (d, s, w) = (Arc::new(default), Arc::new(stress), Arc::new(exposure));
        let grid = d.grid();
        Self::build(grid, k_max, |_, _| Ok(Some((d.clone(), s.clone()))), |_, _| Ok(Some(w.clone())))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn index(&self, a: usize, b: usize) -> Option<usize> {
        (a <= self.k_max && b <= self.k_max).then(|| a * (self.k_max + 1) + b)
    }

    pub fn default_law(&self, j: usize, k: usize) -> Result<&BufferLaw, EnsembleError> {
        self.index(j, k)
            .and_then(|i| self.default[i].as_deref())
            .ok_or(EnsembleError::MissingLaw { what: "default buffer", a: j, b: k })
    }

    pub fn stress_law(&self, j: usize, k: usize) -> Result<&BufferLaw, EnsembleError> {
        self.index(j, k)
            .and_then(|i| self.stress[i].as_deref())
            .ok_or(EnsembleError::MissingLaw { what: "stress buffer", a: j, b: k })
    }

    pub fn exposure_law(&self, k: usize, j: usize) -> Result<&ExposureLaw, EnsembleError> {
        self.index(k, j)
            .and_then(|i| self.exposure[i].as_deref())
            .ok_or(EnsembleError::MissingLaw { what: "exposure", a: k, b: j })
    }
}

/// Atom at zero of the stress law given not initially defaulted.
pub fn conditional_stress_atom(p0: f64, q0: f64) -> f64 {
    if p0 >= 1.0 {
        0.0
    } else {
        (q0 / (1.0 - p0)).clamp(0.0, 1.0)
    }
}
