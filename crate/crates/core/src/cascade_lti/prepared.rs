//! Model data reduced to a working length for the cascade mapping.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dists::kernel::saturate;
use crate::dists::ops::scale_masses;
use crate::dists::ExposureLaw;

/// An exposure law and its two stress-scaled versions, all saturated at the
/// working length.
#[derive(Debug)]
pub(crate) struct ScaledExposure {
    pub full: Vec<f64>,
    /// `(1 - lambda) * Omega`.
    pub reduced: Vec<f64>,
    /// `lambda * Omega`.
    pub recalled: Vec<f64>,
}

/// Deduplicates scaled exposures by law identity.
#[derive(Default)]
pub(crate) struct ExposureCache {
    map: HashMap<usize, Arc<ScaledExposure>>,
}

impl ExposureCache {
    pub fn get(&mut self, law: &ExposureLaw, lambda: f64, len: usize) -> Arc<ScaledExposure> {
        let key = law as *const ExposureLaw as usize;
        self.map
            .entry(key)
            .or_insert_with(|| {
                let m = law.pmf().masses();
                Arc::new(ScaledExposure {
                    full: saturate(m, len),
                    reduced: saturate(&scale_masses(m, 1.0 - lambda), len),
                    recalled: saturate(&scale_masses(m, lambda), len),
                })
            })
            .clone()
    }
}

/// `sum_i weights_i * parts_i` accumulated into `out`.
pub(crate) fn accumulate(out: &mut [f64], weight: f64, part: &[f64]) {
    if weight == 0.0 {
        return;
    }
    for (o, p) in out.iter_mut().zip(part) {
        *o += weight * p;
    }
}
