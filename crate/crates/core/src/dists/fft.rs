use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::DistError;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Forward DFT, `a_hat[k] = sum_l exp(-2 pi i k l / M) a[l]`.
pub fn fft(values: &[Complex64]) -> Result<Vec<Complex64>, DistError> {
    if !values.len().is_power_of_two() {
        return Err(DistError::NotPowerOfTwo(values.len()));
    }
    let mut buf = values.to_vec();
    forward_in_place(&mut buf);
    Ok(buf)
}

/// Inverse DFT including the `1/M` normalization.
pub fn ifft(values: &[Complex64]) -> Result<Vec<Complex64>, DistError> {
    if !values.len().is_power_of_two() {
        return Err(DistError::NotPowerOfTwo(values.len()));
    }
    let mut buf = values.to_vec();
    inverse_in_place(&mut buf);
    Ok(buf)
}

pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Normalized inverse transform.
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Spectra of two real sequences from a single complex transform.
///
/// Both inputs are zero-padded to `len` (a power of two).
pub(crate) fn real_pair_spectra(a: &[f64], b: &[f64], len: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z = vec![Complex64::new(0.0, 0.0); len];
    for (i, &x) in a.iter().enumerate() {
        z[i].re = x;
    }
    for (i, &y) in b.iter().enumerate() {
        z[i].im = y;
    }
    forward_in_place(&mut z);
    let mut fa = vec![Complex64::new(0.0, 0.0); len];
    let mut fb = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..len {
        let zk = z[k];
        let zc = z[(len - k) % len].conj();
        fa[k] = (zk + zc) * 0.5;
        // (zk - zc) / (2i)
        let d = zk - zc;
        fb[k] = Complex64::new(d.im * 0.5, -d.re * 0.5);
    }
    (fa, fb)
}

pub(crate) fn real_spectrum(a: &[f64], len: usize) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); len];
    for (i, &x) in a.iter().enumerate() {
        z[i].re = x;
    }
    forward_in_place(&mut z);
    z
}
