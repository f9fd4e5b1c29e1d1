use rustfft::num_complex::Complex64;

use super::fft::{forward_in_place, inverse_in_place, real_pair_spectra, real_spectrum};
use super::kernel;
use super::{BufferLaw, DistError, GridPmf, ALIAS_TOLERANCE};

/// Linear convolution of two PMFs on the same grid.
///
/// Computed through a zero-padded FFT so the mass that a circular transform
/// would wrap around is measured exactly; more than [`ALIAS_TOLERANCE`] of it
/// is rejected.
pub fn convolve(a: &GridPmf, b: &GridPmf) -> Result<GridPmf, DistError> {
    a.check_same_grid(b)?;
    let m = a.grid.cells();
    let (fa, fb) = real_pair_spectra(&a.masses, &b.masses, 2 * m);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inverse_in_place(&mut prod);
    let overflow: f64 = prod[m..].iter().map(|z| z.re.max(0.0)).sum();
    if overflow > ALIAS_TOLERANCE {
        return Err(DistError::Aliasing { mass: overflow });
    }
    let masses = prod[..m].iter().map(|z| z.re.max(0.0)).collect();
    Ok(GridPmf::from_raw(a.grid, masses))
}

/// Convolution where mass at or beyond the last cell piles up in it.
///
/// The last cell then means "at least `(M - 1) h`", which keeps threshold
/// comparisons against buffers inside the grid exact.
pub fn convolve_saturating(a: &GridPmf, b: &GridPmf) -> Result<GridPmf, DistError> {
    a.check_same_grid(b)?;
    Ok(GridPmf::from_raw(a.grid, kernel::sat_convolve(&a.masses, &b.masses)))
}

/// `n`-fold convolution power, evaluated as a componentwise power of the
/// spectrum.
pub fn conv_power(a: &GridPmf, n: usize) -> Result<GridPmf, DistError> {
    let grid = a.grid;
    let m = grid.cells();
    match n {
        0 => return Ok(GridPmf::dirac(grid)),
        1 => return Ok(a.clone()),
        _ => {}
    }
    let end = a.support_end(0.0).unwrap_or(0);
    if end.saturating_mul(n) >= m {
        // The sum can leave the grid; measure how much of it does.
        let mut padded = a.masses.clone();
        padded.resize(2 * m, 0.0);
        let exact = kernel::sat_power(&padded, n);
        let overflow: f64 = exact[m..].iter().sum();
        if overflow > ALIAS_TOLERANCE {
            return Err(DistError::Aliasing { mass: overflow });
        }
    }
    let mut spec = real_spectrum(&a.masses, m);
    let exp = i32::try_from(n).map_err(|_| DistError::InvalidParameter(format!("power {n} too large")))?;
    for z in spec.iter_mut() {
        *z = z.powi(exp);
    }
    inverse_in_place(&mut spec);
    Ok(GridPmf::from_raw(grid, spec.iter().map(|z| z.re.max(0.0)).collect()))
}

/// Law of `factor * X` for `factor` in `[0, 1]`.
///
/// Mass at cell `i` lands at the real position `factor * i` and is split
/// linearly between the two bracketing cells, which preserves total mass and
/// the mean. `factor = 0` yields the unit atom at zero.
pub fn scale_pmf(a: &GridPmf, factor: f64) -> Result<GridPmf, DistError> {
    if !(0.0..=1.0).contains(&factor) {
        return Err(DistError::InvalidParameter(format!("scale factor {factor} outside [0, 1]")));
    }
    Ok(GridPmf::from_raw(a.grid, scale_masses(&a.masses, factor)))
}

pub(crate) fn scale_masses(masses: &[f64], factor: f64) -> Vec<f64> {
    let mut out = vec![0.0; masses.len()];
    if factor == 0.0 {
        out[0] = masses.iter().sum();
        return out;
    }
    if factor == 1.0 {
        out.copy_from_slice(masses);
        return out;
    }
    for (i, &m) in masses.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let x = factor * i as f64;
        let lo = x.floor();
        let frac = x - lo;
        let lo = lo as usize;
        if frac == 0.0 {
            out[lo] += m;
        } else {
            out[lo] += m * (1.0 - frac);
            out[lo + 1] += m * frac;
        }
    }
    out
}

/// `P[shock >= buffer]` for independent shock and buffer.
///
/// Ties count as a breach: the buffer CDF is inclusive at each cell.
pub fn threshold_prob(buffer: &BufferLaw, shock: &GridPmf) -> Result<f64, DistError> {
    if buffer.grid() != shock.grid() {
        return Err(DistError::GridMismatch { left: buffer.grid(), right: shock.grid() });
    }
    Ok(kernel::breach_inner(buffer.cdf(), shock.masses()))
}

/// Frequency-domain form of [`threshold_prob`]: `(1/M) <F(cdf), shock_hat>`.
///
/// `shock_hat` is the length-`M` spectrum of the shock PMF, for instance a
/// componentwise power of a mixture spectrum.
pub fn threshold_prob_spectral(buffer: &BufferLaw, shock_hat: &[Complex64]) -> Result<f64, DistError> {
    let m = buffer.grid().cells();
    if shock_hat.len() != m {
        return Err(DistError::InvalidParameter(format!(
            "spectrum has {} coefficients, grid has {m} cells",
            shock_hat.len()
        )));
    }
    let mut cdf_hat: Vec<Complex64> = buffer.cdf().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    forward_in_place(&mut cdf_hat);
    let acc: Complex64 = cdf_hat.iter().zip(shock_hat).map(|(d, s)| d.conj() * s).sum();
    Ok(acc.re / m as f64)
}
