//! Saturating convolution kernels on raw mass slices.
//!
//! A saturated sequence of length `len` stores `P[X = i]` for `i < len - 1`
//! and `P[X >= len - 1]` in its top cell. Because all summands are
//! non-negative, `min(X + Y, c) = min(min(X, c) + min(Y, c), c)`, so sums of
//! saturated variables stay exact below the top cell. Threshold
//! probabilities against buffers supported below the top cell are therefore
//! computed without any aliasing.

use super::fft::{inverse_in_place, real_pair_spectra, real_spectrum};

/// Folds every cell at or above `len - 1` into the top cell.
pub(crate) fn saturate(a: &[f64], len: usize) -> Vec<f64> {
    assert!(len >= 1);
    let mut out = vec![0.0; len];
    if a.len() <= len {
        out[..a.len()].copy_from_slice(a);
    } else {
        out[..len - 1].copy_from_slice(&a[..len - 1]);
        out[len - 1] = a[len - 1..].iter().sum();
    }
    out
}

fn effective_len(a: &[f64]) -> usize {
    a.iter().rposition(|&m| m != 0.0).map_or(0, |i| i + 1)
}

fn direct_linear(a: &[f64], b: &[f64], limit: usize) -> Vec<f64> {
    let mut c = vec![0.0; limit];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let upper = (limit - i).min(b.len());
        for (cj, &y) in c[i..i + upper].iter_mut().zip(&b[..upper]) {
            *cj += x * y;
        }
    }
    c
}

fn use_direct(ea: usize, eb: usize, fft_len: usize) -> bool {
    let small = ea.min(eb);
    if small <= 24 {
        return true;
    }
    let log = fft_len.trailing_zeros().max(1) as usize;
    ea * eb <= 6 * fft_len * log
}

/// Saturating convolution; both inputs must have length `len`.
pub(crate) fn sat_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    assert_eq!(len, b.len(), "saturating convolution needs equal lengths");
    let total = a.iter().sum::<f64>() * b.iter().sum::<f64>();
    if len == 1 {
        return vec![total];
    }
    let body = len - 1;
    let ea = effective_len(&a[..body]);
    let eb = effective_len(&b[..body]);
    let mut out = vec![0.0; len];
    if ea > 0 && eb > 0 {
        let lin = ea + eb - 1;
        let limit = lin.min(body);
        let fft_len = lin.next_power_of_two();
        let c = if use_direct(ea, eb, fft_len) {
            direct_linear(&a[..ea], &b[..eb], limit)
        } else {
            let (fa, fb) = real_pair_spectra(&a[..ea], &b[..eb], fft_len);
            let mut prod: Vec<_> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
            inverse_in_place(&mut prod);
            prod[..limit].iter().map(|z| z.re.max(0.0)).collect()
        };
        out[..limit].copy_from_slice(&c);
    }
    let body_mass: f64 = out[..body].iter().sum();
    out[body] = (total - body_mass).max(0.0);
    out
}

fn sat_square(a: &[f64]) -> Vec<f64> {
    let len = a.len();
    let total = a.iter().sum::<f64>().powi(2);
    if len == 1 {
        return vec![total];
    }
    let body = len - 1;
    let ea = effective_len(&a[..body]);
    let mut out = vec![0.0; len];
    if ea > 0 {
        let lin = 2 * ea - 1;
        let limit = lin.min(body);
        let fft_len = lin.next_power_of_two();
        let c = if use_direct(ea, ea, fft_len) {
            direct_linear(&a[..ea], &a[..ea], limit)
        } else {
            let mut spec = real_spectrum(&a[..ea], fft_len);
            for z in spec.iter_mut() {
                *z = *z * *z;
            }
            inverse_in_place(&mut spec);
            spec[..limit].iter().map(|z| z.re.max(0.0)).collect()
        };
        out[..limit].copy_from_slice(&c);
    }
    let body_mass: f64 = out[..body].iter().sum();
    out[body] = (total - body_mass).max(0.0);
    out
}

/// `n`-fold saturating convolution power; `n = 0` gives the unit atom at 0.
pub(crate) fn sat_power(a: &[f64], n: usize) -> Vec<f64> {
    let len = a.len();
    let mut result: Option<Vec<f64>> = None;
    let mut base = a.to_vec();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => sat_convolve(&r, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = sat_square(&base);
        }
    }
    result.unwrap_or_else(|| {
        let mut d = vec![0.0; len];
        d[0] = 1.0;
        d
    })
}

/// `sum_i shock[i] * cdf[i]`, i.e. `P[shock >= buffer]` for an inclusive buffer CDF.
///
/// Cells of `shock` beyond the CDF's length see the CDF's last value.
pub(crate) fn breach_inner(cdf: &[f64], shock: &[f64]) -> f64 {
    let n = cdf.len().min(shock.len());
    let mut acc: f64 = cdf[..n].iter().zip(&shock[..n]).map(|(c, s)| c * s).sum();
    if shock.len() > n {
        let last = cdf.last().copied().unwrap_or(1.0);
        acc += last * shock[n..].iter().sum::<f64>();
    }
    acc
}
