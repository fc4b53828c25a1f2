//! Least-squares fit of `ω(h) ≈ ω_extr + C h^α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ALPHA_MIN: f64 = 0.25;
pub const ALPHA_MAX: f64 = 4.0;

const GRID_STEP: f64 = 0.01;
const GOLDEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub omega_extr: f64,
    pub c: f64,
    /// NaN when the data is degenerate.
    pub alpha: f64,
    /// `ω_i - (ω_extr + C h_i^α)`.
    pub residuals: Vec<f64>,
    pub rms: f64,
    /// All ω (numerically) equal, so α is not identifiable.
    pub degenerate: bool,
}

/// Exact inner solve for fixed α. Returns `(ω_extr, C, sse)`.
fn linear_part(h: &[f64], omega: &[f64], alpha: f64) -> (f64, f64, f64) {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|&v| v.powf(alpha)).collect();
    let xm = x.iter().sum::<f64>() / n;
    let wm = omega.iter().sum::<f64>() / n;
    let (mut sxx, mut sxw) = (0.0, 0.0);
    for (&xi, &wi) in x.iter().zip(omega) {
        sxx += (xi - xm) * (xi - xm);
        sxw += (xi - xm) * (wi - wm);
    }
    let c = if sxx > 0.0 { sxw / sxx } else { 0.0 };
    let w0 = wm - c * xm;
    let sse = x.iter().zip(omega).map(|(&xi, &wi)| (wi - w0 - c * xi).powi(2)).sum();
    (w0, c, sse)
}

/// Fits the rate model over `α ∈ [0.25, 4]`: a coarse grid scan picks the
/// bracket, golden-section search refines it.
pub fn fit_rate(h: &[f64], omega: &[f64]) -> Result<FitResult> {
    if h.len() != omega.len() {
        return Err(Error::Fit(format!("{} mesh sizes but {} frequencies", h.len(), omega.len())));
    }
    if h.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", h.len())));
    }
    if h.iter().chain(omega).any(|v| !v.is_finite()) || h.iter().any(|&v| v <= 0.0) {
        return Err(Error::Fit("mesh sizes must be positive and all values finite".into()));
    }
    if h.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Fit("mesh sizes must be strictly decreasing".into()));
    }

    let mean = omega.iter().sum::<f64>() / omega.len() as f64;
    let spread = omega.iter().fold(0.0f64, |m, &w| m.max((w - mean).abs()));
    if spread <= 1e-14 * mean.abs().max(1.0) {
        return Ok(FitResult {
            omega_extr: mean,
            c: 0.0,
            alpha: f64::NAN,
            residuals: omega.iter().map(|w| w - mean).collect(),
            rms: 0.0,
            degenerate: true,
        });
    }

    let sse = |a: f64| linear_part(h, omega, a).2;
    let steps = ((ALPHA_MAX - ALPHA_MIN) / GRID_STEP).round() as usize;
    let mut best = (ALPHA_MIN, f64::INFINITY);
    for k in 0..=steps {
        let a = ALPHA_MIN + k as f64 * GRID_STEP;
        let s = sse(a);
        if s < best.1 {
            best = (a, s);
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (best.0 - GRID_STEP).max(ALPHA_MIN);
    let mut hi = (best.0 + GRID_STEP).min(ALPHA_MAX);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = sse(x2);
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    // the grid point can still beat the refined one when the bracket sits on a boundary
    if sse(best.0) < sse(alpha) {
        alpha = best.0;
    }
    let (omega_extr, c, s) = linear_part(h, omega, alpha);
    let residuals = h.iter().zip(omega).map(|(&hi, &wi)| wi - omega_extr - c * hi.powf(alpha)).collect();
    Ok(FitResult {
        omega_extr,
        c,
        alpha,
        residuals,
        rms: (s / h.len() as f64).sqrt(),
        degenerate: false,
    })
}
