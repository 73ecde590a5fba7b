use serde::Serialize;

use super::MCEstimate;
use crate::error::{Error, Result};

/// Least-squares line through `(x, ln mean)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    pub r2: f64,
    /// Abscissae of the points used.
    pub xs: Vec<f64>,
    /// `ln mean - (intercept + slope * x)` per point used.
    pub residuals: Vec<f64>,
}

impl DecayFit {
    pub fn points(&self) -> usize {
        self.xs.len()
    }

    /// Decay rate `ρ = e^slope`.
    pub fn rate(&self) -> f64 {
        self.slope.exp()
    }

    /// `slope ± z * slope_stderr`.
    pub fn slope_interval(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.slope_stderr, self.slope + z * self.slope_stderr)
    }

    /// Whether the interval at `z` lies strictly below zero.
    pub fn decays(&self, z: f64) -> bool {
        self.slope_interval(z).1 < 0.0
    }
}

/// Fits `ln mean ≈ intercept + slope * x` over the points with a positive,
/// finite mean.
///
/// Censored replicas are already excluded from each mean; their count stays
/// on the estimate.
pub fn fit_decay(points: &[(f64, MCEstimate)]) -> Result<DecayFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, e)| x.is_finite() && e.mean.is_finite() && e.mean > 0.0 && e.n_used() > 0)
        .map(|(x, e)| (*x, e.mean.ln()))
        .collect();
    let m = used.len();
    if m < 3 {
        return Err(Error::Fit(m));
    }
    let mf = m as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = used.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = used.iter().map(|&(x, y)| y - (intercept + slope * x)).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    let slope_stderr = (ssr / (mf - 2.0) / sxx).sqrt();
    Ok(DecayFit { slope, intercept, slope_stderr, r2, xs: used.iter().map(|p| p.0).collect(), residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_points() {
        let rho: f64 = 0.7;
        let pts: Vec<_> = (1..=6).map(|k| (k as f64, MCEstimate::exact(rho.powi(k)))).collect();
        let fit = fit_decay(&pts).unwrap();
        assert!((fit.slope - rho.ln()).abs() < 1e-12);
        assert!((fit.intercept).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-7);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn too_few_points() {
        let pts = [(1.0, MCEstimate::exact(0.5)), (2.0, MCEstimate::exact(0.0)), (3.0, MCEstimate::exact(0.1))];
        assert!(matches!(fit_decay(&pts), Err(Error::Fit(2))));
    }
}
