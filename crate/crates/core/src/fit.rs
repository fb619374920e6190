//! Least-squares fits in log-log and linear coordinates.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// `y_i - (intercept + slope·x_i)`.
    #[serde(skip)]
    pub max_residual: f64,
    #[serde(skip)]
    pub min_residual: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
///
/// `r_squared = 1 - SS_res / SS_tot`; it is 1 when `y` is constant and the
/// fit is exact.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut max_residual = f64::NEG_INFINITY;
    let mut min_residual = f64::INFINITY;
    for (a, b) in x.iter().zip(y) {
        let e = b - (intercept + slope * a);
        ss_res += e * e;
        ss_tot += (b - my) * (b - my);
        max_residual = max_residual.max(e);
        min_residual = min_residual.min(e);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(LinearFit {
        intercept,
        slope,
        r_squared,
        max_residual,
        min_residual,
    })
}

/// Power law `value ≈ e^{log_prefactor} · radius^{exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub radii: Vec<u64>,
    pub values: Vec<f64>,
}

impl ExponentFit {
    /// Needs at least three strictly increasing positive radii and positive
    /// values.
    pub fn fit(radii: Vec<u64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::InvalidParameter("radii and values differ in length".into()));
        }
        if radii.len() < 3 {
            return Err(Error::TooFewPoints(radii.len()));
        }
        if radii[0] == 0 || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!("value {v} is not positive")));
        }
        let lx: Vec<f64> = radii.iter().map(|&r| (r as f64).ln()).collect();
        let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let lf = linear_fit(&lx, &ly)?;
        Ok(Self {
            exponent: lf.slope,
            log_prefactor: lf.intercept,
            r_squared: lf.r_squared,
            radii,
            values,
        })
    }

    pub fn predict(&self, r: f64) -> f64 {
        (self.log_prefactor + self.exponent * r.ln()).exp()
    }

    /// `(min, max)` of `value / r^exponent` over the fitted points.
    pub fn prefactor_range(&self, exponent: f64) -> (f64, f64) {
        self.radii
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| v / (r as f64).powf(exponent))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let radii = vec![2, 4, 8, 16];
        let values: Vec<f64> = radii.iter().map(|&r| 3.0 * (r as f64).powf(1.5)).collect();
        let fit = ExponentFit::fit(radii, values).unwrap();
        assert!((fit.exponent - 1.5).abs() < 1e-12);
        assert!((fit.log_prefactor - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(32.0) - 3.0 * 32f64.powf(1.5)).abs() < 1e-8);
        let (lo, hi) = fit.prefactor_range(1.5);
        assert!((lo - 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_residuals() {
        let fit = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!((fit.intercept - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(fit.r_squared, 0.0);
        assert!((fit.max_residual - 1.0 / 3.0).abs() < 1e-15);
        assert!((fit.min_residual + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExponentFit::fit(vec![1, 2], vec![1.0, 2.0]), Err(Error::TooFewPoints(2))));
        assert!(ExponentFit::fit(vec![1, 2, 2], vec![1.0, 2.0, 3.0]).is_err());
        assert!(ExponentFit::fit(vec![1, 2, 4], vec![1.0, 0.0, 3.0]).is_err());
    }
}
