//! Log-log convergence-rate fits in ε.

use serde::Serialize;

use super::{Cell, Check, ConvergenceReport, CsvTable};
use crate::{Error, Result};

/// Minimum slope accepted for the `L²` error on `ω₁′ × ω₂`.
pub const RATE_THRESHOLD: f64 = 0.9;
/// Rows with the largest ε are preasymptotic and left out of the fit.
pub const DEFAULT_DROP: usize = 2;

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Usage("slope fit needs equally many x and y values".into()));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Validation(format!(
            "slope fit needs at least 4 valid points, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Validation("slope fit needs distinct x values".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub epsilons: Vec<f64>,
    pub dropped: usize,
    /// Slopes of the errors over the band `ω₁′ × ω₂`.
    pub slope_l2: f64,
    pub slope_gradx2: f64,
    pub slope_gradx1: f64,
    /// Slopes over the whole domain, for comparison.
    pub global_slope_l2: f64,
    pub global_slope_gradx2: f64,
}

/// Fit the band errors of a sweep against ε, leaving out the `drop`
/// largest ε.
pub fn rate_fit(report: &ConvergenceReport, drop: usize) -> Result<RateFit> {
    let rows: Vec<_> = report.ok_rows().skip(drop).collect();
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let fit = |f: &dyn Fn(&super::SweepRow) -> f64| {
        let ys: Vec<f64> = rows.iter().map(|r| f(r)).collect();
        log_log_slope(&eps, &ys)
    };
    Ok(RateFit {
        slope_l2: fit(&|r| r.band_l2_err)?,
        slope_gradx2: fit(&|r| r.band_gradx2_err).unwrap_or(f64::NAN),
        slope_gradx1: fit(&|r| r.band_gradx1_err).unwrap_or(f64::NAN),
        global_slope_l2: fit(&|r| r.l2_err).unwrap_or(f64::NAN),
        global_slope_gradx2: fit(&|r| r.gradx2_err).unwrap_or(f64::NAN),
        epsilons: eps,
        dropped: drop,
    })
}

impl RateFit {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::gated("band_l2_rate", self.slope_l2 >= RATE_THRESHOLD, self.slope_l2, RATE_THRESHOLD),
            Check::info(
                "band_gradx2_rate",
                self.slope_gradx2 >= RATE_THRESHOLD,
                self.slope_gradx2,
                RATE_THRESHOLD,
            ),
            Check::info("band_gradx1_rate", self.slope_gradx1 >= RATE_THRESHOLD, self.slope_gradx1, RATE_THRESHOLD)
                .with_note("recorded only"),
        ]
    }

    pub fn to_csv(&self, report: &ConvergenceReport) -> CsvTable {
        let mut t = CsvTable::new(
            "rate",
            &[
                "epsilon",
                "n",
                "n1",
                "n2",
                "beta",
                "in_fit",
                "band_l2_err",
                "band_gradx2_err",
                "band_gradx1_err",
                "l2_err",
                "gradx2_err",
            ],
        );
        for (k, r) in report.rows.iter().enumerate() {
            t.push(vec![
                r.epsilon.into(),
                Cell::Na,
                report.grid.n1().into(),
                report.grid.n2().into(),
                report.beta.into(),
                (r.ok && k >= self.dropped).into(),
                r.band_l2_err.into(),
                r.band_gradx2_err.into(),
                r.band_gradx1_err.into(),
                r.l2_err.into(),
                r.gradx2_err.into(),
            ]);
        }
        t
    }
}
