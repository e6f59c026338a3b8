//! Least-squares rate fitting on transformed axes.

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// ln(value) against ln(schedule): rate is the power exponent.
    Power,
    /// value against ln(schedule): rate is the log coefficient.
    Log,
    /// value against ln(ln(schedule)): rate is the log-log coefficient.
    LogLog,
    /// ln(value) against schedule: rate is the growth per unit step.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    /// RMS of the fit residuals on the transformed axes.
    pub residual: f64,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> RateFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    RateFit {
        rate: slope,
        residual: (ss / n).sqrt(),
    }
}

/// Fit `values` against `schedule` under the chosen model.
pub fn fit_rate(schedule: &[f64], values: &[f64], model: FitModel) -> Result<RateFit, Error> {
    if schedule.len() != values.len() || schedule.len() < 4 {
        return Err(Error::Domain(
            "rate fitting needs matching schedules of length >= 4".into(),
        ));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain(
            "rate fitting requires strictly positive values".into(),
        ));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match model {
        FitModel::Power => (
            schedule.iter().map(|s| s.ln()).collect(),
            values.iter().map(|v| v.ln()).collect(),
        ),
        FitModel::Log => (
            schedule.iter().map(|s| s.ln()).collect(),
            values.to_vec(),
        ),
        FitModel::LogLog => {
            if schedule.iter().any(|s| *s <= 1.0) {
                return Err(Error::Domain(
                    "log-log fitting needs schedule entries > 1".into(),
                ));
            }
            (
                schedule.iter().map(|s| s.ln().ln()).collect(),
                values.to_vec(),
            )
        }
        FitModel::Geometric => (schedule.to_vec(), values.iter().map(|v| v.ln()).collect()),
    };
    Ok(linear_fit(&xs, &ys))
}

/// Pick the best-fitting model by residual comparison. Used at boundary
/// exponents to tell logarithmic divergence apart from a weak power.
pub fn select_model(
    schedule: &[f64],
    values: &[f64],
    candidates: &[FitModel],
) -> Result<(FitModel, RateFit), Error> {
    let mut best: Option<(FitModel, RateFit)> = None;
    for &m in candidates {
        if let Ok(fit) = fit_rate(schedule, values, m) {
            // compare residuals relative to the fitted spread
            let better = match &best {
                None => true,
                Some((_, b)) => fit.residual < b.residual,
            };
            if better {
                best = Some((m, fit));
            }
        }
    }
    best.ok_or_else(|| Error::Domain("no candidate model fit the data".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric() {
        let fit = fit_rate(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 8.0, 16.0], FitModel::Geometric)
            .unwrap();
        assert!((fit.rate - 2f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn power_with_noise() {
        // values = delta^-1 with 1% multiplicative noise
        let schedule = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
        let noise = [1.01, 0.99, 1.008, 0.995, 1.002];
        let values: Vec<f64> = schedule
            .iter()
            .zip(noise)
            .map(|(d, n)| n / d)
            .collect();
        let fit = fit_rate(&schedule, &values, FitModel::Power).unwrap();
        assert!((fit.rate + 1.0).abs() < 0.05, "rate {}", fit.rate);
    }

    #[test]
    fn constant_values_power_rate_zero() {
        let fit = fit_rate(&[1.0, 2.0, 4.0, 8.0], &[3.0, 3.0, 3.0, 3.0], FitModel::Power).unwrap();
        assert!(fit.rate.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], FitModel::Power).is_err());
        assert!(fit_rate(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, -2.0, 3.0, 4.0],
            FitModel::Power
        )
        .is_err());
    }

    #[test]
    fn model_selection_prefers_log_on_log_data() {
        // values ~ ln(1/delta): log model should beat power
        let schedule = [1e-2f64, 1e-3, 1e-4, 1e-5, 1e-6];
        let values: Vec<f64> = schedule.iter().map(|d| (1.0 / d).ln()).collect();
        let (model, _) =
            select_model(&schedule, &values, &[FitModel::Power, FitModel::Log]).unwrap();
        assert_eq!(model, FitModel::Log);
    }
}
