use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares fit of `ln E(t)` against `t` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Minus the fitted slope.
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

pub fn fit_decay(times: &[f64], energies: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != energies.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: energies.len() });
    }
    let tol = 1e-9 * (1.0 + window.1.abs());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &e) in times.iter().zip(energies) {
        if t < window.0 - tol || t > window.1 + tol {
            continue;
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::NonPositiveEnergy { time: t, value: e });
        }
        xs.push(t);
        ys.push(e.ln());
    }
    let n = xs.len();
    if n < 4 {
        return Err(Error::TooFewSamples(n));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit window contains a single time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(DecayFit { lambda: -slope, intercept, r_squared, window: [window.0, window.1], samples: n })
}

/// `ln(1 + 1/C) / T0`.
pub fn decay_prediction(c_obs: f64, t0: f64) -> Result<f64> {
    if !(c_obs > 0.0) || !(t0 > 0.0) || t0.is_infinite() || c_obs.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "decay prediction needs C_obs > 0 and T0 > 0, got {c_obs} and {t0}"
        )));
    }
    Ok((1.0 / c_obs).ln_1p() / t0)
}

/// Predicted and fitted rates side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub c_obs: f64,
    pub c_hat: f64,
    pub t0: f64,
    pub lambda0_predicted: f64,
    pub lambda_fitted: f64,
    pub r_squared: f64,
    pub fit_window: [f64; 2],
    /// `lambda_fitted >= lambda0_predicted`.
    pub meets_prediction: bool,
    /// `lambda_fitted >= 0.5 * lambda0_predicted`.
    pub within_tolerance: bool,
}

impl DecayEstimate {
    pub fn new(c_obs: f64, t0: f64, fit: &DecayFit) -> Result<Self> {
        let lambda0 = decay_prediction(c_obs, t0)?;
        let meets_prediction = fit.lambda >= lambda0;
        if !meets_prediction {
            log::warn!("fitted decay rate {} is below the predicted {}", fit.lambda, lambda0);
        }
        Ok(Self {
            c_obs,
            c_hat: 1.0 / c_obs,
            t0,
            lambda0_predicted: lambda0,
            lambda_fitted: fit.lambda,
            r_squared: fit.r_squared,
            fit_window: fit.window,
            meets_prediction,
            within_tolerance: fit.lambda >= 0.5 * lambda0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn prediction_examples() {
        assert_relative_eq!(decay_prediction(1.0, 1.0).unwrap(), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(decay_prediction(1.0, 2.0).unwrap(), 0.346573590279973, max_relative = 1e-12);
        assert!(decay_prediction(1e300, 1.0).unwrap() < 1e-299);
        assert!(decay_prediction(0.0, 1.0).is_err());
        assert!(decay_prediction(1.0, -1.0).is_err());
    }

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let fit = fit_decay(&t, &e, (0.0, 10.0)).unwrap();
        assert_relative_eq!(fit.lambda, 2.0, max_relative = 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn algebraic_decay_fits_poorly() {
        let t: Vec<f64> = (0..=500).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|t| (1.0 + t).powi(-2)).collect();
        let fit = fit_decay(&t, &e, (0.0, 50.0)).unwrap();
        assert!(fit.r_squared < 0.99, "{}", fit.r_squared);
    }

    #[test]
    fn fit_errors() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(fit_decay(&t, &[1.0; 5], (0.0, 2.5)).unwrap_err(), Error::TooFewSamples(3));
        assert!(matches!(
            fit_decay(&t, &[1.0, 0.5, 0.0, 0.1, 0.1], (0.0, 4.0)),
            Err(Error::NonPositiveEnergy { .. })
        ));
        let flat = fit_decay(&t, &[1.0; 5], (0.0, 4.0)).unwrap();
        assert_eq!(flat.lambda, 0.0);
        assert_eq!(flat.r_squared, 1.0);
    }
}
