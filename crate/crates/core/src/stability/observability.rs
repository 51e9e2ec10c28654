use rayon::prelude::*;
use serde::Serialize;

use super::Experiment;
use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::integrator::Trajectory;

/// Outcome of one observability measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Ratio(f64),
    /// No energy was observed up to the horizon.
    Unobservable,
}

impl Observation {
    pub fn value(self) -> Option<f64> {
        match self {
            Observation::Ratio(r) => Some(r),
            Observation::Unobservable => None,
        }
    }
}

/// `E(0) / D(T)`, with `D` the accumulated observation integral.
pub fn observability_ratio(traj: &Trajectory, t: f64) -> Result<Observation> {
    let e0 = traj.initial_energy();
    if e0 <= 0.0 {
        return Err(Error::ZeroInitialEnergy);
    }
    let d = traj.dissipated_at(t).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "trajectory covers [{}, {}], horizon {t} is outside",
            traj.samples[0].t,
            traj.samples[traj.samples.len() - 1].t
        ))
    })?;
    if d <= 0.0 {
        return Ok(Observation::Unobservable);
    }
    Ok(Observation::Ratio(e0 / d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
    /// Basis functions per axis in the random velocity.
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeReport {
    /// One entry per member; `None` marks an unobservable member.
    pub ratios: Vec<Option<f64>>,
    /// Maximum ratio, `None` if any member is unobservable.
    pub c_estimate: Option<f64>,
    pub min_ratio: Option<f64>,
}

impl ModeReport {
    fn from_ratios(obs: Vec<Observation>) -> Self {
        let ratios: Vec<Option<f64>> = obs.iter().map(|o| o.value()).collect();
        let all: Option<Vec<f64>> = ratios.iter().copied().collect();
        let (c_estimate, min_ratio) = match all {
            Some(v) if !v.is_empty() => (
                Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                Some(v.iter().copied().fold(f64::INFINITY, f64::min)),
            ),
            _ => (None, None),
        };
        Self { ratios, c_estimate, min_ratio }
    }

    /// Largest over smallest ratio.
    pub fn spread(&self) -> Option<f64> {
        Some(self.c_estimate? / self.min_ratio?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub horizon: f64,
    pub ensemble: EnsembleSpec,
    pub linear: ModeReport,
    pub semilinear: Option<ModeReport>,
    /// Maximum over both modes; `None` if some member is unobservable.
    pub c_estimate: Option<f64>,
}

/// Ratio for every ensemble member, in member order.
pub fn ensemble_ratios(exp: &Experiment, ensemble: &EnsembleSpec, t: f64, linear: bool) -> Result<Vec<Observation>> {
    let system = exp.system(linear)?;
    (0..ensemble.count as u64)
        .into_par_iter()
        .map(|index| {
            let data = InitialData::Random { modes: ensemble.modes, seed: ensemble.seed, index };
            let init = data.state(&exp.mesh, &system)?;
            let traj = exp.run(&system, &init, t)?;
            observability_ratio(&traj, t)
        })
        .collect()
}

/// Runs the ensemble in linear mode and, when the experiment has a nonzero
/// nonlinearity, in semilinear mode too.
pub fn estimate_obs_constant(
    exp: &Experiment,
    ensemble: EnsembleSpec,
    t: f64,
    t0: Option<f64>,
) -> Result<ObservabilityReport> {
    if ensemble.count == 0 {
        return Err(Error::InvalidArgument("ensemble must have at least one member".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("observation horizon must be positive, got {t}")));
    }
    if let Some(t0) = t0 {
        if t < t0 {
            log::warn!("observation horizon {t} is shorter than the control time {t0}");
        }
    }
    let linear = ModeReport::from_ratios(ensemble_ratios(exp, &ensemble, t, true)?);
    let semilinear = if exp.nonlinearity.is_zero() {
        None
    } else {
        Some(ModeReport::from_ratios(ensemble_ratios(exp, &ensemble, t, false)?))
    };
    let c_estimate = match &semilinear {
        None => linear.c_estimate,
        Some(s) => match (linear.c_estimate, s.c_estimate) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        },
    };
    Ok(ObservabilityReport { horizon: t, ensemble, linear, semilinear, c_estimate })
}
