//! Observability constants, decay rates, resolvent scans and truncation
//! studies built on top of the integrator.

mod decay;
mod haraux;
mod observability;
mod resolvent;
mod truncation;

pub use decay::{decay_prediction, fit_decay, DecayEstimate, DecayFit};
pub use haraux::{haraux_equivalence_experiment, HarauxReport};
pub use observability::{
    estimate_obs_constant, observability_ratio, EnsembleSpec, ModeReport, Observation, ObservabilityReport,
};
pub use resolvent::{resolvent_norm, resolvent_scan, ResolventScan, Verdict, DIVERGENCE_THRESHOLD};
pub use truncation::{truncation_study, PairDifference, TruncationStudy};

use crate::discretization::{assemble_laplacian, SparseOperator};
use crate::error::Result;
use crate::geometry::{sample_damping, DampingField, DampingSpec, Mesh};
use crate::integrator::{cfl_dt, Forcing, SimOptions, Trajectory, WaveState, WaveSystem};
use crate::nonlinearity::{truncate, NonlinearitySpec};

/// One discretized problem: mesh, operator, damping, nonlinearity and time
/// step. Individual analyses build [`WaveSystem`]s from it.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub mesh: Mesh,
    pub lap: SparseOperator,
    pub damping: DampingField,
    pub nonlinearity: NonlinearitySpec,
    /// Truncation level k; `None` integrates the untruncated f.
    pub truncation: Option<u32>,
    pub dt: f64,
    pub stride: usize,
}

impl Experiment {
    /// Uses `dt = 0.9 h_min / sqrt(d)` unless `dt` is given.
    pub fn new(
        mesh: Mesh,
        damping: &DampingSpec,
        nonlinearity: NonlinearitySpec,
        truncation: Option<u32>,
        dt: Option<f64>,
    ) -> Result<Self> {
        let lap = assemble_laplacian(&mesh)?;
        let damping = sample_damping(&mesh, damping)?;
        if let Some(k) = truncation {
            truncate(&nonlinearity, k)?;
        }
        let dt = dt.unwrap_or_else(|| cfl_dt(&mesh, 0.9));
        Ok(Self { mesh, lap, damping, nonlinearity, truncation, dt, stride: 10 })
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn forcing(&self) -> Result<Forcing> {
        if self.nonlinearity.is_zero() {
            return Ok(Forcing::None);
        }
        Ok(match self.truncation {
            Some(k) => Forcing::Truncated(truncate(&self.nonlinearity, k)?),
            None => Forcing::Full(self.nonlinearity.clone()),
        })
    }

    /// System with the configured forcing, or with f = 0 when `linear`.
    pub fn system(&self, linear: bool) -> Result<WaveSystem> {
        let forcing = if linear { Forcing::None } else { self.forcing()? };
        WaveSystem::new(&self.mesh, &self.lap, &self.damping, forcing)
    }

    pub fn run(&self, system: &WaveSystem, initial: &WaveState, t_final: f64) -> Result<Trajectory> {
        system.simulate(initial, &SimOptions::new(self.dt, t_final).with_stride(self.stride))
    }

    /// Per-dof indicator of the damping region.
    pub fn region_indicator(&self) -> Vec<f64> {
        let tol = self.mesh.domain().tolerance();
        let region = &self.damping.spec().region;
        self.mesh.sample_dofs(|p| if region.iter().any(|b| b.contains(p, tol)) { 1.0 } else { 0.0 })
    }
}
