use rayon::prelude::*;
use serde::Serialize;

use super::Experiment;
use crate::error::{Error, Result};
use crate::integrator::{Forcing, WaveState, WaveSystem};
use crate::nonlinearity::truncate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDifference {
    pub k_low: u32,
    pub k_high: u32,
    /// Max over sampled times of `(|grad du|^2 + |dv|^2)^(1/2)`.
    pub max_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub levels: Vec<u32>,
    pub horizon: f64,
    /// Largest |u| reached by each run.
    pub max_amplitudes: Vec<f64>,
    pub differences: Vec<PairDifference>,
}

impl TruncationStudy {
    pub fn is_nonincreasing(&self) -> bool {
        self.differences.windows(2).all(|w| w[1].max_difference <= w[0].max_difference)
    }
}

/// Integrates the same data with `f_k` for every `k` in `levels` and
/// compares consecutive runs every `stride` steps.
pub fn truncation_study(exp: &Experiment, initial: &WaveState, levels: &[u32], t_final: f64) -> Result<TruncationStudy> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("truncation levels must be strictly ascending, got {levels:?}")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t_final}")));
    }
    let base = exp.system(true)?;
    let systems: Vec<WaveSystem> = levels
        .iter()
        .map(|&k| {
            let forcing =
                if exp.nonlinearity.is_zero() { Forcing::None } else { Forcing::Truncated(truncate(&exp.nonlinearity, k)?) };
            Ok(base.clone().with_forcing(forcing))
        })
        .collect::<Result<_>>()?;
    if exp.dt > base.stability_limit() * (1.0 + 1e-12) {
        return Err(Error::TimeStepTooLarge { dt: exp.dt, limit: base.stability_limit() });
    }
    let steps = ((t_final / exp.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let lap = base.laplacian();
    let stride = exp.stride.max(1);

    let mut states: Vec<WaveState> = vec![initial.clone(); levels.len()];
    let mut amplitudes = vec![initial.max_abs_u(); levels.len()];
    let mut diffs = vec![0.0f64; levels.len().saturating_sub(1)];
    let n = initial.n_dof();
    let compare = |states: &[WaveState], diffs: &mut [f64]| {
        for (j, d) in diffs.iter_mut().enumerate() {
            let (a, b) = (&states[j], &states[j + 1]);
            let du: Vec<f64> = (0..n).map(|i| a.u[i] - b.u[i]).collect();
            let dv: Vec<f64> = (0..n).map(|i| a.v[i] - b.v[i]).collect();
            let norm = (2.0 * lap.dirichlet_energy(&du) + lap.inner(&dv, &dv)).max(0.0).sqrt();
            *d = d.max(norm);
        }
    };
    for step in 1..=steps {
        states
            .par_iter_mut()
            .zip(&systems)
            .zip(amplitudes.par_iter_mut())
            .try_for_each(|((s, sys), amp)| -> Result<()> {
                *s = sys.step(s, dt)?;
                *amp = amp.max(s.max_abs_u());
                Ok(())
            })?;
        if step % stride == 0 || step == steps {
            compare(&states, &mut diffs);
        }
    }
    let differences = diffs
        .iter()
        .enumerate()
        .map(|(j, &d)| PairDifference { k_low: levels[j], k_high: levels[j + 1], max_difference: d })
        .collect();
    Ok(TruncationStudy { levels: levels.to_vec(), horizon: t_final, max_amplitudes: amplitudes, differences })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::initial::InitialData;
    use crate::nonlinearity::NonlinearitySpec;

    fn experiment(f: NonlinearitySpec) -> Experiment {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::from_faces(
            &d,
            &[(Face::Left, BoundaryCondition::Dirichlet), (Face::Right, BoundaryCondition::Neumann)],
        );
        let m = build_mesh(&d, &p, &[101]).unwrap();
        let damping = DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0);
        Experiment::new(m, &damping, f, None, None).unwrap()
    }

    fn sine(exp: &Experiment, amplitude: f64) -> WaveState {
        let sys = exp.system(true).unwrap();
        InitialData::Sine { amplitude, wavenumbers: vec![0.5], cosine_axes: vec![], velocity: false }.state(&exp.mesh, &sys).unwrap()
    }

    #[test]
    fn small_data_is_inert() {
        let exp = experiment(NonlinearitySpec::cubic());
        let study = truncation_study(&exp, &sine(&exp, 0.5), &[1, 2, 4], 3.0).unwrap();
        assert!(study.max_amplitudes.iter().all(|&a| a <= 0.5 + 1e-12));
        assert!(study.differences.iter().all(|d| d.max_difference == 0.0));
    }

    #[test]
    fn zero_nonlinearity_is_inert() {
        let exp = experiment(NonlinearitySpec::zero());
        let study = truncation_study(&exp, &sine(&exp, 5.0), &[1, 2], 1.0).unwrap();
        assert_eq!(study.differences[0].max_difference, 0.0);
    }

    #[test]
    fn large_data_differences_shrink() {
        let exp = experiment(NonlinearitySpec::cubic());
        let study = truncation_study(&exp, &sine(&exp, 3.0), &[1, 2, 4, 8], 2.0).unwrap();
        let d: Vec<f64> = study.differences.iter().map(|d| d.max_difference).collect();
        assert!(d[0] > 0.0);
        assert!(study.is_nonincreasing(), "{d:?}");
        assert_eq!(*d.last().unwrap(), 0.0);
    }

    #[test]
    fn rejects_unsorted_levels() {
        let exp = experiment(NonlinearitySpec::cubic());
        let init = sine(&exp, 1.0);
        assert!(truncation_study(&exp, &init, &[2, 1], 1.0).is_err());
        assert!(truncation_study(&exp, &init, &[], 1.0).is_err());
    }
}
