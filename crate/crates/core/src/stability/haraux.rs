use rayon::prelude::*;
use serde::Serialize;

use super::observability::{observability_ratio, EnsembleSpec, Observation};
use super::{fit_decay, DecayFit, Experiment};
use crate::error::Result;
use crate::initial::InitialData;
use crate::integrator::WaveState;

/// Largest max/min ratio spread still counted as a stable observability constant.
pub const STABLE_SPREAD: f64 = 5.0;
const MIN_DECAY_RATE: f64 = 1e-8;
const MIN_R_SQUARED: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarauxReport {
    pub damped_fit: DecayFit,
    /// Positive rate with an exponential fit of R^2 >= 0.99.
    pub decay_observed: bool,
    /// `E(0) / int a |u_t|^2` for the damped run itself.
    pub damped_observation: Observation,
    /// Undamped ratios observed through the indicator of the control
    /// region: the given data first, then the random ensemble.
    pub undamped_ratios: Vec<Option<f64>>,
    pub ratio_spread: Option<f64>,
    /// All ratios finite with spread at most [`STABLE_SPREAD`].
    pub observable: bool,
    pub equivalent: bool,
}

/// Damped decay versus undamped observability for the linear problem.
pub fn haraux_equivalence_experiment(
    exp: &Experiment,
    initial: &WaveState,
    t_decay: f64,
    fit_start: f64,
    t_obs: f64,
    ensemble: EnsembleSpec,
) -> Result<HarauxReport> {
    if !exp.nonlinearity.is_zero() {
        log::info!("equivalence experiment runs the linear problem; the nonlinearity is ignored");
    }
    let damped = exp.system(true)?;
    let traj = exp.run(&damped, initial, t_decay)?;
    let damped_fit = fit_decay(&traj.times(), &traj.energies(), (fit_start, t_decay))?;
    let decay_observed = damped_fit.lambda > MIN_DECAY_RATE && damped_fit.r_squared >= MIN_R_SQUARED;
    let damped_observation = observability_ratio(&traj, t_decay)?;

    let n = exp.mesh.n_dof();
    let undamped = damped.clone().with_damping(vec![0.0; n])?.with_observation(exp.region_indicator())?;
    let mut data = vec![initial.clone()];
    for index in 0..ensemble.count as u64 {
        data.push(InitialData::Random { modes: ensemble.modes, seed: ensemble.seed, index }.state(&exp.mesh, &undamped)?);
    }
    let undamped_ratios = data
        .par_iter()
        .map(|init| {
            let traj = exp.run(&undamped, init, t_obs)?;
            Ok(observability_ratio(&traj, t_obs)?.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let finite: Option<Vec<f64>> = undamped_ratios.iter().copied().collect();
    let ratio_spread = finite.map(|v| {
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    });
    let observable = ratio_spread.is_some_and(|s| s <= STABLE_SPREAD);
    Ok(HarauxReport {
        damped_fit,
        decay_observed,
        damped_observation,
        undamped_ratios,
        ratio_spread,
        observable,
        equivalent: decay_observed == observable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::nonlinearity::NonlinearitySpec;

    fn experiment(damping: DampingSpec) -> Experiment {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::from_faces(
            &d,
            &[(Face::Left, BoundaryCondition::Dirichlet), (Face::Right, BoundaryCondition::Neumann)],
        );
        let m = build_mesh(&d, &p, &[101]).unwrap();
        Experiment::new(m, &damping, NonlinearitySpec::zero(), None, None).unwrap()
    }

    fn sine(exp: &Experiment) -> WaveState {
        let sys = exp.system(true).unwrap();
        InitialData::Sine { amplitude: 1.0, wavenumbers: vec![0.5], cosine_axes: vec![], velocity: false }.state(&exp.mesh, &sys).unwrap()
    }

    #[test]
    fn controlled_interval_is_equivalent() {
        let exp = experiment(DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0));
        let ens = EnsembleSpec { count: 4, seed: 3, modes: 6 };
        let rep = haraux_equivalence_experiment(&exp, &sine(&exp), 20.0, 1.0, 2.0, ens).unwrap();
        assert!(rep.decay_observed, "{:?}", rep.damped_fit);
        assert!(rep.observable, "{:?}", rep.ratio_spread);
        assert!(rep.equivalent);
    }

    #[test]
    fn no_damping_no_decay() {
        let exp = experiment(DampingSpec::none());
        let ens = EnsembleSpec { count: 2, seed: 3, modes: 4 };
        let rep = haraux_equivalence_experiment(&exp, &sine(&exp), 5.0, 0.0, 2.0, ens).unwrap();
        assert!(!rep.decay_observed);
        assert_eq!(rep.damped_observation, Observation::Unobservable);
        assert!(!rep.observable);
        assert!(rep.equivalent);
    }
}
