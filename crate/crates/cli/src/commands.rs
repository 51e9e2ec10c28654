//! Subcommand implementations. Each one computes its artifacts in memory;
//! the caller commits them.

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use wavezar_core::export::{fmt_f64, plot_script, write_csv, write_snapshot, write_trajectory_csv};
use wavezar_core::gcc::control_time;
use wavezar_core::stability::{
    estimate_obs_constant, fit_decay, resolvent_scan, truncation_study, DecayEstimate, EnsembleSpec, ObservabilityReport,
};
use wavezar_core::{assemble_generator, energy_identity_residual, GccReport, SimOptions};

use crate::artifacts::{ArtifactSet, RESOLVED_CONFIG};
use crate::config::{ExperimentConfig, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    Observe,
    Rays,
    Resolvent,
    Truncation,
    Decay,
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Observe => "observe",
            Command::Rays => "rays",
            Command::Resolvent => "resolvent",
            Command::Truncation => "truncation",
            Command::Decay => "decay",
            Command::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    dt: f64,
    steps: usize,
    initial_energy: f64,
    final_energy: f64,
    dissipated: f64,
    max_relative_residual: f64,
    max_amplitude: f64,
    snapshots: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DecayReport {
    #[serde(flatten)]
    estimate: DecayEstimate,
    fit_samples: usize,
    t0_source: &'static str,
    c_obs_source: &'static str,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).context("csv")?;
    Ok(buf)
}

fn ensemble(cfg: &ExperimentConfig) -> EnsembleSpec {
    EnsembleSpec { count: cfg.analysis.ensemble, seed: cfg.analysis.seed, modes: cfg.analysis.modes }
}

fn rays(cfg: &ExperimentConfig, setup: &Setup) -> Result<GccReport> {
    let a = &cfg.analysis;
    control_time(&setup.domain, &setup.region, a.origins, a.directions, a.t_max).context("gcc_ray")
}

fn control_time_estimate(report: &GccReport) -> Result<f64> {
    match (report.satisfied, report.t0_estimate) {
        (true, Some(t0)) => Ok(t0),
        _ => bail!(
            "gcc_ray: the control region does not control the domain (ray from {:?} along {:?} never enters); \
             set analysis.t0 and analysis.horizon to proceed",
            report.worst_ray.origin,
            report.worst_ray.direction
        ),
    }
}

fn observe(cfg: &ExperimentConfig, setup: &Setup, horizon: f64, t0: Option<f64>) -> Result<ObservabilityReport> {
    estimate_obs_constant(&setup.experiment, ensemble(cfg), horizon, t0).context("stability.observability")
}

fn ratios_csv(report: &ObservabilityReport) -> Result<Vec<u8>> {
    let semi = report.semilinear.as_ref();
    let rows = report.linear.ratios.iter().enumerate().map(|(i, r)| {
        let s = semi.and_then(|m| m.ratios[i]);
        [i as f64, r.unwrap_or(f64::INFINITY), s.unwrap_or(f64::NAN)]
    });
    csv_bytes(|b| write_csv(b, &["member", "linear", "semilinear"], rows))
}

/// Simulates the configured initial data, fits the energy and combines it
/// with `c_obs` and `t0`.
fn decay(cfg: &ExperimentConfig, setup: &Setup, c_obs: f64, t0: f64, set: &mut ArtifactSet) -> Result<DecayEstimate> {
    let exp = &setup.experiment;
    let system = exp.system(false)?;
    let traj = exp.run(&system, &setup.initial, cfg.time.t_final).context("integrator")?;
    let window = (cfg.analysis.fit_start.unwrap_or(t0), cfg.analysis.fit_end.unwrap_or(cfg.time.t_final));
    let fit = fit_decay(&traj.times(), &traj.energies(), window).context("stability.fit_decay")?;
    let estimate = DecayEstimate::new(c_obs, t0, &fit).context("stability.decay_prediction")?;
    set.add("trajectory.csv", csv_bytes(|b| write_trajectory_csv(b, &traj))?);
    set.add_json(
        "decay.json",
        &DecayReport {
            estimate: estimate.clone(),
            fit_samples: fit.samples,
            t0_source: if cfg.analysis.t0.is_some() { "config" } else { "rays" },
            c_obs_source: if cfg.analysis.c_obs.is_some() { "config" } else { "ensemble" },
        },
    )?;
    Ok(estimate)
}

/// Runs one subcommand and returns its artifacts plus a summary line.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<(ArtifactSet, String)> {
    let setup = cfg.build()?;
    let mut set = ArtifactSet::new();
    set.add(RESOLVED_CONFIG, cfg.to_toml()?.into_bytes());
    let plot = cfg.output.plot;
    let summary = match command {
        Command::Simulate => {
            let exp = &setup.experiment;
            let system = exp.system(false)?;
            let opts = SimOptions {
                snapshot_times: cfg.time.snapshots.clone(),
                ..SimOptions::new(exp.dt, cfg.time.t_final).with_stride(exp.stride)
            };
            let traj = system.simulate(&setup.initial, &opts).context("integrator")?;
            let residual = energy_identity_residual(&traj);
            let mut names = Vec::new();
            for (i, s) in traj.snapshots.iter().enumerate() {
                let name = format!("snapshot-{i:03}.bin");
                let mut buf = Vec::new();
                write_snapshot(&mut buf, &exp.mesh, s).context("snapshot")?;
                set.add(name.clone(), buf);
                names.push(name);
            }
            set.add("trajectory.csv", csv_bytes(|b| write_trajectory_csv(b, &traj))?);
            let last = traj.samples.last().ok_or_else(|| anyhow!("empty trajectory"))?;
            let s = SimulationSummary {
                dt: traj.dt,
                steps: traj.steps,
                initial_energy: traj.initial_energy(),
                final_energy: last.energy.total,
                dissipated: last.dissipated,
                max_relative_residual: residual.max,
                max_amplitude: traj.max_amplitude,
                snapshots: names,
            };
            set.add_json("residual.json", &s)?;
            if plot {
                set.add("plot.gp", plot_script(&["trajectory.csv"], None).into_bytes());
            }
            format!("simulated {} steps, max energy-identity residual {}", traj.steps, fmt_f64(residual.max))
        }
        Command::Rays => {
            let report = rays(cfg, &setup)?;
            set.add_json("gcc.json", &report)?;
            match report.t0_estimate {
                Some(t0) if report.satisfied => format!("geometric control holds, T0 = {}", fmt_f64(t0)),
                _ => format!("geometric control fails; witness ray from {:?}", report.worst_ray.origin),
            }
        }
        Command::Observe => {
            let t0 = cfg.analysis.t0;
            let horizon = match cfg.analysis.horizon {
                Some(h) => h,
                None => match t0 {
                    Some(t0) => t0,
                    None => control_time_estimate(&rays(cfg, &setup)?)?,
                },
            };
            let report = observe(cfg, &setup, horizon, t0)?;
            set.add_json("observability.json", &report)?;
            set.add("ratios.csv", ratios_csv(&report)?);
            match report.c_estimate {
                Some(c) => format!("C_estimate = {} at T = {}", fmt_f64(c), fmt_f64(horizon)),
                None => format!("unobservable at T = {}", fmt_f64(horizon)),
            }
        }
        Command::Resolvent => {
            let exp = &setup.experiment;
            let gen = assemble_generator(&exp.lap, &exp.damping)?;
            let a = &cfg.analysis;
            let scan = resolvent_scan(&gen, a.mu_min, a.mu_max, a.mu_points).context("stability.resolvent_scan")?;
            set.add_json("resolvent.json", &scan)?;
            let rows = scan.mu.iter().zip(&scan.norms).map(|(m, n)| [*m, *n]);
            set.add("resolvent.csv", csv_bytes(|b| write_csv(b, &["mu", "norm"], rows))?);
            if plot {
                set.add("plot.gp", plot_script(&[], Some("resolvent.csv")).into_bytes());
            }
            format!("resolvent sup {} at mu = {}: {:?}", fmt_f64(scan.sup), fmt_f64(scan.argmax), scan.verdict)
        }
        Command::Truncation => {
            let study = truncation_study(&setup.experiment, &setup.initial, &cfg.analysis.k_list, cfg.time.t_final)
                .context("stability.truncation_study")?;
            let rows = study.differences.iter().map(|d| [d.k_low as f64, d.k_high as f64, d.max_difference]);
            set.add("truncation.csv", csv_bytes(|b| write_csv(b, &["k_low", "k_high", "max_difference"], rows))?);
            set.add_json("truncation.json", &study)?;
            format!("truncation study over k = {:?}, nonincreasing: {}", study.levels, study.is_nonincreasing())
        }
        Command::Decay => {
            let t0 = match cfg.analysis.t0 {
                Some(t0) => t0,
                None => control_time_estimate(&rays(cfg, &setup)?)?,
            };
            let c_obs = match cfg.analysis.c_obs {
                Some(c) => c,
                None => observe(cfg, &setup, cfg.analysis.horizon.unwrap_or(t0), Some(t0))?
                    .c_estimate
                    .ok_or_else(|| anyhow!("stability: ensemble is unobservable, no decay prediction"))?,
            };
            let est = decay(cfg, &setup, c_obs, t0, &mut set)?;
            if plot {
                set.add("plot.gp", plot_script(&["trajectory.csv"], None).into_bytes());
            }
            format!("lambda0_predicted = {}, lambda_fitted = {}", fmt_f64(est.lambda0_predicted), fmt_f64(est.lambda_fitted))
        }
        Command::Pipeline => {
            let gcc = rays(cfg, &setup)?;
            set.add_json("gcc.json", &gcc)?;
            let t0 = match cfg.analysis.t0 {
                Some(t0) => t0,
                None => control_time_estimate(&gcc)?,
            };
            let horizon = cfg.analysis.horizon.unwrap_or(t0);
            let obs = observe(cfg, &setup, horizon, Some(t0))?;
            set.add_json("observability.json", &obs)?;
            set.add("ratios.csv", ratios_csv(&obs)?);
            let c_obs = obs.c_estimate.ok_or_else(|| anyhow!("stability: ensemble is unobservable, no decay prediction"))?;
            let est = decay(cfg, &setup, c_obs, t0, &mut set)?;
            if plot {
                set.add("plot.gp", plot_script(&["trajectory.csv"], None).into_bytes());
            }
            format!(
                "T0 = {}, C_obs = {}, lambda0_predicted = {}, lambda_fitted = {}",
                fmt_f64(t0),
                fmt_f64(c_obs),
                fmt_f64(est.lambda0_predicted),
                fmt_f64(est.lambda_fitted)
            )
        }
    };
    Ok((set, summary))
}
