//! Time stepping of `u_tt - L u + f(u) + a u_t = 0`, energy bookkeeping and
//! the energy identity check.
//!
//! The scheme is leapfrog in velocity-Verlet form with the damping term
//! averaged Crank-Nicolson style over each half kick:
//!
//! ```text
//! v* = (v_n + dt/2 F(u_n)) / (1 + a dt/2)
//! u_{n+1} = u_n + dt v*
//! v_{n+1} = (1 - a dt/2) v* + dt/2 F(u_{n+1})
//! ```
//!
//! with `F(u) = L u - f(u)`. The recorded energy is the scheme's conserved
//! quadratic form: the continuum energy minus `dt^2/8 |F(u)|^2`, which is
//! exactly invariant for the undamped linear problem.

use serde::Serialize;

use crate::discretization::SparseOperator;
use crate::error::{Error, Result};
use crate::geometry::{DampingField, Mesh};
use crate::nonlinearity::{NonlinearitySpec, TruncatedNonlinearity};

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl WaveState {
    pub fn zeros(n: usize) -> Self {
        Self { u: vec![0.0; n], v: vec![0.0; n], t: 0.0 }
    }

    pub fn new(u: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
        }
        let s = Self { u, v, t };
        if !s.is_finite() {
            return Err(Error::InvalidArgument("initial state is not finite".into()));
        }
        Ok(s)
    }

    pub fn n_dof(&self) -> usize {
        self.u.len()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            u: self.u.iter().map(|x| x * s).collect(),
            v: self.v.iter().map(|x| x * s).collect(),
            t: self.t,
        }
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// The lower-order term f in the equation.
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    /// f itself, without truncation.
    Full(NonlinearitySpec),
    Truncated(TruncatedNonlinearity),
}

impl Forcing {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Forcing::None => 0.0,
            Forcing::Full(f) => f.eval(s),
            Forcing::Truncated(tn) => tn.eval(s),
        }
    }

    pub fn primitive(&self, s: f64) -> f64 {
        match self {
            Forcing::None => 0.0,
            Forcing::Full(f) => f.primitive(s),
            Forcing::Truncated(tn) => tn.eval_fk_primitive(s),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Forcing::None => Some(0.0),
            Forcing::Full(_) => None,
            Forcing::Truncated(tn) => Some(tn.lipschitz()),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Forcing::None)
    }
}

impl From<Option<TruncatedNonlinearity>> for Forcing {
    fn from(tn: Option<TruncatedNonlinearity>) -> Self {
        tn.map_or(Forcing::None, Forcing::Truncated)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyRecord {
    /// 1/2 |v|^2
    pub kinetic: f64,
    /// 1/2 |grad u|^2
    pub potential: f64,
    /// int F_k(u)
    pub nonlinear: f64,
    /// -dt^2/8 |F(u)|^2, zero when no time step is given.
    pub shadow: f64,
    pub total: f64,
}

impl EnergyRecord {
    /// Linear part `E^L = kinetic + potential`.
    pub fn linear(&self) -> f64 {
        self.kinetic + self.potential
    }
}

/// Continuum energy of a state: trapezoidal quadrature, edge-difference gradient.
pub fn energy(state: &WaveState, lap: &SparseOperator, forcing: &Forcing) -> EnergyRecord {
    let kinetic = 0.5 * lap.inner(&state.v, &state.v);
    let potential = lap.dirichlet_energy(&state.u);
    let nonlinear = if forcing.is_none() {
        0.0
    } else {
        let prim: Vec<f64> = state.u.iter().map(|&s| forcing.primitive(s)).collect();
        lap.cell_volume() * prim.iter().zip(lap.weights()).map(|(p, w)| p * w).sum::<f64>()
    };
    EnergyRecord { kinetic, potential, nonlinear, shadow: 0.0, total: kinetic + potential + nonlinear }
}

/// `safety * h_min / sqrt(d)`; warns for `safety > 1`.
pub fn cfl_dt(mesh: &Mesh, safety: f64) -> f64 {
    if safety > 1.0 {
        log::warn!("CFL safety factor {safety} exceeds 1; the leapfrog step may be unstable");
    }
    safety * stability_limit(mesh)
}

/// Largest stable leapfrog step for the Laplacian part, `h_min / sqrt(d)`.
pub fn stability_limit(mesh: &Mesh) -> f64 {
    mesh.h_min() / (mesh.dimension() as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Record an energy sample every `stride` steps.
    pub stride: usize,
    /// Times at which full states are kept.
    pub snapshot_times: Vec<f64>,
}

impl SimOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, stride: 10, snapshot_times: Vec::new() }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub energy: EnergyRecord,
    /// Running `int_0^t int a |u_t|^2`.
    pub dissipated: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub snapshots: Vec<WaveState>,
    pub final_state: WaveState,
    /// Effective time step (t_final divided into whole steps).
    pub dt: f64,
    pub steps: usize,
    /// Largest |u| over all steps.
    pub max_amplitude: f64,
}

impl Trajectory {
    pub fn initial_energy(&self) -> f64 {
        self.samples[0].energy.total
    }

    /// Dissipated integral at time `t`, interpolated linearly between samples.
    pub fn dissipated_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if t < s[0].t || t > s[s.len() - 1].t + 1e-12 * (1.0 + t.abs()) {
            return None;
        }
        let k = s.partition_point(|x| x.t < t);
        if k == 0 {
            return Some(s[0].dissipated);
        }
        if k == s.len() {
            return Some(s[k - 1].dissipated);
        }
        let (a, b) = (&s[k - 1], &s[k]);
        let w = (t - a.t) / (b.t - a.t);
        Some(a.dissipated + w * (b.dissipated - a.dissipated))
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy.total).collect()
    }
}

/// Operators and coefficients of one damped semilinear problem.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    lap: SparseOperator,
    damping: Vec<f64>,
    observation: Vec<f64>,
    forcing: Forcing,
    stability_limit: f64,
}

impl WaveSystem {
    pub fn new(mesh: &Mesh, lap: &SparseOperator, field: &DampingField, forcing: Forcing) -> Result<Self> {
        if field.values().len() != mesh.node_count() {
            return Err(Error::DimensionMismatch { expected: mesh.node_count(), got: field.values().len() });
        }
        if lap.n_dof() != mesh.n_dof() {
            return Err(Error::DimensionMismatch { expected: mesh.n_dof(), got: lap.n_dof() });
        }
        let damping = field.per_dof(mesh);
        Ok(Self {
            lap: lap.clone(),
            observation: damping.clone(),
            damping,
            forcing,
            stability_limit: stability_limit(mesh),
        })
    }

    /// Replaces the dissipation weight with `weights` per dof; the running
    /// integral then records `int_0^t int weights |u_t|^2` instead.
    pub fn with_observation(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_dof() {
            return Err(Error::DimensionMismatch { expected: self.n_dof(), got: weights.len() });
        }
        self.observation = weights;
        Ok(self)
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_damping(mut self, damping: Vec<f64>) -> Result<Self> {
        if damping.len() != self.n_dof() {
            return Err(Error::DimensionMismatch { expected: self.n_dof(), got: damping.len() });
        }
        self.observation = damping.clone();
        self.damping = damping;
        Ok(self)
    }

    pub fn n_dof(&self) -> usize {
        self.lap.n_dof()
    }

    pub fn laplacian(&self) -> &SparseOperator {
        &self.lap
    }

    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn stability_limit(&self) -> f64 {
        self.stability_limit
    }

    /// `out = L u - f(u)`.
    pub fn force(&self, u: &[f64], out: &mut [f64]) {
        self.lap.apply(u, out);
        if !self.forcing.is_none() {
            for (o, &s) in out.iter_mut().zip(u) {
                *o -= self.forcing.eval(s);
            }
        }
    }

    /// Rate `int w |v|^2` with the observation weights.
    pub fn dissipation_rate(&self, v: &[f64]) -> f64 {
        let w = self.lap.weights();
        self.lap.cell_volume() * v.iter().zip(&self.observation).zip(w).map(|((x, a), w)| a * w * x * x).sum::<f64>()
    }

    /// Energy including the time-step correction when `dt` is given.
    pub fn energy(&self, state: &WaveState, dt: Option<f64>) -> EnergyRecord {
        let mut e = energy(state, &self.lap, &self.forcing);
        if let Some(dt) = dt {
            let mut f = vec![0.0; self.n_dof()];
            self.force(&state.u, &mut f);
            e.shadow = -dt * dt / 8.0 * self.lap.inner(&f, &f);
            e.total += e.shadow;
        }
        e
    }

    /// One step of the scheme. `dt` may be negative (time reversal).
    pub fn step(&self, state: &WaveState, dt: f64) -> Result<WaveState> {
        let mut force = vec![0.0; self.n_dof()];
        self.force(&state.u, &mut force);
        let mut next = state.clone();
        self.advance(&mut next, &mut force, dt);
        if !next.is_finite() {
            return Err(Error::BlowUp { time: next.t });
        }
        Ok(next)
    }

    /// In-place step; `force` holds F(u_n) on entry and F(u_{n+1}) on exit.
    fn advance(&self, state: &mut WaveState, force: &mut [f64], dt: f64) {
        let half = 0.5 * dt;
        for i in 0..state.u.len() {
            let vh = (state.v[i] + half * force[i]) / (1.0 + self.damping[i] * half);
            state.v[i] = vh;
            state.u[i] += dt * vh;
        }
        self.force(&state.u, force);
        for i in 0..state.u.len() {
            state.v[i] = (1.0 - self.damping[i] * half) * state.v[i] + half * force[i];
        }
        state.t += dt;
    }

    pub fn simulate(&self, initial: &WaveState, opts: &SimOptions) -> Result<Trajectory> {
        if initial.n_dof() != self.n_dof() {
            return Err(Error::DimensionMismatch { expected: self.n_dof(), got: initial.n_dof() });
        }
        if !(opts.dt > 0.0 && opts.dt.is_finite()) || !(opts.t_final > 0.0 && opts.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step and horizon must be positive, got dt = {}, T = {}",
                opts.dt, opts.t_final
            )));
        }
        if opts.dt > self.stability_limit * (1.0 + 1e-12) {
            return Err(Error::TimeStepTooLarge { dt: opts.dt, limit: self.stability_limit });
        }
        let stride = opts.stride.max(1);
        let steps = ((opts.t_final / opts.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = opts.t_final / steps as f64;
        if let Some(ck) = self.forcing.lipschitz() {
            if dt * ck > 0.5 {
                log::warn!("dt * C_k = {} exceeds 0.5; explicit nonlinearity may be inaccurate", dt * ck);
            }
        }

        let mut state = initial.clone();
        let mut force = vec![0.0; self.n_dof()];
        self.force(&state.u, &mut force);
        let mut dissipated = 0.0;
        let mut rate = self.dissipation_rate(&state.v);
        let mut max_amplitude = state.max_abs_u();
        let mut samples = vec![TrajectorySample { t: state.t, energy: self.energy(&state, Some(dt)), dissipated }];
        let mut pending: Vec<f64> = opts.snapshot_times.clone();
        pending.sort_by(f64::total_cmp);
        let mut pending = pending.into_iter().peekable();
        let mut snapshots = Vec::new();
        let t0 = state.t;
        let take_snapshots = |state: &WaveState, pending: &mut std::iter::Peekable<std::vec::IntoIter<f64>>, snaps: &mut Vec<WaveState>| {
            while let Some(&ts) = pending.peek() {
                if ts <= state.t - t0 + 0.5 * dt {
                    snaps.push(state.clone());
                    pending.next();
                } else {
                    break;
                }
            }
        };
        take_snapshots(&state, &mut pending, &mut snapshots);

        for n in 1..=steps {
            self.advance(&mut state, &mut force, dt);
            // Fix the clock to avoid accumulated rounding in t.
            state.t = t0 + n as f64 * dt;
            if !state.is_finite() {
                return Err(Error::BlowUp { time: state.t });
            }
            let next_rate = self.dissipation_rate(&state.v);
            dissipated += 0.5 * dt * (rate + next_rate);
            rate = next_rate;
            max_amplitude = max_amplitude.max(state.max_abs_u());
            if n % stride == 0 || n == steps {
                samples.push(TrajectorySample { t: state.t, energy: self.energy(&state, Some(dt)), dissipated });
            }
            take_snapshots(&state, &mut pending, &mut snapshots);
        }

        Ok(Trajectory { samples, snapshots, final_state: state, dt, steps, max_amplitude })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `(t, |E(t) + D(t) - E(0)| / max(E(0), eps))` per sample.
    pub series: Vec<(f64, f64)>,
    pub max: f64,
}

pub fn energy_identity_residual(traj: &Trajectory) -> ResidualReport {
    let e0 = traj.initial_energy();
    let scale = e0.max(f64::MIN_POSITIVE);
    let series: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|s| (s.t, (s.energy.total + s.dissipated - e0).abs() / scale))
        .collect();
    let max = series.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    ResidualReport { series, max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble_laplacian;
    use crate::geometry::*;
    use crate::nonlinearity::truncate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use BoundaryCondition::{Dirichlet, Neumann};

    fn mesh_1d(n: usize, right: BoundaryCondition) -> Mesh {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::from_faces(&d, &[(Face::Left, Dirichlet), (Face::Right, right)]);
        build_mesh(&d, &p, &[n]).unwrap()
    }

    fn system(mesh: &Mesh, damping: &DampingSpec, forcing: Forcing) -> WaveSystem {
        let lap = assemble_laplacian(mesh).unwrap();
        let field = sample_damping(mesh, damping).unwrap();
        WaveSystem::new(mesh, &lap, &field, forcing).unwrap()
    }

    #[test]
    fn cfl_formula() {
        let m1 = mesh_1d(101, Neumann);
        assert_relative_eq!(cfl_dt(&m1, 0.9), 0.009, max_relative = 1e-14);
        let d = DomainSpec::unit_square();
        let m2 = build_mesh(&d, &BoundaryPartition::uniform(&d, Dirichlet), &[51, 51]).unwrap();
        assert_relative_eq!(cfl_dt(&m2, 0.9), 0.9 * 0.02 / 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(cfl_dt(&m1, 1.05), 0.0105, max_relative = 1e-14);
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let m = mesh_1d(21, Neumann);
        let sys = system(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0), Forcing::None);
        let s = WaveState::zeros(sys.n_dof());
        let next = sys.step(&s, 0.01).unwrap();
        assert_eq!(next.u, s.u);
        assert_eq!(next.v, s.v);
    }

    #[test]
    fn discrete_dispersion_is_exact() {
        // sin(pi x) is an eigenvector of L with eigenvalue -(4/h^2) sin^2(pi h/2);
        // leapfrog then evolves it as cos(theta n) with cos(theta) = 1 - dt^2 lambda/2.
        let n = 41;
        let m = mesh_1d(n, Dirichlet);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let h = m.spacing()[0];
        let dt = 0.5 * h;
        let lambda = 4.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        let theta = (1.0 - 0.5 * dt * dt * lambda).acos();
        let phi = m.sample_dofs(|p| (PI * p[0]).sin());
        let mut s = WaveState::new(phi.clone(), vec![0.0; phi.len()], 0.0).unwrap();
        for step in 1..=200 {
            s = sys.step(&s, dt).unwrap();
            let c = (theta * step as f64).cos();
            for (a, b) in s.u.iter().zip(&phi) {
                assert!((a - b * c).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn continuum_error_is_second_order() {
        let mut errs = Vec::new();
        for n in [21, 41, 81] {
            let m = mesh_1d(n, Dirichlet);
            let sys = system(&m, &DampingSpec::none(), Forcing::None);
            let dt = 0.5 * m.spacing()[0];
            let u0 = m.sample_dofs(|p| (PI * p[0]).sin());
            let init = WaveState::new(u0, vec![0.0; m.n_dof()], 0.0).unwrap();
            let traj = sys.simulate(&init, &SimOptions::new(dt, 1.0)).unwrap();
            let exact = m.sample_dofs(|p| (PI * p[0]).sin() * PI.cos());
            errs.push(traj.final_state.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        assert!((errs[0] / errs[1]).log2() > 1.9 && (errs[1] / errs[2]).log2() > 1.9, "{errs:?}");
    }

    #[test]
    fn pure_damping_recurrence() {
        // Pure Neumann with spatially constant data keeps L u = 0, so every dof
        // follows the scalar recurrence v_{n+1} = (1 - dt/2)/(1 + dt/2) v_n.
        let d = DomainSpec::unit_interval();
        let m = build_mesh(&d, &BoundaryPartition::uniform(&d, Neumann), &[11]).unwrap();
        let sys = system(&m, &DampingSpec::everywhere(&d, 1.0), Forcing::None);
        let dt = 0.05;
        let ratio = (1.0 - dt / 2.0) / (1.0 + dt / 2.0);
        let mut s = WaveState::new(vec![0.0; sys.n_dof()], vec![1.0; sys.n_dof()], 0.0).unwrap();
        for _ in 0..20 {
            s = sys.step(&s, dt).unwrap();
        }
        for v in &s.v {
            assert_relative_eq!(*v, ratio.powi(20), max_relative = 1e-13);
        }
        // The recurrence approximates exp(-t) at second order.
        assert!((ratio.powi(20) - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn undamped_linear_energy_is_conserved() {
        let m = mesh_1d(101, Neumann);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let u0 = m.sample_dofs(|p| (-(p[0] - 0.5).powi(2) / 0.01).exp() * p[0]);
        let init = WaveState::new(u0, vec![0.0; m.n_dof()], 0.0).unwrap();
        // Ten periods of the slowest mode (period 4).
        let traj = sys.simulate(&init, &SimOptions::new(cfl_dt(&m, 0.9), 40.0)).unwrap();
        let r = energy_identity_residual(&traj);
        assert!(r.max <= 1e-10, "drift {}", r.max);
    }

    #[test]
    fn time_reversal() {
        let m = mesh_1d(51, Neumann);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let u0 = m.sample_dofs(|p| (3.0 * p[0]).sin() * p[0]);
        let v0 = m.sample_dofs(|p| (5.0 * p[0]).cos() * p[0]);
        let init = WaveState::new(u0, v0, 0.0).unwrap();
        let dt = cfl_dt(&m, 0.9);
        let mut s = init.clone();
        for _ in 0..500 {
            s = sys.step(&s, dt).unwrap();
        }
        for _ in 0..500 {
            s = sys.step(&s, -dt).unwrap();
        }
        let norm = init.u.iter().chain(&init.v).map(|x| x * x).sum::<f64>().sqrt();
        let diff = s.u.iter().zip(&init.u).chain(s.v.iter().zip(&init.v)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-10, "{}", diff / norm);
    }

    #[test]
    fn energy_examples() {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::uniform(&d, Neumann);
        let m = build_mesh(&d, &p, &[11]).unwrap();
        let lap = assemble_laplacian(&m).unwrap();
        let n = m.n_dof();
        assert_eq!(energy(&WaveState::zeros(n), &lap, &Forcing::None).total, 0.0);
        let e = energy(&WaveState::new(vec![0.0; n], vec![1.0; n], 0.0).unwrap(), &lap, &Forcing::None);
        assert_relative_eq!(e.total, 0.5, max_relative = 1e-14);
        let cubic = Forcing::Truncated(truncate(&NonlinearitySpec::cubic(), 1).unwrap());
        let e = energy(&WaveState::new(vec![1.0; n], vec![0.0; n], 0.0).unwrap(), &lap, &cubic);
        assert_relative_eq!(e.nonlinear, 0.25, max_relative = 1e-14);
        assert!(e.potential.abs() < 1e-12);
    }

    #[test]
    fn damped_run_loses_energy() {
        let m = mesh_1d(101, Neumann);
        let forcing = Forcing::Truncated(truncate(&NonlinearitySpec::cubic(), 4).unwrap());
        let sys = system(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0), forcing);
        let u0 = m.sample_dofs(|p| (PI * p[0] / 2.0).sin());
        let init = WaveState::new(u0, vec![0.0; m.n_dof()], 0.0).unwrap();
        let traj = sys.simulate(&init, &SimOptions::new(cfl_dt(&m, 0.9), 5.0)).unwrap();
        let e = traj.energies();
        assert!(e.last().unwrap() < &e[0]);
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].dissipated >= w[0].dissipated);
        }
    }

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let m = mesh_1d(31, Neumann);
        let sys = system(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0), Forcing::None);
        let traj = sys.simulate(&WaveState::zeros(sys.n_dof()), &SimOptions::new(0.01, 1.0)).unwrap();
        assert!(traj.samples.iter().all(|s| s.energy.total == 0.0 && s.dissipated == 0.0));
        assert_eq!(energy_identity_residual(&traj).max, 0.0);
    }

    #[test]
    fn step_above_cfl_is_refused() {
        let m = mesh_1d(11, Neumann);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let err = sys.simulate(&WaveState::zeros(sys.n_dof()), &SimOptions::new(0.2, 1.0));
        assert!(matches!(err, Err(Error::TimeStepTooLarge { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let m = mesh_1d(11, Neumann);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let u0 = m.sample_dofs(|p| if (p[0] - 0.5).abs() < 0.06 { 1.0 } else { 0.0 });
        let init = WaveState::new(u0, vec![0.0; m.n_dof()], 0.0).unwrap();
        // Far beyond the stability limit the state grows without bound.
        let mut s = init;
        let mut failed = None;
        for _ in 0..2000 {
            match sys.step(&s, 0.5) {
                Ok(next) => s = next,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        assert!(matches!(failed, Some(Error::BlowUp { .. })));
    }

    #[test]
    fn snapshots_are_taken() {
        let m = mesh_1d(21, Neumann);
        let sys = system(&m, &DampingSpec::none(), Forcing::None);
        let mut opts = SimOptions::new(0.01, 1.0);
        opts.snapshot_times = vec![0.5, 0.0, 1.0];
        let init = WaveState::new(m.sample_dofs(|p| p[0]), vec![0.0; m.n_dof()], 0.0).unwrap();
        let traj = sys.simulate(&init, &opts).unwrap();
        let ts: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 3);
        assert_relative_eq!(ts[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(traj.dissipated_at(0.55).unwrap(), 0.0);
    }
}
