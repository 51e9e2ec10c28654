//! Experiment configuration: a sectioned TOML file with every default
//! spelled out in the resolved copy written next to the results.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use wavezar_core::geometry::boundary_frame;
use wavezar_core::nonlinearity::validate;
use wavezar_core::stability::Experiment;
use wavezar_core::{
    build_mesh, cfl_dt, AdmissibilityMode, BoundaryCondition, BoundaryPartition, BoundarySegment, BoxRegion,
    DampingProfile, DampingSpec, DomainSpec, Face, InitialData, Interval, NonlinearitySpec, WaveState,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub damping: DampingSection,
    #[serde(default)]
    pub nonlinearity: NonlinearitySection,
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default = "zero_data")]
    pub initial: InitialData,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn zero_data() -> InitialData {
    InitialData::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// One `[lo, hi]` pair per axis.
    pub extents: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default)]
    pub dirichlet: Vec<String>,
    #[serde(default)]
    pub neumann: Vec<String>,
    /// Face pieces, for faces split between the two conditions.
    #[serde(default, rename = "segment", skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub face: String,
    pub range: [f64; 2],
    pub condition: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    #[default]
    Indicator,
    SmoothBump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSection {
    /// Boxes, each a list of `[lo, hi]` per axis.
    #[serde(default)]
    pub region: Vec<Vec<[f64; 2]>>,
    /// Adds a boundary layer of this width to the region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<f64>,
    #[serde(default)]
    pub a0: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub profile: ProfileName,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

impl Default for DampingSection {
    fn default() -> Self {
        Self { region: Vec::new(), frame: None, a0: 0.0, amplitude: 1.0, profile: ProfileName::Indicator, margin: 0.05 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoneKeyword {
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Truncation {
    Level(u32),
    Off(NoneKeyword),
}

impl Truncation {
    pub fn level(self) -> Option<u32> {
        match self {
            Truncation::Level(k) => Some(k),
            Truncation::Off(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    #[serde(default = "zero_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default = "no_truncation")]
    pub truncation: Truncation,
    #[serde(default = "existence")]
    pub mode: AdmissibilityMode,
    /// Space dimension used for the exponent ranges, if not the domain's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_dimension: Option<usize>,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self {
            name: zero_name(),
            p: None,
            truncation: no_truncation(),
            mode: existence(),
            check_dimension: None,
        }
    }
}

fn zero_name() -> String {
    "zero".into()
}

fn no_truncation() -> Truncation {
    Truncation::Off(NoneKeyword::None)
}

fn existence() -> AdmissibilityMode {
    AdmissibilityMode::Existence
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Nodes per axis, boundary nodes included.
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CflKeyword {
    #[serde(rename = "cfl")]
    Cfl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Auto(CflKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_final: f64,
    #[serde(default = "cfl")]
    pub dt: TimeStep,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Times at which full states are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn cfl() -> TimeStep {
    TimeStep::Auto(CflKeyword::Cfl)
}

fn default_safety() -> f64 {
    0.9
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Basis functions per axis for random ensemble data.
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Observation horizon; defaults to the estimated control time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Control time and observability constant to use instead of
    /// estimating them (decay subcommand).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_obs: Option<f64>,
    #[serde(default = "default_mu_min")]
    pub mu_min: f64,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    #[serde(default = "default_mu_points")]
    pub mu_points: usize,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<u32>,
    /// Decay fit window; defaults to `[T0, t_final]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_end: Option<f64>,
    #[serde(default = "default_origins")]
    pub origins: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            ensemble: default_ensemble(),
            seed: default_seed(),
            modes: default_modes(),
            horizon: None,
            t0: None,
            c_obs: None,
            mu_min: default_mu_min(),
            mu_max: default_mu_max(),
            mu_points: default_mu_points(),
            k_list: default_k_list(),
            fit_start: None,
            fit_end: None,
            origins: default_origins(),
            directions: default_directions(),
            t_max: default_t_max(),
        }
    }
}

fn default_ensemble() -> usize {
    20
}
fn default_seed() -> u64 {
    42
}
fn default_modes() -> usize {
    8
}
fn default_mu_min() -> f64 {
    -50.0
}
fn default_mu_max() -> f64 {
    50.0
}
fn default_mu_points() -> usize {
    201
}
fn default_k_list() -> Vec<u32> {
    vec![1, 2, 4, 8, 16]
}
fn default_origins() -> usize {
    32
}
fn default_directions() -> usize {
    64
}
fn default_t_max() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: String,
    /// Emit a gnuplot script alongside the tables.
    #[serde(default = "yes")]
    pub plot: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out(), plot: true }
    }
}

fn default_out() -> String {
    "wavezar-out".into()
}

fn yes() -> bool {
    true
}

/// Everything a run needs, built and checked from a config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub domain: DomainSpec,
    pub region: Vec<BoxRegion>,
    pub experiment: Experiment,
    pub initial: WaveState,
}

fn interval(pair: [f64; 2]) -> Interval {
    Interval::new(pair[0], pair[1])
}

fn face(name: &str) -> Result<Face> {
    Face::parse(name).ok_or_else(|| anyhow!("boundary: unknown face '{name}' (expected left, right, bottom or top)"))
}

fn condition(name: &str) -> Result<BoundaryCondition> {
    match name {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neumann" => Ok(BoundaryCondition::Neumann),
        other => bail!("boundary: unknown condition '{other}' (expected dirichlet or neumann)"),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("config: cannot parse")?;
        cfg.build().map(|_| cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config: {}", path.display()))
    }

    /// Resolved config as TOML, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("config: cannot serialize")
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.domain.extents.iter().copied().map(interval).collect()).context("domain")
    }

    pub fn partition(&self, domain: &DomainSpec) -> Result<BoundaryPartition> {
        let mut faces = Vec::new();
        for name in &self.boundary.dirichlet {
            faces.push((face(name)?, BoundaryCondition::Dirichlet));
        }
        for name in &self.boundary.neumann {
            faces.push((face(name)?, BoundaryCondition::Neumann));
        }
        let mut partition = BoundaryPartition::from_faces(domain, &faces);
        if !self.boundary.segments.is_empty() {
            let mut segments = partition.segments().to_vec();
            for s in &self.boundary.segments {
                segments.push(BoundarySegment { face: face(&s.face)?, range: interval(s.range), condition: condition(&s.condition)? });
            }
            partition = BoundaryPartition::new(segments);
        }
        partition.validate(domain).context("geometry: boundary partition")?;
        if !partition.is_zaremba() {
            bail!("geometry: the boundary needs both a Dirichlet and a Neumann portion");
        }
        Ok(partition)
    }

    pub fn region(&self, domain: &DomainSpec) -> Result<Vec<BoxRegion>> {
        let mut region: Vec<BoxRegion> =
            self.damping.region.iter().map(|b| BoxRegion::new(b.iter().copied().map(interval).collect())).collect();
        if let Some(w) = self.damping.frame {
            let half = domain.extents().iter().map(Interval::length).fold(f64::INFINITY, f64::min) / 2.0;
            if !(w > 0.0 && w < half) {
                bail!("damping: frame width must lie in (0, {half}), got {w}");
            }
            region.extend(boundary_frame(domain, w));
        }
        Ok(region)
    }

    pub fn damping_spec(&self, domain: &DomainSpec) -> Result<DampingSpec> {
        let profile = match self.damping.profile {
            ProfileName::Indicator => DampingProfile::Indicator,
            ProfileName::SmoothBump => DampingProfile::SmoothBump { margin: self.damping.margin },
        };
        Ok(DampingSpec { region: self.region(domain)?, a0: self.damping.a0, amplitude: self.damping.amplitude, profile })
    }

    pub fn nonlinearity(&self, dimension: usize) -> Result<NonlinearitySpec> {
        let n = &self.nonlinearity;
        let spec = NonlinearitySpec::from_name(&n.name, n.p).context("nonlinearity")?;
        let dim = n.check_dimension.unwrap_or(dimension);
        let report = validate(&spec, dim, n.mode);
        if !report.passed() {
            bail!("nonlinearity.validate: {}", report.messages.join("; "));
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<Setup> {
        let domain = self.domain()?;
        let partition = self.partition(&domain)?;
        if self.grid.nodes.len() != domain.dimension() {
            bail!("grid: expected {} node counts, got {}", domain.dimension(), self.grid.nodes.len());
        }
        let mesh = build_mesh(&domain, &partition, &self.grid.nodes).context("grid")?;
        let damping = self.damping_spec(&domain)?;
        let f = self.nonlinearity(domain.dimension())?;
        let t = &self.time;
        if !(t.t_final > 0.0 && t.t_final.is_finite()) {
            bail!("time: t_final must be positive, got {}", t.t_final);
        }
        if !(t.safety > 0.0 && t.safety <= 1.0) {
            bail!("time: safety must lie in (0, 1], got {}", t.safety);
        }
        if t.stride == 0 {
            bail!("time: stride must be at least 1");
        }
        let dt = match t.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto(_) => cfl_dt(&mesh, t.safety),
        };
        let limit = wavezar_core::integrator::stability_limit(&mesh);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            bail!("integrator: time step {dt} outside (0, {limit}] (CFL limit h_min / sqrt(d))");
        }
        let experiment = Experiment::new(mesh, &damping, f, self.nonlinearity.truncation.level(), Some(dt))
            .context("damping/nonlinearity")?
            .with_stride(t.stride);
        let system = experiment.system(false)?;
        let initial = self.initial.state(&experiment.mesh, &system).context("initial")?;
        let a = &self.analysis;
        if a.ensemble == 0 || a.modes == 0 {
            bail!("analysis: ensemble and modes must be at least 1");
        }
        if a.origins < 8 || a.directions < 8 {
            bail!("gcc_ray: need at least 8 origins per axis and 8 directions");
        }
        if !(a.t_max > 0.0) {
            bail!("gcc_ray: t_max must be positive");
        }
        if a.mu_points == 0 || !(a.mu_min <= a.mu_max) {
            bail!("stability: resolvent range needs mu_min <= mu_max and mu_points >= 1");
        }
        if a.k_list.is_empty() || a.k_list[0] == 0 || a.k_list.windows(2).any(|w| w[0] >= w[1]) {
            bail!("stability: k_list must be strictly ascending positive levels");
        }
        Ok(Setup { region: damping.region.clone(), domain, experiment, initial })
    }
}
