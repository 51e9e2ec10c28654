//! The nonlinearity f, its admissibility checks, and the truncation f_k
//! together with its a.e. derivative g_k, primitive F_k and Lipschitz
//! constant C_k.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute tolerance of the adaptive Simpson fallback for F.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Safety factor applied to the grid maximum of |f'| on [-k, k].
pub const LIPSCHITZ_SAFETY: f64 = 1.001;

#[derive(Clone)]
pub struct NonlinearitySpec {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
    d2f: ScalarFn,
    primitive: Option<ScalarFn>,
    p: f64,
    k0: f64,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("k0", &self.k0)
            .field("closed_form_primitive", &self.primitive.is_some())
            .finish()
    }
}

impl NonlinearitySpec {
    /// User nonlinearity from evaluators of f, f' and f''.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p: f64,
        k0: f64,
    ) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidNonlinearity(format!("growth exponent p must be >= 1, got {p}")));
        }
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::InvalidNonlinearity(format!("growth constant k_0 must be > 0, got {k0}")));
        }
        let f0 = f(0.0);
        if f0 != 0.0 {
            return Err(Error::InvalidNonlinearity(format!("f(0) must vanish, got {f0}")));
        }
        Ok(Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
            primitive: None,
            p,
            k0,
        })
    }

    pub fn with_primitive(mut self, big_f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(big_f));
        self
    }

    /// f(s) = s |s|^(p-1).
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidNonlinearity(format!("growth exponent p must be >= 1, got {p}")));
        }
        let d2f = move |s: f64| {
            if p == 1.0 {
                0.0
            } else if s == 0.0 {
                if p > 2.0 || p == 2.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                p * (p - 1.0) * s.signum() * s.abs().powf(p - 2.0)
            }
        };
        Ok(Self::custom(
            format!("power(p={p})"),
            move |s: f64| s * s.abs().powf(p - 1.0),
            move |s: f64| p * s.abs().powf(p - 1.0),
            d2f,
            p,
            p * f64::max(1.0, p - 1.0),
        )?
        .with_primitive(move |s: f64| s.abs().powf(p + 1.0) / (p + 1.0)))
    }

    pub fn cubic() -> Self {
        Self::custom("cubic", |s| s * s * s, |s| 3.0 * s * s, |s| 6.0 * s, 3.0, 6.0)
            .unwrap()
            .with_primitive(|s| 0.25 * s * s * s * s)
    }

    pub fn linear() -> Self {
        Self::custom("linear", |s| s, |_| 1.0, |_| 0.0, 1.0, 1.0)
            .unwrap()
            .with_primitive(|s| 0.5 * s * s)
    }

    pub fn zero() -> Self {
        Self::custom("zero", |_| 0.0, |_| 0.0, |_| 0.0, 1.0, 1.0)
            .unwrap()
            .with_primitive(|_| 0.0)
    }

    /// Catalog lookup: `cubic`, `linear`, `zero`, or `power` (needs `p`).
    pub fn from_name(name: &str, p: Option<f64>) -> Result<Self> {
        match name {
            "cubic" => Ok(Self::cubic()),
            "linear" => Ok(Self::linear()),
            "zero" => Ok(Self::zero()),
            "power" => Self::power(p.ok_or_else(|| {
                Error::InvalidNonlinearity("power nonlinearity needs an exponent p".into())
            })?),
            other => Err(Error::InvalidNonlinearity(format!("unknown nonlinearity '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        (self.df)(s)
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        (self.d2f)(s)
    }

    pub fn has_closed_primitive(&self) -> bool {
        self.primitive.is_some()
    }

    /// F(s) = int_0^s f, closed form when available, adaptive Simpson otherwise.
    pub fn primitive(&self, s: f64) -> f64 {
        match &self.primitive {
            Some(big_f) => big_f(s),
            None => adaptive_simpson(&*self.f, 0.0, s, QUADRATURE_TOL),
        }
    }

    /// True for f identically zero in the catalog sense.
    pub fn is_zero(&self) -> bool {
        self.name == "zero"
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn probe_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "probe grid needs at least two points");
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Default admissibility probe: 401 points on [-10, 10].
pub fn default_probe_grid() -> Vec<f64> {
    probe_grid(-10.0, 10.0, 401)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdmissibilityMode {
    Existence,
    Uniqueness,
}

/// Outcome of one pointwise check; `witness` is the first failing probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub witness: Option<f64>,
}

impl Check {
    fn over(grid: &[f64], ok: impl Fn(f64) -> bool) -> Self {
        let witness = grid.iter().copied().find(|&s| !ok(s));
        Self { passed: witness.is_none(), witness }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub name: String,
    pub dimension: usize,
    pub mode: AdmissibilityMode,
    pub p: f64,
    pub sign_condition: Check,
    /// |f'(s)| <= k_0 (1+|s|)^(p-1).
    pub growth_first: Check,
    /// |f''(s)| <= k_0 (1+|s|)^(p-2).
    pub growth_second: Check,
    /// 0 <= F(s) <= f(s) s.
    pub primitive_bounds: Check,
    pub exponent_existence: bool,
    pub exponent_uniqueness: bool,
    pub messages: Vec<String>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        let exponent = match self.mode {
            AdmissibilityMode::Existence => self.exponent_existence,
            AdmissibilityMode::Uniqueness => self.exponent_existence && self.exponent_uniqueness,
        };
        self.sign_condition.passed
            && self.growth_first.passed
            && self.growth_second.passed
            && self.primitive_bounds.passed
            && exponent
    }
}

/// `1 <= p <= (n+2)/(n-2)` for n >= 3, any `p >= 1` for n = 1, 2.
pub fn exponent_allows_existence(p: f64, n: usize) -> bool {
    p >= 1.0 && (n <= 2 || p <= (n as f64 + 2.0) / (n as f64 - 2.0))
}

/// `1 <= p < n/(n-2)` for n >= 3, any `p >= 1` for n = 1, 2.
pub fn exponent_allows_uniqueness(p: f64, n: usize) -> bool {
    p >= 1.0 && (n <= 2 || p < n as f64 / (n as f64 - 2.0))
}

pub fn validate(spec: &NonlinearitySpec, dimension: usize, mode: AdmissibilityMode) -> AdmissibilityReport {
    validate_on(spec, dimension, mode, &default_probe_grid())
}

pub fn validate_on(
    spec: &NonlinearitySpec,
    dimension: usize,
    mode: AdmissibilityMode,
    grid: &[f64],
) -> AdmissibilityReport {
    const REL: f64 = 1e-12;
    let (p, k0) = (spec.p, spec.k0);
    let sign_condition = Check::over(grid, |s| spec.eval(s) * s >= 0.0);
    let growth_first = Check::over(grid, |s| {
        spec.derivative(s).abs() <= k0 * (1.0 + s.abs()).powf(p - 1.0) * (1.0 + REL)
    });
    let growth_second = Check::over(grid, |s| {
        spec.second_derivative(s).abs() <= k0 * (1.0 + s.abs()).powf(p - 2.0) * (1.0 + REL)
    });
    let primitive_bounds = Check::over(grid, |s| {
        let big_f = spec.primitive(s);
        let fs = spec.eval(s) * s;
        let slack = REL * (1.0 + fs.abs()) + QUADRATURE_TOL;
        big_f >= -slack && big_f <= fs + slack
    });
    let exponent_existence = exponent_allows_existence(p, dimension);
    let exponent_uniqueness = exponent_allows_uniqueness(p, dimension);

    let mut messages = Vec::new();
    if let Some(s) = sign_condition.witness {
        messages.push(format!("sign condition f(s) s >= 0 fails at s = {s}"));
    }
    if let Some(s) = growth_first.witness {
        messages.push(format!("|f'(s)| <= k_0 (1+|s|)^(p-1) fails at s = {s}"));
    }
    if let Some(s) = growth_second.witness {
        messages.push(format!("|f''(s)| <= k_0 (1+|s|)^(p-2) fails at s = {s}"));
    }
    if let Some(s) = primitive_bounds.witness {
        messages.push(format!("0 <= F(s) <= f(s) s fails at s = {s}"));
    }
    if !exponent_existence {
        messages.push(format!(
            "p = {p} exceeds the existence range p <= (n+2)/(n-2) = {} for n = {dimension}",
            (dimension as f64 + 2.0) / (dimension as f64 - 2.0)
        ));
    }
    if mode == AdmissibilityMode::Uniqueness && !exponent_uniqueness {
        messages.push(format!(
            "p = {p} is outside the uniqueness/decay range p < n/(n-2) = {} for n = {dimension}",
            dimension as f64 / (dimension as f64 - 2.0)
        ));
    }

    AdmissibilityReport {
        name: spec.name.clone(),
        dimension,
        mode,
        p,
        sign_condition,
        growth_first,
        growth_second,
        primitive_bounds,
        exponent_existence,
        exponent_uniqueness,
        messages,
    }
}

/// f_k: equal to f on [-k, k] and frozen at f(+-k) outside.
#[derive(Debug, Clone)]
pub struct TruncatedNonlinearity {
    base: NonlinearitySpec,
    level: u32,
    k: f64,
    lipschitz: f64,
    f_plus: f64,
    f_minus: f64,
    big_f_plus: f64,
    big_f_minus: f64,
}

pub fn truncate(spec: &NonlinearitySpec, level: u32) -> Result<TruncatedNonlinearity> {
    if level < 1 {
        return Err(Error::InvalidTruncationLevel(level));
    }
    let k = level as f64;
    let mut tn = TruncatedNonlinearity {
        base: spec.clone(),
        level,
        k,
        lipschitz: 0.0,
        f_plus: spec.eval(k),
        f_minus: spec.eval(-k),
        big_f_plus: spec.primitive(k),
        big_f_minus: spec.primitive(-k),
    };
    tn.lipschitz = lipschitz_constant(&tn)?;
    Ok(tn)
}

/// `LIPSCHITZ_SAFETY * max |f'|` over `1000 k + 1` points of [-k, k].
pub fn lipschitz_constant(tn: &TruncatedNonlinearity) -> Result<f64> {
    let n = 1000 * tn.level as usize + 1;
    let mut max = 0.0_f64;
    for s in probe_grid(-tn.k, tn.k, n) {
        let d = tn.base.derivative(s).abs();
        if !d.is_finite() {
            return Err(Error::InvalidNonlinearity(format!("f' is not finite at s = {s}")));
        }
        max = max.max(d);
    }
    Ok(LIPSCHITZ_SAFETY * max)
}

impl TruncatedNonlinearity {
    pub fn base(&self) -> &NonlinearitySpec {
        &self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cached global Lipschitz constant C_k.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s.abs() <= self.k {
            self.base.eval(s)
        } else if s > self.k {
            self.f_plus
        } else {
            self.f_minus
        }
    }

    /// g_k(s): f'(s) on the closed interval [-k, k], zero outside.
    pub fn eval_gk(&self, s: f64) -> f64 {
        if s.abs() <= self.k {
            self.base.derivative(s)
        } else {
            0.0
        }
    }

    /// F_k(s) = int_0^s f_k.
    pub fn eval_fk_primitive(&self, s: f64) -> f64 {
        if s.abs() <= self.k {
            self.base.primitive(s)
        } else if s > self.k {
            self.big_f_plus + self.f_plus * (s - self.k)
        } else {
            self.f_minus * (s + self.k) + self.big_f_minus
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Smallest c with |F_k(s)| <= c (s^2 + |s|^(p+1)) on the grid, per level.
    pub per_level: Vec<(u32, f64)>,
    pub c_max: f64,
    /// First level from which all later constants agree within 5%.
    pub stabilized_from: Option<u32>,
    pub uniform: bool,
}

/// Smallest c with |F_k(s)| <= c (s^2 + |s|^(p+1)) on the grid.
pub fn growth_constant(tn: &TruncatedNonlinearity, grid: &[f64]) -> f64 {
    let p = tn.base.p;
    grid.iter()
        .filter(|s| **s != 0.0)
        .map(|&s| tn.eval_fk_primitive(s).abs() / (s * s + s.abs().powf(p + 1.0)))
        .fold(0.0, f64::max)
}

pub fn check_fk_growth(spec: &NonlinearitySpec, levels: &[u32], grid: &[f64]) -> Result<GrowthReport> {
    let per_level = levels
        .iter()
        .map(|&k| Ok((k, growth_constant(&truncate(spec, k)?, grid))))
        .collect::<Result<Vec<_>>>()?;
    let c_max = per_level.iter().map(|&(_, c)| c).fold(0.0, f64::max);
    let within = |a: f64, b: f64| (a - b).abs() <= 0.05 * a.max(b) || a.max(b) == 0.0;
    let stabilized_from = (0..per_level.len())
        .find(|&i| {
            let tail = &per_level[i..];
            tail.iter().all(|&(_, a)| tail.iter().all(|&(_, b)| within(a, b)))
        })
        .map(|i| per_level[i].0);
    Ok(GrowthReport {
        uniform: c_max.is_finite() && stabilized_from.is_some(),
        per_level,
        c_max,
        stabilized_from,
    })
}
