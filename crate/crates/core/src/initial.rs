//! Initial-data families used by the experiments.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};
use crate::integrator::{WaveState, WaveSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`.
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
        /// Put the profile into the velocity instead of the displacement.
        #[serde(default)]
        velocity: bool,
    },
    /// `amplitude * prod_i sin(w_i pi (x_i - lo_i) / L_i)`, with cosine
    /// factors on the axes flagged in `cosine_axes`.
    Sine {
        amplitude: f64,
        wavenumbers: Vec<f64>,
        #[serde(default)]
        cosine_axes: Vec<bool>,
        #[serde(default)]
        velocity: bool,
    },
    /// 2D packet `amplitude * exp(-(x - center_x)^2 / (2 width^2)) * sin(mode pi (y - lo) / L_y)`,
    /// concentrated on a vertical bouncing-ball orbit.
    Trapped {
        amplitude: f64,
        center_x: f64,
        width: f64,
        mode: f64,
        #[serde(default)]
        velocity: bool,
    },
    /// Band-limited random velocity with `modes` basis functions per axis,
    /// zero displacement, normalized to unit energy.
    Random { modes: usize, seed: u64, index: u64 },
}

impl InitialData {
    pub fn state(&self, mesh: &Mesh, system: &WaveSystem) -> Result<WaveState> {
        let n = mesh.n_dof();
        let dim = mesh.dimension();
        let ext = mesh.domain().extents().to_vec();
        let xi = move |p: Point, axis: usize| (p[axis] - ext[axis].lo) / ext[axis].length();
        let place = |profile: Vec<f64>, velocity: bool| -> Result<WaveState> {
            if velocity {
                WaveState::new(vec![0.0; n], profile, 0.0)
            } else {
                WaveState::new(profile, vec![0.0; n], 0.0)
            }
        };
        match self {
            InitialData::Zero => Ok(WaveState::zeros(n)),
            InitialData::Gaussian { amplitude, center, width, velocity } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
                }
                check_positive("width", *width)?;
                let prof = mesh.sample_dofs(|p| {
                    let r2: f64 = (0..dim).map(|a| (p[a] - center[a]).powi(2)).sum();
                    amplitude * (-r2 / (2.0 * width * width)).exp()
                });
                place(prof, *velocity)
            }
            InitialData::Sine { amplitude, wavenumbers, cosine_axes, velocity } => {
                if wavenumbers.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: wavenumbers.len() });
                }
                if cosine_axes.len() > dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: cosine_axes.len() });
                }
                let cos_axis = |a: usize| cosine_axes.get(a).copied().unwrap_or(false);
                let prof = mesh.sample_dofs(|p| {
                    amplitude
                        * (0..dim)
                            .map(|a| {
                                let arg = wavenumbers[a] * PI * xi(p, a);
                                if cos_axis(a) {
                                    arg.cos()
                                } else {
                                    arg.sin()
                                }
                            })
                            .product::<f64>()
                });
                place(prof, *velocity)
            }
            InitialData::Trapped { amplitude, center_x, width, mode, velocity } => {
                if dim != 2 {
                    return Err(Error::InvalidArgument("trapped packets need a 2D domain".into()));
                }
                check_positive("width", *width)?;
                let prof = mesh.sample_dofs(|p| {
                    let g = (-(p[0] - center_x).powi(2) / (2.0 * width * width)).exp();
                    amplitude * g * (mode * PI * xi(p, 1)).sin()
                });
                place(prof, *velocity)
            }
            InitialData::Random { modes, seed, index } => {
                if *modes == 0 {
                    return Err(Error::InvalidArgument("random data needs at least one mode".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(*index);
                let count = modes.pow(dim as u32);
                let coeffs: Vec<f64> = (0..count).map(|_| StandardNormal.sample(&mut rng)).collect();
                let v = mesh.sample_dofs(|p| {
                    let mut acc = 0.0;
                    for (c, &coef) in coeffs.iter().enumerate() {
                        let mut term = coef;
                        let mut rest = c;
                        for a in 0..dim {
                            term *= basis(rest % modes, xi(p, a));
                            rest /= modes;
                        }
                        acc += term;
                    }
                    acc
                });
                let state = WaveState::new(vec![0.0; n], v, 0.0)?;
                let e = system.energy(&state, None).total;
                if e <= 0.0 {
                    return Err(Error::ZeroInitialEnergy);
                }
                Ok(state.scaled(1.0 / e.sqrt()))
            }
        }
    }
}

/// Alternating sine/cosine basis on [0, 1]: sin(pi x), cos(pi x), sin(2 pi x), ...
fn basis(m: usize, x: f64) -> f64 {
    let j = (m / 2 + 1) as f64;
    if m % 2 == 0 {
        (j * PI * x).sin()
    } else {
        (j * PI * x).cos()
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble_laplacian;
    use crate::geometry::*;
    use crate::integrator::Forcing;

    fn setup() -> (Mesh, WaveSystem) {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::from_faces(
            &d,
            &[(Face::Left, BoundaryCondition::Dirichlet), (Face::Right, BoundaryCondition::Neumann)],
        );
        let m = build_mesh(&d, &p, &[51]).unwrap();
        let lap = assemble_laplacian(&m).unwrap();
        let f = sample_damping(&m, &DampingSpec::none()).unwrap();
        let sys = WaveSystem::new(&m, &lap, &f, Forcing::None).unwrap();
        (m, sys)
    }

    #[test]
    fn random_data_has_unit_energy_and_is_reproducible() {
        let (m, sys) = setup();
        let gen = |index| InitialData::Random { modes: 8, seed: 42, index }.state(&m, &sys).unwrap();
        let a = gen(0);
        assert!((sys.energy(&a, None).total - 1.0).abs() < 1e-12);
        assert!(a.u.iter().all(|&x| x == 0.0));
        assert_eq!(a, gen(0));
        assert_ne!(a, gen(1));
    }

    #[test]
    fn sine_profile() {
        let (m, sys) = setup();
        let s = InitialData::Sine { amplitude: 2.0, wavenumbers: vec![0.5], cosine_axes: vec![], velocity: false }.state(&m, &sys).unwrap();
        assert!((s.u.last().unwrap() - 2.0).abs() < 1e-12);
        let bad = InitialData::Sine { amplitude: 1.0, wavenumbers: vec![1.0, 1.0], cosine_axes: vec![], velocity: true };
        assert!(bad.state(&m, &sys).is_err());
    }

    #[test]
    fn config_round_trip() {
        let d: InitialData = serde_json::from_str(r#"{"kind":"gaussian","amplitude":1.0,"center":[0.3],"width":0.05}"#).unwrap();
        assert_eq!(d, InitialData::Gaussian { amplitude: 1.0, center: vec![0.3], width: 0.05, velocity: false });
    }
}
