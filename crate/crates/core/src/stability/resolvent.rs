use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{BlockGenerator, DENSE_DOF_CAP};
use crate::error::{Error, Result};

/// Scan maxima above this value count as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;
const REFINE_LEVELS: usize = 3;
const REFINE_POINTS: usize = 41;
const GROWTH_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    DivergingNear { mu: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventScan {
    pub mu: Vec<f64>,
    pub norms: Vec<f64>,
    pub sup: f64,
    pub argmax: f64,
    /// Maximum after each local refinement level around the argmax.
    pub refined_sups: Vec<f64>,
    pub verdict: Verdict,
}

/// `1 / sigma_min(A - i mu I)` for a real matrix `A`.
pub fn resolvent_norm(a: &DMatrix<f64>, mu: f64) -> f64 {
    let n = a.nrows();
    let mut z: DMatrix<Complex64> = a.map(|x| Complex64::new(x, 0.0));
    for i in 0..n {
        z[(i, i)] -= Complex64::new(0.0, mu);
    }
    let s = z.singular_values();
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    1.0 / smin.max(f64::MIN_POSITIVE)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
}

/// Resolvent norms along `i mu` measured in the energy norm of the
/// generator's state space.
pub fn resolvent_scan(gen: &BlockGenerator, mu_min: f64, mu_max: f64, n_points: usize) -> Result<ResolventScan> {
    if gen.n_dof() > DENSE_DOF_CAP {
        return Err(Error::DenseCapExceeded { n_dof: gen.n_dof(), cap: DENSE_DOF_CAP });
    }
    if n_points == 0 || !(mu_min <= mu_max) || (n_points > 1 && mu_min == mu_max) {
        return Err(Error::InvalidArgument(format!(
            "resolvent scan needs mu_min < mu_max and at least one point, got [{mu_min}, {mu_max}] with {n_points}"
        )));
    }
    let a = gen.to_dense_energy()?;
    let eval = |mus: &[f64]| -> Vec<f64> { mus.par_iter().map(|&m| resolvent_norm(&a, m)).collect() };

    let mu = grid(mu_min, mu_max, n_points);
    let norms = eval(&mu);
    let k = argmax(&norms);
    let sup = norms[k];
    let mut refined_sups = Vec::new();
    if n_points > 1 {
        let mut center = mu[k];
        let mut half = (mu_max - mu_min) / (n_points - 1) as f64;
        for _ in 0..REFINE_LEVELS {
            let local = grid(center - half, center + half, REFINE_POINTS);
            let vals = eval(&local);
            let j = argmax(&vals);
            refined_sups.push(vals[j].max(*refined_sups.last().unwrap_or(&sup)));
            center = local[j];
            half *= 2.0 / (REFINE_POINTS - 1) as f64;
        }
    }
    let refined = refined_sups.last().copied().unwrap_or(sup);
    let verdict = if sup > DIVERGENCE_THRESHOLD || refined > DIVERGENCE_THRESHOLD || refined >= GROWTH_FACTOR * sup {
        Verdict::DivergingNear { mu: mu[k] }
    } else {
        Verdict::Bounded
    };
    let argmax = mu[k];
    Ok(ResolventScan { mu, norms, sup, argmax, refined_sups, verdict })
}
