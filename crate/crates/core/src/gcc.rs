//! Geometric control: unit-speed billiard rays in the rectangle, first entry
//! into the control region, and a sampled estimate of the control time T0.
//!
//! Rays reflect specularly; a corner hit reverses both components. The
//! control region is a union of boxes and a ray enters it when it reaches the
//! open interior of one of them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, DomainSpec, Point};

/// Margin applied to the largest sampled entry time.
pub const T0_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathVertex {
    pub t: f64,
    pub point: Point,
    /// Direction of travel after this vertex.
    pub direction: [f64; 2],
}

/// A traced billiard trajectory: start, one vertex per reflection, and the
/// end point at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ray {
    pub dimension: usize,
    pub origin: Point,
    pub direction: [f64; 2],
    pub t_max: f64,
    pub path: Vec<PathVertex>,
    #[serde(skip)]
    domain: DomainSpec,
}

impl Ray {
    /// Reflection events (vertices strictly between start and horizon).
    pub fn reflections(&self) -> &[PathVertex] {
        let n = self.path.len();
        if n <= 2 {
            &[]
        } else {
            &self.path[1..n - 1]
        }
    }

    pub fn position(&self, t: f64) -> Point {
        let k = self.path.partition_point(|v| v.t <= t).max(1) - 1;
        let v = &self.path[k];
        let dt = t - v.t;
        [v.point[0] + v.direction[0] * dt, v.point[1] + v.direction[1] * dt]
    }
}

fn check_inputs(domain: &DomainSpec, origin: Point, direction: [f64; 2], t_max: f64) -> Result<()> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("ray horizon must be positive, got {t_max}")));
    }
    if !domain.contains(origin) {
        return Err(Error::InvalidArgument(format!("ray origin {origin:?} lies outside the domain")));
    }
    let dim = domain.dimension();
    let norm: f64 = direction[..dim].iter().map(|d| d * d).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 || (dim == 1 && direction[1] != 0.0) {
        return Err(Error::InvalidArgument(format!("ray direction {direction:?} is not a unit vector")));
    }
    Ok(())
}

/// Walks the billiard path segment by segment; `visit(t_start, p, d, length)`
/// may stop the walk by returning `true`.
fn walk(
    domain: &DomainSpec,
    origin: Point,
    direction: [f64; 2],
    t_max: f64,
    mut visit: impl FnMut(f64, Point, [f64; 2], f64) -> bool,
    mut reflect: impl FnMut(f64, Point, [f64; 2]),
) {
    let dim = domain.dimension();
    let mut p = origin;
    let mut d = direction;
    let mut t = 0.0;
    while t < t_max {
        let mut hits = [f64::INFINITY; 2];
        for a in 0..dim {
            let e = domain.extent(a);
            if d[a] > 0.0 {
                hits[a] = ((e.hi - p[a]) / d[a]).max(0.0);
            } else if d[a] < 0.0 {
                hits[a] = ((e.lo - p[a]) / d[a]).max(0.0);
            }
        }
        let t_hit = hits[0].min(hits[1]);
        let len = t_hit.min(t_max - t);
        if visit(t, p, d, len) {
            return;
        }
        for a in 0..dim {
            p[a] += d[a] * len;
        }
        t += len;
        if t >= t_max {
            break;
        }
        for a in 0..dim {
            if hits[a] - t_hit <= 1e-12 * (1.0 + t_hit) {
                let e = domain.extent(a);
                p[a] = if d[a] > 0.0 { e.hi } else { e.lo };
                d[a] = -d[a];
            }
        }
        reflect(t, p, d);
    }
}

pub fn trace_ray(domain: &DomainSpec, origin: Point, direction: [f64; 2], t_max: f64) -> Result<Ray> {
    check_inputs(domain, origin, direction, t_max)?;
    let mut path = vec![PathVertex { t: 0.0, point: origin, direction }];
    let mut end = (origin, direction);
    walk(
        domain,
        origin,
        direction,
        t_max,
        |_, p, d, len| {
            end = ([p[0] + d[0] * len, p[1] + d[1] * len], d);
            false
        },
        |t, p, d| path.push(PathVertex { t, point: p, direction: d }),
    );
    path.push(PathVertex { t: t_max, point: end.0, direction: end.1 });
    Ok(Ray { dimension: domain.dimension(), origin, direction, t_max, path, domain: domain.clone() })
}

/// Region as seen by rays: box sides lying on the domain boundary are pushed
/// slightly outward, so a box is open relative to the closed domain and a
/// ray gliding along the boundary inside a boundary layer counts as inside.
fn effective_region(domain: &DomainSpec, region: &[BoxRegion]) -> Vec<BoxRegion> {
    let tol = domain.tolerance();
    region
        .iter()
        .map(|b| {
            let mut b = b.clone();
            for (a, iv) in b.bounds.iter_mut().enumerate() {
                let e = domain.extent(a);
                if iv.lo <= e.lo + tol {
                    iv.lo = e.lo - 1e3 * tol;
                }
                if iv.hi >= e.hi - tol {
                    iv.hi = e.hi + 1e3 * tol;
                }
            }
            b
        })
        .collect()
}

/// Parameter in `[0, len]` at which the segment first reaches the open box.
fn segment_entry(p: Point, d: [f64; 2], len: f64, b: &BoxRegion) -> Option<f64> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, iv) in b.bounds.iter().enumerate() {
        if d[a] == 0.0 {
            if !(p[a] > iv.lo && p[a] < iv.hi) {
                return None;
            }
        } else {
            let (t1, t2) = ((iv.lo - p[a]) / d[a], (iv.hi - p[a]) / d[a]);
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    if lo < hi && lo < len && hi > 0.0 {
        Some(lo.max(0.0))
    } else {
        None
    }
}

fn region_entry(p: Point, d: [f64; 2], len: f64, region: &[BoxRegion]) -> Option<f64> {
    region.iter().filter_map(|b| segment_entry(p, d, len, b)).reduce(f64::min)
}

/// First time the traced path reaches the interior of the region.
pub fn first_entry_time(ray: &Ray, region: &[BoxRegion]) -> Option<f64> {
    let region = &effective_region(&ray.domain, region);
    ray.path.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        region_entry(a.point, a.direction, b.t - a.t, region).map(|s| a.t + s)
    })
}

/// Entry time computed while tracing, stopping at the first entry.
pub fn entry_time_along(
    domain: &DomainSpec,
    origin: Point,
    direction: [f64; 2],
    region: &[BoxRegion],
    t_max: f64,
) -> Result<Option<f64>> {
    check_inputs(domain, origin, direction, t_max)?;
    let region = &effective_region(domain, region);
    let mut entry = None;
    walk(
        domain,
        origin,
        direction,
        t_max,
        |t, p, d, len| {
            entry = region_entry(p, d, len, region).map(|s| t + s);
            entry.is_some()
        },
        |_, _, _| {},
    );
    Ok(entry)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayWitness {
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
    pub entry_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampling {
    pub origins_per_axis: usize,
    pub directions: usize,
    pub rays: usize,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GccReport {
    pub satisfied: bool,
    pub t0_estimate: Option<f64>,
    pub worst_ray: RayWitness,
    pub sampling: Sampling,
}

/// Unit directions sampled for a domain: both orientations in 1D, `n`
/// equally spaced angles in 2D (components below 1e-15 snapped to zero).
pub fn sample_directions(dimension: usize, n: usize) -> Vec<[f64; 2]> {
    if dimension == 1 {
        return vec![[1.0, 0.0], [-1.0, 0.0]];
    }
    (0..n)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let mut d = [th.cos(), th.sin()];
            for c in &mut d {
                if c.abs() < 1e-15 {
                    *c = 0.0;
                }
            }
            let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
            [d[0] / norm, d[1] / norm]
        })
        .collect()
}

/// Uniform grid of origins including the boundary, x fastest.
pub fn sample_origins(domain: &DomainSpec, per_axis: usize) -> Vec<Point> {
    let dim = domain.dimension();
    let coord = |axis: usize, i: usize| {
        let e = domain.extent(axis);
        e.lo + e.length() * i as f64 / (per_axis - 1) as f64
    };
    let ny = if dim == 2 { per_axis } else { 1 };
    (0..ny)
        .flat_map(|j| (0..per_axis).map(move |i| (i, j)))
        .map(|(i, j)| if dim == 2 { [coord(0, i), coord(1, j)] } else { [coord(0, i), 0.0] })
        .collect()
}

fn boundary_distance(domain: &DomainSpec, p: Point) -> f64 {
    (0..domain.dimension())
        .map(|a| {
            let e = domain.extent(a);
            (p[a] - e.lo).min(e.hi - p[a])
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn control_time(
    domain: &DomainSpec,
    region: &[BoxRegion],
    n_origins: usize,
    n_directions: usize,
    t_max: f64,
) -> Result<GccReport> {
    if n_origins < 8 || n_directions < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 origins per axis and 8 directions, got {n_origins} and {n_directions}"
        )));
    }
    let origins = sample_origins(domain, n_origins);
    let directions = sample_directions(domain.dimension(), n_directions);
    let rays: Vec<(Point, [f64; 2])> =
        origins.iter().flat_map(|&o| directions.iter().map(move |&d| (o, d))).collect();
    let entries = rays
        .par_iter()
        .map(|&(o, d)| entry_time_along(domain, o, d, region, t_max))
        .collect::<Result<Vec<_>>>()?;

    let dim = domain.dimension();
    let witness = |k: usize, entry: Option<f64>| RayWitness {
        origin: rays[k].0[..dim].to_vec(),
        direction: rays[k].1[..dim].to_vec(),
        entry_time: entry,
    };
    let trapped = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_none())
        .map(|(k, _)| k)
        .fold(None::<usize>, |best, k| match best {
            Some(b) if boundary_distance(domain, rays[b].0) >= boundary_distance(domain, rays[k].0) => Some(b),
            _ => Some(k),
        });

    let sampling = Sampling { origins_per_axis: n_origins, directions: directions.len(), rays: rays.len(), t_max };
    if let Some(k) = trapped {
        return Ok(GccReport { satisfied: false, t0_estimate: None, worst_ray: witness(k, None), sampling });
    }
    let (k_worst, worst) = entries
        .iter()
        .enumerate()
        .map(|(k, e)| (k, e.unwrap()))
        .fold((0, f64::NEG_INFINITY), |acc, (k, e)| if e > acc.1 { (k, e) } else { acc });
    let t0 = T0_MARGIN * worst;
    Ok(GccReport {
        satisfied: t0 <= t_max,
        t0_estimate: Some(t0),
        worst_ray: witness(k_worst, Some(worst)),
        sampling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_dimensional_reflections() {
        let d = DomainSpec::unit_interval();
        let ray = trace_ray(&d, [0.5, 0.0], [1.0, 0.0], 2.0).unwrap();
        let refl = ray.reflections();
        assert_eq!(refl.len(), 2);
        assert_relative_eq!(refl[0].t, 0.5);
        assert_eq!(refl[0].point[0], 1.0);
        assert_relative_eq!(refl[1].t, 1.5);
        assert_eq!(refl[1].point[0], 0.0);
        assert_relative_eq!(ray.position(2.0)[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn horizontal_bouncing() {
        let d = DomainSpec::unit_square();
        let ray = trace_ray(&d, [0.5, 0.5], [1.0, 0.0], 10.0).unwrap();
        assert!(ray.path.iter().all(|v| v.point[1] == 0.5));
        assert_eq!(ray.reflections().len(), 10);
    }

    #[test]
    fn corner_reflection_reverses_both() {
        let d = DomainSpec::unit_square();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ray = trace_ray(&d, [0.0, 0.0], [s, s], 2.0).unwrap();
        let r = &ray.reflections()[0];
        assert_relative_eq!(r.point[0], 1.0);
        assert_relative_eq!(r.point[1], 1.0);
        assert_relative_eq!(r.t, 2f64.sqrt(), max_relative = 1e-14);
        assert_eq!(r.direction, [-s, -s]);
    }

    #[test]
    fn entry_examples() {
        let d = DomainSpec::unit_interval();
        let omega = [BoxRegion::interval(0.4, 0.6)];
        let ray = trace_ray(&d, [0.6, 0.0], [1.0, 0.0], 5.0).unwrap();
        assert_relative_eq!(first_entry_time(&ray, &omega).unwrap(), 0.8, epsilon = 1e-14);
        let inside = trace_ray(&d, [0.5, 0.0], [-1.0, 0.0], 5.0).unwrap();
        assert_eq!(first_entry_time(&inside, &omega), Some(0.0));

        let sq = DomainSpec::unit_square();
        let strip = [BoxRegion::rectangle((0.4, 0.6), (0.0, 1.0))];
        let vertical = trace_ray(&sq, [0.2, 0.3], [0.0, 1.0], 50.0).unwrap();
        assert_eq!(first_entry_time(&vertical, &strip), None);
    }

    #[test]
    fn invalid_inputs() {
        let d = DomainSpec::unit_square();
        assert!(trace_ray(&d, [0.5, 0.5], [1.0, 0.0], 0.0).is_err());
        assert!(trace_ray(&d, [0.5, 0.5], [1.0, 1.0], 1.0).is_err());
        assert!(trace_ray(&d, [1.5, 0.5], [1.0, 0.0], 1.0).is_err());
        assert!(control_time(&d, &[], 4, 64, 10.0).is_err());
    }

    #[test]
    fn interval_control_time() {
        let d = DomainSpec::unit_interval();
        let r = control_time(&d, &[BoxRegion::interval(0.4, 0.6)], 32, 64, 10.0).unwrap();
        assert!(r.satisfied);
        let t0 = r.t0_estimate.unwrap();
        assert!((0.8..=0.85).contains(&t0), "{t0}");
        assert!(r.worst_ray.entry_time.unwrap() <= 0.8);
    }

    #[test]
    fn strip_is_not_controlling() {
        let d = DomainSpec::unit_square();
        let r = control_time(&d, &[BoxRegion::rectangle((0.4, 0.6), (0.0, 1.0))], 32, 64, 50.0).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.t0_estimate, None);
        assert_eq!(r.worst_ray.direction[0], 0.0);
        assert!(r.worst_ray.origin[0] < 0.4 || r.worst_ray.origin[0] > 0.6);
    }

    #[test]
    fn frame_is_controlling() {
        let d = DomainSpec::unit_square();
        let frame = crate::geometry::boundary_frame(&d, 0.1);
        let r = control_time(&d, &frame, 16, 32, 10.0).unwrap();
        assert!(r.satisfied);
        assert!(r.t0_estimate.unwrap() <= T0_MARGIN * 2f64.sqrt());
    }
}
