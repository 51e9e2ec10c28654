//! Computational domain, Zaremba boundary partition, damping coefficient and
//! structured meshes.
//!
//! Domains are 1D intervals or 2D axis-aligned rectangles with the Euclidean
//! metric. The boundary is split into faces (`Left`/`Right` in 1D, plus
//! `Bottom`/`Top` in 2D) and every face is covered by segments carrying a
//! Dirichlet or Neumann condition. Nodes where the two conditions meet are
//! tagged [`NodeKind::Junction`] and treated as Dirichlet downstream.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane; 1D domains ignore the second coordinate.
pub type Point = [f64; 2];

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    extents: Vec<Interval>,
}

impl DomainSpec {
    pub fn new(extents: Vec<Interval>) -> Result<Self> {
        if extents.is_empty() || extents.len() > 2 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1 or 2, got {}",
                extents.len()
            )));
        }
        for (axis, e) in extents.iter().enumerate() {
            if !(e.lo.is_finite() && e.hi.is_finite() && e.lo < e.hi) {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: bounds [{}, {}] are not strictly ordered",
                    e.lo, e.hi
                )));
            }
        }
        Ok(Self { extents })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lo, hi)])
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        Self::new(vec![Interval::new(x.0, x.1), Interval::new(y.0, y.1)])
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0).unwrap()
    }

    pub fn unit_square() -> Self {
        Self::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[Interval] {
        &self.extents
    }

    pub fn extent(&self, axis: usize) -> Interval {
        self.extents[axis]
    }

    pub fn diameter(&self) -> f64 {
        self.extents.iter().map(|e| e.length().powi(2)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().map(Interval::length).product()
    }

    /// Geometric tolerance used for containment tests.
    pub fn tolerance(&self) -> f64 {
        1e-10 * self.extents.iter().map(Interval::length).fold(0.0, f64::max)
    }

    pub fn contains(&self, p: Point) -> bool {
        let tol = self.tolerance();
        self.extents
            .iter()
            .enumerate()
            .all(|(axis, e)| e.contains(p[axis], tol))
    }

    pub fn faces(&self) -> &'static [Face] {
        match self.dimension() {
            1 => &[Face::Left, Face::Right],
            _ => &[Face::Left, Face::Right, Face::Bottom, Face::Top],
        }
    }

    /// Parametric range of a face: the coordinate that varies along it.
    /// Faces of a 1D domain are points and have a degenerate range.
    pub fn face_range(&self, face: Face) -> Interval {
        match (self.dimension(), face) {
            (1, _) => Interval::new(0.0, 0.0),
            (_, Face::Left | Face::Right) => self.extents[1],
            (_, Face::Bottom | Face::Top) => self.extents[0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub fn parse(name: &str) -> Option<Face> {
        match name {
            "left" => Some(Face::Left),
            "right" => Some(Face::Right),
            "bottom" => Some(Face::Bottom),
            "top" => Some(Face::Top),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub face: Face,
    /// Sub-range of the face's parametric coordinate (ignored in 1D).
    pub range: Interval,
    pub condition: BoundaryCondition,
}

/// Split of the boundary into Dirichlet and Neumann segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    segments: Vec<BoundarySegment>,
}

impl BoundaryPartition {
    pub fn new(segments: Vec<BoundarySegment>) -> Self {
        Self { segments }
    }

    /// One condition per whole face.
    pub fn from_faces(domain: &DomainSpec, faces: &[(Face, BoundaryCondition)]) -> Self {
        Self::new(
            faces
                .iter()
                .map(|&(face, condition)| BoundarySegment {
                    face,
                    range: domain.face_range(face),
                    condition,
                })
                .collect(),
        )
    }

    /// Same condition on every face of the domain.
    pub fn uniform(domain: &DomainSpec, condition: BoundaryCondition) -> Self {
        let faces: Vec<_> = domain.faces().iter().map(|&f| (f, condition)).collect();
        Self::from_faces(domain, &faces)
    }

    pub fn segments(&self) -> &[BoundarySegment] {
        &self.segments
    }

    /// Checks that every face is covered by segments with disjoint interiors.
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        let tol = domain.tolerance();
        for seg in &self.segments {
            if !domain.faces().contains(&seg.face) {
                return Err(Error::InvalidPartition(format!(
                    "face {:?} does not exist in a {}D domain",
                    seg.face,
                    domain.dimension()
                )));
            }
        }
        for &face in domain.faces() {
            let mut on_face: Vec<&BoundarySegment> =
                self.segments.iter().filter(|s| s.face == face).collect();
            if on_face.is_empty() {
                return Err(Error::InvalidPartition(format!("face {face:?} is not covered")));
            }
            if domain.dimension() == 1 {
                if on_face.len() > 1 {
                    return Err(Error::InvalidPartition(format!(
                        "face {face:?} carries {} conditions",
                        on_face.len()
                    )));
                }
                continue;
            }
            let range = domain.face_range(face);
            on_face.sort_by(|a, b| a.range.lo.total_cmp(&b.range.lo));
            let mut cursor = range.lo;
            for seg in on_face {
                if seg.range.hi <= seg.range.lo {
                    return Err(Error::InvalidPartition(format!(
                        "face {face:?}: empty segment [{}, {}]",
                        seg.range.lo, seg.range.hi
                    )));
                }
                if seg.range.lo > cursor + tol {
                    return Err(Error::InvalidPartition(format!(
                        "face {face:?} is not covered on [{cursor}, {}]",
                        seg.range.lo
                    )));
                }
                if seg.range.lo < cursor - tol {
                    return Err(Error::InvalidPartition(format!(
                        "face {face:?}: segments overlap near {}",
                        seg.range.lo
                    )));
                }
                cursor = seg.range.hi;
            }
            if (cursor - range.hi).abs() > tol {
                return Err(Error::InvalidPartition(format!(
                    "face {face:?}: segments end at {cursor}, face ends at {}",
                    range.hi
                )));
            }
        }
        Ok(())
    }

    /// Both a Dirichlet and a Neumann portion of positive measure exist.
    pub fn is_zaremba(&self) -> bool {
        let has = |c| self.segments.iter().any(|s| s.condition == c);
        has(BoundaryCondition::Dirichlet) && has(BoundaryCondition::Neumann)
    }

    fn conditions_at(&self, face: Face, t: f64, tol: f64, out: &mut Vec<BoundaryCondition>) {
        for seg in self.segments.iter().filter(|s| s.face == face) {
            if seg.range.contains(t, tol) && !out.contains(&seg.condition) {
                out.push(seg.condition);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Interior,
    Dirichlet,
    Neumann,
    /// Meeting point of Dirichlet and Neumann portions; eliminated like Dirichlet.
    Junction,
}

impl NodeKind {
    /// Whether the node carries an unknown (not constrained to zero).
    pub fn is_free(self) -> bool {
        matches!(self, NodeKind::Interior | NodeKind::Neumann)
    }
}

/// Uniform structured grid with classified nodes, x-index fastest.
#[derive(Debug, Clone)]
pub struct Mesh {
    domain: DomainSpec,
    partition: BoundaryPartition,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    kinds: Vec<NodeKind>,
    dof_of: Vec<Option<usize>>,
    free: Vec<usize>,
}

pub fn build_mesh(
    domain: &DomainSpec,
    partition: &BoundaryPartition,
    nodes_per_axis: &[usize],
) -> Result<Mesh> {
    if nodes_per_axis.len() != domain.dimension() {
        return Err(Error::DimensionMismatch {
            expected: domain.dimension(),
            got: nodes_per_axis.len(),
        });
    }
    for (axis, &n) in nodes_per_axis.iter().enumerate() {
        if n < 3 {
            return Err(Error::TooFewNodes { axis, got: n });
        }
    }
    partition.validate(domain)?;

    let counts = nodes_per_axis.to_vec();
    let spacing: Vec<f64> = domain
        .extents()
        .iter()
        .zip(&counts)
        .map(|(e, &n)| e.length() / (n - 1) as f64)
        .collect();
    let mut mesh = Mesh {
        domain: domain.clone(),
        partition: partition.clone(),
        counts,
        spacing,
        kinds: Vec::new(),
        dof_of: Vec::new(),
        free: Vec::new(),
    };
    let tol = domain.tolerance();
    let mut kinds = Vec::with_capacity(mesh.node_count());
    let mut conds = Vec::with_capacity(2);
    for node in 0..mesh.node_count() {
        conds.clear();
        let idx = mesh.multi_index(node);
        let p = mesh.coord(node);
        let nx = mesh.counts[0];
        if idx[0] == 0 {
            partition.conditions_at(Face::Left, p[1], tol, &mut conds);
        }
        if idx[0] == nx - 1 {
            partition.conditions_at(Face::Right, p[1], tol, &mut conds);
        }
        if mesh.dimension() == 2 {
            let ny = mesh.counts[1];
            if idx[1] == 0 {
                partition.conditions_at(Face::Bottom, p[0], tol, &mut conds);
            }
            if idx[1] == ny - 1 {
                partition.conditions_at(Face::Top, p[0], tol, &mut conds);
            }
        }
        let kind = match conds.as_slice() {
            [] => NodeKind::Interior,
            [BoundaryCondition::Dirichlet] => NodeKind::Dirichlet,
            [BoundaryCondition::Neumann] => NodeKind::Neumann,
            _ => NodeKind::Junction,
        };
        kinds.push(kind);
    }
    let mut dof_of = vec![None; kinds.len()];
    let mut free = Vec::new();
    for (node, kind) in kinds.iter().enumerate() {
        if kind.is_free() {
            dof_of[node] = Some(free.len());
            free.push(node);
        }
    }
    mesh.kinds = kinds;
    mesh.dof_of = dof_of;
    mesh.free = free;
    Ok(mesh)
}

impl Mesh {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }

    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn h_min(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Volume of one grid cell, `prod h`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        let nx = self.counts[0];
        [node % nx, node / nx]
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.counts[0] + i
    }

    pub fn coord(&self, node: usize) -> Point {
        let idx = self.multi_index(node);
        let mut p = [0.0; 2];
        for axis in 0..self.dimension() {
            let e = self.domain.extent(axis);
            let n = (self.counts[axis] - 1) as f64;
            p[axis] = e.lo + e.length() * idx[axis] as f64 / n;
        }
        p
    }

    pub fn coords(&self) -> Vec<Point> {
        (0..self.node_count()).map(|n| self.coord(n)).collect()
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Trapezoidal weight of a node relative to the cell volume
    /// (1 inside, 1/2 on a face, 1/4 at a corner).
    pub fn trapezoid_weight(&self, node: usize) -> f64 {
        let idx = self.multi_index(node);
        (0..self.dimension())
            .map(|axis| {
                if idx[axis] == 0 || idx[axis] == self.counts[axis] - 1 {
                    0.5
                } else {
                    1.0
                }
            })
            .product()
    }

    /// Number of unknowns after eliminating Dirichlet and junction nodes.
    pub fn n_dof(&self) -> usize {
        self.free.len()
    }

    pub fn dof_of(&self, node: usize) -> Option<usize> {
        self.dof_of[node]
    }

    /// Node index of every degree of freedom, in dof order.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// Evaluates `g` at every degree of freedom.
    pub fn sample_dofs(&self, mut g: impl FnMut(Point) -> f64) -> Vec<f64> {
        self.free.iter().map(|&n| g(self.coord(n))).collect()
    }

    /// Scatters dof values back onto all nodes, zero at constrained nodes.
    pub fn scatter(&self, dofs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        for (d, &n) in self.free.iter().enumerate() {
            out[n] = dofs[d];
        }
        out
    }
}

/// Axis-aligned box, one interval per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub bounds: Vec<Interval>,
}

impl BoxRegion {
    pub fn new(bounds: Vec<Interval>) -> Self {
        Self { bounds }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(vec![Interval::new(lo, hi)])
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Self {
        Self::new(vec![Interval::new(x.0, x.1), Interval::new(y.0, y.1)])
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.bounds
            .iter()
            .enumerate()
            .all(|(axis, b)| b.contains(p[axis], tol))
    }

    /// Euclidean distance from `p` to the closed box.
    pub fn distance(&self, p: Point) -> f64 {
        self.bounds
            .iter()
            .enumerate()
            .map(|(axis, b)| {
                let x = p[axis];
                let d = if x < b.lo {
                    b.lo - x
                } else if x > b.hi {
                    x - b.hi
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The four boxes of width `width` hugging the boundary of a rectangle
/// (or the two end intervals in 1D).
pub fn boundary_frame(domain: &DomainSpec, width: f64) -> Vec<BoxRegion> {
    let x = domain.extent(0);
    if domain.dimension() == 1 {
        return vec![
            BoxRegion::interval(x.lo, x.lo + width),
            BoxRegion::interval(x.hi - width, x.hi),
        ];
    }
    let y = domain.extent(1);
    vec![
        BoxRegion::rectangle((x.lo, x.lo + width), (y.lo, y.hi)),
        BoxRegion::rectangle((x.hi - width, x.hi), (y.lo, y.hi)),
        BoxRegion::rectangle((x.lo, x.hi), (y.lo, y.lo + width)),
        BoxRegion::rectangle((x.lo, x.hi), (y.hi - width, y.hi)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingProfile {
    Indicator,
    /// C^1 smoothstep decay from the plateau on the region to zero at
    /// distance `margin` outside it.
    SmoothBump { margin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSpec {
    /// Control region as a union of boxes; empty means no damping.
    pub region: Vec<BoxRegion>,
    pub a0: f64,
    /// Plateau multiplier, at least 1.
    pub amplitude: f64,
    pub profile: DampingProfile,
}

impl DampingSpec {
    pub fn indicator(region: Vec<BoxRegion>, a0: f64) -> Self {
        Self { region, a0, amplitude: 1.0, profile: DampingProfile::Indicator }
    }

    pub fn everywhere(domain: &DomainSpec, a0: f64) -> Self {
        Self::indicator(vec![BoxRegion::new(domain.extents().to_vec())], a0)
    }

    pub fn none() -> Self {
        Self::indicator(Vec::new(), 0.0)
    }
}

/// Nodal values of the damping coefficient a(x).
#[derive(Debug, Clone, PartialEq)]
pub struct DampingField {
    values: Vec<f64>,
    spec: DampingSpec,
    assumption_holds: bool,
}

pub fn sample_damping(mesh: &Mesh, spec: &DampingSpec) -> Result<DampingField> {
    let domain = mesh.domain();
    let tol = domain.tolerance();
    if !(spec.a0.is_finite() && spec.a0 >= 0.0) {
        return Err(Error::InvalidDamping(format!("a_0 must be finite and >= 0, got {}", spec.a0)));
    }
    if !(spec.amplitude.is_finite() && spec.amplitude >= 1.0) {
        return Err(Error::InvalidDamping(format!(
            "amplitude must be finite and >= 1, got {}",
            spec.amplitude
        )));
    }
    if let DampingProfile::SmoothBump { margin } = spec.profile {
        if !(margin.is_finite() && margin > 0.0) {
            return Err(Error::InvalidDamping(format!("bump margin must be > 0, got {margin}")));
        }
    }
    for b in &spec.region {
        if b.bounds.len() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                got: b.bounds.len(),
            });
        }
        for (axis, iv) in b.bounds.iter().enumerate() {
            let e = domain.extent(axis);
            if !(iv.lo < iv.hi) || iv.lo < e.lo - tol || iv.hi > e.hi + tol {
                return Err(Error::InvalidDamping(format!(
                    "control region [{}, {}] on axis {axis} is not inside the domain [{}, {}]",
                    iv.lo, iv.hi, e.lo, e.hi
                )));
            }
        }
    }

    let plateau = spec.a0 * spec.amplitude;
    let values = (0..mesh.node_count())
        .map(|node| {
            let p = mesh.coord(node);
            match spec.profile {
                DampingProfile::Indicator => {
                    if spec.region.iter().any(|b| b.contains(p, tol)) {
                        plateau
                    } else {
                        0.0
                    }
                }
                DampingProfile::SmoothBump { margin } => {
                    let d = spec
                        .region
                        .iter()
                        .map(|b| if b.contains(p, tol) { 0.0 } else { b.distance(p) })
                        .fold(f64::INFINITY, f64::min);
                    plateau * smoothstep(1.0 - d / margin)
                }
            }
        })
        .collect();

    let assumption_holds = spec.a0 > 0.0 && !spec.region.is_empty();
    if !assumption_holds {
        log::warn!("damping field: a(x) >= a_0 > 0 on a nonempty region does not hold");
    }
    Ok(DampingField { values, spec: spec.clone(), assumption_holds })
}

fn smoothstep(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    r * r * (3.0 - 2.0 * r)
}

impl DampingField {
    /// Nodal values on the whole mesh.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &DampingSpec {
        &self.spec
    }

    pub fn a0(&self) -> f64 {
        self.spec.a0
    }

    /// Values restricted to the mesh's degrees of freedom.
    pub fn per_dof(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.free_nodes().iter().map(|&n| self.values[n]).collect()
    }

    pub fn assumption_holds(&self) -> bool {
        self.assumption_holds
    }

    pub fn require_assumption(&self) -> Result<()> {
        if self.assumption_holds {
            Ok(())
        } else {
            Err(Error::DampingAssumptionViolated)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&a| a == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Minimum over nodes lying in the control region, `None` if no node does.
    pub fn min_over_region(&self, mesh: &Mesh) -> Option<f64> {
        let tol = mesh.domain().tolerance();
        (0..mesh.node_count())
            .filter(|&n| self.spec.region.iter().any(|b| b.contains(mesh.coord(n), tol)))
            .map(|n| self.values[n])
            .reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::{Dirichlet, Neumann};

    fn dn_1d() -> (DomainSpec, BoundaryPartition) {
        let d = DomainSpec::unit_interval();
        let p = BoundaryPartition::from_faces(&d, &[(Face::Left, Dirichlet), (Face::Right, Neumann)]);
        (d, p)
    }

    #[test]
    fn uniform_1d_grid() {
        let (d, p) = dn_1d();
        let m = build_mesh(&d, &p, &[5]).unwrap();
        assert_eq!(m.spacing(), &[0.25]);
        let xs: Vec<f64> = m.coords().iter().map(|c| c[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.kind(0), NodeKind::Dirichlet);
        assert_eq!(m.kind(4), NodeKind::Neumann);
        assert_eq!(m.n_dof(), 4);
    }

    #[test]
    fn square_3x3_has_one_interior_node() {
        let d = DomainSpec::unit_square();
        let p = BoundaryPartition::uniform(&d, Dirichlet);
        let m = build_mesh(&d, &p, &[3, 3]).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.kinds().iter().filter(|k| **k == NodeKind::Interior).count(), 1);
    }

    #[test]
    fn junctions_in_2d() {
        let d = DomainSpec::unit_square();
        // Dirichlet on bottom/top, Neumann on the sides plus a split top face.
        let p = BoundaryPartition::new(vec![
            BoundarySegment { face: Face::Bottom, range: Interval::new(0.0, 1.0), condition: Dirichlet },
            BoundarySegment { face: Face::Top, range: Interval::new(0.0, 0.5), condition: Dirichlet },
            BoundarySegment { face: Face::Top, range: Interval::new(0.5, 1.0), condition: Neumann },
            BoundarySegment { face: Face::Left, range: Interval::new(0.0, 1.0), condition: Neumann },
            BoundarySegment { face: Face::Right, range: Interval::new(0.0, 1.0), condition: Neumann },
        ]);
        let m = build_mesh(&d, &p, &[5, 5]).unwrap();
        assert_eq!(m.kind(m.node_index(0, 0)), NodeKind::Junction);
        assert_eq!(m.kind(m.node_index(4, 0)), NodeKind::Junction);
        assert_eq!(m.kind(m.node_index(0, 4)), NodeKind::Junction);
        // Top-right corner is Neumann on both faces.
        assert_eq!(m.kind(m.node_index(4, 4)), NodeKind::Neumann);
        assert_eq!(m.kind(m.node_index(2, 4)), NodeKind::Junction);
        assert_eq!(m.kind(m.node_index(1, 4)), NodeKind::Dirichlet);
        assert_eq!(m.kind(m.node_index(3, 4)), NodeKind::Neumann);
        assert!(!m.kind(m.node_index(0, 0)).is_free());
    }

    #[test]
    fn mesh_errors() {
        let (d, p) = dn_1d();
        assert_eq!(build_mesh(&d, &p, &[2]).unwrap_err(), Error::TooFewNodes { axis: 0, got: 2 });
        let only_left = BoundaryPartition::from_faces(&d, &[(Face::Left, Dirichlet)]);
        assert!(matches!(build_mesh(&d, &only_left, &[5]), Err(Error::InvalidPartition(_))));

        let sq = DomainSpec::unit_square();
        let gap = BoundaryPartition::new(vec![
            BoundarySegment { face: Face::Bottom, range: Interval::new(0.0, 0.4), condition: Dirichlet },
            BoundarySegment { face: Face::Bottom, range: Interval::new(0.5, 1.0), condition: Dirichlet },
            BoundarySegment { face: Face::Top, range: Interval::new(0.0, 1.0), condition: Dirichlet },
            BoundarySegment { face: Face::Left, range: Interval::new(0.0, 1.0), condition: Neumann },
            BoundarySegment { face: Face::Right, range: Interval::new(0.0, 1.0), condition: Neumann },
        ]);
        assert!(matches!(build_mesh(&sq, &gap, &[5, 5]), Err(Error::InvalidPartition(_))));
        assert!(DomainSpec::interval(1.0, 0.0).is_err());
    }

    #[test]
    fn zaremba_flag() {
        let (d, p) = dn_1d();
        assert!(p.is_zaremba());
        assert!(!BoundaryPartition::uniform(&d, Dirichlet).is_zaremba());
    }

    #[test]
    fn indicator_damping_1d() {
        let (d, p) = dn_1d();
        let m = build_mesh(&d, &p, &[11]).unwrap();
        let field = sample_damping(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0)).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(field.values(), &expected);
        assert!(field.assumption_holds());
    }

    #[test]
    fn zero_floor_is_flagged() {
        let (d, p) = dn_1d();
        let m = build_mesh(&d, &p, &[11]).unwrap();
        let field = sample_damping(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 0.0)).unwrap();
        assert!(field.is_zero());
        assert_eq!(field.require_assumption(), Err(Error::DampingAssumptionViolated));
    }

    #[test]
    fn region_outside_domain_is_rejected() {
        let (d, p) = dn_1d();
        let m = build_mesh(&d, &p, &[11]).unwrap();
        let err = sample_damping(&m, &DampingSpec::indicator(vec![BoxRegion::interval(0.8, 1.2)], 1.0));
        assert!(matches!(err, Err(Error::InvalidDamping(_))));
    }

    #[test]
    fn smooth_bump_plateau() {
        let (d, p) = dn_1d();
        let m = build_mesh(&d, &p, &[101]).unwrap();
        let spec = DampingSpec {
            region: vec![BoxRegion::interval(0.25, 0.75)],
            a0: 2.0,
            amplitude: 1.0,
            profile: DampingProfile::SmoothBump { margin: 0.1 },
        };
        let field = sample_damping(&m, &spec).unwrap();
        assert!(field.min_over_region(&m).unwrap() >= 2.0);
        // Halfway through the margin the smoothstep is exactly one half.
        let node = m.free_nodes().iter().copied().find(|&n| (m.coord(n)[0] - 0.2).abs() < 1e-12).unwrap();
        assert!((field.values()[node] - 1.0).abs() < 1e-12);
        assert_eq!(field.values()[m.node_index(10, 0)], 0.0);
        assert!(field.values().iter().all(|&a| a >= 0.0 && a <= 2.0));
    }

    #[test]
    fn refinement_keeps_indicator_minimum() {
        let (d, p) = dn_1d();
        let spec = DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 0.7);
        let mut prev = None;
        for n in [11, 21, 41, 81] {
            let m = build_mesh(&d, &p, &[n]).unwrap();
            let min = sample_damping(&m, &spec).unwrap().min_over_region(&m).unwrap();
            if let Some(prev) = prev {
                assert_eq!(prev, min);
            }
            prev = Some(min);
        }
    }

    #[test]
    fn frame_covers_boundary() {
        let d = DomainSpec::unit_square();
        let frame = boundary_frame(&d, 0.1);
        for p in [[0.0, 0.5], [1.0, 0.3], [0.5, 0.0], [0.2, 1.0]] {
            assert!(frame.iter().any(|b| b.contains(p, 0.0)));
        }
        assert!(!frame.iter().any(|b| b.contains([0.5, 0.5], 0.0)));
    }
}
