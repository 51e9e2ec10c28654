//! Finite-difference Laplacian with Zaremba boundary closure and the
//! first-order damped wave generator.
//!
//! The assembled matrix `S` is the trapezoid-weighted Laplacian, so the
//! discrete operator is `L = W^-1 S` with `W` the diagonal of trapezoidal
//! weights. Dirichlet and junction nodes are eliminated; Neumann nodes use the
//! ghost-node mirror, which in weighted form keeps `S` exactly symmetric.
//! Interior rows of `S` coincide with the plain `(1, -2, 1)/h^2` stencil.

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DampingField, Mesh};

/// Largest number of unknowns for which dense matrices are materialized.
pub const DENSE_DOF_CAP: usize = 2000;

/// Symmetric sparse matrix in CSR form over the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    weights: Vec<f64>,
    cell_volume: f64,
    node_count: usize,
    free_nodes: Vec<usize>,
    symmetric: bool,
}

pub fn assemble_laplacian(mesh: &Mesh) -> Result<SparseOperator> {
    let n = mesh.n_dof();
    if n == 0 {
        return Err(Error::NoFreeNodes);
    }
    let dim = mesh.dimension();
    let counts = mesh.counts();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];

    let axis_weight = |idx: usize, count: usize| if idx == 0 || idx == count - 1 { 0.5 } else { 1.0 };
    for axis in 0..dim {
        let h = mesh.spacing()[axis];
        for node in 0..mesh.node_count() {
            let idx = mesh.multi_index(node);
            if idx[axis] + 1 == counts[axis] {
                continue;
            }
            let next = if axis == 0 { node + 1 } else { node + counts[0] };
            // Edge weight: trapezoid weight in the directions transverse to the edge.
            let transverse: f64 = (0..dim)
                .filter(|&a| a != axis)
                .map(|a| axis_weight(idx[a], counts[a]))
                .product();
            let c = transverse / (h * h);
            let (di, dj) = (mesh.dof_of(node), mesh.dof_of(next));
            if let Some(i) = di {
                *rows[i].entry(i).or_insert(0.0) -= c;
            }
            if let Some(j) = dj {
                *rows[j].entry(j).or_insert(0.0) -= c;
            }
            if let (Some(i), Some(j)) = (di, dj) {
                *rows[i].entry(j).or_insert(0.0) += c;
                *rows[j].entry(i).or_insert(0.0) += c;
            }
        }
    }

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    let weights = mesh.free_nodes().iter().map(|&node| mesh.trapezoid_weight(node)).collect();
    let mut op = SparseOperator {
        n,
        row_ptr,
        cols,
        vals,
        weights,
        cell_volume: mesh.cell_volume(),
        node_count: mesh.node_count(),
        free_nodes: mesh.free_nodes().to_vec(),
        symmetric: false,
    };
    op.symmetric = op.check_symmetric();
    Ok(op)
}

impl SparseOperator {
    pub fn n_dof(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Trapezoidal weights per dof, relative to the cell volume.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Lumped mass per dof: trapezoid weight times cell volume.
    pub fn mass(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * self.cell_volume).collect()
    }

    /// Node count of the mesh the operator was assembled on.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    /// Deduplicated `(row, col, value)` triplets of `S`, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, k)))
            .map(|(r, k)| (r, self.cols[k], self.vals[k]))
            .collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    fn check_symmetric(&self) -> bool {
        self.entries().iter().all(|&(r, c, v)| self.get(c, r) == v)
    }

    /// `out = S x`.
    pub fn apply_weighted(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] = acc;
        }
    }

    /// `out = L x = W^-1 S x`, the discrete Laplacian.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.apply_weighted(x, out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply(x, &mut out);
        out
    }

    /// Discrete Dirichlet energy `1/2 |grad u|^2 = -1/2 vol u^T S u`, i.e. the
    /// sum of squared edge differences weighted by the transverse trapezoid rule.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let mut su = vec![0.0; self.n];
        self.apply_weighted(u, &mut su);
        -0.5 * self.cell_volume * dot(u, &su)
    }

    /// Weighted L^2 inner product `sum vol w_i x_i y_i`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.cell_volume * x.iter().zip(y).zip(&self.weights).map(|((a, b), w)| a * b * w).sum::<f64>()
    }

    fn check_dense_cap(&self) -> Result<()> {
        if self.n > DENSE_DOF_CAP {
            Err(Error::DenseCapExceeded { n_dof: self.n, cap: DENSE_DOF_CAP })
        } else {
            Ok(())
        }
    }

    /// Dense copy of the weighted matrix `S`.
    pub fn to_dense_weighted(&self) -> Result<DMatrix<f64>> {
        self.check_dense_cap()?;
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    /// Dense copy of `L = W^-1 S`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let mut m = self.to_dense_weighted()?;
        for r in 0..self.n {
            let w = self.weights[r];
            m.row_mut(r).apply(|x| *x /= w);
        }
        Ok(m)
    }

    /// Eigenvalues of `-L`, ascending, from the symmetric pencil `(-S, W)`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut m = self.to_dense_weighted()?;
        let inv_sqrt: Vec<f64> = self.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
        for r in 0..self.n {
            for c in 0..self.n {
                m[(r, c)] *= -inv_sqrt[r] * inv_sqrt[c];
            }
        }
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Coordinate text export: a `%`-comment header then `row col value` lines.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "% rows cols nnz")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(out, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A(u, v) = (v, L u - a v)` on the reduced dof set.
#[derive(Debug, Clone)]
pub struct BlockGenerator {
    lap: SparseOperator,
    damping: Vec<f64>,
}

pub fn assemble_generator(lap: &SparseOperator, field: &DampingField) -> Result<BlockGenerator> {
    if field.values().len() != lap.node_count() {
        return Err(Error::DimensionMismatch { expected: lap.node_count(), got: field.values().len() });
    }
    let damping = lap.free_nodes().iter().map(|&n| field.values()[n]).collect();
    Ok(BlockGenerator { lap: lap.clone(), damping })
}

impl BlockGenerator {
    /// Generator from per-dof damping values.
    pub fn from_dof_damping(lap: &SparseOperator, damping: Vec<f64>) -> Result<Self> {
        if damping.len() != lap.n_dof() {
            return Err(Error::DimensionMismatch { expected: lap.n_dof(), got: damping.len() });
        }
        Ok(Self { lap: lap.clone(), damping })
    }

    pub fn laplacian(&self) -> &SparseOperator {
        &self.lap
    }

    /// Damping coefficient per dof.
    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn n_dof(&self) -> usize {
        self.lap.n_dof()
    }

    pub fn apply(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut lu = self.lap.laplacian(u);
        for ((x, a), vi) in lu.iter_mut().zip(&self.damping).zip(v) {
            *x -= a * vi;
        }
        (v.to_vec(), lu)
    }

    /// Energy inner product `<grad u, grad u'> + <v, v'>` on the discrete space.
    pub fn energy_inner(&self, x: (&[f64], &[f64]), y: (&[f64], &[f64])) -> f64 {
        let mut su = vec![0.0; self.n_dof()];
        self.lap.apply_weighted(y.0, &mut su);
        -self.lap.cell_volume * dot(x.0, &su) + self.lap.inner(x.1, y.1)
    }

    /// Dense `2n x 2n` matrix in the plain `(u, v)` coordinates.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.n_dof();
        let l = self.lap.to_dense()?;
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            a[(i, n + i)] = 1.0;
            a[(n + i, n + i)] = -self.damping[i];
        }
        a.view_mut((n, 0), (n, n)).copy_from(&l);
        Ok(a)
    }

    /// Dense matrix in energy-orthonormal coordinates, where the Euclidean
    /// operator norm equals the norm on the energy space. With the stiffness
    /// `K = R^T R` and mass `M`, it reads `[[0, B], [-B^T, -diag(a)]]` with
    /// `B = R M^-1/2`.
    pub fn to_dense_energy(&self) -> Result<DMatrix<f64>> {
        let n = self.n_dof();
        let mut k = self.lap.to_dense_weighted()?;
        k *= -self.lap.cell_volume;
        let chol = k.cholesky().ok_or(Error::SingularStiffness)?;
        // K = L L^T, so R = L^T.
        let mut b = chol.l().transpose();
        let mass = self.lap.mass();
        for c in 0..n {
            let s = 1.0 / mass[c].sqrt();
            b.column_mut(c).apply(|x| *x *= s);
        }
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).copy_from(&b);
        a.view_mut((n, 0), (n, n)).copy_from(&(-b.transpose()));
        for i in 0..n {
            a[(n + i, n + i)] = -self.damping[i];
        }
        Ok(a)
    }

    /// Spectrum of the dense generator.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let a = self.to_dense()?;
        Ok(a.complex_eigenvalues().iter().copied().collect())
    }
}
