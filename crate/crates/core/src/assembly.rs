//! Bilinear finite elements on the periodic unit square.
//!
//! The stiffness matrix discretizes `f ↦ ∫ (∇f)ᵀ Σ (∇f) dx` with a per-cell
//! constant symbol `Σ` (mean of the four corner nodes), and the mass matrix
//! discretizes `∫ f² dx`. The Holmes-Thompson density of a Randers metric
//! over the flat torus is identically one, so the mass matrix is the flat
//! one for every metric.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::Point;
use crate::symbol::{SymbolField, SymbolMatrix};

/// `N × N` nodes on `R² / Z²` with spacing `1/N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::InvalidParameter {
                name: "grid_n",
                reason: format!("{n} is below the minimum of {}", Self::MIN_NODES),
            });
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Row of node `(i, j)`, `i` along x; indices wrap around.
    pub fn index(&self, i: usize, j: usize) -> usize {
        (j % self.n) * self.n + (i % self.n)
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn point_of(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        let h = self.spacing();
        Point::new(i as f64 * h, j as f64 * h)
    }

    /// Samples `f` at every node, in row order.
    pub fn sample<F: Fn(Point) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|idx| f(self.point_of(idx))).collect()
    }

    /// Node rows of the four corners of cell `(i, j)`, counter-clockwise
    /// from the lower-left corner.
    pub fn cell_nodes(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.index(i, j),
            self.index(i + 1, j),
            self.index(i + 1, j + 1),
            self.index(i, j + 1),
        ]
    }
}

/// Symmetric sparse matrix stored by rows (both triangles).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out = acc;
        });
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// Largest `|A[r][c] − A[c][r]|`.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// `A + s B` for matrices with the same sparsity pattern.
    pub fn add_scaled(&self, other: &SparseSymmetric, s: f64) -> SparseSymmetric {
        assert_eq!(self.row_ptr, other.row_ptr);
        assert_eq!(self.cols, other.cols);
        SparseSymmetric {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.dim]; self.dim];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        d
    }

    /// Coordinate format: `row col value` per line, 0-based.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MassKind {
    #[default]
    Consistent,
    /// Row-sum lumped, diagonal.
    Lumped,
}

/// Stiffness `K` (energy) and mass `M` (L² pairing) on a periodic grid.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub stiffness: SparseSymmetric,
    pub mass: SparseSymmetric,
    pub grid: PeriodicGrid,
    pub descriptor: String,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Same operators with `K` replaced by `K + cM`.
    pub fn shifted(&self, c: f64) -> OperatorPair {
        OperatorPair {
            stiffness: self.stiffness.add_scaled(&self.mass, c),
            mass: self.mass.clone(),
            grid: self.grid.clone(),
            descriptor: format!("{} shifted by {c}", self.descriptor),
        }
    }
}

/// Reference-square Gauss points `(ξ, η)` of the 2×2 rule, weight 1/4 each.
const GAUSS_2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Bilinear shape functions on `[0,1]²` for corners ordered as in
/// [`PeriodicGrid::cell_nodes`], and their reference gradients.
fn shape(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let phi = [
        (1.0 - xi) * (1.0 - eta),
        xi * (1.0 - eta),
        xi * eta,
        (1.0 - xi) * eta,
    ];
    let grad = [
        [-(1.0 - eta), -(1.0 - xi)],
        [1.0 - eta, -xi],
        [eta, xi],
        [-eta, 1.0 - xi],
    ];
    (phi, grad)
}

/// Local stiffness for a constant symbol. In two dimensions the `1/h²` of
/// the gradients cancels the `h²` of the cell area.
fn local_stiffness(s: &SymbolMatrix) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    for &xi in &GAUSS_2 {
        for &eta in &GAUSS_2 {
            let (_, g) = shape(xi, eta);
            for a in 0..4 {
                for b in 0..4 {
                    let v = s.s11 * g[a][0] * g[b][0]
                        + s.s12 * (g[a][0] * g[b][1] + g[a][1] * g[b][0])
                        + s.s22 * g[a][1] * g[b][1];
                    k[a][b] += 0.25 * v;
                }
            }
        }
    }
    // mirror the upper triangle so the assembled matrix is bit-symmetric
    for a in 0..4 {
        for b in 0..a {
            k[a][b] = k[b][a];
        }
    }
    k
}

fn local_mass(h: f64, kind: MassKind) -> [[f64; 4]; 4] {
    let area = h * h;
    let mut m = [[0.0; 4]; 4];
    for &xi in &GAUSS_2 {
        for &eta in &GAUSS_2 {
            let (phi, _) = shape(xi, eta);
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += 0.25 * area * phi[a] * phi[b];
                }
            }
        }
    }
    if kind == MassKind::Lumped {
        for a in 0..4 {
            let s: f64 = m[a].iter().sum();
            m[a] = [0.0; 4];
            m[a][a] = s;
        }
    }
    m
}

/// Nine-point sparsity pattern of the periodic grid.
fn nine_point_pattern(grid: &PeriodicGrid) -> (Vec<usize>, Vec<usize>) {
    let n = grid.n();
    let mut row_ptr = Vec::with_capacity(grid.len() + 1);
    let mut cols = Vec::with_capacity(9 * grid.len());
    row_ptr.push(0);
    for idx in 0..grid.len() {
        let (i, j) = grid.coords(idx);
        let mut row: Vec<usize> = (0..3)
            .flat_map(|dj| (0..3).map(move |di| (di, dj)))
            .map(|(di, dj)| grid.index(i + n + di - 1, j + n + dj - 1))
            .collect();
        row.sort_unstable();
        row.dedup();
        cols.extend(row);
        row_ptr.push(cols.len());
    }
    (row_ptr, cols)
}

fn scatter(
    grid: &PeriodicGrid,
    row_ptr: &[usize],
    cols: &[usize],
    locals: &[[[f64; 4]; 4]],
) -> Vec<f64> {
    let n = grid.n();
    let mut values = vec![0.0; cols.len()];
    // fixed cell order keeps the sums bit-reproducible
    for (cell, local) in locals.iter().enumerate() {
        let nodes = grid.cell_nodes(cell % n, cell / n);
        for a in 0..4 {
            let r = nodes[a];
            let row_cols = &cols[row_ptr[r]..row_ptr[r + 1]];
            for b in 0..4 {
                let k = row_cols
                    .binary_search(&nodes[b])
                    .expect("cell neighbour outside the nine-point pattern");
                values[row_ptr[r] + k] += local[a][b];
            }
        }
    }
    values
}

/// Assembles `(K, M)` with the consistent mass matrix.
pub fn assemble(symbols: &SymbolField, grid: &PeriodicGrid) -> Result<OperatorPair> {
    assemble_with(symbols, grid, MassKind::Consistent)
}

pub fn assemble_with(
    symbols: &SymbolField,
    grid: &PeriodicGrid,
    mass_kind: MassKind,
) -> Result<OperatorPair> {
    if symbols.grid() != grid {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: symbols.grid().len(),
        });
    }
    let n = grid.n();
    let cells: Vec<Result<[[f64; 4]; 4]>> = (0..grid.len())
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell % n, cell / n);
            let corners = grid.cell_nodes(i, j).map(|idx| symbols.matrices()[idx]);
            let s = SymbolMatrix::mean(&corners);
            if !s.is_positive_definite() {
                return Err(Error::IndefiniteSymbol { i, j, det: s.det() });
            }
            Ok(local_stiffness(&s))
        })
        .collect();
    let k_locals = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let m_local = local_mass(grid.spacing(), mass_kind);
    let m_locals = vec![m_local; grid.len()];

    let (row_ptr, cols) = nine_point_pattern(grid);
    let k_values = scatter(grid, &row_ptr, &cols, &k_locals);
    let m_values = scatter(grid, &row_ptr, &cols, &m_locals);
    let make = |values| SparseSymmetric {
        dim: grid.len(),
        row_ptr: row_ptr.clone(),
        cols: cols.clone(),
        values,
    };
    Ok(OperatorPair {
        stiffness: make(k_values),
        mass: make(m_values),
        grid: grid.clone(),
        descriptor: format!("Q1 periodic N={n} ({mass_kind:?} mass)"),
    })
}

/// `fᵀ K f`.
pub fn energy(pair: &OperatorPair, f: &[f64]) -> Result<f64> {
    if f.len() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            actual: f.len(),
        });
    }
    Ok(pair.stiffness.quadratic(f))
}
