//! Symbol metric of the fiber-averaged Laplacian and Holmes-Thompson density, both by
//! quadrature over the fiber of base-unit directions.
//!
//! For `F = F̄ + β` with `F̄` Riemannian the symbol on covectors is
//!
//! ```text
//! σ(ℓ, ℓ) = (n / vol S¹) ∫_{S¹} ℓ(v)² / (1 − β(v)²) dθ,   n = 2,
//! ```
//!
//! where `v` runs over base-unit vectors. The integrand is even under
//! `v ↦ −v`, so the full circle is used instead of the half-fiber `β(v) ≥ 0`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::assembly::PeriodicGrid;
use crate::error::{Error, Result};
use crate::metric::{Point, RandersMetric, Vector};
use crate::quadrature::AngleQuadrature;

/// Floor on `1 − t²β(v)²` below which the quadrature is declared singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Symmetric 2×2 matrix acting on covector components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymbolMatrix {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

impl SymbolMatrix {
    pub const IDENTITY: SymbolMatrix = SymbolMatrix {
        s11: 1.0,
        s12: 0.0,
        s22: 1.0,
    };

    pub const fn new(s11: f64, s12: f64, s22: f64) -> Self {
        Self { s11, s12, s22 }
    }

    pub fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    pub fn trace(&self) -> f64 {
        self.s11 + self.s22
    }

    /// Eigenvalues `(smallest, largest)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let half_diff = 0.5 * (self.s11 - self.s22);
        let r = half_diff.hypot(self.s12);
        (half_tr - r, half_tr + r)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.s11 > 0.0 && self.det() > 0.0
    }

    /// `ℓᵀ S ℓ` for `ℓ = (a1, a2)`.
    pub fn quadratic(&self, a1: f64, a2: f64) -> f64 {
        self.s11 * a1 * a1 + 2.0 * self.s12 * a1 * a2 + self.s22 * a2 * a2
    }

    pub fn sub(&self, other: &SymbolMatrix) -> SymbolMatrix {
        SymbolMatrix::new(self.s11 - other.s11, self.s12 - other.s12, self.s22 - other.s22)
    }

    /// Arithmetic mean of several matrices.
    pub fn mean(items: &[SymbolMatrix]) -> SymbolMatrix {
        let k = items.len() as f64;
        let (a, b, c) = items.iter().fold((0.0, 0.0, 0.0), |acc, m| {
            (acc.0 + m.s11, acc.1 + m.s12, acc.2 + m.s22)
        });
        SymbolMatrix::new(a / k, b / k, c / k)
    }
}

/// Symbol at `p`, in the base-orthonormal coframe.
pub fn symbol_at(m: &RandersMetric, p: Point, q: &AngleQuadrature) -> Result<SymbolMatrix> {
    let beta = m.base().to_orthonormal(p, m.scaled_form(p));
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for (theta, w) in q.iter() {
        let v = Vector::from_angle(theta);
        let b = beta.apply(v);
        let denom = 1.0 - b * b;
        if denom < DENOMINATOR_FLOOR {
            return Err(Error::SingularWeight {
                x: p.x,
                y: p.y,
                denominator: denom,
            });
        }
        let k = w / denom;
        s11 += k * v.v1 * v.v1;
        s12 += k * v.v1 * v.v2;
        s22 += k * v.v2 * v.v2;
    }
    let c = 1.0 / PI;
    Ok(SymbolMatrix::new(c * s11, c * s12, c * s22))
}

/// `Σ_j w_j (tβ)_x(v_θj)`; vanishes because the fiber measure is flip
/// invariant.
pub fn fiber_average_of_form(m: &RandersMetric, p: Point, q: &AngleQuadrature) -> f64 {
    let beta = m.base().to_orthonormal(p, m.scaled_form(p));
    q.integrate(|theta| beta.apply(Vector::from_angle(theta)))
}

/// Density of the Holmes-Thompson volume against the base Riemannian
/// volume: area of the dual unit ball divided by `π`.
pub fn holmes_thompson_density(m: &RandersMetric, p: Point, q: &AngleQuadrature) -> f64 {
    let lambda = m.base().conformal_factor(p);
    let area = 0.5
        * q.integrate(|theta| {
            let u = Vector::from_angle(theta);
            let l = crate::metric::Covector::new(lambda * u.v1, lambda * u.v2);
            let r = 1.0 / m.dual_norm(p, l);
            r * r
        });
    area / PI
}

/// Per-node symbol matrices on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolField {
    grid: PeriodicGrid,
    matrices: Vec<SymbolMatrix>,
}

impl SymbolField {
    pub fn new(grid: PeriodicGrid, matrices: Vec<SymbolMatrix>) -> Result<Self> {
        if matrices.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: matrices.len(),
            });
        }
        Ok(Self { grid, matrices })
    }

    /// Same matrix at every node.
    pub fn uniform(grid: PeriodicGrid, s: SymbolMatrix) -> Self {
        Self {
            matrices: vec![s; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn matrices(&self) -> &[SymbolMatrix] {
        &self.matrices
    }

    pub fn at(&self, i: usize, j: usize) -> &SymbolMatrix {
        &self.matrices[self.grid.index(i, j)]
    }

    /// `(min smallest eigenvalue, max largest eigenvalue)` over the nodes.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        self.matrices
            .iter()
            .map(SymbolMatrix::eigenvalues)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
                (lo.min(a), hi.max(b))
            })
    }

    /// CSV `x,y,s11,s12,s22`, one row per node in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,s11,s12,s22")?;
        for (idx, s) in self.matrices.iter().enumerate() {
            let p = self.grid.point_of(idx);
            writeln!(w, "{},{},{:.15e},{:.15e},{:.15e}", p.x, p.y, s.s11, s.s12, s.s22)?;
        }
        Ok(())
    }
}

/// Evaluates [`symbol_at`] at every grid node.
pub fn build_symbol_field(
    m: &RandersMetric,
    grid: &PeriodicGrid,
    q: &AngleQuadrature,
) -> Result<SymbolField> {
    let results: Vec<Result<SymbolMatrix>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| symbol_at(m, grid.point_of(idx), q))
        .collect();
    let matrices = results.into_iter().collect::<Result<Vec<_>>>()?;
    SymbolField::new(grid.clone(), matrices)
}
