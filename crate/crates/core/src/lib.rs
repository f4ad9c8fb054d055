//! Numerical toolkit for the fiber-averaged Laplacian of Randers metrics
//! `F = F̄ + tβ` on the flat 2-torus.
//!
//! The pipeline is: build a [`metric::RandersMetric`], evaluate its symbol
//! metric on a periodic grid ([`symbol`]), discretize the energy and the
//! L² pairing with bilinear elements ([`assembly`]), then solve the
//! generalized eigenproblem ([`eigensolve`]). [`geodesics`] covers lengths
//! and geodesic flows, [`curved`] the hyperbolic-plane checks, and
//! [`config`]/[`sweep`] the experiment driver used by the CLI.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod config;
pub mod curved;
pub mod eigensolve;
pub mod error;
pub mod geodesics;
pub mod metric;
pub mod quadrature;
pub mod symbol;
pub mod sweep;

pub use assembly::{assemble, OperatorPair, PeriodicGrid, SparseSymmetric};
pub use eigensolve::{rayleigh_quotient, smallest_eigenpairs, SpectrumResult};
pub use error::{Error, Result};
pub use metric::{
    BaseMetric, Covector, OneFormField, Point, RandersMetric, SmoothedTent, Vector,
};
pub use quadrature::AngleQuadrature;
pub use symbol::{build_symbol_field, holmes_thompson_density, symbol_at, SymbolField, SymbolMatrix};
