//! Smallest eigenpairs of `K v = λ M v`.
//!
//! The constant mode spans the kernel of `K` for every positive-definite
//! symbol field, so it is reported directly as `λ₀` and deflated. The
//! remaining pairs come from a block preconditioned subspace iteration
//! (LOBPCG: Rayleigh-Ritz over `[X, T R, P]`) restricted to the
//! `M`-orthogonal complement of the constants.
//!
//! The default preconditioner inverts the constant-coefficient operator
//! whose stencil is the row average of `K` (and of `M`); on the periodic
//! grid that operator is diagonalized by the 2-D FFT.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::assembly::{dot, OperatorPair, PeriodicGrid, SparseSymmetric};
use crate::error::{Error, Result};

/// Eigenvalues within this relative distance form a cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// `λ₀ ≤ λ₁ ≤ … ≤ λ_k`; `λ₀` is the constant mode.
    pub eigenvalues: Vec<f64>,
    /// `M`-orthonormal, first significant component positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖K v − λ M v‖₂`.
    pub residuals: Vec<f64>,
    /// `‖K v − λ M v‖₂ / ‖K v‖₂`; for the constant mode the denominator is
    /// `λ₁ ‖M v‖₂`.
    pub relative_residuals: Vec<f64>,
    pub iterations: usize,
}

impl SpectrumResult {
    pub fn max_relative_residual(&self) -> f64 {
        self.relative_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Index ranges of eigenvalues within [`CLUSTER_TOLERANCE`] of their
    /// neighbour.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            let split = i == self.eigenvalues.len() || {
                let (a, b) = (self.eigenvalues[i - 1], self.eigenvalues[i]);
                (b - a).abs() > CLUSTER_TOLERANCE * b.abs().max(a.abs())
            };
            if split {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    /// FFT inverse of the row-averaged constant-coefficient operator.
    Fourier,
    /// Inverse diagonal of `K + sM`.
    Jacobi,
    None,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Extra block vectors beyond the wanted ones.
    pub guard_vectors: usize,
    pub seed: u64,
    pub preconditioner: Preconditioner,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 3000,
            guard_vectors: 4,
            seed: 0x5eed_2024,
            preconditioner: Preconditioner::Fourier,
        }
    }
}

/// Deterministic start vectors (MMIX linear congruential generator).
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

type Block = Vec<Vec<f64>>;

/// `AᵀB` for column blocks.
fn gram(a: &Block, b: &Block) -> DMatrix<f64> {
    let vals: Vec<f64> = (0..a.len() * b.len())
        .into_par_iter()
        .map(|k| dot(&a[k / b.len()], &b[k % b.len()]))
        .collect();
    DMatrix::from_row_slice(a.len(), b.len(), &vals)
}

/// Columns `Σ_k block_k c[k, j]`.
fn combine(block: &Block, c: &DMatrix<f64>) -> Block {
    let n = block.first().map_or(0, Vec::len);
    (0..c.ncols())
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; n];
            for (k, col) in block.iter().enumerate() {
                let w = c[(k, j)];
                if w != 0.0 {
                    out.iter_mut().zip(col).for_each(|(o, x)| *o += w * x);
                }
            }
            out
        })
        .collect()
}

/// `a ← a − b c` column-wise.
fn subtract_combined(a: &mut Block, b: &Block, c: &DMatrix<f64>) {
    let upd = combine(b, c);
    a.par_iter_mut().zip(upd).for_each(|(col, u)| {
        col.iter_mut().zip(u).for_each(|(x, y)| *x -= y);
    });
}

fn apply(mat: &SparseSymmetric, block: &Block) -> Block {
    block.iter().map(|v| mat.matvec(v)).collect()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Sorted eigen-decomposition of a small symmetric matrix.
fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (&h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Coefficients `D U Θ^{-1/2}` that `M`-orthonormalize `y`, dropping
/// directions that are numerically dependent.
fn svqb_coefficients(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = g.nrows();
    let mut d = vec![0.0; m];
    for i in 0..m {
        if g[(i, i)] <= 0.0 || !g[(i, i)].is_finite() {
            return Err(Error::IndefiniteMass);
        }
        d[i] = 1.0 / g[(i, i)].sqrt();
    }
    let scaled = DMatrix::from_fn(m, m, |r, c| d[r] * g[(r, c)] * d[c]);
    let (theta, u) = sorted_eigen(scaled);
    let top = theta.last().copied().unwrap_or(0.0);
    if theta.first().copied().unwrap_or(0.0) < -1e-8 * top {
        return Err(Error::IndefiniteMass);
    }
    let keep: Vec<usize> = (0..m).filter(|&j| theta[j] > 1e-12 * top).collect();
    Ok(DMatrix::from_fn(m, keep.len(), |r, c| {
        d[r] * u[(r, keep[c])] / theta[keep[c]].sqrt()
    }))
}

struct FourierPreconditioner {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `1 / (λ_K(θ) + s λ_M(θ))` in row order of the frequency grid.
    inv_symbol: Vec<f64>,
}

/// Row-averaged 3×3 stencil, indexed by `(di + 1) + 3 (dj + 1)`.
fn mean_stencil(mat: &SparseSymmetric, grid: &PeriodicGrid) -> [f64; 9] {
    let n = grid.n();
    let mut st = [0.0; 9];
    for idx in 0..grid.len() {
        let (i, j) = grid.coords(idx);
        for dj in 0..3 {
            for di in 0..3 {
                st[di + 3 * dj] += mat.get(idx, grid.index(i + n + di - 1, j + n + dj - 1));
            }
        }
    }
    st.map(|v| v / grid.len() as f64)
}

fn stencil_symbol(st: &[f64; 9], tx: f64, ty: f64) -> f64 {
    let mut acc = 0.0;
    for dj in 0..3 {
        for di in 0..3 {
            let (a, b) = (di as f64 - 1.0, dj as f64 - 1.0);
            acc += st[di + 3 * dj] * (a * tx + b * ty).cos();
        }
    }
    acc
}

impl FourierPreconditioner {
    fn new(pair: &OperatorPair) -> Self {
        let grid = &pair.grid;
        let n = grid.n();
        let ks = mean_stencil(&pair.stiffness, grid);
        let ms = mean_stencil(&pair.mass, grid);
        let step = 2.0 * std::f64::consts::PI / n as f64;
        let symbols: Vec<(f64, f64)> = (0..grid.len())
            .map(|idx| {
                let (p, q) = grid.coords(idx);
                let (tx, ty) = (p as f64 * step, q as f64 * step);
                (stencil_symbol(&ks, tx, ty), stencil_symbol(&ms, tx, ty))
            })
            .collect();
        let shift = symbols
            .iter()
            .skip(1)
            .map(|&(k, m)| k / m)
            .fold(f64::INFINITY, f64::min);
        let inv_symbol = symbols.iter().map(|&(k, m)| 1.0 / (k + shift * m)).collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            inv_symbol,
        }
    }

    fn transform(&self, data: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        fft.process(data);
        let mut t = vec![Complex::default(); n * n];
        transpose(data, &mut t, n);
        fft.process(&mut t);
        transpose(&t, data, n);
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex<f64>> = r.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data.iter_mut().zip(&self.inv_symbol).for_each(|(c, s)| *c *= *s);
        self.transform(&mut data, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter().map(|c| c.re * scale).collect()
    }
}

fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

enum Precond {
    Fourier(FourierPreconditioner),
    Diagonal(Vec<f64>),
    Identity,
}

impl Precond {
    fn build(pair: &OperatorPair, kind: Preconditioner) -> Self {
        match kind {
            Preconditioner::Fourier => Precond::Fourier(FourierPreconditioner::new(pair)),
            Preconditioner::Jacobi => {
                let kd = pair.stiffness.diagonal();
                let md = pair.mass.diagonal();
                let shift = 4.0 * std::f64::consts::PI.powi(2);
                Precond::Diagonal(kd.iter().zip(&md).map(|(k, m)| 1.0 / (k + shift * m)).collect())
            }
            Preconditioner::None => Precond::Identity,
        }
    }

    fn apply(&self, block: &Block) -> Block {
        match self {
            Precond::Fourier(f) => block.par_iter().map(|r| f.apply(r)).collect(),
            Precond::Diagonal(d) => block
                .iter()
                .map(|r| r.iter().zip(d).map(|(x, s)| x * s).collect())
                .collect(),
            Precond::Identity => block.clone(),
        }
    }
}

/// `x ← x − v₀ (v₀ᵀ M x)` for each column.
fn deflate(block: &mut Block, v0: &[f64], mv0: &[f64]) {
    block.par_iter_mut().for_each(|x| {
        let c = dot(mv0, x);
        x.iter_mut().zip(v0).for_each(|(a, b)| *a -= c * b);
    });
    let _ = v0;
}

/// The `k + 1` smallest eigenpairs with the default solver options.
pub fn smallest_eigenpairs(pair: &OperatorPair, k: usize, tol: f64) -> Result<SpectrumResult> {
    smallest_eigenpairs_with(pair, k, tol, &SolverOptions::default())
}

pub fn smallest_eigenpairs_with(
    pair: &OperatorPair,
    k: usize,
    tol: f64,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    let n = pair.dim();
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("need 1 <= k and k + 1 <= {n}, got {k}"),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("{tol} must be positive"),
        });
    }
    let kmat = &pair.stiffness;
    let mmat = &pair.mass;
    if mmat.diagonal().iter().any(|&d| !(d > 0.0)) {
        return Err(Error::IndefiniteMass);
    }

    let ones = vec![1.0; n];
    let mass_one = mmat.quadratic(&ones);
    if !(mass_one > 0.0) {
        return Err(Error::IndefiniteMass);
    }
    let v0: Vec<f64> = ones.iter().map(|x| x / mass_one.sqrt()).collect();
    let mv0 = mmat.matvec(&v0);

    let m = (k + opts.guard_vectors).min(n - 1);
    let precond = Precond::build(pair, opts.preconditioner);

    let mut rng = Lcg(opts.seed);
    let mut x: Block = (0..m).map(|_| (0..n).map(|_| rng.next_unit()).collect()).collect();
    deflate(&mut x, &v0, &mv0);
    deflate(&mut x, &v0, &mv0);
    let mx = apply(mmat, &x);
    let c = svqb_coefficients(&gram(&x, &mx))?;
    if c.ncols() < m {
        return Err(Error::IndefiniteMass);
    }
    x = combine(&x, &c);
    let mut kx = apply(kmat, &x);
    let mut mx = apply(mmat, &x);
    let (theta, cx) = sorted_eigen(gram(&x, &kx));
    x = combine(&x, &cx);
    kx = combine(&kx, &cx);
    mx = combine(&mx, &cx);
    let mut lambda = theta;

    let mut p: Option<(Block, Block, Block)> = None;
    let mut iterations = 0;
    let mut rel = vec![f64::INFINITY; m];

    loop {
        // residuals
        let r: Block = (0..m)
            .into_par_iter()
            .map(|i| {
                kx[i]
                    .iter()
                    .zip(&mx[i])
                    .map(|(a, b)| a - lambda[i] * b)
                    .collect()
            })
            .collect();
        for i in 0..m {
            rel[i] = norm(&r[i]) / norm(&kx[i]).max(f64::MIN_POSITIVE);
        }
        if rel[..k].iter().all(|&e| e <= tol) {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                worst_residual: rel[..k].iter().copied().fold(0.0, f64::max),
                residuals: rel[..k].to_vec(),
            });
        }
        iterations += 1;

        let active: Vec<usize> = (0..m).filter(|&i| i >= k || rel[i] > tol).collect();
        let ra: Block = active.iter().map(|&i| r[i].clone()).collect();
        let mut w = precond.apply(&ra);
        deflate(&mut w, &v0, &mv0);

        let (mut y, mut ky, mut my) = {
            let kw = apply(kmat, &w);
            let mw = apply(mmat, &w);
            match p.take() {
                Some((pp, kp, mp)) => (
                    w.into_iter().chain(pp).collect::<Block>(),
                    kw.into_iter().chain(kp).collect::<Block>(),
                    mw.into_iter().chain(mp).collect::<Block>(),
                ),
                None => (w, kw, mw),
            }
        };
        // M-orthogonalize the new directions against X, twice.
        for _ in 0..2 {
            let c = gram(&x, &my);
            subtract_combined(&mut y, &x, &c);
            subtract_combined(&mut ky, &kx, &c);
            subtract_combined(&mut my, &mx, &c);
        }
        let cy = svqb_coefficients(&gram(&y, &my))?;
        let y = combine(&y, &cy);
        let ky = combine(&ky, &cy);
        let my = combine(&my, &cy);

        let nx = x.len();
        let ny = y.len();
        let mut h = DMatrix::zeros(nx + ny, nx + ny);
        h.view_mut((0, 0), (nx, nx)).copy_from(&gram(&x, &kx));
        let xy = gram(&x, &ky);
        h.view_mut((0, nx), (nx, ny)).copy_from(&xy);
        h.view_mut((nx, 0), (ny, nx)).copy_from(&xy.transpose());
        h.view_mut((nx, nx), (ny, ny)).copy_from(&gram(&y, &ky));
        let (theta, u) = sorted_eigen(h);

        let cxs = u.view((0, 0), (nx, m)).into_owned();
        let cys = u.view((nx, 0), (ny, m)).into_owned();
        let pn = combine(&y, &cys);
        let kpn = combine(&ky, &cys);
        let mpn = combine(&my, &cys);
        let add = |a: Block, b: &Block| -> Block {
            a.into_iter()
                .zip(b)
                .map(|(mut u, v)| {
                    u.iter_mut().zip(v).for_each(|(s, t)| *s += t);
                    u
                })
                .collect()
        };
        x = add(combine(&x, &cxs), &pn);
        kx = add(combine(&kx, &cxs), &kpn);
        mx = add(combine(&mx, &cxs), &mpn);
        lambda = theta[..m].to_vec();
        p = Some((pn, kpn, mpn));

        if iterations % 25 == 0 {
            // refresh products and the M-orthonormality of X
            deflate(&mut x, &v0, &mv0);
            let mxx = apply(mmat, &x);
            let c = svqb_coefficients(&gram(&x, &mxx))?;
            if c.ncols() < m {
                return Err(Error::IndefiniteMass);
            }
            x = combine(&x, &c);
            kx = apply(kmat, &x);
            mx = apply(mmat, &x);
            let (theta, cx) = sorted_eigen(gram(&x, &kx));
            x = combine(&x, &cx);
            kx = combine(&kx, &cx);
            mx = combine(&mx, &cx);
            lambda = theta;
            p = None;
        }
    }

    finish(pair, k, v0, x, iterations)
}

fn finish(
    pair: &OperatorPair,
    k: usize,
    v0: Vec<f64>,
    x: Block,
    iterations: usize,
) -> Result<SpectrumResult> {
    let mut vectors: Block = std::iter::once(v0).chain(x.into_iter().take(k)).collect();
    let kv = apply(&pair.stiffness, &vectors);
    let mv = apply(&pair.mass, &vectors);
    let mut pairs: Vec<(f64, usize)> = (0..vectors.len())
        .map(|i| (dot(&vectors[i], &kv[i]) / dot(&vectors[i], &mv[i]), i))
        .collect();
    pairs[1..].sort_by(|a, b| a.0.total_cmp(&b.0));

    let lambda1 = pairs.get(1).map_or(1.0, |p| p.0.abs());
    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    let mut relative = Vec::with_capacity(pairs.len());
    let mut ordered = Vec::with_capacity(pairs.len());
    for (pos, &(lam, i)) in pairs.iter().enumerate() {
        let r: Vec<f64> = kv[i].iter().zip(&mv[i]).map(|(a, b)| a - lam * b).collect();
        let rn = norm(&r);
        let denom = if pos == 0 {
            lambda1 * norm(&mv[i])
        } else {
            norm(&kv[i])
        };
        eigenvalues.push(lam);
        residuals.push(rn);
        relative.push(rn / denom.max(f64::MIN_POSITIVE));
        ordered.push(std::mem::take(&mut vectors[i]));
    }
    for v in &mut ordered {
        normalize_sign(v);
    }
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors: ordered,
        residuals,
        relative_residuals: relative,
        iterations,
    })
}

/// Flips `v` so that its first significant component is positive.
fn normalize_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// `fᵀKf / fᵀMf`.
pub fn rayleigh_quotient(pair: &OperatorPair, f: &[f64]) -> Result<f64> {
    if f.len() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            actual: f.len(),
        });
    }
    let mass = pair.mass.quadratic(f);
    if !(mass > 0.0) {
        return Err(Error::ZeroMassNorm);
    }
    Ok(pair.stiffness.quadratic(f) / mass)
}
