//! Geodesics and curve lengths of Randers metrics on the flat torus.
//!
//! For `F = |v| + tβ(v)` the Euler-Lagrange equations reduce, at unit
//! `F`-speed and with `u = (cos φ, sin φ)` the base direction, to
//!
//! ```text
//! ẋ = u / (1 + tβ(u)),    φ̇ = −t curl β / (1 + tβ(u)).
//! ```
//!
//! So closed forms only reparametrize the straight lines of the flat metric.
//! Positions are never wrapped: traces and curves live in the universal
//! cover `R²`, and the form is evaluated periodically.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::metric::{BaseMetric, Point, RandersMetric, Vector};
use crate::quadrature::GaussLegendre;

/// Per-step tolerance on `|F(x, ẋ) − 1|`.
pub const SPEED_DRIFT_LIMIT: f64 = 1e-6;
pub const MAX_STEP: f64 = 1e-2;

/// Position in the cover, base direction angle and `F`-arclength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub time: f64,
}

impl GeodesicState {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi, time: 0.0 }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Unit-`F`-speed velocity.
    pub fn velocity(&self, m: &RandersMetric) -> Vector {
        let u = Vector::from_angle(self.phi);
        u.scale(1.0 / (1.0 + m.t() * m.form().eval(self.point()).apply(u)))
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    pub states: Vec<GeodesicState>,
    pub velocities: Vec<Vector>,
    /// Largest `|F(x, ẋ) − 1|` seen along the trace.
    pub max_speed_drift: f64,
}

impl GeodesicTrace {
    pub fn endpoint(&self) -> GeodesicState {
        *self.states.last().expect("trace holds the initial state")
    }

    /// Largest perpendicular distance of the lifted positions from their
    /// total-least-squares line.
    pub fn line_fit_residual(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.states.iter().map(|s| (s.x, s.y)).collect();
        line_fit_residual(&pts)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,vx,vy")?;
        for (s, v) in self.states.iter().zip(&self.velocities) {
            writeln!(w, "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}", s.time, s.x, s.y, v.v1, v.v2)?;
        }
        Ok(())
    }
}

/// Max distance of `pts` from the principal axis through their centroid.
pub fn line_fit_residual(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dx, dy) = (x - cx, y - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // principal direction of the 2×2 scatter matrix
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = angle.sin_cos();
    pts.iter()
        .map(|&(x, y)| (-(x - cx) * s + (y - cy) * c).abs())
        .fold(0.0, f64::max)
}

fn rhs(m: &RandersMetric, x: f64, y: f64, phi: f64) -> [f64; 3] {
    let p = Point::new(x, y);
    let u = Vector::from_angle(phi);
    let t = m.t();
    let denom = 1.0 + t * m.form().eval(p).apply(u);
    let curl = m.form().curl(p);
    [u.v1 / denom, u.v2 / denom, -t * curl / denom]
}

/// Integrates the unit-speed geodesic from `s0` over `[0, total_time]` with
/// classical RK4 at step `dt`; the trace records every step.
pub fn integrate_geodesic(
    m: &RandersMetric,
    s0: GeodesicState,
    total_time: f64,
    dt: f64,
) -> Result<GeodesicTrace> {
    if m.base() != BaseMetric::FlatTorus {
        return Err(Error::InvalidParameter {
            name: "base",
            reason: "geodesics are integrated on the flat torus only".into(),
        });
    }
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("{dt} must lie in (0, {MAX_STEP}]"),
        });
    }
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: format!("{total_time} must be finite and non-negative"),
        });
    }
    let steps = (total_time / dt).round() as usize;
    let h = if steps == 0 { 0.0 } else { total_time / steps as f64 };
    let mut states = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    let mut s = GeodesicState { time: 0.0, ..s0 };
    let mut max_drift: f64 = 0.0;
    let record = |s: &GeodesicState, max_drift: &mut f64| -> Result<Vector> {
        let v = s.velocity(m);
        let drift = (m.eval_f(s.point(), v) - 1.0).abs();
        if !(drift <= SPEED_DRIFT_LIMIT) {
            return Err(Error::SpeedDrift { drift });
        }
        *max_drift = max_drift.max(drift);
        Ok(v)
    };
    velocities.push(record(&s, &mut max_drift)?);
    states.push(s);
    for k in 1..=steps {
        let k1 = rhs(m, s.x, s.y, s.phi);
        let k2 = rhs(m, s.x + 0.5 * h * k1[0], s.y + 0.5 * h * k1[1], s.phi + 0.5 * h * k1[2]);
        let k3 = rhs(m, s.x + 0.5 * h * k2[0], s.y + 0.5 * h * k2[1], s.phi + 0.5 * h * k2[2]);
        let k4 = rhs(m, s.x + h * k3[0], s.y + h * k3[1], s.phi + h * k3[2]);
        let step = |i: usize| h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        s = GeodesicState {
            x: s.x + step(0),
            y: s.y + step(1),
            phi: s.phi + step(2),
            time: k as f64 * h,
        };
        velocities.push(record(&s, &mut max_drift)?);
        states.push(s);
    }
    Ok(GeodesicTrace {
        states,
        velocities,
        max_speed_drift: max_drift,
    })
}

/// Free homotopy class of closed curves on the torus, by winding numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HomotopyClass {
    pub p: i64,
    pub q: i64,
}

impl HomotopyClass {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::InvalidParameter {
                name: "class",
                reason: "(0, 0) is the trivial class".into(),
            });
        }
        Ok(Self { p, q })
    }

    pub fn flat_length(&self) -> f64 {
        (self.p as f64).hypot(self.q as f64)
    }
}

/// Closed polygon in the cover: the last vertex equals the first plus an
/// integer translation.
#[derive(Clone, Debug)]
pub struct ClosedCurve {
    points: Vec<Point>,
    class: (i64, i64),
}

const CLOSURE_TOLERANCE: f64 = 1e-9;

impl ClosedCurve {
    /// Validates closure of a sampled curve whose last sample repeats the
    /// first one up to a lattice translation.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "curve",
                reason: "need at least two samples".into(),
            });
        }
        let (a, b) = (points[0], points[points.len() - 1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        if (dx - dx.round()).abs() > CLOSURE_TOLERANCE || (dy - dy.round()).abs() > CLOSURE_TOLERANCE {
            return Err(Error::OpenCurve { dx, dy });
        }
        Ok(Self {
            points,
            class: (dx.round() as i64, dy.round() as i64),
        })
    }

    /// The straight loop `s ↦ start + s (p, q)` with `segments` pieces.
    pub fn straight(start: Point, class: HomotopyClass, segments: usize) -> Self {
        Self::perturbed(start, class, segments, &[])
    }

    /// `start + s (p, q) + Σ_m (a_m n̂ + b_m ê) sin(2π m s)` where `ê` is the
    /// unit direction of the class and `n̂` its normal.
    pub fn perturbed(start: Point, class: HomotopyClass, segments: usize, modes: &[(f64, f64)]) -> Self {
        let (p, q) = (class.p as f64, class.q as f64);
        let len = class.flat_length();
        let (ex, ey) = (p / len, q / len);
        let points = (0..=segments.max(1))
            .map(|k| {
                let s = k as f64 / segments.max(1) as f64;
                let (mut x, mut y) = (start.x + s * p, start.y + s * q);
                if k != 0 && k != segments {
                    for (m, &(a, b)) in modes.iter().enumerate() {
                        let w = (2.0 * std::f64::consts::PI * (m + 1) as f64 * s).sin();
                        x += (-a * ey + b * ex) * w;
                        y += (a * ex + b * ey) * w;
                    }
                }
                Point::new(x, y)
            })
            .collect();
        Self {
            points,
            class: (class.p, class.q),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Winding numbers `(p, q)` (may be `(0, 0)` for contractible loops).
    pub fn winding(&self) -> (i64, i64) {
        self.class
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            class: (-self.class.0, -self.class.1),
        }
    }
}

/// Panels per unit of base length used by [`curve_length`].
const PANELS_PER_UNIT: f64 = 256.0;
const GAUSS_ORDER: usize = 8;

/// `∫ F(c, ċ)` along each straight segment by composite Gauss-Legendre.
pub fn curve_length(m: &RandersMetric, curve: &ClosedCurve) -> f64 {
    let gl = GaussLegendre::new(GAUSS_ORDER);
    let t = m.t();
    curve
        .points
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let d = Vector::new(b.x - a.x, b.y - a.y);
            let base = m.base().norm(a, d);
            let panels = ((d.norm() * PANELS_PER_UNIT).ceil() as usize).max(1);
            let form = gl.integrate_composite(0.0, 1.0, panels, |s| {
                m.form().eval(a.offset(d, s)).apply(d)
            });
            base + t * form
        })
        .sum()
}

/// Length of the closed geodesic in `class`.
///
/// For a closed form the straight loop is a reparametrized geodesic and its
/// length `√(p²+q²) + t·(period of β)` is the minimum in the class, since
/// the period does not depend on the representative. Other forms bend
/// geodesics and are rejected.
pub fn class_length(m: &RandersMetric, class: HomotopyClass) -> Result<f64> {
    if m.base() != BaseMetric::FlatTorus {
        return Err(Error::InvalidParameter {
            name: "base",
            reason: "class lengths are computed on the flat torus only".into(),
        });
    }
    if !m.form().is_closed() {
        return Err(Error::NotClosed);
    }
    let segments = 64 * (class.p.unsigned_abs() + class.q.unsigned_abs()) as usize;
    Ok(curve_length(m, &ClosedCurve::straight(Point::new(0.0, 0.0), class, segments)))
}

#[derive(Clone, Debug)]
pub struct ShorteningOptions {
    pub vertices: usize,
    pub step: f64,
    pub max_iterations: usize,
}

impl Default for ShorteningOptions {
    fn default() -> Self {
        Self {
            vertices: 200,
            step: 1e-3,
            max_iterations: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShorteningResult {
    pub curve: ClosedCurve,
    pub initial_length: f64,
    /// Accurate [`curve_length`] of the final polygon.
    pub final_length: f64,
    pub iterations: usize,
}

/// Two-point Gauss rule on `[0, 1]`.
const SEG_NODES: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Polygon length with a two-point rule for the form term, and its
/// gradient with respect to the free vertices.
fn polygon_length_and_gradient(m: &RandersMetric, xs: &[Point], shift: (f64, f64)) -> (f64, Vec<[f64; 2]>) {
    let n = xs.len();
    let t = m.t();
    let mut grad = vec![[0.0; 2]; n];
    let mut total = 0.0;
    for k in 0..n {
        let a = xs[k];
        let b = if k + 1 == n {
            Point::new(xs[0].x + shift.0, xs[0].y + shift.1)
        } else {
            xs[k + 1]
        };
        let d = [b.x - a.x, b.y - a.y];
        let len = d[0].hypot(d[1]);
        total += len;
        let unit = if len > 0.0 { [d[0] / len, d[1] / len] } else { [0.0; 2] };
        let kb = (k + 1) % n;
        for i in 0..2 {
            grad[k][i] -= unit[i];
            grad[kb][i] += unit[i];
        }
        for &s in &SEG_NODES {
            let p = Point::new(a.x + s * d[0], a.y + s * d[1]);
            let beta = m.form().eval(p);
            let j = m.form().jacobian(p);
            total += 0.5 * t * (beta.a1 * d[0] + beta.a2 * d[1]);
            // ∂/∂p of β(p)·d is Jᵀd; ∂/∂d is β(p)
            let jtd = [j[0][0] * d[0] + j[1][0] * d[1], j[0][1] * d[0] + j[1][1] * d[1]];
            let b = [beta.a1, beta.a2];
            for i in 0..2 {
                grad[k][i] += 0.5 * t * ((1.0 - s) * jtd[i] - b[i]);
                grad[kb][i] += 0.5 * t * (s * jtd[i] + b[i]);
            }
        }
    }
    (total, grad)
}

/// Fixed-step gradient descent on the polygonal `F`-length of a closed
/// curve, resampled to `opts.vertices` vertices. Used as an oracle that no
/// representative shorter than the straight loop exists.
pub fn shorten_curve(m: &RandersMetric, start: &ClosedCurve, opts: &ShorteningOptions) -> Result<ShorteningResult> {
    let (p, q) = start.winding();
    let shift = (p as f64, q as f64);
    let mut xs = resample(start, opts.vertices.max(3));
    let initial_length = curve_length(m, start);
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let (len, grad) = polygon_length_and_gradient(m, &xs, shift);
        iterations = it + 1;
        for (x, g) in xs.iter_mut().zip(&grad) {
            x.x -= opts.step * g[0];
            x.y -= opts.step * g[1];
        }
        if (last - len).abs() < 1e-15 * len.abs().max(1.0) {
            break;
        }
        last = len;
    }
    let mut points = xs.clone();
    points.push(Point::new(xs[0].x + shift.0, xs[0].y + shift.1));
    let curve = ClosedCurve::new(points)?;
    let final_length = curve_length(m, &curve);
    Ok(ShorteningResult {
        curve,
        initial_length,
        final_length,
        iterations,
    })
}

/// `count` points equally spaced in parameter along the polygon, without
/// the repeated endpoint.
fn resample(curve: &ClosedCurve, count: usize) -> Vec<Point> {
    let pts = curve.points();
    let segs = pts.len() - 1;
    (0..count)
        .map(|k| {
            let s = k as f64 * segs as f64 / count as f64;
            let i = (s.floor() as usize).min(segs - 1);
            let f = s - i as f64;
            let (a, b) = (pts[i], pts[i + 1]);
            Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))
        })
        .collect()
}
