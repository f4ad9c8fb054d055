//! Checks on the hyperbolic plane: the pointwise symbol lower bound, the
//! radial Rayleigh quotient of `e^{−sρ}` and ball-growth entropy.
//!
//! Everything reduces to 1-D quadratures in geodesic polar coordinates
//! `(r, φ)`, where the volume density is `sinh r`.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::metric::{Covector, OneFormField, Point, RandersMetric};
use crate::quadrature::{AngleQuadrature, GaussLegendre};
use crate::symbol::symbol_at;

/// Pointwise data at one point: `‖dh‖`, `‖df‖` and the angle `ψ` between
/// the gradients of `f` and `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicSample {
    pub dh_norm: f64,
    pub df_norm: f64,
    pub psi: f64,
}

impl HyperbolicSample {
    pub fn new(dh_norm: f64, df_norm: f64, psi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&dh_norm) {
            return Err(Error::InvalidParameter {
                name: "dh_norm",
                reason: format!("{dh_norm} is outside [0, 1)"),
            });
        }
        if !(df_norm > 0.0 && df_norm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "df_norm",
                reason: format!("{df_norm} must be positive"),
            });
        }
        Ok(Self { dh_norm, df_norm, psi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Compares `‖df‖²_σ` (by quadrature, with `h`'s gradient along `θ = 0`)
/// against `‖df‖² (1 + n‖dh‖²/8)` for `n = 2`.
pub fn symbol_lower_bound_check(s: &HyperbolicSample, q: &AngleQuadrature) -> BoundCheck {
    let n = 2.0;
    let lhs = q.integrate(|theta| {
        let num = s.df_norm * (theta - s.psi).cos();
        let b = s.dh_norm * theta.cos();
        num * num / (1.0 - b * b)
    }) / PI;
    let rhs = s.df_norm * s.df_norm * (1.0 + n * s.dh_norm * s.dh_norm / 8.0);
    BoundCheck {
        lhs,
        rhs,
        margin: lhs - rhs,
    }
}

/// `Σ w_j cos²θ_j sin²θ_j`, which is `π/4` for any uniform rule with at
/// least six nodes.
pub fn quartic_angle_integral(q: &AngleQuadrature) -> f64 {
    q.integrate(|t| {
        let (s, c) = t.sin_cos();
        c * c * s * s
    })
}

pub fn write_bound_csv<W: Write>(mut w: W, rows: &[(f64, BoundCheck)]) -> io::Result<()> {
    writeln!(w, "param,lhs,rhs,margin")?;
    for (param, b) in rows {
        writeln!(w, "{param:.15e},{:.15e},{:.15e},{:.15e}", b.lhs, b.rhs, b.margin)?;
    }
    Ok(())
}

/// Radial potential `h(r)` whose derivative is the bump
/// `A sin²(π (r − r₀)/(r₁ − r₀))` on `[r₀, r₁]` and zero elsewhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBump {
    pub amplitude: f64,
    pub inner: f64,
    pub outer: f64,
}

impl RadialBump {
    pub fn new(amplitude: f64, inner: f64, outer: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) || !(0.0 <= inner && inner < outer) {
            return Err(Error::InvalidParameter {
                name: "radial bump",
                reason: format!("need |A| < 1 and 0 <= r0 < r1 (A = {amplitude}, [{inner}, {outer}])"),
            });
        }
        Ok(Self { amplitude, inner, outer })
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        let u = PI * (r - self.inner) / (self.outer - self.inner);
        self.amplitude * u.sin().powi(2)
    }

    /// `h(r) − h(0)`.
    pub fn value(&self, r: f64) -> f64 {
        let w = self.outer - self.inner;
        let x = (r.min(self.outer) - self.inner).max(0.0);
        self.amplitude * (0.5 * x - w / (4.0 * PI) * (2.0 * PI * x / w).sin())
    }
}

/// Allowed fraction of the `L²` mass of the test function beyond `R_max`.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Rayleigh quotient `∫‖df‖²_σ / ∫f²` of `f = e^{−sρ⁺}` on the hyperbolic
/// plane, `ρ⁺(r) = r + h(r) − h(0)` the forward distance from the origin
/// for the exact radial form `dh` (`h = 0` without a profile).
///
/// The symbol factor `σ(dr, dr)` comes from [`symbol_at`] in an orthonormal
/// frame where `dh = h'(r) dr`.
pub fn radial_test_rayleigh(s: f64, n: usize, r_max: f64, profile: Option<&RadialBump>) -> Result<f64> {
    if n != 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("radial quadrature is implemented for n = 2, got {n}"),
        });
    }
    if !(2.0 * s > (n - 1) as f64) {
        return Err(Error::NotIntegrable { s, n });
    }
    let q = AngleQuadrature::default();
    let h = |r: f64| profile.map_or(0.0, |p| p.value(r));
    let dh = |r: f64| profile.map_or(0.0, |p| p.derivative(r));
    // e^{−2sρ⁺} sinh r without overflow
    let weight = |r: f64| {
        0.5 * (-2.0 * s * h(r)).exp() * (((1.0 - 2.0 * s) * r).exp() - (-(1.0 + 2.0 * s) * r).exp())
    };
    let symbol = |r: f64| -> Result<f64> {
        let a = dh(r);
        if a == 0.0 {
            return Ok(1.0);
        }
        let m = RandersMetric::flat(OneFormField::constant(Covector::new(a, 0.0)), 1.0)?;
        Ok(symbol_at(&m, Point::new(0.0, 0.0), &q)?.s11)
    };

    let gl = GaussLegendre::new(8);
    let panels = (r_max / 0.25).ceil().max(1.0) as usize;
    let step = r_max / panels as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..panels {
        let lo = k as f64 * step;
        for (x, w) in gl.points() {
            let r = lo + 0.5 * step * (x + 1.0);
            let wr = 0.5 * step * w * weight(r);
            let grad = s * (1.0 + dh(r));
            num += wr * grad * grad * symbol(r)?;
            den += wr;
        }
    }
    // beyond the profile the weight is e^{−2s h(∞)} sinh r e^{−2sr}
    let decay = 2.0 * s - 1.0;
    let tail = 0.5 * (-2.0 * s * h(r_max)).exp() * (-decay * r_max).exp() / decay;
    let fraction = tail / (den + tail);
    if fraction > TAIL_LIMIT {
        return Err(Error::TailTooHeavy { fraction });
    }
    Ok(num / den)
}

/// Smallest `R_max` whose tail fraction is below [`TAIL_LIMIT`] for the
/// unperturbed weight, with a 10% margin.
pub fn tail_radius(s: f64) -> f64 {
    let decay = 2.0 * s - 1.0;
    // tail/total ≈ e^{−decay R}
    1.1 * (-(TAIL_LIMIT.ln()) / decay) + 5.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub radii: Vec<f64>,
    pub log_volumes: Vec<f64>,
    pub slope: f64,
    /// Root-mean-square residual of the linear fit.
    pub fit_residual: f64,
}

impl EntropyEstimate {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "R,log_volume")?;
        for (r, v) in self.radii.iter().zip(&self.log_volumes) {
            writeln!(w, "{r:.15e},{v:.15e}")?;
        }
        Ok(())
    }
}

/// Direction of the distance in [`ball_growth_entropy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ball {
    /// `{y : d(O, y) ≤ R}`, with `d(O, y) = r + h(y) − h(O)`.
    Forward,
    /// `{y : d(y, O) ≤ R}`, with `d(y, O) = r − h(y) + h(O)`.
    Backward,
}

const ANGLE_NODES: usize = 512;

/// Volumes of metric balls about the origin of the hyperbolic plane for
/// the exact form `dh`, and the least-squares slope of `log vol` against
/// `R`. The potential is given in polar coordinates and must satisfy
/// `|∂_r h| < 1` so that the ball boundary is a radial graph.
pub fn ball_growth_entropy<H>(n: usize, radii: &[f64], potential: Option<H>, ball: Ball) -> Result<EntropyEstimate>
where
    H: Fn(f64, f64) -> f64,
{
    if n != 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("ball growth is implemented for n = 2, got {n}"),
        });
    }
    if radii.len() < 3 {
        return Err(Error::DegenerateFit(radii.len()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: "radii must be positive and strictly increasing".into(),
        });
    }
    let sign = match ball {
        Ball::Forward => 1.0,
        Ball::Backward => -1.0,
    };
    let h = |r: f64, phi: f64| potential.as_ref().map_or(0.0, |f| f(r, phi));
    let q = AngleQuadrature::new(ANGLE_NODES)?;
    let log_volumes: Vec<f64> = radii
        .iter()
        .map(|&big_r| {
            let vol = q.integrate(|phi| {
                let h0 = h(0.0, phi);
                let dist = |r: f64| r + sign * (h(r, phi) - h0);
                let r_star = bisect(|r| dist(r) - big_r, 0.0, big_r);
                r_star.cosh() - 1.0
            });
            vol.ln()
        })
        .collect();
    let (slope, fit_residual) = linear_fit(radii, &log_volumes);
    Ok(EntropyEstimate {
        radii: radii.to_vec(),
        log_volumes,
        slope,
        fit_residual,
    })
}

/// Root of an increasing `g` with `g(0) ≤ 0`, bracketing upward from `hi`.
fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, hi: f64) -> f64 {
    let mut hi = hi.max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares slope and RMS residual.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}
