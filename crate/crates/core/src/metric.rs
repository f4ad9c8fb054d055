//! Base metrics, one-form fields and Randers metrics `F = F̄ + tβ`.
//!
//! Coordinates on the torus are the unit-square coordinates of
//! `R² / Z²`; the hyperbolic disk uses the Poincaré model, where the base
//! metric is `λ(x)² δ` with `λ(x) = 2 / (1 - |x|²)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Constructors reject `t·b_max >= 1 - ADMISSIBILITY_MARGIN`.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Representative in `[0, 1)²`.
    pub fn wrapped(self) -> Self {
        Self::new(self.x.rem_euclid(1.0), self.y.rem_euclid(1.0))
    }

    pub fn offset(self, v: Vector, scale: f64) -> Self {
        Self::new(self.x + scale * v.v1, self.y + scale * v.v2)
    }
}

/// A 1-form at a point, in the coordinate coframe.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Covector {
    pub a1: f64,
    pub a2: f64,
}

impl Covector {
    pub const ZERO: Covector = Covector { a1: 0.0, a2: 0.0 };

    pub const fn new(a1: f64, a2: f64) -> Self {
        Self { a1, a2 }
    }

    pub fn apply(self, v: Vector) -> f64 {
        self.a1 * v.v1 + self.a2 * v.v2
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.a1, s * self.a2)
    }

    /// Euclidean norm of the components.
    pub fn norm(self) -> f64 {
        self.a1.hypot(self.a2)
    }

    pub fn dot(self, other: Covector) -> f64 {
        self.a1 * other.a1 + self.a2 * other.a2
    }

    pub fn is_finite(self) -> bool {
        self.a1.is_finite() && self.a2.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector {
    pub v1: f64,
    pub v2: f64,
}

impl Vector {
    pub const fn new(v1: f64, v2: f64) -> Self {
        Self { v1, v2 }
    }

    /// Unit vector at angle `theta` from the first axis.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.v1, s * self.v2)
    }

    pub fn norm(self) -> f64 {
        self.v1.hypot(self.v2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMetric {
    /// Flat metric on `R² / Z²`.
    FlatTorus,
    /// Curvature −1 metric on the Poincaré disk.
    HyperbolicDisk,
}

impl BaseMetric {
    /// `λ(x)` such that the metric tensor at `x` is `λ(x)² δ`.
    pub fn conformal_factor(self, p: Point) -> f64 {
        match self {
            BaseMetric::FlatTorus => 1.0,
            BaseMetric::HyperbolicDisk => {
                let r2 = p.x * p.x + p.y * p.y;
                debug_assert!(r2 < 1.0, "point outside the Poincaré disk");
                2.0 / (1.0 - r2)
            }
        }
    }

    pub fn norm(self, p: Point, v: Vector) -> f64 {
        self.conformal_factor(p) * v.norm()
    }

    pub fn dual_norm(self, p: Point, l: Covector) -> f64 {
        l.norm() / self.conformal_factor(p)
    }

    pub fn dual_inner(self, p: Point, a: Covector, b: Covector) -> f64 {
        let lambda = self.conformal_factor(p);
        a.dot(b) / (lambda * lambda)
    }

    /// Components of `l` in the base-orthonormal coframe at `p`.
    pub fn to_orthonormal(self, p: Point, l: Covector) -> Covector {
        l.scale(1.0 / self.conformal_factor(p))
    }
}

/// Smoothed version of the tent map `f₀(u) = min(u, 1 - u)` on `R / Z`.
///
/// The derivative is exactly `±1` away from the ε-windows around `0` and
/// `1/2`; inside the windows it follows the odd ramp `sin(πw/2)`, which makes
/// the profile `C²`. The value is normalized by `f_ε(ε) = ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedTent {
    eps: f64,
}

impl SmoothedTent {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("{eps} is outside (0, 1/4)"),
            });
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Value and first derivative at `u` (taken mod 1).
    pub fn eval(&self, u: f64) -> (f64, f64) {
        let eps = self.eps;
        let u = u.rem_euclid(1.0);
        let ramp = 2.0 * eps / PI;
        if u < eps || u > 1.0 - eps {
            let w = if u < eps { u } else { u - 1.0 } / eps;
            let (s, c) = (FRAC_PI_2 * w).sin_cos();
            (eps - ramp * c, s)
        } else if u <= 0.5 - eps {
            (u, 1.0)
        } else if u < 0.5 + eps {
            let w = (u - 0.5) / eps;
            let (s, c) = (FRAC_PI_2 * w).sin_cos();
            (0.5 - eps + ramp * c, -s)
        } else {
            (1.0 - u, -1.0)
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        let eps = self.eps;
        let u = u.rem_euclid(1.0);
        let k = FRAC_PI_2 / eps;
        if u < eps || u > 1.0 - eps {
            let w = if u < eps { u } else { u - 1.0 } / eps;
            k * (FRAC_PI_2 * w).cos()
        } else if (0.5 - eps..0.5 + eps).contains(&u) {
            let w = (u - 0.5) / eps;
            -k * (FRAC_PI_2 * w).cos()
        } else {
            0.0
        }
    }
}

/// The unsmoothed tent `f₀`.
pub fn tent(u: f64) -> f64 {
    let u = u.rem_euclid(1.0);
    if u <= 0.5 {
        u
    } else {
        1.0 - u
    }
}

type FormFn = Arc<dyn Fn(Point) -> Covector + Send + Sync>;
type PotentialFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum FormKind {
    Zero,
    Constant(Covector),
    HEps { tent: SmoothedTent, rho: f64 },
    /// `a·sin(2πy) dx`, a form with non-zero exterior derivative.
    Shear { amplitude: f64 },
    Custom {
        beta: FormFn,
        potential: Option<PotentialFn>,
        closed: bool,
    },
}

/// A 1-form field `x ↦ β_x` together with what is known about it.
#[derive(Clone)]
pub struct OneFormField {
    kind: FormKind,
    b_max: f64,
}

impl fmt::Debug for OneFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kind {
            FormKind::Zero => "zero".to_string(),
            FormKind::Constant(c) => format!("constant({}, {})", c.a1, c.a2),
            FormKind::HEps { tent, rho } => format!("h_eps(eps={}, rho={rho})", tent.eps()),
            FormKind::Shear { amplitude } => format!("shear({amplitude})"),
            FormKind::Custom { .. } => "custom".to_string(),
        };
        f.debug_struct("OneFormField")
            .field("kind", &name)
            .field("b_max", &self.b_max)
            .finish()
    }
}

const CURL_STEP: f64 = 1e-5;

impl OneFormField {
    pub fn zero() -> Self {
        Self {
            kind: FormKind::Zero,
            b_max: 0.0,
        }
    }

    /// Constant form on the flat torus: closed, exact only when zero.
    pub fn constant(c: Covector) -> Self {
        Self {
            kind: FormKind::Constant(c),
            b_max: c.norm(),
        }
    }

    /// `cos ρ dx + sin ρ dy`: unit-norm, closed, never exact.
    pub fn closed_irrational(rho: f64) -> Self {
        let (s, c) = rho.sin_cos();
        Self {
            kind: FormKind::Constant(Covector::new(c, s)),
            b_max: 1.0,
        }
    }

    /// `β_ε = dh_ε` with `h_ε(x, y) = cos ρ f_ε(x) + sin ρ f_ε(y)`.
    pub fn h_eps(eps: f64, rho: f64) -> Result<Self> {
        Ok(Self {
            kind: FormKind::HEps {
                tent: SmoothedTent::new(eps)?,
                rho,
            },
            b_max: 1.0,
        })
    }

    pub fn shear(amplitude: f64) -> Self {
        Self {
            kind: FormKind::Shear { amplitude },
            b_max: amplitude.abs(),
        }
    }

    /// Arbitrary form given by an evaluator. `b_max` must bound the base-dual
    /// norm over the domain where the form is used.
    pub fn custom<F>(beta: F, b_max: f64, closed: bool) -> Self
    where
        F: Fn(Point) -> Covector + Send + Sync + 'static,
    {
        Self {
            kind: FormKind::Custom {
                beta: Arc::new(beta),
                potential: None,
                closed,
            },
            b_max,
        }
    }

    /// Exact form `dh` given by its potential and its differential.
    pub fn custom_exact<H, F>(potential: H, beta: F, b_max: f64) -> Self
    where
        H: Fn(Point) -> f64 + Send + Sync + 'static,
        F: Fn(Point) -> Covector + Send + Sync + 'static,
    {
        Self {
            kind: FormKind::Custom {
                beta: Arc::new(beta),
                potential: Some(Arc::new(potential)),
                closed: true,
            },
            b_max,
        }
    }

    pub fn b_max(&self) -> f64 {
        self.b_max
    }

    pub fn eval(&self, p: Point) -> Covector {
        match &self.kind {
            FormKind::Zero => Covector::ZERO,
            FormKind::Constant(c) => *c,
            FormKind::HEps { tent, rho } => {
                let (s, c) = rho.sin_cos();
                Covector::new(c * tent.eval(p.x).1, s * tent.eval(p.y).1)
            }
            FormKind::Shear { amplitude } => {
                Covector::new(amplitude * (2.0 * PI * p.y).sin(), 0.0)
            }
            FormKind::Custom { beta, .. } => beta(p),
        }
    }

    /// The potential `h` with `β = dh`, when the form is exact.
    pub fn potential(&self, p: Point) -> Option<f64> {
        match &self.kind {
            FormKind::Zero => Some(0.0),
            FormKind::HEps { tent, rho } => {
                let (s, c) = rho.sin_cos();
                Some(c * tent.eval(p.x).0 + s * tent.eval(p.y).0)
            }
            FormKind::Custom { potential, .. } => potential.as_ref().map(|h| h(p)),
            FormKind::Constant(_) | FormKind::Shear { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        match &self.kind {
            FormKind::Zero | FormKind::HEps { .. } => true,
            FormKind::Constant(c) => c.a1 == 0.0 && c.a2 == 0.0,
            FormKind::Shear { amplitude } => *amplitude == 0.0,
            FormKind::Custom { potential, .. } => potential.is_some(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match &self.kind {
            FormKind::Zero | FormKind::Constant(_) | FormKind::HEps { .. } => true,
            FormKind::Shear { amplitude } => *amplitude == 0.0,
            FormKind::Custom { closed, .. } => *closed,
        }
    }

    /// Jacobian `J[i][j] = ∂_j β_i`.
    pub fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        match &self.kind {
            FormKind::Zero | FormKind::Constant(_) => [[0.0; 2]; 2],
            FormKind::HEps { tent, rho } => {
                let (s, c) = rho.sin_cos();
                [
                    [c * tent.second_derivative(p.x), 0.0],
                    [0.0, s * tent.second_derivative(p.y)],
                ]
            }
            FormKind::Shear { amplitude } => {
                [[0.0, 2.0 * PI * amplitude * (2.0 * PI * p.y).cos()], [0.0, 0.0]]
            }
            FormKind::Custom { beta, .. } => {
                let h = CURL_STEP;
                let bxp = beta(Point::new(p.x + h, p.y));
                let bxm = beta(Point::new(p.x - h, p.y));
                let byp = beta(Point::new(p.x, p.y + h));
                let bym = beta(Point::new(p.x, p.y - h));
                [
                    [(bxp.a1 - bxm.a1) / (2.0 * h), (byp.a1 - bym.a1) / (2.0 * h)],
                    [(bxp.a2 - bxm.a2) / (2.0 * h), (byp.a2 - bym.a2) / (2.0 * h)],
                ]
            }
        }
    }

    /// `dβ = curl · dx∧dy`, with `curl = ∂_x β_2 − ∂_y β_1`.
    pub fn curl(&self, p: Point) -> f64 {
        match &self.kind {
            FormKind::Zero | FormKind::Constant(_) | FormKind::HEps { .. } => 0.0,
            _ => {
                let j = self.jacobian(p);
                j[1][0] - j[0][1]
            }
        }
    }
}

/// `F(x, v) = F̄(x, v) + t β_x(v)`.
#[derive(Clone, Debug)]
pub struct RandersMetric {
    base: BaseMetric,
    form: OneFormField,
    t: f64,
}

impl RandersMetric {
    pub fn new(base: BaseMetric, form: OneFormField, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("{t} must be finite and non-negative"),
            });
        }
        check_admissible(t, form.b_max())?;
        Ok(Self { base, form, t })
    }

    /// Flat torus with the given form.
    pub fn flat(form: OneFormField, t: f64) -> Result<Self> {
        Self::new(BaseMetric::FlatTorus, form, t)
    }

    pub fn base(&self) -> BaseMetric {
        self.base
    }

    pub fn form(&self) -> &OneFormField {
        &self.form
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `tβ_x`.
    pub fn scaled_form(&self, p: Point) -> Covector {
        self.form.eval(p).scale(self.t)
    }

    pub fn eval_f(&self, p: Point, v: Vector) -> f64 {
        self.base.norm(p, v) + self.scaled_form(p).apply(v)
    }

    /// `F*(x, ℓ) = sup { ℓ(v) : F(x, v) = 1 }`, in closed form.
    pub fn dual_norm(&self, p: Point, l: Covector) -> f64 {
        let beta = self.scaled_form(p);
        let b2 = self.base.dual_inner(p, beta, beta);
        let l2 = self.base.dual_inner(p, l, l);
        let bl = self.base.dual_inner(p, beta, l);
        let one_minus = 1.0 - b2;
        ((one_minus * l2 + bl * bl).max(0.0).sqrt() - bl) / one_minus
    }

    pub fn is_reversible(&self) -> bool {
        self.t == 0.0 || matches!(self.form.kind, FormKind::Zero)
    }
}

/// Screens `t·b_max` against the admissibility margin.
pub fn check_admissible(t: f64, b_max: f64) -> Result<()> {
    let product = t * b_max;
    let limit = 1.0 - ADMISSIBILITY_MARGIN;
    if product >= limit || !product.is_finite() {
        return Err(Error::Inadmissible { product, limit });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat(form: OneFormField, t: f64) -> RandersMetric {
        RandersMetric::flat(form, t).unwrap()
    }

    #[test]
    fn euclidean_norm_without_form() {
        let m = flat(OneFormField::zero(), 0.0);
        assert_abs_diff_eq!(m.eval_f(Point::default(), Vector::new(3.0, 4.0)), 5.0);
    }

    #[test]
    fn non_reversible_constant_form() {
        let m = flat(OneFormField::constant(Covector::new(0.5, 0.0)), 1.0);
        let o = Point::default();
        assert_abs_diff_eq!(m.eval_f(o, Vector::new(1.0, 0.0)), 1.5);
        assert_abs_diff_eq!(m.eval_f(o, Vector::new(-1.0, 0.0)), 0.5);
        assert_eq!(m.eval_f(o, Vector::default()), 0.0);
    }

    #[test]
    fn dual_norm_constant_form() {
        let m = flat(OneFormField::constant(Covector::new(0.5, 0.0)), 1.0);
        let o = Point::default();
        assert_abs_diff_eq!(m.dual_norm(o, Covector::new(1.0, 0.0)), 1.0 / 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.dual_norm(o, Covector::new(-1.0, 0.0)), 2.0, epsilon = 1e-12);
        let r = flat(OneFormField::zero(), 0.0);
        let l = Covector::new(0.6, -0.8);
        assert_abs_diff_eq!(r.dual_norm(o, l), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn admissibility_is_checked_at_construction() {
        let form = OneFormField::h_eps(0.05, 1.0).unwrap();
        assert!(RandersMetric::flat(form.clone(), 0.999).is_ok());
        let err = RandersMetric::flat(form.clone(), 1.0).unwrap_err();
        assert!(matches!(err, Error::Inadmissible { .. }));
        assert!(RandersMetric::flat(form, 1.0 - 1e-10).is_err());
        assert!(RandersMetric::flat(OneFormField::zero(), -0.1).is_err());
    }

    #[test]
    fn tent_examples() {
        let tent = SmoothedTent::new(0.05).unwrap();
        let (v, d) = tent.eval(0.25);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        assert_eq!(d, 1.0);
        assert_abs_diff_eq!(tent.eval(0.5).1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tent.eval(0.0).0, 0.05 * (1.0 - 2.0 / PI), epsilon = 1e-15);
        assert_abs_diff_eq!(tent.eval(0.0).0, 0.018169, epsilon = 1e-6);
        assert_abs_diff_eq!(tent.eval(0.75).1, -1.0);
        assert!(SmoothedTent::new(0.0).is_err());
        assert!(SmoothedTent::new(0.25).is_err());
    }

    #[test]
    fn tent_is_continuous_and_periodic() {
        let tent = SmoothedTent::new(0.07).unwrap();
        let h = 1e-7;
        for k in 0..4000 {
            let u = k as f64 / 4000.0;
            let (a, da) = tent.eval(u - h);
            let (b, db) = tent.eval(u + h);
            assert!((a - b).abs() < 3.0 * h, "value jump at {u}");
            assert!((da - db).abs() < 1e-4, "derivative jump at {u}");
            assert!(da.abs() <= 1.0);
        }
        assert_abs_diff_eq!(tent.eval(1.3).0, tent.eval(0.3).0, epsilon = 1e-15);
        assert_abs_diff_eq!(tent.eval(-0.2).0, tent.eval(0.8).0, epsilon = 1e-15);
    }

    #[test]
    fn tent_derivative_matches_finite_difference() {
        let tent = SmoothedTent::new(0.05).unwrap();
        let h = 1e-6;
        for k in 0..997 {
            let u = k as f64 / 997.0;
            let fd = (tent.eval(u + h).0 - tent.eval(u - h).0) / (2.0 * h);
            assert!((fd - tent.eval(u).1).abs() < 1e-6, "u = {u}");
            let fd2 = (tent.eval(u + h).1 - tent.eval(u - h).1) / (2.0 * h);
            assert!((fd2 - tent.second_derivative(u)).abs() < 1e-3, "u = {u}");
        }
    }

    #[test]
    fn tent_converges_to_f0() {
        for eps in [0.1, 0.05, 0.01] {
            let tent = SmoothedTent::new(eps).unwrap();
            let sup = (0..=20000)
                .map(|k| k as f64 / 20000.0)
                .map(|u| (tent.eval(u).0 - super::tent(u)).abs())
                .fold(0.0, f64::max);
            assert!(sup <= (1.0 - 2.0 / PI) * eps + 1e-15, "eps {eps}: {sup}");
        }
    }

    #[test]
    fn h_eps_examples() {
        let form = OneFormField::h_eps(0.05, 1.0).unwrap();
        let b = form.eval(Point::new(0.25, 0.25));
        assert_abs_diff_eq!(b.a1, 1f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.a2, 1f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.norm(), 1.0, epsilon = 1e-15);
        let z = form.eval(Point::new(0.0, 0.0));
        assert_abs_diff_eq!(z.norm(), 0.0, epsilon = 1e-15);
        let e = form.eval(Point::new(0.25, 0.5));
        assert_abs_diff_eq!(e.a1, 0.540302, epsilon = 1e-6);
        assert_abs_diff_eq!(e.a2, 0.0, epsilon = 1e-15);
        assert!(form.is_exact() && form.is_closed());
        assert_eq!(form.b_max(), 1.0);
    }

    #[test]
    fn h_eps_unit_norm_on_complement_of_annuli() {
        let eps = 0.05;
        let form = OneFormField::h_eps(eps, 1.0).unwrap();
        let in_annulus = |u: f64| {
            let u = u.rem_euclid(1.0);
            u < eps || u > 1.0 - eps || (u - 0.5).abs() < eps
        };
        for i in 0..200 {
            for j in 0..200 {
                let p = Point::new(i as f64 / 200.0, j as f64 / 200.0);
                let n = form.eval(p).norm();
                assert!(n <= 1.0 + 1e-15);
                if !in_annulus(p.x) && !in_annulus(p.y) {
                    assert_abs_diff_eq!(n, 1.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn h_eps_is_gradient_of_potential() {
        let form = OneFormField::h_eps(0.05, 1.0).unwrap();
        let h = 1e-6;
        for k in 0..500 {
            let p = Point::new((k as f64 * 0.618034).fract(), (k as f64 * 0.414214).fract());
            let pot = |q: Point| form.potential(q).unwrap();
            let gx = (pot(Point::new(p.x + h, p.y)) - pot(Point::new(p.x - h, p.y))) / (2.0 * h);
            let gy = (pot(Point::new(p.x, p.y + h)) - pot(Point::new(p.x, p.y - h))) / (2.0 * h);
            let b = form.eval(p);
            assert!((gx - b.a1).abs() < 1e-7 && (gy - b.a2).abs() < 1e-7);
        }
    }

    #[test]
    fn closed_irrational_examples() {
        let f0 = OneFormField::closed_irrational(0.0);
        assert_eq!(f0.eval(Point::default()), Covector::new(1.0, 0.0));
        let f1 = OneFormField::closed_irrational(FRAC_PI_2);
        assert_abs_diff_eq!(f1.eval(Point::default()).a1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f1.eval(Point::default()).a2, 1.0, epsilon = 1e-15);
        let f = OneFormField::closed_irrational(1.0);
        let c = f.eval(Point::new(0.3, 0.7));
        assert_abs_diff_eq!(c.a1, 0.540302, epsilon = 1e-6);
        assert_abs_diff_eq!(c.a2, 0.841471, epsilon = 1e-6);
        assert_eq!(f.b_max(), 1.0);
        assert!(f.is_closed() && !f.is_exact());
    }

    #[test]
    fn custom_curl_by_finite_differences() {
        let form = OneFormField::custom(|p: Point| Covector::new(-p.y, p.x), 0.5, false);
        assert_abs_diff_eq!(form.curl(Point::new(0.1, 0.2)), 2.0, epsilon = 1e-8);
        let shear = OneFormField::shear(0.3);
        let p = Point::new(0.0, 0.1);
        let expect = -0.3 * 2.0 * PI * (2.0 * PI * 0.1).cos();
        assert_abs_diff_eq!(shear.curl(p), expect, epsilon = 1e-12);
    }

    #[test]
    fn hyperbolic_base_norms() {
        let p = Point::new(0.5, 0.0);
        let lambda = 2.0 / 0.75;
        assert_abs_diff_eq!(BaseMetric::HyperbolicDisk.conformal_factor(p), lambda);
        let l = Covector::new(lambda * 0.5, 0.0);
        assert_abs_diff_eq!(BaseMetric::HyperbolicDisk.dual_norm(p, l), 0.5, epsilon = 1e-15);
    }
}
