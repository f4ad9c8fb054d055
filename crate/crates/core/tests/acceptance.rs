//! End-to-end acceptance criteria. Runs as a plain binary so that every
//! criterion prints exactly one PASS/FAIL line; the process fails if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use randers_core::assembly::{assemble, PeriodicGrid};
use randers_core::curved::{
    ball_growth_entropy, quartic_angle_integral, radial_test_rayleigh, symbol_lower_bound_check, tail_radius, Ball,
    HyperbolicSample, RadialBump,
};
use randers_core::eigensolve::{smallest_eigenpairs, SpectrumResult};
use randers_core::geodesics::{
    class_length, integrate_geodesic, shorten_curve, ClosedCurve, GeodesicState, HomotopyClass, ShorteningOptions,
};
use randers_core::symbol::fiber_average_of_form;
use randers_core::{
    build_symbol_field, holmes_thompson_density, symbol_at, AngleQuadrature, Covector, OneFormField, Point,
    RandersMetric, Vector,
};

const FLAT_LAMBDA: f64 = 4.0 * PI * PI;
const TOL: f64 = 1e-8;

struct Lcg(u64);

impl Lcg {
    fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spectrum(m: &RandersMetric, n: usize, k: usize) -> SpectrumResult {
    let grid = PeriodicGrid::new(n).unwrap();
    let field = build_symbol_field(m, &grid, &AngleQuadrature::default()).unwrap();
    let pair = assemble(&field, &grid).unwrap();
    smallest_eigenpairs(&pair, k, TOL).unwrap()
}

fn flat_baseline() -> Outcome {
    let start = Instant::now();
    let res = spectrum(&RandersMetric::flat(OneFormField::zero(), 0.0).unwrap(), 64, 5);
    let elapsed = start.elapsed();
    let cluster = &res.eigenvalues[1..5];
    let lo = cluster.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cluster.iter().copied().fold(0.0, f64::max);
    let err = (res.eigenvalues[1] - FLAT_LAMBDA).abs() / FLAT_LAMBDA;
    let spread = (hi - lo) / lo;
    check(
        err < 0.01 && spread < 0.01 && res.eigenvalues[5] > hi * 1.5 && elapsed < Duration::from_secs(10),
        format!("λ1 = {:.6} (rel. err {err:.2e}), fourfold spread {spread:.1e}, {elapsed:.2?}", res.eigenvalues[1]),
    )
}

fn constant_form() -> Outcome {
    let a: f64 = 0.5;
    let root = (1.0 - a * a).sqrt();
    let s_yy = 2.0 / root - 2.0 / (a * a) * (1.0 / root - 1.0);
    let m = RandersMetric::flat(OneFormField::constant(Covector::new(a, 0.0)), 1.0).unwrap();
    let res = spectrum(&m, 64, 2);
    let expect = FLAT_LAMBDA * s_yy;
    let err = (res.eigenvalues[1] - expect).abs() / expect;
    check(
        err < 0.01,
        format!("λ1 = {:.6}, 4π²σ_yy = {expect:.6} (σ_yy = {s_yy:.6}), rel. err {err:.2e}", res.eigenvalues[1]),
    )
}

fn strict_increase() -> Outcome {
    let start = Instant::now();
    let ts = [0.0, 0.3, 0.6, 0.9];
    let spectra: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| spectrum(&RandersMetric::flat(OneFormField::h_eps(0.05, 1.0).unwrap(), t).unwrap(), 64, 5).eigenvalues)
        .collect();
    let elapsed = start.elapsed();
    let mut monotone = true;
    let mut min_gain = f64::INFINITY;
    for w in spectra.windows(2) {
        monotone &= w[1][1..=5].iter().zip(&w[0][1..=5]).all(|(hi, lo)| hi >= lo);
    }
    for s in &spectra[1..] {
        for i in 1..=5 {
            min_gain = min_gain.min((s[i] - spectra[0][i]) / (10.0 * TOL * spectra[0][i]));
        }
    }
    let lam1: Vec<String> = spectra.iter().map(|s| format!("{:.4}", s[1])).collect();
    check(
        monotone && min_gain > 1.0 && elapsed < Duration::from_secs(120),
        format!(
            "λ1 over t = {ts:?}: [{}]; smallest gain over t = 0 is {min_gain:.2e} × (10·tol·λ); {elapsed:.2?}",
            lam1.join(", ")
        ),
    )
}

fn blow_up_trend() -> Outcome {
    let points = [(0.9, 0.05), (0.99, 0.02), (0.999, 0.01)];
    let n = 256;
    let lam1: Vec<f64> = points
        .iter()
        .map(|&(t, eps)| spectrum(&RandersMetric::flat(OneFormField::h_eps(eps, 1.0).unwrap(), t).unwrap(), n, 1).eigenvalues[1])
        .collect();
    let increasing = lam1.windows(2).all(|w| w[1] > w[0]);
    let last = *lam1.last().unwrap();
    let rows: Vec<String> = points
        .iter()
        .zip(&lam1)
        .map(|(&(t, e), l)| format!("(t={t}, ε={e}) λ1={l:.4}"))
        .collect();
    check(
        increasing && last > 3.0 * FLAT_LAMBDA,
        format!(
            "N={n}: {}; increasing: {increasing}; final/flat = {:.3} (needs > 3)",
            rows.join("; "),
            last / FLAT_LAMBDA
        ),
    )
}

fn volume_invariance() -> Outcome {
    let mut rng = Lcg(5);
    let grid = PeriodicGrid::new(64).unwrap();
    let q = AngleQuadrature::default();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let t = rng.range(0.0, 0.999);
        let eps = rng.range(0.01, 0.2);
        let m = RandersMetric::flat(OneFormField::h_eps(eps, 1.0).unwrap(), t).unwrap();
        for idx in 0..grid.len() {
            worst = worst.max((holmes_thompson_density(&m, grid.point_of(idx), &q) - 1.0).abs());
        }
    }
    check(worst < 1e-6, format!("max |density − 1| = {worst:.2e} over 5 × 64² nodes"))
}

fn marked_lengths() -> Outcome {
    let m = RandersMetric::flat(OneFormField::h_eps(0.05, 1.0).unwrap(), 0.9).unwrap();
    let mut worst: f64 = 0.0;
    for p in -3i64..=3 {
        for q in -3i64..=3 {
            if (p, q) == (0, 0) {
                continue;
            }
            let c = HomotopyClass::new(p, q).unwrap();
            worst = worst.max((class_length(&m, c).unwrap() - c.flat_length()).abs());
        }
    }
    let mut rng = Lcg(6);
    let mut shortest_gap = f64::INFINITY;
    for (p, q) in [(1, 0), (1, 1), (2, 1)] {
        let class = HomotopyClass::new(p, q).unwrap();
        for _ in 0..20 {
            let modes: Vec<(f64, f64)> = (0..3).map(|_| (rng.range(-0.08, 0.08), rng.range(-0.03, 0.03))).collect();
            let start = Point::new(rng.uniform(), rng.uniform());
            let curve = ClosedCurve::perturbed(start, class, 400, &modes);
            let res = shorten_curve(&m, &curve, &ShorteningOptions::default()).unwrap();
            shortest_gap = shortest_gap.min(res.final_length - class.flat_length());
        }
    }
    check(
        worst < 1e-6 && shortest_gap >= -1e-6,
        format!("max class-length deviation {worst:.2e}; shortening (60 starts) ends {shortest_gap:.2e} above √(p²+q²) at best"),
    )
}

fn time_change() -> Outcome {
    let mut rng = Lcg(7);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let form = if i % 2 == 0 {
            OneFormField::h_eps(rng.range(0.02, 0.2), rng.range(0.5, 2.5)).unwrap()
        } else {
            OneFormField::closed_irrational(rng.range(0.5, 2.5))
        };
        let m = RandersMetric::flat(form, rng.range(0.0, 0.95)).unwrap();
        let s0 = GeodesicState::new(rng.uniform(), rng.uniform(), rng.range(0.0, 2.0 * PI));
        let tr = integrate_geodesic(&m, s0, 5.0, 1e-2).unwrap();
        worst = worst.max(tr.line_fit_residual());
    }
    check(worst < 1e-6, format!("max line-fit residual {worst:.2e} over 20 geodesics, T = 5"))
}

fn pointwise_bound() -> Outcome {
    let q = AngleQuadrature::default();
    let mut worst = f64::INFINITY;
    for a in 0..50 {
        let dh = 0.98 * a as f64 / 49.0;
        for b in 0..50 {
            let psi = PI * b as f64 / 49.0;
            for c in 0..19 {
                let df = 0.1 + 0.5 * c as f64;
                let s = HyperbolicSample::new(dh, df, psi).unwrap();
                worst = worst.min(symbol_lower_bound_check(&s, &q).margin);
            }
        }
    }
    let quartic_err = (quartic_angle_integral(&q) - PI / 4.0).abs();
    check(
        worst >= -1e-10 && quartic_err < 1e-14,
        format!("min margin {worst:.3e} over 50×50×19 samples; |quartic − π/4| = {quartic_err:.1e}"),
    )
}

fn weak_inequality() -> Outcome {
    let bump = RadialBump::new(0.5, 1.0, 3.0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for s in [0.51, 0.6, 0.8, 1.0] {
        for profile in [None, Some(&bump)] {
            let v = radial_test_rayleigh(s, 2, tail_radius(s), profile).unwrap();
            worst = worst.max(v - 2.0 * s * s);
            values.push(format!("{v:.4}"));
        }
    }
    check(
        worst <= 1e-6,
        format!("quotients (plain, bumped) = [{}]; max excess over 2s² = {worst:.3e}", values.join(", ")),
    )
}

fn entropy() -> Outcome {
    let radii: Vec<f64> = (5..=15).map(f64::from).collect();
    let h = |r: f64, phi: f64| phi.cos() * (0.9 * r).tanh();
    let plain = ball_growth_entropy(2, &radii, None::<fn(f64, f64) -> f64>, Ball::Forward).unwrap();
    let fwd = ball_growth_entropy(2, &radii, Some(h), Ball::Forward).unwrap();
    let bwd = ball_growth_entropy(2, &radii, Some(h), Ball::Backward).unwrap();
    let ok = [plain.slope, fwd.slope, bwd.slope].iter().all(|s| (s - 1.0).abs() < 0.05)
        && (fwd.slope - bwd.slope).abs() < 0.01;
    check(
        ok,
        format!(
            "slopes: unperturbed {:.5}, forward {:.5}, backward {:.5}; |fwd − bwd| = {:.2e}",
            plain.slope,
            fwd.slope,
            bwd.slope,
            (fwd.slope - bwd.slope).abs()
        ),
    )
}

/// Compact deterministic versions of the property suites, at N = 32.
fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = Lcg(11);
    let q = AngleQuadrature::default();
    let mut failures = Vec::new();
    let random_metric = |rng: &mut Lcg| {
        let t = rng.range(0.0, 0.95);
        let form = match (rng.uniform() * 3.0) as usize {
            0 => OneFormField::h_eps(rng.range(0.02, 0.2), rng.range(0.1, 3.0)).unwrap(),
            1 => OneFormField::closed_irrational(rng.range(0.1, 3.0)),
            _ => OneFormField::shear(rng.range(0.0, 0.9)),
        };
        RandersMetric::flat(form, t).unwrap()
    };
    for _ in 0..200 {
        let m = random_metric(&mut rng);
        let p = Point::new(rng.uniform(), rng.uniform());
        let v = Vector::from_angle(rng.range(0.0, 2.0 * PI)).scale(rng.range(0.1, 5.0));
        let s = rng.range(0.1, 10.0);
        if (m.eval_f(p, v.scale(s)) - s * m.eval_f(p, v)).abs() > 1e-12 * s * m.eval_f(p, v) {
            failures.push("homogeneity");
        }
        let l = Covector::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
        let sampled = (0..20_000)
            .map(|j| {
                let u = Vector::from_angle(2.0 * PI * j as f64 / 20_000.0);
                l.apply(u) / m.eval_f(p, u)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let exact = m.dual_norm(p, l);
        if sampled > exact + 1e-12 || exact - sampled > 1e-6 * exact {
            failures.push("dual norm");
        }
        if fiber_average_of_form(&m, p, &q).abs() > 1e-12 {
            failures.push("fiber average");
        }
        let t_lo = m.t() * rng.uniform();
        let lower = RandersMetric::flat(m.form().clone(), t_lo).unwrap();
        let diff = symbol_at(&m, p, &q).unwrap().sub(&symbol_at(&lower, p, &q).unwrap());
        if diff.eigenvalues().0 < -1e-12 {
            failures.push("symbol ordering");
        }
    }
    for _ in 0..4 {
        let m = random_metric(&mut rng);
        let res = spectrum(&m, 32, 5);
        if res.relative_residuals.iter().any(|&r| r > TOL) || res.eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            failures.push("residual contract");
        }
    }
    let elapsed = start.elapsed();
    failures.dedup();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!("failures: {failures:?}; {elapsed:.2?}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("flat baseline", flat_baseline),
        ("constant-form cross-check", constant_form),
        ("strict spectral increase", strict_increase),
        ("blow-up trend", blow_up_trend),
        ("volume invariance", volume_invariance),
        ("marked length spectrum", marked_lengths),
        ("time change for closed forms", time_change),
        ("pointwise symbol bound", pointwise_bound),
        ("weak inequality surrogate", weak_inequality),
        ("entropy estimate", entropy),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {status}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
