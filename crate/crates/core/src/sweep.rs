//! Experiment driver: one eigen-solve per `(t, ε)` point, CSV emission and
//! the marked-length report.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble, PeriodicGrid};
use crate::config::SweepConfig;
use crate::eigensolve::smallest_eigenpairs;
use crate::error::{Error, Result};
use crate::geodesics::{class_length, HomotopyClass};
use crate::metric::RandersMetric;
use crate::quadrature::AngleQuadrature;
use crate::symbol::{build_symbol_field, holmes_thompson_density};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub eps: f64,
    pub grid_n: usize,
    pub quad_q: usize,
    /// `λ₁ … λ_k`; empty when the row failed.
    pub lambdas: Vec<f64>,
    pub volume: f64,
    pub max_residual: f64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

/// Holmes-Thompson volume of the torus: nodal trapezoid sum of the density.
pub fn torus_volume(m: &RandersMetric, grid: &PeriodicGrid, q: &AngleQuadrature) -> f64 {
    let h = grid.spacing();
    let total: f64 = (0..grid.len())
        .into_par_iter()
        .map(|idx| holmes_thompson_density(m, grid.point_of(idx), q))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    h * h * total
}

fn metric_for(cfg: &SweepConfig, t: f64, eps: f64) -> Result<RandersMetric> {
    RandersMetric::flat(cfg.build_form(eps)?, t)
}

/// Builds, assembles and solves a single `(t, ε)` point. Failures are
/// recorded in the row rather than returned.
pub fn run_point(cfg: &SweepConfig, t: f64, eps: f64) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        t,
        eps,
        grid_n: cfg.grid_n,
        quad_q: cfg.quad_q,
        lambdas: Vec::new(),
        volume: f64::NAN,
        max_residual: f64::NAN,
        wall_ms: 0.0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let m = metric_for(cfg, t, eps)?;
        let grid = PeriodicGrid::new(cfg.grid_n)?;
        let q = AngleQuadrature::new(cfg.quad_q)?;
        row.volume = torus_volume(&m, &grid, &q);
        let field = build_symbol_field(&m, &grid, &q)?;
        let pair = assemble(&field, &grid)?;
        let spec = smallest_eigenpairs(&pair, cfg.eigen_k, cfg.tol)?;
        row.lambdas = spec.eigenvalues[1..].to_vec();
        row.max_residual = spec.max_relative_residual();
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Runs every configured point; rows come back in input order.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<SweepRow> {
    cfg.points
        .par_iter()
        .map(|&(t, eps)| run_point(cfg, t, eps))
        .collect()
}

/// `x` with 12 significant digits: plain decimal for moderate exponents,
/// scientific otherwise; `NaN` prints as an empty field.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // round first so the exponent reflects the printed mantissa
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let (mant, e) = sci.split_at(sci.find('e').unwrap());
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}{e}")
    }
}

/// Writes the sweep table with `k` eigenvalue columns.
pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow], k: usize) -> io::Result<()> {
    let mut header = vec!["t".to_string(), "eps".into(), "grid_n".into(), "quad_q".into()];
    header.extend((1..=k).map(|i| format!("lambda{i}")));
    header.extend(["volume", "max_residual", "wall_ms", "error"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut fields = vec![
            format_sig(r.t),
            format_sig(r.eps),
            r.grid_n.to_string(),
            r.quad_q.to_string(),
        ];
        fields.extend((0..k).map(|i| r.lambdas.get(i).map_or(String::new(), |&v| format_sig(v))));
        fields.push(format_sig(r.volume));
        fields.push(format_sig(r.max_residual));
        fields.push(format_sig(r.wall_ms));
        fields.push(r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthEntry {
    pub class: HomotopyClass,
    pub length: f64,
    pub flat_length: f64,
}

impl LengthEntry {
    pub fn deviation(&self) -> f64 {
        (self.length - self.flat_length).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthReport {
    pub t: f64,
    pub eps: f64,
    pub entries: Vec<LengthEntry>,
}

impl LengthReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().map(LengthEntry::deviation).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "p,q,length,flat_length,deviation")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{}",
                e.class.p,
                e.class.q,
                format_sig(e.length),
                format_sig(e.flat_length),
                format_sig(e.deviation())
            )?;
        }
        Ok(())
    }
}

/// Class lengths over the window `|p|, |q| ≤ length_window` for every
/// configured point, compared with the flat lengths. Only exact forms are
/// accepted: for them the marked length spectrum is that of the flat torus.
pub fn run_lengths(cfg: &SweepConfig) -> Result<Vec<LengthReport>> {
    let w = cfg.length_window;
    let classes: Vec<HomotopyClass> = (-w..=w)
        .flat_map(|p| (-w..=w).map(move |q| (p, q)))
        .filter(|&(p, q)| (p, q) != (0, 0))
        .map(|(p, q)| HomotopyClass { p, q })
        .collect();
    cfg.points
        .iter()
        .map(|&(t, eps)| {
            let m = metric_for(cfg, t, eps)?;
            if !m.form().is_exact() && t != 0.0 {
                return Err(Error::NotExact(cfg.form.name().into()));
            }
            let entries = classes
                .par_iter()
                .map(|&class| {
                    Ok(LengthEntry {
                        class,
                        length: class_length(&m, class)?,
                        flat_length: class.flat_length(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LengthReport { t, eps, entries })
        })
        .collect()
}
