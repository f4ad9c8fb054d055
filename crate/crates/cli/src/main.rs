//! `randers`: experiment driver for the fiber-averaged Laplacian of Randers
//! metrics on the flat torus.
//!
//! Exit codes: 0 success, 2 configuration error, 3 every sweep row failed,
//! 1 any other failure.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randers_core::config::{parse_config, SweepConfig};
use randers_core::curved::{
    ball_growth_entropy, quartic_angle_integral, radial_test_rayleigh, symbol_lower_bound_check, tail_radius,
    write_bound_csv, Ball, HyperbolicSample, RadialBump,
};
use randers_core::sweep::{format_sig, run_lengths, run_sweep, torus_volume, write_sweep_csv};
use randers_core::{build_symbol_field, holmes_thompson_density, AngleQuadrature, Error, PeriodicGrid, RandersMetric};

#[derive(Parser)]
#[command(name = "randers", version, about = "Spectra, lengths and volumes of Randers metrics on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print λ₁..λ_k for every configured (t, ε) point.
    Spectrum { config: PathBuf },
    /// Run the sweep and write the CSV table (to `output`, or stdout).
    Sweep { config: PathBuf },
    /// Compare class lengths with the flat marked length spectrum.
    Lengths { config: PathBuf },
    /// Holmes-Thompson volume and the worst nodal density deviation.
    Volume { config: PathBuf },
    /// Write the symbol field `x,y,s11,s12,s22` of the first point.
    SymbolDump {
        config: PathBuf,
        /// Destination file; defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hyperbolic-plane checks: symbol lower bound, radial Rayleigh
    /// quotients and ball-growth entropy.
    CurvedCheck {
        /// Directory for `bound.csv` and `entropy.csv`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    AllRowsFailed,
    Other(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn load(path: &Path) -> Result<SweepConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Config(e.to_string()))
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn first_metric(cfg: &SweepConfig) -> Result<RandersMetric, Failure> {
    let (t, eps) = cfg.points[0];
    Ok(RandersMetric::flat(cfg.build_form(eps)?, t)?)
}

fn spectrum(cfg: &SweepConfig) -> Result<(), Failure> {
    let rows = run_sweep(cfg);
    let mut out = io::stdout().lock();
    for r in &rows {
        match &r.error {
            None => {
                let vals: Vec<String> = r.lambdas.iter().map(|&v| format_sig(v)).collect();
                writeln!(
                    out,
                    "t={} eps={}: {} (max residual {})",
                    format_sig(r.t),
                    format_sig(r.eps),
                    vals.join(" "),
                    format_sig(r.max_residual)
                )?;
            }
            Some(e) => writeln!(out, "t={} eps={}: error: {e}", format_sig(r.t), format_sig(r.eps))?,
        }
    }
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(Failure::AllRowsFailed);
    }
    Ok(())
}

fn sweep(cfg: &SweepConfig) -> Result<(), Failure> {
    let rows = run_sweep(cfg);
    let mut w = sink(cfg.output.as_deref())?;
    write_sweep_csv(&mut w, &rows, cfg.eigen_k)?;
    w.flush()?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("row t={} eps={} failed: {}", r.t, r.eps, r.error.as_deref().unwrap_or(""));
    }
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(Failure::AllRowsFailed);
    }
    Ok(())
}

fn lengths(cfg: &SweepConfig) -> Result<(), Failure> {
    let reports = match run_lengths(cfg) {
        Ok(r) => r,
        Err(e @ Error::NotExact(_)) => return Err(Failure::Config(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let mut w = sink(cfg.output.as_deref())?;
    for rep in &reports {
        writeln!(w, "# t = {}, eps = {}", format_sig(rep.t), format_sig(rep.eps))?;
        rep.write_csv(&mut w)?;
        writeln!(w, "# max deviation = {}", format_sig(rep.max_deviation()))?;
    }
    w.flush()?;
    Ok(())
}

fn volume(cfg: &SweepConfig) -> Result<(), Failure> {
    let grid = PeriodicGrid::new(cfg.grid_n)?;
    let q = AngleQuadrature::new(cfg.quad_q)?;
    let mut out = io::stdout().lock();
    writeln!(out, "t,eps,volume,max_density_deviation")?;
    for &(t, eps) in &cfg.points {
        let m = RandersMetric::flat(cfg.build_form(eps)?, t)?;
        let worst = (0..grid.len())
            .map(|i| (holmes_thompson_density(&m, grid.point_of(i), &q) - 1.0).abs())
            .fold(0.0, f64::max);
        writeln!(
            out,
            "{},{},{},{}",
            format_sig(t),
            format_sig(eps),
            format_sig(torus_volume(&m, &grid, &q)),
            format_sig(worst)
        )?;
    }
    Ok(())
}

fn symbol_dump(cfg: &SweepConfig, out: Option<&Path>) -> Result<(), Failure> {
    let m = first_metric(cfg)?;
    let grid = PeriodicGrid::new(cfg.grid_n)?;
    let field = build_symbol_field(&m, &grid, &AngleQuadrature::new(cfg.quad_q)?)?;
    let mut w = sink(out)?;
    field.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn curved_check(out_dir: Option<&Path>) -> Result<(), Failure> {
    let q = AngleQuadrature::default();
    let mut out = io::stdout().lock();

    // ψ sweep of the pointwise bound at ‖dh‖ = 0.6
    let rows: Vec<(f64, _)> = (0..=180)
        .map(|k| {
            let psi = PI * k as f64 / 180.0;
            Ok((psi, symbol_lower_bound_check(&HyperbolicSample::new(0.6, 1.0, psi)?, &q)))
        })
        .collect::<Result<_, Error>>()?;
    let min_margin = rows.iter().map(|r| r.1.margin).fold(f64::INFINITY, f64::min);
    writeln!(out, "symbol bound: min margin over ψ at ‖dh‖ = 0.6: {}", format_sig(min_margin))?;
    writeln!(out, "quartic angle integral: {} (π/4 = {})", format_sig(quartic_angle_integral(&q)), format_sig(PI / 4.0))?;

    let bump = RadialBump::new(0.5, 1.0, 3.0)?;
    for s in [0.51, 0.6, 0.8, 1.0] {
        let plain = radial_test_rayleigh(s, 2, tail_radius(s), None)?;
        let bumped = radial_test_rayleigh(s, 2, tail_radius(s), Some(&bump))?;
        writeln!(
            out,
            "radial Rayleigh s = {s}: {} (plain), {} (perturbed), bound 2s² = {}",
            format_sig(plain),
            format_sig(bumped),
            format_sig(2.0 * s * s)
        )?;
    }

    let radii: Vec<f64> = (5..=15).map(f64::from).collect();
    let h = |r: f64, phi: f64| phi.cos() * (0.9 * r).tanh();
    let fwd = ball_growth_entropy(2, &radii, Some(h), Ball::Forward)?;
    let bwd = ball_growth_entropy(2, &radii, Some(h), Ball::Backward)?;
    writeln!(out, "entropy slopes: forward {}, backward {}", format_sig(fwd.slope), format_sig(bwd.slope))?;

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("bound.csv"))?);
        write_bound_csv(&mut w, &rows)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("entropy.csv"))?);
        fwd.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { config } => spectrum(&load(&config)?),
        Command::Sweep { config } => sweep(&load(&config)?),
        Command::Lengths { config } => lengths(&load(&config)?),
        Command::Volume { config } => volume(&load(&config)?),
        Command::SymbolDump { config, out } => symbol_dump(&load(&config)?, out.as_deref()),
        Command::CurvedCheck { out_dir } => curved_check(out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::AllRowsFailed) => {
            eprintln!("every row of the sweep failed");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
