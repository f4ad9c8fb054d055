//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # h_eps sweep towards (t, ε) = (1, 0)
//! grid_n  = 64
//! quad_q  = 256
//! eigen_k = 5
//! tol     = 1e-8
//! form    = h_eps
//! rho     = 1.0
//! eps     = 0.05
//! t_list  = 0, 0.3, 0.6, 0.9
//! output  = sweep.csv
//! ```
//!
//! Lists are comma separated; `start:step:stop` expands to an inclusive
//! range. `eps` may be a single value or a list paired with `t_list`.
//! Parsing never stops at the first problem: every violation is reported
//! with its line number.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::metric::{check_admissible, Covector, OneFormField, ADMISSIBILITY_MARGIN};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormChoice {
    HEps,
    ClosedIrrational,
    Constant,
    Zero,
}

impl FormChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "h_eps" => Some(Self::HEps),
            "closed_irrational" => Some(Self::ClosedIrrational),
            "constant" => Some(Self::Constant),
            "zero" => Some(Self::Zero),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::HEps => "h_eps",
            Self::ClosedIrrational => "closed_irrational",
            Self::Constant => "constant",
            Self::Zero => "zero",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub grid_n: usize,
    pub quad_q: usize,
    pub eigen_k: usize,
    pub tol: f64,
    pub form: FormChoice,
    pub rho: f64,
    /// Coefficient of `dx` for the constant form.
    pub amplitude: f64,
    /// `(t, ε)` pairs in run order.
    pub points: Vec<(f64, f64)>,
    /// Half-width of the `(p, q)` window used by the length report.
    pub length_window: i64,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid_n: 64,
            quad_q: 256,
            eigen_k: 5,
            tol: 1e-8,
            form: FormChoice::HEps,
            rho: 1.0,
            amplitude: 0.5,
            points: vec![(0.0, 0.05)],
            length_window: 3,
            output: None,
        }
    }
}

impl SweepConfig {
    /// `sup |β|` of the configured form (independent of ε).
    pub fn b_max(&self) -> f64 {
        match self.form {
            FormChoice::HEps | FormChoice::ClosedIrrational => 1.0,
            FormChoice::Constant => self.amplitude.abs(),
            FormChoice::Zero => 0.0,
        }
    }

    pub fn build_form(&self, eps: f64) -> crate::Result<OneFormField> {
        Ok(match self.form {
            FormChoice::HEps => OneFormField::h_eps(eps, self.rho)?,
            FormChoice::ClosedIrrational => OneFormField::closed_irrational(self.rho),
            FormChoice::Constant => OneFormField::constant(Covector::new(self.amplitude, 0.0)),
            FormChoice::Zero => OneFormField::zero(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub lines: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.lines.iter().map(usize::to_string).collect();
        match lines.len() {
            0 => write!(f, "{}", self.message),
            1 => write!(f, "line {}: {}", lines[0], self.message),
            _ => write!(f, "lines {}: {}", lines.join(", "), self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KEYS: [&str; 11] = [
    "grid_n",
    "quad_q",
    "eigen_k",
    "tol",
    "form",
    "rho",
    "amplitude",
    "eps",
    "t_list",
    "length_window",
    "output",
];

struct Collector {
    violations: Vec<Violation>,
}

impl Collector {
    fn push(&mut self, lines: Vec<usize>, message: impl Into<String>) {
        self.violations.push(Violation {
            lines,
            message: message.into(),
        });
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str, value: &str, line: usize) -> Option<T> {
        match value.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.push(vec![line], format!("`{key}`: malformed number `{value}`"));
                None
            }
        }
    }

    fn list(&mut self, key: &str, value: &str, line: usize) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        for item in value.split(',').map(str::trim) {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            match parts.as_slice() {
                [single] => out.push(self.number::<f64>(key, single, line)?),
                [a, step, b] => {
                    let (a, step, b) = (
                        self.number::<f64>(key, a, line)?,
                        self.number::<f64>(key, step, line)?,
                        self.number::<f64>(key, b, line)?,
                    );
                    if !(step > 0.0) || b < a {
                        self.push(vec![line], format!("`{key}`: range `{item}` needs step > 0 and stop >= start"));
                        return None;
                    }
                    let count = ((b - a) / step + 1e-9).floor() as usize;
                    out.extend((0..=count).map(|i| a + i as f64 * step));
                }
                _ => {
                    self.push(vec![line], format!("`{key}`: malformed list item `{item}`"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Parses and validates a configuration, collecting every violation.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut c = Collector { violations: Vec::new() };
    let mut seen: HashMap<&str, (usize, &str)> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            c.push(vec![line], format!("expected `key = value`, found `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            c.push(vec![line], format!("unknown key `{key}`"));
            continue;
        }
        if let Some(&(first, _)) = seen.get(key) {
            c.push(vec![first, line], format!("duplicate key `{key}`"));
            continue;
        }
        seen.insert(key, (line, value));
    }

    let mut cfg = SweepConfig::default();
    let get = |k: &str| seen.get(k).copied();

    if let Some((line, v)) = get("grid_n") {
        if let Some(n) = c.number::<usize>("grid_n", v, line) {
            if n < 8 {
                c.push(vec![line], format!("`grid_n` = {n} must be at least 8"));
            }
            cfg.grid_n = n;
        }
    }
    if let Some((line, v)) = get("quad_q") {
        if let Some(q) = c.number::<usize>("quad_q", v, line) {
            if q < 4 || q % 2 != 0 {
                c.push(vec![line], format!("`quad_q` = {q} must be even and at least 4"));
            }
            cfg.quad_q = q;
        }
    }
    if let Some((line, v)) = get("eigen_k") {
        if let Some(k) = c.number::<usize>("eigen_k", v, line) {
            if k == 0 {
                c.push(vec![line], "`eigen_k` must be positive");
            }
            cfg.eigen_k = k;
        }
    }
    if let Some((line, v)) = get("tol") {
        if let Some(t) = c.number::<f64>("tol", v, line) {
            if !(t > 0.0) {
                c.push(vec![line], format!("`tol` = {t} must be positive"));
            }
            cfg.tol = t;
        }
    }
    if let Some((line, v)) = get("form") {
        match FormChoice::parse(v) {
            Some(f) => cfg.form = f,
            None => c.push(
                vec![line],
                format!("unknown form `{v}` (expected h_eps, closed_irrational, constant or zero)"),
            ),
        }
    }
    if let Some((line, v)) = get("rho") {
        if let Some(r) = c.number::<f64>("rho", v, line) {
            cfg.rho = r;
        }
    }
    if let Some((line, v)) = get("amplitude") {
        if let Some(a) = c.number::<f64>("amplitude", v, line) {
            cfg.amplitude = a;
        }
    }
    if let Some((line, v)) = get("length_window") {
        if let Some(w) = c.number::<i64>("length_window", v, line) {
            if w < 1 {
                c.push(vec![line], "`length_window` must be at least 1");
            }
            cfg.length_window = w;
        }
    }
    if let Some((_, v)) = get("output") {
        cfg.output = Some(PathBuf::from(v));
    }

    let t_entry = get("t_list");
    let eps_entry = get("eps");
    let ts = match t_entry {
        Some((line, v)) => c.list("t_list", v, line),
        None => Some(vec![0.0]),
    };
    let epss = match eps_entry {
        Some((line, v)) => c.list("eps", v, line),
        None => Some(vec![0.05]),
    };
    if let (Some(ts), Some(epss)) = (ts, epss) {
        let lines: Vec<usize> = [t_entry, eps_entry].iter().flatten().map(|e| e.0).collect();
        let points: Option<Vec<(f64, f64)>> = match (ts.len(), epss.len()) {
            (_, 1) => Some(ts.iter().map(|&t| (t, epss[0])).collect()),
            (1, _) => Some(epss.iter().map(|&e| (ts[0], e)).collect()),
            (a, b) if a == b => Some(ts.iter().copied().zip(epss.iter().copied()).collect()),
            (a, b) => {
                c.push(lines.clone(), format!("`t_list` has {a} entries but `eps` has {b}"));
                None
            }
        };
        if let Some(points) = points {
            let t_line: Vec<usize> = t_entry.map(|e| e.0).into_iter().collect();
            let eps_line: Vec<usize> = eps_entry.map(|e| e.0).into_iter().collect();
            let b_max = cfg.b_max();
            for &(t, eps) in &points {
                if !(t >= 0.0) {
                    c.push(t_line.clone(), format!("t = {t} must be non-negative"));
                } else if check_admissible(t, b_max).is_err() {
                    c.push(
                        t_line.clone(),
                        format!(
                            "inadmissible (t, eps) = ({t}, {eps}): t·b_max = {} must be below 1 - {ADMISSIBILITY_MARGIN:e}",
                            t * b_max
                        ),
                    );
                }
                if cfg.form == FormChoice::HEps && !(eps > 0.0 && eps < 0.25) {
                    c.push(eps_line.clone(), format!("eps = {eps} must lie in (0, 1/4) for h_eps"));
                }
            }
            cfg.points = points;
        }
    }

    if c.violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError {
            violations: c.violations,
        })
    }
}
