use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("randers-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn randers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randers")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn sweep_writes_a_deterministic_monotone_table() {
    let dir = scratch("sweep");
    let csv = dir.join("out.csv");
    let cfg = write_config(
        &dir,
        &format!(
            "# monotone sweep\ngrid_n = 32\neigen_k = 1\nform = h_eps\neps = 0.05\nt_list = 0, 0.3, 0.6, 0.9\noutput = {}\n",
            csv.display()
        ),
    );
    let out = randers(&["sweep", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = fs::read_to_string(&csv).unwrap();
    assert!(randers(&["sweep", &cfg]).status.success());
    let second = fs::read_to_string(&csv).unwrap();

    let strip_wall = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(7);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip_wall(&first), strip_wall(&second));

    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,eps,grid_n,quad_q,lambda1,volume,max_residual,wall_ms,error"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let lambda: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(lambda.windows(2).all(|w| w[1] > w[0]), "{lambda:?}");
    assert!((lambda[0] - 4.0 * std::f64::consts::PI.powi(2)).abs() < 0.01 * lambda[0]);
    for r in &rows {
        assert!((r[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
        assert!(r[8].is_empty());
    }
    assert!(!first.contains('\r'));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, "form = h_eps\nt_list = 1.0\ntol = 1e-8\ntol = 1e-9\n");
    let out = randers(&["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("t·b_max"), "{err}");
    assert!(err.contains("lines 3, 4"), "{err}");
}

#[test]
fn all_rows_failing_exit_with_three() {
    let dir = scratch("fail");
    let cfg = write_config(&dir, "grid_n = 8\neigen_k = 64\nform = zero\n");
    let out = randers(&["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.lines().nth(1).unwrap().contains("invalid parameter"));
}

#[test]
fn lengths_report_and_refusal() {
    let dir = scratch("lengths");
    let cfg = write_config(&dir, "form = h_eps\neps = 0.05\nt_list = 0.9\n");
    let out = randers(&["lengths", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let max_dev: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max deviation = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(max_dev < 1e-6);

    let cfg = write_config(&dir, "form = closed_irrational\nt_list = 0.5\n");
    let out = randers(&["lengths", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact"));
}

#[test]
fn volume_symbol_dump_and_curved_check() {
    let dir = scratch("misc");
    let cfg = write_config(&dir, "grid_n = 16\nform = h_eps\nt_list = 0.9\n");
    let out = randers(&["volume", &cfg]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("t,eps,volume,max_density_deviation\n"));

    let dump = dir.join("symbols.csv");
    let out = randers(&["symbol-dump", &cfg, "--out", dump.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&dump).unwrap().lines().count(), 1 + 16 * 16);

    let out_dir = dir.join("curved");
    let out = randers(&["curved-check", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(out_dir.join("bound.csv")).unwrap().starts_with("param,lhs,rhs,margin\n"));
    assert!(fs::read_to_string(out_dir.join("entropy.csv")).unwrap().starts_with("R,log_volume\n"));
}
