//! Black-box tests of the `hblab` binary.

use std::path::Path;
use std::process::{Command, Output};

const QUAD: &str = "\
[objective]
kind = quadratic
eigenvalues = 1, 9
[method]
name = hb_discrete
[init]
x0 = 1, 1
";

fn hblab(args: &[&str], cfg: Option<(&Path, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hblab"));
    cmd.env_remove("HBLAB_OUT").args(args);
    if let Some((dir, text)) = cfg {
        let path = dir.join("test.cfg");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rates_table_for_one_and_nine() {
    let o = hblab(&["rates", "--mu", "1", "--l", "9", "--format", "csv"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    let get = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(get("m_cont"), 1.0);
    assert_eq!(get("m_disc"), 0.5);
    assert_eq!(get("gd_rate"), 0.8);
    assert_eq!(get("gamma_star"), 0.25);
    // 17 significant digits
    assert!(text.contains("8.0000000000000004e-1"));
}

#[test]
fn rates_broadcasts_a_single_value() {
    let o = hblab(
        &["rates", "--mu", "1,4", "--l", "16", "--format", "csv"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = hblab(&["rates", "--mu", "1,4", "--l", "9,16,25"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hblab(&["run"], Some((d, QUAD))).status.code(), Some(0));

    let divergent = QUAD.replace("hb_discrete", "hb_discrete\ngamma = 0.4\nbeta = 0.25");
    assert_eq!(
        hblab(&["run"], Some((d, &divergent))).status.code(),
        Some(2)
    );

    let strict = format!("{QUAD}[estimator]\neps = 1e-9\n");
    assert_eq!(hblab(&["run"], Some((d, &strict))).status.code(), Some(1));

    let bad = QUAD.replace("hb_discrete", "hb_discrete\ngamma = 0.1\nbeta = 1.2");
    let o = hblab(&["run"], Some((d, &bad)));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 7"));

    assert_eq!(hblab(&["run"], None).status.code(), Some(3));
    assert_eq!(hblab(&["ode"], Some((d, QUAD))).status.code(), Some(3));
}

#[test]
fn run_writes_summary_and_trajectory_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let cfg = format!("{QUAD}[output]\nprefix = quad\n");
    let o = hblab(
        &["run", "--out", out.to_str().unwrap()],
        Some((dir.path(), &cfg)),
    );
    assert_eq!(o.status.code(), Some(0));
    let summary = std::fs::read_to_string(out.join("quad_summary.csv")).unwrap();
    assert!(summary.starts_with("objective,method,gamma,beta,alpha,mu,L"));
    assert!(summary.lines().nth(1).unwrap().ends_with(",pass"));
    let traj = std::fs::read_to_string(out.join("quad_trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("n,f_gap,grad_norm,dist_to_final"));
    assert!(out.join("quad_summary.txt").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env_out");
    let cfg_path = dir.path().join("c.cfg");
    std::fs::write(&cfg_path, QUAD).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hblab"))
        .env("HBLAB_OUT", &out)
        .args(["run", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("run_summary.csv").exists());
}

#[test]
fn sweep_flags_unstable_points_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{QUAD}[sweep]\ngamma = 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45\nbeta = 0.25\nallow_unstable = true\n");
    let a = hblab(
        &["sweep", "--format", "csv", "--parallelism", "1"],
        Some((dir.path(), &cfg)),
    );
    let b = hblab(
        &["sweep", "--format", "csv", "--parallelism", "8"],
        Some((dir.path(), &cfg)),
    );
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let gamma: f64 = r[2].parse().unwrap();
        let flagged = r[21] == "true";
        assert_eq!(flagged, gamma >= 2.0 * 1.25 / 9.0, "gamma {gamma}");
        if flagged {
            assert_eq!(r[22], "divergent");
        }
    }

    let unflagged = cfg.replace("allow_unstable = true\n", "");
    assert_eq!(
        hblab(&["sweep"], Some((dir.path(), &unflagged)))
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn probe_and_spectral_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[objective]\nkind = circle\ndim = 2\n[method]\nname = hb_ode\nalpha = 2\n[init]\nx0 = 1.2, 0\n\
               [probe]\nregion = annulus\nwidths = 0.1\nsamples = 2000\n";
    let o = hblab(
        &["probe", "--format", "csv", "--seed", "4"],
        Some((dir.path(), cfg)),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with(
        "objective,region,n_samples,seed,pl,qg,eb,qsc,min_nonzero_eig,max_nonzero_eig,kernel_dim"
    ));
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",annulus:0.9-1.1,2000,4,"));
    assert!(row.ends_with(",1"));

    let o = hblab(&["spectral", "--format", "csv"], Some((dir.path(), cfg)));
    assert_eq!(o.status.code(), Some(0));
    // one normal direction (2 states) and one tangential velocity
    assert_eq!(stdout(&o).lines().count(), 1 + 3);
}

#[test]
fn compare_reports_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let o = hblab(&["compare", "--format", "csv"], Some((dir.path(), QUAD)));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let methods: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(methods, vec!["hb_discrete", "gd"]);
}
