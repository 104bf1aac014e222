use std::path::{Path, PathBuf};
use std::process::Command;

fn hbk(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hbk"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("HBK_THREADS");
    if let Some(t) = threads {
        cmd.env("HBK_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn constant_data_keeps_energy_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[initial_data]\nkind = \"constant\"\nw = 0.4\n[integrator]\nt_end = 0.5\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&out.join("trajectory.csv"));
    assert_eq!(rows[0].len(), 12);
    let e0 = rows[0][1];
    assert!(rows.iter().all(|r| (r[1] - e0).abs() < 1e-10));
    assert!(out.join("report.json").is_file());
    assert!(out.join("snapshots/w_00000.hbwf").is_file());
}

#[test]
fn polarized_bump_stays_fermi_with_exp_duhamel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "[integrator]\nscheme = \"exp-duhamel\"\ndt = 0.01\nt_end = 1.0\nrecord_every = 5\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&out.join("trajectory.csv"));
    assert!((rows.last().unwrap()[0] - 1.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[10] < 1e-6));
    // every output embeds the resolved config
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(text.contains("# scheme = \"exp-duhamel\""));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["integrator"]["scheme"], "exp-duhamel");
}

#[test]
fn config_errors_exit_with_status_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(
        dir.path(),
        "m.toml",
        "[dispersion]\nkind = \"tabulated\"\npath = \"omega.csv\"\n",
    );
    let o = hbk(&["simulate", "--config", missing.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dispersion.path"));

    let unknown = write(dir.path(), "u.toml", "[integrator]\nstep = 0.1\n");
    let o = hbk(&["simulate", "--config", unknown.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("integrator"));

    let floor = write(dir.path(), "f.toml", "[collision]\nepsilon = 0.05\n");
    let out = dir.path().join("o");
    let o = hbk(
        &[
            "simulate",
            "--config",
            floor.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("collision.epsilon"));

    assert_eq!(
        hbk(&["simulate", "--config", "/nonexistent/x.toml"], None)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(hbk(&["no-such-command"], None).status.code(), Some(2));
}

#[test]
fn constraint_violation_exits_with_status_3_and_keeps_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "[initial_data]\nkind = \"preset\"\nname = \"random-fermi\"\n[collision]\nepsilon = 0.4\n\
         [integrator]\ndt = 10.0\nt_end = 100.0\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("constraint-violated"));
    assert!(!data_rows(&out.join("trajectory.csv")).is_empty());
}

#[test]
fn initial_data_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("# two-component data\nj1,up,down\n");
    for j in 0..16 {
        csv.push_str(&format!("{j},{},{}\n", 0.2 + 0.03 * j as f64, 0.5));
    }
    write(dir.path(), "w.csv", &csv);
    let cfg = write(
        dir.path(),
        "d.toml",
        "[initial_data]\nkind = \"diagonal\"\npath = \"w.csv\"\n[integrator]\nt_end = 0.1\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    // restart from the final snapshot
    let snaps = read_tree(&out.join("snapshots"));
    let last = out.join("snapshots").join(&snaps.last().unwrap().0);
    let cfg2 = write(
        dir.path(),
        "f.toml",
        &format!(
            "[initial_data]\nkind = \"field\"\npath = {:?}\n[integrator]\nt_end = 0.1\n",
            last.to_str().unwrap()
        ),
    );
    let out2 = dir.path().join("out2");
    let o = hbk(
        &[
            "simulate",
            "--config",
            cfg2.to_str().unwrap(),
            "--output",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = data_rows(&out.join("trajectory.csv"));
    let b = data_rows(&out2.join("trajectory.csv"));
    assert_eq!(a.last().unwrap()[2..10], b[0][2..10]);
}

#[test]
fn sigma_coll_integral_column_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[grid]\nd = 1\nn = 32\n[collision]\nepsilon = 0.2\n[sigma_coll]\nk1 = 5\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "sigma-coll",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let total: f64 = data_rows(&out.join("sigma_coll.csv")).iter().map(|r| r[2]).sum();
    assert!((total - 1.0).abs() < 1e-3, "{total}");
}

#[test]
fn validate_dispersion_reports_exponent_at_d3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.toml",
        "[grid]\nd = 3\nn = 8\n[collision]\nepsilon = 2.5\n[dispersion_validation]\nintegrability = false\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "validate-dispersion",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("validate_dispersion.json")).unwrap()).unwrap();
    let decay = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "pt-l3-decay")
        .unwrap();
    assert!(decay["metadata"]["fitted_exponent"].as_f64().unwrap() >= 9.0 / 7.0);
    assert_eq!(decay["verdict"], "pass");
}

#[test]
fn epsilon_study_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        "[epsilon_study]\nschedule = [[16, 0.8], [32, 0.4]]\noperator = \"c-diss\"\n",
    );
    let out = dir.path().join("out");
    let o = hbk(
        &[
            "epsilon-study",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out.join("epsilon_study.csv")).len(), 1);
    assert!(out.join("epsilon_study.json").is_file());
}

#[test]
fn selftest_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = hbk(&["selftest", "--output", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("selftest.json")).unwrap()).unwrap();
    assert!(v["failed"].as_array().unwrap().is_empty());
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "seed = 9\n[grid]\nd = 2\nn = 8\n[collision]\nepsilon = 1.6\n[initial_data]\nkind = \"preset\"\n\
         name = \"random-fermi\"\n[integrator]\nt_end = 0.1\nrecord_every = 5\n",
    );
    let out = dir.path().join("out");
    let run = |threads: &str, extra: &[&str]| {
        let mut args = vec![
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = hbk(&args, Some(threads));
        assert_eq!(o.status.code(), Some(0));
        let tree = read_tree(&out);
        std::fs::remove_dir_all(&out).unwrap();
        tree
    };
    let one = run("1", &[]);
    assert_eq!(one, run("4", &[]));
    assert_eq!(one, run("1", &["--threads", "3"]));
    assert_ne!(one, run("1", &["--seed", "10"]));
}
