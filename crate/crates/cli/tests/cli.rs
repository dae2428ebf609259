use std::path::Path;
use std::process::Command;

fn paseed(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_paseed")).args(args).output().expect("binary runs")
}

/// Runs `sub` with the config text in a fresh directory; returns the dir.
fn run_config(sub: &str, config: &str, extra: &[&str]) -> (tempfile::TempDir, std::process::Output) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let output = paseed(&args);
    (dir, output)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn tail_exact_column_matches_erfc() {
    let (dir, o) = run_config("tail", "tree_size = 2\nd = 1\nt_range = { start = 0.5, stop = 8.0, step = 0.5 }\n", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("out/tail.csv"));
    assert_eq!(rows[0], ["t", "exact", "quadrature", "asymptotic", "ratio", "method"]);
    assert_eq!(rows.len(), 17);
    let at2 = rows.iter().find(|r| r[0].parse::<f64>().ok() == Some(2.0)).unwrap();
    let exact: f64 = at2[1].parse().unwrap();
    assert!((exact - 0.157_299_207_050_285_1).abs() < 1e-12, "{exact}");
    assert!((exact - 0.157299).abs() < 5e-7);
    let quad: f64 = at2[2].parse().unwrap();
    assert!((quad / exact - 1.0).abs() < 1e-8);
}

#[test]
fn tail_whole_seed_quadrature_agrees() {
    let (dir, o) = run_config("tail", "tree_size = 3\nt = [1.0, 3.0]\n", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for row in &read_csv(&dir.path().join("out/tail.csv"))[1..] {
        let exact: f64 = row[1].parse().unwrap();
        let quad: f64 = row[2].parse().unwrap();
        assert!((quad / exact - 1.0).abs() < 1e-8, "{row:?}");
    }
}

#[test]
fn grow_edge_to_four_vertices_is_a_star_half_the_time() {
    let (dir, o) = run_config("grow", "seed = \"star:2\"\nn = 4\nreplicas = 100000\n", &["--seed", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("out/shapes.csv"));
    assert_eq!(rows[0], ["shape", "degree_profile", "count", "fraction", "standard_error"]);
    assert_eq!(rows.len(), 3);
    let star = rows.iter().find(|r| r[1] == "(3,1,1,1)").unwrap();
    let count: f64 = star[2].parse().unwrap();
    let se = (1e5f64 * 0.25).sqrt();
    assert!((count - 5e4).abs() < 3.0 * se, "{count}");
}

#[test]
fn same_seed_gives_identical_outputs() {
    let config = "seeds = [\"star:4\", \"path:4\"]\nn = 300\nreplicas = 200\nstatistic = \"max_degree_scaled\"\nbootstrap_rounds = 100\n";
    let (a, oa) = run_config("tv-lower-bound", config, &["--seed", "5", "--threads", "1"]);
    let (b, ob) = run_config("tv-lower-bound", config, &["--seed", "5", "--threads", "3"]);
    assert!(oa.status.success() && ob.status.success());
    for f in ["tv_thresholds.csv", "tv_summary.csv", "tv_samples.csv"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 5);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    assert!(manifest["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn validate_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = paseed(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("validate.csv"));
    assert_eq!(rows[0], ["check", "passed", "detail"]);
    assert!(rows[1..].iter().all(|r| r[1] == "true"), "{rows:?}");
}

#[test]
fn exit_codes_by_failure_class() {
    let (_d, o) = run_config("grow", "seed = \"star:2\"\nn = \"many\"\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let (_d, o) = run_config("grow", "seed = \"blob\"\nn = 10\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let (_d, o) = run_config("tail", "tree_size = 40\nd = 70\nt = [2.0]\n", &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "tree_size = 2\nt = [1.0]\n").unwrap();
    let o = paseed(&["tail", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(paseed(&["tail"]).status.code(), Some(2));
}

#[test]
fn saved_parents_feed_back_as_trees() {
    let (dir, o) = run_config("grow", "seed = \"path:4\"\nn = 50\nreplicas = 3\nsave_parents = 1\nwatch = [1]\ncheckpoints = [10]\n", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = read_csv(&dir.path().join("out/trajectories.csv"));
    assert_eq!(traj.len(), 1 + 3 * 2 * 2);
    let umax_cfg = "pattern = \"singleton\"\nhosts = [\"out/parents_0.patr\", \"star:5\"]\nbruteforce = true\n";
    std::fs::write(dir.path().join("u.toml"), umax_cfg).unwrap();
    let o = paseed(&[
        "umax",
        "--config",
        dir.path().join("u.toml").to_str().unwrap(),
        "--out",
        dir.path().join("u").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("u/umax.csv"));
    assert_eq!(rows[1][2], "50");
    assert_eq!(rows[2][3], "4");
    assert_eq!(rows[2][3], rows[2][4]);
}

#[test]
fn remaining_subcommands_write_tables() {
    let cases = [
        ("moments", "seed = \"path:3\"\nn = 500\nreplicas = 50\nstatistic = \"vertex_degree_scaled:1\"\n", "moments.csv"),
        ("moments", "seed = \"star:3\"\nn = 500\nreplicas = 50\nstatistic = \"max_degree_scaled\"\n", "max_degree_tail.csv"),
        ("umax-sweep", "pattern = \"path:2\"\nseed = \"star:3\"\ncheckpoints = [10, 100]\nreplicas = 5\n", "umax_sweep_summary.csv"),
        ("local-limit", "seed = \"star:2\"\nn = 2000\nroots = 500\npolya_samples = 500\n", "local_limit.csv"),
        ("ball-dist", "seeds = [\"spur-near-end\", \"spur-at-middle\"]\nn = 500\nroots = 200\n", "ball_tv.csv"),
    ];
    for (sub, config, file) in cases {
        let (dir, o) = run_config(sub, config, &[]);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = read_csv(&dir.path().join("out").join(file));
        assert!(rows.len() > 1, "{sub}");
    }
}
