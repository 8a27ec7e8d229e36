use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tjd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tjd")).args(args).output().expect("spawn tjd")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn divergence_of_a_point_with_itself_is_zero() {
    let v = json(&tjd(&["divergence", "--p", "0.3,2", "--q", "0.3,2"]));
    assert_eq!(v["results"]["value"].as_f64(), Some(0.0));
    assert_eq!(v["command"]["params"]["kind"], "total-jensen");
}

#[test]
fn divergence_kinds_agree_with_library() {
    use tjdiv::divergences::{bregman, total_jensen};
    use tjdiv::{Generator, Skew};
    let g = Generator::<f64>::burg(1).unwrap();
    let v = json(&tjd(&["divergence", "--generator", "burg", "--alpha", "0.3", "--p", "1", "--q", "4"]));
    let want = total_jensen(&g, Skew::new(0.3), &[1.0], &[4.0]).unwrap().value;
    assert_eq!(v["results"]["value"].as_f64(), Some(want));
    let v = json(&tjd(&["divergence", "--kind", "bregman", "--generator", "burg", "--p", "1", "--q", "4"]));
    assert_eq!(v["results"]["value"].as_f64(), Some(bregman(&g, &[1.0], &[4.0]).unwrap().value));
    let v = json(&tjd(&[
        "divergence",
        "--kind",
        "kl-gaussian",
        "--mu1",
        "0",
        "--sigma1",
        "1",
        "--mu2",
        "1",
        "--sigma2",
        "1",
    ]));
    assert!((v["results"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(tjd(&["divergence", "--nope"]).status.code(), Some(2));
    assert_eq!(tjd(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(tjd(&["divergence", "--p", "1,x", "--q", "1"]).status.code(), Some(2));
    assert_eq!(tjd(&["divergence", "--kind", "kl-gaussian"]).status.code(), Some(2));
    assert_eq!(tjd(&["--help"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_with_one() {
    let out = tjd(&["divergence", "--generator", "burg", "--p", "-1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert_eq!(tjd(&["divergence", "--generator", "bogus", "--p", "1", "--q", "2"]).status.code(), Some(1));
    assert_eq!(tjd(&["project", "--p", "1", "--q", "1"]).status.code(), Some(1));
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "x,y\n1,2\n3,4\n5\n");
    let out = tjd(&["centroid", "--input", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    let path = write(dir.path(), "neg.csv", "x,y\n1,2\n-3,4\n");
    let out = tjd(&["centroid", "--input", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn metric_check_reports_the_counterexample() {
    let v = json(&tjd(&["metric-check"]));
    let r = &v["results"];
    assert_eq!(r["violates_triangle_inequality"], true);
    assert!((r["deficiency"].as_f64().unwrap() - 0.04288583301311766).abs() < 1e-12);
}

#[test]
fn centroid_uses_weight_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "w.csv", "x,weight\n1,3\n4,1\n");
    let v = json(&tjd(&["centroid", "--input", &path, "--generator", "squared-euclidean", "--no-refine"]));
    assert_eq!(v["results"]["weights"], serde_json::json!([0.75, 0.25]));
    let c = v["results"]["center"][0].as_f64().unwrap();
    assert!(c > 1.0 && c < 2.5, "{c}");
}

#[test]
fn config_file_fills_missing_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.conf", "# defaults\ngenerator = burg\nalpha=0.25\n");
    let v = json(&tjd(&["divergence", "--config", &cfg, "--p", "1", "--q", "2", "--alpha", "0.75"]));
    assert_eq!(v["command"]["params"]["generator"], "burg");
    assert_eq!(v["command"]["params"]["alpha"].as_f64(), Some(0.75));
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = tjd(&["--report", report.to_str().unwrap(), "metric-check"]);
    let written = std::fs::read_to_string(&report).unwrap();
    assert_eq!(written.as_bytes(), &out.stdout[..]);
}

#[test]
fn seeded_runs_are_reproducible_and_echo_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "0.5\n1\n1.2\n4\n4.5\n9\n");
    let first = tjd(&["cluster", "--input", &path, "--k", "2"]);
    let v = json(&first);
    let seed = v["command"]["params"]["rng_seed"].as_u64().unwrap();
    assert!(String::from_utf8_lossy(&first.stderr).contains(&seed.to_string()));
    let again = json(&tjd(&["cluster", "--input", &path, "--k", "2", "--rng-seed", &seed.to_string()]));
    assert_eq!(v["results"], again["results"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "0.5\n1\n1.2\n4\n4.5\n9\n");
    let args = ["bound-experiment", "--input", &path, "--trials", "100", "--samples", "200", "--rng-seed", "5"];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_tjd")).args(args).env("TJD_THREADS", threads).output().unwrap();
        serde_json::to_string(&json(&out)["results"]).unwrap()
    };
    assert_eq!(run("1"), run("4"));
    let bad = Command::new(env!("CARGO_BIN_EXE_tjd")).args(args).env("TJD_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn influence_table_has_one_row_per_grid_point() {
    let v = json(&tjd(&["influence", "--p", "1", "--generator", "burg", "--ymax", "10", "--per-decade", "2"]));
    assert_eq!(v["results"]["growth"], "undetermined");
    assert_eq!(v["results"]["table"].as_array().unwrap().len(), 3);
}
