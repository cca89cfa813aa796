use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brouwer_cli::commands::read_csv;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn brouwer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brouwer")).args(args).output().expect("binary runs")
}

fn run_with(cmd: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let config = scenario(config);
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    brouwer(&args)
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn assert_rectangular(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let (header, rows) = read_csv(text).expect("CSV with header parses");
    assert!(rows.iter().all(|r| r.len() == header.len()));
    (header, rows)
}

#[test]
fn maze_run_completes_with_thirty_trace_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("run", "maze.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = assert_rectangular(&read(dir.path().join("trace.csv")));
    assert_eq!(header[0], "iteration");
    assert_eq!(rows.len(), 30);
    let audit: serde_json::Value = serde_json::from_str(&read(dir.path().join("audit.json"))).unwrap();
    assert!(audit["type_creations"].as_u64().unwrap() >= 1);
    let renders: Vec<_> = std::fs::read_dir(dir.path().join("renders")).unwrap().collect();
    assert!(renders.len() >= 2);
}

#[test]
fn four_property_micro_domain_exits_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("run", "switchboard4.json", dir.path(), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
    let (_, rows) = assert_rectangular(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0][1], "Exhausted");
}

#[test]
fn missing_or_unversioned_config_exits_one() {
    let out = brouwer(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 9}"#).unwrap();
    let out = brouwer(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));

    let out = brouwer(&["run", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plan_prints_two_step_inversion() {
    let config = scenario("plan_inversion.json");
    let out = brouwer(&["plan", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let plan: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plan["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn novelty_history_has_monotone_archive() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("evolve", "evolve_novelty.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = assert_rectangular(&read(dir.path().join("history.csv")));
    assert_eq!(rows.len(), 100);
    let col = header.iter().position(|h| h == "archive_size").unwrap();
    let sizes: Vec<usize> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn objective_history_never_loses_best_fitness() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("evolve", "evolve_objective.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = assert_rectangular(&read(dir.path().join("history.csv")));
    let col = header.iter().position(|h| h == "best_fitness").unwrap();
    let best: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn render_of_trace_is_well_formed_svg() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_with("run", "blockworld2.json", dir.path(), &[]).status.code(), Some(2));
    let trace = dir.path().join("trace.csv");
    let out = brouwer(&["render", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    // numeric series: novelty, lp_size, la_size, open_count
    assert_eq!(polylines, 4);
}

#[test]
fn render_of_maze_json() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_with("evolve", "evolve_novelty.json", dir.path(), &[]).status.code(), Some(0));
    let maze = dir.path().join("best_maze.json");
    let out = brouwer(&["render", maze.to_str().unwrap(), "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let svg = read(dir.path().join("r/best_maze.svg"));
    roxmltree::Document::parse(&svg).expect("well-formed XML");
}

#[test]
fn census_partitions_two_block_concepts() {
    let config = scenario("census2.json");
    let out = brouwer(&["census", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let count = |k: &str| v[k].as_array().unwrap().len();
    assert_eq!(count("realizable") + count("unrealizable"), 15);
    assert_eq!(count("unknown"), 0);
    assert_eq!(count("realizable"), 7);
}

#[test]
fn baselines_from_the_command_line() {
    let cfg = scenario("evaluate.json");
    let out = brouwer(&["evaluate", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let (_, rows) = assert_rectangular(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0][0], "2");

    let cfg = scenario("fit.json");
    let out = brouwer(&["fit", "--config", cfg.to_str().unwrap()]);
    let p: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((p["weights"][1].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let cfg = scenario("closure.json");
    let out = brouwer(&["closure", "--config", cfg.to_str().unwrap()]);
    let atoms: Vec<String> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(atoms, ["p", "q", "r"]);
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_with("run", "switchboard_release.json", a.path(), &["--threads", "0"]);
    run_with("run", "switchboard_release.json", b.path(), &["--threads", "4"]);
    for f in ["report.json", "trace.csv", "audit.json", "renders/trace.svg"] {
        assert_eq!(read(a.path().join(f)), read(b.path().join(f)), "{f}");
    }
}

#[test]
fn seed_flag_overrides_the_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_with("run", "maze.json", a.path(), &[]);
    run_with("run", "maze.json", b.path(), &["--seed", "8"]);
    assert_ne!(read(a.path().join("report.json")), read(b.path().join("report.json")));
}
