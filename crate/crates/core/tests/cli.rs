use std::path::Path;
use std::process::Command;

use fkmoments::harness::cli::run;
use fkmoments::harness::RunReport;
use fkmoments::stream::{read_stream, write_text, Stream};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["fkmoments"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn report(args: &[&str]) -> RunReport {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn write_stream(dir: &Path, name: &str, n: u64, tokens: Vec<u64>) -> String {
    let p = dir.join(name);
    write_text(&p, &Stream::new(n, tokens).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exact_second_moment() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_stream(dir.path(), "s.txt", 2, vec![1, 1, 2]);
    let r = report(&["exact", "--in", &f, "--k", "2"]);
    assert_eq!(r.estimate, Some(5));
    assert_eq!(r.mode, "exact");
}

#[test]
fn estimate_with_no_levels_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("z.txt");
    let g = g.to_str().unwrap();
    report(&[
        "gen", "--dist", "zipf", "--n", "1024", "--m", "4096", "--s", "1.2", "--seed", "3", "--out", g,
    ]);
    let exact = report(&["exact", "--in", g, "--k", "3"]);
    let est = report(&["estimate", "--in", g, "--k", "3", "--t", "0"]);
    assert_eq!(est.estimate, exact.estimate);
}

#[test]
fn validate_exits_zero() {
    let r = report(&["validate", "--suite", "winning-pairs", "--trials", "500"]);
    assert_eq!(r.details["passed"], true);
}

#[test]
fn unknown_flag_is_a_one_line_usage_error() {
    let (code, out, err) = call(&["exact", "--bogus"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn malformed_stream_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "#n=4\n1\nseven\n").unwrap();
    let (code, _, err) = call(&["exact", "--in", p.to_str().unwrap(), "--k", "2"]);
    assert_eq!(code, 1);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn bad_params_key() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_stream(dir.path(), "s.txt", 16, (1..=16).collect());
    let p = dir.path().join("p.cfg");
    std::fs::write(&p, "c_z=1\nnot_a_key=2\n").unwrap();
    let (code, _, err) = call(&["heavy", "--in", &f, "--params", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("not_a_key"), "{err}");
}

#[test]
fn small_k_needs_u() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_stream(dir.path(), "s.txt", 4, vec![1, 2, 2, 3]);
    assert_eq!(call(&["estimate", "--in", &f, "--k", "2"]).0, 1);
    let p = dir.path().join("p.cfg");
    std::fs::write(&p, "u=0.5\n").unwrap();
    report(&[
        "estimate",
        "--in",
        &f,
        "--k",
        "2",
        "--params",
        p.to_str().unwrap(),
    ]);
}

#[test]
fn replay_is_identical_except_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("p.bin");
    let g = g.to_str().unwrap();
    report(&[
        "gen", "--dist", "planted", "--n", "4096", "--seed", "9", "--out", g, "--format", "binary",
    ]);
    let p = dir.path().join("practical.cfg");
    std::fs::write(
        &p,
        "signatures=false\npsi_eff=0\nc_z=1\nrepetitions=2\nw_multiplier=8\nrange=2\n",
    )
    .unwrap();
    let args = ["heavy", "--in", g, "--seed", "5", "--params", p.to_str().unwrap()];
    let mut a = report(&args);
    let mut b = report(&args);
    assert!(!a.candidates.is_empty());
    a.wall_ms = 0;
    b.wall_ms = 0;
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn gen_round_trips_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let (t, b) = (dir.path().join("u.txt"), dir.path().join("u.bin"));
    for (path, fmt) in [(&t, "text"), (&b, "binary")] {
        report(&[
            "gen",
            "--dist",
            "uniform",
            "--n",
            "300",
            "--m",
            "900",
            "--seed",
            "2",
            "--out",
            path.to_str().unwrap(),
            "--format",
            fmt,
        ]);
    }
    let (x, y) = (read_stream(&t).unwrap(), read_stream(&b).unwrap());
    assert_eq!(x, y);
    assert_eq!(x.len(), 900);
}

#[test]
fn binary_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_stream(dir.path(), "s.txt", 3, vec![3, 3, 1]);
    let rep = dir.path().join("r.json");
    let st = Command::new(env!("CARGO_BIN_EXE_fkmoments"))
        .args(["--report", rep.to_str().unwrap(), "exact", "--in", &f, "--k", "3"])
        .status()
        .unwrap();
    assert!(st.success());
    let r: RunReport = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r.estimate, Some(9));
    let help = Command::new(env!("CARGO_BIN_EXE_fkmoments"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(help.status.success());
    let text = String::from_utf8(help.stdout).unwrap();
    for sub in ["gen", "exact", "heavy", "heavy1p", "estimate", "validate"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn practical_fixture_matches_library_settings() {
    use fkmoments::ahe::AheConfig;
    use fkmoments::harness::validate::practical_ahe;
    use fkmoments::harness::ParamOverrides;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/practical.params");
    let mut cfg = AheConfig {
        rho: 0.5,
        delta: 0.25,
        k: 4,
        seed: 7,
        ..AheConfig::default()
    };
    ParamOverrides::load(&path).unwrap().apply_ahe(&mut cfg).unwrap();
    assert_eq!(cfg, practical_ahe(7));
}

#[test]
fn estimate_modes_run() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("z.txt");
    let g = g.to_str().unwrap();
    report(&[
        "gen", "--dist", "zipf", "--n", "4096", "--m", "16384", "--s", "2", "--seed", "4", "--out", g,
    ]);
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/practical.params");
    let p = p.to_str().unwrap();
    let exact = report(&["exact", "--in", g, "--k", "4"]).estimate.unwrap() as f64;
    for mode in ["ahe", "ahe1p"] {
        let r = report(&["estimate", "--in", g, "--k", "4", "--mode", mode, "--params", p]);
        let est = r.estimate.unwrap() as f64;
        assert!((est - exact).abs() <= 0.2 * exact, "{mode}: {est} vs {exact}");
        assert_eq!(r.params["provider"]["ahe"]["one_pass"], mode == "ahe1p");
        assert!(r.passes > 1);
    }
}
