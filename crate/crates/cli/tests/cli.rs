use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn specdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specdisc"))
        .args(args)
        .env_remove("SPECDISC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn cell_ratios_are_powers_of_a_third() {
    let o = specdisc(&[
        "conditions",
        "--which",
        "ex54",
        "--alpha",
        "1",
        "--n",
        "1..6",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,value,verdict"));
    let rows: Vec<(i32, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(
        rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        (1..=6).collect::<Vec<_>>()
    );
    for (n, v) in rows {
        let expected = 3f64.powi(-n);
        assert!((v - expected).abs() <= 1e-15 * expected, "n = {n}: {v}");
    }
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "which = ex54\n# comment\nalpha = one\n").unwrap();
    let o = specdisc(&["conditions", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("run.cfg line 3") && err.contains("`alpha`"), "{err}");

    std::fs::write(&cfg, "which = ex54\nalhpa = 1\n").unwrap();
    let o = specdisc(&["conditions", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key"), "{}", stderr(&o));

    std::fs::write(&cfg, "which: ex54\n").unwrap();
    let o = specdisc(&["conditions", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.cfg:1"), "{}", stderr(&o));

    std::fs::write(&cfg, "command = spectral\n").unwrap();
    let o = specdisc(&["conditions", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_values_exit_2() {
    let o = specdisc(&["conditions", "--which", "thm99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("command line: key `which`"), "{}", stderr(&o));
    let o = specdisc(&["spectral", "--alpha", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = specdisc(&["conditions", "--n", "5..1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
    let o = specdisc(&["nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_and_inputs_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ex.cfg");
    std::fs::write(&cfg, "command = conditions\nwhich = ex54\nalpha = 3/2\nN_rule = log\n").unwrap();
    let o = specdisc(&["conditions", "--config", cfg.to_str().unwrap(), "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["inputs"]["alpha"], "1");
    assert_eq!(r["inputs"]["n-rule"], "log");
    assert_eq!(r["inputs"]["seed"], "7");
    assert_eq!(r["checks"]["example"], true);
    assert_eq!(r["tool"], "specdisc");
    assert!(r["version"].is_string());
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = specdisc(&[
            "polyhedron",
            "--check",
            "lemma42",
            "--samples",
            "20",
            "--seed",
            seed,
            "--threads",
            threads,
            "--out-dir",
            out.to_str().unwrap(),
            "--plot",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (o.stdout, read_dir_sorted(&out))
    };
    let a = run("a", "7", "1");
    let b = run("b", "7", "1");
    let c = run("c", "7", "2");
    let other = run("d", "8", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_ne!(a.0, other.0);
    let names: Vec<&str> = a.1.iter().map(|f| f.0.as_str()).collect();
    assert!(names.contains(&"report.json") && names.contains(&"lemma42.csv") && names.contains(&"lemma42_lhs.dat"));
}

#[test]
fn sampled_verification_is_deterministic() {
    let args = [
        "dense-verify",
        "--system",
        "product",
        "--levels",
        "5",
        "--samples",
        "300",
        "--seed",
        "7",
    ];
    let a = specdisc(&args);
    let b = specdisc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["results"]["report"]["failed"], 0);
}

#[test]
fn failed_check_exits_1() {
    let o = specdisc(&[
        "polyhedron",
        "--check",
        "pushforward",
        "--samples",
        "10",
        "--slabs",
        "20",
        "--transverse",
        "10",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("check failed: pushforward_uniform"),
        "{}",
        stderr(&o)
    );
    assert_eq!(json(&o)["checks"]["pushforward_uniform"], false);
}

#[test]
fn golden_self_compare_is_empty_and_perturbation_is_located() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let golden = dir.path().join("golden").join("golden.json");
    let o = specdisc(&["conditions", "--which", "ex55", "--j", "1..4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::write(&report, &o.stdout).unwrap();

    let o = specdisc(&["golden", "bless", report.to_str().unwrap(), golden.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = specdisc(&["golden", "compare", report.to_str().unwrap(), golden.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["diffs"], serde_json::json!([]));

    let mut v: Value = serde_json::from_slice(&std::fs::read(&golden).unwrap()).unwrap();
    let r = v["results"]["rows"][2]["r"].as_f64().unwrap();
    v["results"]["rows"][2]["r"] = serde_json::json!(r * (1.0 + 1e-6));
    std::fs::write(&golden, serde_json::to_vec_pretty(&v).unwrap()).unwrap();
    let o = specdisc(&[
        "golden",
        "compare",
        report.to_str().unwrap(),
        golden.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("results.rows[2].r: got"), "{text}");

    // A loose tolerance accepts the same perturbation.
    let o = specdisc(&[
        "golden",
        "compare",
        report.to_str().unwrap(),
        golden.to_str().unwrap(),
        "--rtol",
        "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn rearrange_and_cover_on_a_small_space() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("space.json");
    std::fs::write(
        &space,
        r#"{"atoms":[{"id":0,"mass":1,"value":1},{"id":1,"mass":1,"value":2},{"id":2,"mass":1,"value":4}],"total_mass":3}"#,
    )
    .unwrap();
    let field = dir.path().join("field.json");
    std::fs::write(&field, "[4, 2, 1]").unwrap();
    let s = space.to_str().unwrap();
    let o = specdisc(&["rearrange", "--space", s, "--t-list", "0.5,1.5,2.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "t,W_star,Wbar_star,kappa_minus\n0.5,1,4,0\n1.5,2,2,1\n2.5,4,1,2\n"
    );

    let o = specdisc(&[
        "optcover",
        "--space",
        s,
        "--field",
        field.to_str().unwrap(),
        "--t",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["results"]["J"], 2.0);
    assert_eq!(r["results"]["I_bruteforce"], 3.0);
    assert_eq!(r["results"]["prop34"]["ok"], true);

    let o = specdisc(&["optcover", "--space", s, "--t", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = specdisc(&["optcover", "--space", "/nonexistent.json", "--t", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn potential_cell_fraction() {
    let o = specdisc(&[
        "potential",
        "--alpha",
        "1",
        "--N-rule",
        "linear",
        "--cell",
        "4,0,0 2 3",
        "--fraction",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert_eq!(row[2].parse::<f64>().unwrap(), 1.0 / 9.0);
    assert_eq!(row[4], "true");
}

#[test]
fn spectral_zero_potential_is_flat() {
    let o = specdisc(&[
        "spectral",
        "--potential",
        "zero",
        "--windows",
        "1..3",
        "--nodes",
        "10",
        "--half",
        "1",
        "--k",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let rows = r["tables"][0]["rows"].as_array().unwrap();
    assert_eq!(r["tables"][0]["columns"], serde_json::json!(["index", "E0", "E1"]));
    let e0: Vec<f64> = rows.iter().map(|row| row[1].as_f64().unwrap()).collect();
    assert!(e0.iter().all(|e| (e - e0[0]).abs() <= 1e-8), "{e0:?}");
    assert_eq!(r["checks"]["converged"], true);
}
