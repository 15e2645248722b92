use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netgame"))
        .args(args)
        .output()
        .unwrap()
}

fn scenario(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn check_reports_margins() {
    let o = run(&["check", &scenario("dyad-substitutes.json")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("sum_margin: 1.7\n"), "{out}");
    assert!(out.contains("difference_margin: 0.5\n"));
    assert!(out.contains("activities: substitutes"));
    assert!(out.contains("status: pass"));
}

#[test]
fn check_fails_on_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    // 1 − β − δ = 0 on the dyad
    let text = r#"{"n": 2, "k": 3, "edges": [[0, 1, 1.0]], "beta": 0.4, "delta": 0.6, "a_hat": [1, 1, 1, 1, 1, 1]}"#;
    let o = run(&["check", &write_temp(&dir, "edge.json", text)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status: fail"));
    let o = run(&["equilibrium", &write_temp(&dir, "edge.json", text)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_files_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "check",
        &write_temp(
            &dir,
            "bad.json",
            r#"{"n": 2, "k": 1, "edges": [], "beta": "x"}"#,
        ),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");
    let o = run(&[
        "check",
        &write_temp(
            &dir,
            "short.json",
            r#"{"n": 2, "k": 1, "edges": [], "beta": 0, "delta": 0, "a_hat": [1]}"#,
        ),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("a_hat"));
    assert_eq!(run(&["check"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn equilibrium_without_interactions_copies_utilities() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"n": 3, "k": 2, "edges": [[0, 1, 1.0]], "beta": 0.0, "delta": 0.0, "a_hat": [1, 2, 3, 4, 5, 6]}"#;
    let o = run(&["equilibrium", &write_temp(&dir, "s.json", text)]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["agent", "activity", "a", "x_star", "utility"]);
    assert_eq!(r.len(), 1 + 6 + 1);
    for row in &r[1..7] {
        assert_eq!(row[2], row[3]);
    }
    assert_eq!(r[7][0], "welfare");
}

#[test]
fn single_activity_equilibrium_is_a_centrality_solve() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        r#"{"n": 2, "k": 1, "edges": [[0, 1, 1.0]], "beta": 0.0, "delta": 0.5, "a_hat": [1, 0]}"#;
    let r = rows(&stdout(&run(&[
        "equilibrium",
        &write_temp(&dir, "s.json", text),
    ])));
    // (I − ½G)⁻¹ (1, 0) = (4/3, 2/3)
    assert_eq!(r[1][3], "1.33333333333");
    assert_eq!(r[2][3], "0.666666666667");
}

#[test]
fn zero_budget_leaves_utilities_alone() {
    let o = run(&[
        "intervene",
        &scenario("dyad-substitutes.json"),
        "--budget",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for row in &rows(&stdout(&o))[1..] {
        assert_eq!(row[4], "0");
    }
}

#[test]
fn simple_interventions_have_the_expected_shape() {
    let o = run(&[
        "intervene",
        &scenario("g0-complements-complements.json"),
        "--simple",
    ]);
    let r = rows(&stdout(&o));
    for agent in 0..5 {
        let shifts: Vec<&String> = (0..3).map(|s| &r[1 + s * 5 + agent][4]).collect();
        assert!(shifts[0] == shifts[1] && shifts[1] == shifts[2]);
        assert!(shifts[0].parse::<f64>().unwrap() > 0.0);
    }
    let o = run(&[
        "intervene",
        &scenario("g0-substitutes-complements.json"),
        "--simple",
    ]);
    let r = rows(&stdout(&o));
    for agent in 0..5 {
        let s1: f64 = r[1 + agent][4].parse().unwrap();
        let s2: f64 = r[6 + agent][4].parse().unwrap();
        assert_eq!(s1, -s2);
        assert_eq!(r[11 + agent][4], "0");
    }
}

#[test]
fn small_budget_needs_a_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"n": 2, "k": 2, "edges": [[0, 1, 1.0]], "beta": 0.2, "delta": 0.1, "a_hat": [0, 0, 0, 0], "budget": 1.0}"#;
    let path = write_temp(&dir, "zero.json", text);
    let o = run(&["intervene", &path, "--small-budget"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("nonzero"));
    assert_eq!(
        run(&["ratio", &path, "--l", "1", "--limit", "zero"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn summary_file_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shift.csv");
    let summary = dir.path().join("summary.csv");
    let o = run(&[
        "intervene",
        &scenario("dyad-substitutes.json"),
        "--out",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(summary).unwrap();
    assert!(s.starts_with("key,value\nmethod,exact\nbudget,40\n"), "{s}");
    assert!(s.contains("binding,true"));
    assert_eq!(rows(&std::fs::read_to_string(out).unwrap()).len(), 7);
}

#[test]
fn ratio_limits() {
    let o = run(&[
        "ratio",
        &scenario("dyad-substitutes.json"),
        "--l",
        "2",
        "--limit",
        "inf",
    ]);
    assert!(stdout(&o).contains("\nrho: 1\n"));
    let o = run(&[
        "ratio",
        &scenario("g1-four-activities.json"),
        "--l",
        "1",
        "--limit",
        "zero",
    ]);
    assert!(stdout(&o).contains("closed_form: 0.5\n"), "{}", stdout(&o));
    assert_eq!(
        run(&["ratio", &scenario("dyad-substitutes.json"), "--l", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ratio_agrees_with_sweep() {
    let o = run(&[
        "ratio",
        &scenario("dyad-complements.json"),
        "--l",
        "2",
        "--budget",
        "40",
    ]);
    let rho = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("rho: ").map(str::to_owned))
        .unwrap();
    let sweep = stdout(&run(&[
        "sweep",
        &scenario("dyad-complements.json"),
        "--axis",
        "C",
        "--grid",
        "40",
    ]));
    let r = rows(&sweep);
    let row = r.iter().find(|row| row[1] == "2").unwrap();
    assert_eq!(row[6], rho);
}

#[test]
fn sweep_shapes() {
    let o = run(&[
        "sweep",
        &scenario("dyad-substitutes.json"),
        "--axis",
        "beta",
        "--grid",
        "",
    ]);
    assert_eq!(
        stdout(&o),
        "beta,l,status,w_hat,w_star,gain,rho,rho_inf,phi,theta,alignment\n"
    );
    let o = run(&[
        "sweep",
        &scenario("g1-four-activities.json"),
        "--axis",
        "graph",
        "--grid",
        "G1,G2,G3",
        "--by",
        "delta",
        "--values",
        "0.2,-0.3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1 + 2 * 3 * 4);
    assert!(r[1..].iter().all(|row| row[3] == "ok"));
    let o = run(&[
        "sweep",
        &scenario("dyad-substitutes.json"),
        "--axis",
        "delta",
        "--grid",
        "0.1,0.9",
    ]);
    let r = rows(&stdout(&o));
    assert_eq!(r[4][2], "violated");
    assert_eq!(
        run(&[
            "sweep",
            &scenario("dyad-substitutes.json"),
            "--axis",
            "gamma",
            "--grid",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let args = [
        "sweep",
        &scenario("dyad-complements.json"),
        "--axis",
        "C",
        "--grid",
        "0,5,10,20,40",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().all(|l| !l.ends_with('\r')));
}
