use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use subgrad_cli::commands::Report;
use subgrad_cli::io::{parse_run_trace, to_json, InstanceFile};
use subgrad_core::{
    build_feasibility_resisting_instance, build_polyak_tight_instance, rate_altproj, rate_polyak,
    subgradient_method, ProjectableSet, StepSchedule,
};
use tempfile::TempDir;

fn subgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgrad"))
        .args(args)
        .output()
        .expect("spawn subgrad")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {line:?}"))
        .parse()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const ABS: &str = r#"{"kind":"piecewise_affine","dimension":1,
"pieces":[{"slope":[1],"offset":0},{"slope":[-1],"offset":0}],
"x1":[1],"f_star":0,"B":1,"x_star":[0]}"#;

fn worstcase(dir: &TempDir, which: &str, n: usize) -> (PathBuf, Report) {
    let out = dir.path().join(format!("{which}-{n}"));
    let o = subgrad(&[
        "worstcase",
        "--which",
        which,
        "--N",
        &n.to_string(),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    (out, report)
}

#[test]
fn run_polyak_on_tight_instance() {
    let dir = TempDir::new().unwrap();
    let (out, _) = worstcase(&dir, "polyak", 5);
    let trace = dir.path().join("t.jsonl");
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&out.join("instance.json")),
        "--solver",
        "polyak",
        "--iters",
        "5",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    let line = stdout(&o);
    let last_f = field(&line, "last_f");
    assert!((last_f - rate_polyak(5, 1.0, 1.0).unwrap()).abs() <= 1e-8);
    assert!(field(&line, "gap").abs() <= 1e-12);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 6);
}

#[test]
fn run_adaptive_on_abs() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "abs.json", ABS);
    let trace = dir.path().join("t.jsonl");
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "adaptive-polyak",
        "--iters",
        "2",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "last_f") - 2.0 / 9.0).abs() < 1e-15);
}

#[test]
fn run_missing_f_star_is_precondition() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "abs.json", &ABS.replace(r#""f_star":0,"#, ""));
    let trace = dir.path().join("t.jsonl");
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "polyak",
        "--iters",
        "2",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("f_star"));

    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "fixed=0.5",
        "--iters",
        "2",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("last_f="));
}

#[test]
fn run_with_projection() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "abs.json", ABS);
    let trace = dir.path().join("t.jsonl");
    // the halfspace x <= 1 keeps x1 feasible; x1 = 1 outside ball of radius 0.5
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "polyak-t=0.5",
        "--iters",
        "3",
        "--project",
        "halfspace=1:1",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "polyak",
        "--iters",
        "3",
        "--project",
        "ball=0.5",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "polyak",
        "--iters",
        "3",
        "--project",
        "cube=1",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn feas_examples() {
    let dir = TempDir::new().unwrap();
    let (ap, _) = worstcase(&dir, "altproj", 3);
    let trace = dir.path().join("t.jsonl");
    let o = subgrad(&[
        "feas",
        "--instance",
        path_str(&ap.join("instance.json")),
        "--method",
        "altproj",
        "--iters",
        "3",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "last_d") - rate_altproj(3, 1.0).unwrap()).abs() <= 1e-10);

    let inst = build_feasibility_resisting_instance(4, 1.0).unwrap();
    let file = write(
        &dir,
        "res.json",
        &to_json(&InstanceFile::feasibility(&inst)).unwrap(),
    );
    let o = subgrad(&[
        "feas",
        "--instance",
        path_str(&file),
        "--method",
        "adaptive-greedy",
        "--iters",
        "4",
        "--trace",
        path_str(&trace),
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "last_d") - 1.0 / 5f64.sqrt()).abs() <= 1e-10);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 5);

    let o = subgrad(&[
        "feas",
        "--instance",
        path_str(&file),
        "--method",
        "altproj",
        "--iters",
        "4",
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bound_examples() {
    let o = subgrad(&[
        "bound", "--which", "polyak", "--N", "1", "--B", "1", "--R", "1",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.769_800_358_919).abs() <= 1.5e-12, "{v}");
    assert_eq!(
        stdout(&o)
            .trim()
            .replace('.', "")
            .trim_start_matches('0')
            .len(),
        12
    );

    let o = subgrad(&[
        "bound", "--which", "optimal", "--N", "3", "--B", "1", "--R", "2",
    ]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);

    assert_eq!(
        subgrad(&["bound", "--which", "altproj", "--N", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        subgrad(&["bound", "--which", "optimal", "--N", "2", "--B", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn worstcase_examples() {
    let dir = TempDir::new().unwrap();
    let (out, report) = worstcase(&dir, "polyak", 10);
    assert!(report.relative_gap <= 1e-8);
    for name in ["instance.json", "trace.jsonl", "certificate.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let (_, report) = worstcase(&dir, "altproj", 2);
    assert!((report.achieved - 0.286_217).abs() < 1e-6);
    assert!(report.relative_gap <= 1e-10);
    let (_, report) = worstcase(&dir, "feasibility", 1);
    assert!((report.achieved - 1.0 / 2f64.sqrt()).abs() <= 1e-10);
    assert_eq!(
        subgrad(&["worstcase", "--which", "polyak", "--N", "0", "--out", "x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn certify_examples() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "abs.json", ABS);
    let trace = dir.path().join("t.jsonl");
    assert!(subgrad(&[
        "run",
        "--instance",
        path_str(&inst),
        "--solver",
        "polyak",
        "--iters",
        "1",
        "--trace",
        path_str(&trace)
    ])
    .status
    .success());
    let o = subgrad(&[
        "certify",
        "--trace",
        path_str(&trace),
        "--instance",
        path_str(&inst),
        "--v",
        "auto-constant",
        "--h-last",
        "1",
    ]);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "slack") - 0.5).abs() < 1e-15);

    let bad = write(&dir, "v.json", "[1, 0.5, 1]");
    let o = subgrad(&[
        "certify",
        "--trace",
        path_str(&trace),
        "--instance",
        path_str(&inst),
        "--v",
        path_str(&bad),
        "--h-last",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("multipliers not nondecreasing"));

    let (out, _) = worstcase(&dir, "polyak", 12);
    let o = subgrad(&[
        "certify",
        "--trace",
        path_str(&out.join("trace.jsonl")),
        "--instance",
        path_str(&out.join("instance.json")),
        "--v",
        path_str(&out.join("certificate.json")),
    ]);
    assert!(o.status.success());
    assert!(field(&stdout(&o), "slack").abs() <= 1e-6);

    // multipliers that grow far too fast overstate the left side
    let steep = write(&dir, "steep.json", "[1, 100, 100]");
    let o = subgrad(&[
        "certify",
        "--trace",
        path_str(&trace),
        "--instance",
        path_str(&inst),
        "--v",
        path_str(&steep),
        "--h-last",
        "1",
    ]);
    let slack = field(&stdout(&o), "slack");
    assert_eq!(o.status.code(), Some(if slack >= -1e-9 { 0 } else { 1 }));
}

#[test]
fn sweep_examples() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("p.csv");
    assert!(subgrad(&[
        "sweep",
        "--which",
        "polyak-exact",
        "--n-min",
        "1",
        "--n-max",
        "20",
        "--csv",
        path_str(&csv)
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,predicted,achieved,gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[3].abs() / r[1] <= 1e-8));

    let csv = dir.path().join("a.csv");
    assert!(subgrad(&[
        "sweep",
        "--which",
        "altproj-exact",
        "--n-min",
        "1",
        "--n-max",
        "100",
        "--csv",
        path_str(&csv)
    ])
    .status
    .success());
    let achieved: Vec<f64> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(achieved.len(), 100);
    assert!(achieved.windows(2).all(|w| w[1] < w[0]));

    let o = subgrad(&[
        "sweep",
        "--which",
        "adaptive-bound",
        "--n-min",
        "5",
        "--n-max",
        "2",
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn adaptive_bound_sweep_holds_and_is_seeded() {
    let dir = TempDir::new().unwrap();
    let run = |seed: &str, name: &str| {
        let csv = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_subgrad"))
            .args([
                "sweep",
                "--which",
                "adaptive-bound",
                "--n-min",
                "1",
                "--n-max",
                "30",
                "--csv",
                path_str(&csv),
            ])
            .env("SUBGRAD_SEED", seed)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read_to_string(csv).unwrap()
    };
    let a = run("7", "a.csv");
    assert_eq!(a, run("7", "b.csv"));
    assert_ne!(a, run("8", "c.csv"));
    for line in a.lines().skip(1) {
        let gap: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap >= -1e-9, "{line}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_subgrad"))
        .args([
            "sweep",
            "--which",
            "adaptive-bound",
            "--n-min",
            "1",
            "--n-max",
            "2",
            "--csv",
            path_str(&dir.path().join("d.csv")),
        ])
        .env("SUBGRAD_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, _) = worstcase(&dir, "polyak", 8);
    let b = dir.path().join("again");
    assert!(subgrad(&[
        "worstcase",
        "--which",
        "polyak",
        "--N",
        "8",
        "--out",
        path_str(&b)
    ])
    .status
    .success());
    for name in [
        "instance.json",
        "trace.jsonl",
        "report.json",
        "certificate.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn serialized_run_matches_in_memory_run() {
    let dir = TempDir::new().unwrap();
    let (out, _) = worstcase(&dir, "polyak", 9);
    let file: InstanceFile =
        serde_json::from_str(&std::fs::read_to_string(out.join("instance.json")).unwrap()).unwrap();
    let trace = dir.path().join("t.jsonl");
    assert!(subgrad(&[
        "run",
        "--instance",
        path_str(&out.join("instance.json")),
        "--solver",
        "adaptive-polyak",
        "--iters",
        "9",
        "--trace",
        path_str(&trace),
    ])
    .status
    .success());
    let from_cli = parse_run_trace(&std::fs::read_to_string(&trace).unwrap()).unwrap();

    let inst = build_polyak_tight_instance(9).unwrap();
    assert_eq!(file.x1, inst.x1);
    let in_memory = subgradient_method(
        &inst.oracle(),
        &ProjectableSet::WholeSpace,
        &inst.x1,
        9,
        &StepSchedule::AdaptivePolyak,
    )
    .unwrap();
    for (a, b) in from_cli.iterates().zip(in_memory.iterates()) {
        assert!(a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    assert_eq!(from_cli.final_f.to_bits(), in_memory.final_f.to_bits());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(subgrad(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        subgrad(&["bound", "--which", "polyak"]).status.code(),
        Some(2)
    );
    assert_eq!(
        subgrad(&[
            "run",
            "--instance",
            "/nonexistent.json",
            "--solver",
            "polyak",
            "--iters",
            "1",
            "--trace",
            "/tmp/x"
        ])
        .status
        .code(),
        Some(2)
    );
}
