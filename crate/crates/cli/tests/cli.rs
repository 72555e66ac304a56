//! End-to-end CLI tests via the compiled binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qppa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qppa"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    qppa()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    path
}

const CONFIG: &str = r#"
n_members = 8
n_timestamps = 80
causal = true
seed = 5

[coef_delta]
low = 0.2
high = 0.8

[coef_theta]
low = 0.2
high = 0.8

[coef_beta]
low = 0.2
high = 0.8

[noise]
family = "gaussian_iid"
sigma2 = 0.1
"#;

#[test]
fn simulate_then_test_rejects_the_causal_direction() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "cfg.toml", CONFIG);

    let out = run(
        &["simulate", "--config", "cfg.toml", "--out", "panel.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("panel.csv").exists());

    let out = run(
        &[
            "test",
            "--input",
            "panel.csv",
            "--method",
            "qppa",
            "--direction",
            "both",
            "--out",
            "test.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("x->y"), "{stdout}");
    assert!(stdout.contains("reject"), "{stdout}");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("test.json")).unwrap())
            .unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    assert_eq!(json[0]["direction"], "x->y");
    assert_eq!(json[0]["reject"], true);
    assert_eq!(json[1]["reject"], false);
}

#[test]
fn same_seed_gives_identical_panels() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "cfg.toml", CONFIG);
    assert!(run(
        &["simulate", "--config", "cfg.toml", "--out", "a.csv"],
        dir.path()
    )
    .status
    .success());
    assert!(run(
        &["simulate", "--config", "cfg.toml", "--out", "b.csv"],
        dir.path()
    )
    .status
    .success());
    assert!(run(
        &[
            "simulate",
            "--config",
            "cfg.toml",
            "--out",
            "c.csv",
            "--seed",
            "99"
        ],
        dir.path()
    )
    .status
    .success());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let c = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn wide_panel_input_works() {
    let dir = tempfile::tempdir().unwrap();
    // x drives y with one lag.
    let t = 40;
    let mut xs = vec![0.0_f64; t];
    let mut ys = vec![0.0_f64; t];
    let mut u = 0.37_f64;
    for s in 1..t {
        u = 4.0 * u * (1.0 - u);
        xs[s] = 0.5 * xs[s - 1] + (u - 0.5);
        ys[s] = 0.4 * ys[s - 1] + 0.8 * xs[s - 1] + 0.01 * (s as f64).sin();
    }
    let header: String = format!(
        "country,{}",
        (0..t).map(|i| format!("d{i}")).collect::<Vec<_>>().join(",")
    );
    let row = |name: &str, v: &[f64]| {
        format!(
            "{name},{}",
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        )
    };
    write_file(
        dir.path(),
        "cause.csv",
        &format!("{header}\n{}\n{}\n", row("aa", &xs), row("bb", &xs)),
    );
    write_file(
        dir.path(),
        "effect.csv",
        &format!("{header}\n{}\n{}\n", row("aa", &ys), row("bb", &ys)),
    );

    let out = run(
        &[
            "test",
            "--cause",
            "cause.csv",
            "--effect",
            "effect.csv",
            "--label-cols",
            "country",
            "--direction",
            "x-to-y",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("reject"));
}

#[test]
fn parse_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "bad.csv", "no,panel,columns\n1,2,3\n");
    let out = run(&["test", "--input", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    write_file(dir.path(), "bad.toml", "n_members = -3\n");
    let out = run(
        &["simulate", "--config", "bad.toml", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn statistical_preconditions_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    // Four observations cannot support a lag-1 test.
    let mut long = String::from("member,timestamp,x,y\n");
    for (i, (x, y)) in [(0.1, 0.4), (0.7, 0.2), (0.3, 0.9), (0.8, 0.5)]
        .iter()
        .enumerate()
    {
        long.push_str(&format!("m1,{i},{x},{y}\n"));
    }
    write_file(dir.path(), "tiny.csv", &long);
    let out = run(&["test", "--input", "tiny.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn order_not_found_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    // Random walks do not reject at d = 0.
    let mut long = String::from("member,timestamp,x,y\n");
    let mut u = 0.123_f64;
    let mut x = 0.0_f64;
    let mut y = 0.0_f64;
    for i in 0..120 {
        u = 4.0 * u * (1.0 - u);
        x += u - 0.5;
        u = 4.0 * u * (1.0 - u);
        y += u - 0.5;
        long.push_str(&format!("m1,{i},{x},{y}\n"));
    }
    write_file(dir.path(), "rw.csv", &long);
    let out = run(
        &["adf", "--input", "rw.csv", "--lags", "1", "--max-order", "0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{out:?}");
}

#[test]
fn dh_bb_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "cfg.toml", CONFIG);
    assert!(run(
        &["simulate", "--config", "cfg.toml", "--out", "p.csv"],
        dir.path()
    )
    .status
    .success());
    let out = run(
        &["test", "--input", "p.csv", "--method", "dh-bb"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));

    let out = run(
        &[
            "test",
            "--input",
            "p.csv",
            "--method",
            "dh-bb",
            "--seed",
            "1",
            "--direction",
            "x-to-y",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn study_and_sweep_produce_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "cfg.toml", CONFIG);
    assert!(run(
        &["simulate", "--config", "cfg.toml", "--out", "p.csv"],
        dir.path()
    )
    .status
    .success());

    let out = run(
        &[
            "study",
            "--input",
            "p.csv",
            "--lags",
            "1-2",
            "--methods",
            "qppa,dh",
            "--out",
            "study.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verdict"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("study.json")).unwrap())
            .unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);

    let out = run(
        &[
            "gamma-sweep",
            "--config",
            "cfg.toml",
            "--gammas",
            "0.2:0.8:0.3",
            "--reps",
            "5",
            "--seed",
            "3",
            "--out",
            "sweep.tsv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let tsv = std::fs::read_to_string(dir.path().join("sweep.tsv")).unwrap();
    assert!(tsv.starts_with("gamma\tpower\tfdr"));
    assert_eq!(tsv.lines().count(), 4);
}

#[test]
fn power_fdr_writes_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "cfg.toml", CONFIG);
    let out = run(
        &[
            "power-fdr",
            "--config",
            "cfg.toml",
            "--t-values",
            "50",
            "--n-values",
            "4",
            "--methods",
            "qppa",
            "--reps",
            "5",
            "--seed",
            "8",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("qppa power"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["cells"][0]["n_timestamps"], 50);
}
