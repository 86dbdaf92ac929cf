use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lattice-bpb"))
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const LINFTY: &str = r#"
command = "bpb-linfty"
dims = [5, 4]
norm = { family = "weighted_l1", weights = [0.5, 1, 1.5, 2] }
epsilon = 0.6
seed = 42
count = 30
"#;

#[test]
fn empty_suite_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "");
    let out = run(&["bpb-linfty"], &cfg, &dir.path().join("out"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("no experiments"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", LINFTY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["bpb-linfty"], &cfg, &a).status.success());
    assert!(run(&["bpb-linfty"], &cfg, &b).status.success());
    for f in ["bpb-linfty-0.csv", "bpb-linfty-0.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs");
        assert!(!x.is_empty());
    }
    let csv = std::fs::read_to_string(a.join("bpb-linfty-0.csv")).unwrap();
    assert!(csv.starts_with(
        "instance_id,n,m,norm_family,epsilon,eta_internal,eta_definition,precond_met,dist_ops,dist_points,norm_T,norm_Tu0,ledger_ok,micros\n"
    ));
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn seed_flag_changes_the_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", LINFTY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["bpb-linfty"], &cfg, &a).status.success());
    let out = bin()
        .args(["bpb-linfty"])
        .arg(&cfg)
        .args(["--seed", "7", "--out"])
        .arg(&b)
        .output()
        .unwrap();
    assert!(out.status.success());
    let f = "bpb-linfty-0.json";
    assert_ne!(
        std::fs::read(a.join(f)).unwrap(),
        std::fs::read(b.join(f)).unwrap()
    );
}

#[test]
fn infeasible_row_is_flagged_alone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mixed.toml",
        r#"
command = "bpb-linfty"
kind = "explicit"
mode = "rational"
norm = { family = "l1" }
epsilon = 0.9
instances = [
  { matrix = [["1/2", 0], [0, "1/2"]], x0 = [1, 1] },
  { matrix = [["1/2", "1/2"]], x0 = [1, -1] },
  { matrix = [["3/5", 0, 0], [0, "1/5", "1/5"]], x0 = [-1, 1, 1] },
]
"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&["bpb-linfty"], &cfg, &out_dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("bpb-linfty-0.json")).unwrap())
            .unwrap();
    let recs = report["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[1]["precond_met"], false);
    assert_eq!(recs[1]["outcome"]["status"], "failed");
    for k in [0, 2] {
        assert_eq!(recs[k]["precond_met"], true);
        assert_eq!(recs[k]["outcome"]["verified"], true);
        assert_eq!(
            recs[k]["outcome"]["dist_ops"],
            serde_json::json!(["0", "1"])
        );
    }
    assert_eq!(report["summary"]["violations"], 0);
}

#[test]
fn verify_accepts_reports_and_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", LINFTY);
    let out_dir = dir.path().join("out");
    assert!(run(&["bpb-linfty", "--mode", "rational"], &cfg, &out_dir)
        .status
        .success());
    let report = out_dir.join("bpb-linfty-0.json");
    let ok = bin().arg("verify").arg(&report).output().unwrap();
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("30 certificates, 0 failed"));

    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rec = &mut doc["records"][0];
    rec["outcome"]["u0"][0] = serde_json::json!(["1", "3"]);
    let tampered = write(dir.path(), "one.json", &rec.to_string());
    let bad = bin().arg("verify").arg(&tampered).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn config_errors_abort_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for (name, text) in [
        ("big.toml", "dims = [30, 2]\nnorm = { family = \"l1\" }\nepsilon = 0.5\n"),
        ("eps.toml", "dims = [3, 2]\nnorm = { family = \"l1\" }\nepsilon = 1.5\n"),
        ("lp.toml", "dims = [3, 2]\nnorm = { family = \"lp\", p = 2.0 }\nepsilon = 0.5\nmode = \"rational\"\n"),
        ("junk.toml", "dims = [3, 2\n"),
    ] {
        let cfg = write(dir.path(), name, text);
        let out = run(&["bpb-linfty"], &cfg, &out_dir);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{name}");
    }
}

#[test]
fn other_commands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "suite.json",
        r#"{"experiment": [
            {"name": "conv", "command": "converse", "kind": "converse_instance", "dims": [1, 2, 2],
             "norm": {"family": "l1"}, "epsilon": 0.9, "count": 3, "u_norms": [0.2, 0.4]},
            {"name": "mod", "command": "modulus", "dims": [2], "norm": {"family": "lp", "p": 3.0},
             "epsilons": [0.2, 0.8], "samples": 500},
            {"name": "seq", "command": "bpb-c0", "dims": [3, 2], "tail": 3, "norm": {"family": "l1"},
             "epsilon": 0.3, "count": 5}
        ]}"#,
    );
    let out = run(&["run"], &cfg, &out_dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let conv = std::fs::read_to_string(out_dir.join("conv.csv")).unwrap();
    assert_eq!(conv.lines().count(), 7);
    let modulus: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("mod.json")).unwrap()).unwrap();
    assert_eq!(modulus["violations"], 0);
    assert_eq!(modulus["validations"].as_array().unwrap().len(), 5);
    let seq = std::fs::read_to_string(out_dir.join("seq.csv")).unwrap();
    assert!(seq
        .lines()
        .skip(1)
        .all(|l| l.starts_with(|c: char| c.is_ascii_digit()) && l.contains(",6,2,l1,")));
}
