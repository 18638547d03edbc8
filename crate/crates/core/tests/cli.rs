use std::path::Path;
use std::process::Command;

use pif::experiment::{ClusterConfig, ExperimentConfig};
use pif::grid::GridPlan;
use pif::io::MatrixFile;

fn pif() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pif"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{:?}\n{}", cmd, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_fig2() -> ExperimentConfig {
    let mut c = ExperimentConfig::new_fig2(ClusterConfig {
        n_points: 80,
        n_diagrams: 3,
        density_grid: GridPlan::auto(40),
        intensity_grid: GridPlan::auto(24),
        ..ClusterConfig::desk()
    });
    c.seed = Some(17);
    c
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn fig2_is_deterministic_and_restartable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("fig2.json");
    small_fig2().write(&cfg).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(pif().args(["run", "fig2", "--config"]).arg(&cfg).arg("--out-dir").arg(&a));
    run_ok(pif().args(["--threads", "2", "run", "fig2", "--config"]).arg(&cfg).arg("--out-dir").arg(&b));

    let manifest: serde_json::Value = serde_json::from_slice(&read(&a.join("manifest.json"))).unwrap();
    let outputs: Vec<String> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert!(outputs.iter().any(|o| o == "coords.csv"));
    for rel in &outputs {
        assert!(a.join(rel).exists(), "{rel} listed but missing");
        if rel.ends_with(".csv") {
            assert_eq!(read(&a.join(rel)), read(&b.join(rel)), "{rel} differs between runs");
        }
    }

    // Re-run each stage from the saved intermediates.
    let work = tmp.path().join("re");
    let item = "0004";
    run_ok(
        pif().args(["field", "--mode", "kde", "--h", "0.07", "--grid", "40", "40", "--in"])
            .arg(a.join(format!("clouds/{item}.csv")))
            .arg("--out")
            .arg(work.join("field.csv")),
    );
    assert_eq!(read(&work.join("field.csv")), read(&a.join(format!("fields/{item}.csv"))));
    run_ok(pif().args(["persist", "--direction", "super", "--maxdim", "1", "--in"]).arg(work.join("field.csv")).arg("--out").arg(work.join("diag.csv")));
    assert_eq!(read(&work.join("diag.csv")), read(&a.join(format!("diagrams/{item}.csv"))));

    let meta = MatrixFile::read(&a.join(format!("intensities/{item}.csv"))).unwrap();
    let bounds: Vec<String> = ["x_lo", "x_hi", "y_lo", "y_hi"].iter().map(|k| meta.get(k).unwrap().to_string()).collect();
    run_ok(
        pif().args(["intensity", "--tau", "0.1", "--grid", "24", "24", "--bounds"])
            .args(&bounds)
            .arg("--in")
            .arg(work.join("diag.csv"))
            .arg("--out")
            .arg(work.join("int.csv")),
    );
    assert_eq!(read(&work.join("int.csv")), read(&a.join(format!("intensities/{item}.csv"))));

    let mut ints: Vec<_> = std::fs::read_dir(a.join("intensities")).unwrap().map(|e| e.unwrap().path()).collect();
    ints.sort();
    run_ok(pif().args(["analyze", "dist", "--in"]).args(&ints).arg("--out").arg(work.join("delta.csv")));
    assert_eq!(read(&work.join("delta.csv")), read(&a.join("delta.csv")));
    run_ok(pif().args(["analyze", "mds", "--k", "2", "--in"]).arg(work.join("delta.csv")).arg("--out").arg(work.join("emb.csv")));
    assert_eq!(read(&work.join("emb.csv")), read(&a.join("embedding.csv")));

    // Averaging and the two-sample test from directories of intensities.
    run_ok(pif().args(["intensity", "avg", "--in"]).args(&ints[..2]).arg("--out").arg(work.join("avg.csv")));
    let (da, db) = (work.join("ga"), work.join("gb"));
    for (k, p) in ints.iter().enumerate() {
        let dir = if k < 3 { &da } else { &db };
        std::fs::create_dir_all(dir).unwrap();
        std::fs::copy(p, dir.join(p.file_name().unwrap())).unwrap();
    }
    let json = work.join("test.json");
    run_ok(pif().args(["--seed", "3", "infer", "test", "--perms", "99", "--a"]).arg(&da).arg("--b").arg(&db).arg("--json").arg(&json));
    let v: serde_json::Value = serde_json::from_slice(&read(&json)).unwrap();
    assert_eq!(v["B"], 99);
    assert_eq!(v["n1"], 3);
    assert!(v["T1"].as_f64().unwrap() > 0.0);
    let p = v["p"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn stage_commands_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    run_ok(pif().args(["--seed", "5", "synth", "--pop", "contaminated", "--q", "0.3", "--n", "50", "--out"]).arg(d.join("c.csv")));
    let again = d.join("c2.csv");
    run_ok(pif().args(["synth", "--pop", "contaminated", "--q", "0.3", "--n", "50", "--seed", "5", "--out"]).arg(&again));
    assert_eq!(read(&d.join("c.csv")), read(&again));
    run_ok(pif().args(["field", "--mode", "dist", "--grid", "12", "10", "--bounds", "-1.5", "1.5", "-1.5", "1.5", "--in"]).arg(d.join("c.csv")).arg("--out").arg(d.join("f.csv")));
    run_ok(pif().args(["persist", "--in"]).arg(d.join("f.csv")).arg("--out").arg(d.join("dg.csv")));
    let text = String::from_utf8(read(&d.join("dg.csv"))).unwrap();
    assert!(text.starts_with("dim,birth,death\n"));
    run_ok(pif().args(["intensity", "--tau", "0.05", "--g1", "2", "--grid", "10", "12", "--in"]).arg(d.join("dg.csv")).arg("--out").arg(d.join("i.csv")));
    run_ok(pif().args(["analyze", "dist", "--in"]).arg(d.join("i.csv")).arg(d.join("i.csv")).arg("--out").arg(d.join("m.csv")));
    run_ok(
        pif().args(["analyze", "spectral", "--scale", "1", "--k", "1", "--kmeans", "1", "--in"])
            .arg(d.join("m.csv"))
            .arg("--out")
            .arg(d.join("labels.csv")),
    );
    assert_eq!(String::from_utf8(read(&d.join("labels.csv"))).unwrap(), "id,cluster\n0,0\n1,0\n");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"fig4","fig4":{"q_values":[0.0],"n_points":10,"n_diagrams":2,"h":0.1,"tau":0.0,"permutations":0,"trials":1}}"#).unwrap();
    let out = pif().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fig4.tau") && err.contains("fig4.permutations"), "{err}");

    let good = tmp.path().join("good.json");
    ExperimentConfig::new_fig4(pif::inference::PowerConfig::full_scale()).write(&good).unwrap();
    let out = pif().args(["validate", "--config"]).arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"master_source\": \"default\""));

    let out = pif().args(["persist", "--in"]).arg(tmp.path().join("missing.csv")).args(["--out", "x.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = pif().args(["field", "--mode", "kde", "--in", "x.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
