use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudovem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    let text = std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()));
    serde_json::from_str(&text).expect("valid json")
}

fn omegas(dir: &Path) -> Vec<f64> {
    let v = json(dir.join("frequencies.json"));
    v["result"]["frequencies"].as_array().expect("frequencies").iter().map(|w| w.as_f64().unwrap()).collect()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn mesh_t1_has_two_triangles_per_square() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["mesh", "--family", "t1", "--n", "16", "--domain", "square", "--out", "m.poly"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(tmp.path().join("m.quality.json"));
    assert_eq!(report["cell_count"], 512);
    assert!(tmp.path().join("m.poly").exists());
    let manifest = json(tmp.path().join("pseudovem-out/mesh.manifest.json"));
    assert_eq!(manifest["command"], "mesh");
    assert_eq!(manifest["config"]["mesh.family"], "t1");
    assert!(manifest["mesh_checksums"]["mesh"].as_str().unwrap().len() == 64);
}

#[test]
fn disk_mesh_hits_the_requested_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["mesh", "--family", "t6", "--n", "115", "--domain", "disk", "--out-dir", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cells = json(tmp.path().join("o/mesh.quality.json"))["cell_count"].as_f64().unwrap();
    assert!((cells - 115.0).abs() <= 0.05 * 115.0, "{cells} cells");
}

#[test]
fn invalid_arguments_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["mesh", "--family", "t6", "--domain", "square"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("t6 requires disk"), "{}", stderr(&out));

    let out = run(tmp.path(), &["solve", "--family", "t1", "--n", "4", "--count", "0"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run(tmp.path(), &["study", "--test", "9"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown test"), "{}", stderr(&out));

    let out = run(tmp.path(), &["solve", "--n", "4", "--nu", "0.7"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run(tmp.path(), &["solve", "--n", "4", "--gamma", "-1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run(tmp.path(), &["mesh", "--family", "t9", "--n", "4"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn mesh_problems_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--mesh", "missing.poly"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    std::fs::write(tmp.path().join("bad.poly"), "this is not a mesh\n").unwrap();
    let out = run(tmp.path(), &["solve", "--mesh", "bad.poly"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn singular_system_exits_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--family", "t2", "--n", "6", "--gamma", "0"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("singular"), "{}", stderr(&out));
}

#[test]
fn solve_matches_published_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--family", "t1", "--n", "64", "--nu", "0.35", "--count", "4", "--out-dir", "a"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let w = omegas(&tmp.path().join("a"));
    assert_eq!(w.len(), 4);
    assert!((w[0] - 4.1884).abs() <= 0.01 * 4.1884, "{w:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count() >= 4, "{stdout}");

    let out = run(tmp.path(), &["solve", "--family", "t1", "--n", "16", "--nu", "0.5", "--count", "1", "--out-dir", "b"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let w = omegas(&tmp.path().join("b"));
    assert!((w[0] - 4.1132).abs() <= 0.01 * 4.1132, "{w:?}");
    assert_eq!(json(tmp.path().join("b/frequencies.json"))["incompressible_limit"], true);
}

#[test]
fn solve_writes_vtk_matrices_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &[
            "solve", "--family", "t2", "--n", "4", "--count", "2", "--vtk", "modes.vtu", "--mesh-out", "used.poly",
            "--dump-matrices", "mtx", "--out-dir", "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let vtu = std::fs::read_to_string(tmp.path().join("modes.vtu")).unwrap();
    assert!(vtu.contains("VTKFile") && vtu.contains("u_magnitude_1") && vtu.contains("pseudostress_2"));
    let k = std::fs::read_to_string(tmp.path().join("mtx/K.mtx")).unwrap();
    assert!(k.starts_with("%%MatrixMarket matrix coordinate real"));
    assert!(tmp.path().join("mtx/M.mtx").exists());

    let manifest = json(tmp.path().join("o/solve.manifest.json"));
    let outputs = manifest["outputs"].as_object().unwrap();
    for name in ["frequencies.json", "frequencies.csv", "modes.vtu", "used.poly", "K.mtx"] {
        assert!(outputs.keys().any(|k| k.ends_with(name)), "{name} missing from {outputs:?}");
    }
    for phase in ["mesh", "assemble", "solve"] {
        assert!(manifest["timings_seconds"][phase].is_number(), "{phase}");
    }
    assert!(manifest["threads"].as_u64().unwrap() >= 1);

    // the written mesh solves to the same frequencies
    let again = run(tmp.path(), &["solve", "--mesh", "used.poly", "--count", "2", "--out-dir", "p"]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(omegas(&tmp.path().join("o")), omegas(&tmp.path().join("p")));
}

#[test]
fn flags_override_config_values() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.cfg"),
        "[mesh]\nfamily = t1\nn = 6\n[material]\nnu = 0.49\n[solver]\ncount = 3\n[output]\ndir = from-config\n",
    )
    .unwrap();
    let out = run(tmp.path(), &["solve", "--config", "run.cfg", "--nu", "0.3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dir = tmp.path().join("from-config");
    let manifest = json(dir.join("solve.manifest.json"));
    assert_eq!(manifest["config"]["material.nu"], "0.3");
    assert_eq!(manifest["config"]["mesh.n"], "6");
    assert_eq!(omegas(&dir).len(), 3);
    assert_eq!(json(dir.join("frequencies.json"))["cells"], 72);
}

#[test]
fn study_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["r1", "r2"] {
        let out = run(tmp.path(), &["study", "--test", "1", "--families", "t1", "--out-dir", dir]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let (a, b) = (csv_files(&tmp.path().join("r1")), csv_files(&tmp.path().join("r2")));
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
    let csv = std::fs::read_to_string(&a[0]).unwrap();
    assert!(csv.starts_with("nu,gamma,index,N=16,N=32,N=64,alpha,extrapolated,reference"), "{csv}");
    let summary = json(tmp.path().join("r1/summary.json"));
    assert!(summary.to_string().contains("pass"), "{summary}");
    assert!(tmp.path().join("r1/study.manifest.json").exists());
}

#[test]
fn study_from_config_with_one_refinement_has_no_fit() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("s.cfg"),
        "[study]\nfamily = t2\ndomain = square\nrefinements = 6\nnu = 0.35\ncount = 2\n[output]\ndir = out\n",
    )
    .unwrap();
    let out = run(tmp.path(), &["study", "--config", "s.cfg"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let files = csv_files(&tmp.path().join("out"));
    assert_eq!(files.len(), 1);
    let csv = std::fs::read_to_string(&files[0]).unwrap();
    let row = csv.lines().nth(1).expect("data row");
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols.len(), 7, "{csv}");
    assert!(cols[3].parse::<f64>().is_ok());
    assert!(cols[4].parse::<f64>().is_err() && cols[5].parse::<f64>().is_err(), "{row}");
}

#[test]
fn sweep_writes_one_line_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["sweep", "--family", "t1", "--n", "4,8", "--nu", "0.3,0.5", "--gamma", "1,8", "--count", "2", "--out-dir", "s"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,nu,gamma,h,omega_1,omega_2");
    assert_eq!(lines.len(), 1 + 8);
    assert!(tmp.path().join("s/sweep.manifest.json").exists());
}
