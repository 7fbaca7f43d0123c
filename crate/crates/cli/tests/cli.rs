use std::path::Path;
use std::process::{Command, Output};

use bergman::laplacian::discrete_spectrum;
use serde_json::Value;

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .env_remove("BERGMAN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn manifest(o: &Output) -> Value {
    let mut stream = serde_json::Deserializer::from_slice(&o.stderr).into_iter::<Value>();
    stream.next().expect("manifest on stderr").unwrap()
}

fn write_identity(dir: &Path) -> String {
    let p = dir.join("identity.json");
    std::fs::write(&p, r#"{"re": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
    p.display().to_string()
}

#[test]
fn spectrum_table_matches_the_library() {
    let o = bergman(&["spectrum", "--N", "5", "--variant", "substituted", "--out", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    let lib = discrete_spectrum(5);
    assert_eq!(rows.len(), 9);
    for (row, e) in rows.iter().zip(&lib.entries) {
        assert_eq!(row[3].parse::<f64>().unwrap(), e.eig_printed);
        assert_eq!(row[4].parse::<f64>().unwrap(), e.eig_substituted);
        assert_eq!(row[5], row[4]);
    }
    let m = manifest(&o);
    assert_eq!(m["command"], "spectrum");
    assert_eq!(m["parameters"]["variant"], "substituted");
    assert!(m["notes"][0].as_str().unwrap().contains("enumerated 9 labels"));
}

#[test]
fn continuous_spectrum_respects_the_floor() {
    let o = bergman(&["spectrum", "--N", "5", "--kind", "continuous", "--tau-points", "3", "--m2", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 9);
    let min = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert_eq!(min, 8.0);
    let centre = rows.iter().find(|r| r[1] == "0" && r[2] == "0").unwrap();
    assert_eq!(centre[4].parse::<f64>().unwrap(), 0.125);
}

#[test]
fn check_group_on_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_identity(dir.path());
    let o = bergman(&["check-group", "--in", &id]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[1] == "0"));
}

#[test]
fn non_members_fail_with_the_right_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scaled.json");
    std::fs::write(&p, r#"{"re": [[2,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "im": [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#)
        .unwrap();
    let path = p.display().to_string();
    let check = bergman(&["check-group", "--in", &path]);
    assert_eq!(check.status.code(), Some(3));
    assert_eq!(csv_rows(&check).len(), 8);
    assert_eq!(bergman(&["kak", "--in", &path]).status.code(), Some(2));
    assert_eq!(bergman(&["kak", "--in", "/nonexistent.json"]).status.code(), Some(2));
    std::fs::write(&p, "{\"re\": [[1]]}").unwrap();
    let bad = bergman(&["check-group", "--in", &path]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&bad.stderr).lines().count(), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bergman(&["spectrum", "--N", "x"]).status.code(), Some(2));
    assert_eq!(bergman(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(bergman(&["measure-norm", "--N", "3", "--samples", "10"]).status.code(), Some(2));
    assert_eq!(bergman(&["coords", "--lambda", "0.1,0.3"]).status.code(), Some(2));
}

#[test]
fn kak_of_the_identity_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_identity(dir.path());
    let o = bergman(&["kak", "--in", &id, "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["columns"][0], "factor");
    assert_eq!(v["rows"].as_array().unwrap().len(), 32);
    let notes = manifest(&o)["notes"].to_string();
    assert!(notes.contains("lambda = (0, 0)"));
}

#[test]
fn seeded_runs_are_byte_reproducible() {
    let args = ["field", "--action", "sample", "--N", "5", "--seed", "42"];
    let (a, b) = (bergman(&args), bergman(&args));
    assert_eq!(a.stdout, b.stdout);
    let other = bergman(&["field", "--action", "sample", "--N", "5", "--seed", "43"]);
    assert_ne!(a.stdout, other.stdout);

    let from_env = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["field", "--action", "sample", "--N", "5"])
        .env("BERGMAN_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(from_env.stdout, a.stdout);
    assert_eq!(manifest(&from_env)["seed"], 42);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# free field\nN = 3\nm2 = 2.5\ntau_points = 0\n").unwrap();
    let cfg = cfg.display().to_string();
    let o = bergman(&["field", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(&o);
    assert_eq!(m["parameters"]["N"], "3");
    assert_eq!(m["parameters"]["m2"], "2.5");
    assert_eq!(csv_rows(&o).len(), 4);
    let o = bergman(&["field", "--config", &cfg, "--N", "5"]);
    assert_eq!(manifest(&o)["parameters"]["N"], "5");
    assert_eq!(csv_rows(&o).len(), 9);

    std::fs::write(dir.path().join("bad.cfg"), "N = five\n").unwrap();
    let bad = bergman(&["field", "--config", &dir.path().join("bad.cfg").display().to_string()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_file_gets_a_manifest_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("haar.csv");
    let o = bergman(&["haar", "--points", "4", "--output", &out.display().to_string()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let table = std::fs::read_to_string(&out).unwrap();
    assert_eq!(table.lines().count(), 1 + 6);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("haar.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "haar");
    assert_eq!(side["status"], "ok");
    assert!(side["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn algebra_tables_for_both_bases() {
    let ok = bergman(&["algebra"]);
    assert_eq!(ok.status.code(), Some(0));
    let rows = csv_rows(&ok);
    assert!(rows.iter().all(|r| r[3] == r[4]));
    let printed = bergman(&["algebra", "--basis", "printed"]);
    let rows = csv_rows(&printed);
    assert!(rows.iter().any(|r| r[3] != r[4]));
}

#[test]
fn omega_and_coordinates() {
    let o = bergman(&["omega", "--N", "4", "--seed", "1", "--random-k", "--lambda", "0.4,0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    let (a, b) = (rows[0][1].parse::<f64>().unwrap(), rows[2][1].parse::<f64>().unwrap());
    assert!((a - b).abs() < 1e-9);

    let o = bergman(&["coords", "--N", "4", "--lambda", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 15);
    let r05 = rows.iter().find(|r| r[0] == "05").unwrap();
    assert!((r05[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn star_coefficients_report_the_structural_fit_residual() {
    let o = bergman(&["star-coeffs", "--N", "4..5", "--points", "3"]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "4");
    let fit: f64 = rows[0][5].parse().unwrap();
    let anti: f64 = rows[0][7].parse().unwrap();
    assert!(anti < 1e-5);
    assert_eq!(o.status.code(), Some(if fit > 1e-5 { 3 } else { 0 }));
    assert_eq!(manifest(&o)["status"], if fit > 1e-5 { "tolerance_failure" } else { "ok" });
}

#[test]
fn laplacian_checks() {
    let o = bergman(&["laplacian-check", "--N", "5", "--count", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o).len(), 3);
    // The ω-conjugated radial formula does not reproduce the full operator.
    let r = bergman(&["laplacian-check", "--mode", "radial"]);
    assert_eq!(r.status.code(), Some(3));
    let rows = csv_rows(&r);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|row| row[6].parse::<f64>().unwrap() < 1e-3));
}

#[test]
fn two_point_and_measure_checks() {
    let o = bergman(&["field", "--action", "two-point", "--draws", "20000", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(manifest(&o)["parameters"]["action"], "two-point");
    let o = bergman(&["measure-norm", "--N", "5", "--samples", "200000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert!((rows[0][2].parse::<f64>().unwrap() - 1.0).abs() < 0.05);
    assert!(stdout(&o).starts_with("N,samples,estimate"));
}
