use std::path::Path;
use std::process::{Command, Output};

fn surfham(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfham"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn surfham")
}

#[test]
fn validate_default_and_shipped_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfham(dir.path(), &["layout", "validate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("5 qubits"));

    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sycamore_like.layout");
    let out = surfham(dir.path(), &["--layout", shipped, "layout", "validate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("53 qubits"));
}

#[test]
fn usage_and_io_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(surfham(dir.path(), &["bogus"]).status.code(), Some(1));
    assert_eq!(surfham(dir.path(), &["--layout", "missing.layout", "layout", "validate"]).status.code(), Some(1));
    assert_eq!(surfham(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn generated_layout_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfham(dir.path(), &["layout", "generate", "--rows", "3", "--cols", "3", "-o", "g.layout"]);
    assert_eq!(out.status.code(), Some(0));
    let out = surfham(dir.path(), &["--layout", "g.layout", "layout", "validate"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn pauli_table_then_rerender_as_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfham(dir.path(), &["--out-dir", "o", "pauli", "table"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("o/A_pauli.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("string,alpha_MHz,path"));
    // Weights 0..=3 of five qubits.
    assert_eq!(lines.count(), 1 + 5 + 10 + 10);

    let out = surfham(dir.path(), &["--out-dir", "o", "--format", "svg", "report", "render", "--input", "o/A_pauli.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("o/A_pauli.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn calibrate_off_writes_bias_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfham(dir.path(), &["--out-dir", "o", "calibrate", "off"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "json"))
        .expect("bias report");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["cell"], "A");
    assert!(v.get("bias").is_some());
}
