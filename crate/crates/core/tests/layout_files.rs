use surfham::device::{default_cell, generate_sycamore_like, load_layout, DeviceDefaults};

const SHIPPED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sycamore_like.layout");

#[test]
fn shipped_layout_is_the_seeded_generator_output() {
    let shipped = load_layout(SHIPPED).unwrap();
    shipped.validate().unwrap();
    assert_eq!(shipped.qubits.len(), 53);
    assert_eq!(shipped.cells.len(), 33);
    let fresh = generate_sycamore_like(4, 8, &DeviceDefaults::default(), 7).unwrap();
    assert_eq!(shipped, fresh);
}

#[test]
fn toml_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let layout = default_cell();

    let toml_path = dir.path().join("cell.layout");
    layout.save(&toml_path).unwrap();
    assert_eq!(load_layout(&toml_path).unwrap(), layout);

    let json_path = dir.path().join("cell.json");
    std::fs::write(&json_path, serde_json::to_string(&layout).unwrap()).unwrap();
    assert_eq!(load_layout(&json_path).unwrap(), layout);
}

#[test]
fn every_shipped_cell_extracts_a_valid_subcircuit() {
    let shipped = load_layout(SHIPPED).unwrap();
    for cell in &shipped.cells {
        let sub = shipped.cell_subcircuit(&cell.label).unwrap();
        sub.validate().unwrap();
        assert_eq!(sub.qubits.len(), 5, "cell {}", cell.label);
        assert_eq!(sub.couplers.len(), 4, "cell {}", cell.label);
    }
}

#[test]
fn missing_file_is_an_error() {
    assert!(load_layout("/nonexistent/surfham.layout").is_err());
}
