use std::path::Path;
use std::process::Command;

const SMOKE: &str = r#"
#include "surfham.h"
#include <stdio.h>

int main(void) {
    SurfhamLayout *layout = NULL;
    SurfhamCell *cell = NULL;
    double zz = 0.0;
    if (surfham_layout_default_cell(&layout) != SURFHAM_STATUS_OK) return 1;
    if (surfham_cell_solve(layout, "A", 0, &cell) != SURFHAM_STATUS_OK) {
        fprintf(stderr, "%s\n", surfham_last_error());
        return 1;
    }
    surfham_cell_coefficient(cell, "ZIZII", &zz);
    printf("%s %zu %g\n", surfham_version(), surfham_cell_qubit_count(cell), zz);
    surfham_cell_free(cell);
    surfham_layout_free(layout);
    return 0;
}
"#;

#[test]
fn header_is_current_and_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/surfham.h")).unwrap();
    for sym in ["surfham_layout_load", "surfham_cell_solve", "surfham_cell_coefficient", "surfham_gate_error", "SURFHAM_STATUS_OK"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(&src, SMOKE).unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-c", "-o"])
        .arg(tmp.path().join("smoke.o"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
