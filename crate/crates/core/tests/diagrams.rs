mod common;

use common::{diagram_goldens, level_resolved, rel_err};
use proptest::prelude::*;

#[test]
fn hand_coded_diagrams_fixed_instance() {
    let (jt, ft) = level_resolved([5000.0, 5230.0, 5470.0], [-210.0, -190.0, -205.0], [2.0, 3.0, 4.0], [0.1, 0.17]);
    for g in diagram_goldens(&jt, &ft) {
        assert!(g.hand != 0.0, "({}) vanished", g.name);
        assert!(rel_err(g.engine, g.hand) < 1e-12, "({}) engine {} hand {}", g.name, g.engine, g.hand);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hand_coded_diagrams_on_arbitrary_values(
        f in prop::array::uniform3(-60.0f64..60.0),
        a in prop::array::uniform3(-260.0f64..-150.0),
        j in prop::array::uniform3(-8.0f64..8.0),
        spread in prop::array::uniform2(-0.3f64..0.3),
    ) {
        let freqs = [5000.0 + f[0], 5330.0 + f[1], 5710.0 + f[2]];
        let (jt, ft) = level_resolved(freqs, a, j, spread);
        for g in diagram_goldens(&jt, &ft) {
            prop_assert!(rel_err(g.engine, g.hand) < 1e-12, "({}) engine {} hand {}", g.name, g.engine, g.hand);
        }
    }
}
