#![allow(dead_code)]

use surfham::device::{CouplerSpec, CouplingEdge, DeviceLayout, EdgeKind, TransmonSpec};
use surfham::perturbation::{enumerate_diagrams, evaluate_diagram, Diagram, FrequencyTable, LevelJTable, PertOptions};

pub fn transmon(id: &str, freq: f64, anharmonicity: f64, n_levels: usize) -> TransmonSpec {
    TransmonSpec {
        id: id.into(),
        freq_idle: freq,
        anharmonicity,
        n_levels,
        t1: None,
        tunable: true,
        band: Some([freq - 500.0, freq + 500.0]),
    }
}

/// Two transmons sharing one harmonic coupler, no direct coupling.
pub fn coupler_pair(f1: f64, f2: f64, fc: f64, g: f64) -> DeviceLayout {
    DeviceLayout {
        qubits: vec![transmon("A", f1, -200.0, 4), transmon("B", f2, -200.0, 4)],
        couplers: vec![CouplerSpec {
            id: "C".into(),
            freq: fc,
            band: [fc - 2000.0, fc + 2000.0],
            n_levels: 3,
            anharmonicity: 0.0,
        }],
        edges: vec![
            CouplingEdge::new("A", "C", g, EdgeKind::QubitCoupler),
            CouplingEdge::new("B", "C", g, EdgeKind::QubitCoupler),
        ],
        ..Default::default()
    }
}

/// Three directly coupled transmons (all three pairs) with no couplers.
pub fn direct_triangle(freqs: [f64; 3], anharm: f64, js: [f64; 3]) -> DeviceLayout {
    DeviceLayout {
        qubits: vec![
            transmon("A", freqs[0], anharm, 4),
            transmon("B", freqs[1], anharm, 4),
            transmon("C", freqs[2], anharm, 4),
        ],
        edges: vec![
            CouplingEdge::new("A", "B", js[0], EdgeKind::Radial),
            CouplingEdge::new("B", "C", js[1], EdgeKind::Radial),
            CouplingEdge::new("A", "C", js[2], EdgeKind::Radial),
        ],
        ..Default::default()
    }
}

/// Three-qubit tables where every level pair carries its own `J`.
pub fn level_resolved(freqs: [f64; 3], anharm: [f64; 3], js: [f64; 3], spread: [f64; 2]) -> (LevelJTable, FrequencyTable) {
    let ft = FrequencyTable::duffing(&freqs, &anharm, 4);
    let mut jt = LevelJTable::new(3);
    for (p, &(x, y)) in [(0, 1), (1, 2), (0, 2)].iter().enumerate() {
        for m in 0..3u8 {
            for n in 0..3u8 {
                jt.set(x, y, m, n, js[p] * (1.0 + spread[0] * m as f64 + spread[1] * n as f64));
            }
        }
    }
    (jt, ft)
}

fn find<'a>(ds: &'a [Diagram], marked: [u8; 3], path: [[u8; 3]; 2]) -> &'a Diagram {
    let fwd = [path[0].to_vec(), path[1].to_vec()];
    let rev = [path[1].to_vec(), path[0].to_vec()];
    ds.iter()
        .find(|d| d.marked == marked && (d.path == fwd || d.path == rev))
        .unwrap_or_else(|| panic!("no diagram {marked:?} via {path:?}"))
}

/// One reference diagram: engine value and hand-coded value, both unnormalized.
pub struct Golden {
    pub name: &'static str,
    pub engine: f64,
    pub hand: f64,
}

/// Engine versus hand-coded third-order diagrams (d), (e), (g), (i) of a
/// three-qubit register.
///
/// (d) and (e) are `ZZI` diagrams and take the parity-rule sign of each
/// marked level; (e)'s first loop runs through `|200⟩` and `|101⟩`, the only
/// single-hop cycle carrying `J_{1̄2} J_{23} J_{1̄3}` from `|110⟩`. (g) and (i)
/// are evaluated for `ZZI`, where `|111⟩` has sign `+1`.
pub fn diagram_goldens(jt: &LevelJTable, ft: &FrequencyTable) -> Vec<Golden> {
    let opts = PertOptions {
        resonance_floor: 0.0,
        max_ratio: f64::INFINITY,
    };
    let ds = enumerate_diagrams("ZZI".parse().unwrap(), 3, jt, ft).unwrap();
    let ev = |m, p| evaluate_diagram(find(&ds, m, p), jt, ft, &opts).unwrap();
    let e = |o: [u8; 3]| ft.energy(&o);

    let j12 = jt.bar(0, 0, 1, 0);
    let j23 = jt.bar(1, 0, 2, 0);
    let j13 = jt.bar(0, 0, 2, 0);
    let d_engine = ev([1, 1, 0], [[0, 1, 1], [1, 0, 1]]) + ev([0, 1, 1], [[1, 0, 1], [1, 1, 0]]) + ev([1, 0, 1], [[1, 1, 0], [0, 1, 1]]);
    let d_hand = 2.0
        * j12
        * j23
        * j13
        * (1.0 / ((e([1, 1, 0]) - e([0, 1, 1])) * (e([1, 1, 0]) - e([1, 0, 1])))
            - 1.0 / ((e([0, 1, 1]) - e([1, 0, 1])) * (e([0, 1, 1]) - e([1, 1, 0])))
            - 1.0 / ((e([1, 0, 1]) - e([1, 1, 0])) * (e([1, 0, 1]) - e([0, 1, 1]))));

    let j1b2 = jt.bar(0, 1, 1, 0);
    let j1b3 = jt.bar(0, 1, 2, 0);
    let e_engine = ev([1, 1, 0], [[2, 0, 0], [1, 0, 1]]) + ev([1, 0, 1], [[1, 1, 0], [2, 0, 0]]);
    let e_hand = 4.0
        * j1b2
        * j23
        * j1b3
        * (1.0 / ((e([1, 1, 0]) - e([2, 0, 0])) * (e([1, 1, 0]) - e([1, 0, 1])))
            - 1.0 / ((e([1, 0, 1]) - e([1, 1, 0])) * (e([1, 0, 1]) - e([2, 0, 0]))));

    let g_engine = ev([1, 1, 1], [[2, 0, 1], [2, 1, 0]]);
    let g_hand = 4.0 * j1b2 * j23 * j1b3 / ((e([1, 1, 1]) - e([2, 0, 1])) * (e([1, 1, 1]) - e([2, 1, 0])));

    let j12b = jt.bar(0, 0, 1, 1);
    let j2b3b = jt.bar(1, 1, 2, 1);
    let j13b = jt.bar(0, 0, 2, 1);
    let i_engine = ev([1, 1, 1], [[0, 2, 1], [0, 1, 2]]);
    let i_hand = 8.0 * j12b * j2b3b * j13b / ((e([1, 1, 1]) - e([0, 2, 1])) * (e([1, 1, 1]) - e([0, 1, 2])));

    vec![
        Golden { name: "d", engine: d_engine, hand: d_hand },
        Golden { name: "e", engine: e_engine, hand: e_hand },
        Golden { name: "g", engine: g_engine, hand: g_hand },
        Golden { name: "i", engine: i_engine, hand: i_hand },
    ]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
