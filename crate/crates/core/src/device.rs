//! Chip descriptions: transmons, tunable couplers, the symmetric coupling
//! graph and the overlapping five-qubit unit cells.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relaxation time assumed when a layout omits `t1`, in ns.
pub const DEFAULT_T1_NS: f64 = 20_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    pub id: String,
    /// f^{1→0} in MHz.
    pub freq_idle: f64,
    /// δ in MHz, negative for transmons.
    pub anharmonicity: f64,
    pub n_levels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default)]
    pub tunable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
}

impl TransmonSpec {
    pub fn t1_ns(&self) -> f64 {
        self.t1.unwrap_or(DEFAULT_T1_NS)
    }

    pub fn t1_is_placeholder(&self) -> bool {
        self.t1.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplerSpec {
    pub id: String,
    pub freq: f64,
    pub band: [f64; 2],
    pub n_levels: usize,
    /// Couplers are harmonic unless stated otherwise.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub anharmonicity: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    QubitCoupler,
    Radial,
    Side,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::QubitCoupler => "qubit_coupler",
            EdgeKind::Radial => "radial",
            EdgeKind::Side => "side",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEdge {
    pub endpoints: [String; 2],
    /// G in MHz.
    pub strength: f64,
    pub kind: EdgeKind,
}

impl CouplingEdge {
    pub fn new(a: impl Into<String>, b: impl Into<String>, strength: f64, kind: EdgeKind) -> Self {
        Self {
            endpoints: [a.into(), b.into()],
            strength,
            kind,
        }
    }

    fn key(&self) -> (String, String) {
        pair_key(&self.endpoints[0], &self.endpoints[1])
    }

    pub fn touches(&self, id: &str) -> bool {
        self.endpoints[0] == id || self.endpoints[1] == id
    }

    pub fn other(&self, id: &str) -> Option<&str> {
        if self.endpoints[0] == id {
            Some(&self.endpoints[1])
        } else if self.endpoints[1] == id {
            Some(&self.endpoints[0])
        } else {
            None
        }
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCellView {
    pub label: String,
    pub central: String,
    /// Q2..Q5, counterclockwise.
    pub sides: [String; 4],
    /// C12..C15, matching `sides`.
    pub couplers: [String; 4],
}

impl UnitCellView {
    /// Qubits in cell order: central first, then the sides.
    pub fn qubits(&self) -> [&str; 5] {
        [
            &self.central,
            &self.sides[0],
            &self.sides[1],
            &self.sides[2],
            &self.sides[3],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviceLayout {
    #[serde(rename = "qubit", default)]
    pub qubits: Vec<TransmonSpec>,
    #[serde(rename = "coupler", default)]
    pub couplers: Vec<CouplerSpec>,
    #[serde(rename = "edge", default)]
    pub edges: Vec<CouplingEdge>,
    #[serde(rename = "cell", default)]
    pub cells: Vec<UnitCellView>,
}

impl DeviceLayout {
    pub fn qubit(&self, id: &str) -> Option<&TransmonSpec> {
        self.qubits.iter().find(|q| q.id == id)
    }

    pub fn qubit_mut(&mut self, id: &str) -> Option<&mut TransmonSpec> {
        self.qubits.iter_mut().find(|q| q.id == id)
    }

    pub fn coupler(&self, id: &str) -> Option<&CouplerSpec> {
        self.couplers.iter().find(|c| c.id == id)
    }

    pub fn coupler_mut(&mut self, id: &str) -> Option<&mut CouplerSpec> {
        self.couplers.iter_mut().find(|c| c.id == id)
    }

    pub fn cell(&self, label: &str) -> Result<&UnitCellView> {
        self.cells
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::UnknownCell(label.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.qubit(id).is_some() || self.coupler(id).is_some()
    }

    /// Coupling strength between two elements; zero when no edge exists.
    pub fn strength(&self, a: &str, b: &str) -> f64 {
        self.edge(a, b).map_or(0.0, |e| e.strength)
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<&CouplingEdge> {
        let key = pair_key(a, b);
        self.edges.iter().find(|e| e.key() == key)
    }

    pub fn edge_mut(&mut self, a: &str, b: &str) -> Option<&mut CouplingEdge> {
        let key = pair_key(a, b);
        self.edges.iter_mut().find(|e| e.key() == key)
    }

    /// Sets the strength of every edge of `kind`.
    pub fn set_kind_strength(&mut self, kind: EdgeKind, strength: f64) {
        for e in self.edges.iter_mut().filter(|e| e.kind == kind) {
            e.strength = strength;
        }
    }

    /// The coupler bridging two qubits, if any.
    pub fn coupler_between(&self, a: &str, b: &str) -> Option<&CouplerSpec> {
        self.couplers.iter().find(|c| {
            self.edge(a, &c.id)
                .is_some_and(|e| e.kind == EdgeKind::QubitCoupler)
                && self
                    .edge(b, &c.id)
                    .is_some_and(|e| e.kind == EdgeKind::QubitCoupler)
        })
    }

    /// Qubits attached to a coupler through qubit_coupler edges.
    pub fn coupler_qubits(&self, coupler: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::QubitCoupler)
            .filter_map(|e| e.other(coupler))
            .filter(|id| self.qubit(id).is_some())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for q in &self.qubits {
            if !ids.insert(q.id.as_str()) {
                return Err(Error::Validation(format!("duplicate element id `{}`", q.id)));
            }
            if !(q.freq_idle > 0.0) {
                return Err(Error::Validation(format!("{}: freq_idle must be > 0", q.id)));
            }
            if !(q.anharmonicity < 0.0) {
                return Err(Error::Validation(format!("{}: anharmonicity must be < 0", q.id)));
            }
            if q.n_levels < 2 {
                return Err(Error::Validation(format!("{}: n_levels must be >= 2", q.id)));
            }
            if let Some(t1) = q.t1 {
                if !(t1 > 0.0) {
                    return Err(Error::Validation(format!("{}: t1 must be > 0", q.id)));
                }
            }
            if q.tunable {
                if let Some([lo, hi]) = q.band {
                    if !(lo < hi) {
                        return Err(Error::Validation(format!("{}: band min must be < max", q.id)));
                    }
                    if q.freq_idle < lo || q.freq_idle > hi {
                        return Err(Error::Validation(format!(
                            "{}: freq_idle outside tunable band",
                            q.id
                        )));
                    }
                }
            }
        }
        for c in &self.couplers {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::Validation(format!("duplicate element id `{}`", c.id)));
            }
            let [lo, hi] = c.band;
            if !(lo < c.freq && c.freq < hi) {
                return Err(Error::Validation(format!(
                    "{}: coupler freq must lie strictly inside its band",
                    c.id
                )));
            }
            if c.n_levels < 2 {
                return Err(Error::Validation(format!("{}: n_levels must be >= 2", c.id)));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            let [a, b] = &e.endpoints;
            if a == b {
                return Err(Error::Validation(format!("edge endpoints must be distinct ({a})")));
            }
            for end in [a, b] {
                if !ids.contains(end.as_str()) {
                    return Err(Error::Validation(format!("edge endpoint `{end}` is not declared")));
                }
            }
            if !seen.insert(e.key()) {
                return Err(Error::Validation(format!("duplicate edge ({a}, {b})")));
            }
            let qubit_ends = [a, b].iter().filter(|id| self.qubit(id).is_some()).count();
            match (e.kind, qubit_ends) {
                (EdgeKind::QubitCoupler, 1) | (EdgeKind::Radial, 2) | (EdgeKind::Side, 2) => {}
                _ => {
                    return Err(Error::Validation(format!(
                        "edge ({a}, {b}) of kind {} joins the wrong element types",
                        e.kind
                    )))
                }
            }
        }
        let mut labels = BTreeSet::new();
        for cell in &self.cells {
            if !labels.insert(cell.label.as_str()) {
                return Err(Error::Validation(format!("duplicate cell label `{}`", cell.label)));
            }
            let qs = cell.qubits();
            let distinct: BTreeSet<_> = qs.iter().collect();
            if distinct.len() != 5 {
                return Err(Error::Validation(format!(
                    "cell {}: qubit ids must be distinct",
                    cell.label
                )));
            }
            for q in qs {
                if self.qubit(q).is_none() {
                    return Err(Error::Validation(format!(
                        "cell {}: qubit `{q}` not in layout",
                        cell.label
                    )));
                }
            }
            for (side, coupler) in cell.sides.iter().zip(&cell.couplers) {
                if self.coupler(coupler).is_none() {
                    return Err(Error::Validation(format!(
                        "cell {}: coupler `{coupler}` not in layout",
                        cell.label
                    )));
                }
                for q in [&cell.central, side] {
                    let ok = self
                        .edge(q, coupler)
                        .is_some_and(|e| e.kind == EdgeKind::QubitCoupler);
                    if !ok {
                        return Err(Error::Validation(format!(
                            "cell {}: missing qubit_coupler edge ({q}, {coupler})",
                            cell.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let layout: DeviceLayout = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let layout: DeviceLayout =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("layout serializes to toml")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = if is_json(path) {
            serde_json::to_string_pretty(self)?
        } else {
            self.to_toml_string()
        };
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Induced sub-layout on a cell's five qubits and four couplers, with
    /// qubits in cell order (central first) and couplers matching the sides.
    pub fn cell_subcircuit(&self, label: &str) -> Result<DeviceLayout> {
        let cell = self.cell(label)?.clone();
        let mut keep: Vec<&str> = cell.qubits().to_vec();
        keep.extend(cell.couplers.iter().map(String::as_str));
        let set: BTreeSet<&str> = keep.iter().copied().collect();
        let qubits = cell
            .qubits()
            .iter()
            .map(|id| self.qubit(id).cloned().ok_or_else(|| Error::UnknownElement(id.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let couplers = cell
            .couplers
            .iter()
            .map(|id| self.coupler(id).cloned().ok_or_else(|| Error::UnknownElement(id.clone())))
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .filter(|e| set.contains(e.endpoints[0].as_str()) && set.contains(e.endpoints[1].as_str()))
            .cloned()
            .collect();
        Ok(DeviceLayout {
            qubits,
            couplers,
            edges,
            cells: vec![cell],
        })
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("json")
}

pub fn load_layout(path: impl AsRef<Path>) -> Result<DeviceLayout> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if is_json(path) {
        DeviceLayout::from_json_str(&text)
    } else {
        DeviceLayout::from_toml_str(&text)
    }
}

/// Parameters used when generating layouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceDefaults {
    pub g_qc: f64,
    pub g_radial: f64,
    pub g_side: f64,
    pub qubit_levels: usize,
    pub coupler_levels: usize,
    pub anharmonicity: f64,
    /// Four detuned frequency groups: two for data-type sites, two for
    /// measure-type sites.
    pub palette: [f64; 4],
    /// Uniform per-qubit jitter amplitude drawn from the seed.
    pub jitter: f64,
    /// Half-width of every qubit's tunable band around its idle frequency.
    pub qubit_tuning_range: f64,
    /// Coupler band relative to the higher of its two qubits.
    pub coupler_band_offset: [f64; 2],
    pub t1: Option<f64>,
}

impl Default for DeviceDefaults {
    fn default() -> Self {
        Self {
            g_qc: 100.0,
            g_radial: 8.0,
            g_side: 0.0,
            qubit_levels: 4,
            coupler_levels: 3,
            anharmonicity: -200.0,
            palette: [6000.0, 6090.0, 6450.0, 6540.0],
            jitter: 10.0,
            qubit_tuning_range: 700.0,
            coupler_band_offset: [200.0, 4000.0],
            t1: None,
        }
    }
}

impl DeviceDefaults {
    fn coupler_for(&self, id: String, fa: f64, fb: f64, g_direct: f64) -> CouplerSpec {
        let top = fa.max(fb);
        let band = [top + self.coupler_band_offset[0], top + self.coupler_band_offset[1]];
        // Park at the first-order hard-OFF estimate.
        let target = crate::perturbation::off_point_estimate(g_direct, self.g_qc, self.g_qc, fa, fb)
            .unwrap_or(0.5 * (band[0] + band[1]));
        let margin = 1.0;
        let freq = target.clamp(band[0] + margin, band[1] - margin);
        CouplerSpec {
            id,
            freq,
            band,
            n_levels: self.coupler_levels,
            anharmonicity: 0.0,
        }
    }

    fn transmon(&self, id: String, freq: f64) -> TransmonSpec {
        TransmonSpec {
            id,
            freq_idle: freq,
            anharmonicity: self.anharmonicity,
            n_levels: self.qubit_levels,
            t1: self.t1,
            tunable: true,
            band: Some([freq - self.qubit_tuning_range, freq + self.qubit_tuning_range]),
        }
    }
}

/// Idle frequencies of the reference cell: central qubit on the upper
/// palette group, sides on the lower two.
pub const DEFAULT_CELL_FREQS: [f64; 5] = [6450.0, 6000.0, 6090.0, 6010.0, 6080.0];

/// Reference single cell with default parameters.
pub fn default_cell() -> DeviceLayout {
    single_cell(&DeviceDefaults::default(), DEFAULT_CELL_FREQS)
}

/// A single unit cell with conventional ids Q1..Q5 and C12..C15.
pub fn single_cell(defaults: &DeviceDefaults, freqs: [f64; 5]) -> DeviceLayout {
    let ids = ["Q1", "Q2", "Q3", "Q4", "Q5"];
    let qubits: Vec<_> = ids
        .iter()
        .zip(freqs)
        .map(|(id, f)| defaults.transmon(id.to_string(), f))
        .collect();
    let mut couplers = Vec::new();
    let mut edges = Vec::new();
    for i in 1..5 {
        let cid = format!("C1{}", i + 1);
        couplers.push(defaults.coupler_for(cid.clone(), freqs[0], freqs[i], defaults.g_radial));
        edges.push(CouplingEdge::new("Q1", cid.clone(), defaults.g_qc, EdgeKind::QubitCoupler));
        edges.push(CouplingEdge::new(ids[i], cid, defaults.g_qc, EdgeKind::QubitCoupler));
    }
    for i in 1..5 {
        edges.push(CouplingEdge::new("Q1", ids[i], defaults.g_radial, EdgeKind::Radial));
    }
    for i in 1..5 {
        let j = if i == 4 { 1 } else { i + 1 };
        edges.push(CouplingEdge::new(ids[i], ids[j], defaults.g_side, EdgeKind::Side));
    }
    DeviceLayout {
        qubits,
        couplers,
        edges,
        cells: vec![UnitCellView {
            label: "A".into(),
            central: "Q1".into(),
            sides: ids[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>().try_into().unwrap(),
            couplers: ["C12", "C13", "C14", "C15"].map(String::from),
        }],
    }
}

/// Cell labels in lattice order: A..Z, then A1..Z1, A2.. .
pub fn cell_label(index: usize) -> String {
    let letter = (b'A' + (index % 26) as u8) as char;
    match index / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

/// Diamond lattice of tunable-coupler-linked transmons.
///
/// Sites are the points `(x, y)` with `x + y` even inside a
/// `(2 cols - 1) × (2 rows - 1)` box; nearest neighbours sit on the diagonals.
/// Every site with four neighbours heads a unit cell. `rows = 4, cols = 8`
/// yields the 53-qubit, 33-cell pattern.
pub fn generate_sycamore_like(
    rows: usize,
    cols: usize,
    defaults: &DeviceDefaults,
    seed: u64,
) -> Result<DeviceLayout> {
    if rows < 2 || cols < 2 {
        return Err(Error::Precondition("rows and cols must be >= 2".into()));
    }
    let (w, h) = (2 * cols - 1, 2 * rows - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if (x + y) % 2 == 0 {
                sites.push((x, y));
            }
        }
    }
    let id_of = |x: usize, y: usize| format!("Q{x}_{y}");
    let mut freq = HashMap::new();
    let mut qubits = Vec::new();
    for &(x, y) in &sites {
        let group = if x % 2 == 0 {
            (x / 2 + y / 2) % 2
        } else {
            2 + ((x - 1) / 2 + (y - 1) / 2) % 2
        };
        let f = defaults.palette[group] + defaults.jitter * (2.0 * rng.gen::<f64>() - 1.0);
        freq.insert((x, y), f);
        qubits.push(defaults.transmon(id_of(x, y), f));
    }
    let neighbor = |x: usize, y: usize, dx: i64, dy: i64| -> Option<(usize, usize)> {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
    };
    let coupler_id = |a: (usize, usize), b: (usize, usize)| {
        let (p, q) = if a <= b { (a, b) } else { (b, a) };
        format!("C{}_{}-{}_{}", p.0, p.1, q.0, q.1)
    };
    let mut couplers = Vec::new();
    let mut edges = Vec::new();
    for &(x, y) in &sites {
        // Each NN pair once: link to the two neighbours above.
        for dx in [-1i64, 1] {
            if let Some(n) = neighbor(x, y, dx, 1) {
                let (a, b) = (id_of(x, y), id_of(n.0, n.1));
                let cid = coupler_id((x, y), n);
                couplers.push(defaults.coupler_for(cid.clone(), freq[&(x, y)], freq[&n], defaults.g_radial));
                edges.push(CouplingEdge::new(a.clone(), cid.clone(), defaults.g_qc, EdgeKind::QubitCoupler));
                edges.push(CouplingEdge::new(b.clone(), cid, defaults.g_qc, EdgeKind::QubitCoupler));
                edges.push(CouplingEdge::new(a, b, defaults.g_radial, EdgeKind::Radial));
            }
        }
    }
    let mut cells = Vec::new();
    let mut side_pairs = BTreeSet::new();
    for &(x, y) in &sites {
        // Counterclockwise: NE, NW, SW, SE.
        let ring = [(1, 1), (-1, 1), (-1, -1), (1, -1)].map(|(dx, dy)| neighbor(x, y, dx, dy));
        if ring.iter().any(Option::is_none) {
            continue;
        }
        let ring = ring.map(Option::unwrap);
        for k in 0..4 {
            let (a, b) = (ring[k], ring[(k + 1) % 4]);
            side_pairs.insert(if a <= b { (a, b) } else { (b, a) });
        }
        cells.push(UnitCellView {
            label: cell_label(cells.len()),
            central: id_of(x, y),
            sides: ring.map(|(sx, sy)| id_of(sx, sy)),
            couplers: ring.map(|n| coupler_id((x, y), n)),
        });
    }
    for (a, b) in side_pairs {
        edges.push(CouplingEdge::new(id_of(a.0, a.1), id_of(b.0, b.1), defaults.g_side, EdgeKind::Side));
    }
    let layout = DeviceLayout {
        qubits,
        couplers,
        edges,
        cells,
    };
    layout.validate()?;
    Ok(layout)
}

/// Adjacency of qubits through any nonzero-strength edge or shared coupler.
pub fn qubit_graph(layout: &DeviceLayout) -> BTreeMap<String, BTreeSet<String>> {
    let mut g: BTreeMap<String, BTreeSet<String>> =
        layout.qubits.iter().map(|q| (q.id.clone(), BTreeSet::new())).collect();
    for e in &layout.edges {
        let [a, b] = &e.endpoints;
        if layout.qubit(a).is_some() && layout.qubit(b).is_some() {
            g.get_mut(a).unwrap().insert(b.clone());
            g.get_mut(b).unwrap().insert(a.clone());
        }
    }
    for c in &layout.couplers {
        let qs = layout.coupler_qubits(&c.id);
        for a in &qs {
            for b in &qs {
                if a != b {
                    g.get_mut(*a).unwrap().insert(b.to_string());
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> DeviceLayout {
        single_cell(&DeviceDefaults::default(), [6450.0, 6000.0, 6090.0, 6000.0, 6090.0])
    }

    #[test]
    fn single_cell_is_valid() {
        let l = cell();
        l.validate().unwrap();
        assert_eq!(l.qubits.len(), 5);
        assert_eq!(l.couplers.len(), 4);
        assert_eq!(l.edges.len(), 16);
        assert_eq!(l.cells.len(), 1);
    }

    #[test]
    fn duplicate_edge_rejected() {
        let mut l = cell();
        l.edges.push(CouplingEdge::new("Q2", "Q1", 1.0, EdgeKind::Radial));
        let err = l.validate().unwrap_err().to_string();
        assert!(err.contains("duplicate edge"), "{err}");
    }

    #[test]
    fn invariant_violations_named() {
        let mut l = cell();
        l.qubits[0].anharmonicity = 10.0;
        assert!(l.validate().unwrap_err().to_string().contains("anharmonicity"));
        let mut l = cell();
        l.couplers[0].freq = l.couplers[0].band[1] + 1.0;
        assert!(l.validate().unwrap_err().to_string().contains("band"));
        let mut l = cell();
        l.edges.push(CouplingEdge::new("Q1", "Q9", 1.0, EdgeKind::Radial));
        assert!(l.validate().unwrap_err().to_string().contains("Q9"));
    }

    #[test]
    fn smallest_diamond() {
        let l = generate_sycamore_like(2, 2, &DeviceDefaults::default(), 1).unwrap();
        assert_eq!(l.qubits.len(), 5);
        assert_eq!(l.couplers.len(), 4);
        assert_eq!(l.cells.len(), 1);
    }

    #[test]
    fn sycamore_pattern_counts() {
        let l = generate_sycamore_like(4, 8, &DeviceDefaults::default(), 7).unwrap();
        assert_eq!(l.qubits.len(), 53);
        assert_eq!(l.cells.len(), 33);
        assert_eq!(l.cells[32].label, "G1");
    }

    #[test]
    fn generation_is_deterministic() {
        let d = DeviceDefaults::default();
        let a = generate_sycamore_like(3, 4, &d, 42).unwrap();
        let b = generate_sycamore_like(3, 4, &d, 42).unwrap();
        let c = generate_sycamore_like(3, 4, &d, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn subcircuit() {
        let l = generate_sycamore_like(4, 8, &DeviceDefaults::default(), 7).unwrap();
        let sub = l.cell_subcircuit("A").unwrap();
        assert_eq!(sub.qubits.len() + sub.couplers.len(), 9);
        assert!(sub.edges.len() >= 12);
        sub.validate().unwrap();
        assert!(matches!(l.cell_subcircuit("ZZ9"), Err(Error::UnknownCell(_))));
        let once = cell().cell_subcircuit("A").unwrap();
        assert_eq!(once, cell());
    }

    #[test]
    fn strength_is_symmetric() {
        let l = cell();
        for a in &l.qubits {
            for b in &l.couplers {
                assert_eq!(l.strength(&a.id, &b.id), l.strength(&b.id, &a.id));
            }
        }
    }

    #[test]
    fn default_t1_placeholder() {
        let l = cell();
        assert!(l.qubits[0].t1_is_placeholder());
        assert_eq!(l.qubits[0].t1_ns(), DEFAULT_T1_NS);
    }
}
