//! Coupler elimination, dressed-state labelling, level-dependent exchange
//! rates and Pauli-string coefficients by the parity rule.
//!
//! The full Hamiltonian is diagonalized block by block in total excitation
//! number. Within a block, eigenstates are matched to bare occupations, and
//! the coupler-ground subspace is decoupled by the least-action rotation
//! `U = A (AᵀA)^{-1/2}`, where `A` is the coupler-ground part of the
//! eigenvectors labelled with coupler-ground occupations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::device::DeviceLayout;
use crate::hilbert::{
    block_spectra, build_basis, build_hamiltonian, BlockSpectrum, ModeBasis, TruncationPolicy,
};
use crate::{Error, Result};

pub const DEFAULT_OVERLAP_FLOOR: f64 = 0.5;
/// Below this, an eigenstate has no meaningful bare label.
pub const UNASSIGNABLE: f64 = 1e-6;
const CANDIDATES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column of the eigenvector within its block spectrum.
    pub eigen: usize,
    /// Basis ordinal of the bare label.
    pub state: usize,
    pub overlap: f64,
    pub hybridized: bool,
}

/// Bijective labelling of one block's eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLabeling {
    pub floor: f64,
    /// Indexed by eigenvector column.
    pub assignments: Vec<Assignment>,
}

impl StateLabeling {
    pub fn hybridized(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments.iter().filter(|a| a.hybridized)
    }
}

/// Greedy global max-overlap bijection between eigenvector columns and rows
/// of `vectors`; `states[row]` gives the basis ordinal of each row.
pub fn label_vectors(vectors: &DMatrix<f64>, states: &[usize], floor: f64) -> Result<StateLabeling> {
    let (rows, cols) = vectors.shape();
    let mut candidates = Vec::with_capacity(cols * CANDIDATES.min(rows));
    for c in 0..cols {
        let col = vectors.column(c);
        let mut best: Vec<(f64, usize)> = col.iter().enumerate().map(|(r, v)| (v * v, r)).collect();
        let top = CANDIDATES.min(rows);
        if top < rows {
            best.select_nth_unstable_by(top - 1, |a, b| b.0.total_cmp(&a.0));
            best.truncate(top);
        }
        if best.iter().all(|b| b.0 < UNASSIGNABLE) {
            let overlap = best.iter().fold(0.0f64, |a, b| a.max(b.0));
            return Err(Error::Unassignable { index: c, overlap });
        }
        candidates.extend(best.into_iter().map(|(o, r)| (o, c, r)));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_taken = vec![false; rows];
    let mut col_label: Vec<Option<(usize, f64)>> = vec![None; cols];
    for (o, c, r) in candidates {
        if col_label[c].is_none() && !row_taken[r] {
            col_label[c] = Some((r, o));
            row_taken[r] = true;
        }
    }
    // Columns whose short list was exhausted take the best remaining row.
    for c in 0..cols {
        if col_label[c].is_some() {
            continue;
        }
        let col = vectors.column(c);
        let r = (0..rows)
            .filter(|&r| !row_taken[r])
            .max_by(|&a, &b| (col[a] * col[a]).total_cmp(&(col[b] * col[b])).then(b.cmp(&a)))
            .expect("square block has a free row");
        row_taken[r] = true;
        col_label[c] = Some((r, col[r] * col[r]));
    }
    let assignments = col_label
        .into_iter()
        .enumerate()
        .map(|(c, l)| {
            let (r, overlap) = l.unwrap();
            Assignment {
                eigen: c,
                state: states[r],
                overlap,
                hybridized: overlap <= floor + 1e-9,
            }
        })
        .collect();
    Ok(StateLabeling { floor, assignments })
}

pub fn label_states(block: &BlockSpectrum, floor: f64) -> Result<StateLabeling> {
    label_vectors(&block.spectrum.vectors, &block.states, floor)
}

/// Closest orthogonal matrix in Frobenius norm: `A (AᵀA)^{-1/2}`.
pub fn polar_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Least-action decoupling transform of a full block.
///
/// `s` holds eigenvectors as columns, already permuted so column `k` is the
/// eigenstate labelled by row `k`; `in_p[k]` marks the retained subspace.
/// Returns `T = S X` with `X` block-diagonal orthogonal and `T` as close to
/// the identity as such a product can be.
pub fn least_action_transform(s: &DMatrix<f64>, in_p: &[bool]) -> DMatrix<f64> {
    let n = s.nrows();
    let mut x = DMatrix::zeros(n, n);
    for side in [true, false] {
        let idx: Vec<usize> = (0..n).filter(|&k| in_p[k] == side).collect();
        if idx.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| s[(idx[i], idx[j])]);
        let xb = polar_factor(&sub).transpose();
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                x[(r, c)] = xb[(i, j)];
            }
        }
    }
    s * x
}

/// Level-transition key: qubit `i` goes `m → m+1` while qubit `j` goes
/// `n+1 → n`, all other qubits in the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JKey {
    pub i: usize,
    pub j: usize,
    pub m: u8,
    pub n: u8,
}

impl JKey {
    pub fn new(i: usize, j: usize, m: u8, n: u8) -> Self {
        if i <= j {
            Self { i, j, m, n }
        } else {
            Self { i: j, j: i, m: n, n: m }
        }
    }
}

/// Dressed energy and labelling quality of one coupler-ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedLevel {
    /// Diagonal element of the effective Hamiltonian.
    pub diagonal: f64,
    /// Eigenvalue of the full Hamiltonian carrying this label.
    pub energy: f64,
    pub overlap: f64,
    pub hybridized: bool,
}

/// Effective multilevel-qubit Hamiltonian on the coupler-ground subspace.
#[derive(Debug, Clone)]
pub struct EffectiveQubitH {
    pub qubit_ids: Vec<String>,
    pub levels: Vec<usize>,
    /// Keyed by qubit occupation.
    pub dressed: BTreeMap<Vec<u8>, DressedLevel>,
    /// Bare exchange rates, with the bosonic `√((m+1)(n+1))` divided out.
    pub j_table: BTreeMap<JKey, f64>,
    /// Per excitation number: qubit occupations and the effective block.
    pub blocks: Vec<(usize, Vec<Vec<u8>>, DMatrix<f64>)>,
}

impl EffectiveQubitH {
    pub fn n_qubits(&self) -> usize {
        self.qubit_ids.len()
    }

    pub fn qubit_index(&self, id: &str) -> Option<usize> {
        self.qubit_ids.iter().position(|q| q == id)
    }

    /// `J` for `i: m→m+1`, `j: n+1→n`; symmetric under swapping the pair.
    pub fn j(&self, i: usize, j: usize, m: u8, n: u8) -> Option<f64> {
        self.j_table.get(&JKey::new(i, j, m, n)).copied()
    }

    pub fn occupation(&self, levels: &[(usize, u8)]) -> Vec<u8> {
        let mut occ = vec![0u8; self.n_qubits()];
        for &(q, n) in levels {
            occ[q] = n;
        }
        occ
    }

    /// Eigen-energy of a labelled qubit occupation.
    pub fn energy(&self, occ: &[u8]) -> Option<f64> {
        self.dressed.get(occ).map(|d| d.energy)
    }

    /// Transition frequency of qubit `q` from `m` to `m + 1` with all other
    /// qubits idle, from effective-Hamiltonian diagonals.
    pub fn transition(&self, q: usize, m: u8) -> Option<f64> {
        if q >= self.n_qubits() {
            return None;
        }
        let lo = self.dressed.get(&self.occupation(&[(q, m)]))?;
        let hi = self.dressed.get(&self.occupation(&[(q, m + 1)]))?;
        Some(hi.diagonal - lo.diagonal)
    }

    /// Energies of the `2^N` computational states indexed by bit mask
    /// (bit `q` set means qubit `q` excited).
    pub fn computational_energies(&self) -> Result<Vec<f64>> {
        let n = self.n_qubits();
        (0..1usize << n)
            .map(|s| {
                let occ: Vec<u8> = (0..n).map(|q| ((s >> q) & 1) as u8).collect();
                self.energy(&occ)
                    .ok_or_else(|| Error::MissingEnergy(occ.iter().map(|b| b.to_string()).collect()))
            })
            .collect()
    }

    /// Computational states whose labels are flagged as hybridized.
    pub fn hybridized_computational(&self) -> Vec<Vec<u8>> {
        self.dressed
            .iter()
            .filter(|(occ, d)| d.hybridized && occ.iter().all(|&x| x <= 1))
            .map(|(occ, _)| occ.clone())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub policy: TruncationPolicy,
    pub floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            policy: TruncationPolicy::default(),
            floor: DEFAULT_OVERLAP_FLOOR,
        }
    }
}

/// Least-action effective Hamiltonian for each labelled block.
pub fn block_diagonalize(
    basis: &ModeBasis,
    blocks: &[BlockSpectrum],
    labelings: &[StateLabeling],
) -> Result<EffectiveQubitH> {
    let qubits = basis.qubit_modes();
    let mut dressed = BTreeMap::new();
    let mut eff_blocks = Vec::new();
    for (block, labeling) in blocks.iter().zip(labelings) {
        let p_rows: Vec<usize> = (0..block.states.len())
            .filter(|&r| basis.couplers_ground(block.states[r]))
            .collect();
        if p_rows.is_empty() {
            continue;
        }
        let row_of: BTreeMap<usize, usize> = p_rows.iter().enumerate().map(|(k, &r)| (block.states[r], k)).collect();
        // P-labelled eigenvectors, ordered like their labels.
        let mut cols = vec![usize::MAX; p_rows.len()];
        for a in &labeling.assignments {
            if let Some(&k) = row_of.get(&a.state) {
                cols[k] = a.eigen;
            }
        }
        let v = &block.spectrum.vectors;
        let a = DMatrix::from_fn(p_rows.len(), p_rows.len(), |i, j| v[(p_rows[i], cols[j])]);
        for k in 0..cols.len() {
            let weight: f64 = a.column(k).norm_squared();
            if weight < 0.5 {
                return Err(Error::NotSeparable(format!(
                    "state {} keeps only {:.3} of its weight on coupler-ground states",
                    basis.label(block.states[p_rows[k]]),
                    weight
                )));
            }
        }
        let u = polar_factor(&a);
        let e = DVector::from_iterator(cols.len(), cols.iter().map(|&c| block.spectrum.values[c]));
        let h = &u * DMatrix::from_diagonal(&e) * u.transpose();
        let occs: Vec<Vec<u8>> = p_rows
            .iter()
            .map(|&r| qubits.iter().map(|&q| basis.states[block.states[r]][q]).collect())
            .collect();
        for (k, occ) in occs.iter().enumerate() {
            let asg = &labeling.assignments[cols[k]];
            dressed.insert(
                occ.clone(),
                DressedLevel {
                    diagonal: h[(k, k)],
                    energy: e[k],
                    overlap: asg.overlap,
                    hybridized: asg.hybridized,
                },
            );
        }
        eff_blocks.push((block.excitations, occs, h));
    }
    let j_table = extract_j(&qubits.iter().map(|&q| basis.modes[q].n_levels).collect::<Vec<_>>(), &eff_blocks);
    Ok(EffectiveQubitH {
        qubit_ids: qubits.iter().map(|&q| basis.modes[q].id.clone()).collect(),
        levels: qubits.iter().map(|&q| basis.modes[q].n_levels).collect(),
        dressed,
        j_table,
        blocks: eff_blocks,
    })
}

fn extract_j(levels: &[usize], blocks: &[(usize, Vec<Vec<u8>>, DMatrix<f64>)]) -> BTreeMap<JKey, f64> {
    let nq = levels.len();
    let mut table = BTreeMap::new();
    for (_, occs, h) in blocks {
        let pos: BTreeMap<&Vec<u8>, usize> = occs.iter().enumerate().map(|(k, o)| (o, k)).collect();
        for i in 0..nq {
            for j in (i + 1)..nq {
                for m in 0..levels[i].saturating_sub(1) {
                    for n in 0..levels[j].saturating_sub(1) {
                        let mut bra = vec![0u8; nq];
                        bra[i] = m as u8 + 1;
                        bra[j] = n as u8;
                        let mut ket = vec![0u8; nq];
                        ket[i] = m as u8;
                        ket[j] = n as u8 + 1;
                        if let (Some(&r), Some(&c)) = (pos.get(&bra), pos.get(&ket)) {
                            let norm = (((m + 1) * (n + 1)) as f64).sqrt();
                            table.insert(JKey::new(i, j, m as u8, n as u8), h[(r, c)] / norm);
                        }
                    }
                }
            }
        }
    }
    table
}

/// Full exact pipeline for a layout: basis, RWA Hamiltonian, block
/// spectra, labelling and least-action elimination of the couplers.
pub fn solve_layout(layout: &DeviceLayout, opts: &SolveOptions) -> Result<EffectiveQubitH> {
    let basis = build_basis(layout, &opts.policy)?;
    let h = build_hamiltonian(layout, &basis, true)?;
    let blocks = block_spectra(&h, &basis, None)?;
    let labelings = blocks
        .iter()
        .map(|b| label_states(b, opts.floor))
        .collect::<Result<Vec<_>>>()?;
    block_diagonalize(&basis, &blocks, &labelings)
}

/// Exact pipeline on one unit cell, qubits ordered central first.
pub fn solve_cell(layout: &DeviceLayout, label: &str, opts: &SolveOptions) -> Result<EffectiveQubitH> {
    solve_layout(&layout.cell_subcircuit(label)?, opts)
}

/// A tensor product of `Z` and `I`; bit `q` of `z_mask` puts `Z` on qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub n: usize,
    pub z_mask: u64,
}

impl PauliString {
    pub fn new(n: usize, z_mask: u64) -> Result<Self> {
        if n > 63 || z_mask >> n != 0 {
            return Err(Error::Precondition(format!("z mask {z_mask:#b} out of range for {n} qubits")));
        }
        Ok(Self { n, z_mask })
    }

    pub fn from_indices(n: usize, zs: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in zs {
            if q >= n {
                return Err(Error::Precondition(format!("qubit index {q} out of range for {n} qubits")));
            }
            mask |= 1 << q;
        }
        Ok(Self { n, z_mask: mask })
    }

    pub fn weight(&self) -> usize {
        self.z_mask.count_ones() as usize
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.z_mask >> q & 1 == 1).collect()
    }

    /// `(-1)` to the number of excited qubits under a `Z`.
    pub fn sign(&self, state: u64) -> f64 {
        if (state & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n, self.weight(), std::cmp::Reverse(self.to_string()))
            .cmp(&(other.n, other.weight(), std::cmp::Reverse(other.to_string())))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            f.write_str(if self.z_mask >> q & 1 == 1 { "Z" } else { "I" })?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut mask = 0u64;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                'Z' | 'z' => mask |= 1 << q,
                'I' | 'i' => {}
                _ => return Err(Error::Parse(format!("bad Pauli string `{s}`"))),
            }
        }
        Self::new(s.chars().count(), mask)
    }
}

pub const NORMALIZED: &str = "normalized";

/// Coefficients `α_P` with `H = Σ_P α_P P` on the computational manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    pub n_qubits: usize,
    /// Indexed by Z mask.
    pub alpha: Vec<f64>,
    pub convention: &'static str,
}

impl PauliCoefficients {
    pub fn get(&self, p: PauliString) -> f64 {
        self.alpha[p.z_mask as usize]
    }

    pub fn by_str(&self, s: &str) -> Result<f64> {
        let p: PauliString = s.parse()?;
        if p.n != self.n_qubits {
            return Err(Error::Precondition(format!("`{s}` has the wrong length")));
        }
        Ok(self.get(p))
    }

    /// Strings up to `max_weight` Z's, in canonical order.
    pub fn strings(&self, max_weight: usize) -> Vec<(PauliString, f64)> {
        let mut out: Vec<_> = (0..self.alpha.len() as u64)
            .map(|m| PauliString {
                n: self.n_qubits,
                z_mask: m,
            })
            .filter(|p| p.weight() <= max_weight)
            .map(|p| (p, self.get(p)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// `2^w α_P`: for a two-qubit string this is `E11 - E10 - E01 + E00`.
    pub fn spectroscopic(&self, p: PauliString) -> f64 {
        (1u64 << p.weight()) as f64 * self.get(p)
    }

    /// Largest `|α|` among strings of exactly `weight` Z's, with its string.
    pub fn max_of_weight(&self, weight: usize) -> Option<(PauliString, f64)> {
        self.strings(weight)
            .into_iter()
            .filter(|(p, _)| p.weight() == weight)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    }

    /// Energies rebuilt from the coefficients, indexed by state mask.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut e = self.alpha.clone();
        walsh_hadamard(&mut e);
        e
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, max_weight: usize) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["string", "z_mask", "alpha_MHz", "convention"])?;
        for (p, a) in self.strings(max_weight) {
            w.write_record([
                p.to_string(),
                format!("{:#0width$b}", p.z_mask, width = p.n + 2),
                format!("{a:.12e}"),
                self.convention.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Unnormalized in-place Walsh–Hadamard transform.
pub fn walsh_hadamard(v: &mut [f64]) {
    let n = v.len();
    assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Parity transform of computational energies indexed by state mask.
pub fn parity_transform(energies: &[f64]) -> PauliCoefficients {
    let mut alpha = energies.to_vec();
    walsh_hadamard(&mut alpha);
    let scale = 1.0 / energies.len() as f64;
    alpha.iter_mut().for_each(|a| *a *= scale);
    PauliCoefficients {
        n_qubits: energies.len().trailing_zeros() as usize,
        alpha,
        convention: NORMALIZED,
    }
}

pub fn pauli_coefficients(eff: &EffectiveQubitH) -> Result<PauliCoefficients> {
    Ok(parity_transform(&eff.computational_energies()?))
}

/// A single coefficient by direct parity sum.
pub fn coefficient(eff: &EffectiveQubitH, p: PauliString) -> Result<f64> {
    if p.n != eff.n_qubits() {
        return Err(Error::Precondition("Pauli string length differs from qubit count".into()));
    }
    let e = eff.computational_energies()?;
    let sum: f64 = e.iter().enumerate().map(|(s, v)| p.sign(s as u64) * v).sum();
    Ok(sum / e.len() as f64)
}

/// Writes `(row_label, col_label, value)` for every effective block.
pub fn write_effective_blocks(eff: &EffectiveQubitH, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let lbl = |o: &Vec<u8>| o.iter().map(|x| x.to_string()).collect::<String>();
    let res: std::io::Result<()> = (|| {
        for (n, occs, h) in &eff.blocks {
            writeln!(w, "# block {n}")?;
            for r in 0..occs.len() {
                for c in 0..occs.len() {
                    if h[(r, c)].abs() > 1e-12 {
                        writeln!(w, "{} {} {:.12e}", lbl(&occs[r]), lbl(&occs[c]), h[(r, c)])?;
                    }
                }
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{CouplerSpec, CouplingEdge, EdgeKind, TransmonSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn transmon(id: &str, f: f64, d: f64) -> TransmonSpec {
        TransmonSpec {
            id: id.into(),
            freq_idle: f,
            anharmonicity: d,
            n_levels: 3,
            t1: None,
            tunable: false,
            band: None,
        }
    }

    fn pair(f1: f64, f2: f64, g: f64) -> DeviceLayout {
        DeviceLayout {
            qubits: vec![transmon("A", f1, -200.0), transmon("B", f2, -200.0)],
            edges: vec![CouplingEdge::new("A", "B", g, EdgeKind::Radial)],
            ..Default::default()
        }
    }

    fn with_coupler(f1: f64, f2: f64, fc: f64, g: f64, gr: f64) -> DeviceLayout {
        DeviceLayout {
            qubits: vec![transmon("A", f1, -200.0), transmon("B", f2, -200.0)],
            couplers: vec![CouplerSpec {
                id: "C".into(),
                freq: fc,
                band: [fc - 1000.0, fc + 1000.0],
                n_levels: 3,
                anharmonicity: 0.0,
            }],
            edges: vec![
                CouplingEdge::new("A", "C", g, EdgeKind::QubitCoupler),
                CouplingEdge::new("B", "C", g, EdgeKind::QubitCoupler),
                CouplingEdge::new("A", "B", gr, EdgeKind::Radial),
            ],
            ..Default::default()
        }
    }

    fn opts(cap: usize) -> SolveOptions {
        SolveOptions {
            policy: TruncationPolicy {
                total_excitation_cap: Some(cap),
                ..TruncationPolicy::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn uncoupled_identity_labels() {
        let l = pair(5000.0, 5300.0, 0.0);
        let eff = solve_layout(&l, &opts(4)).unwrap();
        assert!(eff.dressed.values().all(|d| d.overlap == 1.0 && !d.hybridized));
        let pc = pauli_coefficients(&eff).unwrap();
        assert_relative_eq!(pc.by_str("ZZ").unwrap(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(pc.by_str("ZI").unwrap(), -2500.0, epsilon = 1e-9);
        assert_relative_eq!(pc.by_str("IZ").unwrap(), -2650.0, epsilon = 1e-9);
        assert_relative_eq!(pc.by_str("II").unwrap(), 5150.0, epsilon = 1e-9);
    }

    #[test]
    fn resonant_pair_is_hybridized() {
        let l = pair(5000.0, 5000.0, 10.0);
        let eff = solve_layout(&l, &opts(2)).unwrap();
        for occ in [vec![1u8, 0], vec![0, 1]] {
            let d = &eff.dressed[&occ];
            assert_relative_eq!(d.overlap, 0.5, epsilon = 1e-12);
            assert!(d.hybridized);
        }
    }

    #[test]
    fn direct_coupling_only_gives_j() {
        let l = with_coupler(5000.0, 5200.0, 7000.0, 0.0, 6.5);
        let eff = solve_layout(&l, &opts(3)).unwrap();
        assert_relative_eq!(eff.j(0, 1, 0, 0).unwrap(), 6.5, epsilon = 1e-9);
        assert_relative_eq!(eff.j(0, 1, 1, 0).unwrap(), 6.5, epsilon = 1e-9);
        assert_relative_eq!(eff.j(1, 0, 0, 1).unwrap(), 6.5, epsilon = 1e-9);
        assert_relative_eq!(eff.dressed[&vec![1, 1]].diagonal, 10200.0, epsilon = 1e-9);
    }

    #[test]
    fn four_alpha_zz_matches_energy_combination() {
        let l = pair(5000.0, 5150.0, 5.0);
        let eff = solve_layout(&l, &opts(2)).unwrap();
        let e = |o: [u8; 2]| eff.energy(&o).unwrap();
        let pc = pauli_coefficients(&eff).unwrap();
        let zz = e([1, 1]) + e([0, 0]) - e([1, 0]) - e([0, 1]);
        assert_relative_eq!(4.0 * pc.by_str("ZZ").unwrap(), zz, epsilon = 1e-9);
        assert_relative_eq!(pc.spectroscopic("ZZ".parse().unwrap()), zz, epsilon = 1e-9);
    }

    #[test]
    fn missing_energy_reported() {
        let l = pair(5000.0, 5150.0, 5.0);
        let eff = solve_layout(&l, &opts(1)).unwrap();
        assert!(matches!(pauli_coefficients(&eff), Err(Error::MissingEnergy(s)) if s == "11"));
    }

    #[test]
    fn coefficient_matches_transform() {
        let l = with_coupler(5000.0, 5200.0, 6500.0, 80.0, 4.0);
        let eff = solve_layout(&l, &opts(3)).unwrap();
        let pc = pauli_coefficients(&eff).unwrap();
        for m in 0..4 {
            let p = PauliString::new(2, m).unwrap();
            assert_relative_eq!(coefficient(&eff, p).unwrap(), pc.get(p), epsilon = 1e-9);
        }
    }

    #[test]
    fn pauli_string_roundtrip() {
        let p: PauliString = "ZZIIZ".parse().unwrap();
        assert_eq!(p.indices(), vec![0, 1, 4]);
        assert_eq!(p.to_string(), "ZZIIZ");
        assert!("ZX".parse::<PauliString>().is_err());
        assert!(PauliString::from_indices(3, &[3]).is_err());
    }

    #[test]
    fn unassignable_error() {
        let n = 3;
        let v = DMatrix::from_element(n, n, 1e-4);
        assert!(matches!(
            label_vectors(&v, &[0, 1, 2], 0.5),
            Err(Error::Unassignable { index: 0, .. })
        ));
    }

    #[test]
    fn csv_export() {
        let pc = parity_transform(&[0.0, 1.0, 2.0, 3.5]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        pc.write_csv(&p, 2).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("string,z_mask,alpha_MHz,convention"));
        assert_eq!(text.lines().count(), 5);
    }

    fn random_orthogonal(n: usize, seed: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()] + if i == j { 2.0 } else { 0.0 });
        m.qr().q()
    }

    proptest! {
        #[test]
        fn parity_is_involutive(e in prop::collection::vec(-1e4f64..1e4, 32)) {
            let pc = parity_transform(&e);
            for (a, b) in pc.reconstruct().iter().zip(&e) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn single_excitation_shifts_cancel(
            e in prop::collection::vec(-1e4f64..1e4, 16),
            c in prop::collection::vec(-1e3f64..1e3, 4),
        ) {
            let base = parity_transform(&e);
            let shifted: Vec<f64> = e.iter().enumerate()
                .map(|(s, v)| v + (0..4).filter(|q| s >> q & 1 == 1).map(|q| c[q]).sum::<f64>())
                .collect();
            let moved = parity_transform(&shifted);
            for m in 0..16u64 {
                if m.count_ones() >= 2 {
                    prop_assert!((base.alpha[m as usize] - moved.alpha[m as usize]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn least_action_is_minimal(
            seed in prop::collection::vec(-0.3f64..0.3, 36),
            signs in prop::collection::vec(prop::bool::ANY, 6),
            angle in -3.0f64..3.0,
        ) {
            let s = random_orthogonal(6, &seed);
            let in_p = [true, true, true, false, false, false];
            let t = least_action_transform(&s, &in_p);
            let id = DMatrix::<f64>::identity(6, 6);
            let best = (&t - &id).norm();
            // Re-phase columns and mix inside the P block.
            let mut d = DMatrix::<f64>::identity(6, 6);
            for (k, &flip) in signs.iter().enumerate() {
                if flip { d[(k, k)] = -1.0; }
            }
            let (c, sn) = (angle.cos(), angle.sin());
            let mut r = DMatrix::<f64>::identity(6, 6);
            r[(0, 0)] = c; r[(0, 1)] = -sn; r[(1, 0)] = sn; r[(1, 1)] = c;
            let alt = &t * d * r;
            prop_assert!(best <= (alt - id).norm() + 1e-9);
        }

        #[test]
        fn j_table_symmetric(f2 in 5100.0f64..5600.0, fc in 6200.0f64..7500.0, g in 20.0f64..90.0) {
            let l = with_coupler(5000.0, f2, fc, g, 3.0);
            let eff = solve_layout(&l, &opts(3)).unwrap();
            for (k, v) in &eff.j_table {
                prop_assert_eq!(eff.j(k.j, k.i, k.n, k.m), Some(*v));
            }
        }
    }
}
