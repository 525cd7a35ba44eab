//! Diagrammatic perturbation theory for Pauli-string coefficients.
//!
//! Qubits are treated as multilevel modes with additive level energies and
//! single-excitation hops `√((m+1)(n+1)) J`. A Pauli coefficient at order
//! `p` is the parity-weighted sum, over all computational (marked) levels,
//! of closed hop paths of length `p` that avoid the marked level in between.
//! Closed forms for two- and three-body `Z` strings are provided as
//! independent expressions of the same quantities.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::device::{DeviceLayout, EdgeKind};
use crate::effective::{EffectiveQubitH, JKey, PauliString};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PertOptions {
    /// Energy gaps smaller than this (MHz) are treated as resonances.
    pub resonance_floor: f64,
    /// Largest admissible `|V / gap|` on any hop of a diagram.
    pub max_ratio: f64,
}

impl Default for PertOptions {
    fn default() -> Self {
        Self {
            resonance_floor: 1.0,
            max_ratio: 0.5,
        }
    }
}

/// First-order coupler-mediated exchange with `Δ_x = f_x - ω_C`.
pub fn perturbative_j(g_pq: f64, g_pc: f64, g_qc: f64, omega_c: f64, f_p: f64, f_q: f64) -> Result<f64> {
    let (dp, dq) = (f_p - omega_c, f_q - omega_c);
    if dp == 0.0 || dq == 0.0 {
        return Err(Error::ResonantCoupler);
    }
    Ok(g_pq + 0.5 * g_pc * g_qc * (1.0 / dp + 1.0 / dq))
}

/// Coupler frequency above both qubits where the first-order `J` vanishes.
pub fn off_point_estimate(g_direct: f64, g_a: f64, g_b: f64, f_a: f64, f_b: f64) -> Option<f64> {
    if g_direct <= 0.0 {
        return None;
    }
    // g (x - fa)(x - fb) = k (2x - fa - fb), larger root.
    let k = 0.5 * g_a * g_b;
    let a = g_direct;
    let b = -(g_direct * (f_a + f_b) + 2.0 * k);
    let c = g_direct * f_a * f_b + k * (f_a + f_b);
    let disc = b * b - 4.0 * a * c;
    (disc >= 0.0).then(|| (-b + disc.sqrt()) / (2.0 * a))
}

/// Additive level energies per qubit, `levels[q][0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub levels: Vec<Vec<f64>>,
}

impl FrequencyTable {
    pub fn new(levels: Vec<Vec<f64>>) -> Self {
        Self { levels }
    }

    /// Duffing ladders `n f + (δ/2) n (n-1)`.
    pub fn duffing(freqs: &[f64], anharm: &[f64], n_levels: usize) -> Self {
        let levels = freqs
            .iter()
            .zip(anharm)
            .map(|(&f, &d)| (0..n_levels).map(|n| n as f64 * f + 0.5 * d * (n * n.saturating_sub(1)) as f64).collect())
            .collect();
        Self { levels }
    }

    pub fn bare(layout: &DeviceLayout) -> Self {
        let levels = layout
            .qubits
            .iter()
            .map(|q| {
                (0..q.n_levels)
                    .map(|n| n as f64 * q.freq_idle + 0.5 * q.anharmonicity * (n * n.saturating_sub(1)) as f64)
                    .collect()
            })
            .collect();
        Self { levels }
    }

    /// Dressed single-qubit ladders from effective-Hamiltonian diagonals.
    pub fn dressed(eff: &EffectiveQubitH) -> Self {
        let nq = eff.n_qubits();
        let zero = eff.dressed.get(&vec![0u8; nq]).map_or(0.0, |d| d.diagonal);
        let levels = (0..nq)
            .map(|q| {
                let mut ladder = vec![0.0];
                for n in 1..eff.levels[q] as u8 {
                    match eff.dressed.get(&eff.occupation(&[(q, n)])) {
                        Some(d) => ladder.push(d.diagonal - zero),
                        None => break,
                    }
                }
                ladder
            })
            .collect();
        Self { levels }
    }

    pub fn n_qubits(&self) -> usize {
        self.levels.len()
    }

    /// Transition frequency of qubit `q` between levels `l` and `l + 1`.
    pub fn transition(&self, q: usize, l: usize) -> f64 {
        self.levels[q][l + 1] - self.levels[q][l]
    }

    pub fn energy(&self, occ: &[u8]) -> f64 {
        occ.iter().enumerate().map(|(q, &n)| self.levels[q][n as usize]).sum()
    }

    /// `E(a) - E(b)` summed over the modes that differ, so spectator levels
    /// never enter the rounding.
    pub fn gap(&self, a: &[u8], b: &[u8]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .filter(|(_, (x, y))| x != y)
            .map(|(q, (&x, &y))| self.levels[q][x as usize] - self.levels[q][y as usize])
            .sum()
    }

    /// Squeezed denominator `Δ_{X Y}`: `bars_x` = 0 for `1→0`, 1 for `2→1`, ...
    pub fn delta(&self, x: usize, bars_x: usize, y: usize, bars_y: usize) -> SqueezedDelta {
        SqueezedDelta {
            x,
            bars_x,
            y,
            bars_y,
            value: self.transition(x, bars_x) - self.transition(y, bars_y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedDelta {
    pub x: usize,
    pub bars_x: usize,
    pub y: usize,
    pub bars_y: usize,
    pub value: f64,
}

/// Bare level-dependent exchange rates; bosonic prefactors are applied at
/// evaluation time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelJTable {
    pub n_qubits: usize,
    pub entries: BTreeMap<JKey, f64>,
}

impl LevelJTable {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_effective(eff: &EffectiveQubitH) -> Self {
        Self {
            n_qubits: eff.n_qubits(),
            entries: eff.j_table.clone(),
        }
    }

    /// Same `J` on every level transition of the given pairs.
    pub fn uniform(n_qubits: usize, levels: usize, pairs: &[(usize, usize, f64)]) -> Self {
        let mut t = Self::new(n_qubits);
        for &(i, j, v) in pairs {
            for m in 0..levels.saturating_sub(1) as u8 {
                for n in 0..levels.saturating_sub(1) as u8 {
                    t.set(i, j, m, n, v);
                }
            }
        }
        t
    }

    /// Level-resolved first-order estimates from a layout's edges, using
    /// the transition frequencies of `freqs` for each level pair.
    pub fn from_layout_estimates(layout: &DeviceLayout, freqs: &FrequencyTable) -> Result<Self> {
        let nq = layout.qubits.len();
        let mut t = Self::new(nq);
        for i in 0..nq {
            for j in (i + 1)..nq {
                let (qi, qj) = (&layout.qubits[i].id, &layout.qubits[j].id);
                let direct = layout
                    .edge(qi, qj)
                    .filter(|e| e.kind != EdgeKind::QubitCoupler)
                    .map(|e| e.strength);
                let shared: Vec<_> = layout
                    .couplers
                    .iter()
                    .filter(|c| layout.strength(qi, &c.id) != 0.0 && layout.strength(qj, &c.id) != 0.0)
                    .collect();
                if direct.is_none() && shared.is_empty() {
                    continue;
                }
                for m in 0..freqs.levels[i].len().saturating_sub(1) {
                    for n in 0..freqs.levels[j].len().saturating_sub(1) {
                        let (fi, fj) = (freqs.transition(i, m), freqs.transition(j, n));
                        let mut v = direct.unwrap_or(0.0);
                        for c in &shared {
                            v += perturbative_j(
                                0.0,
                                layout.strength(qi, &c.id),
                                layout.strength(qj, &c.id),
                                c.freq,
                                fi,
                                fj,
                            )?;
                        }
                        t.set(i, j, m as u8, n as u8, v);
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn set(&mut self, i: usize, j: usize, m: u8, n: u8, v: f64) {
        self.entries.insert(JKey::new(i, j, m, n), v);
    }

    /// `J` for `i: m→m+1`, `j: n+1→n`; zero when absent.
    pub fn get(&self, i: usize, j: usize, m: u8, n: u8) -> f64 {
        self.entries.get(&JKey::new(i, j, m, n)).copied().unwrap_or(0.0)
    }

    /// `J_{X Y}` in overline notation.
    pub fn bar(&self, x: usize, bars_x: u8, y: usize, bars_y: u8) -> f64 {
        self.get(x, y, bars_x, bars_y)
    }

    pub fn coupled(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.entries
            .range(JKey { i: a, j: b, m: 0, n: 0 }..=JKey { i: a, j: b, m: u8::MAX, n: u8::MAX })
            .next()
            .is_some()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            entries: self.entries.iter().map(|(k, v)| (*k, v * lambda)).collect(),
        }
    }
}

fn check_gap(d: &SqueezedDelta, opts: &PertOptions) -> Result<f64> {
    if d.value.abs() < opts.resonance_floor {
        return Err(Error::NonPerturbative(format!(
            "|Δ| = {:.3e} MHz below the resonance floor between qubits {} and {}",
            d.value.abs(),
            d.x,
            d.y
        )));
    }
    Ok(d.value)
}

/// Second-order two-body coefficient (normalized α):
/// `½ [J_{i j̄}² / Δ_{i j̄} − J_{ī j}² / Δ_{ī j}]`.
pub fn alpha_zz_2nd(i: usize, j: usize, jt: &LevelJTable, ft: &FrequencyTable, opts: &PertOptions) -> Result<f64> {
    let d_ijb = check_gap(&ft.delta(i, 0, j, 1), opts)?;
    let d_ibj = check_gap(&ft.delta(i, 1, j, 0), opts)?;
    let (a, b) = (jt.bar(i, 0, j, 1), jt.bar(i, 1, j, 0));
    Ok(0.5 * (a * a / d_ijb - b * b / d_ibj))
}

/// Third-order two-body coefficient, summed over spectators `k ≠ i, j`.
pub fn alpha_zz_3rd(i: usize, j: usize, jt: &LevelJTable, ft: &FrequencyTable, opts: &PertOptions) -> Result<f64> {
    let mut total = 0.0;
    for k in (0..ft.n_qubits()).filter(|&k| k != i && k != j) {
        total += zz3_terms(i, j, k, jt, ft, opts)?.iter().sum::<f64>();
    }
    Ok(total)
}

/// The seven spectator-`k` terms of the third-order two-body coefficient,
/// in display order. The last three enter with unit weight.
pub fn zz3_terms(
    i: usize,
    j: usize,
    k: usize,
    jt: &LevelJTable,
    ft: &FrequencyTable,
    opts: &PertOptions,
) -> Result<[f64; 7]> {
    let d = |x, bx, y, by| check_gap(&ft.delta(x, bx, y, by), opts);
    let jb = |x, bx, y, by| jt.bar(x, bx, y, by);
    Ok([
        jb(i, 0, j, 0) * jb(i, 0, k, 0) * jb(j, 0, k, 0) / (d(i, 0, k, 0)? * d(j, 0, k, 0)?),
        jb(i, 0, j, 0) * jb(i, 0, k, 1) * jb(j, 0, k, 1) / (d(i, 0, k, 1)? * d(j, 0, k, 1)?),
        -jb(i, 1, j, 0) * jb(i, 1, k, 0) * jb(j, 0, k, 0) / (d(i, 1, k, 0)? * d(j, 0, k, 0)?),
        -jb(i, 0, j, 1) * jb(i, 0, k, 0) * jb(j, 1, k, 0) / (d(i, 0, k, 0)? * d(j, 1, k, 0)?),
        jb(i, 1, j, 1) * jb(i, 1, k, 0) * jb(j, 1, k, 0) / (d(i, 1, k, 0)? * d(j, 1, k, 0)?),
        jb(i, 1, k, 1) * jb(i, 1, j, 0) * jb(k, 1, j, 0) / (d(i, 1, j, 0)? * d(k, 1, j, 0)?),
        jb(j, 1, k, 1) * jb(j, 1, i, 0) * jb(k, 1, i, 0) / (d(j, 1, i, 0)? * d(k, 1, i, 0)?),
    ])
}

/// Lowest-order three-body coefficient (normalized α), minus the sum of six
/// loop terms.
pub fn alpha_zzz_3rd(
    i: usize,
    j: usize,
    k: usize,
    jt: &LevelJTable,
    ft: &FrequencyTable,
    opts: &PertOptions,
) -> Result<f64> {
    let d = |x, bx, y, by| check_gap(&ft.delta(x, bx, y, by), opts);
    let jb = |x, bx, y, by| jt.bar(x, bx, y, by);
    let terms = [
        jb(i, 0, j, 0) * jb(i, 0, k, 1) * jb(j, 0, k, 1) / (d(i, 0, k, 1)? * d(j, 0, k, 1)?),
        jb(i, 0, k, 0) * jb(i, 0, j, 1) * jb(k, 0, j, 1) / (d(i, 0, j, 1)? * d(k, 0, j, 1)?),
        jb(j, 0, k, 0) * jb(j, 0, i, 1) * jb(k, 0, i, 1) / (d(j, 0, i, 1)? * d(k, 0, i, 1)?),
        jb(i, 1, j, 1) * jb(i, 1, k, 0) * jb(j, 1, k, 0) / (d(i, 1, k, 0)? * d(j, 1, k, 0)?),
        jb(i, 1, k, 1) * jb(i, 1, j, 0) * jb(k, 1, j, 0) / (d(i, 1, j, 0)? * d(k, 1, j, 0)?),
        jb(j, 1, k, 1) * jb(j, 1, i, 0) * jb(k, 1, i, 0) / (d(j, 1, i, 0)? * d(k, 1, i, 0)?),
    ];
    Ok(-terms.iter().sum::<f64>())
}

/// One excitation moves from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hop {
    pub from: usize,
    pub to: usize,
    /// Level of `from` before the hop.
    pub from_level: u8,
    /// Level of `to` before the hop.
    pub to_level: u8,
}

impl Hop {
    /// Matrix element `√(n_from (n_to + 1)) J`.
    pub fn amplitude(&self, jt: &LevelJTable) -> f64 {
        let bosonic = ((self.from_level as f64) * (self.to_level as f64 + 1.0)).sqrt();
        bosonic * jt.get(self.to, self.from, self.to_level, self.from_level - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagram {
    pub marked: Vec<u8>,
    /// Intermediate levels, in traversal order.
    pub path: Vec<Vec<u8>>,
    pub hops: Vec<Hop>,
    pub sign: f64,
    pub symmetry_factor: u32,
}

impl Diagram {
    pub fn order(&self) -> usize {
        self.hops.len()
    }
}

fn label(occ: &[u8]) -> String {
    occ.iter().map(|n| n.to_string()).collect()
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", label(&self.marked))?;
        for p in &self.path {
            write!(f, " -> {}", label(p))?;
        }
        write!(f, " -> {}", label(&self.marked))
    }
}

fn hops_from(occ: &[u8], jt: &LevelJTable, ft: &FrequencyTable) -> Vec<(Hop, Vec<u8>)> {
    let n = occ.len();
    let mut out = Vec::new();
    for a in 0..n {
        if occ[a] == 0 {
            continue;
        }
        for b in 0..n {
            if a == b || (occ[b] as usize + 1) >= ft.levels[b].len() || !jt.coupled(a, b) {
                continue;
            }
            let mut next = occ.to_vec();
            next[a] -= 1;
            next[b] += 1;
            let hop = Hop {
                from: a,
                to: b,
                from_level: occ[a],
                to_level: occ[b],
            };
            out.push((hop, next));
        }
    }
    out
}

/// Closed paths of `p` hops from every computational level of `string`'s
/// register, one diagram per path up to reversal.
pub fn enumerate_diagrams(string: PauliString, p: usize, jt: &LevelJTable, ft: &FrequencyTable) -> Result<Vec<Diagram>> {
    if p < 2 {
        return Err(Error::Precondition("perturbative order must be at least 2".into()));
    }
    if string.weight() < 2 {
        return Err(Error::Precondition("string must carry at least two Z's".into()));
    }
    if string.n != ft.n_qubits() {
        return Err(Error::Precondition("string length differs from the frequency table".into()));
    }
    let n = string.n;
    let mut out = Vec::new();
    for s in 0..(1u64 << n) {
        let marked: Vec<u8> = (0..n).map(|q| (s >> q & 1) as u8).collect();
        let sign = string.sign(s);
        let mut stack = vec![(marked.clone(), Vec::<Vec<u8>>::new(), Vec::<Hop>::new())];
        while let Some((at, path, hops)) = stack.pop() {
            for (hop, next) in hops_from(&at, jt, ft) {
                let mut hops2 = hops.clone();
                hops2.push(hop);
                if hops2.len() == p {
                    if next == marked {
                        let reversed: Vec<_> = path.iter().rev().cloned().collect();
                        // Keep the lexicographically smaller traversal.
                        if reversed < path {
                            continue;
                        }
                        let symmetry_factor = if reversed == path { 1 } else { 2 };
                        out.push(Diagram {
                            marked: marked.clone(),
                            path: path.clone(),
                            hops: hops2,
                            sign,
                            symmetry_factor,
                        });
                    }
                } else if next != marked {
                    let mut path2 = path.clone();
                    path2.push(next.clone());
                    stack.push((next, path2, hops2));
                }
            }
        }
    }
    out.sort_by(|a, b| (&a.marked, &a.path).cmp(&(&b.marked, &b.path)));
    Ok(out)
}

/// `sign · symmetry · ∏ V / ∏ (E_marked − E_intermediate)`, unnormalized.
pub fn evaluate_diagram(d: &Diagram, jt: &LevelJTable, ft: &FrequencyTable, opts: &PertOptions) -> Result<f64> {
    if d.hops.len() > 3 {
        return Err(Error::Precondition("orders above 3 are not supported".into()));
    }
    let amps: Vec<f64> = d.hops.iter().map(|h| h.amplitude(jt)).collect();
    let numer: f64 = amps.iter().product();
    if numer == 0.0 {
        return Ok(0.0);
    }
    let mut denom = 1.0;
    for (k, inter) in d.path.iter().enumerate() {
        let gap = ft.gap(&d.marked, inter);
        if gap.abs() < opts.resonance_floor {
            return Err(Error::NonPerturbative(format!(
                "gap {:.3e} MHz between {} and {} in diagram {d}",
                gap,
                label(&d.marked),
                label(inter)
            )));
        }
        for amp in [amps[k], amps[k + 1]] {
            if (amp / gap).abs() > opts.max_ratio {
                return Err(Error::NonPerturbative(format!(
                    "|J/Δ| = {:.3} exceeds {} in diagram {d}",
                    (amp / gap).abs(),
                    opts.max_ratio
                )));
            }
        }
        denom *= gap;
    }
    Ok(d.sign * d.symmetry_factor as f64 * numer / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbativeResult {
    pub string: PauliString,
    pub order: usize,
    /// Normalized α in MHz.
    pub value: f64,
    /// Each diagram with its normalized contribution.
    pub terms: Vec<(Diagram, f64)>,
}

impl PerturbativeResult {
    /// One line per diagram: marked level, path, sign, contribution.
    pub fn write_terms(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let res: std::io::Result<()> = (|| {
            writeln!(w, "# {} order {} alpha {:.12e} MHz", self.string, self.order, self.value)?;
            writeln!(w, "# normalized by 2^-N; reversed traversals folded into a factor 2")?;
            writeln!(w, "# three-level loop terms of the two-body third order enter with weight 1")?;
            for (d, v) in &self.terms {
                writeln!(w, "{}\t{}\t{:+}\t{:.12e}", label(&d.marked), d, d.sign, v)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }
}

/// Order-`p` coefficient of `string` by diagram enumeration (p = 2 or 3).
pub fn generic_pauli_order(
    string: PauliString,
    p: usize,
    jt: &LevelJTable,
    ft: &FrequencyTable,
    opts: &PertOptions,
) -> Result<PerturbativeResult> {
    if p > 3 {
        return Err(Error::Precondition("orders above 3 are not supported".into()));
    }
    let norm = 1.0 / (1u64 << string.n) as f64;
    let mut terms = Vec::new();
    let mut value = 0.0;
    for d in enumerate_diagrams(string, p, jt, ft)? {
        let v = norm * evaluate_diagram(&d, jt, ft, opts)?;
        value += v;
        terms.push((d, v));
    }
    Ok(PerturbativeResult {
        string,
        order: p,
        value,
        terms,
    })
}

/// Second- plus third-order coefficient for every string of Z-weight 2..=3.
pub fn perturbative_table(
    jt: &LevelJTable,
    ft: &FrequencyTable,
    opts: &PertOptions,
) -> Result<Vec<(PauliString, f64, f64)>> {
    let n = ft.n_qubits();
    let mut out = Vec::new();
    for mask in 0..(1u64 << n) {
        let p = PauliString::new(n, mask)?;
        if !(2..=3).contains(&p.weight()) {
            continue;
        }
        let a2 = generic_pauli_order(p, 2, jt, ft, opts)?.value;
        let a3 = generic_pauli_order(p, 3, jt, ft, opts)?.value;
        out.push((p, a2, a3));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
