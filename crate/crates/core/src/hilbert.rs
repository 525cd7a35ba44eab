//! Truncated multi-mode bosonic basis, the circuit Hamiltonian in it, and
//! Hermitian eigensolvers.
//!
//! Every transmon and coupler is a Duffing mode,
//! `E_n = n f + (δ/2) n (n - 1)`, and every edge contributes
//! `-G (b - b†)(a - a†)`: exchange `+G (b† a + b a†)` plus the
//! counter-rotating `-G (b a + b† a†)`, which is dropped under the RWA.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceLayout;
use crate::{Error, Result};

pub const DEFAULT_BASIS_LIMIT: usize = 200_000;
/// Dense solves are used up to this dimension.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    Qubit,
    Coupler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub id: String,
    pub kind: ModeKind,
    pub n_levels: usize,
    pub freq: f64,
    pub anharmonicity: f64,
}

impl Mode {
    pub fn level_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        n * self.freq + 0.5 * self.anharmonicity * n * (n - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Overrides the layout's per-transmon level count.
    pub qubit_levels: Option<usize>,
    /// Overrides the layout's per-coupler level count.
    pub coupler_levels: Option<usize>,
    /// Per-mode overrides, applied last.
    #[serde(default)]
    pub level_caps: BTreeMap<String, usize>,
    pub total_excitation_cap: Option<usize>,
    /// Admit a state only if its bare energy is at most this, in MHz.
    pub bare_energy_cutoff: Option<f64>,
    pub hard_limit: usize,
}

impl Default for TruncationPolicy {
    /// Five excitations cover the full computational manifold of a unit cell.
    fn default() -> Self {
        Self {
            qubit_levels: None,
            coupler_levels: None,
            level_caps: BTreeMap::new(),
            total_excitation_cap: Some(5),
            bare_energy_cutoff: None,
            hard_limit: DEFAULT_BASIS_LIMIT,
        }
    }
}

impl TruncationPolicy {
    pub fn uncapped() -> Self {
        Self {
            total_excitation_cap: None,
            ..Self::default()
        }
    }

    pub fn with_levels(qubit: usize, coupler: usize, cap: Option<usize>) -> Self {
        Self {
            qubit_levels: Some(qubit),
            coupler_levels: Some(coupler),
            total_excitation_cap: cap,
            ..Self::default()
        }
    }

    /// Parses `Q,C[,CAP]`, e.g. `4,3,5`; `-` for CAP means uncapped.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad truncation field `{s}`")))
        };
        match parts.as_slice() {
            [q, c] => Ok(Self::with_levels(num(q)?, num(c)?, Some(5))),
            [q, c, "-"] => Ok(Self::with_levels(num(q)?, num(c)?, None)),
            [q, c, cap] => Ok(Self::with_levels(num(q)?, num(c)?, Some(num(cap)?))),
            _ => Err(Error::Parse(format!("truncation must be Q,C[,CAP], got `{spec}`"))),
        }
    }

    fn levels_for(&self, id: &str, kind: ModeKind, layout_levels: usize) -> usize {
        let base = match kind {
            ModeKind::Qubit => self.qubit_levels,
            ModeKind::Coupler => self.coupler_levels,
        }
        .unwrap_or(layout_levels);
        self.level_caps.get(id).copied().unwrap_or(base)
    }
}

/// Modes of a layout: qubits first, then couplers, each in layout order.
pub fn layout_modes(layout: &DeviceLayout, policy: &TruncationPolicy) -> Vec<Mode> {
    let mut modes = Vec::new();
    for q in &layout.qubits {
        modes.push(Mode {
            id: q.id.clone(),
            kind: ModeKind::Qubit,
            n_levels: policy.levels_for(&q.id, ModeKind::Qubit, q.n_levels),
            freq: q.freq_idle,
            anharmonicity: q.anharmonicity,
        });
    }
    for c in &layout.couplers {
        modes.push(Mode {
            id: c.id.clone(),
            kind: ModeKind::Coupler,
            n_levels: policy.levels_for(&c.id, ModeKind::Coupler, c.n_levels),
            freq: c.freq,
            anharmonicity: c.anharmonicity,
        });
    }
    modes
}

pub type Occupation = Vec<u8>;

#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub modes: Vec<Mode>,
    pub states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl ModeBasis {
    pub fn new(modes: Vec<Mode>, policy: &TruncationPolicy) -> Result<Self> {
        for m in &modes {
            if m.n_levels < 2 {
                return Err(Error::Precondition(format!("mode {} needs >= 2 levels", m.id)));
            }
        }
        let mut states = Vec::new();
        let mut current = vec![0u8; modes.len()];
        enumerate(&modes, policy, 0, 0, 0.0, &mut current, &mut states)?;
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { modes, states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn mode_index(&self, id: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.id == id)
    }

    pub fn qubit_modes(&self) -> Vec<usize> {
        (0..self.modes.len())
            .filter(|&i| self.modes[i].kind == ModeKind::Qubit)
            .collect()
    }

    pub fn bare_energy(&self, occ: &[u8]) -> f64 {
        self.modes
            .iter()
            .zip(occ)
            .map(|(m, &n)| m.level_energy(n as usize))
            .sum()
    }

    pub fn excitations(&self, state: usize) -> usize {
        self.states[state].iter().map(|&n| n as usize).sum()
    }

    /// State ordinals grouped by total excitation number.
    pub fn excitation_blocks(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.len() {
            blocks.entry(self.excitations(i)).or_default().push(i);
        }
        blocks
    }

    /// True when every coupler mode is in its ground state.
    pub fn couplers_ground(&self, state: usize) -> bool {
        self.modes
            .iter()
            .zip(&self.states[state])
            .all(|(m, &n)| m.kind == ModeKind::Qubit || n == 0)
    }

    pub fn label(&self, state: usize) -> String {
        self.states[state].iter().map(|n| n.to_string()).collect()
    }
}

fn enumerate(
    modes: &[Mode],
    policy: &TruncationPolicy,
    depth: usize,
    used: usize,
    energy: f64,
    current: &mut Occupation,
    out: &mut Vec<Occupation>,
) -> Result<()> {
    if depth == modes.len() {
        if policy.bare_energy_cutoff.is_some_and(|cut| energy > cut) {
            return Ok(());
        }
        if out.len() == policy.hard_limit {
            return Err(Error::BasisTooLarge {
                size: out.len() + 1,
                limit: policy.hard_limit,
            });
        }
        out.push(current.clone());
        return Ok(());
    }
    let mode = &modes[depth];
    for n in 0..mode.n_levels {
        if policy.total_excitation_cap.is_some_and(|cap| used + n > cap) {
            break;
        }
        current[depth] = n as u8;
        enumerate(modes, policy, depth + 1, used + n, energy + mode.level_energy(n), current, out)?;
    }
    current[depth] = 0;
    Ok(())
}

pub fn build_basis(layout: &DeviceLayout, policy: &TruncationPolicy) -> Result<ModeBasis> {
    ModeBasis::new(layout_modes(layout, policy), policy)
}

/// Real symmetric sparse matrix in MHz; both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub dim: usize,
    /// `(row, col, value)`, sorted by row then column, no duplicates.
    pub entries: Vec<(usize, usize, f64)>,
}

impl OperatorMatrix {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        Self { dim, entries }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(r, c)))
            .map_or(0.0, |i| self.entries[i].2)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|e| e.0 == e.1)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.2.abs()))
    }

    /// Largest `|H_rc - H_cr|` relative to the largest entry.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.entries
            .iter()
            .map(|&(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Frobenius norm, used as the scale in residual checks.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    /// Dense principal submatrix on `indices`, in that order.
    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<f64> {
        let pos: HashMap<usize, usize> = indices.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for &(r, c, v) in &self.entries {
            if let (Some(&i), Some(&j)) = (pos.get(&r), pos.get(&c)) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Coordinate-format text dump: one `row col value` line per entry.
    pub fn write_coo(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let res: std::io::Result<()> = (|| {
            writeln!(w, "# dim {}", self.dim)?;
            for &(r, c, v) in &self.entries {
                writeln!(w, "{r} {c} {v:.17e}")?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }
}

pub fn build_hamiltonian(layout: &DeviceLayout, basis: &ModeBasis, rwa: bool) -> Result<OperatorMatrix> {
    let mut pairs = Vec::new();
    for e in &layout.edges {
        let a = basis
            .mode_index(&e.endpoints[0])
            .ok_or_else(|| Error::UnknownElement(e.endpoints[0].clone()))?;
        let b = basis
            .mode_index(&e.endpoints[1])
            .ok_or_else(|| Error::UnknownElement(e.endpoints[1].clone()))?;
        if e.strength != 0.0 {
            pairs.push((a, b, e.strength));
        }
    }
    Ok(assemble(basis, &pairs, rwa))
}

/// Assembles the Hamiltonian for explicit `(mode, mode, G)` couplings.
pub fn assemble(basis: &ModeBasis, couplings: &[(usize, usize, f64)], rwa: bool) -> OperatorMatrix {
    let mut t = Vec::new();
    let mut target = Vec::new();
    for (i, occ) in basis.states.iter().enumerate() {
        t.push((i, i, basis.bare_energy(occ)));
        for &(a, b, g) in couplings {
            let (na, nb) = (occ[a] as f64, occ[b] as f64);
            // Exchange, both directions: lower one mode and raise the other.
            for (lo, hi, nlo, nhi) in [(a, b, na, nb), (b, a, nb, na)] {
                if nlo > 0.0 {
                    target.clone_from(occ);
                    target[lo] -= 1;
                    target[hi] += 1;
                    if let Some(j) = basis.index_of(&target) {
                        t.push((j, i, g * (nlo * (nhi + 1.0)).sqrt()));
                    }
                }
            }
            if !rwa {
                if na > 0.0 && nb > 0.0 {
                    target.clone_from(occ);
                    target[a] -= 1;
                    target[b] -= 1;
                    if let Some(j) = basis.index_of(&target) {
                        t.push((j, i, -g * (na * nb).sqrt()));
                    }
                }
                target.clone_from(occ);
                target[a] += 1;
                target[b] += 1;
                if let Some(j) = basis.index_of(&target) {
                    t.push((j, i, -g * ((na + 1.0) * (nb + 1.0)).sqrt()));
                }
            }
        }
    }
    OperatorMatrix::from_triplets(basis.len(), t)
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending, MHz.
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `‖Hv − λv‖` over all pairs.
    pub fn max_residual(&self, h: &OperatorMatrix) -> f64 {
        let mut y = vec![0.0; h.dim];
        (0..self.len())
            .map(|k| {
                let v = self.vectors.column(k);
                h.matvec(v.as_slice(), &mut y);
                y.iter()
                    .zip(v.iter())
                    .map(|(hy, x)| (hy - self.values[k] * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn first_significant(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter().position(|x| x.abs() > 1e-8 * scale).unwrap_or(0)
}

/// Sorts pairs by (eigenvalue, first significant component) and fixes each
/// vector's sign so that component is positive.
fn canonicalize(values: Vec<f64>, vectors: DMatrix<f64>, k: Option<usize>) -> Spectrum {
    let n = values.len();
    let keys: Vec<(f64, usize)> = (0..n)
        .map(|i| (values[i], first_significant(vectors.column(i).as_slice())))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let scale = values.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    order.sort_by(|&a, &b| {
        let (va, fa) = keys[a];
        let (vb, fb) = keys[b];
        if (va - vb).abs() <= 1e-12 * scale {
            fa.cmp(&fb)
        } else {
            va.total_cmp(&vb)
        }
    });
    let take = k.unwrap_or(n).min(n);
    let mut out = DMatrix::zeros(vectors.nrows(), take);
    let mut vals = Vec::with_capacity(take);
    for (dst, &src) in order.iter().take(take).enumerate() {
        let col = vectors.column(src);
        let sign = if col[keys[src].1] < 0.0 { -1.0 } else { 1.0 };
        out.set_column(dst, &(col * sign));
        vals.push(values[src]);
    }
    Spectrum {
        values: vals,
        vectors: out,
    }
}

pub fn eigensolve_dense(h: &DMatrix<f64>, k: Option<usize>) -> Spectrum {
    let eig = SymmetricEigen::new(h.clone());
    canonicalize(eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors, k)
}

pub fn eigensolve(h: &OperatorMatrix, k: Option<usize>) -> Result<Spectrum> {
    if h.dim <= DENSE_LIMIT || k.is_none_or(|k| k >= h.dim / 2) {
        return Ok(eigensolve_dense(&h.to_dense(), k));
    }
    lanczos(h, k.unwrap(), &LanczosOptions::default())
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_krylov: 3000,
            seed: 0x5eed,
        }
    }
}

/// Lowest `k` eigenpairs by Lanczos with full reorthogonalization. The
/// Krylov space grows until every wanted residual is below
/// `tol · ‖H‖_F` or `max_krylov` is reached.
pub fn lanczos(h: &OperatorMatrix, k: usize, opts: &LanczosOptions) -> Result<Spectrum> {
    let n = h.dim;
    let k = k.min(n);
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut q0);
    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut next_check = (2 * k + 20).min(n);
    let limit = opts.max_krylov.min(n);
    loop {
        let j = basis.len() - 1;
        h.matvec(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        // Twice-applied Gram-Schmidt against the whole Krylov basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        let b = norm(&w);
        let m = basis.len();
        let exhausted = b <= 1e-13 * scale;
        if m >= next_check || m >= limit || exhausted {
            let t = tridiagonal(&alpha, &beta);
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let want = k.min(m);
            // Ritz residual: |β_m · last component of the Ritz vector|.
            let worst = order
                .iter()
                .take(want)
                .map(|&i| (b * eig.eigenvectors[(m - 1, i)]).abs())
                .fold(0.0, f64::max);
            if (want == k && worst <= opts.tol * scale) || exhausted {
                let mut vectors = DMatrix::zeros(n, want);
                let mut values = Vec::with_capacity(want);
                for (dst, &i) in order.iter().take(want).enumerate() {
                    let mut v: DVector<f64> = DVector::zeros(n);
                    for (r, q) in basis.iter().enumerate() {
                        let c = eig.eigenvectors[(r, i)];
                        for (x, qv) in v.iter_mut().zip(q) {
                            *x += c * qv;
                        }
                    }
                    let nv = v.norm();
                    vectors.set_column(dst, &(v / nv));
                    values.push(eig.eigenvalues[i]);
                }
                if want < k {
                    return Err(Error::NonConvergence {
                        residual: worst,
                        iterations: m,
                    });
                }
                return Ok(canonicalize(values, vectors, None));
            }
            if m >= limit {
                return Err(Error::NonConvergence {
                    residual: worst,
                    iterations: m,
                });
            }
            next_check = (next_check + next_check / 2).min(limit);
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w.clone());
    }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += c * xv;
    }
}

/// Full spectrum of one excitation-number block under the RWA.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub excitations: usize,
    /// Basis ordinals of the block, in the row order of `spectrum.vectors`.
    pub states: Vec<usize>,
    pub spectrum: Spectrum,
}

/// Diagonalizes every excitation block up to `max_excitations` (all when
/// `None`). Only valid for RWA Hamiltonians.
pub fn block_spectra(
    h: &OperatorMatrix,
    basis: &ModeBasis,
    max_excitations: Option<usize>,
) -> Result<Vec<BlockSpectrum>> {
    let blocks: Vec<(usize, Vec<usize>)> = basis
        .excitation_blocks()
        .into_iter()
        .filter(|(n, _)| max_excitations.is_none_or(|m| *n <= m))
        .collect();
    blocks
        .into_par_iter()
        .map(|(n, states)| {
            let sub = h.submatrix(&states);
            let spectrum = if states.len() <= DENSE_LIMIT {
                eigensolve_dense(&sub, None)
            } else {
                eigensolve(&OperatorMatrix::from_dense(&sub), Some(states.len().min(256)))?
            };
            Ok(BlockSpectrum {
                excitations: n,
                states,
                spectrum,
            })
        })
        .collect()
}

/// Energy of the eigenstate with the largest overlap on a bare occupation.
pub fn dressed_energy(blocks: &[BlockSpectrum], basis: &ModeBasis, occ: &[u8]) -> Option<f64> {
    let idx = basis.index_of(occ)?;
    let n: usize = occ.iter().map(|&x| x as usize).sum();
    let block = blocks.iter().find(|b| b.excitations == n)?;
    let row = block.states.iter().position(|&s| s == idx)?;
    let v = &block.spectrum.vectors;
    let best = (0..v.ncols()).max_by(|&a, &b| v[(row, a)].abs().total_cmp(&v[(row, b)].abs()))?;
    Some(block.spectrum.values[best])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub policy: usize,
    pub basis_size: usize,
    pub state: String,
    pub energy_mhz: f64,
    /// Change from the previous policy; zero for the first.
    pub drift_mhz: f64,
}

/// Tracks computational-manifold energies (qubits in 0/1, couplers at
/// ground) across a sequence of truncation policies.
pub fn convergence_check(layout: &DeviceLayout, policies: &[TruncationPolicy]) -> Result<Vec<ConvergenceRow>> {
    if policies.len() < 2 {
        return Err(Error::Precondition("convergence check needs at least two policies".into()));
    }
    let nq = layout.qubits.len();
    let mut rows = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for (p, policy) in policies.iter().enumerate() {
        let basis = build_basis(layout, policy)?;
        let h = build_hamiltonian(layout, &basis, true)?;
        let max_n = policy.total_excitation_cap.unwrap_or(nq).min(nq);
        let blocks = block_spectra(&h, &basis, Some(max_n))?;
        let mut energies = Vec::new();
        let mut labels = Vec::new();
        for s in 0u32..(1 << nq) {
            if (s.count_ones() as usize) > max_n {
                continue;
            }
            let mut occ = vec![0u8; basis.modes.len()];
            for q in 0..nq {
                occ[q] = ((s >> (nq - 1 - q)) & 1) as u8;
            }
            let e = dressed_energy(&blocks, &basis, &occ)
                .ok_or_else(|| Error::MissingEnergy(format!("{occ:?}")))?;
            energies.push(e);
            labels.push(occ[..nq].iter().map(|n| n.to_string()).collect::<String>());
        }
        for (i, (e, l)) in energies.iter().zip(labels).enumerate() {
            let drift = prev.as_ref().map_or(0.0, |pv| e - pv[i]);
            rows.push(ConvergenceRow {
                policy: p,
                basis_size: basis.len(),
                state: l,
                energy_mhz: *e,
                drift_mhz: drift,
            });
        }
        prev = Some(energies);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{single_cell, CouplerSpec, CouplingEdge, DeviceDefaults, EdgeKind, TransmonSpec};
    use approx::assert_relative_eq;

    fn transmon(id: &str, f: f64, levels: usize) -> TransmonSpec {
        TransmonSpec {
            id: id.into(),
            freq_idle: f,
            anharmonicity: -200.0,
            n_levels: levels,
            t1: None,
            tunable: false,
            band: None,
        }
    }

    fn two_qubits(f1: f64, f2: f64, g: f64) -> DeviceLayout {
        DeviceLayout {
            qubits: vec![transmon("A", f1, 3), transmon("B", f2, 3)],
            edges: vec![CouplingEdge::new("A", "B", g, EdgeKind::Radial)],
            ..Default::default()
        }
    }

    #[test]
    fn single_transmon_levels() {
        let l = DeviceLayout {
            qubits: vec![transmon("A", 5000.0, 4)],
            ..Default::default()
        };
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        assert_eq!(b.len(), 4);
        let h = build_hamiltonian(&l, &b, true).unwrap();
        let d = h.diagonal();
        for n in 0..4 {
            let nf = n as f64;
            assert_eq!(d[n], nf * 5000.0 - 100.0 * nf * (nf - 1.0));
        }
    }

    #[test]
    fn uncapped_cell_size() {
        let l = single_cell(&DeviceDefaults::default(), [6450.0, 6000.0, 6090.0, 6000.0, 6090.0]);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        assert_eq!(b.len(), 4usize.pow(5) * 3usize.pow(4));
    }

    #[test]
    fn hard_limit() {
        let l = single_cell(&DeviceDefaults::default(), [6450.0, 6000.0, 6090.0, 6000.0, 6090.0]);
        let p = TruncationPolicy {
            hard_limit: 1000,
            ..TruncationPolicy::uncapped()
        };
        assert!(matches!(build_basis(&l, &p), Err(Error::BasisTooLarge { limit: 1000, .. })));
    }

    #[test]
    fn lexicographic_order() {
        let l = two_qubits(5000.0, 5100.0, 0.0);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        for w in b.states.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn resonant_exchange_splitting() {
        let l = two_qubits(5000.0, 5000.0, 12.5);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        let h = build_hamiltonian(&l, &b, true).unwrap();
        let blocks = block_spectra(&h, &b, Some(1)).unwrap();
        let one = &blocks[1].spectrum.values;
        assert_relative_eq!(one[1] - one[0], 25.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let l = two_qubits(5000.0, 5100.0, 0.0);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        assert!(build_hamiltonian(&l, &b, false).unwrap().is_diagonal());
    }

    #[test]
    fn rwa_conserves_excitations() {
        let l = single_cell(&DeviceDefaults::default(), [6450.0, 6000.0, 6090.0, 6000.0, 6090.0]);
        let b = build_basis(&l, &TruncationPolicy::default()).unwrap();
        let h = build_hamiltonian(&l, &b, true).unwrap();
        for &(r, c, _) in &h.entries {
            assert_eq!(b.excitations(r), b.excitations(c));
        }
        let bare: f64 = b.states.iter().map(|s| b.bare_energy(s)).sum();
        assert_relative_eq!(h.trace(), bare, max_relative = 1e-12);
        assert_eq!(h.hermiticity_error(), 0.0);
    }

    #[test]
    fn counter_rotating_terms_present() {
        let l = two_qubits(5000.0, 5100.0, 10.0);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        let h = build_hamiltonian(&l, &b, false).unwrap();
        let g = b.index_of(&[0, 0]).unwrap();
        let e11 = b.index_of(&[1, 1]).unwrap();
        assert_eq!(h.get(g, e11), -10.0);
        let e01 = b.index_of(&[0, 1]).unwrap();
        let e10 = b.index_of(&[1, 0]).unwrap();
        assert_eq!(h.get(e01, e10), 10.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let (g, d) = (3.0, 7.0);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, g, g, d]);
        let s = eigensolve_dense(&m, None);
        let root = (d * d + 4.0 * g * g).sqrt();
        assert_relative_eq!(s.values[0], (d - root) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.values[1], (d + root) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_sorted() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let s = eigensolve(&OperatorMatrix::from_dense(&m), None).unwrap();
        assert_eq!(s.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn lanczos_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, i as f64 * 0.5 + rng.gen::<f64>()));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v = rng.gen::<f64>() - 0.5;
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        let h = OperatorMatrix::from_triplets(n, t);
        let dense = eigensolve_dense(&h.to_dense(), Some(6));
        let lz = lanczos(&h, 6, &LanczosOptions::default()).unwrap();
        for i in 0..6 {
            assert_relative_eq!(dense.values[i], lz.values[i], epsilon = 1e-8);
        }
        assert!(lz.max_residual(&h) <= 1e-8 * h.norm());
    }

    #[test]
    fn lanczos_budget_reports_residual() {
        let n = 400;
        let t = (0..n)
            .flat_map(|i| {
                let mut v = vec![(i, i, (i as f64).sqrt())];
                if i + 1 < n {
                    v.push((i, i + 1, 1.0));
                    v.push((i + 1, i, 1.0));
                }
                v
            })
            .collect();
        let h = OperatorMatrix::from_triplets(n, t);
        let opts = LanczosOptions {
            max_krylov: 10,
            ..Default::default()
        };
        match lanczos(&h, 5, &opts) {
            Err(Error::NonConvergence { residual, iterations }) => {
                assert!(residual > 0.0);
                assert_eq!(iterations, 10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn coo_dump() {
        let l = two_qubits(5000.0, 5100.0, 10.0);
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        let h = build_hamiltonian(&l, &b, true).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.coo");
        h.write_coo(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), h.entries.len() + 1);
    }

    #[test]
    fn convergence_zero_coupling_has_no_drift() {
        let l = two_qubits(5000.0, 5100.0, 0.0);
        let rows = convergence_check(
            &l,
            &[TruncationPolicy::with_levels(3, 3, None), TruncationPolicy::with_levels(4, 3, None)],
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.drift_mhz == 0.0));
    }

    #[test]
    fn harmonic_coupler_default() {
        let c = CouplerSpec {
            id: "C".into(),
            freq: 7000.0,
            band: [6000.0, 8000.0],
            n_levels: 3,
            anharmonicity: 0.0,
        };
        let l = DeviceLayout {
            couplers: vec![c],
            ..Default::default()
        };
        let b = build_basis(&l, &TruncationPolicy::uncapped()).unwrap();
        let h = build_hamiltonian(&l, &b, true).unwrap();
        assert_eq!(h.diagonal(), vec![0.0, 7000.0, 14000.0]);
    }

    #[test]
    fn policy_parse() {
        let p = TruncationPolicy::parse("3,2,-").unwrap();
        assert_eq!((p.qubit_levels, p.coupler_levels, p.total_excitation_cap), (Some(3), Some(2), None));
        assert!(TruncationPolicy::parse("x").is_err());
    }
}
