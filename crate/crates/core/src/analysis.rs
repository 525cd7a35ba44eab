//! Scan drivers: Hamiltonian tomography, processor error tomography,
//! ON/OFF overlays, side-coupling phase scans and fidelity sweeps.
//!
//! Every driver fans grid points out over rayon, keeps input order, and
//! records per-point failures as flags instead of aborting.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{prepare_cell, CalibrationOptions};
use crate::device::{single_cell, DeviceDefaults, DeviceLayout, EdgeKind};
use crate::effective::{pauli_coefficients, solve_layout, EffectiveQubitH, PauliCoefficients, SolveOptions};
use crate::gatesim::{cell_stray, optimize_gate, FidelityReport, GateOptions, NoiseLevel, StrayTerms};
use crate::perturbation::{perturbative_table, FrequencyTable, LevelJTable, PertOptions};
use crate::{Error, Result};

/// Coefficients below this magnitude are left out of power-law fits, MHz.
pub const FIT_FLOOR_MHZ: f64 = 1e-4;

/// Cell whose side pairs sit 30–50 MHz apart: clean weak-coupling power laws.
pub const POWER_LAW_CELL_FREQS: [f64; 5] = [6650.0, 6000.0, 6030.0, 6080.0, 6050.0];
/// Cell with 12–24 MHz side detunings, where three-body terms overtake
/// two-body ones at strong radial coupling.
pub const INVERSION_CELL_FREQS: [f64; 5] = [6650.0, 6000.0, 6012.0, 6024.0, 6048.0];

/// Single cell with the given radial and side couplings.
pub fn representative_cell(freqs: [f64; 5], g_radial: f64, g_side: f64) -> DeviceLayout {
    let d = DeviceDefaults {
        g_radial,
        g_side,
        ..DeviceDefaults::default()
    };
    single_cell(&d, freqs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateState {
    On,
    Off,
}

impl fmt::Display for GateState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateState::On => "ON",
            GateState::Off => "OFF",
        })
    }
}

/// Shared solver and calibration settings for scans.
#[derive(Debug, Clone)]
pub struct ScanContext {
    pub solve: SolveOptions,
    pub calibration: CalibrationOptions,
    /// `|J13|` used for the ON state, MHz.
    pub on_target: f64,
    pub pert: PertOptions,
}

impl Default for ScanContext {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            calibration: CalibrationOptions::default(),
            on_target: 15.0,
            pert: PertOptions::default(),
        }
    }
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFlag {
    pub context: String,
    pub message: String,
}

impl ScanFlag {
    fn new(context: impl Into<String>, e: &Error) -> Self {
        Self {
            context: context.into(),
            message: e.to_string(),
        }
    }
}

/// Largest |α| of weight 2 and 3 within one cell, with the strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMaxima {
    pub zz_max: f64,
    pub zz_string: String,
    pub zzz_max: f64,
    pub zzz_string: String,
}

impl CellMaxima {
    pub fn ratio(&self) -> f64 {
        if self.zz_max > 0.0 {
            self.zzz_max / self.zz_max
        } else {
            f64::INFINITY
        }
    }
}

pub fn cell_maxima(pc: &PauliCoefficients) -> CellMaxima {
    let pick = |w: usize| {
        pc.max_of_weight(w)
            .map_or((0.0, String::new()), |(p, v)| (v.abs(), p.to_string()))
    };
    let (zz_max, zz_string) = pick(2);
    let (zzz_max, zzz_string) = pick(3);
    CellMaxima {
        zz_max,
        zz_string,
        zzz_max,
        zzz_string,
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Single-cell layout with the cell's side couplings set to `g_side`.
fn cell_with_side(layout: &DeviceLayout, cell: &str, g_side: Option<f64>) -> Result<DeviceLayout> {
    let mut l = layout.cell_subcircuit(cell)?;
    if let Some(g) = g_side {
        l.set_kind_strength(EdgeKind::Side, g);
    }
    Ok(l)
}

/// Cell biased for `state` and solved on the exact path.
fn solve_state(l: &DeviceLayout, cell: &str, target: Option<f64>, resonant: bool, ctx: &ScanContext) -> Result<(DeviceLayout, EffectiveQubitH)> {
    let biased = prepare_cell(l, cell, target, resonant, &ctx.calibration)?;
    let eff = solve_layout(&biased, &ctx.solve)?;
    Ok((biased, eff))
}

fn exchange(eff: &EffectiveQubitH, a: &str, b: &str) -> f64 {
    match (eff.qubit_index(a), eff.qubit_index(b)) {
        (Some(i), Some(j)) => eff.j(i, j, 0, 0).unwrap_or(0.0),
        _ => 0.0,
    }
}

// ---------------------------------------------------------------- tomography

/// One Pauli string at one (J13, G_side) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRow {
    pub j_target: f64,
    pub g_side: f64,
    /// Achieved exchange, MHz.
    pub j13: f64,
    pub string: String,
    pub exact: f64,
    /// Second order.
    pub pert2: Option<f64>,
    /// Second plus third order.
    pub pert3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TomographyScan {
    pub cell: String,
    pub rows: Vec<TomographyRow>,
    pub flags: Vec<ScanFlag>,
}

/// Weight-2 and weight-3 coefficients at every `(J13, G_side)` point, exact
/// and perturbative. `J13 = 0` means hard-OFF.
pub fn tomography_scan(
    layout: &DeviceLayout,
    cell: &str,
    j_targets: &[f64],
    g_sides: &[f64],
    resonant: bool,
    ctx: &ScanContext,
) -> Result<TomographyScan> {
    let view = layout.cell(cell)?.clone();
    let points: Vec<(f64, f64)> = j_targets
        .iter()
        .flat_map(|&j| g_sides.iter().map(move |&g| (j, g)))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(j, g)| -> Result<Vec<TomographyRow>> {
            let l = cell_with_side(layout, cell, Some(g))?;
            let target = (j != 0.0).then_some(j);
            let (_, eff) = solve_state(&l, cell, target, resonant, ctx)?;
            let pc = pauli_coefficients(&eff)?;
            let j13 = exchange(&eff, &view.central, &view.sides[1]);
            let jt = LevelJTable::from_effective(&eff);
            let ft = FrequencyTable::dressed(&eff);
            let pert = perturbative_table(&jt, &ft, &ctx.pert).ok();
            let rows = pc
                .strings(3)
                .into_iter()
                .filter(|(p, _)| p.weight() >= 2)
                .map(|(p, exact)| {
                    let pt = pert.as_ref().and_then(|t| t.iter().find(|(q, _, _)| *q == p));
                    TomographyRow {
                        j_target: j,
                        g_side: g,
                        j13,
                        string: p.to_string(),
                        exact,
                        pert2: pt.map(|t| t.1),
                        pert3: pt.map(|t| t.1 + t.2),
                    }
                })
                .collect();
            Ok(rows)
        })
        .collect();
    let mut scan = TomographyScan {
        cell: cell.to_string(),
        ..Default::default()
    };
    for ((j, g), r) in points.iter().zip(results) {
        match r {
            Ok(rows) => scan.rows.extend(rows),
            Err(e) => scan.flags.push(ScanFlag::new(format!("{cell} J13={j} G_side={g}"), &e)),
        }
    }
    Ok(scan)
}

// ----------------------------------------------------------------------- PET

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetPoint {
    /// Gate coupler frequency, MHz.
    pub x: f64,
    pub j13: f64,
    pub maxima: CellMaxima,
}

impl PetPoint {
    pub fn ratio(&self) -> f64 {
        self.maxima.ratio()
    }
}

/// One cell's sweep across the gate coupler band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetRow {
    pub cell: String,
    pub points: Vec<PetPoint>,
    pub flags: Vec<ScanFlag>,
}

impl PetRow {
    pub fn max_ratio(&self) -> f64 {
        self.points.iter().map(PetPoint::ratio).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetScan {
    pub g_side: f64,
    pub rows: Vec<PetRow>,
}

/// Coupler grid for a PET sweep: `points` values starting `offset` MHz above
/// the bottom of the gate coupler's band and spanning `span` MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetGrid {
    pub points: usize,
    pub offset: f64,
    pub span: f64,
}

impl Default for PetGrid {
    fn default() -> Self {
        Self {
            points: 24,
            offset: 20.0,
            span: 1200.0,
        }
    }
}

/// Sweeps every cell's gate coupler across its band with the other
/// couplers at hard-OFF, recording |ZZ|_max, |ZZZ|_max and `J13`.
pub fn pet_scan(layout: &DeviceLayout, cells: &[String], grid: &PetGrid, g_side: f64, ctx: &ScanContext) -> Result<PetScan> {
    let mut jobs = Vec::new();
    let mut bases = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let view = layout.cell(cell)?.clone();
        let l = cell_with_side(layout, cell, Some(g_side))?;
        let band = l.coupler(&view.couplers[1]).unwrap().band;
        let lo = band[0] + grid.offset;
        let hi = (lo + grid.span).min(band[1] - 1.0);
        let base = prepare_cell(&l, cell, None, false, &ctx.calibration);
        for x in linear_grid(lo, hi, grid.points) {
            jobs.push((ci, x));
        }
        bases.push((view, base));
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(ci, x)| -> Result<PetPoint> {
            let (view, base) = &bases[ci];
            let mut l = base.as_ref().map_err(|e| Error::Calibration(e.to_string()))?.clone();
            l.coupler_mut(&view.couplers[1]).unwrap().freq = x;
            let eff = solve_layout(&l, &ctx.solve)?;
            Ok(PetPoint {
                x,
                j13: exchange(&eff, &view.central, &view.sides[1]),
                maxima: cell_maxima(&pauli_coefficients(&eff)?),
            })
        })
        .collect();
    let mut rows: Vec<PetRow> = cells
        .iter()
        .map(|c| PetRow {
            cell: c.clone(),
            points: Vec::new(),
            flags: Vec::new(),
        })
        .collect();
    for (&(ci, x), r) in jobs.iter().zip(results) {
        match r {
            Ok(p) => rows[ci].points.push(p),
            Err(e) => rows[ci].flags.push(ScanFlag::new(format!("{} x={x:.3}", cells[ci]), &e)),
        }
    }
    Ok(PetScan { g_side, rows })
}

// ------------------------------------------------------------------- overlay

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    pub cell: String,
    pub j_target: f64,
    pub j13: f64,
    pub stray: StrayTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayScan {
    pub g_side: f64,
    pub points: Vec<OverlayPoint>,
    pub flags: Vec<ScanFlag>,
}

impl OverlayScan {
    /// `J13` values at which every cell keeps all four strings below
    /// `threshold` (MHz).
    pub fn safe_targets(&self, threshold: f64) -> Vec<f64> {
        let mut targets: Vec<f64> = self.points.iter().map(|p| p.j_target).collect();
        targets.sort_by(|a, b| a.total_cmp(b));
        targets.dedup();
        targets
            .into_iter()
            .filter(|&t| {
                self.flags.is_empty()
                    && self
                        .points
                        .iter()
                        .filter(|p| p.j_target == t)
                        .all(|p| [p.stray.zz13, p.stray.zzz123, p.stray.zzz134, p.stray.zzz135].iter().all(|v| v.abs() < threshold))
            })
            .collect()
    }
}

/// Z1Z3 and the three Z1Z3Zk strings against `J13` with Q3 tuned onto Q1,
/// for every cell. `J13 = 0` is the hard-OFF point.
pub fn onoff_overlay_scan(layout: &DeviceLayout, cells: &[String], j_grid: &[f64], g_side: f64, ctx: &ScanContext) -> Result<OverlayScan> {
    let jobs: Vec<(String, f64)> = cells
        .iter()
        .flat_map(|c| j_grid.iter().map(move |&j| (c.clone(), j)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(cell, j)| -> Result<OverlayPoint> {
            let view = layout.cell(cell)?.clone();
            let l = cell_with_side(layout, cell, Some(g_side))?;
            let (_, eff) = solve_state(&l, cell, (*j != 0.0).then_some(*j), true, ctx)?;
            Ok(OverlayPoint {
                cell: cell.clone(),
                j_target: *j,
                j13: exchange(&eff, &view.central, &view.sides[1]),
                stray: cell_stray(&eff, &view)?,
            })
        })
        .collect();
    let mut scan = OverlayScan {
        g_side,
        points: Vec::new(),
        flags: Vec::new(),
    };
    for ((cell, j), r) in jobs.iter().zip(results) {
        match r {
            Ok(p) => scan.points.push(p),
            Err(e) => scan.flags.push(ScanFlag::new(format!("{cell} J13={j}"), &e)),
        }
    }
    Ok(scan)
}

// --------------------------------------------------------------- phase scan

/// Least-squares fit of `log y = log c + ℓ log x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Smallest and largest abscissa used.
    pub range: [f64; 2],
    /// RMS residual in natural-log units.
    pub residual: f64,
    pub n_points: usize,
    /// Dominant string at every scanned point.
    pub dominant: Vec<(f64, String)>,
}

/// Fits `y = c·x^ℓ` to the points with `|y| ≥ floor`; at least five are
/// required.
pub fn fit_power_law(xs: &[f64], ys: &[f64], floor: f64) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() >= floor && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Precondition(format!("power-law fit needs 5 points above the floor, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("power-law fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).exp();
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: icpt.exp(),
        range: [lo, hi],
        residual,
        n_points: pts.len(),
        dominant: Vec::new(),
    })
}

/// Side-to-radial ratio where |ZZZ|_max first overtakes |ZZ|_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub ratio: f64,
    pub bracket: [f64; 2],
    pub state: GateState,
    pub g_radial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ratio: f64,
    pub maxima: Option<CellMaxima>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    pub cell: String,
    pub state: GateState,
    pub g_radial: f64,
    pub points: Vec<PhasePoint>,
    pub fit_zz: Option<PowerLawFit>,
    pub fit_zzz: Option<PowerLawFit>,
    pub crossover: Option<CrossoverPoint>,
}

/// Bracket tolerance of the crossover bisection, in ratio units.
pub const CROSSOVER_TOL: f64 = 1e-3;

/// Cell maxima with radial couplings `g_radial` and side couplings
/// `ratio·g_radial`.
pub fn phase_point(layout: &DeviceLayout, cell: &str, g_radial: f64, ratio: f64, state: GateState, ctx: &ScanContext) -> Result<CellMaxima> {
    let mut l = cell_with_side(layout, cell, Some(ratio * g_radial))?;
    l.set_kind_strength(EdgeKind::Radial, g_radial);
    let (target, resonant) = match state {
        GateState::Off => (None, false),
        GateState::On => (Some(ctx.on_target), true),
    };
    let (_, eff) = solve_state(&l, cell, target, resonant, ctx)?;
    Ok(cell_maxima(&pauli_coefficients(&eff)?))
}

/// Sweeps `G_side/G_radial` over `ratios`, fits both maxima to power laws
/// and locates the first hierarchy inversion by bisection.
pub fn phase_scan(layout: &DeviceLayout, cell: &str, g_radial: f64, ratios: &[f64], state: GateState, ctx: &ScanContext) -> Result<PhaseScan> {
    if ratios.len() < 8 {
        return Err(Error::Precondition("phase scan needs at least 8 ratios".into()));
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) || ratios[0] <= 0.0 {
        return Err(Error::Precondition("ratios must be positive and strictly increasing".into()));
    }
    layout.cell(cell)?;
    let points: Vec<PhasePoint> = ratios
        .par_iter()
        .map(|&r| match phase_point(layout, cell, g_radial, r, state, ctx) {
            Ok(m) => PhasePoint {
                ratio: r,
                maxima: Some(m),
                flag: None,
            },
            Err(e) => PhasePoint {
                ratio: r,
                maxima: None,
                flag: Some(e.to_string()),
            },
        })
        .collect();
    let ok: Vec<(f64, &CellMaxima)> = points.iter().filter_map(|p| p.maxima.as_ref().map(|m| (p.ratio, m))).collect();
    let xs: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let fit = |f: &dyn Fn(&CellMaxima) -> (f64, String)| -> Option<PowerLawFit> {
        let ys: Vec<f64> = ok.iter().map(|p| f(p.1).0).collect();
        fit_power_law(&xs, &ys, FIT_FLOOR_MHZ).ok().map(|mut r| {
            r.dominant = ok.iter().map(|p| (p.0, f(p.1).1)).collect();
            r
        })
    };
    let fit_zz = fit(&|m| (m.zz_max, m.zz_string.clone()));
    let fit_zzz = fit(&|m| (m.zzz_max, m.zzz_string.clone()));
    let mut crossover = None;
    for w in ok.windows(2) {
        let (a, ma) = w[0];
        let (b, mb) = w[1];
        if ma.zzz_max < ma.zz_max && mb.zzz_max >= mb.zz_max {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > CROSSOVER_TOL {
                let mid = 0.5 * (lo + hi);
                match phase_point(layout, cell, g_radial, mid, state, ctx) {
                    Ok(m) if m.zzz_max >= m.zz_max => hi = mid,
                    Ok(_) => lo = mid,
                    Err(_) => break,
                }
            }
            crossover = Some(CrossoverPoint {
                ratio: 0.5 * (lo + hi),
                bracket: [lo, hi],
                state,
                g_radial,
            });
            break;
        }
    }
    Ok(PhaseScan {
        cell: cell.to_string(),
        state,
        g_radial,
        points,
        fit_zz,
        fit_zzz,
        crossover,
    })
}

// ----------------------------------------------------------- fidelity sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySweep {
    pub g_radial: f64,
    pub reports: Vec<FidelityReport>,
    pub flags: Vec<ScanFlag>,
}

/// Optimised gate errors of every cell at every side coupling.
pub fn fidelity_sweep(layout: &DeviceLayout, cells: &[String], g_sides: &[f64], opts: &GateOptions) -> Result<FidelitySweep> {
    let jobs: Vec<(String, f64)> = cells
        .iter()
        .flat_map(|c| g_sides.iter().map(move |&g| (c.clone(), g)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(cell, g)| -> Result<FidelityReport> {
            let l = cell_with_side(layout, cell, Some(*g))?;
            optimize_gate(&l, cell, opts)
        })
        .collect();
    let g_radial = layout
        .edges
        .iter()
        .find(|e| e.kind == EdgeKind::Radial)
        .map_or(0.0, |e| e.strength);
    let mut sweep = FidelitySweep {
        g_radial,
        reports: Vec::new(),
        flags: Vec::new(),
    };
    for ((cell, g), r) in jobs.iter().zip(results) {
        match r {
            Ok(rep) => sweep.reports.push(rep),
            Err(e) => sweep.flags.push(ScanFlag::new(format!("{cell} G_side={g}"), &e)),
        }
    }
    Ok(sweep)
}

/// Reports grouped by `G_side/G_radial`, rounded to the nearest of
/// `0, 1/4, 1/2, ...` quarter steps.
pub fn classify(sweep: &FidelitySweep) -> Vec<(String, Vec<&FidelityReport>)> {
    let mut groups: Vec<(i64, Vec<&FidelityReport>)> = Vec::new();
    for r in &sweep.reports {
        let q = if sweep.g_radial > 0.0 {
            (4.0 * r.g_side / sweep.g_radial).round() as i64
        } else {
            0
        };
        match groups.iter_mut().find(|(k, _)| *k == q) {
            Some((_, v)) => v.push(r),
            None => groups.push((q, vec![r])),
        }
    }
    groups.sort_by_key(|(k, _)| *k);
    groups
        .into_iter()
        .map(|(q, v)| {
            let label = match q {
                0 => "0".to_string(),
                2 => "1/2".to_string(),
                4 => "1".to_string(),
                q if q % 2 == 1 => format!("{q}/4"),
                q => format!("{}/2", q / 2),
            };
            (label, v)
        })
        .collect()
}

/// Cells whose model (iii) error exceeds model (ii) by more than `factor`.
pub fn outliers(reports: &[FidelityReport], factor: f64) -> Vec<&FidelityReport> {
    reports
        .iter()
        .filter(|r| match (r.error(NoiseLevel::WithZz), r.error(NoiseLevel::WithZzz)) {
            (Some(a), Some(b)) => b > factor * a,
            _ => false,
        })
        .collect()
}

/// Spread (max − min) of one noise level's error across reports.
pub fn error_spread(reports: &[&FidelityReport], level: NoiseLevel) -> f64 {
    let errs: Vec<f64> = reports.iter().filter_map(|r| r.error(level)).collect();
    if errs.is_empty() {
        return 0.0;
    }
    errs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - errs.iter().cloned().fold(f64::INFINITY, f64::min)
}
