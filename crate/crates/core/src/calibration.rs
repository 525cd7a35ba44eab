//! Coupler biasing: hard-OFF and ON points, neighbour re-biasing, soft-OFF
//! and dressed-frequency resonance tuning, all on the exact path.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::DeviceLayout;
use crate::effective::{pauli_coefficients, solve_layout, EffectiveQubitH, SolveOptions};
use crate::hilbert::TruncationPolicy;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Hard-OFF tolerance on |J|, MHz.
    pub tol_off: f64,
    /// Relative tolerance on ON targets.
    pub on_rel_tol: f64,
    pub max_sweeps: usize,
    /// Grid points used to bracket roots across a band.
    pub scan_points: usize,
    pub max_iterations: usize,
    /// Dressed-frequency match tolerance for resonance tuning, MHz.
    pub resonance_tol: f64,
    /// Truncation used by the soft-OFF objective.
    pub soft_policy: TruncationPolicy,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            tol_off: 1e-3,
            on_rel_tol: 0.01,
            max_sweeps: 20,
            scan_points: 48,
            max_iterations: 100,
            resonance_tol: 0.01,
            soft_policy: TruncationPolicy::default(),
        }
    }
}

/// Coupler and tunable-qubit frequencies, MHz.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BiasPoint {
    pub couplers: BTreeMap<String, f64>,
    pub qubits: BTreeMap<String, f64>,
}

impl BiasPoint {
    pub fn from_layout(layout: &DeviceLayout) -> Self {
        Self {
            couplers: layout.couplers.iter().map(|c| (c.id.clone(), c.freq)).collect(),
            qubits: layout
                .qubits
                .iter()
                .filter(|q| q.tunable)
                .map(|q| (q.id.clone(), q.freq_idle))
                .collect(),
        }
    }

    /// Writes the bias into a layout, checking every band.
    pub fn apply(&self, layout: &mut DeviceLayout) -> Result<()> {
        for (id, &f) in &self.couplers {
            let c = layout.coupler_mut(id).ok_or_else(|| Error::UnknownElement(id.clone()))?;
            if !(c.band[0] < f && f < c.band[1]) {
                return Err(Error::Calibration(format!("{id}: {f} MHz outside band")));
            }
            c.freq = f;
        }
        for (id, &f) in &self.qubits {
            let q = layout.qubit_mut(id).ok_or_else(|| Error::UnknownElement(id.clone()))?;
            if let Some([lo, hi]) = q.band {
                if f < lo || f > hi {
                    return Err(Error::Calibration(format!("{id}: {f} MHz outside band")));
                }
            }
            q.freq_idle = f;
        }
        Ok(())
    }

    pub fn within_bands(&self, layout: &DeviceLayout) -> bool {
        let mut copy = layout.clone();
        self.apply(&mut copy).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub bias: BiasPoint,
    /// Named achieved quantities, e.g. `J(Q1,Q3)` in MHz.
    pub achieved: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
    pub options: CalibrationOptions,
}

impl CalibrationResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Best |f| after each accepted iterate; non-increasing.
    pub history: Vec<f64>,
}

/// Bisection safeguarded secant search on `[a, b]` with `f(a) f(b) < 0`.
pub fn bracketed_root(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol_f: f64,
    max_iter: usize,
) -> Result<Root> {
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa * fb > 0.0 {
        return Err(Error::Calibration("root not bracketed".into()));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut history = vec![best.1.abs()];
    let mut width = (b - a).abs();
    for it in 1..=max_iter {
        let span = (b - a).abs();
        let mut x = b - fb * (b - a) / (fb - fa);
        let guard = 1e-3 * span;
        if !x.is_finite() || x <= a.min(b) + guard || x >= a.max(b) - guard || span > 0.5 * width {
            x = 0.5 * (a + b);
        }
        width = span;
        // Keep strictly inside the initial bracket.
        let x = x.clamp(lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo));
        let fx = f(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
            history.push(fx.abs());
        }
        if fx.abs() <= tol_f || span < 1e-10 * (hi - lo).max(1.0) {
            return Ok(Root {
                x: best.0,
                fx: best.1,
                iterations: it,
                history,
            });
        }
        if fx * fa < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    Err(Error::Calibration(format!(
        "root search stalled at |f| = {:.3e} after {max_iter} iterations",
        best.1.abs()
    )))
}

fn pair_of(layout: &DeviceLayout, coupler: &str) -> Result<(String, String)> {
    layout.coupler(coupler).ok_or_else(|| Error::UnknownElement(coupler.into()))?;
    match layout.coupler_qubits(coupler).as_slice() {
        [a, b] => Ok((a.to_string(), b.to_string())),
        _ => Err(Error::Precondition(format!("coupler {coupler} must join exactly two qubits"))),
    }
}

/// Effective Hamiltonian restricted to at most one excitation.
pub fn single_excitation_solve(layout: &DeviceLayout) -> Result<EffectiveQubitH> {
    let opts = SolveOptions {
        policy: TruncationPolicy {
            total_excitation_cap: Some(1),
            ..TruncationPolicy::default()
        },
        ..SolveOptions::default()
    };
    solve_layout(layout, &opts)
}

/// Exact computational-level `J` between two qubits.
pub fn exact_pair_j(layout: &DeviceLayout, a: &str, b: &str) -> Result<f64> {
    let eff = single_excitation_solve(layout)?;
    let i = eff.qubit_index(a).ok_or_else(|| Error::UnknownElement(a.into()))?;
    let j = eff.qubit_index(b).ok_or_else(|| Error::UnknownElement(b.into()))?;
    Ok(eff.j(i, j, 0, 0).unwrap_or(0.0))
}

/// Exact `J` of a coupler's qubit pair with the coupler at `freq`.
pub fn coupler_j(layout: &DeviceLayout, coupler: &str, freq: f64) -> Result<f64> {
    let (a, b) = pair_of(layout, coupler)?;
    let mut l = layout.clone();
    l.coupler_mut(coupler).unwrap().freq = freq;
    exact_pair_j(&l, &a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffPoint {
    pub freq: f64,
    pub j: f64,
    pub iterations: usize,
    /// No sign change in band: the band edge with the smallest |J| is returned.
    pub at_band_edge: bool,
}

fn interior(band: [f64; 2]) -> (f64, f64) {
    let m = 1e-6 * (band[1] - band[0]);
    (band[0] + m, band[1] - m)
}

/// Finds where `J(ω_C) = target`, scanning the band from the top down for
/// the first sign change.
fn solve_coupler_for(
    layout: &DeviceLayout,
    coupler: &str,
    target: f64,
    tol: f64,
    opts: &CalibrationOptions,
) -> Result<Option<Root>> {
    let band = layout.coupler(coupler).ok_or_else(|| Error::UnknownElement(coupler.into()))?.band;
    let (lo, hi) = interior(band);
    let n = opts.scan_points.max(2);
    let grid: Vec<f64> = (0..n).map(|k| hi - (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let mut prev: Option<(f64, f64)> = None;
    for &w in &grid {
        let v = coupler_j(layout, coupler, w)? - target;
        if v.abs() <= tol {
            return Ok(Some(Root {
                x: w,
                fx: v,
                iterations: 0,
                history: vec![v.abs()],
            }));
        }
        if let Some((pw, pv)) = prev {
            if pv * v < 0.0 {
                let root = bracketed_root(|x| Ok(coupler_j(layout, coupler, x)? - target), w, pw, tol, opts.max_iterations)?;
                return Ok(Some(root));
            }
        }
        prev = Some((w, v));
    }
    Ok(None)
}

/// Hard-OFF point: the coupler frequency where the exact `J` vanishes.
pub fn find_off_bias(layout: &DeviceLayout, coupler: &str, opts: &CalibrationOptions) -> Result<OffPoint> {
    let band = layout.coupler(coupler).ok_or_else(|| Error::UnknownElement(coupler.into()))?.band;
    let (lo, hi) = interior(band);
    if let Some(r) = solve_coupler_for(layout, coupler, 0.0, opts.tol_off, opts)? {
        return Ok(OffPoint {
            freq: r.x,
            j: r.fx,
            iterations: r.iterations,
            at_band_edge: r.iterations == 0 && (r.x == lo || r.x == hi),
        });
    }
    let (jl, jh) = (coupler_j(layout, coupler, lo)?, coupler_j(layout, coupler, hi)?);
    let (freq, j) = if jh.abs() <= jl.abs() { (hi, jh) } else { (lo, jl) };
    if j.abs() <= opts.tol_off {
        return Ok(OffPoint {
            freq,
            j,
            iterations: 0,
            at_band_edge: true,
        });
    }
    Err(Error::Calibration(format!("no hard-OFF point in band for {coupler}")))
}

/// ON point with `|J| = |target|`. The requested sign is tried first, then
/// the opposite one, since a coupler parked above its qubits only reaches
/// negative exchange.
pub fn set_on_bias(layout: &DeviceLayout, coupler: &str, target: f64, opts: &CalibrationOptions) -> Result<f64> {
    if target == 0.0 {
        return Ok(find_off_bias(layout, coupler, opts)?.freq);
    }
    let tol = 0.1 * opts.on_rel_tol * target.abs();
    for t in [target, -target] {
        if let Some(r) = solve_coupler_for(layout, coupler, t, tol, opts)? {
            return Ok(r.x);
        }
    }
    Err(Error::Calibration(format!(
        "|J| = {} MHz unreachable in the band of {coupler}",
        target.abs()
    )))
}

/// Coordinate descent: every coupler except `active` is re-rooted to its
/// hard-OFF point until a sweep moves none by more than the tolerance.
pub fn rebias_neighbors(layout: &DeviceLayout, active: Option<&str>, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    let mut l = layout.clone();
    let others: Vec<String> = l
        .couplers
        .iter()
        .map(|c| c.id.clone())
        .filter(|id| Some(id.as_str()) != active)
        .collect();
    let active_before = match active {
        Some(c) => {
            let (a, b) = pair_of(&l, c)?;
            Some(exact_pair_j(&l, &a, &b)?)
        }
        None => None,
    };
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for c in &others {
            // Couplers already at a root stay put, so a repeat run is a no-op.
            if residuals(&l, std::slice::from_ref(c))?.values().all(|v| v.abs() <= opts.tol_off) {
                continue;
            }
            let off = find_off_bias(&l, c, opts)?;
            l.coupler_mut(c).unwrap().freq = off.freq;
        }
        let worst = residuals(&l, &others)?.values().fold(0.0f64, |a, v| a.max(v.abs()));
        if worst <= opts.tol_off {
            converged = true;
            break;
        }
    }
    let mut achieved = residuals(&l, &others)?;
    if let (Some(c), Some(before)) = (active, active_before) {
        let (a, b) = pair_of(&l, c)?;
        let after = exact_pair_j(&l, &a, &b)?;
        achieved.insert(format!("J({a},{b})"), after);
        achieved.insert(format!("J({a},{b}) before"), before);
    }
    Ok(CalibrationResult {
        bias: BiasPoint::from_layout(&l),
        achieved,
        iterations: sweeps,
        converged,
        options: opts.clone(),
    })
}

fn residuals(layout: &DeviceLayout, couplers: &[String]) -> Result<BTreeMap<String, f64>> {
    let eff = single_excitation_solve(layout)?;
    let mut out = BTreeMap::new();
    for c in couplers {
        let (a, b) = pair_of(layout, c)?;
        let (i, j) = (eff.qubit_index(&a).unwrap(), eff.qubit_index(&b).unwrap());
        out.insert(format!("J({a},{b})"), eff.j(i, j, 0, 0).unwrap_or(0.0));
    }
    Ok(out)
}

/// Dressed `0→1` frequency of a qubit, from effective-Hamiltonian diagonals.
pub fn dressed_frequency(layout: &DeviceLayout, qubit: &str) -> Result<f64> {
    let eff = single_excitation_solve(layout)?;
    let q = eff.qubit_index(qubit).ok_or_else(|| Error::UnknownElement(qubit.into()))?;
    eff.transition(q, 0)
        .ok_or_else(|| Error::MissingEnergy(format!("first excited level of {qubit}")))
}

/// Moves `mover`'s idle frequency until its dressed frequency matches
/// `anchor`'s.
pub fn tune_resonance(layout: &DeviceLayout, mover: &str, anchor: &str, opts: &CalibrationOptions) -> Result<BiasPoint> {
    let q = layout.qubit(mover).ok_or_else(|| Error::UnknownElement(mover.into()))?;
    layout.qubit(anchor).ok_or_else(|| Error::UnknownElement(anchor.into()))?;
    if !q.tunable {
        return Err(Error::Precondition(format!("{mover} is not tunable")));
    }
    let mismatch = |f: f64| -> Result<f64> {
        let mut l = layout.clone();
        l.qubit_mut(mover).unwrap().freq_idle = f;
        Ok(dressed_frequency(&l, mover)? - dressed_frequency(&l, anchor)?)
    };
    let f0 = q.freq_idle;
    let m0 = mismatch(f0)?;
    let mut bias = BiasPoint::from_layout(layout);
    if m0.abs() < opts.resonance_tol {
        return Ok(bias);
    }
    let [lo, hi] = q.band.unwrap_or([f0 - 1000.0, f0 + 1000.0]);
    // First guess: shift by the dressed mismatch, then bracket outward.
    let guess = (f0 - m0).clamp(lo, hi);
    let step = 2.0 * m0.abs().max(1.0);
    let (mut a, mut b) = ((guess - step).max(lo), (guess + step).min(hi));
    let (mut fa, mut fb) = (mismatch(a)?, mismatch(b)?);
    while fa * fb > 0.0 {
        if a <= lo && b >= hi {
            return Err(Error::Calibration(format!("{mover} cannot reach {anchor} within its band")));
        }
        a = (a - step).max(lo);
        b = (b + step).min(hi);
        fa = mismatch(a)?;
        fb = mismatch(b)?;
    }
    let root = bracketed_root(mismatch, a, b, opts.resonance_tol, opts.max_iterations)?;
    bias.qubits.insert(mover.to_string(), root.x);
    Ok(bias)
}

/// Largest |α| over two- and three-body strings containing both qubits of
/// the coupler, normalized convention.
pub fn soft_objective(layout: &DeviceLayout, coupler: &str, opts: &CalibrationOptions) -> Result<f64> {
    let (a, b) = pair_of(layout, coupler)?;
    let eff = solve_layout(
        layout,
        &SolveOptions {
            policy: opts.soft_policy.clone(),
            ..SolveOptions::default()
        },
    )?;
    let pc = pauli_coefficients(&eff)?;
    let (i, j) = (eff.qubit_index(&a).unwrap(), eff.qubit_index(&b).unwrap());
    let pair = (1u64 << i) | (1u64 << j);
    Ok(pc
        .strings(3)
        .into_iter()
        .filter(|(p, _)| p.weight() >= 2 && p.z_mask & pair == pair)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs())))
}

/// Soft-OFF point: golden-section minimum of [`soft_objective`] over
/// `[lo, hi]` (the coupler band when `None`).
pub fn soft_off_bias(
    layout: &DeviceLayout,
    coupler: &str,
    window: Option<[f64; 2]>,
    tol_mhz: f64,
    opts: &CalibrationOptions,
) -> Result<(f64, f64)> {
    let band = layout.coupler(coupler).ok_or_else(|| Error::UnknownElement(coupler.into()))?.band;
    let (blo, bhi) = interior(band);
    let [mut a, mut b] = window.map_or([blo, bhi], |[x, y]| [x.max(blo), y.min(bhi)]);
    let eval = |w: f64| -> Result<f64> {
        let mut l = layout.clone();
        l.coupler_mut(coupler).unwrap().freq = w;
        soft_objective(&l, coupler, opts)
    };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while (b - a) > tol_mhz {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Quasi-static ramp of one coupler through `targets` (|J| in MHz); the
/// other couplers are re-biased to hard-OFF after every step.
pub fn ramp(
    layout: &DeviceLayout,
    coupler: &str,
    targets: &[f64],
    opts: &CalibrationOptions,
) -> Result<Vec<CalibrationResult>> {
    let mut l = layout.clone();
    let mut out = Vec::new();
    for &t in targets {
        let w = set_on_bias(&l, coupler, t, opts)?;
        l.coupler_mut(coupler).unwrap().freq = w;
        let res = rebias_neighbors(&l, Some(coupler), opts)?;
        res.bias.apply(&mut l)?;
        out.push(res);
    }
    Ok(out)
}

/// Biases a single-cell layout for the `Q1`-`Q3` gate coupler: `None` puts
/// every coupler at hard-OFF, `Some(j)` sets `|J13| = j` with the rest OFF.
/// With `resonant`, Q3 is first tuned onto Q1's dressed frequency.
pub fn prepare_cell(layout: &DeviceLayout, label: &str, target: Option<f64>, resonant: bool, opts: &CalibrationOptions) -> Result<DeviceLayout> {
    let view = layout.cell(label)?.clone();
    let (q1, q3, c13) = (view.central.as_str(), view.sides[1].as_str(), view.couplers[1].as_str());
    let mut l = layout.clone();
    let set = |l: &mut DeviceLayout| -> Result<()> {
        let w = match target {
            Some(j) => set_on_bias(l, c13, j, opts)?,
            None => find_off_bias(l, c13, opts)?.freq,
        };
        l.coupler_mut(c13).unwrap().freq = w;
        Ok(())
    };
    if resonant {
        // Dressing depends on the coupler bias, so alternate twice.
        for _ in 0..2 {
            set(&mut l)?;
            tune_resonance(&l, q3, q1, opts)?.apply(&mut l)?;
        }
    }
    set(&mut l)?;
    let active = target.map(|_| c13);
    rebias_neighbors(&l, active, opts)?.bias.apply(&mut l)?;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{single_cell, DeviceDefaults, EdgeKind};
    use crate::perturbation::{off_point_estimate, perturbative_j};

    fn cell() -> DeviceLayout {
        single_cell(&DeviceDefaults::default(), [6450.0, 6000.0, 6090.0, 6010.0, 6080.0])
    }

    #[test]
    fn root_finder_contract() {
        let r = bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-12, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-9);
        assert!(r.x > 0.0 && r.x < 3.0);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-9, 50).is_err());
    }

    #[test]
    fn off_point_meets_tolerance() {
        let l = cell();
        let opts = CalibrationOptions::default();
        let off = find_off_bias(&l, "C13", &opts).unwrap();
        assert!(off.j.abs() < opts.tol_off);
        assert!(!off.at_band_edge);
        assert!(coupler_j(&l, "C13", off.freq).unwrap().abs() < opts.tol_off);
        let band = l.coupler("C13").unwrap().band;
        let est = off_point_estimate(8.0, 100.0, 100.0, 6450.0, 6090.0).unwrap();
        assert!((est - off.freq).abs() < 0.02 * (band[1] - band[0]));
    }

    #[test]
    fn no_direct_coupling_goes_to_band_edge() {
        let mut l = cell();
        l.set_kind_strength(EdgeKind::Radial, 0.0);
        l.coupler_mut("C13").unwrap().band = [6800.0, 2.0e6];
        let opts = CalibrationOptions {
            tol_off: 0.01,
            ..Default::default()
        };
        let off = find_off_bias(&l, "C13", &opts).unwrap();
        assert!(off.at_band_edge);
        assert_eq!(off.freq, interior(l.coupler("C13").unwrap().band).1);
    }

    #[test]
    fn on_targets() {
        let mut l = cell();
        let opts = CalibrationOptions::default();
        let check = |l: &DeviceLayout, t: f64| {
            let w = set_on_bias(l, "C13", t, &opts).unwrap();
            let j = coupler_j(l, "C13", w).unwrap();
            assert!((j.abs() - t).abs() < 0.01 * t, "{t}: {j}");
        };
        check(&l, 8.0);
        let off = find_off_bias(&l, "C13", &opts).unwrap().freq;
        assert_eq!(set_on_bias(&l, "C13", 0.0, &opts).unwrap(), off);
        // Gate operation brings Q3 onto Q1 first.
        tune_resonance(&l, "Q3", "Q1", &opts).unwrap().apply(&mut l).unwrap();
        check(&l, 20.0);
    }

    #[test]
    fn eq_one_tracks_exact_far_detuned() {
        let l = cell();
        let w = 7800.0;
        let exact = coupler_j(&l, "C13", w).unwrap();
        let est = perturbative_j(8.0, 100.0, 100.0, w, 6450.0, 6090.0).unwrap();
        assert!((exact - est).abs() < 0.2, "{exact} vs {est}");
    }

    #[test]
    fn rebias_without_side_coupling_is_one_sweep() {
        let l = cell();
        let opts = CalibrationOptions::default();
        let r = rebias_neighbors(&l, None, &opts).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!(r.achieved.values().all(|v| v.abs() < opts.tol_off));
        assert!(r.bias.within_bands(&l));
    }

    #[test]
    fn resonance_identity_and_errors() {
        let l = cell();
        let opts = CalibrationOptions::default();
        assert!(matches!(tune_resonance(&l, "Q3", "Q9", &opts), Err(Error::UnknownElement(_))));
        let b = tune_resonance(&l, "Q3", "Q1", &opts).unwrap();
        let mut tuned = l.clone();
        b.apply(&mut tuned).unwrap();
        let again = tune_resonance(&tuned, "Q3", "Q1", &opts).unwrap();
        assert_eq!(again, b);
        let d = dressed_frequency(&tuned, "Q3").unwrap() - dressed_frequency(&tuned, "Q1").unwrap();
        assert!(d.abs() < opts.resonance_tol);
    }

    #[test]
    fn result_json() {
        let r = CalibrationResult {
            bias: BiasPoint::from_layout(&cell()),
            achieved: BTreeMap::from([("J(Q1,Q2)".to_string(), 1e-4)]),
            iterations: 1,
            converged: true,
            options: CalibrationOptions::default(),
        };
        let text = r.to_json().unwrap();
        let back: CalibrationResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
