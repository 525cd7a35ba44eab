//! Two-qubit iSWAP simulation on (Q1, Q3) with stray Z phases and
//! single-qubit decoherence, plus process-fidelity estimation.
//!
//! Basis index is `2·q1 + q3`. Frequencies are MHz, times ns.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::{Complex, Matrix4};
use serde::{Deserialize, Serialize};

use crate::calibration::{exact_pair_j, prepare_cell, BiasPoint, CalibrationOptions};
use crate::device::{DeviceLayout, UnitCellView};
use crate::effective::{pauli_coefficients, solve_layout, EffectiveQubitH, PauliString, SolveOptions};
use crate::{Error, Result};

pub type C64 = Complex<f64>;
pub type Density = Matrix4<C64>;

pub const DEFAULT_RAMP_NS: f64 = 2.0;
pub const DEFAULT_DT_NS: f64 = 0.1;
pub const MAX_DT_NS: f64 = 0.5;
/// Pulse area giving a full swap: 2π·∫J dt = π/2 with J in MHz, t in ns.
pub const SWAP_AREA: f64 = 250.0;

const SIMPSON_PANELS: usize = 8;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn phase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    #[default]
    FlatTopGaussian,
}

/// Flat-top pulse with Gaussian rise and fall edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub ramp_sigma: f64,
    pub ramp_duration: f64,
    pub plateau: f64,
    /// J/2π on the plateau, MHz.
    pub amplitude: f64,
}

impl PulseShape {
    /// Default edges, plateau calibrated for a full swap.
    pub fn calibrated(amplitude: f64) -> Result<Self> {
        let mut p = Self {
            kind: PulseKind::FlatTopGaussian,
            ramp_sigma: DEFAULT_RAMP_NS / 3.0,
            ramp_duration: DEFAULT_RAMP_NS,
            plateau: 0.0,
            amplitude,
        };
        p.plateau = calibrate_duration(&p)?;
        Ok(p)
    }

    pub fn square(amplitude: f64, plateau: f64) -> Self {
        Self {
            kind: PulseKind::FlatTopGaussian,
            ramp_sigma: 0.0,
            ramp_duration: 0.0,
            plateau,
            amplitude,
        }
    }

    pub fn duration(&self) -> f64 {
        self.plateau + 2.0 * self.ramp_duration
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.plateau >= 0.0 && self.ramp_duration >= 0.0) {
            return Err(Error::Precondition("pulse parameters must be non-negative".into()));
        }
        if self.ramp_duration > 0.0 && self.ramp_sigma <= 0.0 {
            return Err(Error::Precondition("ramp_sigma must be positive".into()));
        }
        Ok(())
    }

    /// Rising edge normalised to 0 at the start and 1 at the junction, with
    /// zero slope there.
    fn edge(&self, t: f64) -> f64 {
        let (r, s) = (self.ramp_duration, self.ramp_sigma);
        let g = |x: f64| (-(x - r).powi(2) / (2.0 * s * s)).exp();
        let g0 = g(0.0);
        (g(t) - g0) / (1.0 - g0)
    }

    fn value(&self, t: f64) -> f64 {
        let r = self.ramp_duration;
        let d = self.duration();
        let tc = t.clamp(0.0, d);
        if tc < r {
            self.amplitude * self.edge(tc)
        } else if tc > d - r {
            self.amplitude * self.edge(d - tc)
        } else {
            self.amplitude
        }
    }

    /// ∫J dt over `[a, b]`, MHz·ns.
    pub fn area(&self, a: f64, b: f64) -> f64 {
        let d = self.duration();
        let (a, b) = (a.clamp(0.0, d), b.clamp(0.0, d));
        if b <= a {
            return 0.0;
        }
        let r = self.ramp_duration;
        let mut cuts = vec![a, b];
        for x in [r, d - r] {
            if x > a && x < b {
                cuts.push(x);
            }
        }
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.windows(2).map(|w| self.simpson(w[0], w[1])).sum()
    }

    fn simpson(&self, a: f64, b: f64) -> f64 {
        let n = SIMPSON_PANELS * 2;
        let h = (b - a) / n as f64;
        let mut s = self.value(a) + self.value(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.value(a + k as f64 * h);
        }
        s * h / 3.0
    }

    /// Area of one edge at unit amplitude.
    fn edge_area(&self) -> f64 {
        let r = self.ramp_duration;
        if r == 0.0 {
            return 0.0;
        }
        let unit = Self {
            amplitude: 1.0,
            plateau: 0.0,
            ..*self
        };
        (0..64)
            .map(|k| unit.simpson(r * k as f64 / 64.0, r * (k + 1) as f64 / 64.0))
            .sum()
    }
}

/// J(t) of the pulse, MHz.
pub fn pulse_waveform(p: &PulseShape, t: f64) -> Result<f64> {
    p.validate()?;
    let d = p.duration();
    if !(0.0..=d).contains(&t) {
        return Err(Error::Precondition(format!("t = {t} ns outside [0, {d}]")));
    }
    Ok(p.value(t))
}

/// Plateau length that makes the total area a full swap.
pub fn calibrate_duration(p: &PulseShape) -> Result<f64> {
    p.validate()?;
    if p.amplitude <= 0.0 {
        return Err(Error::Precondition("pulse amplitude must be positive".into()));
    }
    let ramps = 2.0 * p.amplitude * p.edge_area();
    Ok(((SWAP_AREA - ramps) / p.amplitude).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLevel {
    DecoherenceOnly,
    WithZz,
    WithZzz,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 3] = [NoiseLevel::DecoherenceOnly, NoiseLevel::WithZz, NoiseLevel::WithZzz];
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseLevel::DecoherenceOnly => "decoherence_only",
            NoiseLevel::WithZz => "with_zz",
            NoiseLevel::WithZzz => "with_zzz",
        })
    }
}

/// Stray selection plus T1/T2 for Q1 and Q3. Infinite times disable the
/// corresponding channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub level: NoiseLevel,
    pub t1: [f64; 2],
    pub t2: [f64; 2],
}

impl NoiseModel {
    /// `T2 = T1` on both qubits.
    pub fn with_t1(level: NoiseLevel, t1: [f64; 2]) -> Self {
        Self { level, t1, t2: t1 }
    }

    pub fn coherent(level: NoiseLevel) -> Self {
        Self::with_t1(level, [f64::INFINITY; 2])
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            let (t1, t2) = (self.t1[k], self.t2[k]);
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::Noise(format!("T1 = {t1}, T2 = {t2} must be positive")));
            }
            if t2.is_finite() && t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return Err(Error::Noise(format!("T2 = {t2} exceeds 2·T1 = {}", 2.0 * t1)));
            }
        }
        Ok(())
    }

    /// Stray coefficients this level keeps.
    pub fn filter(&self, s: &StrayTerms) -> StrayTerms {
        match self.level {
            NoiseLevel::DecoherenceOnly => StrayTerms::default(),
            NoiseLevel::WithZz => StrayTerms { zz13: s.zz13, ..Default::default() },
            NoiseLevel::WithZzz => *s,
        }
    }
}

/// Normalized coefficients of Z1Z3, Z1Z2Z3, Z1Z3Z4, Z1Z3Z5, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StrayTerms {
    pub zz13: f64,
    pub zzz123: f64,
    pub zzz134: f64,
    pub zzz135: f64,
}

impl StrayTerms {
    pub fn zz_only(zz13: f64) -> Self {
        Self { zz13, ..Default::default() }
    }

    /// Effective Z1Z3 rate with spectators Q2, Q4, Q5 in Z eigenstates
    /// `z = [z2, z4, z5]`, each ±1.
    pub fn conditioned(&self, z: [f64; 3]) -> f64 {
        self.zz13 + z[0] * self.zzz123 + z[1] * self.zzz134 + z[2] * self.zzz135
    }
}

/// Spectator Z eigenvalues for configuration `k` in 0..8; bit set means
/// the spectator is in `|1⟩`.
pub fn spectator_config(k: usize) -> [f64; 3] {
    [0, 1, 2].map(|b| if k >> b & 1 == 1 { -1.0 } else { 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectatorMode {
    /// Uniform mixture of the 8 configurations.
    #[default]
    Average,
    /// Configuration with the largest error.
    Worst,
    /// One configuration, bits as in [`spectator_config`].
    Fixed(usize),
}

impl fmt::Display for SpectatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectatorMode::Average => f.write_str("average"),
            SpectatorMode::Worst => f.write_str("worst"),
            SpectatorMode::Fixed(k) => write!(f, "fixed:{k:03b}"),
        }
    }
}

/// Single-qubit Kraus operators embedded on one of the two qubits.
fn embed(k: [[C64; 2]; 2], qubit: usize) -> Density {
    let mut m = Density::zeros();
    for r in 0..4 {
        for col in 0..4 {
            let (r1, r3, c1, c3) = (r >> 1, r & 1, col >> 1, col & 1);
            m[(r, col)] = if qubit == 0 {
                if r3 == c3 { k[r1][c1] } else { c(0.0) }
            } else if r1 == c1 {
                k[r3][c3]
            } else {
                c(0.0)
            };
        }
    }
    m
}

/// Amplitude damping followed by pure dephasing on one qubit over `dt`.
fn decoherence_kraus(t1: f64, t2: f64, dt: f64, qubit: usize) -> Vec<Density> {
    let mut out = Vec::new();
    let gamma = if t1.is_finite() { 1.0 - (-dt / t1).exp() } else { 0.0 };
    let rate_phi = (1.0 / t2 - 0.5 / t1).max(0.0);
    let p = 0.5 * (1.0 - (-dt * rate_phi).exp());
    let z = c(0.0);
    let ad = [
        [[c(1.0), z], [z, c((1.0 - gamma).sqrt())]],
        [[z, c(gamma.sqrt())], [z, z]],
    ];
    let dp = [
        [[c((1.0 - p).sqrt()), z], [z, c((1.0 - p).sqrt())]],
        [[c(p.sqrt()), z], [z, c(-p.sqrt())]],
    ];
    for a in ad {
        for d in dp {
            let ka = embed(a, qubit);
            let kd = embed(d, qubit);
            let k = kd * ka;
            if k.iter().any(|x| x.norm() > 0.0) {
                out.push(k);
            }
        }
    }
    out
}

/// `exp(-i 2π (J/2)(XX+YY) dt)` for a given pulse area `J·dt` (MHz·ns).
pub fn iswap_segment(area: f64) -> Density {
    let th = 2.0 * PI * area * 1e-3;
    let mut u = Density::zeros();
    u[(0, 0)] = c(1.0);
    u[(3, 3)] = c(1.0);
    u[(1, 1)] = c(th.cos());
    u[(2, 2)] = c(th.cos());
    u[(1, 2)] = C64::new(0.0, -th.sin());
    u[(2, 1)] = C64::new(0.0, -th.sin());
    u
}

/// `exp(-i 2π rate Z1Z3 dt)`, diagonal.
pub fn stray_segment(rate: f64, dt: f64) -> Density {
    let th = 2.0 * PI * rate * dt * 1e-3;
    Density::from_diagonal(&nalgebra::Vector4::new(phase(-th), phase(th), phase(th), phase(-th)))
}

/// Ideal iSWAP.
pub fn iswap() -> Density {
    iswap_segment(SWAP_AREA)
}

/// Precomputed per-step maps for one spectator configuration.
struct Stepper {
    /// iSWAP segment, stray segment, step length.
    steps: Vec<(Density, Density, f64)>,
    noise: NoiseModel,
    kraus: Vec<(f64, Vec<Density>)>,
}

impl Stepper {
    /// Step boundaries sit on the global grid `k·dt`, so splitting a
    /// window at a grid point reproduces the same steps.
    fn new(pulse: &PulseShape, rate: f64, noise: &NoiseModel, dt: f64, window: (f64, f64)) -> Self {
        let (t0, t1) = window;
        let snap = 1e-9 * dt;
        let mut cuts = vec![t0];
        let mut k = (t0 / dt + 1e-9).floor() + 1.0;
        while k * dt < t1 - snap {
            cuts.push(k * dt);
            k += 1.0;
        }
        cuts.push(t1);
        let steps = cuts
            .windows(2)
            .map(|w| (iswap_segment(pulse.area(w[0], w[1])), stray_segment(rate, w[1] - w[0]), w[1] - w[0]))
            .collect();
        Self {
            steps,
            noise: *noise,
            kraus: Vec::new(),
        }
        .with_kraus()
    }

    fn with_kraus(mut self) -> Self {
        let mut hs: Vec<f64> = self.steps.iter().map(|s| s.2).collect();
        hs.sort_by(|a, b| a.total_cmp(b));
        hs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for h in hs {
            let k1 = decoherence_kraus(self.noise.t1[0], self.noise.t2[0], h, 0);
            let k3 = decoherence_kraus(self.noise.t1[1], self.noise.t2[1], h, 1);
            let mut ks = Vec::new();
            for a in &k1 {
                for b in &k3 {
                    ks.push(a * b);
                }
            }
            self.kraus.push((h, ks));
        }
        self
    }

    fn kraus_for(&self, h: f64) -> &[Density] {
        &self.kraus.iter().find(|(x, _)| (x - h).abs() < 1e-12).expect("step length registered").1
    }

    /// Linear in `rho`, so also valid for operator-basis inputs.
    fn run(&self, mut rho: Density) -> Density {
        for (ui, us, h) in &self.steps {
            let u = us * ui;
            rho = u * rho * u.adjoint();
            let mut next = Density::zeros();
            for k in self.kraus_for(*h) {
                next += k * rho * k.adjoint();
            }
            rho = next;
        }
        rho
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= MAX_DT_NS) {
        return Err(Error::Precondition(format!("dt = {dt} ns outside (0, {MAX_DT_NS}]")));
    }
    Ok(())
}

/// Propagates `initial` over `[t0, t1]` of the pulse window.
pub fn evolve_window(
    initial: &Density,
    pulse: &PulseShape,
    stray: &StrayTerms,
    spectators: SpectatorMode,
    noise: &NoiseModel,
    dt: f64,
    window: (f64, f64),
) -> Result<Density> {
    check_dt(dt)?;
    noise.validate()?;
    pulse.validate()?;
    let tr = initial.trace();
    if (tr - c(1.0)).norm() > 1e-9 {
        return Err(Error::Precondition(format!("initial trace {tr} != 1")));
    }
    let s = noise.filter(stray);
    let configs: Vec<usize> = match spectators {
        SpectatorMode::Average => (0..8).collect(),
        SpectatorMode::Fixed(k) if k < 8 => vec![k],
        other => {
            return Err(Error::Precondition(format!("spectator mode {other} not valid for a state")));
        }
    };
    let mut out = Density::zeros();
    for &k in &configs {
        let st = Stepper::new(pulse, s.conditioned(spectator_config(k)), noise, dt, window);
        out += st.run(*initial);
    }
    Ok(out / c(configs.len() as f64))
}

/// Propagates `initial` through the full pulse.
pub fn evolve(
    initial: &Density,
    pulse: &PulseShape,
    stray: &StrayTerms,
    spectators: SpectatorMode,
    noise: &NoiseModel,
    dt: f64,
) -> Result<Density> {
    evolve_window(initial, pulse, stray, spectators, noise, dt, (0.0, pulse.duration()))
}

/// Images of the 16 matrix units `|i⟩⟨j|`, indexed `4i + j`.
pub fn process_map(pulse: &PulseShape, rate: f64, noise: &NoiseModel, dt: f64) -> Vec<Density> {
    let st = Stepper::new(pulse, rate, noise, dt, (0.0, pulse.duration()));
    (0..16)
        .map(|k| {
            let mut e = Density::zeros();
            e[(k / 4, k % 4)] = c(1.0);
            st.run(e)
        })
        .collect()
}

/// Bit of qubit 1 and qubit 3 in basis index `k`.
fn bits(k: usize) -> (f64, f64) {
    ((k >> 1) as f64, (k & 1) as f64)
}

/// Process fidelity against `D(a, b)·target`, where `D` applies Z phases
/// `a` on Q1 and `b` on Q3, maximised over `(a, b)`. Returns `(F_pro, a, b)`.
pub fn phase_corrected_process_fidelity(map: &[Density], target: &Density) -> (f64, f64, f64) {
    // F(a, b) = Re Σ_kl C_kl e^{i(φ_l − φ_k)} / 16 with φ_k = a·n1(k) + b·n3(k).
    let mut cm = [[c(0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let m = &map[4 * i + j];
            for k in 0..4 {
                for l in 0..4 {
                    cm[k][l] += target[(k, i)].conj() * target[(l, j)] * m[(k, l)];
                }
            }
        }
    }
    let eval = |a: f64, b: f64| -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let mut f = 0.0;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for k in 0..4 {
            for l in 0..4 {
                let (k1, k3) = bits(k);
                let (l1, l3) = bits(l);
                let d = [l1 - k1, l3 - k3];
                let z = cm[k][l] * phase(a * d[0] + b * d[1]);
                f += z.re;
                for p in 0..2 {
                    g[p] -= z.im * d[p];
                    for q in 0..2 {
                        h[p][q] -= z.re * d[p] * d[q];
                    }
                }
            }
        }
        (f / 16.0, g.map(|x| x / 16.0), h.map(|r| r.map(|x| x / 16.0)))
    };
    let grid = 24;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..grid {
        for j in 0..grid {
            let a = 2.0 * PI * i as f64 / grid as f64;
            let b = 2.0 * PI * j as f64 / grid as f64;
            let f = eval(a, b).0;
            if f > best.0 {
                best = (f, a, b);
            }
        }
    }
    let (_, mut a, mut b) = best;
    for _ in 0..50 {
        let (f, g, h) = eval(a, b);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det <= 0.0 || h[0][0] >= 0.0 {
            break;
        }
        let da = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let db = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        if eval(a + da, b + db).0 < f {
            break;
        }
        a += da;
        b += db;
        if da.abs() + db.abs() < 1e-14 {
            break;
        }
    }
    (eval(a, b).0, a.rem_euclid(2.0 * PI), b.rem_euclid(2.0 * PI))
}

/// `(d·F_pro + 1)/(d + 1)` with `d = 4`.
pub fn average_from_process(f_pro: f64) -> f64 {
    (4.0 * f_pro + 1.0) / 5.0
}

/// Which fidelity a report quotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMeasure {
    #[default]
    Average,
    Process,
}

/// Settings shared by fidelity evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSettings {
    pub dt: f64,
    pub spectators: SpectatorMode,
    pub measure: FidelityMeasure,
}

impl Default for GateSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT_NS,
            spectators: SpectatorMode::Average,
            measure: FidelityMeasure::Average,
        }
    }
}

/// Gate error `1 − F` against iSWAP up to single-qubit Z phases.
pub fn process_fidelity(pulse: &PulseShape, stray: &StrayTerms, noise: &NoiseModel, settings: &GateSettings) -> Result<f64> {
    check_dt(settings.dt)?;
    noise.validate()?;
    pulse.validate()?;
    let s = noise.filter(stray);
    let target = iswap();
    let map_for = |k: usize| process_map(pulse, s.conditioned(spectator_config(k)), noise, settings.dt);
    let error = |map: &[Density]| {
        let f = phase_corrected_process_fidelity(map, &target).0;
        let f = match settings.measure {
            FidelityMeasure::Average => average_from_process(f),
            FidelityMeasure::Process => f,
        };
        (1.0 - f).clamp(0.0, 1.0)
    };
    Ok(match settings.spectators {
        SpectatorMode::Average => {
            let mut acc = vec![Density::zeros(); 16];
            for k in 0..8 {
                for (a, m) in acc.iter_mut().zip(map_for(k)) {
                    *a += m / c(8.0);
                }
            }
            error(&acc)
        }
        SpectatorMode::Worst => (0..8).map(|k| error(&map_for(k))).fold(0.0, f64::max),
        SpectatorMode::Fixed(k) if k < 8 => error(&map_for(k)),
        SpectatorMode::Fixed(k) => {
            return Err(Error::Precondition(format!("spectator configuration {k} out of range")));
        }
    })
}

/// Error change when halving `dt`.
pub fn richardson_gap(pulse: &PulseShape, stray: &StrayTerms, noise: &NoiseModel, settings: &GateSettings) -> Result<f64> {
    let coarse = process_fidelity(pulse, stray, noise, settings)?;
    let fine = process_fidelity(pulse, stray, noise, &GateSettings { dt: settings.dt / 2.0, ..*settings })?;
    Ok((coarse - fine).abs())
}

/// Stray terms and exchange of one cell with its gate coupler ON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatePoint {
    /// Exact exchange `J13`, MHz.
    pub j_on: f64,
    pub stray: StrayTerms,
    pub bias: BiasPoint,
    pub t1: [f64; 2],
}

impl GatePoint {
    pub fn pulse(&self) -> Result<PulseShape> {
        PulseShape::calibrated(self.j_on.abs())
    }

    pub fn noise(&self, level: NoiseLevel) -> NoiseModel {
        NoiseModel::with_t1(level, self.t1)
    }
}

/// What counts as stray Z1Z3 at the ON point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StrayReference {
    /// Full cell coefficient minus that of the isolated Q1-C13-Q3 circuit,
    /// whose conditional phase belongs to the intended gate.
    #[default]
    PairSubtracted,
    /// Full cell coefficient.
    FullCell,
}

/// Sub-layout holding only the listed elements and the edges among them.
fn restrict(layout: &DeviceLayout, keep: &[&str]) -> DeviceLayout {
    let has = |id: &str| keep.contains(&id);
    DeviceLayout {
        qubits: layout.qubits.iter().filter(|q| has(&q.id)).cloned().collect(),
        couplers: layout.couplers.iter().filter(|c| has(&c.id)).cloned().collect(),
        edges: layout.edges.iter().filter(|e| has(&e.endpoints[0]) && has(&e.endpoints[1])).cloned().collect(),
        cells: Vec::new(),
    }
}

#[derive(Debug, Clone)]
pub struct GateOptions {
    pub reference: StrayReference,
    /// `|J13|` search range, MHz.
    pub range: [f64; 2],
    pub scan_points: usize,
    pub refine_iterations: usize,
    pub settings: GateSettings,
    pub calibration: CalibrationOptions,
    pub solve: SolveOptions,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            reference: StrayReference::default(),
            range: [10.0, 34.0],
            scan_points: 7,
            refine_iterations: 6,
            settings: GateSettings::default(),
            calibration: CalibrationOptions::default(),
            solve: SolveOptions::default(),
        }
    }
}

/// Z1Z3 and the three spectator-conditioned strings of a cell.
pub fn cell_stray(eff: &EffectiveQubitH, view: &UnitCellView) -> Result<StrayTerms> {
    let pc = pauli_coefficients(eff)?;
    let idx = |id: &str| eff.qubit_index(id).ok_or_else(|| Error::UnknownElement(id.into()));
    let (i1, i3) = (idx(&view.central)?, idx(&view.sides[1])?);
    let coeff = |extra: Option<&str>| -> Result<f64> {
        let mut zs = vec![i1, i3];
        if let Some(s) = extra {
            zs.push(idx(s)?);
        }
        Ok(pc.get(PauliString::from_indices(eff.n_qubits(), &zs)?))
    };
    Ok(StrayTerms {
        zz13: coeff(None)?,
        zzz123: coeff(Some(&view.sides[0]))?,
        zzz134: coeff(Some(&view.sides[2]))?,
        zzz135: coeff(Some(&view.sides[3]))?,
    })
}

/// Brings the cell to an ON point with `|J13| = target`: Q3 tuned onto Q1,
/// the other couplers at hard-OFF.
pub fn gate_point(layout: &DeviceLayout, cell: &str, target: f64, opts: &GateOptions) -> Result<GatePoint> {
    let view = layout.cell(cell)?.clone();
    let (q1, q3, c13) = (view.central.as_str(), view.sides[1].as_str(), view.couplers[1].as_str());
    let l = prepare_cell(&layout.cell_subcircuit(cell)?, cell, Some(target), true, &opts.calibration)?;
    let j_on = exact_pair_j(&l, q1, q3)?;
    let eff = solve_layout(&l, &opts.solve)?;
    let mut stray = cell_stray(&eff, &view)?;
    if opts.reference == StrayReference::PairSubtracted {
        let pair = restrict(&l, &[q1, q3, c13]);
        let pe = solve_layout(&pair, &opts.solve)?;
        let pp = pauli_coefficients(&pe)?;
        let (a, b) = (pe.qubit_index(q1).unwrap(), pe.qubit_index(q3).unwrap());
        stray.zz13 -= pp.get(PauliString::from_indices(2, &[a, b])?);
    }
    let t1 = [q1, q3].map(|q| l.qubit(q).map_or(crate::device::DEFAULT_T1_NS, |t| t.t1_ns()));
    Ok(GatePoint {
        j_on,
        stray,
        bias: BiasPoint::from_layout(&l),
        t1,
    })
}

/// One evaluated point of the J search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub target: f64,
    /// Model (ii) error, `None` when calibration failed.
    pub error: Option<f64>,
}

/// Errors of the three noise models at the model (ii) optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub cell: String,
    pub g_side: f64,
    pub j_on: f64,
    pub errors: Vec<(NoiseLevel, f64)>,
    pub pulse: PulseShape,
    pub stray: StrayTerms,
    pub spectators: SpectatorMode,
    pub measure: FidelityMeasure,
    pub reference: StrayReference,
    pub converged: bool,
    /// The optimum sits on the search range or the coupler's reach limit.
    pub at_boundary: bool,
    pub t1_placeholder: bool,
    pub samples: Vec<ScanSample>,
}

impl FidelityReport {
    pub fn error(&self, level: NoiseLevel) -> Option<f64> {
        self.errors.iter().find(|(l, _)| *l == level).map(|(_, e)| *e)
    }
}

pub const FIDELITY_HEADER: [&str; 6] = ["cell", "gside_MHz", "noise_level", "j_on_MHz", "error", "pulse_duration_ns"];

/// One row per (cell, noise level).
pub fn write_fidelity_csv(reports: &[FidelityReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{other:?}")),
    })?;
    w.write_record(FIDELITY_HEADER)?;
    for r in reports {
        for (level, e) in &r.errors {
            w.write_record([
                r.cell.clone(),
                format!("{}", r.g_side),
                level.to_string(),
                format!("{:.6}", r.j_on.abs()),
                format!("{e:.6e}"),
                format!("{:.4}", r.pulse.duration()),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Errors of every noise level at one gate point.
pub fn errors_at(point: &GatePoint, settings: &GateSettings) -> Result<Vec<(NoiseLevel, f64)>> {
    let pulse = point.pulse()?;
    NoiseLevel::ALL
        .iter()
        .map(|&lv| Ok((lv, process_fidelity(&pulse, &point.stray, &point.noise(lv), settings)?)))
        .collect()
}

/// Grid scan over `opts.range` followed by golden-section refinement of the
/// model (ii) error. Points that fail to calibrate count as infinite error,
/// so the search settles at the coupler's reach limit when the error keeps
/// falling with J.
pub fn optimize_gate(layout: &DeviceLayout, cell: &str, opts: &GateOptions) -> Result<FidelityReport> {
    let [lo, hi] = opts.range;
    if !(lo > 0.0 && hi > lo) || opts.scan_points < 3 {
        return Err(Error::Precondition("need 0 < lo < hi and at least 3 scan points".into()));
    }
    let view = layout.cell(cell)?.clone();
    let mut samples = Vec::new();
    let mut best: Option<(f64, GatePoint)> = None;
    let mut eval = |j: f64, samples: &mut Vec<ScanSample>| -> f64 {
        let e = gate_point(layout, cell, j, opts).and_then(|p| {
            let pulse = p.pulse()?;
            let e = process_fidelity(&pulse, &p.stray, &p.noise(NoiseLevel::WithZz), &opts.settings)?;
            Ok((e, p))
        });
        let err = e.as_ref().ok().map(|(e, _)| *e);
        samples.push(ScanSample { target: j, error: err });
        if let Ok((e, p)) = e {
            if best.as_ref().map_or(true, |(b, _)| e < *b) {
                best = Some((e, p));
            }
        }
        err.unwrap_or(f64::INFINITY)
    };
    let n = opts.scan_points;
    let grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&j| eval(j, &mut samples)).collect();
    let k = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if !values[k].is_finite() {
        return Err(Error::Calibration(format!("no J in [{lo}, {hi}] MHz calibrates on cell {cell}")));
    }
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n - 1)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c, &mut samples), eval(d, &mut samples));
    for _ in 0..opts.refine_iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c, &mut samples);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d, &mut samples);
        }
    }
    let (_, point) = best.expect("finite grid value implies a point");
    let j = point.j_on.abs();
    let step = (hi - lo) / (n - 1) as f64;
    let failed_above = samples.iter().any(|s| s.error.is_none() && s.target > j && s.target - j < step);
    let at_boundary = (j - lo).abs() < 0.02 * step || (j - hi).abs() < 0.02 * step || failed_above;
    let errors = errors_at(&point, &opts.settings)?;
    let t1_placeholder = [&view.central, &view.sides[1]]
        .iter()
        .any(|q| layout.qubit(q).map_or(true, |t| t.t1_is_placeholder()));
    Ok(FidelityReport {
        cell: cell.to_string(),
        g_side: layout.strength(&view.sides[0], &view.sides[1]),
        j_on: point.j_on,
        errors,
        pulse: point.pulse()?,
        stray: point.stray,
        spectators: opts.settings.spectators,
        measure: opts.settings.measure,
        reference: opts.reference,
        converged: true,
        at_boundary,
        t1_placeholder,
        samples,
    })
}

/// `|ψ⟩⟨ψ|` for amplitudes in the `2·q1 + q3` basis.
pub fn pure_state(amps: [C64; 4]) -> Density {
    let v = nalgebra::Vector4::from(amps);
    let v = v / c(v.norm());
    v * v.adjoint()
}

/// Computational basis state `|q1 q3⟩`.
pub fn basis_state(q1: usize, q3: usize) -> Density {
    let mut m = Density::zeros();
    m[(2 * q1 + q3, 2 * q1 + q3)] = c(1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn coherent() -> NoiseModel {
        NoiseModel::coherent(NoiseLevel::WithZzz)
    }

    fn min_eigenvalue(rho: &Density) -> f64 {
        // Hermitian 4x4 as a real 8x8 symmetric matrix.
        let mut m = nalgebra::DMatrix::<f64>::zeros(8, 8);
        for r in 0..4 {
            for col in 0..4 {
                let z = rho[(r, col)];
                m[(r, col)] = z.re;
                m[(r + 4, col + 4)] = z.re;
                m[(r, col + 4)] = -z.im;
                m[(r + 4, col)] = z.im;
            }
        }
        m.symmetric_eigenvalues().min()
    }

    #[test]
    fn waveform_shape() {
        let p = PulseShape::calibrated(20.0).unwrap();
        let d = p.duration();
        assert_eq!(pulse_waveform(&p, 0.5 * d).unwrap(), 20.0);
        assert!(pulse_waveform(&p, 0.0).unwrap() <= 0.2);
        for k in 0..=50 {
            let t = d * k as f64 / 50.0;
            assert_relative_eq!(pulse_waveform(&p, t).unwrap(), pulse_waveform(&p, d - t).unwrap(), epsilon = 1e-12);
        }
        // Value and slope continuity at the junction.
        let r = p.ramp_duration;
        let h = 1e-6;
        assert_relative_eq!(pulse_waveform(&p, r - h).unwrap(), 20.0, epsilon = 1e-6);
        let slope = (pulse_waveform(&p, r).unwrap() - pulse_waveform(&p, r - h).unwrap()) / h;
        assert!(slope.abs() < 1e-3);
        assert!(pulse_waveform(&p, d + 0.1).is_err());
        assert!(pulse_waveform(&p, -0.1).is_err());
    }

    #[test]
    fn square_swap_duration() {
        let p = PulseShape::square(20.0, 0.0);
        assert_relative_eq!(calibrate_duration(&p).unwrap(), 12.5, epsilon = 1e-12);
        let q = PulseShape::square(40.0, 0.0);
        assert_relative_eq!(calibrate_duration(&q).unwrap(), 6.25, epsilon = 1e-12);
        assert!(calibrate_duration(&PulseShape::square(0.0, 0.0)).is_err());
    }

    #[test]
    fn ramped_pulse_area_matches_trapezoid_oracle() {
        for amp in [12.0, 20.0, 26.0] {
            let p = PulseShape::calibrated(amp).unwrap();
            let n = 200_000;
            let h = p.duration() / n as f64;
            let trap: f64 = (0..n)
                .map(|k| 0.5 * h * (p.value(k as f64 * h) + p.value((k + 1) as f64 * h)))
                .sum();
            assert_relative_eq!(trap, SWAP_AREA, max_relative = 1e-7);
        }
    }

    #[test]
    fn calibrated_pulse_is_iswap() {
        let p = PulseShape::calibrated(20.0).unwrap();
        let e = process_fidelity(&p, &StrayTerms::default(), &coherent(), &GateSettings::default()).unwrap();
        assert!(e < 1e-6, "{e}");
        let rho = evolve(&basis_state(1, 0), &p, &StrayTerms::default(), SpectatorMode::Average, &coherent(), 0.1).unwrap();
        assert!(rho[(1, 1)].re > 1.0 - 1e-6);
    }

    #[test]
    fn stray_phase_on_eleven() {
        let alpha = 0.3;
        let t = 40.0;
        let p = PulseShape::square(0.0, t);
        let half = c(0.5);
        let rho0 = pure_state([half, half, half, half]);
        let rho = evolve(&rho0, &p, &StrayTerms::zz_only(alpha), SpectatorMode::Average, &coherent(), 0.1).unwrap();
        let th = 2.0 * PI * alpha * t * 1e-3;
        // Z1Z3 eigenvalues +1, -1, -1, +1; U = exp(-iθ Z1Z3).
        let ph = [-th, th, th, -th];
        for r in 0..4 {
            assert_relative_eq!(rho[(r, r)].re, 0.25, epsilon = 1e-12);
            for col in 0..4 {
                let want = 0.25 * phase(ph[r] - ph[col]);
                assert_relative_eq!(rho[(r, col)].re, want.re, epsilon = 1e-12);
                assert_relative_eq!(rho[(r, col)].im, want.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn t1_decay_from_eleven() {
        let t1 = 5_000.0;
        let t = 300.0;
        let noise = NoiseModel {
            level: NoiseLevel::DecoherenceOnly,
            t1: [t1; 2],
            t2: [2.0 * t1; 2],
        };
        let p = PulseShape::square(0.0, t);
        let rho = evolve(&basis_state(1, 1), &p, &StrayTerms::default(), SpectatorMode::Average, &noise, 0.1).unwrap();
        let e = (-t / t1).exp();
        assert_relative_eq!(rho[(3, 3)].re, e * e, epsilon = 1e-12);
        assert_relative_eq!(rho[(2, 2)].re, e * (1.0 - e), epsilon = 1e-12);
        assert_relative_eq!(rho[(0, 0)].re, (1.0 - e).powi(2), epsilon = 1e-12);
    }

    #[test]
    fn dephasing_rate_with_t2_equal_t1() {
        let t1 = 4_000.0;
        let t = 200.0;
        let noise = NoiseModel::with_t1(NoiseLevel::DecoherenceOnly, [t1; 2]);
        let p = PulseShape::square(0.0, t);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        // (|00⟩ + |10⟩)/√2: Q1 coherence decays as exp(-t/T2).
        let rho0 = pure_state([s, c(0.0), s, c(0.0)]);
        let rho = evolve(&rho0, &p, &StrayTerms::default(), SpectatorMode::Average, &noise, 0.1).unwrap();
        assert_relative_eq!(rho[(0, 2)].norm(), 0.5 * (-t / t1).exp(), epsilon = 1e-12);
    }

    #[test]
    fn noise_validation() {
        let bad = NoiseModel {
            level: NoiseLevel::DecoherenceOnly,
            t1: [1000.0; 2],
            t2: [2500.0, 1000.0],
        };
        assert!(matches!(bad.validate(), Err(Error::Noise(_))));
        assert!(NoiseModel::with_t1(NoiseLevel::WithZz, [0.0, 1.0]).validate().is_err());
        assert!(coherent().validate().is_ok());
        let p = PulseShape::square(0.0, 10.0);
        assert!(evolve(&basis_state(0, 0), &p, &StrayTerms::default(), SpectatorMode::Average, &bad, 0.1).is_err());
        assert!(evolve(&basis_state(0, 0), &p, &StrayTerms::default(), SpectatorMode::Average, &coherent(), 0.6).is_err());
        assert!(evolve(&(basis_state(0, 0) * c(2.0)), &p, &StrayTerms::default(), SpectatorMode::Average, &coherent(), 0.1).is_err());
    }

    #[test]
    fn zz_fifty_khz_oracle() {
        // Identity-like window: 50 ns of pure stray, compared against a
        // zero-area target through the process map directly.
        let th = 2.0 * PI * 0.05 * 50.0 * 1e-3;
        let p = PulseShape::square(0.0, 50.0);
        let map = process_map(&p, 0.05, &coherent(), 0.1);
        let (f, _, _) = phase_corrected_process_fidelity(&map, &Density::identity());
        assert_relative_eq!(1.0 - f, th.sin().powi(2), max_relative = 1e-9);
        // Same window as an iSWAP: the stray commutes with the exchange.
        let g = PulseShape::square(5.0, 50.0);
        let s = GateSettings { measure: FidelityMeasure::Process, ..Default::default() };
        let e = process_fidelity(&g, &StrayTerms::zz_only(0.05), &NoiseModel::coherent(NoiseLevel::WithZz), &s).unwrap();
        assert_relative_eq!(e, th.sin().powi(2), max_relative = 1e-6);
        let avg = process_fidelity(&g, &StrayTerms::zz_only(0.05), &NoiseModel::coherent(NoiseLevel::WithZz), &GateSettings::default()).unwrap();
        assert_relative_eq!(avg, 0.8 * th.sin().powi(2), max_relative = 1e-6);
    }

    #[test]
    fn local_phases_are_free() {
        let mut d = Density::identity();
        d[(1, 1)] = phase(0.7);
        d[(2, 2)] = phase(-1.1);
        d[(3, 3)] = phase(-0.4);
        let u = d * iswap();
        let map: Vec<Density> = (0..16)
            .map(|k| {
                let mut e = Density::zeros();
                e[(k / 4, k % 4)] = c(1.0);
                u * e * u.adjoint()
            })
            .collect();
        let (f, _, _) = phase_corrected_process_fidelity(&map, &iswap());
        assert_relative_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decoherence_floor_matches_first_order() {
        let t1 = 20_000.0;
        for amp in [12.0, 20.0, 26.0] {
            let p = PulseShape::calibrated(amp).unwrap();
            let noise = NoiseModel::with_t1(NoiseLevel::DecoherenceOnly, [t1; 2]);
            let e = process_fidelity(&p, &StrayTerms::default(), &noise, &GateSettings::default()).unwrap();
            // Per qubit 1 - F_pro ≈ T/(4 T1) + T/(2 T2); two qubits, d = 4.
            let t = p.duration();
            let oracle = 0.8 * 2.0 * (t / (4.0 * t1) + t / (2.0 * t1));
            assert_relative_eq!(e, oracle, max_relative = 0.1);
        }
    }

    #[test]
    fn richardson_step_check() {
        let p = PulseShape::calibrated(20.0).unwrap();
        let stray = StrayTerms {
            zz13: 0.05,
            zzz123: 0.01,
            zzz134: -0.02,
            zzz135: 0.005,
        };
        let noise = NoiseModel::with_t1(NoiseLevel::WithZzz, [20_000.0; 2]);
        let gap = richardson_gap(&p, &stray, &noise, &GateSettings::default()).unwrap();
        assert!(gap < 1e-8, "{gap}");
    }

    #[test]
    fn worst_case_dominates_average() {
        let p = PulseShape::calibrated(20.0).unwrap();
        let stray = StrayTerms {
            zz13: 0.02,
            zzz123: 0.05,
            zzz134: 0.0,
            zzz135: 0.03,
        };
        let noise = NoiseModel::coherent(NoiseLevel::WithZzz);
        let avg = process_fidelity(&p, &stray, &noise, &GateSettings::default()).unwrap();
        let worst = process_fidelity(&p, &stray, &noise, &GateSettings { spectators: SpectatorMode::Worst, ..Default::default() }).unwrap();
        let fixed = process_fidelity(&p, &stray, &noise, &GateSettings { spectators: SpectatorMode::Fixed(0), ..Default::default() }).unwrap();
        assert!(worst >= avg && worst >= fixed);
        let th = 2.0 * PI * 0.1 * p.duration() * 1e-3;
        assert_relative_eq!(fixed, 0.8 * th.sin().powi(2), max_relative = 1e-6);
    }

    #[test]
    fn fidelity_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_fidelity_csv(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), FIDELITY_HEADER.join(","));
    }

    fn arb_state() -> impl Strategy<Value = Density> {
        proptest::collection::vec(-1.0f64..1.0, 8).prop_filter_map("nonzero", |v| {
            let amps = [0, 1, 2, 3].map(|k| C64::new(v[2 * k], v[2 * k + 1]));
            (amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3).then(|| pure_state(amps))
        })
    }

    fn arb_stray() -> impl Strategy<Value = StrayTerms> {
        (-0.5f64..0.5, -0.2f64..0.2, -0.2f64..0.2, -0.2f64..0.2).prop_map(|(a, b, c, d)| StrayTerms {
            zz13: a,
            zzz123: b,
            zzz134: c,
            zzz135: d,
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn evolve_is_physical(rho0 in arb_state(), stray in arb_stray(), amp in 5.0f64..30.0, t1 in 500.0f64..50_000.0, ratio in 0.2f64..2.0) {
            let p = PulseShape::calibrated(amp).unwrap();
            let noise = NoiseModel { level: NoiseLevel::WithZzz, t1: [t1, 1.3 * t1], t2: [ratio * t1, ratio * 1.3 * t1] };
            let rho = evolve(&rho0, &p, &stray, SpectatorMode::Average, &noise, 0.1).unwrap();
            prop_assert!((rho.trace() - c(1.0)).norm() < 1e-12);
            prop_assert!((rho - rho.adjoint()).norm() < 1e-12);
            prop_assert!(min_eigenvalue(&rho) > -1e-10);
        }

        #[test]
        fn plateau_evolution_composes(rho0 in arb_state(), stray in arb_stray(), amp in 5.0f64..30.0, m in 20usize..200) {
            let t = 0.2 * m as f64;
            let p = PulseShape::square(amp, t);
            let noise = NoiseModel::with_t1(NoiseLevel::WithZzz, [3_000.0, 7_000.0]);
            let cfg = SpectatorMode::Fixed(5);
            let whole = evolve_window(&rho0, &p, &stray, cfg, &noise, 0.1, (0.0, t)).unwrap();
            let mid = evolve_window(&rho0, &p, &stray, cfg, &noise, 0.1, (0.0, t / 2.0)).unwrap();
            let split = evolve_window(&mid, &p, &stray, cfg, &noise, 0.1, (t / 2.0, t)).unwrap();
            prop_assert!((whole - split).norm() < 1e-9);
        }

        #[test]
        fn stray_keeps_populations(rho0 in arb_state(), rate in -2.0f64..2.0, dt in 0.01f64..5.0) {
            let u = stray_segment(rate, dt);
            let rho = u * rho0 * u.adjoint();
            for k in 0..4 {
                prop_assert!((rho[(k, k)] - rho0[(k, k)]).norm() < 1e-14);
            }
        }

        #[test]
        fn nested_noise_models_order(stray in arb_stray(), amp in 10.0f64..30.0) {
            let p = PulseShape::calibrated(amp).unwrap();
            let s = StrayTerms { zz13: 0.1 * stray.zz13, zzz123: 0.1 * stray.zzz123, zzz134: 0.1 * stray.zzz134, zzz135: 0.1 * stray.zzz135 };
            let errs: Vec<f64> = NoiseLevel::ALL
                .iter()
                .map(|&lv| process_fidelity(&p, &s, &NoiseModel::with_t1(lv, [20_000.0; 2]), &GateSettings::default()).unwrap())
                .collect();
            prop_assert!(errs[0] <= errs[1] + 1e-12);
            prop_assert!(errs[1] <= errs[2] + 1e-12);
        }
    }
}
