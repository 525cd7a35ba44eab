//! Command-line front end. Exit status: 0 on success, 2 when some grid
//! points were flagged, 1 on failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use surfham::analysis::{
    classify, fidelity_sweep, linear_grid, log_grid, onoff_overlay_scan, pet_scan, phase_scan, tomography_scan, GateState, PetGrid,
    ScanContext,
};
use surfham::calibration::{exact_pair_j, prepare_cell, BiasPoint, CalibrationOptions};
use surfham::device::{default_cell, generate_sycamore_like, load_layout, DeviceDefaults, DeviceLayout, EdgeKind};
use surfham::effective::{pauli_coefficients, solve_cell, write_effective_blocks, SolveOptions};
use surfham::gatesim::{FidelityMeasure, GateOptions, NoiseLevel, SpectatorMode, StrayReference};
use surfham::perturbation::{perturbative_table, FrequencyTable, LevelJTable, PertOptions};
use surfham::report::{pauli_rows, report_render, Dataset, Format, PauliRow};
use surfham::{Error, Result};

#[derive(Parser)]
#[command(name = "surfham", version, about = "Effective Hamiltonians and gate errors for tunable-coupler transmon lattices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Layout file (TOML, or JSON by extension). Defaults to the built-in reference cell.
    #[arg(long, global = true)]
    layout: Option<PathBuf>,
    /// Unit cell label. Defaults to the layout's first cell.
    #[arg(long, global = true)]
    cell: Option<String>,
    /// Overrides every side (qubit-qubit diagonal) coupling, MHz.
    #[arg(long = "gside-mhz", global = true)]
    g_side: Option<f64>,
    /// Overrides every radial direct coupling, MHz.
    #[arg(long = "gradial-mhz", global = true)]
    g_radial: Option<f64>,
    /// Total excitation cap of the bosonic basis.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long = "out-dir", global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Svg,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
            OutFormat::Svg => Format::Svg,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Layout files.
    #[command(subcommand)]
    Layout(LayoutCmd),
    /// Exact effective Hamiltonian of one cell.
    #[command(subcommand)]
    Cell(CellCmd),
    /// Pauli-Z coefficients of one cell.
    #[command(subcommand)]
    Pauli(PauliCmd),
    /// Coupler and qubit biasing.
    #[command(subcommand)]
    Calibrate(CalibrateCmd),
    /// Parameter scans.
    #[command(subcommand)]
    Scan(ScanCmd),
    /// iSWAP error benchmarks.
    #[command(subcommand)]
    Gate(GateCmd),
    /// Re-render a saved dataset.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum LayoutCmd {
    /// Parse and validate the layout, then print a summary.
    Validate,
    /// Generate a diamond-lattice layout.
    Generate {
        #[arg(long, default_value_t = 4)]
        rows: usize,
        #[arg(long, default_value_t = 8)]
        cols: usize,
        /// Output path; `.json` selects JSON, anything else TOML.
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum CellCmd {
    /// Solve the cell and write its effective blocks.
    Solve,
}

#[derive(Subcommand)]
enum PauliCmd {
    /// Coefficient table, exact and optionally perturbative.
    Table {
        #[arg(long, default_value_t = 3)]
        max_weight: usize,
        /// Add second- and third-order rows for weight 2 and 3 strings.
        #[arg(long)]
        pert: bool,
        /// Calibrate the cell to hard-OFF before solving.
        #[arg(long)]
        off: bool,
    },
}

#[derive(Subcommand)]
enum CalibrateCmd {
    /// Every coupler of the cell at hard-OFF.
    Off,
    /// Gate coupler at `|J13| = j`, the rest at hard-OFF.
    On {
        #[arg(long = "j-mhz")]
        j: f64,
    },
    /// As `on`, with Q3 tuned onto Q1's dressed frequency.
    Resonance {
        #[arg(long = "j-mhz")]
        j: f64,
    },
}

#[derive(Subcommand)]
enum ScanCmd {
    /// Weight 2 and 3 coefficients over a (J13, G_side) grid.
    Tomography {
        /// Target |J13| values, MHz; 0 means hard-OFF.
        #[arg(long = "j-mhz", value_delimiter = ',', default_values_t = [0.0, 5.0, 10.0, 15.0])]
        j: Vec<f64>,
        #[arg(long = "gsides", value_delimiter = ',', default_values_t = [0.0, 2.0, 4.0])]
        g_sides: Vec<f64>,
        #[arg(long)]
        resonant: bool,
    },
    /// Processor error tomography: gate coupler swept across its band.
    Pet {
        #[arg(long, default_value_t = 24)]
        points: usize,
        /// Every cell of the layout instead of only `--cell`.
        #[arg(long)]
        all_cells: bool,
    },
    /// Stray terms at resonance as a function of |J13|.
    Overlay {
        #[arg(long = "j-range", value_delimiter = ',', default_values_t = [5.0, 20.0, 7.0])]
        j_range: Vec<f64>,
        #[arg(long)]
        all_cells: bool,
    },
    /// |ZZ|max and |ZZZ|max against G_side/G_radial.
    Phase {
        #[arg(long, value_enum, default_value_t = StateArg::Off)]
        state: StateArg,
        /// `lo,hi,n` log-spaced ratios.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        ratios: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    On,
    Off,
}

#[derive(Subcommand)]
enum GateCmd {
    /// Optimised iSWAP errors under the three noise models.
    Bench {
        /// Side couplings to sweep, MHz. Defaults to `--gside-mhz` or 0.
        #[arg(long = "gsides", value_delimiter = ',')]
        g_sides: Option<Vec<f64>>,
        #[arg(long)]
        all_cells: bool,
        /// `average`, `worst` or `fixed:K` with K in 0..8.
        #[arg(long, default_value = "average")]
        spectators: String,
        #[arg(long, value_enum, default_value_t = MeasureArg::Average)]
        measure: MeasureArg,
        /// Keep the pair's own conditional phase in the stray Z1Z3.
        #[arg(long)]
        full_cell_stray: bool,
        #[arg(long = "dt-ns", default_value_t = 0.1)]
        dt: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Average,
    Process,
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Convert a dataset JSON written by a scan to `--format`.
    Render {
        #[arg(long)]
        input: PathBuf,
    },
}

enum Outcome {
    Done,
    Partial(usize),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            eprintln!("warning: {n} grid point(s) flagged");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

impl Global {
    fn layout(&self) -> Result<DeviceLayout> {
        let mut l = match &self.layout {
            Some(p) => load_layout(p)?,
            None => default_cell(),
        };
        if let Some(g) = self.g_side {
            l.set_kind_strength(EdgeKind::Side, g);
        }
        if let Some(g) = self.g_radial {
            l.set_kind_strength(EdgeKind::Radial, g);
        }
        l.validate()?;
        Ok(l)
    }

    fn cell(&self, layout: &DeviceLayout) -> Result<String> {
        match &self.cell {
            Some(c) => layout.cell(c).map(|v| v.label.clone()),
            None => layout
                .cells
                .first()
                .map(|c| c.label.clone())
                .ok_or_else(|| Error::Precondition("layout has no unit cells".into())),
        }
    }

    fn cells(&self, layout: &DeviceLayout, all: bool) -> Result<Vec<String>> {
        if all {
            Ok(layout.cells.iter().map(|c| c.label.clone()).collect())
        } else {
            Ok(vec![self.cell(layout)?])
        }
    }

    fn solve(&self) -> SolveOptions {
        let mut s = SolveOptions::default();
        if let Some(cap) = self.truncation {
            s.policy.total_excitation_cap = Some(cap);
        }
        s
    }

    fn context(&self) -> ScanContext {
        ScanContext {
            solve: self.solve(),
            ..Default::default()
        }
    }

    fn g_radial_or(&self, layout: &DeviceLayout) -> f64 {
        self.g_radial.unwrap_or_else(|| {
            layout
                .edges
                .iter()
                .find(|e| e.kind == EdgeKind::Radial)
                .map_or(0.0, |e| e.strength)
        })
    }
}

/// Writes the dataset as JSON plus the requested format.
fn emit(g: &Global, d: &Dataset, stem: &str) -> Result<Outcome> {
    let json = report_render(d, Format::Json, &g.out_dir, stem)?;
    let main = match Format::from(g.format) {
        Format::Json => json,
        f => report_render(d, f, &g.out_dir, stem)?,
    };
    println!("wrote {}", main.display());
    Ok(match d.flagged() {
        0 => Outcome::Done,
        n => Outcome::Partial(n),
    })
}

#[derive(Serialize)]
struct BiasReport<'a> {
    cell: &'a str,
    bias: BiasPoint,
    /// Exact exchange of every coupler's qubit pair, MHz.
    exchange: BTreeMap<String, f64>,
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Layout(LayoutCmd::Validate) => {
            let l = g.layout()?;
            println!(
                "ok: {} qubits, {} couplers, {} edges, {} cells",
                l.qubits.len(),
                l.couplers.len(),
                l.edges.len(),
                l.cells.len()
            );
            Ok(Outcome::Done)
        }
        Command::Layout(LayoutCmd::Generate { rows, cols, output }) => {
            let mut defaults = DeviceDefaults::default();
            if let Some(s) = g.g_side {
                defaults.g_side = s;
            }
            if let Some(r) = g.g_radial {
                defaults.g_radial = r;
            }
            let l = generate_sycamore_like(*rows, *cols, &defaults, g.seed)?;
            l.save(output)?;
            println!("wrote {} ({} qubits, {} cells)", output.display(), l.qubits.len(), l.cells.len());
            Ok(Outcome::Done)
        }
        Command::Cell(CellCmd::Solve) => {
            let l = g.layout()?;
            let cell = g.cell(&l)?;
            let eff = solve_cell(&l, &cell, &g.solve())?;
            std::fs::create_dir_all(&g.out_dir).map_err(|e| Error::io(&g.out_dir, e))?;
            let path = g.out_dir.join(format!("{cell}_effective.csv"));
            write_effective_blocks(&eff, &path)?;
            for (i, id) in eff.qubit_ids.iter().enumerate() {
                println!("{id}: {:.6} MHz", eff.transition(i, 0).unwrap_or(f64::NAN));
            }
            println!("wrote {}", path.display());
            Ok(Outcome::Done)
        }
        Command::Pauli(PauliCmd::Table { max_weight, pert, off }) => {
            let mut l = g.layout()?;
            let cell = g.cell(&l)?;
            if *off {
                l = prepare_cell(&l.cell_subcircuit(&cell)?, &cell, None, false, &CalibrationOptions::default())?;
            }
            let eff = solve_cell(&l, &cell, &g.solve())?;
            let pc = pauli_coefficients(&eff)?;
            let mut rows = pauli_rows(&pc, *max_weight, "exact");
            if *pert {
                let table = perturbative_table(&LevelJTable::from_effective(&eff), &FrequencyTable::dressed(&eff), &PertOptions::default())?;
                for (p, a2, a3) in table {
                    if p.weight() > *max_weight {
                        continue;
                    }
                    for (path, v) in [("pert2", a2), ("pert3", a2 + a3)] {
                        rows.push(PauliRow {
                            string: p.to_string(),
                            alpha: v,
                            path: path.into(),
                        });
                    }
                }
            }
            emit(g, &Dataset::Pauli { rows }, &format!("{cell}_pauli"))
        }
        Command::Calibrate(cmd) => {
            let l = g.layout()?;
            let cell = g.cell(&l)?;
            let sub = l.cell_subcircuit(&cell)?;
            let opts = CalibrationOptions::default();
            let (target, resonant, stem) = match cmd {
                CalibrateCmd::Off => (None, false, "off"),
                CalibrateCmd::On { j } => (Some(*j), false, "on"),
                CalibrateCmd::Resonance { j } => (Some(*j), true, "resonance"),
            };
            let cal = prepare_cell(&sub, &cell, target, resonant, &opts)?;
            let mut exchange = BTreeMap::new();
            for c in &cal.couplers {
                let q = cal.coupler_qubits(&c.id);
                if let [a, b] = q[..] {
                    exchange.insert(format!("J({a},{b})"), exact_pair_j(&cal, a, b)?);
                }
            }
            for (k, v) in &exchange {
                println!("{k} = {v:.6} MHz");
            }
            let report = BiasReport {
                cell: &cell,
                bias: BiasPoint::from_layout(&cal),
                exchange,
            };
            std::fs::create_dir_all(&g.out_dir).map_err(|e| Error::io(&g.out_dir, e))?;
            let json = g.out_dir.join(format!("{cell}_{stem}.json"));
            let text = serde_json::to_string_pretty(&report)? + "\n";
            std::fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
            let layout_path = g.out_dir.join(format!("{cell}_{stem}.layout"));
            cal.save(&layout_path)?;
            println!("wrote {} and {}", json.display(), layout_path.display());
            Ok(Outcome::Done)
        }
        Command::Scan(cmd) => {
            let l = g.layout()?;
            let ctx = g.context();
            match cmd {
                ScanCmd::Tomography { j, g_sides, resonant } => {
                    let cell = g.cell(&l)?;
                    let scan = tomography_scan(&l, &cell, j, g_sides, *resonant, &ctx)?;
                    emit(g, &Dataset::Tomography(scan), &format!("{cell}_tomography"))
                }
                ScanCmd::Pet { points, all_cells } => {
                    let cells = g.cells(&l, *all_cells)?;
                    let grid = PetGrid {
                        points: *points,
                        ..Default::default()
                    };
                    let scan = pet_scan(&l, &cells, &grid, g.g_side.unwrap_or(0.0), &ctx)?;
                    emit(g, &Dataset::Pet(scan), "pet")
                }
                ScanCmd::Overlay { j_range, all_cells } => {
                    let cells = g.cells(&l, *all_cells)?;
                    let [lo, hi, n] = triple(j_range)?;
                    let grid = linear_grid(lo, hi, grid_len(n)?);
                    let scan = onoff_overlay_scan(&l, &cells, &grid, g.g_side.unwrap_or(0.0), &ctx)?;
                    for t in scan.safe_targets(0.05) {
                        println!("|Z1Z3| < 50 kHz at |J13| = {t:.3} MHz");
                    }
                    emit(g, &Dataset::Overlay(scan), "overlay")
                }
                ScanCmd::Phase { state, ratios } => {
                    let cell = g.cell(&l)?;
                    let state = match state {
                        StateArg::On => GateState::On,
                        StateArg::Off => GateState::Off,
                    };
                    let [lo, hi, n] = triple(ratios)?;
                    let grid = log_grid(lo, hi, grid_len(n)?);
                    let scan = phase_scan(&l, &cell, g.g_radial_or(&l), &grid, state, &ctx)?;
                    for (name, fit) in [("ZZ", &scan.fit_zz), ("ZZZ", &scan.fit_zzz)] {
                        match fit {
                            Some(f) => println!("{name}: exponent {:.3} over {} points", f.exponent, f.n_points),
                            None => println!("{name}: too few points above the fit floor"),
                        }
                    }
                    match &scan.crossover {
                        Some(c) => println!("crossover at G_side/G_radial = {:.4}", c.ratio),
                        None => println!("no crossover in range"),
                    }
                    emit(g, &Dataset::Phase(scan), &format!("{cell}_phase_{}", state.to_string().to_lowercase()))
                }
            }
        }
        Command::Gate(GateCmd::Bench {
            g_sides,
            all_cells,
            spectators,
            measure,
            full_cell_stray,
            dt,
        }) => {
            let l = g.layout()?;
            let cells = g.cells(&l, *all_cells)?;
            let g_sides = g_sides.clone().unwrap_or_else(|| vec![g.g_side.unwrap_or(0.0)]);
            let mut opts = GateOptions {
                solve: g.solve(),
                ..Default::default()
            };
            opts.settings.dt = *dt;
            opts.settings.spectators = parse_spectators(spectators)?;
            opts.settings.measure = match measure {
                MeasureArg::Average => FidelityMeasure::Average,
                MeasureArg::Process => FidelityMeasure::Process,
            };
            if *full_cell_stray {
                opts.reference = StrayReference::FullCell;
            }
            let mut sweep = fidelity_sweep(&l, &cells, &g_sides, &opts)?;
            sweep.g_radial = g.g_radial_or(&l);
            for (label, group) in classify(&sweep) {
                for r in group {
                    let errs: Vec<String> = NoiseLevel::ALL
                        .iter()
                        .map(|lv| format!("{lv}={:.3e}", r.error(*lv).unwrap_or(f64::NAN)))
                        .collect();
                    let edge = if r.at_boundary { " (at boundary)" } else { "" };
                    println!("[{label}] {} |J|={:.3} MHz {}{edge}", r.cell, r.j_on.abs(), errs.join(" "));
                }
            }
            emit(g, &Dataset::Fidelity(sweep), "fidelity")
        }
        Command::Report(ReportCmd::Render { input }) => {
            let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
            let d: Dataset = serde_json::from_str(&text)?;
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or(d.name()).to_string();
            let path = report_render(&d, g.format.into(), &g.out_dir, &stem)?;
            println!("wrote {}", path.display());
            Ok(Outcome::Done)
        }
    }
}

fn triple(v: &[f64]) -> Result<[f64; 3]> {
    v.try_into()
        .map_err(|_| Error::Parse(format!("expected `lo,hi,n`, got {} values", v.len())))
}

fn grid_len(x: f64) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Error::Precondition(format!("grid size must be a positive integer, got {x}")))
    }
}

fn parse_spectators(s: &str) -> Result<SpectatorMode> {
    match s {
        "average" => Ok(SpectatorMode::Average),
        "worst" => Ok(SpectatorMode::Worst),
        _ => s
            .strip_prefix("fixed:")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|k| *k < 8)
            .map(SpectatorMode::Fixed)
            .ok_or_else(|| Error::Parse(format!("bad spectator mode `{s}`"))),
    }
}
