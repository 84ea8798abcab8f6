use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tagforce::design::{sweep_designs, write_design_csv, CapacitanceBand, DesignPreset};
use tagforce::estimator::{Aggregate, CalibrationModel, DomainPolicy, EstimatorConfig, TimeWindow};
use tagforce::harness::{
    cmd_calibrate, cmd_estimate, cmd_simulate, cmd_sweep_phase, default_calibration, import_reader_trace,
    run_box_study, run_step_study, scenario_simulator, trial_estimator_config, BoxStudyConfig, PhaseUnits,
    ScenarioConfig, StepStudyConfig, TrialLayout,
};
use tagforce::link::{read_trace, write_trace, TraceFormat};
use tagforce::sensor::{MaterialSpec, SensorGeometry};
use tagforce::transduction::{log_grid, LineSpec};
use tagforce::{Error, Result};

/// Force sensing over RFID backscatter phase: simulate reader traces,
/// estimate force, calibrate, and explore sensor designs.
#[derive(Parser)]
#[command(name = "tagforce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a reader trace from a scenario file.
    Simulate(SimulateArgs),
    /// Estimate the force step in a trace (JSON on stdout).
    Estimate(EstimateArgs),
    /// Fit a calibration model from `phase_deg,force_n` samples or the forward model.
    Calibrate(CalibrateArgs),
    /// Phase-swing or design sweeps as CSV.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Classify 0..N identical items from seeded placements.
    CasestudyBox(BoxArgs),
    /// Recover a 1/3/5 N force staircase with step detection.
    CasestudyStep(StepArgs),
    /// Convert a reader export (timestamp,epc,channel_index,phase,rssi) to a trace.
    Import(ImportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for TraceFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => TraceFormat::Jsonl,
            FormatArg::Csv => TraceFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Required unless the scenario file sets `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<(ScenarioConfig, u64)> {
        let config = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        let seed = self
            .seed
            .or(config.seed)
            .ok_or_else(|| Error::Input("--seed is required (or set `seed` in the scenario file)".into()))?;
        Ok((config, seed))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Trace format; inferred from the output extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Override the scenario duration, seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Calibration model JSON.
    #[arg(long)]
    calibration: PathBuf,
    /// Baseline window `start,end` in seconds.
    #[arg(long, value_parser = parse_window, default_value = "0,2")]
    baseline: TimeWindow,
    /// Event window `start,end` in seconds.
    #[arg(long, value_parser = parse_window, default_value = "10,12")]
    event: TimeWindow,
    #[arg(long, default_value = "E28011606000020400001F2A")]
    epc: String,
    /// Clamp jumps outside the calibrated range instead of failing.
    #[arg(long)]
    clamp: bool,
    #[arg(long)]
    median: bool,
    /// Keep per-channel differences beyond ±90° instead of folding them.
    #[arg(long)]
    no_fold: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    /// CSV with header `phase_deg,force_n`.
    #[arg(long, conflicts_with = "forward_model", required_unless_present = "forward_model")]
    samples: Option<PathBuf>,
    /// Fit against the noise-free channel-averaged forward model of a scenario.
    #[arg(long)]
    forward_model: bool,
    /// Scenario for --forward-model.
    #[arg(long, requires = "forward_model")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Δφ against nominal capacitance at a fixed C(F_max)/C0 ratio.
    Phase(PhaseSweepArgs),
    /// Rank geometry × material candidates by phase swing.
    Design(DesignSweepArgs),
    /// Built-in low/reference/high-force designs with fitted shear moduli.
    Presets(LineArgs),
}

#[derive(Args)]
struct LineArgs {
    #[arg(long, default_value_t = 900.0)]
    freq_mhz: f64,
    #[arg(long, default_value_t = 50.0)]
    z0: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl LineArgs {
    fn line(&self) -> Result<LineSpec> {
        LineSpec::new(self.z0, self.freq_mhz * 1e6)
    }
}

#[derive(Args)]
struct PhaseSweepArgs {
    /// Explicit C0 values, pF.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from_pf", "to_pf", "points"])]
    c0_pf: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    from_pf: f64,
    #[arg(long, default_value_t = 100.0)]
    to_pf: f64,
    /// Log-spaced grid size.
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[arg(long, default_value_t = 1.75)]
    ratio: f64,
    #[command(flatten)]
    line: LineArgs,
}

#[derive(Args)]
struct DesignSweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "4")]
    length_mm: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    width_mm: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.5")]
    thickness_mm: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2.8")]
    eps_r: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100,354.3,1000")]
    mu_kpa: Vec<f64>,
    #[arg(long, default_value_t = 6.0)]
    f_max: f64,
    /// Flag nominal capacitance outside 1–10 pF instead of 0.5–20 pF.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    line: LineArgs,
}

#[derive(Args)]
struct BoxArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 160)]
    trials: usize,
    #[arg(long, default_value_t = 2.0)]
    item_force: f64,
    #[arg(long, default_value_t = 3)]
    max_items: usize,
    /// Switch off read noise, flips and multipath.
    #[arg(long)]
    noiseless: bool,
    /// Also write the confusion matrix as CSV.
    #[arg(long)]
    confusion_csv: Option<PathBuf>,
}

#[derive(Args)]
struct StepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Add a constant 1 N load (the knee model's weight) to every loaded step.
    #[arg(long)]
    preload: bool,
    #[arg(long)]
    noiseless: bool,
    /// Output file for the per-plateau CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Phase units in the export. raw4096 assumes 4096 counts per turn.
    #[arg(long, value_enum, default_value = "deg")]
    units: UnitsArg,
    /// Scenario whose channel plan maps channel indices to frequencies.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Deg,
    Raw4096,
}

fn parse_window(s: &str) -> std::result::Result<TimeWindow, String> {
    let (a, b) = s.split_once(',').ok_or("expected start,end")?;
    let start: f64 = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
    let end: f64 = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
    TimeWindow::new(start, end).map_err(|e| e.to_string())
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn trace_format(explicit: Option<FormatArg>, out: Option<&Path>) -> TraceFormat {
    match (explicit, out) {
        (Some(f), _) => f.into(),
        (None, Some(p)) => TraceFormat::from_path(p),
        (None, None) => TraceFormat::Jsonl,
    }
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let (mut config, seed) = args.scenario.load()?;
    if let Some(d) = args.duration {
        config.duration_s = d;
    }
    let format = trace_format(args.format, args.out.as_deref());
    let mut out = open_out(args.out.as_deref())?;
    let summary = cmd_simulate(&config, seed, format, &mut out)?;
    out.flush()?;
    eprintln!(
        "{} reads over {} s, {} channels covered (seed {})",
        summary.reads, summary.duration_s, summary.channels_covered, summary.seed
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let trace = read_trace(BufReader::new(File::open(&args.trace)?), TraceFormat::from_path(&args.trace))?;
    let calibration: CalibrationModel = serde_json::from_reader(BufReader::new(File::open(&args.calibration)?))?;
    let config = EstimatorConfig {
        aggregate: if args.median { Aggregate::Median } else { Aggregate::Mean },
        fold_half_turns: !args.no_fold,
        domain: if args.clamp {
            DomainPolicy::Clamp
        } else {
            DomainPolicy::default()
        },
        ..EstimatorConfig::default()
    };
    let est = cmd_estimate(&trace, &calibration, args.baseline, args.event, &args.epc, &config)?;
    eprintln!("{est}");
    write_json(&est, &mut io::stdout().lock())
}

fn calibrate(args: CalibrateArgs) -> Result<()> {
    let model = match &args.samples {
        Some(p) => cmd_calibrate(BufReader::new(File::open(p)?), args.degree)?,
        None => {
            let config = match &args.config {
                Some(p) => ScenarioConfig::load(p)?,
                None => ScenarioConfig::default(),
            };
            let sim = scenario_simulator(&config, true)?;
            if args.degree == 2 {
                default_calibration(&sim)?
            } else {
                tagforce::harness::forward_model_calibration(&sim.curve, &sim.line, &sim.plan, 25, args.degree)?
            }
        }
    };
    eprintln!(
        "degree {} fit, residual rms {:.4} N, domain [{:.3}, {:.3}] deg",
        model.degree(),
        model.residual_rms(),
        model.fit_domain().0,
        model.fit_domain().1
    );
    write_json(&model, &mut open_out(args.out.as_deref())?)
}

fn sweep(cmd: SweepCommand) -> Result<()> {
    match cmd {
        SweepCommand::Phase(a) => {
            let grid = match a.c0_pf {
                Some(g) => g,
                None => log_grid(a.from_pf, a.to_pf, a.points)?,
            };
            cmd_sweep_phase(&grid, a.ratio, &a.line.line()?, open_out(a.line.out.as_deref())?)
        }
        SweepCommand::Design(a) => {
            let mut geometries = Vec::new();
            for &l in &a.length_mm {
                for &w in &a.width_mm {
                    for &d in &a.thickness_mm {
                        geometries.push(SensorGeometry::new(l * 1e-3, w * 1e-3, d * 1e-3, 35e-6)?);
                    }
                }
            }
            let mut materials = Vec::new();
            for &e in &a.eps_r {
                for &mu in &a.mu_kpa {
                    materials.push(MaterialSpec::new(format!("eps{e}-mu{mu}kPa"), e, mu * 1e3)?);
                }
            }
            let band = if a.strict {
                CapacitanceBand::STRICT
            } else {
                CapacitanceBand::RELAXED
            };
            let ranked = sweep_designs(&geometries, &materials, a.f_max, &a.line.line()?, band)?;
            write_design_csv(&ranked, open_out(a.line.out.as_deref())?)
        }
        SweepCommand::Presets(a) => {
            let line = a.line()?;
            let rows = DesignPreset::all()
                .iter()
                .map(|p| p.calibrated(&line))
                .collect::<Result<Vec<_>>>()?;
            write_design_csv(&rows, open_out(a.out.as_deref())?)
        }
    }
}

#[derive(Serialize)]
struct BoxSummary<'a> {
    trials: usize,
    item_force_n: f64,
    accuracy: f64,
    confusion: &'a [Vec<usize>],
}

fn casestudy_box(args: BoxArgs) -> Result<()> {
    let (config, seed) = args.scenario.load()?;
    let sim = scenario_simulator(&config, args.noiseless)?;
    let cal = default_calibration(&sim)?;
    let study = BoxStudyConfig {
        item_force: args.item_force,
        max_items: args.max_items,
        trials: args.trials,
        seed,
    };
    let report = run_box_study(&sim, &cal, &TrialLayout::default(), &study, &trial_estimator_config())?;
    if let Some(p) = &args.confusion_csv {
        report.write_confusion_csv(BufWriter::new(File::create(p)?))?;
    }
    write_json(
        &BoxSummary {
            trials: report.trials,
            item_force_n: report.item_force,
            accuracy: report.accuracy,
            confusion: &report.confusion,
        },
        &mut io::stdout().lock(),
    )
}

fn casestudy_step(args: StepArgs) -> Result<()> {
    let (config, seed) = args.scenario.load()?;
    let sim = scenario_simulator(&config, args.noiseless)?;
    let cal = default_calibration(&sim)?;
    let study = StepStudyConfig::new(seed).with_preload(if args.preload { 1.0 } else { 0.0 });
    let report = run_step_study(&sim, &cal, &study, &trial_estimator_config())?;
    eprintln!("steps detected at {:?} s", report.step_times);
    report.write_csv(open_out(args.out.as_deref())?)
}

fn import(args: ImportArgs) -> Result<()> {
    let plan = match &args.config {
        Some(p) => ScenarioConfig::load(p)?.plan()?,
        None => ScenarioConfig::default().plan()?,
    };
    let units = match args.units {
        UnitsArg::Deg => PhaseUnits::Deg,
        UnitsArg::Raw4096 => PhaseUnits::Raw4096,
    };
    let records = import_reader_trace(BufReader::new(File::open(&args.input)?), units, &plan)?;
    let format = trace_format(args.format, args.out.as_deref());
    write_trace(&records, format, open_out(args.out.as_deref())?)?;
    eprintln!("imported {} reads", records.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Sweep(c) => sweep(c),
        Command::CasestudyBox(a) => casestudy_box(a),
        Command::CasestudyStep(a) => casestudy_step(a),
        Command::Import(a) => import(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
