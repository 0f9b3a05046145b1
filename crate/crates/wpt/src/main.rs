use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wpt_core::positioning::{SiaOptions, StopReason, DEFAULT_CELL_LIMIT};

use wpt::error::{AppError, AppResult};
use wpt::run::{self, BruteConfig, CompareConfig, InitSpec, PositionConfig, SweepConfig};
use wpt::scenario_file::{self, anchor_error, DiodeSpec, ModelOverrides, ScenarioFile, WaveformSpec};

#[derive(Parser)]
#[command(name = "wpt", version, about = "Nonlinear energy-harvesting curves and max-min transmitter placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Output current and harvested power over a log-spaced power sweep (CSV).
    Curve(SweepArgs),
    /// Second differences of P_dc in 1/Q_rf plus the sufficient conditions (CSV).
    CheckConvexity(ConvexityArgs),
    /// Successive inner approximation from one start (JSON trace).
    Position(PositionArgs),
    /// Exhaustive grid search (JSON).
    Brute(BruteArgs),
    /// Centroid start, near-receiver start and grid search side by side (JSON).
    Compare(CompareArgs),
    /// Random receiver layout (scenario JSON).
    GenScenario(GenArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Scenario file. Required by position, brute and compare; curve,
    /// check-convexity and gen-scenario only take its diode and waveform.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Builtin waveform name (cw, gaussian) or order:factor pairs, e.g. 4:1.5,6:2.5.
    #[arg(long)]
    waveform: Option<String>,
    /// Saturation current (A).
    #[arg(long)]
    i_s: Option<f64>,
    /// Ideality factor.
    #[arg(long = "ideality")]
    n: Option<f64>,
    /// Thermal voltage (V).
    #[arg(long)]
    v_t: Option<f64>,
    /// Antenna resistance (ohm).
    #[arg(long)]
    r_ant: Option<f64>,
    /// Load resistance (ohm).
    #[arg(long)]
    r_load: Option<f64>,
    /// Even truncation order.
    #[arg(long)]
    trunc_order: Option<u32>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1e-6)]
    q_min: f64,
    #[arg(long, default_value_t = 1.0)]
    q_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvexityArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Also write the verdict and configuration as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SiaArgs {
    /// Relative objective change at which iteration stops.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
}

#[derive(Args)]
struct PositionArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sia: SiaArgs,
    /// centroid, near-receiver:<n> or <x>,<y>.
    #[arg(long, default_value = "centroid")]
    init: InitSpec,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Mesh spacing (m).
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    /// Allow grids above the default cell cap.
    #[arg(long)]
    grid_override: bool,
}

impl GridArgs {
    fn cell_limit(&self) -> Option<u64> {
        (!self.grid_override).then_some(DEFAULT_CELL_LIMIT)
    }
}

#[derive(Args)]
struct BruteArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sia: SiaArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Receiver the poor start is placed next to.
    #[arg(long, default_value_t = 0)]
    bad_receiver: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    receivers: usize,
    /// Side of the square the receivers are drawn from (m).
    #[arg(long, default_value_t = 5.0)]
    width: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Received power at unit pathloss (dBm).
    #[arg(long, default_value_t = 10.0)]
    q0_dbm: f64,
    /// Transmit power, recorded for reference only (dBm).
    #[arg(long)]
    tx_power_dbm: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_waveform(s: &str) -> AppResult<WaveformSpec> {
    if !s.contains(':') {
        return Ok(WaveformSpec::Named(s.to_string()));
    }
    let mut map = std::collections::BTreeMap::new();
    for part in s.split(',') {
        let (k, v) = part
            .split_once(':')
            .ok_or_else(|| AppError::invalid(format!("waveform entry {part:?} is not order:factor")))?;
        let order = k.trim().parse().map_err(|_| AppError::invalid(format!("bad waveform order {k:?}")))?;
        let value = v.trim().parse().map_err(|_| AppError::invalid(format!("bad waveform factor {v:?}")))?;
        map.insert(order, value);
    }
    Ok(WaveformSpec::Factors(map))
}

impl ModelArgs {
    fn overrides(&self) -> AppResult<ModelOverrides> {
        Ok(ModelOverrides {
            waveform: self.waveform.as_deref().map(parse_waveform).transpose()?,
            i_s: self.i_s,
            n: self.n,
            v_t: self.v_t,
            r_ant: self.r_ant,
            r_load: self.r_load,
            trunc_order: self.trunc_order,
        })
    }

    /// Diode and waveform from the optional scenario file, then overrides.
    fn resolve_model(&self) -> AppResult<(DiodeSpec, WaveformSpec)> {
        let (mut diode, mut waveform) = match &self.scenario {
            Some(path) => {
                let (file, _) = scenario_file::load_scenario(path)?;
                (file.diode, file.waveform)
            }
            None => (DiodeSpec::default(), WaveformSpec::default()),
        };
        self.overrides()?.apply(&mut diode, &mut waveform);
        Ok((diode, waveform))
    }

    /// Scenario file with overrides applied, and the built scenario.
    fn resolve_scenario(&self) -> AppResult<(ScenarioFile, wpt_core::positioning::Scenario)> {
        let path = self.scenario.as_deref().ok_or_else(|| AppError::invalid("this command needs --scenario <path>"))?;
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut file = scenario_file::parse_scenario(&text, path)?;
        file.build().map_err(|e| anchor_error(e, &text, path))?;
        self.overrides()?.apply(&mut file.diode, &mut file.waveform);
        let scenario = file.build()?;
        Ok((file, scenario))
    }
}

impl SiaArgs {
    fn options(&self) -> SiaOptions {
        SiaOptions { max_iters: self.max_iters, rel_tol: self.tol }
    }
}

impl SweepArgs {
    fn config(&self) -> AppResult<(SweepConfig, wpt_core::HarvestModel)> {
        let (diode, waveform) = self.model.resolve_model()?;
        let model = scenario_file::build_model(&diode, &waveform)?;
        let cfg = SweepConfig { diode, waveform, q_min_w: self.q_min, q_max_w: self.q_max, points: self.points };
        Ok((cfg, model))
    }
}

fn not_converged(trace: &wpt_core::positioning::SiaTrace) -> AppResult<()> {
    match trace.stop_reason {
        StopReason::ToleranceMet => Ok(()),
        StopReason::MaxIters => Err(AppError::NotConverged { iterations: trace.iterations.len() }),
    }
}

fn execute(command: Command) -> AppResult<()> {
    match command {
        Command::Curve(args) => {
            let (cfg, model) = args.config()?;
            run::write_csv(&run::curve(&model, &cfg)?, args.out.as_deref())
        }
        Command::CheckConvexity(args) => {
            let (cfg, model) = args.sweep.config()?;
            let (rows, summary) = run::check_convexity(&model, &cfg)?;
            run::write_csv(&rows, args.sweep.out.as_deref())?;
            if let Some(p) = &args.report {
                run::write_json(&summary, Some(p))?;
            }
            eprintln!("{}", serde_json::to_string(&summary.verdict)?);
            Ok(())
        }
        Command::Position(args) => {
            let (file, scenario) = args.model.resolve_scenario()?;
            let cfg = PositionConfig { scenario: file, init: args.init, sia: args.sia.options() };
            let report = run::position(&scenario, cfg)?;
            run::write_json(&report, args.out.as_deref())?;
            not_converged(&report.trace)
        }
        Command::Brute(args) => {
            let (file, scenario) = args.model.resolve_scenario()?;
            let cfg =
                BruteConfig { scenario: file, resolution_m: args.grid.resolution, cell_limit: args.grid.cell_limit() };
            run::write_json(&run::brute(&scenario, cfg)?, args.out.as_deref())
        }
        Command::Compare(args) => {
            let (file, scenario) = args.model.resolve_scenario()?;
            let cfg = CompareConfig {
                scenario: file,
                sia: args.sia.options(),
                good_init: InitSpec::Centroid,
                bad_init: InitSpec::NearReceiver(args.bad_receiver),
                resolution_m: args.grid.resolution,
                cell_limit: args.grid.cell_limit(),
            };
            let report = run::compare(&scenario, cfg)?;
            run::write_json(&report, args.out.as_deref())?;
            not_converged(&report.ini_good.trace)?;
            not_converged(&report.ini_bad.trace)
        }
        Command::GenScenario(args) => {
            let (diode, waveform) = args.model.resolve_model()?;
            let file = run::generate_scenario_file(
                args.receivers,
                args.width,
                args.seed,
                args.q0_dbm,
                diode,
                waveform,
                args.tx_power_dbm,
            )?;
            write_text(&file.to_json(), args.out.as_deref())
        }
    }
}

fn write_text(text: &str, out: Option<&Path>) -> AppResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| AppError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = AppError::invalid(e.render().to_string().trim_end()).record();
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("error record serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
