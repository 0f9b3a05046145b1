//! Command implementations and their report records.
//!
//! Every report embeds the resolved configuration it was produced from, so an
//! output file alone is enough to rerun it.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use wpt_core::calculus::{certify_convexity, log_space, ConvexityReport, ParamCurve, Verdict};
use wpt_core::positioning::{
    generate_receivers, sia_solve, GridResult, GridSpec, Point, Scenario, SiaOptions, SiaTrace,
};
use wpt_core::HarvestModel;

use crate::error::{AppError, AppResult};
use crate::scenario_file::{DiodeSpec, ScenarioFile, WaveformSpec};
use crate::search::par_exhaustive_search;

/// Starting point of an SIA run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Centroid,
    /// Just off receiver `n`, toward the centroid.
    NearReceiver(usize),
    At(f64, f64),
}

impl InitSpec {
    pub fn resolve(&self, scenario: &Scenario) -> wpt_core::Result<Point> {
        match *self {
            InitSpec::Centroid => Ok(scenario.centroid()),
            InitSpec::NearReceiver(n) => scenario.near_receiver(n),
            InitSpec::At(x, y) => Ok(Point::new(x, y)),
        }
    }
}

impl FromStr for InitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "centroid" {
            return Ok(InitSpec::Centroid);
        }
        if let Some(n) = s.strip_prefix("near-receiver:") {
            return n.parse().map(InitSpec::NearReceiver).map_err(|_| format!("bad receiver index in {s:?}"));
        }
        let (x, y) =
            s.split_once(',').ok_or_else(|| format!("expected centroid, near-receiver:<n> or <x>,<y>, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad coordinate {v:?} in {s:?}"));
        let (x, y) = (parse(x)?, parse(y)?);
        if !(x.is_finite() && y.is_finite()) {
            return Err(format!("coordinates must be finite, got {s:?}"));
        }
        Ok(InitSpec::At(x, y))
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Centroid => f.write_str("centroid"),
            InitSpec::NearReceiver(n) => write!(f, "near-receiver:{n}"),
            InitSpec::At(x, y) => write!(f, "{x},{y}"),
        }
    }
}

impl Serialize for InitSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Receiver-power sweep shared by `curve` and `check-convexity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub diode: DiodeSpec,
    pub waveform: WaveformSpec,
    pub q_min_w: f64,
    pub q_max_w: f64,
    pub points: usize,
}

impl SweepConfig {
    fn check(&self) -> AppResult<()> {
        let ok = |q: f64| q.is_finite() && q > 0.0;
        if !(ok(self.q_min_w) && ok(self.q_max_w) && self.q_min_w < self.q_max_w) {
            return Err(AppError::invalid(format!(
                "power range must satisfy 0 < q_min < q_max, got [{}, {}]",
                self.q_min_w, self.q_max_w
            )));
        }
        if self.points < 5 {
            return Err(AppError::invalid(format!("need at least 5 points, got {}", self.points)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub q_rf_w: f64,
    pub u_inv_w: f64,
    pub i_out_a: f64,
    pub p_dc_w: f64,
}

/// `I_out` and `P_dc` on a log-spaced power grid, increasing in `Q_rf`.
pub fn curve(model: &HarvestModel, sweep: &SweepConfig) -> AppResult<Vec<CurveRow>> {
    sweep.check()?;
    log_space(sweep.q_min_w, sweep.q_max_w, sweep.points)
        .into_iter()
        .map(|q| {
            let i = model.solve_iout(q)?;
            Ok(CurveRow { q_rf_w: q, u_inv_w: 1.0 / q, i_out_a: i, p_dc_w: i * i * model.params().r_load })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityRow {
    pub q_rf_w: f64,
    pub u_inv_w: f64,
    pub i_out_a: f64,
    pub p_dc_w: f64,
    pub second_diff: Option<f64>,
    pub cond9: f64,
    pub cond14: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexitySummary {
    pub config: SweepConfig,
    pub second_diff_min: f64,
    pub tolerance: f64,
    pub condition9_min: f64,
    pub condition14_min: f64,
    pub verdict: Verdict,
}

/// Convexity of `P_dc` in `u = 1/Q_rf` over the sweep. Rows are in
/// increasing `u`.
pub fn check_convexity(model: &HarvestModel, sweep: &SweepConfig) -> AppResult<(Vec<ConvexityRow>, ConvexitySummary)> {
    sweep.check()?;
    let grid = log_space(1.0 / sweep.q_max_w, 1.0 / sweep.q_min_w, sweep.points);
    let report: ConvexityReport = certify_convexity(model, ParamCurve::Reciprocal { a: 1.0 }, &grid)?;
    let rows = report
        .points
        .iter()
        .map(|p| ConvexityRow {
            q_rf_w: p.q_rf,
            u_inv_w: p.u,
            i_out_a: p.i_out,
            p_dc_w: p.p_dc,
            second_diff: p.second_diff,
            cond9: p.cond9,
            cond14: p.cond14,
        })
        .collect();
    let summary = ConvexitySummary {
        config: sweep.clone(),
        second_diff_min: report.second_diff_min,
        tolerance: report.tolerance,
        condition9_min: report.condition9_min,
        condition14_min: report.condition14_min,
        verdict: report.verdict,
    };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionConfig {
    pub scenario: ScenarioFile,
    pub init: InitSpec,
    pub sia: SiaOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionReport {
    pub config: PositionConfig,
    pub init_point: Point,
    pub final_position: Point,
    pub final_objective_w: f64,
    pub final_true_objective_w: f64,
    pub trace: SiaTrace,
}

pub fn position(scenario: &Scenario, config: PositionConfig) -> wpt_core::Result<PositionReport> {
    let init_point = config.init.resolve(scenario)?;
    let trace = sia_solve(scenario, init_point, config.sia)?;
    Ok(PositionReport {
        init_point,
        final_position: trace.final_position(),
        final_objective_w: trace.final_objective(),
        final_true_objective_w: trace.final_true_objective(),
        trace,
        config,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteConfig {
    pub scenario: ScenarioFile,
    pub resolution_m: f64,
    /// `None` when the cap was overridden.
    pub cell_limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteReport {
    pub config: BruteConfig,
    pub nx: usize,
    pub ny: usize,
    pub result: GridResult,
}

pub fn brute(scenario: &Scenario, config: BruteConfig) -> wpt_core::Result<BruteReport> {
    let spec = GridSpec::new(scenario.bbox(), config.resolution_m)?;
    let result = par_exhaustive_search(scenario, config.resolution_m, config.cell_limit)?;
    Ok(BruteReport { nx: spec.nx(), ny: spec.ny(), result, config })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareConfig {
    pub scenario: ScenarioFile,
    pub sia: SiaOptions,
    pub good_init: InitSpec,
    pub bad_init: InitSpec,
    pub resolution_m: f64,
    pub cell_limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitRun {
    pub init: InitSpec,
    pub init_point: Point,
    pub iterations: usize,
    pub final_position: Point,
    pub final_objective_w: f64,
    pub objectives_w: Vec<f64>,
    pub trace: SiaTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub config: CompareConfig,
    pub ini_good: InitRun,
    pub ini_bad: InitRun,
    pub brute: GridResult,
    /// Distance between the two SIA end points (m).
    pub final_distance_m: f64,
    /// `|P_good - P_bad| / max(P_good, P_bad)` at the end points.
    pub objective_rel_diff: f64,
    /// `(P_grid - P_sia) / P_grid` using the better SIA end point.
    pub sia_vs_grid_rel_gap: f64,
}

fn init_run(scenario: &Scenario, init: InitSpec, options: SiaOptions) -> wpt_core::Result<InitRun> {
    let init_point = init.resolve(scenario)?;
    let trace = sia_solve(scenario, init_point, options)?;
    Ok(InitRun {
        init,
        init_point,
        iterations: trace.iterations.len(),
        final_position: trace.final_position(),
        final_objective_w: trace.final_true_objective(),
        objectives_w: trace.objectives(),
        trace,
    })
}

/// SIA from a well-placed and a poorly placed start, plus the grid reference.
pub fn compare(scenario: &Scenario, config: CompareConfig) -> wpt_core::Result<CompareReport> {
    let ini_good = init_run(scenario, config.good_init, config.sia)?;
    let ini_bad = init_run(scenario, config.bad_init, config.sia)?;
    let brute = par_exhaustive_search(scenario, config.resolution_m, config.cell_limit)?;
    let (g, b) = (ini_good.final_objective_w, ini_bad.final_objective_w);
    let best = g.max(b);
    Ok(CompareReport {
        final_distance_m: ini_good.final_position.distance(ini_bad.final_position),
        objective_rel_diff: (g - b).abs() / best,
        sia_vs_grid_rel_gap: (brute.best_value - best) / brute.best_value,
        ini_good,
        ini_bad,
        brute,
        config,
    })
}

/// Scenario file with `count` receivers drawn uniformly from `[0, width]^2`.
pub fn generate_scenario_file(
    count: usize,
    width: f64,
    seed: u64,
    q0_dbm: f64,
    diode: DiodeSpec,
    waveform: WaveformSpec,
    tx_power_dbm: Option<f64>,
) -> AppResult<ScenarioFile> {
    let receivers = generate_receivers(count, width, seed)?.into_iter().map(|p| [p.x, p.y]).collect();
    let file = ScenarioFile { receivers, q0_dbm, bbox: None, diode, waveform, tx_power_dbm };
    file.build()?;
    Ok(file)
}

fn sink(out: Option<&Path>) -> AppResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| AppError::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes rows with a header line; stdout when `out` is `None`.
pub fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| AppError::io(out.unwrap_or(Path::new("<stdout>")), e))?;
    Ok(())
}

/// Pretty JSON plus newline; stdout when `out` is `None`.
pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| AppError::io(out.unwrap_or(Path::new("<stdout>")), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_spec_parsing() {
        assert_eq!("centroid".parse::<InitSpec>().unwrap(), InitSpec::Centroid);
        assert_eq!("near-receiver:3".parse::<InitSpec>().unwrap(), InitSpec::NearReceiver(3));
        assert_eq!("1.5, -2".parse::<InitSpec>().unwrap(), InitSpec::At(1.5, -2.0));
        for bad in ["", "near-receiver:x", "1", "a,b", "nan,1"] {
            assert!(bad.parse::<InitSpec>().is_err(), "{bad}");
        }
        for s in ["centroid", "near-receiver:0", "1.5,2"] {
            assert_eq!(s.parse::<InitSpec>().unwrap().to_string(), s);
        }
    }

    fn sweep(points: usize) -> SweepConfig {
        SweepConfig {
            diode: DiodeSpec::default(),
            waveform: WaveformSpec::Named("gaussian".into()),
            q_min_w: 1e-6,
            q_max_w: 1.0,
            points,
        }
    }

    #[test]
    fn curve_is_monotone() {
        let s = sweep(200);
        let m = crate::scenario_file::build_model(&s.diode, &s.waveform).unwrap();
        let rows = curve(&m, &s).unwrap();
        assert_eq!(rows.len(), 200);
        assert!(rows.windows(2).all(|w| w[1].p_dc_w > w[0].p_dc_w));
        assert_eq!(rows[0].q_rf_w, 1e-6);
        assert_eq!(rows[199].q_rf_w, 1.0);
    }

    #[test]
    fn sweep_validation() {
        let m = crate::scenario_file::build_model(&DiodeSpec::default(), &WaveformSpec::default()).unwrap();
        let mut s = sweep(3);
        assert!(curve(&m, &s).is_err());
        s.points = 10;
        s.q_min_w = 2.0;
        assert!(check_convexity(&m, &s).is_err());
    }

    #[test]
    fn convexity_rows_have_open_ends() {
        let s = sweep(50);
        let m = crate::scenario_file::build_model(&s.diode, &s.waveform).unwrap();
        let (rows, summary) = check_convexity(&m, &s).unwrap();
        assert!(rows[0].second_diff.is_none() && rows[49].second_diff.is_none());
        assert!(rows[1..49].iter().all(|r| r.second_diff.is_some()));
        assert!(summary.verdict.p_dc_convex);
    }
}
