use alloc::vec::Vec;

use super::geometry::Point;
use super::scenario::Scenario;
use super::subproblem::solve_subproblem;
use super::surrogate::build_surrogate;
use crate::{Error, Result};

/// Iteration limits for [`sia_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiaOptions {
    /// Upper bound on surrogate solves, at least 1.
    pub max_iters: usize,
    /// Stop when the objective changes by at most `rel_tol` times its value;
    /// must lie in `(0, 1e-2]`.
    pub rel_tol: f64,
}

impl Default for SiaOptions {
    fn default() -> Self {
        Self { max_iters: 100, rel_tol: 1e-6 }
    }
}

/// Why the iteration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopReason {
    /// Relative objective change fell below the tolerance.
    ToleranceMet,
    /// `max_iters` surrogate solves were spent.
    MaxIters,
}

/// What happened in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StepStatus {
    /// The surrogate optimum was accepted.
    Solved,
    /// The anchor scored at least as well as the solver's point and was kept.
    AnchorRetained,
    /// Rounding pushed the surrogate value below the previous objective; the
    /// previous iterate was kept and the run stopped.
    Stalled,
}

/// One surrogate solve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SiaIteration {
    /// New iterate.
    pub position: Point,
    /// Surrogate objective at the iterate (W); a lower bound on
    /// `true_objective`.
    pub objective: f64,
    /// `min_n P_dc,n` at the iterate (W).
    pub true_objective: f64,
    /// Surrogate slopes `alpha_n` used in this iteration.
    pub slopes: Vec<f64>,
    /// Outcome of the subproblem.
    pub status: StepStatus,
    /// The pathloss floor was active at the anchor.
    pub pathloss_clamped: bool,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SiaTrace {
    /// Starting point.
    pub init: Point,
    /// `min_n P_dc,n` at the starting point (W).
    pub init_objective: f64,
    /// One entry per surrogate solve.
    pub iterations: Vec<SiaIteration>,
    /// The tolerance was met.
    pub converged: bool,
    /// Why the run ended.
    pub stop_reason: StopReason,
}

impl SiaTrace {
    /// Last iterate, or the start if no iteration ran.
    pub fn final_position(&self) -> Point {
        self.iterations.last().map_or(self.init, |it| it.position)
    }

    /// Last surrogate objective, or the initial objective.
    pub fn final_objective(&self) -> f64 {
        self.iterations.last().map_or(self.init_objective, |it| it.objective)
    }

    /// `min_n P_dc,n` at the final iterate.
    pub fn final_true_objective(&self) -> f64 {
        self.iterations.last().map_or(self.init_objective, |it| it.true_objective)
    }

    /// Objective sequence starting with the initial value.
    pub fn objectives(&self) -> Vec<f64> {
        core::iter::once(self.init_objective).chain(self.iterations.iter().map(|it| it.objective)).collect()
    }
}

/// Successive inner approximation from `init`.
///
/// Each iteration linearizes every `-P_dc,n` in its pathloss at the current
/// anchor and maximizes the resulting concave lower bound over the box. The
/// anchor itself is feasible for that problem with the true objective value,
/// so the recorded objective never decreases.
pub fn sia_solve(scenario: &Scenario, init: Point, options: SiaOptions) -> Result<SiaTrace> {
    if options.max_iters == 0 {
        return Err(Error::invalid("max_iters", "must be at least 1"));
    }
    if !(options.rel_tol > 0.0 && options.rel_tol <= 1e-2) {
        return Err(Error::invalid("rel_tol", alloc::format!("must lie in (0, 1e-2], got {}", options.rel_tol)));
    }
    if !scenario.bbox().contains(init) {
        return Err(Error::invalid("init", alloc::format!("({}, {}) is outside the box", init.x, init.y)));
    }

    let bbox = scenario.bbox();
    let init_objective = scenario.min_harvest(init)?;
    let mut anchor = init;
    let mut prev = init_objective;
    let mut iterations = Vec::new();
    let mut stop_reason = StopReason::MaxIters;
    let mut converged = false;

    for _ in 0..options.max_iters {
        let surrogate = build_surrogate(scenario, anchor)?;
        let solution = solve_subproblem(&bbox, &surrogate)?;
        let anchor_value = surrogate.value(anchor);
        let (mut position, mut objective, mut status) = if solution.value >= anchor_value {
            (solution.position, solution.value, StepStatus::Solved)
        } else {
            (anchor, anchor_value, StepStatus::AnchorRetained)
        };
        if objective < prev {
            position = anchor;
            objective = prev;
            status = StepStatus::Stalled;
        }
        iterations.push(SiaIteration {
            position,
            objective,
            true_objective: scenario.min_harvest(position)?,
            slopes: surrogate.slopes(),
            status,
            pathloss_clamped: surrogate.any_clamped(),
        });
        let done = status == StepStatus::Stalled
            || (objective - prev).abs() <= options.rel_tol * objective.max(f64::MIN_POSITIVE);
        if done {
            stop_reason = StopReason::ToleranceMet;
            converged = true;
            break;
        }
        prev = objective;
        anchor = position;
    }

    Ok(SiaTrace { init, init_objective, iterations, converged, stop_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::positioning::{generate_scenario, BBox};
    use crate::rectifier::{HarvestModel, RectifierParams};
    use crate::waveforms::{builtin_waveform, WaveformKind};

    fn model() -> HarvestModel {
        HarvestModel::build(RectifierParams::default(), &builtin_waveform(WaveformKind::ContinuousWave, 4).unwrap())
            .unwrap()
    }

    #[test]
    fn symmetric_optimum_is_a_fixed_point() {
        let s = Scenario::new(alloc::vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)], 0.01, model()).unwrap();
        let t = sia_solve(&s, Point::new(1.0, 0.0), SiaOptions::default()).unwrap();
        assert_eq!(t.iterations.len(), 1);
        assert!(t.converged);
        assert!((t.final_position().x - 1.0).abs() < 1e-7);
    }

    #[test]
    fn monotone_and_lower_bounding() {
        for seed in 0..4 {
            let s = generate_scenario(5, 5.0, seed, 0.01, model()).unwrap();
            let t = sia_solve(&s, s.near_receiver(0).unwrap(), SiaOptions::default()).unwrap();
            assert!(t.converged);
            let obj = t.objectives();
            assert!(obj.windows(2).all(|w| w[1] >= w[0]), "{obj:?}");
            for it in &t.iterations {
                assert!(it.true_objective >= it.objective - 1e-10);
                assert!(it.slopes.iter().all(|a| *a > 0.0));
            }
        }
    }

    #[test]
    fn max_iters_stop() {
        let s = generate_scenario(5, 5.0, 9, 0.01, model()).unwrap();
        let t = sia_solve(&s, s.near_receiver(1).unwrap(), SiaOptions { max_iters: 1, rel_tol: 1e-6 }).unwrap();
        assert_eq!(t.iterations.len(), 1);
        assert_eq!(t.stop_reason, StopReason::MaxIters);
        assert!(!t.converged);
    }

    #[test]
    fn option_and_init_validation() {
        let s = generate_scenario(3, 5.0, 9, 0.01, model()).unwrap();
        let c = s.centroid();
        assert!(sia_solve(&s, c, SiaOptions { max_iters: 0, rel_tol: 1e-6 }).is_err());
        assert!(sia_solve(&s, c, SiaOptions { max_iters: 5, rel_tol: 0.5 }).is_err());
        assert!(sia_solve(&s, c, SiaOptions { max_iters: 5, rel_tol: 0.0 }).is_err());
        assert!(sia_solve(&s, Point::new(-1.0, -1.0), SiaOptions::default()).is_err());
    }

    #[test]
    fn single_receiver_converges_onto_it() {
        let b = BBox { x_min: 0.0, x_max: 3.0, y_min: 0.0, y_max: 3.0 };
        let s = Scenario::with_box(alloc::vec![Point::new(2.0, 1.0)], 0.01, b, model()).unwrap();
        let t = sia_solve(&s, Point::new(0.0, 3.0), SiaOptions::default()).unwrap();
        let dist = t.final_position().distance(Point::new(2.0, 1.0));
        assert!(dist <= crate::positioning::D_FLOOR.sqrt() * (1.0 + 1e-9), "{dist}");
    }
}
