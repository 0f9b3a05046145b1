//! Multi-threaded exhaustive grid search.

use rayon::prelude::*;
use wpt_core::positioning::{finish_grid, scan_rows, GridCandidate, GridResult, GridSpec, Scenario};

/// Rows handed to one task.
const ROWS_PER_TASK: usize = 8;

fn merge(a: Option<GridCandidate>, b: Option<GridCandidate>) -> Option<GridCandidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.better(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Same result as [`wpt_core::positioning::exhaustive_search`], with row
/// blocks evaluated on the rayon pool. Ties resolve to the lowest row-major
/// index regardless of scheduling.
pub fn par_exhaustive_search(
    scenario: &Scenario,
    resolution: f64,
    cell_limit: Option<u64>,
) -> wpt_core::Result<GridResult> {
    let spec = GridSpec::new(scenario.bbox(), resolution)?;
    spec.check_limit(cell_limit)?;
    let ny = spec.ny();
    let best = (0..ny.div_ceil(ROWS_PER_TASK))
        .into_par_iter()
        .map(|block| {
            let start = block * ROWS_PER_TASK;
            scan_rows(scenario, &spec, start..(start + ROWS_PER_TASK).min(ny))
        })
        .try_reduce(|| None, |a, b| Ok(merge(a, b)))?
        .expect("grid has at least one point");
    finish_grid(scenario, &spec, best)
}
