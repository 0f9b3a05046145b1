use core::ops::Range;

use super::geometry::{BBox, Point};
use super::scenario::Scenario;
use crate::math;
use crate::{Error, Result};

/// Default cap on grid cells; larger grids need an explicit override.
pub const DEFAULT_CELL_LIMIT: u64 = 1 << 22;

/// Mesh of spacing `resolution` anchored at the lower-left box corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    bbox: BBox,
    resolution: f64,
    nx: usize,
    ny: usize,
}

fn axis_count(extent: f64, resolution: f64) -> Result<usize> {
    let steps = math::floor(extent / resolution + 1e-9);
    if steps >= 1e12 {
        return Err(Error::GridTooLarge { cells: u64::MAX, limit: DEFAULT_CELL_LIMIT });
    }
    Ok(steps as usize + 1)
}

impl GridSpec {
    /// Grid over `bbox`; points are `x_min + i * resolution` up to `x_max`
    /// (likewise for `y`).
    pub fn new(bbox: BBox, resolution: f64) -> Result<Self> {
        bbox.validate()?;
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid("resolution", alloc::format!("must be positive, got {resolution}")));
        }
        let nx = axis_count(bbox.width(), resolution)?;
        let ny = axis_count(bbox.height(), resolution)?;
        Ok(Self { bbox, resolution, nx, ny })
    }

    /// Number of points along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of rows (points along y).
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Mesh spacing (m).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Total number of grid points.
    pub fn cells(&self) -> u64 {
        self.nx as u64 * self.ny as u64
    }

    /// Refuses grids above `limit` cells; `None` disables the cap.
    pub fn check_limit(&self, limit: Option<u64>) -> Result<()> {
        match limit {
            Some(limit) if self.cells() > limit => Err(Error::GridTooLarge { cells: self.cells(), limit }),
            _ => Ok(()),
        }
    }

    /// Grid point in column `ix` of row `iy`.
    pub fn point(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.bbox.x_min + ix as f64 * self.resolution, self.bbox.y_min + iy as f64 * self.resolution)
    }
}

/// Best grid point found in some set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCandidate {
    /// Row-major index `iy * nx + ix`.
    pub index: u64,
    /// Grid point.
    pub position: Point,
    /// `min_n P_dc,n` there (W).
    pub value: f64,
}

impl GridCandidate {
    /// Higher value wins; equal values go to the lower row-major index, so
    /// any reduction order gives the same result.
    pub fn better(self, other: Self) -> Self {
        if other.value > self.value || (other.value == self.value && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Outcome of [`exhaustive_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridResult {
    /// Maximizing grid point (first in row-major order among ties).
    pub best_position: Point,
    /// `max_grid min_n P_dc,n` (W).
    pub best_value: f64,
    /// Mesh spacing (m).
    pub resolution: f64,
    /// Largest `|P(best) - P(neighbor)| / P(best)` over the 4-neighbors.
    pub neighbor_rel_diff: f64,
    /// Smallest such difference.
    pub neighbor_rel_diff_min: f64,
    /// Number of points evaluated.
    pub cells: u64,
}

/// Scans the given rows and returns their best point.
pub fn scan_rows(scenario: &Scenario, spec: &GridSpec, rows: Range<usize>) -> Result<Option<GridCandidate>> {
    let mut best: Option<GridCandidate> = None;
    for iy in rows.start..rows.end.min(spec.ny) {
        for ix in 0..spec.nx {
            let position = spec.point(ix, iy);
            let value = scenario.min_harvest(position)?;
            let cand = GridCandidate { index: (iy * spec.nx + ix) as u64, position, value };
            best = Some(match best {
                Some(b) => b.better(cand),
                None => cand,
            });
        }
    }
    Ok(best)
}

/// Completes a scan: evaluates the 4-neighbors of the winner.
pub fn finish_grid(scenario: &Scenario, spec: &GridSpec, best: GridCandidate) -> Result<GridResult> {
    let ix = (best.index % spec.nx as u64) as usize;
    let iy = (best.index / spec.nx as u64) as usize;
    let mut neighbors = alloc::vec::Vec::with_capacity(4);
    if ix > 0 {
        neighbors.push((ix - 1, iy));
    }
    if ix + 1 < spec.nx {
        neighbors.push((ix + 1, iy));
    }
    if iy > 0 {
        neighbors.push((ix, iy - 1));
    }
    if iy + 1 < spec.ny {
        neighbors.push((ix, iy + 1));
    }
    let (mut max_diff, mut min_diff) = (0.0_f64, f64::INFINITY);
    for (jx, jy) in neighbors {
        let v = scenario.min_harvest(spec.point(jx, jy))?;
        let rel = (best.value - v).abs() / best.value;
        max_diff = max_diff.max(rel);
        min_diff = min_diff.min(rel);
    }
    if min_diff.is_infinite() {
        min_diff = 0.0;
    }
    Ok(GridResult {
        best_position: best.position,
        best_value: best.value,
        resolution: spec.resolution,
        neighbor_rel_diff: max_diff,
        neighbor_rel_diff_min: min_diff,
        cells: spec.cells(),
    })
}

/// Evaluates `min_n P_dc,n` at every point of a mesh over the scenario box and
/// returns the best one.
///
/// `cell_limit` caps the mesh size (see [`DEFAULT_CELL_LIMIT`]); `None`
/// removes the cap.
pub fn exhaustive_search(scenario: &Scenario, resolution: f64, cell_limit: Option<u64>) -> Result<GridResult> {
    let spec = GridSpec::new(scenario.bbox(), resolution)?;
    spec.check_limit(cell_limit)?;
    let best = scan_rows(scenario, &spec, 0..spec.ny())?.expect("grid has at least one point");
    finish_grid(scenario, &spec, best)
}
