use super::geometry::{BBox, Point};
use super::surrogate::Surrogate;
use crate::{Error, Result};

/// Optimum of one surrogate problem.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubproblemSolution {
    /// Maximizer of the surrogate objective over the box.
    pub position: Point,
    /// Surrogate objective at `position` (W). Every surrogate constraint
    /// `value + P_hat_n <= 0` holds there by construction.
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_STEPS: usize = 200;

/// Golden-section minimization of a convex function on `[lo, hi]`. The
/// endpoints are included in the final comparison so boundary optima are hit
/// exactly.
fn golden_min<F: FnMut(f64) -> f64>(lo: f64, hi: f64, mut f: F) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let tol = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..MAX_GOLDEN_STEPS {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximizes `g(p) = min_n (P_n - alpha_n (d_n(p) - d_n^anchor))` over the box.
///
/// `-g` is a pointwise maximum of convex quadratics, so
/// `phi(x) = min_y -g(x, y)` is convex as well; both the outer search over `x`
/// and the inner one over `y` are golden-section searches, each run to
/// interval width at the rounding level of the box coordinates.
pub fn solve_subproblem(bbox: &BBox, surrogate: &Surrogate) -> Result<SubproblemSolution> {
    bbox.validate()?;
    if surrogate.terms.is_empty() {
        return Err(Error::invalid("surrogate", "no terms"));
    }
    let neg_g = |x: f64, y: f64| -surrogate.value(Point::new(x, y));
    let inner = |x: f64| golden_min(bbox.y_min, bbox.y_max, |y| neg_g(x, y));
    let (x, _) = golden_min(bbox.x_min, bbox.x_max, |x| inner(x).1);
    let (y, _) = inner(x);
    let position = Point::new(x, y);
    let value = surrogate.value(position);
    if !value.is_finite() {
        return Err(Error::Domain { what: "surrogate optimum", value });
    }
    Ok(SubproblemSolution { position, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::positioning::{build_surrogate, generate_scenario, Scenario, D_FLOOR};
    use crate::rectifier::{HarvestModel, RectifierParams};
    use crate::waveforms::{builtin_waveform, WaveformKind};

    fn model() -> HarvestModel {
        HarvestModel::build(RectifierParams::default(), &builtin_waveform(WaveformKind::ContinuousWave, 4).unwrap())
            .unwrap()
    }

    #[test]
    fn golden_finds_parabola_and_boundary_minima() {
        let (x, _) = golden_min(-3.0, 5.0, |x| (x - 1.25) * (x - 1.25));
        assert!((x - 1.25).abs() < 1e-7);
        let (x, _) = golden_min(0.0, 1.0, |x| x);
        assert_eq!(x, 0.0);
        let (x, _) = golden_min(0.0, 1.0, |x| -x);
        assert_eq!(x, 1.0);
        assert_eq!(golden_min(2.0, 2.0, |x| x).0, 2.0);
    }

    #[test]
    fn single_receiver_optimum_is_receiver() {
        let s = Scenario::new(alloc::vec![Point::new(1.0, 2.0)], 0.01, model()).unwrap();
        let sur = build_surrogate(&s, Point::new(1.0, 2.0)).unwrap();
        let sol = solve_subproblem(&s.bbox(), &sur).unwrap();
        assert_eq!(sol.position, Point::new(1.0, 2.0));
    }

    #[test]
    fn single_receiver_in_larger_box() {
        let b = BBox { x_min: 0.0, x_max: 4.0, y_min: 0.0, y_max: 4.0 };
        let s = Scenario::with_box(alloc::vec![Point::new(3.0, 1.0)], 0.01, b, model()).unwrap();
        let sur = build_surrogate(&s, Point::new(0.5, 3.5)).unwrap();
        let sol = solve_subproblem(&b, &sur).unwrap();
        // every point within the pathloss floor of the receiver is optimal
        assert!(sol.position.distance(Point::new(3.0, 1.0)) <= D_FLOOR.sqrt() * (1.0 + 1e-9));
    }

    #[test]
    fn symmetric_pair_on_a_segment() {
        let s = Scenario::new(alloc::vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)], 0.01, model()).unwrap();
        let sur = build_surrogate(&s, Point::new(0.3, 0.0)).unwrap();
        let sol = solve_subproblem(&s.bbox(), &sur).unwrap();
        // Tangents taken off-centre are asymmetric; re-linearizing at the
        // result and solving again lands on the midpoint.
        let sur2 = build_surrogate(&s, Point::new(1.0, 0.0)).unwrap();
        let sol2 = solve_subproblem(&s.bbox(), &sur2).unwrap();
        assert!(sol.value <= sol2.value);
        assert!((sol2.position.x - 1.0).abs() < 1e-7);
        assert_eq!(sol2.position.y, 0.0);
    }

    /// Grid enumeration of the surrogate, re-gridded around the incumbent with a
    /// tenfold finer step until the step reaches `xi_min`.
    fn zoomed_grid_max(sur: &Surrogate, b: &BBox, mut xi: f64, xi_min: f64) -> (Point, f64) {
        let mut window = *b;
        let mut best = (Point::new(b.x_min, b.y_min), f64::NEG_INFINITY);
        loop {
            let nx = (window.width() / xi).floor() as usize + 1;
            let ny = (window.height() / xi).floor() as usize + 1;
            for i in 0..nx {
                for j in 0..ny {
                    let p = Point::new(window.x_min + i as f64 * xi, window.y_min + j as f64 * xi);
                    let v = sur.value(p);
                    if v > best.1 {
                        best = (p, v);
                    }
                }
            }
            if xi <= xi_min {
                return best;
            }
            window = BBox {
                x_min: (best.0.x - 2.0 * xi).max(b.x_min),
                x_max: (best.0.x + 2.0 * xi).min(b.x_max),
                y_min: (best.0.y - 2.0 * xi).max(b.y_min),
                y_max: (best.0.y + 2.0 * xi).min(b.y_max),
            };
            xi /= 10.0;
        }
    }

    #[test]
    fn matches_grid_enumeration_of_surrogate() {
        let s = generate_scenario(5, 5.0, 21, 0.01, model()).unwrap();
        let sur = build_surrogate(&s, s.near_receiver(0).unwrap()).unwrap();
        let b = s.bbox();
        let sol = solve_subproblem(&b, &sur).unwrap();

        let (_, coarse) = zoomed_grid_max(&sur, &b, 1e-2, 1e-2);
        assert!(sol.value >= coarse);

        let (_, fine) = zoomed_grid_max(&sur, &b, 1e-2, 1e-7);
        assert!((sol.value - fine).abs() <= 1e-6 * fine.abs(), "{} vs {}", sol.value, fine);
        assert!(sol.value >= fine - 1e-12 * fine.abs());
    }
}
