//! Analytic derivatives of the harvest map and numerical convexity
//! certificates.
//!
//! Differentiating `exp(a I)(I + I_s) = rho` gives
//! `dI/drho = 1 / (a rho + exp(a I))`. Since `exp(a I) = rho / (I + I_s)` at the
//! solution, the denominator is evaluated as `rho (a + 1/(I + I_s))`, which
//! never overflows.
//!
//! For a power map `Q(u)` the output current and `P_dc` are convex in `u`
//! whenever `rho'' - rho'^2 / rho >= 0` along the curve (condition 9), and that
//! in turn holds whenever `Q'' Q - Q'^2 >= 0` (condition 14). Both are
//! sufficient conditions only; a failed condition is never reported as
//! nonconvexity.

use alloc::vec::Vec;

use crate::math;
use crate::rectifier::HarvestModel;
use crate::{Error, Result};

/// Step for first derivatives of custom curves, relative to `u`.
pub const FIRST_DIFF_STEP: f64 = 1e-6;
/// Step for second derivatives of custom curves, relative to `u`.
pub const SECOND_DIFF_STEP: f64 = 1e-4;
/// Relative slack on the measured second differences.
pub const SECOND_DIFF_REL_TOL: f64 = 1e-12;
/// Relative slack on conditions 9 and 14, against the magnitude of their terms.
pub const CONDITION_REL_TOL: f64 = 1e-12;

/// `dI_out / drho` at received power `q_rf`; strictly positive.
pub fn diout_drho(model: &HarvestModel, q_rf: f64) -> Result<f64> {
    let i = model.solve_iout(q_rf)?;
    let rho = model.rho(q_rf)?;
    Ok(diout_drho_at(model, rho, i))
}

fn diout_drho_at(model: &HarvestModel, rho: f64, i_out: f64) -> f64 {
    let p = model.params();
    1.0 / (rho * (p.load_exponent() + 1.0 / (i_out + p.i_s)))
}

/// `dP_dc / dQ_rf` (dimensionless).
pub fn dpdc_dq(model: &HarvestModel, q_rf: f64) -> Result<f64> {
    let i = model.solve_iout(q_rf)?;
    let (rho, drho, _) = model.rho_with_derivatives(q_rf)?;
    Ok(2.0 * model.params().r_load * i * diout_drho_at(model, rho, i) * drho)
}

/// `dP_dc / dd` for `Q_rf = q0 / d`, where `d` is the pathloss.
///
/// Negative whenever `q0 > 0`. Its negation is the slope of the tangent
/// majorant used by the placement optimizer.
pub fn dpdc_dd(model: &HarvestModel, q0: f64, d: f64) -> Result<f64> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain { what: "pathloss", value: d });
    }
    if !(q0.is_finite() && q0 > 0.0) {
        return Err(Error::Domain { what: "unit-distance power", value: q0 });
    }
    Ok(dpdc_dq(model, q0 / d)? * (-q0 / (d * d)))
}

/// Parameterization `u -> Q_rf(u)` of the received power.
#[derive(Clone, Copy)]
pub enum ParamCurve<'a> {
    /// `Q_rf = a / u` on `u > 0`; with `a = 1`, `u` is the reciprocal power.
    Reciprocal {
        /// Scale, `a > 0`.
        a: f64,
    },
    /// Arbitrary map; derivatives are taken by central differences.
    Custom(&'a dyn Fn(f64) -> f64),
}

impl core::fmt::Debug for ParamCurve<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParamCurve::Reciprocal { a } => f.debug_struct("Reciprocal").field("a", a).finish(),
            ParamCurve::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ParamCurve<'_> {
    fn validate(&self) -> Result<()> {
        match *self {
            ParamCurve::Reciprocal { a } if !(a.is_finite() && a > 0.0) => {
                Err(Error::invalid("a", alloc::format!("reciprocal scale must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// `Q_rf(u)`.
    pub fn q_rf(&self, u: f64) -> f64 {
        match self {
            ParamCurve::Reciprocal { a } => a / u,
            ParamCurve::Custom(f) => f(u),
        }
    }

    /// `(Q, dQ/du, d^2Q/du^2)`.
    pub fn derivatives(&self, u: f64) -> (f64, f64, f64) {
        match self {
            ParamCurve::Reciprocal { a } => (a / u, -a / (u * u), 2.0 * a / (u * u * u)),
            ParamCurve::Custom(f) => {
                let q = f(u);
                let h1 = u * FIRST_DIFF_STEP;
                let h2 = u * SECOND_DIFF_STEP;
                let d1 = (f(u + h1) - f(u - h1)) / (2.0 * h1);
                let d2 = (f(u + h2) - 2.0 * q + f(u - h2)) / (h2 * h2);
                (q, d1, d2)
            }
        }
    }
}

/// Outcome of a convexity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Certificate {
    /// No second-difference violation and a sufficient condition holds on the
    /// whole grid.
    CertifiedConvex,
    /// No violation was measured, but neither sufficient condition holds. This
    /// says nothing about convexity.
    ConditionFailed,
    /// A measured second difference of `P_dc` is below the tolerance.
    SecondDifferenceViolation,
}

/// Per-check flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Verdict {
    /// Second differences of `P_dc` are all within tolerance.
    pub p_dc_convex: bool,
    /// Second differences of `I_out` are all within tolerance.
    pub i_out_convex: bool,
    /// Condition 9 holds at every grid point.
    pub condition9: bool,
    /// Condition 14 holds at every grid point.
    pub condition14: bool,
    /// Summary.
    pub certificate: Certificate,
}

/// One probed parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvexityPoint {
    /// Curve parameter.
    pub u: f64,
    /// `Q_rf(u)` (W).
    pub q_rf: f64,
    /// Output current (A).
    pub i_out: f64,
    /// Harvested power (W).
    pub p_dc: f64,
    /// Scaled chord gap of `P_dc` at this point; `None` at the grid ends.
    pub second_diff: Option<f64>,
    /// Same for `I_out`.
    pub second_diff_iout: Option<f64>,
    /// `rho'' - rho'^2 / rho` along the curve.
    pub cond9: f64,
    /// `Q'' Q - Q'^2`.
    pub cond14: f64,
}

/// Result of [`certify_convexity`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvexityReport {
    /// Probed points in increasing `u`.
    pub points: Vec<ConvexityPoint>,
    /// Smallest second difference of `P_dc`.
    pub second_diff_min: f64,
    /// Smallest second difference of `I_out`.
    pub second_diff_iout_min: f64,
    /// Smallest value of condition 9.
    pub condition9_min: f64,
    /// Smallest value of condition 14.
    pub condition14_min: f64,
    /// Absolute slack applied to the `P_dc` second differences (W).
    pub tolerance: f64,
    /// Flags and summary.
    pub verdict: Verdict,
}

/// Scaled chord gap `2 (w f[i-1] + (1-w) f[i+1] - f[i])`, which reduces to
/// the central second difference on a uniform grid and is nonnegative for
/// convex `f` on any increasing grid.
fn chord_gap(u: &[f64], f: &[f64], i: usize) -> f64 {
    let w = (u[i + 1] - u[i]) / (u[i + 1] - u[i - 1]);
    2.0 * (w * f[i - 1] + (1.0 - w) * f[i + 1] - f[i])
}

/// Evaluates `I_out` and `P_dc` along `curve` at the grid points, measures
/// second differences and checks conditions 9 and 14.
///
/// The grid must have at least 5 strictly increasing positive entries.
pub fn certify_convexity(model: &HarvestModel, curve: ParamCurve<'_>, grid: &[f64]) -> Result<ConvexityReport> {
    curve.validate()?;
    if grid.len() < 5 {
        return Err(Error::invalid("grid", alloc::format!("needs at least 5 points, got {}", grid.len())));
    }
    if grid.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
        return Err(Error::invalid("grid", "all points must be finite and positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "points must be strictly increasing"));
    }

    let mut points = Vec::with_capacity(grid.len());
    let mut cond9_ok = true;
    let mut cond14_ok = true;
    for &u in grid {
        let (q, dq, d2q) = curve.derivatives(u);
        let i_out = model.solve_iout(q)?;
        let p_dc = i_out * i_out * model.params().r_load;
        let (rho, drho_dq, d2rho_dq2) = model.rho_with_derivatives(q)?;
        let drho = drho_dq * dq;
        let d2rho = d2rho_dq2 * dq * dq + drho_dq * d2q;
        let cond9 = d2rho - drho * drho / rho;
        let scale9 = d2rho_dq2 * dq * dq + (drho_dq * d2q).abs() + drho * drho / rho;
        cond9_ok &= cond9 >= -CONDITION_REL_TOL * scale9;
        let cond14 = d2q * q - dq * dq;
        cond14_ok &= cond14 >= -CONDITION_REL_TOL * ((d2q * q).abs() + dq * dq);
        points.push(ConvexityPoint {
            u,
            q_rf: q,
            i_out,
            p_dc,
            second_diff: None,
            second_diff_iout: None,
            cond9,
            cond14,
        });
    }

    let p: Vec<f64> = points.iter().map(|pt| pt.p_dc).collect();
    let iv: Vec<f64> = points.iter().map(|pt| pt.i_out).collect();
    let interior = grid.len() - 2;
    for (i, pt) in points.iter_mut().enumerate().skip(1).take(interior) {
        pt.second_diff = Some(chord_gap(grid, &p, i));
        pt.second_diff_iout = Some(chord_gap(grid, &iv, i));
    }

    let min_of = |f: fn(&ConvexityPoint) -> Option<f64>| points.iter().filter_map(f).fold(f64::INFINITY, f64::min);
    let second_diff_min = min_of(|pt| pt.second_diff);
    let second_diff_iout_min = min_of(|pt| pt.second_diff_iout);
    let condition9_min = min_of(|pt| Some(pt.cond9));
    let condition14_min = min_of(|pt| Some(pt.cond14));

    let tolerance = SECOND_DIFF_REL_TOL * p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol_i = SECOND_DIFF_REL_TOL * iv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let p_dc_convex = second_diff_min >= -tolerance;
    let i_out_convex = second_diff_iout_min >= -tol_i;
    let certificate = if !p_dc_convex {
        Certificate::SecondDifferenceViolation
    } else if cond9_ok || cond14_ok {
        Certificate::CertifiedConvex
    } else {
        Certificate::ConditionFailed
    };

    Ok(ConvexityReport {
        points,
        second_diff_min,
        second_diff_iout_min,
        condition9_min,
        condition14_min,
        tolerance,
        verdict: Verdict { p_dc_convex, i_out_convex, condition9: cond9_ok, condition14: cond14_ok, certificate },
    })
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (math::ln(lo), math::ln(hi));
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|k| match k {
                    0 => lo,
                    k if k == n - 1 => hi,
                    k => math::exp(a + step * k as f64),
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rectifier::RectifierParams;
    use crate::waveforms::{builtin_waveform, WaveformKind};

    fn model(kind: WaveformKind) -> HarvestModel {
        HarvestModel::build(RectifierParams::default(), &builtin_waveform(kind, 4).unwrap()).unwrap()
    }

    #[test]
    fn diout_drho_at_zero_power() {
        let m = model(WaveformKind::ContinuousWave);
        let p = m.params();
        let expected = 1.0 / (p.load_exponent() * p.i_s + 1.0);
        assert!((diout_drho(&m, 0.0).unwrap() - expected).abs() < 1e-15 * expected);
    }

    #[test]
    fn diout_drho_matches_finite_difference() {
        let m = model(WaveformKind::ContinuousWave);
        let q = 0.01;
        let rho = m.rho(q).unwrap();
        let h = rho * 1e-6;
        let fd = (m.iout_at_rho(rho + h).unwrap() - m.iout_at_rho(rho - h).unwrap()) / (2.0 * h);
        let an = diout_drho(&m, q).unwrap();
        assert!(an > 0.0);
        assert!((an - fd).abs() <= 1e-6 * an, "{an} vs {fd}");
    }

    #[test]
    fn dpdc_dd_sign_and_finite_difference() {
        let m = model(WaveformKind::RealGaussian);
        let (q0, d) = (0.01, 4.0);
        let an = dpdc_dd(&m, q0, d).unwrap();
        assert!(an < 0.0);
        let h = d * 1e-5;
        let fd = (m.p_dc(q0 / (d + h)).unwrap() - m.p_dc(q0 / (d - h)).unwrap()) / (2.0 * h);
        assert!((an - fd).abs() <= 1e-6 * an.abs(), "{an} vs {fd}");
    }

    #[test]
    fn dpdc_dd_scaling_between_equal_power_points() {
        // Same Q at (q0, d) and (q0/2, d/2): the chain factor -q0/d^2 doubles.
        let m = model(WaveformKind::ContinuousWave);
        let full = dpdc_dd(&m, 0.01, 4.0).unwrap();
        let half = dpdc_dd(&m, 0.005, 2.0).unwrap();
        assert!((half - 2.0 * full).abs() <= 1e-13 * half.abs());
    }

    #[test]
    fn dpdc_dd_rejects_bad_arguments() {
        let m = model(WaveformKind::ContinuousWave);
        assert!(dpdc_dd(&m, 0.01, 0.0).is_err());
        assert!(dpdc_dd(&m, 0.01, -1.0).is_err());
        assert!(dpdc_dd(&m, 0.0, 1.0).is_err());
    }

    #[test]
    fn reciprocal_curve_is_certified() {
        for kind in [WaveformKind::ContinuousWave, WaveformKind::RealGaussian] {
            let m = model(kind);
            let grid = log_space(1.0, 1e6, 200);
            let r = certify_convexity(&m, ParamCurve::Reciprocal { a: 1.0 }, &grid).unwrap();
            assert!(r.condition14_min > 0.0);
            assert!(r.verdict.condition9 && r.verdict.condition14);
            assert!(r.verdict.p_dc_convex && r.verdict.i_out_convex);
            assert_eq!(r.verdict.certificate, Certificate::CertifiedConvex);
            for pt in &r.points {
                // Q'' Q - Q'^2 = a^2 / u^4
                let exact = 1.0 / pt.u.powi(4);
                assert!((pt.cond14 - exact).abs() <= 1e-12 * exact);
            }
        }
    }

    #[test]
    fn linear_curve_fails_sufficient_condition_without_claiming_nonconvexity() {
        let m = model(WaveformKind::ContinuousWave);
        let a = 0.02;
        let lin = move |u: f64| a * u;
        // P_dc is convex in Q only at low power (below about 1.5e-4 W here)
        let grid = log_space(1e-4, 5e-3, 50);
        let r = certify_convexity(&m, ParamCurve::Custom(&lin), &grid).unwrap();
        assert!(!r.verdict.condition14);
        assert!((r.condition14_min + a * a).abs() < 1e-6 * a * a);
        assert_ne!(r.verdict.certificate, Certificate::CertifiedConvex);
        assert_eq!(r.verdict.certificate, Certificate::ConditionFailed);
    }

    #[test]
    fn concave_map_is_flagged_as_violation() {
        // Q = sqrt(u) makes P_dc ~ u at low power; at high power P_dc grows
        // slower than linearly, so its second difference goes negative.
        let m = model(WaveformKind::ContinuousWave);
        let root = |u: f64| u.sqrt();
        let grid = log_space(1e-2, 1e2, 60);
        let r = certify_convexity(&m, ParamCurve::Custom(&root), &grid).unwrap();
        assert_eq!(r.verdict.certificate, Certificate::SecondDifferenceViolation);
    }

    #[test]
    fn condition9_certificate_bounds_measured_curvature() {
        let m = model(WaveformKind::RealGaussian);
        let grid = log_space(0.5, 5e5, 120);
        let r = certify_convexity(&m, ParamCurve::Reciprocal { a: 1.0 }, &grid).unwrap();
        let tol = 1e-12 * r.points.iter().map(|p| p.i_out).fold(0.0, f64::max);
        for pt in &r.points {
            if let (true, Some(sd)) = (pt.cond9 >= 0.0, pt.second_diff_iout) {
                assert!(sd >= -tol);
            }
        }
    }

    #[test]
    fn grid_validation() {
        let m = model(WaveformKind::ContinuousWave);
        let c = ParamCurve::Reciprocal { a: 1.0 };
        assert!(certify_convexity(&m, c, &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(certify_convexity(&m, c, &[1.0, 2.0, 2.0, 4.0, 5.0]).is_err());
        assert!(certify_convexity(&m, c, &[0.0, 2.0, 3.0, 4.0, 5.0]).is_err());
        assert!(certify_convexity(&m, ParamCurve::Reciprocal { a: -1.0 }, &[1.0, 2.0, 3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn chord_gap_is_central_difference_on_uniform_grid() {
        let u = [1.0, 2.0, 3.0];
        let f = [1.0, 4.0, 9.0];
        assert_eq!(chord_gap(&u, &f, 1), 2.0);
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1e-6, 1.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[6], 1.0);
        assert!((g[3] - 1e-3).abs() < 1e-15);
    }
}
