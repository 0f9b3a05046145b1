//! Principal branch of the Lambert W function on the nonnegative reals.
//!
//! `W(z)` is the `w >= 0` with `w e^w = z`. The implicit diode relation of
//! [`crate::rectifier`] reduces to a single evaluation of `W`, so only the
//! branch `W_0` on `z >= 0` is implemented.

use crate::math;
use crate::{Error, Result};

/// Tolerance used by the model when it calls into this module.
pub const DEFAULT_REL_TOL: f64 = 1e-13;

const MAX_ITERS: usize = 64;

/// Largest `ln z` for which `z` is still comfortably finite.
pub(crate) const LN_OVERFLOW_GUARD: f64 = 700.0;

fn check_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol <= 1e-6 {
        Ok(())
    } else {
        Err(Error::Domain { what: "relative tolerance (expected 0 < tol <= 1e-6)", value: rel_tol })
    }
}

/// Winitzki's uniform approximation, a few percent off everywhere on `z >= 0`.
fn initial_guess(z: f64) -> f64 {
    let l = math::ln_1p(z);
    l * (1.0 - math::ln_1p(l) / (2.0 + l))
}

/// Evaluates `W_0(z)` for `z >= 0`.
///
/// The root is kept inside a bracket `[lo, hi]` with `lo e^lo <= z <= hi e^hi`
/// and refined by Halley steps; a step that leaves the bracket is replaced by
/// bisection. On return `|w e^w - z| <= rel_tol * max(z, f64::MIN_POSITIVE)`,
/// where `rel_tol` is floored at the rounding level of the residual itself
/// (about `(1 + w) * eps`).
///
/// ```
/// use wpt_core::lambert::lambert_w0;
/// let w = lambert_w0(core::f64::consts::E, 1e-12).unwrap();
/// assert!((w - 1.0).abs() < 1e-15);
/// ```
pub fn lambert_w0(z: f64, rel_tol: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain { what: "Lambert W argument", value: z });
    }
    check_tol(rel_tol)?;
    if z == 0.0 {
        return Ok(0.0);
    }

    let scale = z.max(f64::MIN_POSITIVE);
    let mut lo = 0.0_f64;
    let mut hi = if z > core::f64::consts::E { math::ln(z) } else { 1.0 };
    let mut w = initial_guess(z).clamp(lo, hi);

    for _ in 0..MAX_ITERS {
        // r = (w e^w - z) e^{-w}; the scaling keeps everything finite.
        let e_neg = math::exp(-w);
        let r = w - z * e_neg;
        let tol = rel_tol.max(8.0 * f64::EPSILON * (1.0 + w));
        let within = r.abs() <= tol * scale * e_neg;
        if r > 0.0 {
            hi = w;
        } else if r < 0.0 {
            lo = w;
        } else {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let step = r / (wp1 - (w + 2.0) * r / (2.0 * wp1));
        if within {
            // one more cubic step costs nothing and reaches full precision
            let next = w - step;
            return Ok(if next >= lo && next <= hi { next } else { w });
        }
        let mut next = w - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == w {
            // bracket collapsed to adjacent floats
            return Ok(w);
        }
        w = next;
    }
    Err(Error::NoConvergence { what: "Lambert W Halley iteration", iterations: MAX_ITERS })
}

/// Evaluates `W_0(e^ln_z)` without forming `e^ln_z`.
///
/// Below the overflow guard this defers to [`lambert_w0`]; above it, Newton's
/// method is run on `w + ln w = ln_z`. That function is concave and increasing,
/// so after the first step the iterates approach the root monotonically from
/// below.
pub fn lambert_w0_of_exp(ln_z: f64, rel_tol: f64) -> Result<f64> {
    if ln_z.is_nan() || ln_z == f64::INFINITY {
        return Err(Error::Domain { what: "Lambert W log-argument", value: ln_z });
    }
    check_tol(rel_tol)?;
    if ln_z < LN_OVERFLOW_GUARD {
        return lambert_w0(math::exp(ln_z), rel_tol);
    }

    let l1 = ln_z;
    let l2 = math::ln(l1);
    let mut w = l1 - l2 + l2 / l1;
    for _ in 0..MAX_ITERS {
        let g = w + math::ln(w) - ln_z;
        let step = g / (1.0 + 1.0 / w);
        let next = (w - step).max(0.5 * w);
        if (next - w).abs() <= rel_tol.max(4.0 * f64::EPSILON) * next {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::NoConvergence { what: "Lambert W log-domain Newton", iterations: MAX_ITERS })
}
