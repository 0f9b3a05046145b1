//! Rectifier constants, the polynomial `rho(Q)` and the implicit solve for the
//! output current.
//!
//! With `a = R_L / (n v_t)` the diode relation reads
//! `exp(a I) (I + I_s) = rho(Q)`. Substituting `t = a (I + I_s)` gives
//! `t e^t = a rho e^{a I_s}`, so `I = W_0(a rho e^{a I_s}) / a - I_s`.

use alloc::vec::Vec;

use crate::lambert::{self, LN_OVERFLOW_GUARD};
use crate::math;
use crate::waveforms::Waveform;
use crate::{Error, Result};

/// `ln((I + I_s) / rho)` with `excess = rho - I_s`. Near a ratio of 1 the
/// `ln1p` form avoids cancellation; far from it that form loses the small
/// quotient to rounding near -1, so the logs are subtracted instead.
fn log_ratio(i: f64, i_s: f64, excess: f64, rho: f64, ln_rho: f64) -> f64 {
    let sum = i + i_s;
    if sum >= 0.5 * rho {
        math::ln_1p((i - excess) / rho)
    } else {
        math::ln(sum) - ln_rho
    }
}

/// Diode and circuit constants of a single-diode rectifier.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RectifierParams {
    /// Reverse bias saturation current `I_s` (A).
    pub i_s: f64,
    /// Diode ideality factor `n`.
    pub n_ideality: f64,
    /// Thermal voltage `v_t` (V).
    pub v_t: f64,
    /// Antenna impedance `R_ant` (ohm).
    pub r_ant: f64,
    /// Load resistance `R_L` (ohm).
    pub r_load: f64,
    /// Even Taylor truncation order `n_o >= 2`.
    pub trunc_order: u32,
}

impl Default for RectifierParams {
    fn default() -> Self {
        Self { i_s: 5e-6, n_ideality: 1.05, v_t: 0.025_86, r_ant: 50.0, r_load: 5000.0, trunc_order: 4 }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite and positive, got {v}")))
    }
}

impl RectifierParams {
    /// Checks every invariant.
    pub fn validate(&self) -> Result<()> {
        positive("i_s", self.i_s)?;
        positive("n_ideality", self.n_ideality)?;
        positive("v_t", self.v_t)?;
        positive("r_ant", self.r_ant)?;
        positive("r_load", self.r_load)?;
        if self.trunc_order < 2 || !self.trunc_order.is_multiple_of(2) {
            return Err(Error::invalid(
                "trunc_order",
                alloc::format!("must be even and at least 2, got {}", self.trunc_order),
            ));
        }
        Ok(())
    }

    /// `n v_t` (V).
    pub fn thermal_scale(&self) -> f64 {
        self.n_ideality * self.v_t
    }

    /// `a = R_L / (n v_t)` (1/A).
    pub fn load_exponent(&self) -> f64 {
        self.r_load / self.thermal_scale()
    }

    /// Rectifier characteristic constant `k_i = I_s / (i! (n v_t)^i)`.
    pub fn characteristic_constant(&self, order: u32) -> f64 {
        let nvt = self.thermal_scale();
        (1..=order).fold(self.i_s, |acc, k| acc / (f64::from(k) * nvt))
    }
}

/// Evaluatable energy-harvesting map `Q_rf -> (I_out, P_dc)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HarvestModel {
    params: RectifierParams,
    alpha: Vec<f64>,
}

impl HarvestModel {
    /// Builds `alpha_0 = I_s`, `alpha_j = k_{2j} R_ant^j lambda_{2j}`.
    ///
    /// The coefficients are formed as running products of
    /// `R_ant / ((2k-1) 2k (n v_t)^2)` so neither the factorial nor the power
    /// of `n v_t` is materialized.
    pub fn build(params: RectifierParams, waveform: &Waveform) -> Result<Self> {
        params.validate()?;
        let half = params.trunc_order / 2;
        let nvt2 = params.thermal_scale() * params.thermal_scale();
        let mut alpha = Vec::with_capacity(half as usize + 1);
        alpha.push(params.i_s);
        let mut base = params.i_s;
        for j in 1..=half {
            let k = f64::from(j);
            base *= params.r_ant / ((2.0 * k - 1.0) * (2.0 * k) * nvt2);
            let lambda = waveform.factor(2 * j).ok_or(Error::MissingMomentFactor { order: 2 * j })?;
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidWaveformFactor {
                    order: 2 * j,
                    value: lambda,
                    reason: "factor must be finite and positive",
                });
            }
            let a = base * lambda;
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::invalid(
                    "alpha",
                    alloc::format!("coefficient {j} is {a}, not a positive finite number"),
                ));
            }
            alpha.push(a);
        }
        Ok(Self { params, alpha })
    }

    /// Circuit constants the model was built from.
    pub fn params(&self) -> &RectifierParams {
        &self.params
    }

    /// Polynomial coefficients `alpha_0 ..= alpha_{n_o/2}`.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `n_o / 2`.
    pub fn half_order(&self) -> usize {
        self.alpha.len() - 1
    }

    fn check_power(q_rf: f64) -> Result<()> {
        if q_rf.is_finite() && q_rf >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain { what: "received RF power", value: q_rf })
        }
    }

    /// `rho(Q) - alpha_0 = sum_{j>=1} alpha_j Q^j`, by Horner's scheme.
    fn rho_excess_unchecked(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for &a in self.alpha[1..].iter().rev() {
            acc = (acc + a) * q;
        }
        acc
    }

    /// `rho(Q) = sum_j alpha_j Q^j`.
    pub fn rho(&self, q_rf: f64) -> Result<f64> {
        Self::check_power(q_rf)?;
        Ok(self.alpha[0] + self.rho_excess_unchecked(q_rf))
    }

    /// `(rho, d rho/dQ, d^2 rho/dQ^2)` at `q_rf`.
    pub fn rho_with_derivatives(&self, q_rf: f64) -> Result<(f64, f64, f64)> {
        Self::check_power(q_rf)?;
        let (mut p, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for &a in self.alpha.iter().rev() {
            d2 = d2 * q_rf + 2.0 * d1;
            d1 = d1 * q_rf + p;
            p = p * q_rf + a;
        }
        Ok((p, d1, d2))
    }

    /// Output current `I >= 0` solving `exp(a I) (I + I_s) = rho(Q)`.
    pub fn solve_iout(&self, q_rf: f64) -> Result<f64> {
        Self::check_power(q_rf)?;
        if q_rf == 0.0 {
            return Ok(0.0);
        }
        let excess = self.rho_excess_unchecked(q_rf);
        self.solve_with(self.alpha[0] + excess, excess)
    }

    /// Output current for a given value of `rho >= I_s`, bypassing the
    /// polynomial.
    pub fn iout_at_rho(&self, rho: f64) -> Result<f64> {
        if !(rho.is_finite() && rho >= self.params.i_s) {
            return Err(Error::Domain { what: "rho (must be at least I_s)", value: rho });
        }
        self.solve_with(rho, rho - self.params.i_s)
    }

    fn solve_with(&self, rho: f64, excess: f64) -> Result<f64> {
        if excess == 0.0 {
            return Ok(0.0);
        }
        let i_s = self.params.i_s;
        let a = self.params.load_exponent();
        let ln_rho = math::ln(rho);
        let ln_z = math::ln(a) + ln_rho + a * i_s;
        let t = if ln_z < LN_OVERFLOW_GUARD {
            lambert::lambert_w0(math::exp(ln_z), lambert::DEFAULT_REL_TOL)?
        } else {
            lambert::lambert_w0_of_exp(ln_z, lambert::DEFAULT_REL_TOL)?
        };
        let mut i = (t / a - i_s).max(0.0);

        // Newton polish on f(I) = a I + ln((I + I_s) / rho).
        for _ in 0..4 {
            let f = a * i + log_ratio(i, i_s, excess, rho, ln_rho);
            let step = f / (a + 1.0 / (i + i_s));
            let next = (i - step).max(0.0);
            let done = (next - i).abs() <= 2.0 * f64::EPSILON * next;
            i = next;
            if done {
                break;
            }
        }
        Ok(i)
    }

    /// Relative residual `|exp(a I)(I + I_s) - rho| / rho` of a candidate
    /// current, evaluated without overflow.
    pub fn relative_residual(&self, q_rf: f64, i_out: f64) -> Result<f64> {
        Self::check_power(q_rf)?;
        let excess = self.rho_excess_unchecked(q_rf);
        let rho = self.alpha[0] + excess;
        let a = self.params.load_exponent();
        let f = a * i_out + log_ratio(i_out, self.alpha[0], excess, rho, math::ln(rho));
        Ok(math::expm1(f).abs())
    }

    /// Harvested DC power `P_dc = I^2 R_L` (W).
    pub fn p_dc(&self, q_rf: f64) -> Result<f64> {
        let i = self.solve_iout(q_rf)?;
        Ok(i * i * self.params.r_load)
    }
}
