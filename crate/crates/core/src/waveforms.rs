//! Even-moment waveform factors `lambda_i = E{y^i} / (E{y^2})^{i/2}`.
//!
//! Only even orders enter the truncated diode relation, so odd moments are not
//! stored. `lambda_2 = 1` by definition.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::{Error, Result};

/// Built-in input-signal distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WaveformKind {
    /// `y = sqrt(2Q) cos(theta)` with `theta` uniform on `[0, 2 pi)`.
    ContinuousWave,
    /// Zero-mean real Gaussian.
    RealGaussian,
}

impl WaveformKind {
    /// Short identifier, also accepted by [`WaveformKind::from_name`].
    pub fn name(self) -> &'static str {
        match self {
            WaveformKind::ContinuousWave => "cw",
            WaveformKind::RealGaussian => "gaussian",
        }
    }

    /// Parses `cw`/`continuous_wave` or `gaussian`/`real_gaussian`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cw" | "continuous_wave" => Some(WaveformKind::ContinuousWave),
            "gaussian" | "real_gaussian" => Some(WaveformKind::RealGaussian),
            _ => None,
        }
    }

    /// Analytic `lambda_{2j}`.
    pub fn factor(self, j: u32) -> f64 {
        match self {
            // E{cos^{2j}} = C(2j, j) / 4^j and (2Q)^j / Q^j = 2^j.
            WaveformKind::ContinuousWave => (1..=j).fold(1.0, |acc, k| {
                let k = f64::from(k);
                acc * (2.0 * k - 1.0) / k
            }),
            // (2j - 1)!!
            WaveformKind::RealGaussian => (1..=j).fold(1.0, |acc, k| acc * (2.0 * f64::from(k) - 1.0)),
        }
    }
}

/// Normalized even moments of a predesigned input signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    name: String,
    factors: BTreeMap<u32, f64>,
}

fn check_max_order(max_order: u32) -> Result<()> {
    if max_order >= 2 && max_order.is_multiple_of(2) {
        Ok(())
    } else {
        Err(Error::invalid("max_order", alloc::format!("must be even and at least 2, got {max_order}")))
    }
}

/// Analytic factors of a built-in distribution for all even orders up to
/// `max_order`.
pub fn builtin_waveform(kind: WaveformKind, max_order: u32) -> Result<Waveform> {
    check_max_order(max_order)?;
    let factors = (1..=max_order / 2).map(|j| (2 * j, kind.factor(j))).collect();
    Ok(Waveform { name: String::from(kind.name()), factors })
}

/// Builds a waveform from user-supplied factors keyed by even order `>= 4`.
///
/// `lambda_2 = 1` is inserted. An explicit order-2 entry is only accepted if it
/// equals 1.
pub fn custom_waveform<I>(factors: I) -> Result<Waveform>
where
    I: IntoIterator<Item = (u32, f64)>,
{
    let mut map = BTreeMap::new();
    map.insert(2, 1.0);
    for (order, value) in factors {
        let bad = |reason| Error::InvalidWaveformFactor { order, value, reason };
        if order % 2 != 0 {
            return Err(bad("order must be even"));
        }
        if order < 2 {
            return Err(bad("order must be at least 2"));
        }
        if !value.is_finite() {
            return Err(bad("factor must be finite"));
        }
        if value <= 0.0 {
            return Err(bad("factor must be positive"));
        }
        if order == 2 && value != 1.0 {
            return Err(bad("the order-2 factor is fixed at 1"));
        }
        map.insert(order, value);
    }
    Ok(Waveform { name: String::from("custom"), factors: map })
}

impl Waveform {
    /// Identifier: a builtin name or `custom`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// `lambda_order`, if present.
    pub fn factor(&self, order: u32) -> Option<f64> {
        self.factors.get(&order).copied()
    }

    /// Highest stored order.
    pub fn max_order(&self) -> u32 {
        self.factors.keys().next_back().copied().unwrap_or(2)
    }

    /// `(order, lambda)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.factors.iter().map(|(&k, &v)| (k, v))
    }
}

/// Estimates `lambda_{2j}`, `2j <= max_order`, from samples of the input
/// signal.
///
/// Moments are accumulated with Neumaier summation; the estimate is invariant
/// to scaling the samples by a positive constant.
pub fn estimate_factors<I>(samples: I, max_order: u32) -> Result<BTreeMap<u32, f64>>
where
    I: IntoIterator<Item = f64>,
{
    check_max_order(max_order)?;
    let half = (max_order / 2) as usize;
    let mut sums = alloc::vec![NeumaierSum::default(); half];
    let mut count = 0_u64;
    for y in samples {
        let y2 = y * y;
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= y2;
            s.add(p);
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("samples", "no samples given"));
    }
    let n = count as f64;
    let m2 = sums[0].total() / n;
    if m2.is_nan() || m2 <= 0.0 {
        return Err(Error::invalid("samples", "second moment is zero"));
    }
    let mut out = BTreeMap::new();
    let mut m2_pow = 1.0;
    for (j, s) in sums.iter().enumerate() {
        m2_pow *= m2;
        out.insert(2 * (j as u32 + 1), s.total() / n / m2_pow);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
