use alloc::vec::Vec;

use super::geometry::{pathloss, Point};
use super::scenario::{Scenario, D_FLOOR};
use crate::calculus::dpdc_dd;
use crate::{Error, Result};

/// Tangent of `-P_dc,n` in the pathloss at the anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SurrogateTerm {
    /// Receiver position.
    pub receiver: Point,
    /// `alpha_n = -dP_dc,n/dd` at the anchor (W per m^2), positive.
    pub slope: f64,
    /// Anchor pathloss `d_n`, floored at [`D_FLOOR`].
    pub anchor_pathloss: f64,
    /// `P_dc,n` at the anchor (W).
    pub anchor_power: f64,
    /// The floor was active at the anchor.
    pub clamped: bool,
}

impl SurrogateTerm {
    /// `alpha_n (d - d_anchor) - P_dc,n(d_anchor)`, an upper bound of
    /// `-P_dc,n(d)` for every `d` because `P_dc,n` is convex in `d`.
    pub fn neg_power_bound(&self, d: f64) -> f64 {
        self.slope * (d.max(D_FLOOR) - self.anchor_pathloss) - self.anchor_power
    }

    /// Lower bound on `P_dc,n` for a transmitter at `p`.
    pub fn power_lower_bound(&self, p: Point) -> f64 {
        -self.neg_power_bound(pathloss(p, self.receiver))
    }
}

/// Per-receiver tangents at one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    /// Linearization point.
    pub anchor: Point,
    /// One term per receiver, in receiver order.
    pub terms: Vec<SurrogateTerm>,
}

impl Surrogate {
    /// `min_n` of the lower bounds: the surrogate objective at `p`.
    pub fn value(&self, p: Point) -> f64 {
        self.terms.iter().map(|t| t.power_lower_bound(p)).fold(f64::INFINITY, f64::min)
    }

    /// Slopes `alpha_n` in receiver order.
    pub fn slopes(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.slope).collect()
    }

    /// Whether the pathloss floor was active for some receiver.
    pub fn any_clamped(&self) -> bool {
        self.terms.iter().any(|t| t.clamped)
    }
}

/// Linearizes every `-P_dc,n` in its pathloss at `anchor`.
pub fn build_surrogate(scenario: &Scenario, anchor: Point) -> Result<Surrogate> {
    if !scenario.bbox().contains(anchor) {
        return Err(Error::invalid("anchor", alloc::format!("({}, {}) is outside the box", anchor.x, anchor.y)));
    }
    let model = scenario.model();
    let q0 = scenario.q0();
    let terms = scenario
        .receivers()
        .iter()
        .map(|&receiver| {
            let raw = pathloss(anchor, receiver);
            let d = raw.max(D_FLOOR);
            Ok(SurrogateTerm {
                receiver,
                slope: -dpdc_dd(model, q0, d)?,
                anchor_pathloss: d,
                anchor_power: model.p_dc(q0 / d)?,
                clamped: raw < D_FLOOR,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Surrogate { anchor, terms })
}
