use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{pathloss, BBox, Point};
use crate::rectifier::HarvestModel;
use crate::{Error, Result};

/// Smallest pathloss the model is evaluated at (m^2). `q0 / d` diverges as a
/// receiver is approached; inside this radius the received power is held at
/// `q0 / D_FLOOR`.
pub const D_FLOOR: f64 = 1e-6;

/// Distance from a receiver toward the centroid used by
/// [`Scenario::near_receiver`] (m).
pub const NEAR_RECEIVER_OFFSET: f64 = 1e-2;

/// Receivers, search box, unit-distance power and harvesting model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    receivers: Vec<Point>,
    q0: f64,
    bbox: BBox,
    model: HarvestModel,
}

impl Scenario {
    /// Scenario whose box spans the receiver extremes.
    pub fn new(receivers: Vec<Point>, q0: f64, model: HarvestModel) -> Result<Self> {
        let bbox = BBox::from_points(&receivers)
            .ok_or_else(|| Error::invalid("receivers", "at least one receiver is required"))?;
        Self::with_box(receivers, q0, bbox, model)
    }

    /// Scenario with an explicit box, which must cover every receiver.
    pub fn with_box(receivers: Vec<Point>, q0: f64, bbox: BBox, model: HarvestModel) -> Result<Self> {
        if receivers.is_empty() {
            return Err(Error::invalid("receivers", "at least one receiver is required"));
        }
        if let Some(i) = receivers.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::invalid("receivers", alloc::format!("receiver {i} has a non-finite coordinate")));
        }
        if !(q0.is_finite() && q0 > 0.0) {
            return Err(Error::invalid("q0", alloc::format!("must be finite and positive, got {q0}")));
        }
        bbox.validate()?;
        if let Some(i) = receivers.iter().position(|p| !bbox.contains(*p)) {
            return Err(Error::invalid(
                "box",
                alloc::format!("receiver {i} lies outside the box; the box must span the receiver extremes"),
            ));
        }
        Ok(Self { receivers, q0, bbox, model })
    }

    /// Receiver positions.
    pub fn receivers(&self) -> &[Point] {
        &self.receivers
    }

    /// Received RF power at unit pathloss (W).
    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Search box.
    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Harvesting model shared by all receivers.
    pub fn model(&self) -> &HarvestModel {
        &self.model
    }

    /// `P_dc` at receiver `n` for a transmitter at `p`, with the pathloss
    /// floored at [`D_FLOOR`].
    pub fn harvest(&self, p: Point, n: usize) -> Result<f64> {
        let d = pathloss(p, self.receivers[n]).max(D_FLOOR);
        self.model.p_dc(self.q0 / d)
    }

    /// `min_n P_dc,n` for a transmitter at `p`.
    ///
    /// `P_dc` is strictly increasing in the received power, so the minimum is
    /// attained at the receiver with the largest pathloss and only that one is
    /// evaluated.
    pub fn min_harvest(&self, p: Point) -> Result<f64> {
        let d = self.max_pathloss(p).max(D_FLOOR);
        self.model.p_dc(self.q0 / d)
    }

    /// Largest pathloss from `p` to any receiver.
    pub fn max_pathloss(&self, p: Point) -> f64 {
        self.receivers.iter().map(|&r| pathloss(p, r)).fold(0.0, f64::max)
    }

    /// Whether `p` is within the pathloss floor of some receiver.
    pub fn floor_active(&self, p: Point) -> bool {
        self.receivers.iter().any(|&r| pathloss(p, r) < D_FLOOR)
    }

    /// Mean receiver position.
    pub fn centroid(&self) -> Point {
        let n = self.receivers.len() as f64;
        let (sx, sy) = self.receivers.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }

    /// Point [`NEAR_RECEIVER_OFFSET`] away from receiver `n` toward the
    /// centroid, clamped to the box.
    pub fn near_receiver(&self, n: usize) -> Result<Point> {
        let r = *self.receivers.get(n).ok_or_else(|| {
            Error::invalid("init", alloc::format!("receiver index {n} out of range (have {})", self.receivers.len()))
        })?;
        let c = self.centroid();
        let dist = r.distance(c);
        if dist == 0.0 {
            return Ok(r);
        }
        let t = NEAR_RECEIVER_OFFSET.min(dist) / dist;
        Ok(self.bbox.clamp(Point::new(r.x + t * (c.x - r.x), r.y + t * (c.y - r.y))))
    }
}

/// `n_receivers` positions drawn uniformly from `[0, width]^2`; identical for
/// identical seeds.
pub fn generate_receivers(n_receivers: usize, width: f64, seed: u64) -> Result<Vec<Point>> {
    if n_receivers == 0 {
        return Err(Error::invalid("n_receivers", "must be at least 1"));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid("width", alloc::format!("must be finite and positive, got {width}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_receivers)
        .map(|_| {
            let x = width * rng.random::<f64>();
            let y = width * rng.random::<f64>();
            Point::new(x, y)
        })
        .collect())
}

/// Random scenario with the box spanning the drawn receivers.
pub fn generate_scenario(n_receivers: usize, width: f64, seed: u64, q0: f64, model: HarvestModel) -> Result<Scenario> {
    Scenario::new(generate_receivers(n_receivers, width, seed)?, q0, model)
}
