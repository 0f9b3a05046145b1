use crate::{Error, Result};

/// Planar position (m).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    /// x coordinate (m).
    pub x: f64,
    /// y coordinate (m).
    pub y: f64,
}

impl Point {
    /// New point.
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance (m).
    pub fn distance(self, other: Point) -> f64 {
        crate::math::sqrt(pathloss(self, other))
    }
}

/// Pathloss `(x - x_n)^2 + (y - y_n)^2` (m^2).
#[inline]
pub fn pathloss(p: Point, receiver: Point) -> f64 {
    let dx = p.x - receiver.x;
    let dy = p.y - receiver.y;
    dx * dx + dy * dy
}

/// Axis-aligned search box. Zero width or height is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BBox {
    /// Lower x bound.
    pub x_min: f64,
    /// Upper x bound.
    pub x_max: f64,
    /// Lower y bound.
    pub y_min: f64,
    /// Upper y bound.
    pub y_max: f64,
}

impl BBox {
    /// Tightest box around `points`; `None` if empty.
    pub fn from_points(points: &[Point]) -> Option<Self> {
        let first = points.first()?;
        Some(points.iter().fold(BBox { x_min: first.x, x_max: first.x, y_min: first.y, y_max: first.y }, |b, p| BBox {
            x_min: b.x_min.min(p.x),
            x_max: b.x_max.max(p.x),
            y_min: b.y_min.min(p.y),
            y_max: b.y_max.max(p.y),
        }))
    }

    /// Checks finiteness and ordering of the bounds.
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("box", "bounds must be finite"));
        }
        if self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::invalid("box", "minimum exceeds maximum"));
        }
        Ok(())
    }

    /// Whether `p` lies in the closed box.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Nearest point of the box.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }

    /// Width along x.
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Height along y.
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}
