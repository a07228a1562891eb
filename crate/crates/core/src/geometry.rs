use serde::{Deserialize, Serialize};

/// Planar position in distance units (miles by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// True when every point lies on one straight line (within a relative
/// tolerance scaled by the point spread).
pub fn collinear(points: &[Point]) -> bool {
    if points.len() < 3 {
        return true;
    }
    let a = points[0];
    let Some(b) = points.iter().copied().max_by(|p, q| a.distance(*p).total_cmp(&a.distance(*q))) else {
        return true;
    };
    let span = a.distance(b);
    if span == 0.0 {
        return true;
    }
    let tol = 1e-9 * span * span;
    points.iter().all(|p| {
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross.abs() <= tol
    })
}
