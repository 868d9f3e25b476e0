use serde::{Deserialize, Serialize};

use super::{Point, Window};
use crate::error::{invalid, Result};

/// A closed query region: a rectangle, or a square annulus
/// `A_{a,b} = B_b \ B_a` around `center` with `B_r = center + [-r, r]²`.
///
/// Both are represented as finite unions of closed rectangles ("pieces")
/// glued along shared segments ("links").
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    Rect { window: Window },
    SquareAnnulus { center: Point, a: f64, b: f64 },
}

/// Shared segment between two pieces of a region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub first: usize,
    pub second: usize,
    pub segment: Window,
}

impl Region {
    pub fn rect(window: Window) -> Result<Self> {
        if window.is_degenerate() {
            return Err(invalid(format!("degenerate rectangle {window:?}")));
        }
        Ok(Region::Rect { window })
    }

    /// `B_b \ B_a` around `center`; `a = 0` gives the full square `B_b`.
    pub fn annulus(center: Point, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && center.is_finite()) || a < 0.0 || a >= b {
            return Err(invalid(format!("annulus needs 0 <= a < b, got a={a}, b={b}")));
        }
        Ok(Region::SquareAnnulus { center, a, b })
    }

    /// `B_s` around the origin.
    pub fn square(s: f64) -> Result<Self> {
        Region::rect(Window::square(Point::new(0.0, 0.0), s)?)
    }

    pub fn bbox(&self) -> Window {
        match *self {
            Region::Rect { window } => window,
            Region::SquareAnnulus { center, b, .. } => sq(center, b),
        }
    }

    pub fn pieces(&self) -> Vec<Window> {
        match *self {
            Region::Rect { window } => vec![window],
            Region::SquareAnnulus { center, a, b } => {
                if a == 0.0 {
                    return vec![sq(center, b)];
                }
                let (cx, cy) = (center.x, center.y);
                vec![
                    rect(cx - b, cy + a, cx + b, cy + b),
                    rect(cx - b, cy - b, cx + b, cy - a),
                    rect(cx - b, cy - a, cx - a, cy + a),
                    rect(cx + a, cy - a, cx + b, cy + a),
                ]
            }
        }
    }

    pub fn links(&self) -> Vec<Link> {
        match *self {
            Region::SquareAnnulus { center, a, b } if a > 0.0 => {
                let (cx, cy) = (center.x, center.y);
                let l = |first, second, x0, x1, y| Link {
                    first,
                    second,
                    segment: rect(x0, y, x1, y),
                };
                vec![
                    l(0, 2, cx - b, cx - a, cy + a),
                    l(0, 3, cx + a, cx + b, cy + a),
                    l(1, 2, cx - b, cx - a, cy - a),
                    l(1, 3, cx + a, cx + b, cy - a),
                ]
            }
            _ => Vec::new(),
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.pieces().iter().any(|w| w.contains_point(p))
    }

    /// The four sides of a rectangle as segments: left, right, bottom, top.
    pub fn sides(w: &Window) -> [Window; 4] {
        let (lo, hi) = (w.lo(), w.hi());
        [
            rect(lo.x, lo.y, lo.x, hi.y),
            rect(hi.x, lo.y, hi.x, hi.y),
            rect(lo.x, lo.y, hi.x, lo.y),
            rect(lo.x, hi.y, hi.x, hi.y),
        ]
    }

    /// Inner boundary `∂B_a` of an annulus (the center point when `a = 0`).
    pub fn inner_boundary(&self) -> Vec<Window> {
        match *self {
            Region::Rect { .. } => Vec::new(),
            Region::SquareAnnulus { center, a, .. } => Region::sides(&sq(center, a)).to_vec(),
        }
    }

    /// Outer boundary: `∂B_b` for an annulus, the four sides for a rectangle.
    pub fn outer_boundary(&self) -> Vec<Window> {
        Region::sides(&self.bbox()).to_vec()
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
    Window::from_bounds_unchecked(x0, y0, x1, y1)
}

fn sq(c: Point, r: f64) -> Window {
    rect(c.x - r, c.y - r, c.x + r, c.y + r)
}
