//! Point processes and exact Delaunay/Voronoi geometry.

mod certify;
pub(crate) mod clip;
mod delaunay;
mod predicates;
mod region;
mod sample;
mod voronoi;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use certify::{
    determinism_certificate, max_nearest_distance, Certificate, Certification, Geometry,
    PaddingPolicy,
};
pub use delaunay::{delaunay, Triangulation, VertexGroup, NONE};
pub use predicates::{incircle, orient2d};
pub use region::{Link, Region};
pub use sample::{extend_sample, sample_poisson, PointSample, Provenance};
pub use voronoi::{nearest_site, Facet, FacetShape, VoronoiCellView, VoronoiCells};

/// A point of the plane, in length units of the intensity-1 process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Closed axis-aligned rectangle `[lo.x, hi.x] × [lo.y, hi.y]`.
///
/// Zero width or height is allowed: such windows describe segments and
/// points (contact targets) and have zero area for sampling purposes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    lo: Point,
    hi: Point,
}

impl Window {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidWindow(format!(
                "non-finite corner {lo:?} / {hi:?}"
            )));
        }
        if lo.x > hi.x || lo.y > hi.y {
            return Err(Error::InvalidWindow(format!(
                "inverted corners {lo:?} / {hi:?}"
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn from_bounds(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Window::new(Point::new(x0, y0), Point::new(x1, y1))
    }

    /// `center + [-half, half]²`.
    pub fn square(center: Point, half: f64) -> Result<Self> {
        Window::from_bounds(
            center.x - half,
            center.y - half,
            center.x + half,
            center.y + half,
        )
    }

    pub(crate) fn from_bounds_unchecked(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Window {
            lo: Point::new(x0, y0),
            hi: Point::new(x1, y1),
        }
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() <= 0.0
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.lo.x + self.hi.x),
            0.5 * (self.lo.y + self.hi.y),
        )
    }

    #[inline]
    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn contains(&self, other: &Window) -> bool {
        other.lo.x >= self.lo.x
            && other.lo.y >= self.lo.y
            && other.hi.x <= self.hi.x
            && other.hi.y <= self.hi.y
    }

    /// Closed intersection test.
    pub fn intersects(&self, other: &Window) -> bool {
        self.lo.x <= other.hi.x
            && other.lo.x <= self.hi.x
            && self.lo.y <= other.hi.y
            && other.lo.y <= self.hi.y
    }

    /// True when the two windows share a set of positive area.
    pub fn overlaps_interior(&self, other: &Window) -> bool {
        self.lo.x < other.hi.x
            && other.lo.x < self.hi.x
            && self.lo.y < other.hi.y
            && other.lo.y < self.hi.y
    }

    pub fn expand(&self, by: f64) -> Window {
        Window {
            lo: Point::new(self.lo.x - by, self.lo.y - by),
            hi: Point::new(self.hi.x + by, self.hi.y + by),
        }
    }

    pub fn union_bounds(&self, other: &Window) -> Window {
        Window {
            lo: Point::new(self.lo.x.min(other.lo.x), self.lo.y.min(other.lo.y)),
            hi: Point::new(self.hi.x.max(other.hi.x), self.hi.y.max(other.hi.y)),
        }
    }

    /// Distance from `self` to the boundary of `outer`; zero unless `outer`
    /// contains `self`.
    pub fn margin_within(&self, outer: &Window) -> f64 {
        if !outer.contains(self) {
            return 0.0;
        }
        (self.lo.x - outer.lo.x)
            .min(self.lo.y - outer.lo.y)
            .min(outer.hi.x - self.hi.x)
            .min(outer.hi.y - self.hi.y)
    }

    pub fn distance_to_point(&self, p: Point) -> f64 {
        let dx = (self.lo.x - p.x).max(0.0).max(p.x - self.hi.x);
        let dy = (self.lo.y - p.y).max(0.0).max(p.y - self.hi.y);
        (dx * dx + dy * dy).sqrt()
    }

    /// The four pairwise interior-disjoint strips making up
    /// `self.expand(width) \ self`: bottom and top span the full expanded
    /// width, left and right fill in between.
    pub fn shell(&self, width: f64) -> [Window; 4] {
        let o = self.expand(width);
        [
            Window::from_bounds_unchecked(o.lo.x, o.lo.y, o.hi.x, self.lo.y),
            Window::from_bounds_unchecked(o.lo.x, self.hi.y, o.hi.x, o.hi.y),
            Window::from_bounds_unchecked(o.lo.x, self.lo.y, self.lo.x, self.hi.y),
            Window::from_bounds_unchecked(self.hi.x, self.lo.y, o.hi.x, self.hi.y),
        ]
    }
}
