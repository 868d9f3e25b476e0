//! Exact-sign geometric predicates on double-precision coordinates.

use robust::Coord;

use super::Point;

#[inline]
fn c(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive if `a, b, c` turn counterclockwise, negative if clockwise, zero
/// if collinear. The sign is exact.
#[inline]
pub fn orient2d(a: Point, b: Point, p: Point) -> f64 {
    robust::orient2d(c(a), c(b), c(p))
}

/// Positive if `d` lies strictly inside the circle through the
/// counterclockwise triple `a, b, c`, negative if strictly outside, zero if
/// cocircular. The sign is exact.
#[inline]
pub fn incircle(a: Point, b: Point, p: Point, d: Point) -> f64 {
    robust::incircle(c(a), c(b), c(p), c(d))
}

/// Circumcenter of a non-degenerate triangle, evaluated relative to `a`.
pub(crate) fn circumcenter(a: Point, b: Point, p: Point) -> Point {
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = p.x - a.x;
    let cy = p.y - a.y;
    let bl = bx * bx + by * by;
    let cl = cx * cx + cy * cy;
    let d = 0.5 / (bx * cy - by * cx);
    Point::new(a.x + (cy * bl - by * cl) * d, a.y + (bx * cl - cx * bl) * d)
}

/// Squared circumradius, `inf` for collinear triples.
pub(crate) fn circumradius2(a: Point, b: Point, p: Point) -> f64 {
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = p.x - a.x;
    let cy = p.y - a.y;
    let bl = bx * bx + by * by;
    let cl = cx * cx + cy * cy;
    let d = 0.5 / (bx * cy - by * cx);
    let x = (cy * bl - by * cl) * d;
    let y = (bx * cl - cx * bl) * d;
    let r = x * x + y * y;
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}
