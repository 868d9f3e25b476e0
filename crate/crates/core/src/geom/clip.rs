//! Sutherland–Hodgman clipping of convex polygons with edge labels.
//!
//! A polygon is a list of vertices plus, per vertex, the label of the edge
//! leaving it. Clipping keeps the closed half-plane, so a polygon touching
//! the clip line in a single point survives as a degenerate polygon: closed
//! sets that touch intersect. Edges created along the clip line get the
//! label supplied by the caller. On axis-parallel clip lines the clipped
//! coordinate is assigned exactly.

use super::{Point, Window};

#[derive(Clone, Debug, Default)]
pub(crate) struct Poly {
    pub pts: Vec<Point>,
    pub labels: Vec<u32>,
}

impl Poly {
    pub fn clear(&mut self) {
        self.pts.clear();
        self.labels.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn set(&mut self, pts: &[Point], labels: &[u32]) {
        self.clear();
        self.pts.extend_from_slice(pts);
        self.labels.extend_from_slice(labels);
    }

    pub fn from_window(w: &Window, label: u32) -> Poly {
        let (lo, hi) = (w.lo(), w.hi());
        Poly {
            pts: vec![
                lo,
                Point::new(hi.x, lo.y),
                hi,
                Point::new(lo.x, hi.y),
            ],
            labels: vec![label; 4],
        }
    }

    fn push(&mut self, p: Point, l: u32) {
        self.pts.push(p);
        self.labels.push(l);
    }
}

#[derive(Clone, Copy)]
enum Side {
    Lower,
    Upper,
}

/// Keep `v[axis] >= bound` (`Lower`) or `v[axis] <= bound` (`Upper`).
fn clip_axis(input: &Poly, out: &mut Poly, axis: usize, bound: f64, side: Side, label: u32) {
    out.clear();
    let n = input.pts.len();
    if n == 0 {
        return;
    }
    let coord = |p: &Point| if axis == 0 { p.x } else { p.y };
    let inside = |p: &Point| match side {
        Side::Lower => coord(p) >= bound,
        Side::Upper => coord(p) <= bound,
    };
    let cut = |p: &Point, q: &Point| {
        let (cp, cq) = (coord(p), coord(q));
        let t = (bound - cp) / (cq - cp);
        if axis == 0 {
            let y = p.y + t * (q.y - p.y);
            Point::new(bound, y.clamp(p.y.min(q.y), p.y.max(q.y)))
        } else {
            let x = p.x + t * (q.x - p.x);
            Point::new(x.clamp(p.x.min(q.x), p.x.max(q.x)), bound)
        }
    };
    for i in 0..n {
        let p = &input.pts[i];
        let q = &input.pts[(i + 1) % n];
        let l = input.labels[i];
        let (pi, qi) = (inside(p), inside(q));
        if pi {
            out.push(*p, l);
            if !qi {
                out.push(cut(p, q), label);
            }
        } else if qi {
            out.push(cut(p, q), l);
        }
    }
}

/// Keep `(v - m) · d <= 0`.
pub(crate) fn clip_halfplane(input: &Poly, out: &mut Poly, m: Point, d: Point, label: u32) {
    out.clear();
    let n = input.pts.len();
    if n == 0 {
        return;
    }
    let f = |p: &Point| (p.x - m.x) * d.x + (p.y - m.y) * d.y;
    for i in 0..n {
        let p = input.pts[i];
        let q = input.pts[(i + 1) % n];
        let l = input.labels[i];
        let (fp, fq) = (f(&p), f(&q));
        let cut = || {
            let t = fp / (fp - fq);
            Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
        };
        if fp <= 0.0 {
            out.push(p, l);
            if fq > 0.0 {
                out.push(cut(), label);
            }
        } else if fq <= 0.0 {
            out.push(cut(), l);
        }
    }
}

/// Clip `poly` to the closed box `w` in place; `tmp` is scratch space.
pub(crate) fn clip_box(poly: &mut Poly, tmp: &mut Poly, w: &Window, label: u32) {
    let (lo, hi) = (w.lo(), w.hi());
    clip_axis(poly, tmp, 0, lo.x, Side::Lower, label);
    clip_axis(tmp, poly, 0, hi.x, Side::Upper, label);
    clip_axis(poly, tmp, 1, lo.y, Side::Lower, label);
    clip_axis(tmp, poly, 1, hi.y, Side::Upper, label);
}

/// Does the closed convex polygon meet the closed box?
pub(crate) fn meets_box(pts: &[Point], w: &Window, a: &mut Poly, b: &mut Poly) -> bool {
    if pts.is_empty() {
        return false;
    }
    if pts.iter().any(|p| w.contains_point(*p)) {
        return true;
    }
    a.clear();
    a.pts.extend_from_slice(pts);
    a.labels.resize(pts.len(), 0);
    clip_box(a, b, w, 0);
    !a.is_empty()
}

pub(crate) fn bbox_of(pts: &[Point]) -> Option<Window> {
    let first = pts.first()?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
    for p in &pts[1..] {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    Some(Window::from_bounds_unchecked(x0, y0, x1, y1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::from_bounds(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn box_clip_keeps_labels() {
        let mut poly = Poly::from_window(&w(-1.0, -1.0, 1.0, 1.0), 7);
        poly.labels = vec![1, 2, 3, 4];
        let mut tmp = Poly::default();
        clip_box(&mut poly, &mut tmp, &w(0.0, -5.0, 5.0, 5.0), 99);
        assert_eq!(poly.pts.len(), 4);
        let mut labels = poly.labels.clone();
        labels.sort();
        assert_eq!(labels, vec![1, 2, 3, 99]);
        assert!(poly.pts.iter().all(|p| p.x >= 0.0));
    }

    #[test]
    fn touching_counts_as_meeting() {
        let sq = Poly::from_window(&w(0.0, 0.0, 1.0, 1.0), 0);
        let (mut a, mut b) = (Poly::default(), Poly::default());
        assert!(meets_box(&sq.pts, &w(1.0, 0.5, 1.0, 3.0), &mut a, &mut b));
        assert!(meets_box(&sq.pts, &w(1.0, 1.0, 2.0, 2.0), &mut a, &mut b));
        assert!(!meets_box(&sq.pts, &w(1.5, 0.0, 2.0, 1.0), &mut a, &mut b));
        let tri = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 2.0)];
        assert!(meets_box(&tri, &w(1.0, 1.0, 1.0, 1.0), &mut a, &mut b));
        assert!(!meets_box(&tri, &w(1.01, 1.01, 3.0, 3.0), &mut a, &mut b));
        assert!(meets_box(&tri, &w(0.5, -1.0, 0.5, -0.0), &mut a, &mut b));
    }

    #[test]
    fn halfplane_clip_cuts_square() {
        let sq = Poly::from_window(&w(0.0, 0.0, 2.0, 2.0), 0);
        let mut out = Poly::default();
        clip_halfplane(&sq, &mut out, Point::new(1.0, 1.0), Point::new(1.0, 0.0), 5);
        assert_eq!(out.pts.len(), 4);
        assert!(out.pts.iter().all(|p| p.x <= 1.0 + 1e-15));
        assert_eq!(out.labels.iter().filter(|&&l| l == 5).count(), 1);
    }
}
