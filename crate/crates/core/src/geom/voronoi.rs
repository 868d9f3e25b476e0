use serde::{Deserialize, Serialize};

use super::clip::{bbox_of, clip_halfplane, Poly};
use super::delaunay::{next, Triangulation, NONE};
use super::{Point, Window};
use crate::error::{Error, Result};

/// Voronoi cells as convex polygons, one per site.
///
/// Interior cells are the polygons of circumcenters of the incident
/// triangles. Cells of hull sites are unbounded; they are stored clipped to
/// a bounding box far outside every sampled region, and the box edges carry
/// the label [`NONE`]. Every other edge carries the index of the neighbor
/// across it. Polygons are counterclockwise and may contain repeated
/// vertices where four or more sites are cocircular.
#[derive(Clone, Debug)]
pub struct VoronoiCells {
    off: Vec<u32>,
    verts: Vec<Point>,
    labels: Vec<u32>,
    bbox: Vec<Window>,
    bounded: Vec<bool>,
    big_box: Window,
}

impl VoronoiCells {
    pub(crate) fn build(pts: &[Point], tri: &Triangulation, extent: Option<Window>) -> Self {
        let n = pts.len();
        let big_box = big_box(pts, extent);
        let mut cells = VoronoiCells {
            off: Vec::with_capacity(n + 1),
            verts: Vec::with_capacity(6 * n + 16),
            labels: Vec::with_capacity(6 * n + 16),
            bbox: Vec::with_capacity(n),
            bounded: vec![true; n],
            big_box,
        };
        cells.off.push(0);
        if !tri.is_degenerate() {
            for &h in tri.hull() {
                cells.bounded[h as usize] = false;
            }
        } else {
            cells.bounded.iter_mut().for_each(|b| *b = false);
        }

        let mut cw_c: Vec<Point> = Vec::with_capacity(16);
        let mut cw_w: Vec<u32> = Vec::with_capacity(16);
        let mut b = Poly::default();
        let tris = tri.triangles();
        let he = tri.halfedges();
        let cc = tri.circumcenters();
        for v in 0..n {
            if cells.bounded[v] {
                cw_c.clear();
                cw_w.clear();
                let e0 = tri.inedge()[v] as usize;
                let mut e = e0;
                loop {
                    cw_c.push(cc[e / 3]);
                    let out = next(e);
                    cw_w.push(tris[next(out)]);
                    e = he[out] as usize;
                    if e == e0 {
                        break;
                    }
                }
                let k = cw_c.len();
                for i in 0..k {
                    cells.verts.push(cw_c[k - 1 - i]);
                    cells.labels.push(cw_w[(2 * k - 2 - i) % k]);
                }
            } else {
                let mut a = Poly::from_window(&big_box, NONE);
                let z = pts[v];
                for &w in tri.neighbors(v) {
                    let q = pts[w as usize];
                    let m = Point::new(0.5 * (z.x + q.x), 0.5 * (z.y + q.y));
                    let d = Point::new(q.x - z.x, q.y - z.y);
                    clip_halfplane(&a, &mut b, m, d, w);
                    std::mem::swap(&mut a, &mut b);
                }
                cells.verts.extend_from_slice(&a.pts);
                cells.labels.extend_from_slice(&a.labels);
            }
            let s = *cells.off.last().unwrap() as usize;
            let bb = bbox_of(&cells.verts[s..]).unwrap_or_else(|| Window::from_bounds_unchecked(0.0, 0.0, 0.0, 0.0));
            cells.bbox.push(bb);
            cells.off.push(cells.verts.len() as u32);
        }
        cells
    }

    pub fn len(&self) -> usize {
        self.bbox.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bbox.is_empty()
    }

    pub fn vertices(&self, v: usize) -> &[Point] {
        &self.verts[self.off[v] as usize..self.off[v + 1] as usize]
    }

    /// Per-edge neighbor labels, aligned with [`vertices`](Self::vertices):
    /// entry `i` labels the edge from vertex `i` to vertex `i + 1`.
    pub fn labels(&self, v: usize) -> &[u32] {
        &self.labels[self.off[v] as usize..self.off[v + 1] as usize]
    }

    pub fn bbox(&self, v: usize) -> &Window {
        &self.bbox[v]
    }

    /// False for cells that extend to infinity.
    pub fn is_bounded(&self, v: usize) -> bool {
        self.bounded[v]
    }

    /// The box unbounded cells are clipped to.
    pub fn big_box(&self) -> &Window {
        &self.big_box
    }

    /// The cell of `v` as a list of facets, with unbounded facets as rays or
    /// lines.
    pub fn cell_view(&self, pts: &[Point], v: usize) -> VoronoiCellView {
        let verts = self.vertices(v);
        let labels = self.labels(v);
        let k = verts.len();
        let on_box = |p: &Point| {
            let (lo, hi) = (self.big_box.lo(), self.big_box.hi());
            p.x == lo.x || p.x == hi.x || p.y == lo.y || p.y == hi.y
        };
        let mut facets = Vec::new();
        for i in 0..k {
            let w = labels[i];
            if w == NONE {
                continue;
            }
            let (a, b) = (verts[i], verts[(i + 1) % k]);
            let bounded = self.bounded[v];
            let shape = match (bounded || !on_box(&a), bounded || !on_box(&b)) {
                (true, true) => FacetShape::Segment { a, b },
                (true, false) => FacetShape::Ray {
                    origin: a,
                    direction: unit(a, b),
                },
                (false, true) => FacetShape::Ray {
                    origin: b,
                    direction: unit(b, a),
                },
                (false, false) => {
                    let (z, q) = (pts[v], pts[w as usize]);
                    FacetShape::Line {
                        point: Point::new(0.5 * (z.x + q.x), 0.5 * (z.y + q.y)),
                        direction: unit(a, b),
                    }
                }
            };
            facets.push(Facet { neighbor: w, shape });
        }
        VoronoiCellView { site: v as u32, facets }
    }
}

fn unit(a: Point, b: Point) -> Point {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l = (dx * dx + dy * dy).sqrt();
    Point::new(dx / l, dy / l)
}

fn big_box(pts: &[Point], extent: Option<Window>) -> Window {
    let sites = bbox_of(pts);
    // Explicit configurations have no sampled extent, so queries may reach
    // far beyond the sites.
    let (base, reach) = match (sites, extent) {
        (Some(s), Some(e)) => (s.union_bounds(&e), 1.0),
        (Some(s), None) => (s, 1000.0),
        (None, Some(e)) => (e, 1.0),
        (None, None) => (Window::from_bounds_unchecked(-1.0, -1.0, 1.0, 1.0), 1.0),
    };
    let diam = (base.width() * base.width() + base.height() * base.height()).sqrt();
    base.expand(reach * (diam + 1.0))
}

/// Geometry of one facet of a Voronoi cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FacetShape {
    Segment { a: Point, b: Point },
    Ray { origin: Point, direction: Point },
    Line { point: Point, direction: Point },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub neighbor: u32,
    pub shape: FacetShape,
}

/// A Voronoi cell described by its facets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCellView {
    pub site: u32,
    pub facets: Vec<Facet>,
}

/// Index of the site nearest to `q` and its distance; ties go to the lowest
/// index.
pub fn nearest_site(pts: &[Point], tri: &Triangulation, q: Point) -> Result<(usize, f64)> {
    if pts.is_empty() {
        return Err(Error::EmptySample);
    }
    if tri.is_degenerate() {
        let mut best = (0usize, pts[0].dist2(q));
        for (i, p) in pts.iter().enumerate().skip(1) {
            let d = p.dist2(q);
            if d < best.1 {
                best = (i, d);
            }
        }
        return Ok((best.0, best.1.sqrt()));
    }
    // Greedy descent on the Delaunay graph reaches the nearest site; then
    // move to lower-index sites at equal distance (all tied sites are on one
    // empty circle and the lowest one is adjacent to the others).
    let mut v = tri.hull()[0] as usize;
    let mut dv = pts[v].dist2(q);
    loop {
        let mut moved = false;
        for &w in tri.neighbors(v) {
            let d = pts[w as usize].dist2(q);
            if d < dv || (d == dv && (w as usize) < v) {
                v = w as usize;
                dv = d;
                moved = true;
            }
        }
        if !moved {
            return Ok((v, dv.sqrt()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::delaunay::triangulate;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn area(poly: &[Point]) -> f64 {
        let k = poly.len();
        (0..k)
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % k]);
                a.x * b.y - a.y * b.x
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn interior_cell_is_ccw_and_labelled_by_bisectors() {
        let pts = vec![p(0.0, 0.0), p(2.0, 0.1), p(-1.9, 0.2), p(0.1, 2.0), p(0.2, -2.1), p(1.5, 1.6), p(-1.4, -1.3)];
        let tri = triangulate(&pts).unwrap();
        let cells = VoronoiCells::build(&pts, &tri, None);
        assert!(cells.is_bounded(0));
        let verts = cells.vertices(0);
        assert!(area(verts) > 0.0);
        for (i, &w) in cells.labels(0).iter().enumerate() {
            let (a, b) = (verts[i], verts[(i + 1) % verts.len()]);
            for x in [a, b] {
                let d0 = x.dist(pts[0]);
                let dw = x.dist(pts[w as usize]);
                assert!((d0 - dw).abs() <= 1e-9 * d0.max(1.0));
            }
        }
    }

    #[test]
    fn hull_cells_have_rays() {
        let pts = vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
        let tri = triangulate(&pts).unwrap();
        let cells = VoronoiCells::build(&pts, &tri, None);
        let view = cells.cell_view(&pts, 0);
        assert_eq!(view.facets.len(), 2);
        assert!(view.facets.iter().all(|f| matches!(f.shape, FacetShape::Ray { .. })));
        assert!(area(cells.vertices(0)) > 0.0);
    }

    #[test]
    fn two_sites_split_the_plane() {
        let pts = vec![p(-1.0, 0.0), p(1.0, 0.0)];
        let tri = triangulate(&pts).unwrap();
        let cells = VoronoiCells::build(&pts, &tri, None);
        assert!(cells.vertices(0).iter().all(|v| v.x <= 0.0));
        assert!(cells.vertices(1).iter().all(|v| v.x >= 0.0));
        let view = cells.cell_view(&pts, 0);
        assert!(matches!(view.facets[..], [Facet { neighbor: 1, shape: FacetShape::Line { .. } }]));
    }

    #[test]
    fn nearest_site_ties_to_lowest_index() {
        let pts = vec![p(5.0, 5.0), p(3.0, 0.0), p(-1.0, 0.0), p(0.0, 4.0), p(-3.0, -3.0), p(1.0, 0.0)];
        let tri = triangulate(&pts).unwrap();
        assert_eq!(nearest_site(&pts, &tri, p(0.0, 0.0)).unwrap(), (2, 1.0));
        assert_eq!(nearest_site(&pts, &tri, p(5.0, 5.0)).unwrap().0, 0);
        let one = vec![p(1.0, 1.0)];
        let t1 = triangulate(&one).unwrap();
        let (i, d) = nearest_site(&one, &t1, p(4.0, 5.0)).unwrap();
        assert_eq!((i, d), (0, 5.0));
        assert!(matches!(nearest_site(&[], &triangulate(&[]).unwrap(), p(0.0, 0.0)), Err(Error::EmptySample)));
    }
}
