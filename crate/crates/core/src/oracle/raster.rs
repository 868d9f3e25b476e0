use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::naive::naive_voronoi;
use crate::geom::{Point, Window};

/// Pixel grid colored by the nearest site of each pixel center.
///
/// Every pixel also stores its clearance: the distance from its center to
/// the nearest cell of the other color.
#[derive(Clone, Debug)]
pub struct RasterField {
    h: f64,
    /// Actual pixel sides: `bounds` divided evenly, each at most `h`.
    hx: f64,
    hy: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    black: Vec<bool>,
    clearance: Vec<f64>,
}

/// Closed region tested on pixel centers.
#[derive(Clone, Copy, Debug)]
pub enum RasterRegion {
    Rect(Window),
    Annulus { center: Point, a: f64, b: f64 },
}

impl RasterRegion {
    fn contains(&self, q: Point) -> bool {
        match *self {
            RasterRegion::Rect(w) => w.contains_point(q),
            RasterRegion::Annulus { center, a, b } => {
                let d = (q.x - center.x).abs().max((q.y - center.y).abs());
                a <= d && d <= b
            }
        }
    }
}

/// A raster decision and how far it is from being ambiguous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RasterVerdict {
    pub connected: bool,
    /// Absolute value of the best achievable minimum signed clearance along
    /// a pixel path between the targets. Below `h·√2/2` the raster and the
    /// exact answer may legitimately differ.
    pub clearance: f64,
}

struct Buckets {
    lo: Point,
    cs: f64,
    nx: usize,
    ny: usize,
    items: Vec<Vec<u32>>,
}

impl Buckets {
    fn new(pts: &[Point], bounds: &Window) -> Self {
        let (mut lo, mut hi) = (bounds.lo(), bounds.hi());
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let area = ((hi.x - lo.x) * (hi.y - lo.y)).max(1e-12);
        let cs = (area / pts.len().max(1) as f64).sqrt().max(1e-9);
        let nx = ((hi.x - lo.x) / cs).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cs).floor() as usize + 1;
        let mut items = vec![Vec::new(); nx * ny];
        let mut b = Buckets { lo, cs, nx, ny, items: Vec::new() };
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = b.cell(*p);
            items[y * nx + x].push(i as u32);
        }
        b.items = items;
        b
    }

    fn cell(&self, p: Point) -> (usize, usize) {
        let x = (((p.x - self.lo.x) / self.cs).floor().max(0.0) as usize).min(self.nx - 1);
        let y = (((p.y - self.lo.y) / self.cs).floor().max(0.0) as usize).min(self.ny - 1);
        (x, y)
    }

    /// Visit sites ring by ring around `q` while `keep_going(lower_bound)`
    /// holds, where the bound is a lower bound on the distance from `q` to
    /// every site in the remaining rings.
    fn rings(&self, q: Point, mut visit: impl FnMut(u32), keep_going: impl Fn(f64) -> bool) {
        let (cx, cy) = self.cell(q);
        let max_r = self.nx.max(self.ny);
        for r in 0..=max_r {
            let bound = (r as f64 - 1.0).max(0.0) * self.cs;
            if r > 0 && !keep_going(bound) {
                return;
            }
            let (x0, x1) = (cx as i64 - r as i64, cx as i64 + r as i64);
            let (y0, y1) = (cy as i64 - r as i64, cy as i64 + r as i64);
            for y in y0..=y1 {
                if y < 0 || y >= self.ny as i64 {
                    continue;
                }
                for x in x0..=x1 {
                    if x < 0 || x >= self.nx as i64 {
                        continue;
                    }
                    if y != y0 && y != y1 && x != x0 && x != x1 {
                        continue;
                    }
                    for &i in &self.items[y as usize * self.nx + x as usize] {
                        visit(i);
                    }
                }
            }
        }
    }
}

fn inside_convex(poly: &[Point], q: Point) -> bool {
    let k = poly.len();
    k >= 3
        && (0..k).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % k]);
            (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) >= 0.0
        })
}

fn distance_to_polygon(poly: &[Point], q: Point) -> f64 {
    if inside_convex(poly, q) {
        return 0.0;
    }
    let k = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..k {
        let (a, b) = (poly[i], poly[(i + 1) % k]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let l2 = dx * dx + dy * dy;
        let t = if l2 > 0.0 {
            (((q.x - a.x) * dx + (q.y - a.y) * dy) / l2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.min(q.dist(Point::new(a.x + t * dx, a.y + t * dy)));
    }
    best
}

impl RasterField {
    /// Rasterize the coloring `black` of `sites` over `bounds` with pixels
    /// of side at most `h` that tile `bounds` exactly.
    pub fn new(sites: &[Point], black: &[bool], bounds: Window, h: f64) -> Self {
        assert!(h > 0.0 && !sites.is_empty() && sites.len() == black.len());
        let nv = naive_voronoi(sites);
        let buckets = Buckets::new(sites, &bounds);
        let nx = (bounds.width() / h - 1e-9).ceil().max(1.0) as usize;
        let ny = (bounds.height() / h - 1e-9).ceil().max(1.0) as usize;
        let (hx, hy) = (bounds.width() / nx as f64, bounds.height() / ny as f64);
        let origin = bounds.lo();
        let mut color = Vec::with_capacity(nx * ny);
        let mut clearance = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let q = Point::new(origin.x + (i as f64 + 0.5) * hx, origin.y + (j as f64 + 0.5) * hy);
                let best = Cell::new((f64::INFINITY, u32::MAX));
                buckets.rings(
                    q,
                    |s| {
                        let d = sites[s as usize].dist2(q);
                        let b = best.get();
                        if d < b.0 || (d == b.0 && s < b.1) {
                            best.set((d, s));
                        }
                    },
                    |bound| bound * bound <= best.get().0,
                );
                let (d1, own) = best.get();
                let d1 = d1.sqrt();
                let c = black[own as usize];
                let g = Cell::new(f64::INFINITY);
                buckets.rings(
                    q,
                    |s| {
                        let s = s as usize;
                        if black[s] != c && 0.5 * (sites[s].dist(q) - d1) < g.get() {
                            g.set(g.get().min(distance_to_polygon(&nv.cells[s], q)));
                        }
                    },
                    |bound| 0.5 * (bound - d1) < g.get(),
                );
                let g = g.get();
                color.push(c);
                clearance.push(g);
            }
        }
        RasterField {
            h,
            hx,
            hy,
            origin,
            nx,
            ny,
            black: color,
            clearance,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.hx,
            self.origin.y + (j as f64 + 0.5) * self.hy,
        )
    }

    pub fn is_black(&self, i: usize, j: usize) -> bool {
        self.black[j * self.nx + i]
    }

    fn pixel_box(&self, i: usize, j: usize) -> Window {
        let c = self.center(i, j);
        let (rx, ry) = (0.5 * self.hx, 0.5 * self.hy);
        Window::from_bounds(c.x - rx, c.y - ry, c.x + rx, c.y + ry).expect("finite pixel")
    }

    /// Signed clearance for `color`: positive inside that color.
    fn signed(&self, k: usize, color: bool) -> f64 {
        if self.black[k] == color {
            self.clearance[k]
        } else {
            -self.clearance[k]
        }
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Connectivity of `color` pixels inside `region` between pixels touching
/// any box of `a` and pixels touching any box of `b`, with 8-neighbor
/// steps.
pub fn raster_connectivity(
    field: &RasterField,
    region: &RasterRegion,
    color: bool,
    a: &[Window],
    b: &[Window],
) -> RasterVerdict {
    let (nx, ny) = (field.nx, field.ny);
    let n = nx * ny;
    let mut inside = vec![false; n];
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            inside[k] = region.contains(field.center(i, j));
            if inside[k] {
                // Region pixels are those with centers inside, so the
                // outermost ones can stop up to half a pixel short of a
                // target segment.
                let pb = field.pixel_box(i, j).expand(0.5 * field.hx.max(field.hy) + 1e-6 * field.h);
                in_a[k] = a.iter().any(|w| w.intersects(&pb));
                in_b[k] = b.iter().any(|w| w.intersects(&pb));
            }
        }
    }
    let neighbors = |k: usize| {
        let (i, j) = ((k % nx) as i64, (k / nx) as i64);
        let mut out = [usize::MAX; 8];
        let mut m = 0;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (x, y) = (i + di, j + dj);
                if (di, dj) != (0, 0) && x >= 0 && y >= 0 && x < nx as i64 && y < ny as i64 {
                    out[m] = y as usize * nx + x as usize;
                    m += 1;
                }
            }
        }
        (out, m)
    };

    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for k in 0..n {
        if in_a[k] && field.black[k] == color {
            seen[k] = true;
            queue.push_back(k);
        }
    }
    let mut connected = false;
    while let Some(k) = queue.pop_front() {
        if in_b[k] {
            connected = true;
            break;
        }
        let (nb, m) = neighbors(k);
        for &q in &nb[..m] {
            if inside[q] && !seen[q] && field.black[q] == color {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }

    // Widest path: maximize the smallest signed clearance along the path.
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut heap = BinaryHeap::new();
    for k in 0..n {
        if in_a[k] {
            best[k] = field.signed(k, color);
            heap.push(Item(best[k], k));
        }
    }
    let mut width = f64::NEG_INFINITY;
    while let Some(Item(v, k)) = heap.pop() {
        if v < best[k] {
            continue;
        }
        if in_b[k] {
            width = v;
            break;
        }
        let (nb, m) = neighbors(k);
        for &q in &nb[..m] {
            if !inside[q] {
                continue;
            }
            let c = v.min(field.signed(q, color));
            if c > best[q] {
                best[q] = c;
                heap.push(Item(c, q));
            }
        }
    }
    let clearance = if width.is_finite() { width.abs() } else { 0.0 };
    RasterVerdict { connected, clearance }
}

/// Raster circuit of `color` in the square annulus `center + (B_b \ B_a)`:
/// flood the other color from the inner boundary and report whether the
/// outer boundary stays unreached.
pub fn raster_circuit(field: &RasterField, center: Point, a: f64, b: f64, color: bool) -> RasterVerdict {
    let sq = |r: f64| Window::square(center, r).expect("finite square");
    let sides = |w: Window| {
        let (lo, hi) = (w.lo(), w.hi());
        [
            Window::from_bounds(lo.x, lo.y, lo.x, hi.y),
            Window::from_bounds(hi.x, lo.y, hi.x, hi.y),
            Window::from_bounds(lo.x, lo.y, hi.x, lo.y),
            Window::from_bounds(lo.x, hi.y, hi.x, hi.y),
        ]
        .map(|s| s.expect("finite side"))
    };
    let inner = sides(sq(a));
    let outer = sides(sq(b));
    let region = RasterRegion::Annulus { center, a, b };
    let v = raster_connectivity(field, &region, !color, &inner, &outer);
    RasterVerdict {
        connected: !v.connected,
        clearance: v.clearance,
    }
}
