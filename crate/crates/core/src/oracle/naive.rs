use crate::dsu::DisjointSet;
use crate::geom::{incircle, orient2d, Point, Window};

/// How two cells meet.
#[derive(Clone, Debug, PartialEq)]
pub enum FacetKind {
    /// A shared edge of positive length.
    Segment,
    /// A single shared point where four or more sites are cocircular.
    /// `group` lists every site on that circle, ascending.
    Vertex { group: Vec<u32> },
}

/// The closed set shared by two cells. Unbounded ends are replaced by points
/// far outside the sites' bounding box.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveFacet {
    pub sites: (u32, u32),
    pub kind: FacetKind,
    pub a: Point,
    pub b: Point,
}

impl NaiveFacet {
    /// Whether the pair is a Delaunay edge under the lowest-index fan rule.
    pub fn is_edge(&self) -> bool {
        match &self.kind {
            FacetKind::Segment => true,
            FacetKind::Vertex { group } => group[0] == self.sites.0 || group[0] == self.sites.1,
        }
    }
}

/// Output of [`naive_voronoi`].
#[derive(Clone, Debug)]
pub struct NaiveVoronoi {
    /// Sorted neighbor lists under the lowest-index fan rule.
    pub adjacency: Vec<Vec<u32>>,
    /// Every pair of touching cells, including pairs meeting in one point.
    pub facets: Vec<NaiveFacet>,
    /// Cells as counterclockwise polygons, clipped to `frame`.
    pub cells: Vec<Vec<Point>>,
    pub frame: Window,
}

fn circle_center(a: Point, b: Point, c: Point) -> Point {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let a2 = a.x * a.x + a.y * a.y;
    let b2 = b.x * b.x + b.y * b.y;
    let c2 = c.x * c.x + c.y * c.y;
    Point::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    )
}

fn strictly_between(z: Point, w: Point, u: Point) -> bool {
    let inx = (z.x.min(w.x)..=z.x.max(w.x)).contains(&u.x);
    let iny = (z.y.min(w.y)..=z.y.max(w.y)).contains(&u.y);
    inx && iny && u != z && u != w
}

/// Exact classification of the shared set of cells `z` and `w`.
///
/// Centers of circles through `z` and `w` run along the bisector. Each
/// other site bounds the admissible centers from one side; the extreme
/// bounds on the two sides are found with `incircle`, and their comparison
/// decides between a segment, a single point and no contact.
fn classify(pts: &[Point], z: usize, w: usize, far: f64) -> Option<NaiveFacet> {
    let (pz, pw) = (pts[z], pts[w]);
    let mut left: Option<usize> = None;
    let mut right: Option<usize> = None;
    for (u, &pu) in pts.iter().enumerate() {
        if u == z || u == w {
            continue;
        }
        let o = orient2d(pz, pw, pu);
        if o > 0.0 {
            if left.is_none_or(|l| incircle(pz, pw, pts[l], pu) > 0.0) {
                left = Some(u);
            }
        } else if o < 0.0 {
            if right.is_none_or(|r| incircle(pw, pz, pts[r], pu) > 0.0) {
                right = Some(u);
            }
        } else if strictly_between(pz, pw, pu) {
            return None;
        }
    }
    let m = Point::new(0.5 * (pz.x + pw.x), 0.5 * (pz.y + pw.y));
    let (dx, dy) = (pw.x - pz.x, pw.y - pz.y);
    let len = (dx * dx + dy * dy).sqrt();
    let n = Point::new(-dy / len, dx / len);
    let end_left = match left {
        Some(u) => circle_center(pz, pw, pts[u]),
        None => Point::new(m.x + far * n.x, m.y + far * n.y),
    };
    let end_right = match right {
        Some(v) => circle_center(pz, pw, pts[v]),
        None => Point::new(m.x - far * n.x, m.y - far * n.y),
    };
    let sites = (z.min(w) as u32, z.max(w) as u32);
    let (Some(u), Some(v)) = (left, right) else {
        return Some(NaiveFacet {
            sites,
            kind: FacetKind::Segment,
            a: end_right,
            b: end_left,
        });
    };
    let s = incircle(pz, pw, pts[u], pts[v]);
    if s > 0.0 {
        return None;
    }
    if s < 0.0 {
        return Some(NaiveFacet {
            sites,
            kind: FacetKind::Segment,
            a: end_right,
            b: end_left,
        });
    }
    let mut group = vec![z as u32, w as u32];
    for (x, &px) in pts.iter().enumerate() {
        if x == z || x == w {
            continue;
        }
        let o = orient2d(pz, pw, px);
        let on = (o > 0.0 && incircle(pz, pw, pts[u], px) == 0.0)
            || (o < 0.0 && incircle(pw, pz, pts[v], px) == 0.0);
        if on {
            group.push(x as u32);
        }
    }
    group.sort_unstable();
    Some(NaiveFacet {
        sites,
        kind: FacetKind::Vertex { group },
        a: end_left,
        b: end_left,
    })
}

/// Keep the part of `poly` with `(v - m) · d <= 0`.
fn cut(poly: &[Point], m: Point, d: Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let k = poly.len();
    for i in 0..k {
        let p = poly[i];
        let q = poly[(i + 1) % k];
        let fp = (p.x - m.x) * d.x + (p.y - m.y) * d.y;
        let fq = (q.x - m.x) * d.x + (q.y - m.y) * d.y;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
        }
    }
    out
}

/// Voronoi diagram by brute force.
///
/// Each cell is the frame intersected with all bisector half-planes. Sites
/// within twice the cell's radius are candidate neighbors, and each
/// candidate pair is classified exactly.
pub fn naive_voronoi(pts: &[Point]) -> NaiveVoronoi {
    let n = pts.len();
    let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    if let Some(p) = pts.first() {
        (x0, y0, x1, y1) = (p.x, p.y, p.x, p.y);
    }
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0) + 1.0;
    let frame = Window::from_bounds(x0 - 50.0 * span, y0 - 50.0 * span, x1 + 50.0 * span, y1 + 50.0 * span)
        .expect("finite sites");
    let far = 1000.0 * span;
    let (lo, hi) = (frame.lo(), frame.hi());
    let square = vec![lo, Point::new(hi.x, lo.y), hi, Point::new(lo.x, hi.y)];

    let mut cells = Vec::with_capacity(n);
    for (z, &pz) in pts.iter().enumerate() {
        let mut poly = square.clone();
        for (w, &pw) in pts.iter().enumerate() {
            if w != z {
                let m = Point::new(0.5 * (pz.x + pw.x), 0.5 * (pz.y + pw.y));
                poly = cut(&poly, m, Point::new(pw.x - pz.x, pw.y - pz.y));
            }
        }
        cells.push(poly);
    }

    let mut facets = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    for z in 0..n {
        let r = cells[z].iter().map(|q| q.dist(pts[z])).fold(0.0, f64::max);
        let reach = 2.0 * r * (1.0 + 1e-6) + 1e-9;
        for w in z + 1..n {
            if pts[z].dist(pts[w]) > reach {
                continue;
            }
            if let Some(f) = classify(pts, z, w, far) {
                if f.is_edge() {
                    adjacency[z].push(w as u32);
                    adjacency[w].push(z as u32);
                }
                facets.push(f);
            }
        }
    }
    for a in &mut adjacency {
        a.sort_unstable();
    }
    NaiveVoronoi {
        adjacency,
        facets,
        cells,
        frame,
    }
}

/// Delaunay triangles by checking every triple, with cocircular groups
/// fanned from their lowest-index site. Quartic; for small fixtures only.
/// Triangles are returned as sorted triples in sorted order.
pub fn naive_delaunay_triangles(pts: &[Point]) -> Vec<[u32; 3]> {
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, mut b, mut c) = (pts[i], pts[j], pts[k]);
                let o = orient2d(a, b, c);
                if o == 0.0 {
                    continue;
                }
                if o < 0.0 {
                    std::mem::swap(&mut b, &mut c);
                }
                let mut group = vec![i, j, k];
                let mut empty = true;
                for (x, &px) in pts.iter().enumerate() {
                    if x == i || x == j || x == k {
                        continue;
                    }
                    let s = incircle(a, b, c, px);
                    if s > 0.0 {
                        empty = false;
                        break;
                    }
                    if s == 0.0 {
                        group.push(x);
                    }
                }
                if !empty {
                    continue;
                }
                if group.len() > 3 {
                    let center = circle_center(a, b, c);
                    let g0 = *group.iter().min().unwrap();
                    let ang = |x: usize| {
                        let t = (pts[x].y - center.y).atan2(pts[x].x - center.x);
                        let t0 = (pts[g0].y - center.y).atan2(pts[g0].x - center.x);
                        (t - t0).rem_euclid(std::f64::consts::TAU)
                    };
                    group.sort_by(|&x, &y| ang(x).total_cmp(&ang(y)));
                    let pos = |x: usize| group.iter().position(|&g| g == x).unwrap();
                    let mut others: Vec<usize> = [i, j, k].into_iter().filter(|&x| x != g0).collect();
                    if others.len() != 2 {
                        continue;
                    }
                    others.sort_by_key(|&x| pos(x));
                    if pos(others[1]) != pos(others[0]) + 1 {
                        continue;
                    }
                }
                out.push([i as u32, j as u32, k as u32]);
            }
        }
    }
    out
}

fn point_in_convex(poly: &[Point], q: Point) -> bool {
    let k = poly.len();
    if k < 3 {
        return false;
    }
    (0..k).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % k]);
        (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) >= 0.0
    })
}

/// Liang–Barsky test of a closed segment against a closed box.
fn segment_meets_box(a: Point, b: Point, w: &Window) -> bool {
    let (lo, hi) = (w.lo(), w.hi());
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-dx, a.x - lo.x),
        (dx, hi.x - a.x),
        (-dy, a.y - lo.y),
        (dy, hi.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t0 <= t1
}

fn polygon_meets_box(poly: &[Point], w: &Window) -> bool {
    if poly.iter().any(|&p| w.contains_point(p)) {
        return true;
    }
    let (lo, hi) = (w.lo(), w.hi());
    if point_in_convex(poly, lo) || point_in_convex(poly, hi) {
        return true;
    }
    let k = poly.len();
    (0..k).any(|i| segment_meets_box(poly[i], poly[(i + 1) % k], w))
}

fn box_meet(a: &Window, b: &Window) -> Option<Window> {
    let (alo, ahi, blo, bhi) = (a.lo(), a.hi(), b.lo(), b.hi());
    Window::from_bounds(alo.x.max(blo.x), alo.y.max(blo.y), ahi.x.min(bhi.x), ahi.y.min(bhi.y)).ok()
}

/// Components of the closed cells of one color, restricted to the union of
/// closed boxes `pieces`. Returns, for each component, the bit mask of the
/// `targets` it touches (target `i` sets bit `i`).
///
/// Nodes are pairs (site, piece) with the cell meeting the piece; pieces are
/// glued where they meet, and two same-colored cells are joined wherever
/// their shared facet meets a piece.
pub fn naive_components(
    nv: &NaiveVoronoi,
    black: &[bool],
    pieces: &[Window],
    color: bool,
    targets: &[Vec<Window>],
) -> Vec<u64> {
    let n = nv.cells.len();
    let np = pieces.len();
    let id = |z: usize, p: usize| z * np + p;
    let mut present = vec![false; n * np];
    for z in (0..n).filter(|&z| black[z] == color) {
        for (p, piece) in pieces.iter().enumerate() {
            present[id(z, p)] = polygon_meets_box(&nv.cells[z], piece);
        }
    }
    let mut dsu = DisjointSet::new(n * np);
    for p in 0..np {
        for q in p + 1..np {
            let Some(shared) = box_meet(&pieces[p], &pieces[q]) else {
                continue;
            };
            for z in 0..n {
                if present[id(z, p)] && present[id(z, q)] && polygon_meets_box(&nv.cells[z], &shared) {
                    dsu.union(id(z, p), id(z, q));
                }
            }
        }
    }
    for f in &nv.facets {
        let (z, w) = (f.sites.0 as usize, f.sites.1 as usize);
        if black[z] != color || black[w] != color {
            continue;
        }
        for (p, piece) in pieces.iter().enumerate() {
            if present[id(z, p)] && present[id(w, p)] && segment_meets_box(f.a, f.b, piece) {
                dsu.union(id(z, p), id(w, p));
            }
        }
    }
    let mut masks = vec![0u64; n * np];
    for z in 0..n {
        for (p, piece) in pieces.iter().enumerate() {
            if !present[id(z, p)] {
                continue;
            }
            let mut m = 0u64;
            for (t, boxes) in targets.iter().enumerate() {
                let hit = boxes
                    .iter()
                    .filter_map(|b| box_meet(b, piece))
                    .any(|b| polygon_meets_box(&nv.cells[z], &b));
                if hit {
                    m |= 1 << t;
                }
            }
            let r = dsu.find(id(z, p));
            masks[r] |= m;
        }
    }
    let mut out = Vec::new();
    for i in 0..n * np {
        if present[i] && dsu.find(i) == i {
            out.push(masks[i]);
        }
    }
    out
}

/// Whether one component touches both target `a` and target `b`.
pub fn naive_connected(masks: &[u64], a: usize, b: usize) -> bool {
    masks.iter().any(|m| m & (1 << a) != 0 && m & (1 << b) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn two_sites_are_adjacent() {
        let nv = naive_voronoi(&[p(0.0, 0.0), p(1.0, 0.0)]);
        assert_eq!(nv.adjacency, vec![vec![1], vec![0]]);
        assert!(nv.cells[0].iter().all(|q| q.x <= 0.5));
    }

    #[test]
    fn square_corners_meet_in_one_point() {
        let pts = [p(1.0, 1.0), p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
        let nv = naive_voronoi(&pts);
        // The group minimum is 0, so the 0-1 diagonal is the edge.
        assert_eq!(nv.adjacency[0], vec![1, 2, 3]);
        assert_eq!(nv.adjacency[2], vec![0, 1]);
        let v = nv.facets.iter().filter(|f| matches!(f.kind, FacetKind::Vertex { .. })).count();
        assert_eq!(v, 2);
        let tris = naive_delaunay_triangles(&pts);
        assert_eq!(tris, vec![[0, 1, 2], [0, 1, 3]]);
    }

    #[test]
    fn collinear_sites_form_a_path() {
        let nv = naive_voronoi(&[p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.0)]);
        assert_eq!(nv.adjacency, vec![vec![2], vec![2], vec![0, 1]]);
    }

    #[test]
    fn components_of_split_rectangle() {
        let pts = [p(-1.0, 0.0), p(1.0, 0.0)];
        let nv = naive_voronoi(&pts);
        let r = Window::from_bounds(-2.0, -1.0, 2.0, 1.0).unwrap();
        let sides: Vec<Vec<Window>> = [
            (-2.0, -1.0, -2.0, 1.0),
            (2.0, -1.0, 2.0, 1.0),
            (-2.0, -1.0, 2.0, -1.0),
            (-2.0, 1.0, 2.0, 1.0),
        ]
        .iter()
        .map(|&(a, b, c, d)| vec![Window::from_bounds(a, b, c, d).unwrap()])
        .collect();
        let masks = naive_components(&nv, &[true, false], &[r], true, &sides);
        assert_eq!(masks, vec![0b1101]);
        assert!(!naive_connected(&masks, 0, 1));
        assert!(naive_connected(&masks, 2, 3));
    }
}
