//! Sweep-hull Delaunay triangulation with exact predicates.
//!
//! Sites are inserted in order of distance from the circumcenter of a seed
//! triangle; each new site sees a contiguous chain of hull edges, gets fanned
//! to them, and is legalized by Lawson flips. A point that sees no hull edge
//! strictly (it lies on the hull or, after rounding in the sort key, inside
//! it) is inserted by splitting the containing triangle or edge.
//!
//! Cocircular degeneracies are made canonical afterwards: every maximal
//! group of triangles sharing one circumcircle is re-triangulated as a fan
//! from its lowest-index site.
//!
//! Triangles are counterclockwise. Halfedge `e` runs from `triangles[e]` to
//! `triangles[next(e)]`; `halfedges[e]` is its twin or [`NONE`].

use std::collections::HashMap;

use super::predicates::{circumcenter, circumradius2, incircle, orient2d};
use super::{PointSample, Point};
use crate::dsu::DisjointSet;
use crate::error::{Error, Result};

pub const NONE: u32 = u32::MAX;

#[inline]
pub(crate) fn next(e: usize) -> usize {
    if e % 3 == 2 {
        e - 2
    } else {
        e + 1
    }
}

#[inline]
pub(crate) fn prev(e: usize) -> usize {
    if e.is_multiple_of(3) {
        e + 2
    } else {
        e - 1
    }
}

/// Four or more sites on one empty circle. Their cells meet at `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexGroup {
    pub center: Point,
    /// Site indices, ascending.
    pub sites: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub struct Triangulation {
    n: usize,
    triangles: Vec<u32>,
    halfedges: Vec<u32>,
    hull: Vec<u32>,
    inedge: Vec<u32>,
    adj_off: Vec<u32>,
    adj: Vec<u32>,
    circumcenters: Vec<Point>,
    groups: Vec<VertexGroup>,
    degenerate: bool,
}

impl Triangulation {
    pub fn num_sites(&self) -> usize {
        self.n
    }

    /// Flat list of counterclockwise triangles, three site indices each.
    pub fn triangles(&self) -> &[u32] {
        &self.triangles
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len() / 3
    }

    pub fn halfedges(&self) -> &[u32] {
        &self.halfedges
    }

    /// Convex hull in counterclockwise order; for degenerate input, the
    /// sites in lexicographic order.
    pub fn hull(&self) -> &[u32] {
        &self.hull
    }

    /// An incoming halfedge per site, preferring hull edges.
    pub(crate) fn inedge(&self) -> &[u32] {
        &self.inedge
    }

    /// Delaunay neighbors of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_off[v] as usize..self.adj_off[v + 1] as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    /// All undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    pub fn circumcenters(&self) -> &[Point] {
        &self.circumcenters
    }

    pub fn vertex_groups(&self) -> &[VertexGroup] {
        &self.groups
    }

    /// Fewer than three sites or all sites collinear: no triangles, and the
    /// adjacency is the lexicographic path.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Delaunay triangulation of a sample's sites.
pub fn delaunay(sample: &PointSample) -> Result<Triangulation> {
    triangulate(sample.sites())
}

fn check_duplicates(pts: &[Point]) -> Result<()> {
    let mut keyed: Vec<(f64, f64, u32)> = pts.iter().enumerate().map(|(i, p)| (p.x, p.y, i as u32)).collect();
    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    for w in keyed.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            return Err(Error::DuplicateSite {
                first: w[0].2 as usize,
                second: w[1].2 as usize,
            });
        }
    }
    Ok(())
}

pub(crate) fn triangulate(pts: &[Point]) -> Result<Triangulation> {
    check_duplicates(pts)?;
    match seed_triangle(pts) {
        None => Ok(degenerate(pts)),
        Some(seed) => {
            let mut b = Builder::new(pts, seed);
            b.run();
            Ok(b.finish())
        }
    }
}

fn degenerate(pts: &[Point]) -> Triangulation {
    let n = pts.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (p, q) = (pts[a as usize], pts[b as usize]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
    });
    let mut lists = vec![Vec::new(); n];
    for w in order.windows(2) {
        lists[w[0] as usize].push(w[1]);
        lists[w[1] as usize].push(w[0]);
    }
    let (adj_off, adj) = csr(lists);
    Triangulation {
        n,
        hull: order,
        inedge: vec![NONE; n],
        adj_off,
        adj,
        degenerate: true,
        ..Default::default()
    }
}

fn csr(mut lists: Vec<Vec<u32>>) -> (Vec<u32>, Vec<u32>) {
    let mut off = Vec::with_capacity(lists.len() + 1);
    let mut flat = Vec::new();
    off.push(0);
    for l in &mut lists {
        l.sort_unstable();
        l.dedup();
        flat.extend_from_slice(l);
        off.push(flat.len() as u32);
    }
    (off, flat)
}

/// Sorted, deduplicated adjacency lists from directed pairs.
fn csr_from_pairs(n: usize, pairs: &[(u32, u32)]) -> (Vec<u32>, Vec<u32>) {
    let mut start = vec![0u32; n + 1];
    for &(u, _) in pairs {
        start[u as usize + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut flat = vec![0u32; pairs.len()];
    for &(u, v) in pairs {
        flat[fill[u as usize] as usize] = v;
        fill[u as usize] += 1;
    }
    let mut off = Vec::with_capacity(n + 1);
    off.push(0);
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (start[i] as usize, start[i + 1] as usize);
        flat[a..b].sort_unstable();
        for r in a..b {
            if r == a || flat[r] != flat[r - 1] {
                flat[w] = flat[r];
                w += 1;
            }
        }
        off.push(w as u32);
    }
    flat.truncate(w);
    (off, flat)
}

fn seed_triangle(pts: &[Point]) -> Option<[usize; 3]> {
    if pts.len() < 3 {
        return None;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let c = Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let argmin = |f: &dyn Fn(usize) -> f64| {
        let mut best = (f64::INFINITY, usize::MAX);
        for i in 0..pts.len() {
            let d = f(i);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    };
    let i0 = argmin(&|i| pts[i].dist2(c));
    let i1 = argmin(&|i| if i == i0 { f64::INFINITY } else { pts[i].dist2(pts[i0]) });
    let (p0, p1) = (pts[i0], pts[i1]);
    let mut best: Option<(f64, usize)> = None;
    for (i, &p) in pts.iter().enumerate() {
        if i == i0 || i == i1 || orient2d(p0, p1, p) == 0.0 {
            continue;
        }
        let r = circumradius2(p0, p1, p);
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, i));
        }
    }
    let (_, i2) = best?;
    if orient2d(p0, p1, pts[i2]) > 0.0 {
        Some([i0, i1, i2])
    } else {
        Some([i0, i2, i1])
    }
}

struct Builder<'a> {
    pts: &'a [Point],
    triangles: Vec<u32>,
    halfedges: Vec<u32>,
    hull_prev: Vec<u32>,
    hull_next: Vec<u32>,
    hull_tri: Vec<u32>,
    hull_hash: Vec<u32>,
    hull_start: usize,
    center: Point,
    seed: [usize; 3],
}

fn pseudo_angle(dx: f64, dy: f64) -> f64 {
    let p = dx / (dx.abs() + dy.abs());
    if dy > 0.0 {
        (3.0 - p) / 4.0
    } else {
        (1.0 + p) / 4.0
    }
}

impl<'a> Builder<'a> {
    fn new(pts: &'a [Point], seed: [usize; 3]) -> Self {
        let n = pts.len();
        let hash_size = ((n as f64).sqrt().ceil() as usize).max(1);
        let max_tri = 2 * n.saturating_sub(2).max(1);
        let [a, b, c] = seed;
        Builder {
            pts,
            triangles: Vec::with_capacity(3 * max_tri),
            halfedges: Vec::with_capacity(3 * max_tri),
            hull_prev: vec![NONE; n],
            hull_next: vec![NONE; n],
            hull_tri: vec![NONE; n],
            hull_hash: vec![NONE; hash_size],
            hull_start: a,
            center: circumcenter(pts[a], pts[b], pts[c]),
            seed,
        }
    }

    fn hash_key(&self, p: Point) -> usize {
        let size = self.hull_hash.len();
        let a = pseudo_angle(p.x - self.center.x, p.y - self.center.y);
        let k = (a * size as f64).floor();
        if k.is_finite() && k >= 0.0 {
            (k as usize) % size
        } else {
            0
        }
    }

    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        orient2d(self.pts[a], self.pts[b], self.pts[c])
    }

    fn link(&mut self, a: usize, b: u32) {
        self.halfedges[a] = b;
        if b != NONE {
            self.halfedges[b as usize] = a as u32;
        }
    }

    fn add_triangle(&mut self, i0: usize, i1: usize, i2: usize, a: u32, b: u32, c: u32) -> usize {
        let t = self.triangles.len();
        self.triangles.extend_from_slice(&[i0 as u32, i1 as u32, i2 as u32]);
        self.halfedges.extend_from_slice(&[NONE, NONE, NONE]);
        self.link(t, a);
        self.link(t + 1, b);
        self.link(t + 2, c);
        t
    }

    fn set_triangle(&mut self, t: usize, [i0, i1, i2]: [usize; 3], [a, b, c]: [u32; 3]) {
        self.triangles[t] = i0 as u32;
        self.triangles[t + 1] = i1 as u32;
        self.triangles[t + 2] = i2 as u32;
        self.link(t, a);
        self.link(t + 1, b);
        self.link(t + 2, c);
    }

    /// Flip `a` (an edge opposite the newest point) while its far vertex is
    /// strictly inside the circumcircle, recursing on the two new edges.
    /// Returns the edge leaving the new point in the last triangle visited
    /// on the right-hand chain; for hull insertions this is the new hull
    /// edge.
    fn legalize(&mut self, a: usize) -> usize {
        let b = self.halfedges[a];
        let ar = prev(a);
        if b == NONE {
            return ar;
        }
        let b = b as usize;
        let al = next(a);
        let bl = prev(b);
        let p0 = self.triangles[ar] as usize;
        let pr = self.triangles[a] as usize;
        let pl = self.triangles[al] as usize;
        let p1 = self.triangles[bl] as usize;
        let pts = self.pts;
        if incircle(pts[pr], pts[pl], pts[p0], pts[p1]) <= 0.0 {
            return ar;
        }
        self.triangles[a] = p1 as u32;
        self.triangles[b] = p0 as u32;
        let hbl = self.halfedges[bl];
        let har = self.halfedges[ar];
        if hbl == NONE {
            self.fix_hull_tri(bl, a);
        }
        self.link(a, hbl);
        self.link(b, har);
        self.link(ar, bl as u32);
        let br = next(b);
        self.legalize(a);
        self.legalize(br)
    }

    fn fix_hull_tri(&mut self, old: usize, new: usize) {
        let v = self.triangles[old] as usize;
        if self.hull_tri[v] == old as u32 {
            self.hull_tri[v] = new as u32;
            return;
        }
        let mut e = self.hull_start;
        loop {
            if self.hull_tri[e] == old as u32 {
                self.hull_tri[e] = new as u32;
                return;
            }
            e = self.hull_prev[e] as usize;
            if e == self.hull_start {
                return;
            }
        }
    }

    fn run(&mut self) {
        let pts = self.pts;
        let n = pts.len();
        let [i0, i1, i2] = self.seed;
        self.hull_next[i0] = i1 as u32;
        self.hull_prev[i1] = i0 as u32;
        self.hull_next[i1] = i2 as u32;
        self.hull_prev[i2] = i1 as u32;
        self.hull_next[i2] = i0 as u32;
        self.hull_prev[i0] = i2 as u32;
        self.hull_tri[i0] = 0;
        self.hull_tri[i1] = 1;
        self.hull_tri[i2] = 2;
        for &i in &self.seed {
            let k = self.hash_key(pts[i]);
            self.hull_hash[k] = i as u32;
        }
        self.add_triangle(i0, i1, i2, NONE, NONE, NONE);

        let c = self.center;
        let mut order: Vec<(f64, u32)> = (0..n as u32)
            .filter(|&i| !self.seed.contains(&(i as usize)))
            .map(|i| (pts[i as usize].dist2(c), i))
            .collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        for &(_, i) in &order {
            self.insert(i as usize);
        }
    }

    fn insert(&mut self, i: usize) {
        let p = self.pts[i];
        let size = self.hull_hash.len();
        let key = self.hash_key(p);
        let mut start = self.hull_start;
        for j in 0..size {
            let s = self.hull_hash[(key + j) % size];
            if s != NONE && self.hull_next[s as usize] != s {
                start = s as usize;
                break;
            }
        }
        let start = self.hull_prev[start] as usize;
        let mut e = start;
        loop {
            let q = self.hull_next[e] as usize;
            if self.orient(e, q, i) < 0.0 {
                break;
            }
            e = q;
            if e == start {
                self.insert_inside(i);
                return;
            }
        }

        let n0 = self.hull_next[e] as usize;
        let t = self.add_triangle(e, i, n0, NONE, NONE, self.hull_tri[e]);
        self.hull_tri[i] = self.legalize(t + 2) as u32;
        self.hull_tri[e] = t as u32;

        let mut n = n0;
        loop {
            let q = self.hull_next[n] as usize;
            if self.orient(n, q, i) >= 0.0 {
                break;
            }
            let t = self.add_triangle(n, i, q, self.hull_tri[i], NONE, self.hull_tri[n]);
            self.hull_tri[i] = self.legalize(t + 2) as u32;
            self.hull_next[n] = n as u32;
            n = q;
        }

        if e == start {
            loop {
                let q = self.hull_prev[e] as usize;
                if self.orient(q, e, i) >= 0.0 {
                    break;
                }
                let t = self.add_triangle(q, i, e, NONE, self.hull_tri[e], self.hull_tri[q]);
                self.legalize(t + 2);
                self.hull_tri[q] = t as u32;
                self.hull_next[e] = e as u32;
                e = q;
            }
        }

        self.hull_start = e;
        self.hull_prev[i] = e as u32;
        self.hull_next[e] = i as u32;
        self.hull_prev[n] = i as u32;
        self.hull_next[i] = n as u32;
        let k = self.hash_key(p);
        self.hull_hash[k] = i as u32;
        let k = self.hash_key(self.pts[e]);
        self.hull_hash[k] = e as u32;
    }

    /// Insert a point lying in the closed hull by splitting the triangle or
    /// edge that contains it.
    fn insert_inside(&mut self, i: usize) {
        let pts = self.pts;
        let p = pts[i];
        let ntri = self.triangles.len() / 3;
        for t in 0..ntri {
            let t3 = 3 * t;
            let v = [
                self.triangles[t3] as usize,
                self.triangles[t3 + 1] as usize,
                self.triangles[t3 + 2] as usize,
            ];
            let o = [
                orient2d(pts[v[0]], pts[v[1]], p),
                orient2d(pts[v[1]], pts[v[2]], p),
                orient2d(pts[v[2]], pts[v[0]], p),
            ];
            if o.iter().any(|&x| x < 0.0) {
                continue;
            }
            match o.iter().position(|&x| x == 0.0) {
                None => self.split_triangle(t3, i),
                Some(k) => self.split_edge(t3 + k, i),
            }
            self.rebuild_hull_tri();
            return;
        }
        // Unreachable for duplicate-free input: a point that sees no hull
        // edge lies in the closed hull.
        debug_assert!(false, "point {i} not located");
    }

    fn split_triangle(&mut self, t: usize, i: usize) {
        let (a, b, c) = (
            self.triangles[t] as usize,
            self.triangles[t + 1] as usize,
            self.triangles[t + 2] as usize,
        );
        let (ha, hb, hc) = (self.halfedges[t], self.halfedges[t + 1], self.halfedges[t + 2]);
        self.set_triangle(t, [a, b, i], [ha, NONE, NONE]);
        let t1 = self.add_triangle(b, c, i, hb, NONE, (t + 1) as u32);
        let t2 = self.add_triangle(c, a, i, hc, (t + 2) as u32, (t1 + 1) as u32);
        self.legalize(t);
        self.legalize(t1);
        self.legalize(t2);
    }

    /// Split along halfedge `h`, which contains point `i` in its interior.
    fn split_edge(&mut self, h: usize, i: usize) {
        let t = h - h % 3;
        let u = self.triangles[h] as usize;
        let v = self.triangles[next(h)] as usize;
        let w = self.triangles[prev(h)] as usize;
        let x1 = self.halfedges[next(h)];
        let x2 = self.halfedges[prev(h)];
        let twin = self.halfedges[h];
        // (u, i, w) replaces t; (i, v, w) is new.
        self.set_triangle(t, [u, i, w], [NONE, NONE, x2]);
        let ta = self.add_triangle(i, v, w, NONE, x1, (t + 1) as u32);
        if twin == NONE {
            self.legalize(t + 2);
            self.legalize(ta + 1);
            return;
        }
        let h2 = twin as usize;
        let t2 = h2 - h2 % 3;
        let z = self.triangles[prev(h2)] as usize;
        let y1 = self.halfedges[next(h2)];
        let y2 = self.halfedges[prev(h2)];
        // (v, i, z) replaces t2; (i, u, z) is new.
        self.set_triangle(t2, [v, i, z], [ta as u32, NONE, y2]);
        let tb = self.add_triangle(i, u, z, t as u32, y1, (t2 + 1) as u32);
        self.legalize(t + 2);
        self.legalize(ta + 1);
        self.legalize(t2 + 2);
        self.legalize(tb + 1);
    }

    fn rebuild_hull_tri(&mut self) {
        for e in 0..self.halfedges.len() {
            if self.halfedges[e] == NONE {
                let v = self.triangles[e] as usize;
                let w = self.triangles[next(e)];
                self.hull_tri[v] = e as u32;
                self.hull_next[v] = w;
                self.hull_prev[w as usize] = v as u32;
            }
        }
    }

    fn finish(mut self) -> Triangulation {
        let n = self.pts.len();
        let mut hull = Vec::new();
        let mut e = self.hull_start;
        loop {
            hull.push(e as u32);
            e = self.hull_next[e] as usize;
            if e == self.hull_start || hull.len() > n {
                break;
            }
        }
        let groups = canonicalize_cocircular(self.pts, &mut self.triangles, &mut self.halfedges);
        let ntri = self.triangles.len() / 3;
        let mut circumcenters: Vec<Point> = (0..ntri)
            .map(|t| {
                let v = &self.triangles[3 * t..3 * t + 3];
                circumcenter(self.pts[v[0] as usize], self.pts[v[1] as usize], self.pts[v[2] as usize])
            })
            .collect();
        let mut vgroups = Vec::with_capacity(groups.len());
        for (tris, mut sites) in groups {
            let center = circumcenters[tris[0] as usize];
            for &t in &tris {
                circumcenters[t as usize] = center;
            }
            sites.sort_unstable();
            vgroups.push(VertexGroup { center, sites });
        }
        vgroups.sort_by(|a, b| a.sites.cmp(&b.sites));

        let mut inedge = vec![NONE; n];
        let mut pairs = Vec::with_capacity(self.triangles.len() + hull.len());
        for e in 0..self.triangles.len() {
            let u = self.triangles[e];
            let v = self.triangles[next(e)];
            pairs.push((u, v));
            let hull_edge = self.halfedges[e] == NONE;
            if hull_edge {
                pairs.push((v, u));
            }
            if hull_edge || inedge[v as usize] == NONE {
                inedge[v as usize] = e as u32;
            }
        }
        let (adj_off, adj) = csr_from_pairs(n, &pairs);
        Triangulation {
            n,
            triangles: self.triangles,
            halfedges: self.halfedges,
            hull,
            inedge,
            adj_off,
            adj,
            circumcenters,
            groups: vgroups,
            degenerate: false,
        }
    }
}

/// Re-triangulate every maximal group of triangles with a common
/// circumcircle as a fan from the group's lowest-index site. Returns the
/// groups of four or more sites as (triangle ids, site ids).
fn canonicalize_cocircular(
    pts: &[Point],
    triangles: &mut [u32],
    halfedges: &mut [u32],
) -> Vec<(Vec<u32>, Vec<u32>)> {
    let ntri = triangles.len() / 3;
    let mut dsu: Option<DisjointSet> = None;
    for e in 0..halfedges.len() {
        let f = halfedges[e];
        if f == NONE || (f as usize) < e {
            continue;
        }
        let a = pts[triangles[e] as usize];
        let b = pts[triangles[next(e)] as usize];
        let c = pts[triangles[prev(e)] as usize];
        let d = pts[triangles[prev(f as usize)] as usize];
        if incircle(a, b, c, d) == 0.0 {
            dsu.get_or_insert_with(|| DisjointSet::new(ntri)).union(e / 3, f as usize / 3);
        }
    }
    let Some(mut dsu) = dsu else {
        return Vec::new();
    };

    let mut members: HashMap<usize, Vec<u32>> = HashMap::new();
    for t in 0..ntri {
        let r = dsu.find(t);
        members.entry(r).or_default().push(t as u32);
    }
    let mut groups: Vec<Vec<u32>> = members.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();

    let mut out = Vec::with_capacity(groups.len());
    for tris in groups {
        let root = dsu.find(tris[0] as usize);
        let mut succ: HashMap<u32, u32> = HashMap::new();
        for &t in &tris {
            for k in 0..3 {
                let e = 3 * t as usize + k;
                let f = halfedges[e];
                if f == NONE || dsu.find(f as usize / 3) != root {
                    succ.insert(triangles[e], triangles[next(e)]);
                }
            }
        }
        let v0 = *succ.keys().min().expect("non-empty group");
        let mut poly = vec![v0];
        let mut v = succ[&v0];
        while v != v0 {
            poly.push(v);
            v = succ[&v];
        }
        debug_assert_eq!(poly.len(), tris.len() + 2);
        for (k, &t) in tris.iter().enumerate() {
            let t = 3 * t as usize;
            triangles[t] = v0;
            triangles[t + 1] = poly[k + 1];
            triangles[t + 2] = poly[k + 2];
        }
        out.push((tris, poly));
    }

    let mut map: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len());
    for e in 0..triangles.len() {
        map.insert((triangles[e], triangles[next(e)]), e as u32);
    }
    for e in 0..triangles.len() {
        halfedges[e] = map
            .get(&(triangles[next(e)], triangles[e]))
            .copied()
            .unwrap_or(NONE);
    }
    out
}
