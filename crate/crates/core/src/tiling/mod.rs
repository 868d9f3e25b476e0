//! Colored Voronoi tilings and exact connectivity of one color inside a
//! region.
//!
//! Cells are closed, so a point on a facet between a black and a white cell
//! is both black and white. Connectivity of the closed cells of one color
//! restricted to a region is decided on a graph whose nodes are (site,
//! piece) pairs: a cell clipped to a convex piece is convex, hence
//! connected, and two such pieces of cells are glued exactly where they
//! share a point.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSet;
use crate::error::{invalid, Result};
use crate::geom::clip::{clip_box, meets_box, Poly};
use crate::geom::{Geometry, Window, NONE};
use crate::stream::{RandomStream, StreamId};

pub use crate::geom::Region;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Black => "black",
            Color::White => "white",
        })
    }
}

/// A geometry with one color per site.
///
/// Colors come from one uniform `u_i` per site: site `i` is black iff
/// `u_i < p`. Recoloring with another `p` reuses the uniforms, which couples
/// all values of `p` monotonically.
#[derive(Clone, Debug)]
pub struct ColoredTiling {
    geometry: Arc<Geometry>,
    uniforms: Option<Arc<Vec<f64>>>,
    black: Vec<bool>,
    p: f64,
    stream: Option<StreamId>,
}

/// Color every site of `geometry` independently, black with probability
/// `p`, drawing one uniform per site from `stream` in site order.
pub fn color_sites(geometry: impl Into<Arc<Geometry>>, p: f64, stream: &mut RandomStream) -> Result<ColoredTiling> {
    check_p(p)?;
    let geometry = geometry.into();
    let uniforms: Vec<f64> = (0..geometry.sites().len()).map(|_| stream.uniform()).collect();
    let black = uniforms.iter().map(|&u| u < p).collect();
    Ok(ColoredTiling {
        geometry,
        uniforms: Some(Arc::new(uniforms)),
        black,
        p,
        stream: Some(stream.id()),
    })
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

impl ColoredTiling {
    /// Explicit colors, for fixtures. `p` is reported as NaN.
    pub fn with_colors(geometry: impl Into<Arc<Geometry>>, black: Vec<bool>) -> Result<Self> {
        let geometry = geometry.into();
        if black.len() != geometry.sites().len() {
            return Err(invalid(format!(
                "{} colors for {} sites",
                black.len(),
                geometry.sites().len()
            )));
        }
        Ok(ColoredTiling {
            geometry,
            uniforms: None,
            black,
            p: f64::NAN,
            stream: None,
        })
    }

    /// Same positions and uniforms, new `p`.
    pub fn recolor(&self, p: f64) -> Result<Self> {
        check_p(p)?;
        let Some(u) = &self.uniforms else {
            return Err(invalid("tiling has explicit colors and no uniforms"));
        };
        Ok(ColoredTiling {
            geometry: Arc::clone(&self.geometry),
            uniforms: Some(Arc::clone(u)),
            black: u.iter().map(|&u| u < p).collect(),
            p,
            stream: self.stream,
        })
    }

    /// Same positions and uniforms with black and white exchanged, so that
    /// site `i` is black iff `u_i >= 1 - p`. At `p = 1/2` this has the same
    /// law as the original coloring.
    pub fn swapped(&self) -> Self {
        ColoredTiling {
            geometry: Arc::clone(&self.geometry),
            uniforms: self.uniforms.clone(),
            black: self.black.iter().map(|b| !b).collect(),
            p: 1.0 - self.p,
            stream: self.stream,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn shared_geometry(&self) -> Arc<Geometry> {
        Arc::clone(&self.geometry)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn colors(&self) -> &[bool] {
        &self.black
    }

    pub fn color(&self, site: usize) -> Color {
        if self.black[site] {
            Color::Black
        } else {
            Color::White
        }
    }

    pub fn uniforms(&self) -> Option<&[f64]> {
        self.uniforms.as_deref().map(Vec::as_slice)
    }

    pub fn stream_id(&self) -> Option<StreamId> {
        self.stream
    }

    fn is(&self, site: usize, color: Color) -> bool {
        self.black[site] == (color == Color::Black)
    }
}

/// Contact bits for the four sides of a rectangle, in the order of
/// [`Region::sides`].
pub const LEFT: u64 = 1;
pub const RIGHT: u64 = 2;
pub const BOTTOM: u64 = 4;
pub const TOP: u64 = 8;
/// Contact bits for the boundaries of an annulus.
pub const INNER: u64 = 1;
pub const OUTER: u64 = 2;

/// A node of a clipped graph: the part of one cell inside one piece of the
/// region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub site: u32,
    pub piece: u32,
}

/// Cells of one color restricted to a region.
#[derive(Clone, Debug)]
pub struct ClippedGraph {
    color: Color,
    region: Region,
    nodes: Vec<Node>,
    contacts: Vec<u64>,
    edges: Vec<(u32, u32)>,
}

impl ClippedGraph {
    pub fn color(&self) -> Color {
        self.color
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Node index pairs, each listed once with the smaller index first.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Per node, the bit mask of targets its clipped cell touches.
    pub fn contacts(&self) -> &[u64] {
        &self.contacts
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Contact masks of the connected components, one per component.
    pub fn components(&self) -> Vec<u64> {
        let mut dsu = DisjointSet::new(self.nodes.len());
        for &(a, b) in &self.edges {
            dsu.union(a as usize, b as usize);
        }
        let mut mask = vec![0u64; self.nodes.len()];
        for (i, &c) in self.contacts.iter().enumerate() {
            let r = dsu.find(i);
            mask[r] |= c;
        }
        (0..self.nodes.len())
            .filter(|&i| dsu.find(i) == i)
            .map(|i| mask[i])
            .collect()
    }

    /// Component label of every node.
    pub fn component_labels(&self) -> Vec<u32> {
        let mut dsu = DisjointSet::new(self.nodes.len());
        for &(a, b) in &self.edges {
            dsu.union(a as usize, b as usize);
        }
        (0..self.nodes.len()).map(|i| dsu.find(i) as u32).collect()
    }
}

/// True iff some component touches a target in `a` and a target in `b`.
pub fn connected(graph: &ClippedGraph, a: u64, b: u64) -> bool {
    graph.components().iter().any(|&m| m & a != 0 && m & b != 0)
}

/// The default targets of a region: the four sides of a rectangle (bits
/// [`LEFT`], [`RIGHT`], [`BOTTOM`], [`TOP`]), or the inner and outer
/// boundary of an annulus (bits [`INNER`], [`OUTER`]).
pub fn canonical_targets(region: &Region) -> Vec<Vec<Window>> {
    match region {
        Region::Rect { window } => Region::sides(window).iter().map(|s| vec![*s]).collect(),
        Region::SquareAnnulus { .. } => vec![region.inner_boundary(), region.outer_boundary()],
    }
}

/// Graph of the closed cells of `color` clipped to `region`, with contacts
/// against the region's canonical targets.
pub fn clipped_graph(tiling: &ColoredTiling, region: &Region, color: Color) -> Result<ClippedGraph> {
    clipped_graph_with_targets(tiling, region, color, &canonical_targets(region))
}

/// Graph of the closed cells of `color` clipped to `region`. Target `i` is a
/// union of closed boxes and sets bit `i` of the contact masks; at most 64
/// targets.
pub fn clipped_graph_with_targets(
    tiling: &ColoredTiling,
    region: &Region,
    color: Color,
    targets: &[Vec<Window>],
) -> Result<ClippedGraph> {
    if targets.len() > 64 {
        return Err(invalid("at most 64 targets"));
    }
    let geom = tiling.geometry();
    geom.require_certified(&region.bbox())?;
    let cells = geom.cells();
    let n = geom.sites().len();
    let pieces = region.pieces();

    let mut nodes = Vec::new();
    let mut contacts = Vec::new();
    let mut edges = Vec::new();
    let mut index = vec![NONE; n * pieces.len()];
    let at = |site: usize, piece: usize| site * pieces.len() + piece;

    let (mut poly, mut tmp, mut s1, mut s2) = (Poly::default(), Poly::default(), Poly::default(), Poly::default());
    // Surviving neighbor labels per node, resolved to edges once all nodes
    // exist.
    let mut pending: Vec<(u32, u32, u32)> = Vec::new();

    for (pi, piece) in pieces.iter().enumerate() {
        let local_targets: Vec<Vec<Window>> = targets
            .iter()
            .map(|t| t.iter().filter_map(|b| meet(b, piece)).collect())
            .collect();
        for v in 0..n {
            if !tiling.is(v, color) || !cells.bbox(v).intersects(piece) {
                continue;
            }
            let verts = cells.vertices(v);
            let labels = cells.labels(v);
            let (pts, labs): (&[_], &[u32]) = if piece.contains(cells.bbox(v)) {
                (verts, labels)
            } else {
                poly.set(verts, labels);
                clip_box(&mut poly, &mut tmp, piece, NONE);
                if poly.is_empty() {
                    continue;
                }
                (&poly.pts, &poly.labels)
            };
            let id = nodes.len() as u32;
            index[at(v, pi)] = id;
            nodes.push(Node {
                site: v as u32,
                piece: pi as u32,
            });
            let mut mask = 0u64;
            for (t, boxes) in local_targets.iter().enumerate() {
                if boxes.iter().any(|b| meets_box(pts, b, &mut s1, &mut s2)) {
                    mask |= 1 << t;
                }
            }
            contacts.push(mask);
            for &w in labs {
                if w != NONE && tiling.is(w as usize, color) {
                    pending.push((v as u32, w, pi as u32));
                }
            }
        }
    }

    for (z, w, pi) in pending {
        let (a, b) = (index[at(z as usize, pi as usize)], index[at(w as usize, pi as usize)]);
        if a != NONE && b != NONE {
            edges.push((a.min(b), a.max(b)));
        }
    }

    for link in region.links() {
        for v in 0..n {
            let (a, b) = (index[at(v, link.first)], index[at(v, link.second)]);
            if a != NONE && b != NONE && meets_box(cells.vertices(v), &link.segment, &mut s1, &mut s2) {
                edges.push((a.min(b), a.max(b)));
            }
        }
    }

    // Cells meeting only at a vertex shared by four or more cocircular sites.
    for group in geom.triangulation().vertex_groups() {
        for (pi, piece) in pieces.iter().enumerate() {
            if !piece.contains_point(group.center) {
                continue;
            }
            let members: Vec<u32> = group
                .sites
                .iter()
                .map(|&s| index[at(s as usize, pi)])
                .filter(|&i| i != NONE)
                .collect();
            for pair in members.windows(2) {
                edges.push((pair[0].min(pair[1]), pair[0].max(pair[1])));
            }
        }
    }

    edges.sort_unstable();
    edges.dedup();
    Ok(ClippedGraph {
        color,
        region: *region,
        nodes,
        contacts,
        edges,
    })
}

fn meet(a: &Window, b: &Window) -> Option<Window> {
    let (alo, ahi, blo, bhi) = (a.lo(), a.hi(), b.lo(), b.hi());
    let (x0, y0) = (alo.x.max(blo.x), alo.y.max(blo.y));
    let (x1, y1) = (ahi.x.min(bhi.x), ahi.y.min(bhi.y));
    (x0 <= x1 && y0 <= y1).then(|| Window::from_bounds_unchecked(x0, y0, x1, y1))
}
