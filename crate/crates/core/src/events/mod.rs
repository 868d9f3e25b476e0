//! Exact deciders for crossing, arm, circuit and covering events.
//!
//! `B_r = [-r, r]²` and `A_{a,b} = B_b \ B_a`. Every decider first checks
//! that the window it reads lies inside the tiling's certified window, so
//! its answer cannot change when sites are added outside the sample.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geom::clip::{clip_box, Poly};
use crate::geom::{Point, Window};
use crate::tiling::{
    clipped_graph, clipped_graph_with_targets, connected, Color, ColoredTiling, Region, INNER, OUTER,
};

/// Which pair of opposite sides a crossing joins.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Left side to right side.
    #[default]
    Horizontal,
    /// Bottom side to top side.
    Vertical,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Window> {
    Window::from_bounds(x0, y0, x1, y1)
}

fn square(r: f64) -> Result<Window> {
    Window::square(Point::new(0.0, 0.0), r)
}

/// Crossing of the rectangle `[0, ρs] × [0, s]` by `color`.
pub fn crossing(tiling: &ColoredTiling, rho: f64, s: f64, color: Color, direction: Direction) -> Result<bool> {
    positive("rho", rho)?;
    positive("s", s)?;
    crossing_in(tiling, &seg(0.0, 0.0, rho * s, s)?, color, direction)
}

/// Crossing of an arbitrary rectangle by `color`.
pub fn crossing_in(tiling: &ColoredTiling, rect: &Window, color: Color, direction: Direction) -> Result<bool> {
    let g = clipped_graph(tiling, &Region::rect(*rect)?, color)?;
    Ok(match direction {
        Direction::Horizontal => connected(&g, crate::tiling::LEFT, crate::tiling::RIGHT),
        Direction::Vertical => connected(&g, crate::tiling::BOTTOM, crate::tiling::TOP),
    })
}

fn check_h(s: f64, alpha: f64, beta: f64) -> Result<()> {
    positive("s", s)?;
    let h = s / 2.0;
    if !(-h <= alpha && alpha <= beta && beta <= h) {
        return Err(invalid(format!(
            "H event needs -s/2 <= alpha <= beta <= s/2, got s={s}, alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

/// A black component of `B_{s/2}` touches the left side and the segment
/// `{s/2} × [α, β]`.
pub fn h_event(tiling: &ColoredTiling, s: f64, alpha: f64, beta: f64) -> Result<bool> {
    check_h(s, alpha, beta)?;
    let h = s / 2.0;
    let targets = vec![vec![seg(-h, -h, -h, h)?], vec![seg(h, alpha, h, beta)?]];
    let g = clipped_graph_with_targets(tiling, &Region::rect(square(h)?)?, Color::Black, &targets)?;
    Ok(connected(&g, 1, 2))
}

/// Where black components attached to the left side of `B_{s/2}` reach its
/// right side.
///
/// Built once per tiling, it answers `H_s(α, β)` for every `α ≤ β` with the
/// same result as [`h_event`].
#[derive(Clone, Debug, PartialEq)]
pub struct HProfile {
    s: f64,
    /// Disjoint closed intervals of `y`, sorted.
    intervals: Vec<(f64, f64)>,
}

impl HProfile {
    pub fn new(tiling: &ColoredTiling, s: f64) -> Result<Self> {
        positive("s", s)?;
        let h = s / 2.0;
        let right = seg(h, -h, h, h)?;
        let targets = vec![vec![seg(-h, -h, -h, h)?], vec![right]];
        let g = clipped_graph_with_targets(tiling, &Region::rect(square(h)?)?, Color::Black, &targets)?;
        let labels = g.component_labels();
        let mut reaches_left = vec![false; g.nodes().len()];
        for (i, &c) in g.contacts().iter().enumerate() {
            if c & 1 != 0 {
                reaches_left[labels[i] as usize] = true;
            }
        }
        let cells = tiling.geometry().cells();
        let (mut poly, mut tmp) = (Poly::default(), Poly::default());
        let mut raw = Vec::new();
        for (i, node) in g.nodes().iter().enumerate() {
            if g.contacts()[i] & 2 == 0 || !reaches_left[labels[i] as usize] {
                continue;
            }
            let v = node.site as usize;
            poly.set(cells.vertices(v), cells.labels(v));
            clip_box(&mut poly, &mut tmp, &right, 0);
            let lo = poly.pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let hi = poly.pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            if lo <= hi {
                raw.push((lo, hi));
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in raw {
            match intervals.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        Ok(HProfile { s, intervals })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// `H_s(α, β)` on the tiling the profile was built from.
    pub fn holds(&self, alpha: f64, beta: f64) -> Result<bool> {
        check_h(self.s, alpha, beta)?;
        Ok(self.intervals.iter().any(|&(lo, hi)| lo <= beta && alpha <= hi))
    }
}

/// One black component of `B_{s/2}` touches all four segments
/// `{±s/2} × [-s/2, -α]` and `{±s/2} × [α, s/2]`.
pub fn x_event(tiling: &ColoredTiling, s: f64, alpha: f64) -> Result<bool> {
    positive("s", s)?;
    let h = s / 2.0;
    if !(0.0..=h).contains(&alpha) {
        return Err(invalid(format!("X event needs 0 <= alpha <= s/2, got alpha={alpha}")));
    }
    let targets = vec![
        vec![seg(-h, -h, -h, -alpha)?],
        vec![seg(-h, alpha, -h, h)?],
        vec![seg(h, -h, h, -alpha)?],
        vec![seg(h, alpha, h, h)?],
    ];
    let g = clipped_graph_with_targets(tiling, &Region::rect(square(h)?)?, Color::Black, &targets)?;
    Ok(g.components().contains(&0b1111))
}

/// A `color` circuit in `A_{a,b}` around the origin.
pub fn circuit(tiling: &ColoredTiling, a: f64, b: f64, color: Color) -> Result<bool> {
    circuit_around(tiling, Point::new(0.0, 0.0), a, b, color)
}

/// A `color` circuit in the square annulus `center + A_{a,b}`: no component
/// of the other color joins its inner and outer boundary.
pub fn circuit_around(tiling: &ColoredTiling, center: Point, a: f64, b: f64, color: Color) -> Result<bool> {
    positive("a", a)?;
    if !(b.is_finite() && b > a) {
        return Err(invalid(format!("circuit needs 0 < a < b, got a={a}, b={b}")));
    }
    let g = clipped_graph(tiling, &Region::annulus(center, a, b)?, color.opposite())?;
    Ok(!connected(&g, INNER, OUTER))
}

/// A black component of `B_t` touches `B_s` and `∂B_t`.
pub fn one_arm(tiling: &ColoredTiling, s: f64, t: f64) -> Result<bool> {
    if !(s >= 1.0 && t.is_finite() && s < t) {
        return Err(invalid(format!("one-arm event needs 1 <= s < t, got s={s}, t={t}")));
    }
    let outer = square(t)?;
    let targets = vec![vec![square(s)?], Region::sides(&outer).to_vec()];
    let g = clipped_graph_with_targets(tiling, &Region::rect(outer)?, Color::Black, &targets)?;
    Ok(connected(&g, 1, 2))
}

/// Every point of `A_{2s,4s}` has a site at distance less than `s`.
pub fn f_event(tiling: &ColoredTiling, s: f64) -> Result<bool> {
    positive("s", s)?;
    let region = Region::annulus(Point::new(0.0, 0.0), 2.0 * s, 4.0 * s)?;
    let geom = tiling.geometry();
    geom.require_certified(&region.bbox())?;
    if geom.sites().is_empty() {
        return Ok(false);
    }
    Ok(geom.max_nearest_in(&region.pieces()) < s)
}

/// Number of disks of radius `s/2` used to cover `A_{2s,4s}`.
///
/// The grid of squares of side `2s/3` over `B_{4s}` has 144 squares; the 36
/// inside `B_{2s}` miss the annulus. A square of side `2s/3` has
/// circumradius `s·√2/3 < s/2`, so the disks of radius `s/2` at the centers
/// of the other 108 squares cover the annulus. If each disk holds a site,
/// every annulus point is within `s` of one.
pub const F_COVERING_DISKS: u32 = 108;

/// Lower bound `1 - 108·exp(-π s²/4)` on `P[F_s]` at intensity 1, from the
/// disk covering above.
pub fn f_event_bound(s: f64) -> f64 {
    1.0 - F_COVERING_DISKS as f64 * (-std::f64::consts::PI * s * s / 4.0).exp()
}

/// One event of the model with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Crossing {
        rho: f64,
        s: f64,
        #[serde(default = "black")]
        color: Color,
        #[serde(default)]
        direction: Direction,
    },
    H {
        s: f64,
        alpha: f64,
        beta: f64,
    },
    X {
        s: f64,
        alpha: f64,
    },
    Circuit {
        a: f64,
        b: f64,
        #[serde(default = "black")]
        color: Color,
    },
    OneArm {
        s: f64,
        t: f64,
    },
    F {
        s: f64,
    },
}

fn black() -> Color {
    Color::Black
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Crossing { .. } => "crossing",
            EventKind::H { .. } => "h",
            EventKind::X { .. } => "x",
            EventKind::Circuit { .. } => "circuit",
            EventKind::OneArm { .. } => "one_arm",
            EventKind::F { .. } => "f",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match *self {
            EventKind::Crossing {
                rho,
                s,
                color,
                direction,
            } => format!("rho={rho};s={s};color={color};direction={direction}"),
            EventKind::H { s, alpha, beta } => format!("s={s};alpha={alpha};beta={beta}"),
            EventKind::X { s, alpha } => format!("s={s};alpha={alpha}"),
            EventKind::Circuit { a, b, color } => format!("a={a};b={b};color={color}"),
            EventKind::OneArm { s, t } => format!("s={s};t={t}"),
            EventKind::F { s } => format!("s={s}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EventKind::Crossing { rho, s, .. } => {
                positive("rho", rho)?;
                positive("s", s)
            }
            EventKind::H { s, alpha, beta } => check_h(s, alpha, beta),
            EventKind::X { s, alpha } => {
                positive("s", s)?;
                if !(0.0..=s / 2.0).contains(&alpha) {
                    return Err(invalid(format!("X event needs 0 <= alpha <= s/2, got alpha={alpha}")));
                }
                Ok(())
            }
            EventKind::Circuit { a, b, .. } => {
                positive("a", a)?;
                if !(b.is_finite() && b > a) {
                    return Err(invalid(format!("circuit needs 0 < a < b, got a={a}, b={b}")));
                }
                Ok(())
            }
            EventKind::OneArm { s, t } => {
                if !(s >= 1.0 && t.is_finite() && s < t) {
                    return Err(invalid(format!("one-arm event needs 1 <= s < t, got s={s}, t={t}")));
                }
                Ok(())
            }
            EventKind::F { s } => positive("s", s),
        }
    }

    /// The window the decision depends on.
    pub fn window(&self) -> Result<Window> {
        self.validate()?;
        match *self {
            EventKind::Crossing { rho, s, .. } => seg(0.0, 0.0, rho * s, s),
            EventKind::H { s, .. } | EventKind::X { s, .. } => square(s / 2.0),
            EventKind::Circuit { b, .. } => square(b),
            EventKind::OneArm { t, .. } => square(t),
            EventKind::F { s } => square(4.0 * s),
        }
    }

    pub fn evaluate(&self, tiling: &ColoredTiling) -> Result<bool> {
        match *self {
            EventKind::Crossing {
                rho,
                s,
                color,
                direction,
            } => crossing(tiling, rho, s, color, direction),
            EventKind::H { s, alpha, beta } => h_event(tiling, s, alpha, beta),
            EventKind::X { s, alpha } => x_event(tiling, s, alpha),
            EventKind::Circuit { a, b, color } => circuit(tiling, a, b, color),
            EventKind::OneArm { s, t } => one_arm(tiling, s, t),
            EventKind::F { s } => f_event(tiling, s),
        }
    }
}

/// An event together with the model parameters it is estimated under.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    #[serde(flatten)]
    pub event: EventKind,
    pub p: f64,
    #[serde(default = "unit_intensity")]
    pub intensity: f64,
}

fn unit_intensity() -> f64 {
    1.0
}

impl EventSpec {
    pub fn new(event: EventKind, p: f64, intensity: f64) -> Result<Self> {
        let spec = EventSpec { event, p, intensity };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("p must lie in [0, 1], got {}", self.p)));
        }
        positive("intensity", self.intensity)?;
        self.event.validate()
    }

    pub fn window(&self) -> Result<Window> {
        self.event.window()
    }

    pub fn evaluate(&self, tiling: &ColoredTiling) -> Result<bool> {
        self.event.evaluate(tiling)
    }

    /// `kind;params` with `;` separators, safe inside one CSV field.
    pub fn label(&self) -> String {
        format!("{};{}", self.event.name(), self.event.params())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Geometry;

    fn fixture(sites: &[(f64, f64)], black: &[bool]) -> ColoredTiling {
        let g = Geometry::fixture(sites.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
        ColoredTiling::with_colors(g, black.to_vec()).unwrap()
    }

    #[test]
    fn two_site_crossings() {
        let t = fixture(&[(-1.0, 0.0), (1.0, 0.0)], &[true, false]);
        let r = seg(-2.0, -1.0, 2.0, 1.0).unwrap();
        assert!(!crossing_in(&t, &r, Color::Black, Direction::Horizontal).unwrap());
        assert!(crossing_in(&t, &r, Color::Black, Direction::Vertical).unwrap());
        assert!(crossing_in(&t, &r, Color::White, Direction::Vertical).unwrap());
        assert!(!crossing_in(&t, &r, Color::White, Direction::Horizontal).unwrap());
    }

    #[test]
    fn monochrome_tilings() {
        let sites = [(0.1, 0.2), (3.0, -1.0), (-2.0, 2.5), (1.0, 4.0)];
        let b = fixture(&sites, &[true; 4]);
        let w = fixture(&sites, &[false; 4]);
        assert!(crossing(&b, 1.0, 8.0, Color::Black, Direction::Horizontal).unwrap());
        assert!(h_event(&b, 4.0, 0.5, 0.5).unwrap());
        assert!(x_event(&b, 4.0, 1.0).unwrap());
        assert!(!x_event(&w, 4.0, 1.0).unwrap());
        assert!(circuit(&b, 1.0, 2.0, Color::Black).unwrap());
        assert!(!circuit(&w, 1.0, 2.0, Color::Black).unwrap());
        assert!(circuit(&w, 1.0, 2.0, Color::White).unwrap());
        assert!(one_arm(&b, 1.0, 3.0).unwrap());
        assert!(!one_arm(&w, 1.0, 3.0).unwrap());
    }

    #[test]
    fn point_target_inside_white_cell() {
        // White cell around (1.9, 0.8); the right side point (2, 0.8) is
        // interior to it.
        let t = fixture(&[(-1.0, 0.0), (1.9, 0.8), (1.9, -1.5)], &[true, false, true]);
        assert!(!h_event(&t, 4.0, 0.8, 0.8).unwrap());
        assert!(h_event(&t, 4.0, -2.0, -1.5).unwrap());
        let prof = HProfile::new(&t, 4.0).unwrap();
        assert!(!prof.holds(0.8, 0.8).unwrap());
        assert!(prof.holds(-2.0, -1.5).unwrap());
    }

    #[test]
    fn x_with_zero_alpha_is_a_crossing() {
        let t = fixture(&[(-1.0, 0.0), (1.0, 0.0), (0.0, 1.5)], &[true, true, false]);
        let x = x_event(&t, 4.0, 0.0).unwrap();
        let c = crossing_in(&t, &square(2.0).unwrap(), Color::Black, Direction::Horizontal).unwrap();
        assert_eq!(x, c);
        assert!(x);
    }

    #[test]
    fn thin_shell_arm() {
        let t = fixture(&[(0.0, 0.0), (5.0, 0.0)], &[true, false]);
        assert!(one_arm(&t, 1.0, 1.001).unwrap());
        assert!(one_arm(&t, 1.0, 2.0).unwrap());
        assert!(one_arm(&t, 0.5, 2.0).is_err());
    }

    #[test]
    fn f_event_fixtures() {
        let lone = fixture(&[(0.0, 0.0)], &[true]);
        assert!(!f_event(&lone, 1.0).unwrap());
        let s = 2.0;
        let mut sites = Vec::new();
        let h = s / 2.0;
        let n = (8.0 * s / h) as i32 + 2;
        for i in -n..=n {
            for j in -n..=n {
                sites.push((i as f64 * h + 0.01, j as f64 * h + 0.02));
            }
        }
        let grid = fixture(&sites, &vec![true; sites.len()]);
        assert!(f_event(&grid, s).unwrap());
    }

    #[test]
    fn parameter_checks() {
        let t = fixture(&[(0.0, 0.0)], &[true]);
        assert!(h_event(&t, 4.0, 1.0, 0.5).is_err());
        assert!(x_event(&t, 4.0, 2.5).is_err());
        assert!(circuit(&t, 2.0, 1.0, Color::Black).is_err());
        assert!(EventSpec::new(EventKind::F { s: 1.0 }, 1.2, 1.0).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = EventSpec::new(
            EventKind::Crossing {
                rho: 2.0,
                s: 16.0,
                color: Color::Black,
                direction: Direction::Horizontal,
            },
            0.5,
            1.0,
        )
        .unwrap();
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EventSpec>(&js).unwrap(), spec);
        let short: EventSpec = serde_json::from_str(r#"{"kind":"crossing","rho":2,"s":16,"p":0.5}"#).unwrap();
        assert_eq!(short, spec);
        assert_eq!(spec.label(), "crossing;rho=2;s=16;color=black;direction=horizontal");
        assert_eq!(spec.window().unwrap(), seg(0.0, 0.0, 32.0, 16.0).unwrap());
    }

    #[test]
    fn covering_bound_value() {
        assert!(f_event_bound(6.0) > 1.0 - 1e-10);
        assert!(f_event_bound(1.0) < 0.0);
    }
}
