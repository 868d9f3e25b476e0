//! Invariant suites run by `verify`: duality, oracle equivalence, monotone
//! coupling and the corollary inequalities.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use voronoi_rsw::events::{circuit, circuit_around, crossing_in, Direction};
use voronoi_rsw::geom::{Geometry, Point, Window};
use voronoi_rsw::mc::{run_map, sub_seed, TrialPlan};
use voronoi_rsw::oracle::{naive_voronoi, raster_circuit, raster_connectivity, RasterField, RasterRegion};
use voronoi_rsw::rsw::{corollary_suite, Model};
use voronoi_rsw::tiling::{Color, ColoredTiling};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// A deliberate bug used to check that the suites catch one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// Flip the color of the site nearest the center of the query region
    /// before the primary decider runs.
    FlipCenterSite,
}

/// Sizes of every suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub duality_s: f64,
    pub duality_p: Vec<f64>,
    pub duality_n: u64,
    pub oracle_instances: usize,
    pub oracle_h: f64,
    pub monotone_s: f64,
    pub monotone_n: u64,
    pub corollary_s: f64,
    pub corollary_n: u64,
}

impl Level {
    pub fn settings(self) -> Settings {
        match self {
            Level::Fast => Settings {
                duality_s: 4.0,
                duality_p: vec![0.3, 0.5, 0.7],
                duality_n: 512,
                oracle_instances: 40,
                oracle_h: 0.05,
                monotone_s: 4.0,
                monotone_n: 256,
                corollary_s: 4.0,
                corollary_n: 1024,
            },
            Level::Full => Settings {
                duality_s: 8.0,
                duality_p: vec![0.3, 0.5, 0.7],
                duality_n: 10_000,
                oracle_instances: 500,
                oracle_h: 0.05,
                monotone_s: 8.0,
                monotone_n: 2048,
                corollary_s: 16.0,
                corollary_n: 20_000,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub summary: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.summary)
    }
}

/// `tiling` with the site nearest `q` recolored.
pub fn flip_nearest(tiling: &ColoredTiling, q: Point) -> voronoi_rsw::Result<ColoredTiling> {
    let (i, _) = tiling.geometry().nearest_site(q)?;
    let mut black = tiling.colors().to_vec();
    black[i] = !black[i];
    ColoredTiling::with_colors(tiling.shared_geometry(), black)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityCount {
    pub p: f64,
    pub n: u64,
    pub violations: u64,
    pub aborted: u64,
}

/// Samples of `[0, 2s] × [0, s]` where a black horizontal crossing and a
/// white vertical crossing both occur or both fail.
pub fn duality_xor(s: f64, p: f64, n: u64, seed: u64, threads: Option<usize>, m: Mutation) -> Result<DualityCount> {
    let rect = Window::from_bounds(0.0, 0.0, 2.0 * s, s)?;
    let mut plan = TrialPlan::fixed(n);
    plan.threads = threads;
    let run = run_map(rect, p, 1.0, &plan, seed, |t| {
        let black = crossing_in(t, &rect, Color::Black, Direction::Horizontal)?;
        let white = match m {
            Mutation::None => crossing_in(t, &rect, Color::White, Direction::Vertical)?,
            Mutation::FlipCenterSite => {
                crossing_in(&flip_nearest(t, rect.center())?, &rect, Color::White, Direction::Vertical)?
            }
        };
        Ok(u64::from(black == white))
    })?;
    Ok(DualityCount {
        p,
        n: run.values.len() as u64,
        violations: run.values.iter().sum(),
        aborted: run.aborted,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub instances: usize,
    /// Instances whose Delaunay adjacency differs from the naive one.
    pub adjacency_mismatches: usize,
    /// Exact-versus-raster comparisons made.
    pub comparisons: usize,
    /// Disagreements with raster clearance below `2h√2`.
    pub excused: usize,
    /// Disagreements with clearance at least `2h√2`.
    pub unexcused: usize,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.adjacency_mismatches == 0 && self.unexcused == 0
    }
}

/// Random instances of 20 to 300 sites at unit density: the Delaunay
/// adjacency against the naive construction, and exact crossings and
/// circuits against raster flood fills at resolution `h`.
pub fn oracle_equivalence(instances: usize, h: f64, seed: u64, m: Mutation) -> Result<OracleReport> {
    let excuse = 2.0 * h * std::f64::consts::SQRT_2;
    let mut report = OracleReport {
        instances,
        ..Default::default()
    };
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &format!("oracle/{i}")));
        let n = rng.random_range(20..=300usize);
        let side = (n as f64).sqrt();
        let sites: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
            .collect();
        let black: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();

        let geometry = Geometry::fixture(sites.clone())?;
        let primary: Vec<Vec<u32>> = (0..n).map(|v| geometry.triangulation().neighbors(v).to_vec()).collect();
        if primary != naive_voronoi(&sites).adjacency {
            report.adjacency_mismatches += 1;
        }

        let c = Point::new(side / 2.0, side / 2.0);
        let (a, b) = (side / 8.0, side / 4.0);
        let rect = Window::square(c, b)?;
        let truth = ColoredTiling::with_colors(geometry, black.clone())?;
        let tiling = match m {
            Mutation::None => truth,
            Mutation::FlipCenterSite => flip_nearest(&truth, c)?,
        };
        let field = RasterField::new(&sites, &black, rect, h);
        let region = RasterRegion::Rect(rect);
        let (lo, hi) = (rect.lo(), rect.hi());
        let left = [Window::from_bounds(lo.x, lo.y, lo.x, hi.y)?];
        let right = [Window::from_bounds(hi.x, lo.y, hi.x, hi.y)?];
        let bottom = [Window::from_bounds(lo.x, lo.y, hi.x, lo.y)?];
        let top = [Window::from_bounds(lo.x, hi.y, hi.x, hi.y)?];

        let pairs = [
            (
                crossing_in(&tiling, &rect, Color::Black, Direction::Horizontal)?,
                raster_connectivity(&field, &region, true, &left, &right),
            ),
            (
                crossing_in(&tiling, &rect, Color::White, Direction::Vertical)?,
                raster_connectivity(&field, &region, false, &bottom, &top),
            ),
            (
                circuit_around(&tiling, c, a, b, Color::Black)?,
                raster_circuit(&field, c, a, b, true),
            ),
        ];
        for (exact, raster) in pairs {
            report.comparisons += 1;
            if exact != raster.connected {
                if raster.clearance < excuse {
                    report.excused += 1;
                } else {
                    report.unexcused += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Samples where raising `p` from 0.4 to 0.6 under the uniform coupling
/// destroys a black crossing of `B_s` or a black circuit in `A_{s/2,s}`.
pub fn monotone_coupling(s: f64, n: u64, seed: u64, threads: Option<usize>) -> Result<u64> {
    let window = Window::square(Point::new(0.0, 0.0), s)?;
    let mut plan = TrialPlan::fixed(n);
    plan.threads = threads;
    let run = run_map(window, 0.5, 1.0, &plan, seed, |t| {
        let (lo, hi) = (t.recolor(0.4)?, t.recolor(0.6)?);
        let cross = |x: &ColoredTiling| crossing_in(x, &window, Color::Black, Direction::Horizontal);
        let circ = |x: &ColoredTiling| circuit(x, s / 2.0, s, Color::Black);
        Ok(u64::from(cross(&lo)? && !cross(&hi)?) + u64::from(circ(&lo)? && !circ(&hi)?))
    })?;
    Ok(run.values.iter().sum())
}

/// Every suite at `level`, one [`Check`] per suite component.
pub fn run_verify(level: Level, seed: u64, threads: Option<usize>, m: Mutation) -> Result<Vec<Check>> {
    let cfg = level.settings();
    let mut checks = Vec::new();

    for &p in &cfg.duality_p {
        let d = duality_xor(
            cfg.duality_s,
            p,
            cfg.duality_n,
            sub_seed(seed, &format!("verify/duality/{p}")),
            threads,
            m,
        )?;
        checks.push(Check {
            name: format!("duality-xor p={p}"),
            passed: d.violations == 0,
            summary: format!(
                "{} violations in {} samples of the {}x{} rectangle",
                d.violations,
                d.n,
                2.0 * cfg.duality_s,
                cfg.duality_s
            ),
        });
    }

    let o = oracle_equivalence(cfg.oracle_instances, cfg.oracle_h, sub_seed(seed, "verify/oracle"), m)?;
    checks.push(Check {
        name: "oracle-equivalence".into(),
        passed: o.passed(),
        summary: format!(
            "{} instances, {} adjacency mismatches, {} of {} decider comparisons disagree ({} excused by clearance < 2h\u{221a}2)",
            o.instances,
            o.adjacency_mismatches,
            o.excused + o.unexcused,
            o.comparisons,
            o.excused
        ),
    });

    let v = monotone_coupling(cfg.monotone_s, cfg.monotone_n, sub_seed(seed, "verify/monotone"), threads)?;
    checks.push(Check {
        name: "monotone-coupling".into(),
        passed: v == 0,
        summary: format!("{v} violations in {} coupled samples", cfg.monotone_n),
    });

    let mut plan = TrialPlan::fixed(cfg.corollary_n);
    plan.threads = threads;
    let r = corollary_suite(cfg.corollary_s, Model::critical(), &plan, sub_seed(seed, "verify/corollary"))?;
    for c in &r.checks {
        checks.push(Check {
            name: format!("corollary {}", c.name),
            passed: c.holds,
            summary: format!(
                "lhs {:.5}, rhs {:.5}, sigma {:.5} at s={}, n={}",
                c.lhs, c.rhs, c.sigma, cfg.corollary_s, cfg.corollary_n
            ),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_changes_exactly_one_site() {
        let g = Geometry::fixture(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0)]).unwrap();
        let t = ColoredTiling::with_colors(g, vec![true, true]).unwrap();
        let f = flip_nearest(&t, Point::new(2.5, 0.0)).unwrap();
        assert_eq!(f.colors(), &[true, false]);
    }

    #[test]
    fn small_oracle_run_agrees() {
        let r = oracle_equivalence(3, 0.05, 11, Mutation::None).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.comparisons, 9);
    }
}
