use serde::{Deserialize, Serialize};

use super::clip::{clip_box, Poly};
use super::delaunay::{triangulate, Triangulation};
use super::sample::{sample_poisson, PointSample};
use super::voronoi::{nearest_site, VoronoiCells};
use super::{Point, Region, Window};
use crate::error::{invalid, Error, Result};
use crate::stream::{derive_stream, Purpose};

/// How far to pad an event window before sampling, and how many extra
/// shells to try when the certificate fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddingPolicy {
    /// Padding and shell width in units of `1 / sqrt(intensity)`.
    pub pad_factor: f64,
    pub max_shells: u32,
}

impl Default for PaddingPolicy {
    fn default() -> Self {
        PaddingPolicy {
            pad_factor: 4.0,
            max_shells: 8,
        }
    }
}

impl PaddingPolicy {
    pub fn width(&self, intensity: f64) -> f64 {
        self.pad_factor / intensity.sqrt()
    }
}

/// Outcome of the determinism check for one window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub window: Window,
    /// Largest distance from a point of the window to its nearest site.
    pub max_nearest: f64,
    /// Distance from the window to the boundary of the sampled region.
    pub margin: f64,
    pub certified: bool,
    /// Padding shells added beyond the initial padded window.
    pub shells: u32,
}

/// Which part of the plane the geometry is known to be exact in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Certification {
    /// Explicit configuration: the sites are the whole process.
    Complete,
    /// Decisions inside this window cannot change under extension.
    Window(Certificate),
    None,
}

/// Sites, triangulation and cells of one configuration.
#[derive(Clone, Debug)]
pub struct Geometry {
    sample: PointSample,
    tri: Triangulation,
    cells: VoronoiCells,
    certification: Certification,
}

impl Geometry {
    /// Build the geometry of a sample, without certification.
    pub fn from_sample(sample: PointSample) -> Result<Self> {
        let tri = triangulate(sample.sites())?;
        let cells = VoronoiCells::build(sample.sites(), &tri, sample.extent());
        Ok(Geometry {
            sample,
            tri,
            cells,
            certification: Certification::None,
        })
    }

    /// Geometry of an explicit configuration, treated as complete.
    pub fn fixture(sites: Vec<Point>) -> Result<Self> {
        let mut g = Geometry::from_sample(PointSample::from_sites(sites)?)?;
        g.certification = Certification::Complete;
        Ok(g)
    }

    /// Sample a Poisson process around `window` for trial `trial_index` and
    /// pad it until the certificate holds.
    ///
    /// The initial sample covers `window` padded by
    /// `policy.width(intensity)` (stream `Positions`); each failed check adds
    /// a shell of the same width (stream `Shell(k)`). After
    /// `policy.max_shells` failed shells the trial is abandoned with
    /// [`Error::CertificateAbort`].
    pub fn sample_certified(
        window: Window,
        intensity: f64,
        master_seed: u64,
        trial_index: u64,
        policy: &PaddingPolicy,
    ) -> Result<Self> {
        let width = policy.width(intensity);
        if !(width.is_finite() && width >= 0.0) {
            return Err(invalid(format!("bad padding width {width}")));
        }
        let mut stream = derive_stream(master_seed, trial_index, Purpose::Positions);
        let mut sample = sample_poisson(window.expand(width), intensity, &mut stream)?;
        let mut shells = 0;
        loop {
            let mut g = Geometry::from_sample(sample)?;
            let mut cert = g.certificate(&window)?;
            cert.shells = shells;
            if cert.certified {
                g.certification = Certification::Window(cert);
                return Ok(g);
            }
            if shells >= policy.max_shells || width == 0.0 {
                return Err(Error::CertificateAbort {
                    shells: shells as usize,
                    max_nearest: cert.max_nearest,
                    margin: cert.margin,
                });
            }
            sample = g.sample;
            let ext = sample.rectangular_extent().expect("padded windows stay rectangular");
            let mut s = derive_stream(master_seed, trial_index, Purpose::Shell(shells));
            sample.extend_many(&ext.shell(width), &mut s)?;
            shells += 1;
        }
    }

    pub fn sample(&self) -> &PointSample {
        &self.sample
    }

    pub fn sites(&self) -> &[Point] {
        self.sample.sites()
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn cells(&self) -> &VoronoiCells {
        &self.cells
    }

    pub fn certification(&self) -> &Certification {
        &self.certification
    }

    /// Check that decisions in `w` are covered by the certificate. For
    /// explicit configurations `w` must lie inside the box that unbounded
    /// cells are truncated to.
    pub fn require_certified(&self, w: &Window) -> Result<()> {
        match &self.certification {
            Certification::Complete if self.cells.big_box().contains(w) => Ok(()),
            Certification::Complete => Err(Error::OutsideSampledRegion),
            Certification::Window(c) if c.window.contains(w) => Ok(()),
            _ => Err(Error::Uncertified),
        }
    }

    /// Run the determinism check for `w` and, if it passes, record it.
    pub fn certify(&mut self, w: &Window) -> Result<Certificate> {
        let c = self.certificate(w)?;
        if c.certified && self.certification != Certification::Complete {
            self.certification = Certification::Window(c);
        }
        Ok(c)
    }

    fn certificate(&self, w: &Window) -> Result<Certificate> {
        if !self.sample.covers(w) {
            return Err(Error::OutsideSampledRegion);
        }
        let margin = match self.sample.rectangular_extent() {
            Some(ext) => w.margin_within(&ext),
            None if self.sample.is_explicit() => f64::INFINITY,
            None => 0.0,
        };
        let max_nearest = if self.sample.is_empty() {
            f64::INFINITY
        } else {
            self.max_nearest_in(&[*w])
        };
        Ok(Certificate {
            window: *w,
            max_nearest,
            margin,
            certified: !self.sample.is_empty() && max_nearest <= margin,
            shells: 0,
        })
    }

    /// Maximum over the union of `pieces` of the distance to the nearest
    /// site: the largest vertex distance of any cell clipped to a piece.
    pub(crate) fn max_nearest_in(&self, pieces: &[Window]) -> f64 {
        let pts = self.sites();
        let (mut a, mut b) = (Poly::default(), Poly::default());
        let mut best = 0.0f64;
        for (v, &z) in pts.iter().enumerate() {
            let bb = self.cells.bbox(v);
            for piece in pieces {
                if !bb.intersects(piece) {
                    continue;
                }
                if piece.contains(bb) {
                    for q in self.cells.vertices(v) {
                        best = best.max(q.dist2(z));
                    }
                } else {
                    a.set(self.cells.vertices(v), self.cells.labels(v));
                    clip_box(&mut a, &mut b, piece, 0);
                    for q in &a.pts {
                        best = best.max(q.dist2(z));
                    }
                }
            }
        }
        best.sqrt()
    }

    /// Nearest site to `q`, ties to the lowest index.
    pub fn nearest_site(&self, q: Point) -> Result<(usize, f64)> {
        nearest_site(self.sites(), &self.tri, q)
    }
}

/// Exact maximum, over `region`, of the distance to the nearest site.
pub fn max_nearest_distance(geom: &Geometry, region: &Region) -> Result<f64> {
    if geom.sites().is_empty() {
        return Err(Error::EmptySample);
    }
    let pieces = region.pieces();
    if !pieces.iter().all(|p| geom.sample.covers(p)) {
        return Err(Error::OutsideSampledRegion);
    }
    Ok(geom.max_nearest_in(&pieces))
}

/// True iff the largest nearest-site distance in `window` is at most the
/// distance from `window` to the edge of the sampled region. Then no site
/// added outside the sampled region can change any cell restricted to
/// `window`.
pub fn determinism_certificate(geom: &Geometry, window: &Window) -> Result<bool> {
    Ok(geom.certificate(window)?.certified)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::from_bounds(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn single_site_corner_distance() {
        let g = Geometry::fixture(vec![Point::new(0.0, 0.0)]).unwrap();
        let d = max_nearest_distance(&g, &Region::square(1.0).unwrap()).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_covering_bound() {
        let h = 0.25;
        let mut pts = Vec::new();
        for i in -10..=10 {
            for j in -10..=10 {
                pts.push(Point::new(i as f64 * h, j as f64 * h));
            }
        }
        let g = Geometry::fixture(pts).unwrap();
        let d = max_nearest_distance(&g, &Region::square(2.0).unwrap()).unwrap();
        assert!(d <= h * 2f64.sqrt() / 2.0 + 1e-12, "{d}");
    }

    #[test]
    fn zero_margin_is_not_certified() {
        let win = w(0.0, 0.0, 5.0, 5.0);
        let s = sample_poisson(win, 1.0, &mut derive_stream(5, 0, Purpose::Positions)).unwrap();
        let g = Geometry::from_sample(s).unwrap();
        assert!(!determinism_certificate(&g, &win).unwrap());
        assert!(matches!(
            determinism_certificate(&g, &w(-1.0, 0.0, 1.0, 1.0)),
            Err(Error::OutsideSampledRegion)
        ));
    }

    #[test]
    fn empty_sample_is_not_certified() {
        let win = w(0.0, 0.0, 1.0, 1.0);
        let s = sample_poisson(win.expand(1.0), 1e-9, &mut derive_stream(5, 1, Purpose::Positions)).unwrap();
        assert!(s.is_empty());
        let g = Geometry::from_sample(s).unwrap();
        assert!(!determinism_certificate(&g, &win).unwrap());
    }

    #[test]
    fn padded_sample_certifies() {
        let win = w(0.0, 0.0, 8.0, 8.0);
        let g = Geometry::sample_certified(win, 1.0, 11, 0, &PaddingPolicy::default()).unwrap();
        g.require_certified(&win).unwrap();
        assert!(g.require_certified(&win.expand(100.0)).is_err());
    }

    #[test]
    fn abort_without_padding() {
        let win = w(0.0, 0.0, 4.0, 4.0);
        let policy = PaddingPolicy {
            pad_factor: 0.0,
            max_shells: 8,
        };
        assert!(matches!(
            Geometry::sample_certified(win, 1.0, 1, 0, &policy),
            Err(Error::CertificateAbort { .. })
        ));
    }
}
