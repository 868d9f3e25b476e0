use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Point, Window};
use crate::error::{invalid, Error, Result};
use crate::stream::{RandomStream, StreamId};

/// Which stream produced the sites of which sampled window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub stream: StreamId,
    pub region: Window,
}

/// A realization of a homogeneous Poisson process on a union of
/// interior-disjoint windows.
///
/// Explicit configurations built with [`PointSample::from_sites`] have no
/// sampled region; they stand for the whole process.
#[derive(Clone, Debug)]
pub struct PointSample {
    sites: Vec<Point>,
    regions: Vec<Window>,
    intensity: f64,
    provenance: Vec<Provenance>,
}

impl PointSample {
    /// An explicit site configuration (fixtures, replays).
    pub fn from_sites(sites: Vec<Point>) -> Result<Self> {
        if let Some(p) = sites.iter().find(|p| !p.is_finite()) {
            return Err(invalid(format!("non-finite site {p:?}")));
        }
        Ok(PointSample {
            sites,
            regions: Vec::new(),
            intensity: f64::NAN,
            provenance: Vec::new(),
        })
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn regions(&self) -> &[Window] {
        &self.regions
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// True for explicit configurations without a sampled region.
    pub fn is_explicit(&self) -> bool {
        self.regions.is_empty()
    }

    /// Bounding box of the sampled region, if any.
    pub fn extent(&self) -> Option<Window> {
        let mut it = self.regions.iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, w| acc.union_bounds(w)))
    }

    /// The sampled region when it is a single rectangle (up to rounding of
    /// the strip areas), else `None`.
    pub fn rectangular_extent(&self) -> Option<Window> {
        let ext = self.extent()?;
        let total: f64 = self.regions.iter().map(Window::area).sum();
        let full = ext.area();
        ((total - full).abs() <= 1e-9 * full.max(1.0)).then_some(ext)
    }

    /// True when `w` lies inside one rectangle of the sampled union or, for
    /// rectangular unions, inside the extent.
    pub fn covers(&self, w: &Window) -> bool {
        if self.is_explicit() {
            return true;
        }
        self.regions.iter().any(|r| r.contains(w))
            || self.rectangular_extent().is_some_and(|e| e.contains(w))
    }

    fn draw_into(&mut self, region: Window, stream: &mut RandomStream) {
        let mean = region.area() * self.intensity;
        let count = if mean > 0.0 {
            // Mean is positive and finite here, so construction cannot fail.
            let dist = Poisson::new(mean).expect("valid Poisson mean");
            dist.sample(stream) as usize
        } else {
            0
        };
        let (lo, w, h) = (region.lo(), region.width(), region.height());
        self.sites.reserve(count);
        for _ in 0..count {
            let x = lo.x + stream.uniform() * w;
            let y = lo.y + stream.uniform() * h;
            self.sites.push(Point::new(x, y));
        }
        self.regions.push(region);
        self.provenance.push(Provenance {
            stream: stream.id(),
            region,
        });
    }

    /// Append independent Poisson sites in each of `extra`, consecutively
    /// from one stream. Each window must be interior-disjoint from the
    /// sampled region and from the others.
    pub(crate) fn extend_many(&mut self, extra: &[Window], stream: &mut RandomStream) -> Result<()> {
        for (i, w) in extra.iter().enumerate() {
            let clash = self.regions.iter().chain(&extra[..i]).any(|r| r.overlaps_interior(w));
            if clash {
                return Err(Error::OverlappingRegion);
            }
        }
        for w in extra {
            if w.area() > 0.0 {
                self.draw_into(*w, stream);
            }
        }
        Ok(())
    }
}

fn check_intensity(intensity: f64) -> Result<()> {
    if intensity.is_finite() && intensity > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("intensity must be positive, got {intensity}")))
    }
}

/// Poisson process of the given intensity on `region`: a Poisson count with
/// mean `area · intensity`, then i.i.d. uniform positions.
///
/// A zero-area region yields an empty sample.
pub fn sample_poisson(region: Window, intensity: f64, stream: &mut RandomStream) -> Result<PointSample> {
    check_intensity(intensity)?;
    let mut s = PointSample {
        sites: Vec::new(),
        regions: Vec::new(),
        intensity,
        provenance: Vec::new(),
    };
    s.draw_into(region, stream);
    Ok(s)
}

/// Add an independent Poisson sample on `extra`, which must not overlap the
/// sampled region. The result has the law of a single sample on the union.
pub fn extend_sample(sample: &PointSample, extra: Window, stream: &mut RandomStream) -> Result<PointSample> {
    if sample.is_explicit() {
        return Err(invalid("explicit configurations cannot be extended"));
    }
    let mut out = sample.clone();
    out.extend_many(&[extra], stream)?;
    Ok(out)
}
