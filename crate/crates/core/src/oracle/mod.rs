//! Slow reference implementations for cross-checking.
//!
//! Nothing here calls into the triangulation, cell, clipping or graph code
//! of the main modules; only the plain data types and the exact predicates
//! are shared.
//!
//! * [`naive_voronoi`] classifies every candidate pair of sites by an exact
//!   empty-circle test along their bisector.
//! * [`naive_delaunay_triangles`] enumerates empty circumcircles directly.
//! * [`naive_components`] builds clipped connectivity from the naive cells.
//! * [`RasterField`], [`raster_connectivity`] and [`raster_circuit`] decide
//!   connectivity on a pixel grid and report how close the decision came to
//!   a color interface.

mod naive;
mod raster;

pub use naive::{
    naive_components, naive_connected, naive_delaunay_triangles, naive_voronoi, FacetKind,
    NaiveFacet, NaiveVoronoi,
};
pub use raster::{raster_circuit, raster_connectivity, RasterField, RasterRegion, RasterVerdict};
