//! Exact event deciders and reproducible Monte Carlo estimation for planar
//! Voronoi percolation.
//!
//! A trial samples a Poisson process on a padded window, builds its Delaunay
//! triangulation and Voronoi cells with exact predicates, colors the sites
//! and decides crossing, circuit and arm events through the cell-adjacency
//! graph clipped to a query region. A determinism certificate guarantees that
//! unseen sites outside the sampled window cannot change any decision.
//!
//! Modules, bottom up:
//!
//! * [`geom`]: points, windows, regions, Poisson sampling, Delaunay and
//!   Voronoi geometry, the certificate.
//! * [`tiling`]: colors and clipped connectivity graphs.
//! * [`events`]: the event deciders and [`events::EventSpec`].
//! * [`mc`]: keyed random streams, trial execution, Wilson intervals,
//!   checkpoints.
//! * [`rsw`]: derived quantities (φ curves, α̂, scale scans, corollary
//!   checks, quasi-independence, one-arm decay, crossing tables).
//! * [`oracle`]: slow independent references used by the test suites.

mod dsu;
mod error;
pub mod events;
pub mod geom;
pub mod mc;
pub mod oracle;
pub mod rsw;
pub mod stream;
pub mod tiling;

pub use dsu::DisjointSet;
pub use error::{Error, Result};

/// Version string embedded in run logs and checkpoints.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
