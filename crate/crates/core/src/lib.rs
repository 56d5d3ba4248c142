//! Approximate shortest paths through a weighted planar triangulation.
//!
//! A path's cost is the sum of its segment lengths, each multiplied by the weight of the face it
//! runs through (or the cheaper neighbouring face, along an edge). The [`wavefront`] module
//! propagates a discretized Dijkstra wavefront of Snell-refracting rays, tracing only the two
//! extreme rays of each bundle; [`oracle`] is an independent Steiner-graph baseline.
//!
//! ```
//! use wrp_core::{geom::Point2, mesh::WeightedMesh, wavefront::{self, Mode, RunOptions}};
//!
//! let mesh = WeightedMesh::new(
//!     vec![Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(0.0, 3.0)],
//!     vec![([0, 1, 2], 2.0)],
//! ).unwrap();
//! let params = wavefront::compute_params(&wrp_core::mesh::compute_stats(&mesh), 0.1, Mode::Practical).unwrap();
//! let r = wavefront::run(&mesh, 1, 2, &params, &RunOptions::default()).unwrap();
//! assert!((r.cost - 10.0).abs() < 1e-9);
//! ```

#![no_std]

extern crate alloc;

mod fmath;
pub mod geom;
pub mod mesh;
pub mod optics;
pub mod oracle;
pub mod wavefront;

pub use geom::{Point2, Vec2};
pub use mesh::{compute_stats, Location, MeshError, MeshStats, WeightedMesh};
