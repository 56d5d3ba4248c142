//! Discretized continuous Dijkstra: bundles of refracting rays swept outward from the source.

mod bundle;
mod engine;
mod interpolate;
mod params;
mod path;
mod source;
mod sssp;

use alloc::vec::Vec;

use crate::geom::Point2;
use crate::mesh::WeightedMesh;

pub use bundle::{global_index, next_pos, pos_at, prev_pos, search, sub_spans, Bundle, Pos, Span, Status};
pub use engine::{
    CriticalError, Diagnostics, Engine, EventKind, EventRecord, Observer, RunError, RunOptions, Silent, Snapshot,
    Step,
};
pub use interpolate::{interpolate_ray, InterpRay, StrikeView};
pub use params::{compute_params, eps_prime, eta, strict_delta, DiscretizationParams, Mode, ParamsError};
pub use path::{pred_path, vertex_path};
pub use source::{ray_tree, Pred, RayTree, Source, SourceKind, SourceRef};
pub use sssp::{build_sssp_map, query_sssp, EdgePieces, Piece, QueryError, QueryResult, SpMap};

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub cost: f64,
    pub polyline: Vec<Point2>,
    /// Events popped from the queue.
    pub events: usize,
    pub diagnostics: Diagnostics,
    /// Settled vertex distances at the time the target was reached.
    pub vertex_dist: Vec<Option<f64>>,
}

/// Approximate shortest path from vertex `s` to vertex `t`.
pub fn run(
    mesh: &WeightedMesh,
    s: usize,
    t: usize,
    params: &DiscretizationParams,
    opts: &RunOptions,
) -> Result<PathResult, RunError> {
    run_observed(mesh, s, t, params, opts, &mut Silent)
}

pub fn run_observed(
    mesh: &WeightedMesh,
    s: usize,
    t: usize,
    params: &DiscretizationParams,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<PathResult, RunError> {
    let n = mesh.vertices().len();
    for v in [s, t] {
        if v >= n {
            return Err(RunError::NoSuchVertex(v));
        }
    }
    if s == t {
        return Err(RunError::SameVertex);
    }
    let mut eng = Engine::new(mesh, params, opts);
    eng.start(s);
    eng.run_until(Some(t), obs)?;
    let diagnostics = eng.diagnostics();
    let Some(cost) = eng.distance(t) else {
        return Err(RunError::Unreachable { target: t, diagnostics });
    };
    Ok(PathResult {
        cost,
        polyline: vertex_path(mesh, eng.sources(), eng.predecessors(), t),
        events: diagnostics.events,
        diagnostics,
        vertex_dist: eng.distances().to_vec(),
    })
}
