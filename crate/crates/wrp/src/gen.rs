//! Fixture meshes. Random kinds are deterministic in the seed.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::{DelaunayTriangulation, Triangulation};
use wrp_core::{Point2, WeightedMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FixtureKind {
    Single,
    TwoRegion,
    Strip,
    RandomDelaunay,
    Fan,
}

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub seed: u64,
    /// Point count (random-delaunay), face count (strip) or spoke count (fan).
    pub size: usize,
    pub max_weight: u32,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { seed: 0, size: 20, max_weight: 8 }
    }
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

/// The 3-4-5 triangle of weight 2.
pub fn single() -> WeightedMesh {
    WeightedMesh::new(vec![p(0.0, 0.0), p(4.0, 0.0), p(0.0, 3.0)], vec![([0, 1, 2], 2.0)]).unwrap()
}

/// 2x2 rectangle split at x = 1: weight 1 on the left, `right` on the right. The usual
/// endpoints are vertex 3 (0, 1) and vertex 2 (2, -1).
pub fn two_region(right: f64) -> WeightedMesh {
    WeightedMesh::new(
        vec![p(0.0, -1.0), p(1.0, -1.0), p(2.0, -1.0), p(0.0, 1.0), p(1.0, 1.0), p(2.0, 1.0)],
        vec![([0, 1, 4], 1.0), ([0, 4, 3], 1.0), ([1, 2, 5], right), ([1, 5, 4], right)],
    )
    .unwrap()
}

/// A row of unit squares, two triangles each, uniform weight.
pub fn strip(squares: usize) -> WeightedMesh {
    let k = squares.max(1);
    let mut v = Vec::new();
    for i in 0..=k {
        v.push(p(i as f64, 0.0));
        v.push(p(i as f64, 1.0));
    }
    let mut f = Vec::new();
    for i in 0..k {
        let (a, b, c, d) = (2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
        f.push(([a, b, c], 1.0));
        f.push(([a, c, d], 1.0));
    }
    WeightedMesh::new(v, f).unwrap()
}

/// Hub at the origin with `spokes` rim vertices; weights cycle through 1..=max_weight.
pub fn fan(spokes: usize, max_weight: u32) -> WeightedMesh {
    let k = spokes.max(3);
    let mut v = vec![p(0.0, 0.0)];
    for i in 0..k {
        let a = TAU * i as f64 / k as f64;
        v.push(p(10.0 * a.cos(), 10.0 * a.sin()));
    }
    let f = (0..k)
        .map(|i| ([0, 1 + i, 1 + (i + 1) % k], (1 + i as u32 % max_weight.max(1)) as f64))
        .collect();
    WeightedMesh::new(v, f).unwrap()
}

/// Delaunay triangulation of `n` distinct integer points in a square grid, integer face
/// weights drawn from 1..=max_weight.
pub fn random_delaunay(seed: u64, n: usize, max_weight: u32) -> WeightedMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.max(3);
    let side = ((4 * n) as f64).sqrt().ceil() as i64 + 2;
    let mut cells: Vec<(i64, i64)> = (0..=side).flat_map(|x| (0..=side).map(move |y| (x, y))).collect();
    cells.shuffle(&mut rng);
    // avoid an all-collinear draw
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for c in cells {
        if pts.len() == n {
            break;
        }
        pts.push(c);
        if pts.len() == n && collinear(&pts) {
            pts.pop();
        }
    }
    let mut tri: DelaunayTriangulation<spade::Point2<f64>> = DelaunayTriangulation::new();
    for &(x, y) in &pts {
        tri.insert(spade::Point2::new(x as f64, y as f64)).unwrap();
    }
    let verts: Vec<Point2> = tri.vertices().map(|v| p(v.position().x, v.position().y)).collect();
    let faces = tri
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices().map(|v| v.fix().index());
            ([a, b, c], rng.random_range(1..=max_weight.max(1)) as f64)
        })
        .collect();
    WeightedMesh::new(verts, faces).unwrap()
}

fn collinear(pts: &[(i64, i64)]) -> bool {
    let (a, b) = (pts[0], pts[1]);
    pts.iter().all(|&c| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) == 0)
}

pub fn generate(kind: FixtureKind, opts: &GenOptions) -> WeightedMesh {
    match kind {
        FixtureKind::Single => single(),
        FixtureKind::TwoRegion => two_region(4.0),
        FixtureKind::Strip => strip(opts.size),
        FixtureKind::RandomDelaunay => random_delaunay(opts.seed, opts.size, opts.max_weight),
        FixtureKind::Fan => fan(opts.size, opts.max_weight),
    }
}
