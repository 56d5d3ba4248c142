use wrp_core::optics::path_cost;
use wrp_core::oracle::{build_steiner_graph, oracle_auto, oracle_shortest, oracle_with_point, OracleError};
use wrp_core::{Point2, WeightedMesh};

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

fn two_region(w2: f64) -> WeightedMesh {
    WeightedMesh::new(
        vec![p(0.0, -1.0), p(1.0, -1.0), p(2.0, -1.0), p(0.0, 1.0), p(1.0, 1.0), p(2.0, 1.0)],
        vec![([0, 1, 4], 1.0), ([0, 4, 3], 1.0), ([1, 2, 5], w2), ([1, 5, 4], w2)],
    )
    .unwrap()
}

const FROZEN_W4: f64 = 6.137302240847761;

// node sets only nest under m -> 2m + 1 (spacing l/(m+1))
#[test]
fn refinement_is_monotone() {
    let m = two_region(4.0);
    let mut last = f64::INFINITY;
    for k in [0, 1, 3, 7, 15, 31, 63, 127] {
        let r = oracle_shortest(&build_steiner_graph(&m, k), 3, 2).unwrap();
        assert!(r.cost <= last + 1e-12, "m={k}: {} > {last}", r.cost);
        last = r.cost;
    }
}

#[test]
fn slack_brackets_the_analytic_cost() {
    let m = two_region(4.0);
    for k in [1, 4, 16, 64, 400] {
        let r = oracle_shortest(&build_steiner_graph(&m, k), 3, 2).unwrap();
        assert!(r.cost - r.slack <= FROZEN_W4 + 1e-12 && FROZEN_W4 <= r.cost + 1e-12, "m={k} {r:?}");
        let pc = path_cost(&m, &r.polyline).unwrap();
        assert!((pc - r.cost).abs() <= 1e-9 * r.cost);
    }
}

#[test]
fn auto_reaches_the_target() {
    let m = two_region(4.0);
    let r = oracle_auto(&m, 3, 2, 0.01, 4096).unwrap();
    assert!(r.slack <= 0.01 * r.cost);
    assert!(r.m.is_power_of_two());
}

#[test]
fn point_queries() {
    let m = two_region(4.0);
    let g = build_steiner_graph(&m, 8);
    let v = oracle_with_point(&m, 8, 3, m.vertex(5)).unwrap();
    assert!((v.cost - oracle_shortest(&g, 3, 5).unwrap().cost).abs() < 1e-12);
    let c = m.centroid(1);
    let r = oracle_with_point(&m, 8, 3, c).unwrap();
    assert!((r.cost - m.vertex(3).dist(c)).abs() < 1e-12);
    assert_eq!(oracle_with_point(&m, 8, 3, p(5.0, 5.0)).unwrap_err(), OracleError::Outside);
}

#[test]
fn isolated_vertex() {
    let m = WeightedMesh::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(5.0, 5.0)], vec![([0, 1, 2], 1.0)])
        .unwrap();
    let g = build_steiner_graph(&m, 2);
    assert_eq!(oracle_shortest(&g, 0, 3).unwrap_err(), OracleError::Unreachable);
}
