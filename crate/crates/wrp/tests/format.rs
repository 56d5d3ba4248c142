use proptest::prelude::*;
use wrp::format::{load_map, parse_mesh, save_map, write_mesh};
use wrp::gen;
use wrp_core::wavefront::{build_sssp_map, compute_params, query_sssp, Mode, RunOptions};
use wrp_core::{compute_stats, Point2};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_meshes_round_trip(seed in 0u64..10_000, n in 3usize..30, w in 1u32..10) {
        let m = gen::random_delaunay(seed, n, w);
        let text = write_mesh(&m);
        let again = parse_mesh(&text).unwrap();
        prop_assert_eq!(again.vertices(), m.vertices());
        prop_assert_eq!(again.faces(), m.faces());
        prop_assert_eq!(write_mesh(&again), text);
    }

    #[test]
    fn perturbed_coordinates_round_trip(dx in -1e3f64..1e3, dy in -1e3f64..1e3, s in 1e-6f64..1e3) {
        let m = gen::two_region(4.0);
        let v: Vec<Point2> = m.vertices().iter().map(|p| Point2::new(p.x * s + dx, p.y * s + dy)).collect();
        let f = m.faces().iter().map(|f| (f.vertices, f.weight)).collect();
        let m = wrp_core::WeightedMesh::new(v, f).unwrap();
        let again = parse_mesh(&write_mesh(&m)).unwrap();
        prop_assert_eq!(again.vertices(), m.vertices());
    }
}

#[test]
fn map_file_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let m = gen::random_delaunay(3, 10, 8);
    let params = compute_params(&compute_stats(&m), 0.1, Mode::Practical).unwrap();
    let map = build_sssp_map(&m, 0, &params, &RunOptions::default()).unwrap();
    let p = d.path().join("a.map");
    save_map(&p, &m, &map).unwrap();
    let (m2, map2) = load_map(&p).unwrap();
    assert_eq!(m2.vertices(), m.vertices());
    assert_eq!(map2, map);
    let q = m.centroid(2);
    assert_eq!(query_sssp(&m2, &map2, q).unwrap(), query_sssp(&m, &map, q).unwrap());
}
