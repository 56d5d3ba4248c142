use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use wrp_core::optics::{default_budget, refract, trace_ray, RefractionOutcome, TraceEventKind};
use wrp_core::wavefront::{interpolate_ray, search, strict_delta, Pos, Span, StrikeView};
use wrp_core::{Point2, WeightedMesh};

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

/// 4x4 grid of unit squares with the given 32 face weights.
fn grid(weights: &[f64]) -> WeightedMesh {
    let id = |i: usize, j: usize| j * 5 + i;
    let v = (0..5).flat_map(|j| (0..5).map(move |i| p(i as f64, j as f64))).collect();
    let mut f = Vec::new();
    for j in 0..4 {
        for i in 0..4 {
            let k = 2 * (j * 4 + i);
            f.push(([id(i, j), id(i + 1, j), id(i + 1, j + 1)], weights[k]));
            f.push(([id(i, j), id(i + 1, j + 1), id(i, j + 1)], weights[k + 1]));
        }
    }
    WeightedMesh::new(v, f).unwrap()
}

/// (mantissa, exponent) with x = m 2^e exactly.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64;
    let f = bits & ((1 << 52) - 1);
    (f | (1 << 52), e - 1075)
}

/// num / den · 2^shift rounded to nearest, ties to even.
fn round_ratio(num: &BigUint, den: &BigUint, shift: i64) -> f64 {
    // pick s so that q = floor(num 2^s / den) has exactly 53 bits
    let mut s: i64 = 53 - (num.bits() as i64 - den.bits() as i64);
    loop {
        let (n, d) = if s >= 0 { (num << s as usize, den.clone()) } else { (num.clone(), den << (-s) as usize) };
        let q = &n / &d;
        match q.bits() {
            54.. => s -= 1,
            ..=52 => s += 1,
            _ => {
                let r2 = (n - &q * &d) * 2u32;
                let odd = (&q & BigUint::one()) == BigUint::one();
                let q = if r2 > d || (r2 == d && odd) { q + 1u32 } else { q };
                return libm::ldexp(q.to_f64().unwrap(), (shift - s) as i32);
            }
        }
    }
}

fn exact_strict(eps_prime: f64, n: usize, mu: f64) -> f64 {
    let e = (n * n + 1) as u32;
    let (me, ee) = decompose(eps_prime);
    let (mm, em) = decompose(mu);
    let num = BigUint::from(me).pow(e);
    let den = BigUint::from(mm) * 2u32;
    round_ratio(&num, &den, ee * e as i64 - em)
}

#[test]
fn exact_rounding_helper() {
    assert_eq!(round_ratio(&BigUint::from(1u32), &BigUint::from(3u32), 0), 1.0 / 3.0);
    assert_eq!(round_ratio(&BigUint::from(2u32), &BigUint::from(7u32), -3), 2.0 / 7.0 / 8.0);
    assert_eq!(exact_strict(0.5, 1, 1.0), 0.125);
}

proptest! {
    #[test]
    fn strict_delta_is_correctly_rounded(eps in 1e-4f64..0.2, mu in 1.0f64..16.0, n in 1usize..4) {
        prop_assert_eq!(strict_delta(eps, n, mu).unwrap(), exact_strict(eps, n, mu));
    }

    #[test]
    fn refraction_obeys_snell(theta in 0.0f64..1.57, w_in in 1.0f64..8.0, w_out in 1.0f64..8.0) {
        if let RefractionOutcome::Refract(t) = refract(theta, w_in, w_out) {
            prop_assert!((w_in * theta.sin() - w_out * t.sin()).abs() <= 1e-12);
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&t));
        }
    }

    #[test]
    fn traces_obey_snell_and_cost(
        weights in prop::collection::vec(1u32..=8, 32),
        fx in 0.05f64..0.9, fy in 0.05f64..0.9, ang in 0.0f64..std::f64::consts::TAU,
        cell in 0usize..16,
    ) {
        let w: Vec<f64> = weights.iter().map(|&x| x as f64).collect();
        let m = grid(&w);
        let (i, j) = (cell % 4, cell / 4);
        // lower triangle of the cell: x - i >= y - j
        let (fx, fy) = if fy > fx { (fy, fx) } else { (fx, fy) };
        let o = p(i as f64 + fx, j as f64 + fy * 0.999);
        let f = m.containing_face(o).unwrap();
        let t = trace_ray(&m, o, f, Point2::from_angle(ang), default_budget(&m));
        for e in &t.events {
            if e.kind == TraceEventKind::Refraction {
                prop_assert!(e.snell_residual() <= 1e-9, "{:?}", e);
            }
        }
        prop_assert!((t.recomputed_cost(&m) - t.cost).abs() <= 1e-9 * t.cost.max(1.0));
    }

    #[test]
    fn search_finds_the_boundary(lens in prop::collection::vec(1i128..40, 1..6), cut in 0.0f64..1.0) {
        let spans: Vec<Span> = lens.iter().enumerate().map(|(i, &l)| Span { source: i, lo: 0, hi: l - 1, start: 0 }).collect();
        let total: i128 = lens.iter().sum();
        prop_assume!(total >= 2);
        let g = |q: Pos| lens[..q.span].iter().sum::<i128>() + q.k;
        let c = ((cut * (total - 1) as f64) as i128).min(total - 2);
        let (a, b) = search(&spans, |q| g(q) <= c);
        prop_assert_eq!(g(a), c);
        prop_assert_eq!(g(b), c + 1);
    }

    #[test]
    fn interpolation_is_affine(
        x1 in -5.0f64..5.0, x2 in -5.0f64..5.0, t1 in -1.5f64..1.5, t2 in -1.5f64..1.5,
        d1 in 0.0f64..10.0, d2 in 0.0f64..10.0, g in 0.0f64..=1.0,
    ) {
        let v = StrikeView { q1: p(x1, 0.0), q2: p(x2, 1.0), theta1: t1, theta2: t2, d1, d2 };
        let r = interpolate_ray(&v, g).unwrap();
        prop_assert!(r.dist >= d1.min(d2) - 1e-12 && r.dist <= d1.max(d2) + 1e-12);
        prop_assert!((r.point.y - g).abs() <= 1e-12);
        prop_assert!(interpolate_ray(&v, g + 1.0 + 1e-9).is_none());
    }
}
