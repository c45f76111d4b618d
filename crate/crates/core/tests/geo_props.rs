use lipfree::free_norm::Backend;
use lipfree::geo_maps::{
    mirrored_band_residual, outward_amenability_map, radial_retraction, radius, snap_map, stereographic, verify_r_closed,
    verify_self_similar, xi, Scaling, SphereSample, RADIUS_TOL,
};
use lipfree::metric::{NormKind, PointedMetricSpace};
use proptest::prelude::*;

/// Integer grid `{-n..n}^2`, base at the origin.
fn grid(n: i32, norm: NormKind) -> PointedMetricSpace {
    let mut pts = vec![vec![0.0, 0.0]];
    for i in -n..=n {
        for j in -n..=n {
            if (i, j) != (0, 0) {
                pts.push(vec![i as f64, j as f64]);
            }
        }
    }
    PointedMetricSpace::build(pts, norm, 1.0, 0).unwrap()
}

/// `rays` rays through the origin with points at radii `2^{j/4}`.
fn ray_sample(rays: usize, levels: usize) -> PointedMetricSpace {
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 0..rays {
        let th = k as f64 * std::f64::consts::TAU / rays as f64;
        for j in 0..levels {
            let r = 2f64.powf(j as f64 / 4.0);
            pts.push(vec![r * th.cos(), r * th.sin()]);
        }
    }
    PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap()
}

fn unit(v: [f64; 3]) -> Vec<f64> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.iter().map(|c| c / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn retraction_is_idempotent_and_two_lipschitz(j in 0usize..12, rays in 1usize..6) {
        let s = ray_sample(rays, 12);
        let rep = radial_retraction(&s, 2f64.powf(j as f64 / 4.0)).unwrap();
        prop_assert!(rep.idempotent && rep.fixes_ball);
        prop_assert!(rep.lipschitz.value <= 2.0 * (1.0 + 1e-9));
        for x in 0..s.len() {
            prop_assert!(radius(&s, rep.map[x]) <= rep.s * (1.0 + 1e-12));
        }
    }

    #[test]
    fn outward_map_restricts_to_delta(j in 1usize..10, pi in 0usize..2) {
        let p = [1.0, 0.5][pi];
        let s = ray_sample(2, 12);
        let subset: Vec<usize> = (1..s.len()).collect();
        let (map, rep) = outward_amenability_map(&s, &subset, 2f64.powf(j as f64 / 4.0), p, &Backend::default()).unwrap();
        prop_assert!(rep.restricts_to_delta);
        for (k, &g) in map.target_points.iter().enumerate() {
            prop_assert!(g == map.target_points[map.target.base()] || radius(&map.target, k) >= rep.s * (1.0 - 1e-12));
        }
    }

    #[test]
    fn scaling_axioms_on_grids(n in 1i32..5, seed in any::<u64>(), ni in 0usize..3) {
        let norm = [NormKind::Euclidean, NormKind::Taxicab, NormKind::Sup][ni];
        let s = grid(n, norm);
        prop_assert!(verify_self_similar(&s, Scaling::Contraction, 100, seed).unwrap().pass);
        prop_assert!(verify_self_similar(&s, Scaling::Dilation, 100, seed).unwrap().pass);
    }

    #[test]
    fn stereographic_radii_match_levels(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..0.95) {
        prop_assume!(a * a + b * b > 1e-6);
        let pts = vec![unit([a, b, c]), unit([-b, a, c]), unit([1.0, 0.0, 0.0])];
        let sample = SphereSample::new(pts).unwrap();
        let rep = stereographic(&sample).unwrap();
        prop_assert!(rep.max_radius_error <= RADIUS_TOL);
        prop_assert!(rep.band_error <= 1e-9);
        for row in &rep.rows {
            prop_assert!((row.radius - xi(row.h)).abs() <= RADIUS_TOL);
        }
        prop_assert!(mirrored_band_residual(&sample) <= 1e-12);
    }
}

#[test]
fn dilation_by_two_is_r_closed_after_rescaling() {
    for c in [1.0, 2.0, 4.0] {
        let s = grid(4, NormKind::Euclidean).rescaled(c).unwrap();
        let img = snap_map(&s, |v| v.iter().map(|x| 2.0 * x).collect()).unwrap();
        let rep = verify_r_closed(&s, &img, 2.0).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn snowflaked_r_closedness_uses_the_exponent() {
    let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
    let s = PointedMetricSpace::build(pts, NormKind::Euclidean, 0.5, 0).unwrap();
    let img = snap_map(&s, |v| vec![2.0 * v[0]]).unwrap();
    let rep = verify_r_closed(&s, &img, 2.0).unwrap();
    assert!(rep.pass && rep.escaped == 4);
}
