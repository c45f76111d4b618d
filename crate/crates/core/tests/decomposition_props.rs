mod common;

use common::random_space;
use lipfree::decomposition::{
    build_hat_partition, log_window, operator_p, overlap, verify_pst_identity, verify_separated_inverse, AnnulusFamily,
    IDENTITY_TOL,
};
use lipfree::free_norm::{free_norm, lp_sum_norm, Backend, Molecule, SumElement};
use lipfree::metric::{IntervalSpec, NormKind, PointedMetricSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rays(rays: usize, radii: &[f64]) -> PointedMetricSpace {
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 0..rays {
        let th = k as f64 * std::f64::consts::TAU / rays as f64;
        for &r in radii {
            pts.push(vec![r * th.cos(), r * th.sin()]);
        }
    }
    PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap()
}

fn shift_two(space: &PointedMetricSpace, radix: f64) -> Vec<(i64, IntervalSpec)> {
    AnnulusFamily::preset_shift_two(space, radix).unwrap().intervals().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hat_partitions_sum_to_one(seed in any::<u64>(), r in 0.2f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // consecutive intervals overlapping enough for their cores to chain
        let mut ints = Vec::new();
        let mut a = -1.0;
        for _ in 0..rng.gen_range(1..6) {
            let len = 2.0 * r + rng.gen_range(0.5..3.0);
            ints.push((a, a + len));
            a += len - 2.0 * r - rng.gen_range(0.0..0.4);
        }
        let window = (ints[0].0 + r, ints.last().unwrap().1 - r);
        let k = overlap(&ints);
        let w = build_hat_partition(&ints, r, k, window).unwrap();
        let rep = w.measure();
        prop_assert!(rep.max_sum_error <= 1e-12);
        prop_assert!(rep.range_ok && rep.support_ok);
        for l in rep.lipschitz {
            prop_assert!(l <= 3.0 * k as f64 / r + 1e-9);
        }
    }

    #[test]
    fn pst_is_identity_on_random_clouds(n in 3usize..=12, seed in any::<u64>()) {
        let s = random_space(n, 2, NormKind::Sup, seed);
        let rep = verify_pst_identity(&s, 2.0, &shift_two(&s, 2.0), 0.5, 1.0, &Backend::default()).unwrap();
        prop_assert!(rep.residual <= IDENTITY_TOL);
        prop_assert!(rep.weight_sum_error <= 1e-12);
        prop_assert!(rep.measured_t.value <= rep.bound_t);
    }

    #[test]
    fn p_never_increases_norms(n in 3usize..=7, seed in any::<u64>(), pi in 0usize..2) {
        let p = [1.0, 0.5][pi];
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let fam = AnnulusFamily::preset_shift_two(&s, 2.0).unwrap();
        let pm = operator_p(&fam);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
        let mut parts = Vec::new();
        let mut total = vec![0.0; s.len()];
        for part in 0..fam.len() {
            let sub = fam.subspace(part);
            let mut coeffs = Vec::new();
            for y in 0..sub.len() {
                if y != sub.base() && rng.gen_bool(0.5) {
                    coeffs.push((y, rng.gen_range(-1.0..1.0)));
                }
            }
            for &(y, a) in &coeffs {
                total[fam.members(part)[y]] += a;
                total[s.base()] -= a;
            }
            parts.push((part, Molecule::from_coeffs(sub, &coeffs).unwrap()));
        }
        let e = SumElement { p, parts };
        let pe = Molecule::from_dense(total).unwrap();
        let lhs = free_norm(&s, &pe, p, &Backend::Exact).unwrap().value;
        let rhs = lp_sum_norm(fam.subspaces(), &e, &Backend::Exact).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
        prop_assert_eq!(pm.cols().len(), fam.subspaces().iter().map(|x| x.len() - 1).sum::<usize>());
    }
}

#[test]
fn measured_t_is_invariant_under_radix_powers() {
    let radii: Vec<f64> = (0..10).map(|j| 1.3 * 2f64.powi(j)).collect();
    let s = rays(3, &radii);
    let base = verify_pst_identity(&s, 2.0, &shift_two(&s, 2.0), 0.5, 1.0, &Backend::default()).unwrap();
    let t = s.rescaled(4.0).unwrap();
    let scaled = verify_pst_identity(&t, 2.0, &shift_two(&t, 2.0), 0.5, 1.0, &Backend::default()).unwrap();
    assert!((base.measured_t.value - scaled.measured_t.value).abs() <= 1e-9 * base.measured_t.value);
}

#[test]
fn two_set_family_identity() {
    let radii: Vec<f64> = (0..12).map(|j| 2f64.powf(j as f64 / 3.0 - 2.0)).collect();
    let s = rays(4, &radii);
    let fam = AnnulusFamily::preset_two_set(&s, 2.0).unwrap();
    let rep = verify_pst_identity(&s, 2.0, fam.intervals(), 0.25, 1.0, &Backend::default()).unwrap();
    assert!(rep.residual <= IDENTITY_TOL);
    assert_eq!(rep.k, 2);
}

#[test]
fn geometric_family_ratio_stays_below_two() {
    // A_n = (3^{2n}, 3^{2n+1}], gap K = 3
    let pts: Vec<Vec<f64>> = [0.0, 1.5, 2.0, 3.0, 12.0, 20.0, 27.0, 100.0, 200.0]
        .iter()
        .map(|&x| vec![x])
        .collect();
    let s = PointedMetricSpace::build(pts, NormKind::Euclidean, 1.0, 0).unwrap();
    let annuli: Vec<IntervalSpec> =
        (0..3).map(|n| IntervalSpec::left_open(9f64.powi(n) * 1.0, 9f64.powi(n) * 3.0).unwrap()).collect();
    let rep = verify_separated_inverse(&s, &annuli, 1.0, 200, 4, &Backend::default()).unwrap();
    assert_eq!(rep.gap, 3.0);
    assert_eq!(rep.bound, 2.0);
    assert!(rep.max_ratio <= 2.0 * (1.0 + 1e-9));
    assert!(rep.max_ratio >= 1.0 - 1e-9);
    let window = log_window(&s, 3.0).unwrap();
    assert!(window.0 < window.1);
}
