mod common;

use common::random_space;
use lipfree::extension::{amenability_defect, doubling_extension_map, point_removal_map, whitney_cover, within_bound};
use lipfree::free_norm::Backend;
use lipfree::metric::NormKind;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_subset(len: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rest: Vec<usize> = (1..len).collect();
    rest.shuffle(&mut rng);
    let mut s = vec![0];
    s.extend(rest.into_iter().take(k));
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn whitney_checks_hold_on_random_clouds(n in 6usize..=40, frac in 0.1f64..0.6, seed in any::<u64>()) {
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let k = ((n as f64 * frac) as usize).max(1);
        let (sys, rep) = whitney_cover(&s, &random_subset(n, k, seed)).unwrap();
        prop_assert!(rep.pass());
        prop_assert!(rep.overlap_max as f64 <= sys.overlap_bound());
        for x in 0..s.len() {
            if !sys.in_subset(x) {
                let w: f64 = sys.psi(x).iter().map(|e| e.1).sum();
                prop_assert!((w - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn extension_is_a_projection(n in 5usize..=14, seed in any::<u64>(), pi in 0usize..2) {
        let p = [1.0, 0.5][pi];
        let s = random_space(n, 2, NormKind::Sup, seed);
        let (_, rep) = doubling_extension_map(&s, &random_subset(n, n / 3, seed ^ 1), p, &Backend::default()).unwrap();
        prop_assert!(rep.restricts_to_delta);
        prop_assert!(rep.weights_ok);
        prop_assert!(rep.idempotent_residual <= 1e-10);
        prop_assert!(rep.crucial.pass);
        prop_assert!(within_bound(rep.lipschitz.value, rep.bound));
    }

    #[test]
    fn removing_a_point_costs_at_most_two(n in 3usize..=8, x in 0usize..8, seed in any::<u64>(), pi in 0usize..3) {
        let p = [1.0, 0.75, 0.5][pi];
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let (map, rep) = point_removal_map(&s, x % n, p, &Backend::Exact).unwrap();
        prop_assert!(rep.sum_inequality_ok);
        prop_assert!(within_bound(rep.lipschitz.value, rep.bound));
        prop_assert!(map.images[x % n].is_zero());
    }

    #[test]
    fn subsets_are_isometric_at_p1(n in 4usize..=8, seed in any::<u64>()) {
        let s = random_space(n, 2, NormKind::Taxicab, seed);
        let rep = amenability_defect(&s, &random_subset(n, n / 2, seed), 1.0, 12, seed, &Backend::Exact).unwrap();
        prop_assert!(rep.certified);
        prop_assert!((rep.max_ratio - 1.0).abs() <= 1e-9);
        prop_assert!((rep.min_ratio - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn ratios_are_at_least_one_below_p1() {
    let s = random_space(7, 2, NormKind::Euclidean, 31);
    let rep = amenability_defect(&s, &[0, 2, 4, 6], 0.5, 20, 3, &Backend::Exact).unwrap();
    assert!(rep.certified);
    assert!(rep.min_ratio >= 1.0 - 1e-9);
}

#[test]
fn subset_must_contain_base() {
    let s = random_space(6, 1, NormKind::Euclidean, 2);
    assert!(whitney_cover(&s, &[1, 2]).is_err());
    assert!(whitney_cover(&s, &[0, 0, 1]).is_err());
}
