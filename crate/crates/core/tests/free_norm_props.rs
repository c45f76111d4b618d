mod common;

use common::{random_molecule, random_space, rel_close};
use lipfree::free_norm::{check_result, free_norm, free_norm_exact_small, free_norm_p1, free_norm_upper, Backend, Molecule, UpperConfig};
use lipfree::metric::NormKind;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_matches_flow_at_p1(n in 2usize..=7, seed in any::<u64>()) {
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let m = random_molecule(&s, seed ^ 1);
        let a = free_norm_exact_small(&s, &m, 1.0).unwrap();
        let b = free_norm_p1(&s, &m).unwrap();
        prop_assert!(rel_close(a.value, b.value, 1e-9), "{} vs {}", a.value, b.value);
        check_result(&s, &m, 1.0, &b).unwrap();
    }

    #[test]
    fn delta_differences_are_isometric(n in 2usize..=7, seed in any::<u64>(), pi in 0usize..4) {
        let p = [1.0, 0.75, 0.5, 0.25][pi];
        let s = random_space(n, 2, NormKind::Sup, seed);
        for x in 0..n {
            for y in (x + 1)..n {
                let v = free_norm_exact_small(&s, &Molecule::delta_diff(&s, x, y), p).unwrap().value;
                prop_assert!(rel_close(v, s.d(x, y), 1e-9));
            }
        }
    }

    #[test]
    fn p_norm_axioms(n in 3usize..=6, seed in any::<u64>(), c in -3.0f64..3.0, pi in 0usize..3) {
        let p = [1.0, 0.6, 0.3][pi];
        let s = random_space(n, 2, NormKind::Taxicab, seed);
        let a = random_molecule(&s, seed ^ 2);
        let b = random_molecule(&s, seed ^ 3);
        let na = free_norm_exact_small(&s, &a, p).unwrap().value;
        let nb = free_norm_exact_small(&s, &b, p).unwrap().value;
        let mut sum = a.clone();
        sum.add_scaled(&b, 1.0);
        let ns = free_norm_exact_small(&s, &sum, p).unwrap().value;
        prop_assert!(ns.powf(p) <= (na.powf(p) + nb.powf(p)) * (1.0 + 1e-9) + 1e-12);
        let nc = free_norm_exact_small(&s, &a.scaled(c), p).unwrap().value;
        prop_assert!((nc - c.abs() * na).abs() <= 1e-9 * na.max(1.0));
    }

    #[test]
    fn upper_solver_never_undercuts_exact(n in 2usize..=7, seed in any::<u64>(), pi in 0usize..3) {
        let p = [0.9, 0.5, 0.2][pi];
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let m = random_molecule(&s, seed ^ 4);
        let exact = free_norm_exact_small(&s, &m, p).unwrap();
        let upper = free_norm_upper(&s, &m, p, &UpperConfig::default()).unwrap();
        prop_assert!(upper.value >= exact.value * (1.0 - 1e-9));
        check_result(&s, &m, p, &upper).unwrap();
        check_result(&s, &m, p, &exact).unwrap();
    }

    #[test]
    fn rescaling_scales_norms(n in 2usize..=6, seed in any::<u64>(), c in 0.1f64..10.0) {
        let s = random_space(n, 2, NormKind::Euclidean, seed);
        let m = random_molecule(&s, seed ^ 5);
        let t = s.rescaled(c).unwrap();
        for p in [1.0, 0.5] {
            let a = free_norm(&s, &m, p, &Backend::default()).unwrap().value;
            let b = free_norm(&t, &m, p, &Backend::default()).unwrap().value;
            prop_assert!(rel_close(b, c * a, 1e-9) || a == 0.0);
        }
    }
}

#[test]
fn flow_duality_gap_on_larger_instances() {
    for seed in 0..40u64 {
        let s = random_space(10 + (seed as usize % 30), 2, NormKind::Euclidean, seed);
        let m = random_molecule(&s, seed + 100);
        if m.is_zero() {
            continue;
        }
        let r = free_norm_p1(&s, &m).unwrap();
        let cert = r.certificate.as_ref().expect("p = 1 results carry a certificate");
        let dual = m.pair(cert);
        assert!((r.value - dual).abs() <= 1e-9 * r.value.max(1.0));
        check_result(&s, &m, 1.0, &r).unwrap();
    }
}
