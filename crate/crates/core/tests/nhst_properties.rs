use distnull_core::dist::{
    asymptotic_z_bound, dist_p_value, dist_t_crit, dist_test, dist_z_crit, replication_probability,
    DistributionalNull,
};
use distnull_core::point::{point_p_value, point_test, point_z_crit};
use distnull_core::special::{t_quantile, DegreesOfFreedom};
use distnull_core::{ExperimentDesign, ExperimentSummary};
use proptest::prelude::*;

fn nu(v: f64) -> DegreesOfFreedom {
    DegreesOfFreedom::new(v).unwrap()
}

fn null(q: f64) -> DistributionalNull {
    DistributionalNull::new(q).unwrap()
}

proptest! {
    #[test]
    fn point_p_value_matches_z_crit(z in -3.0f64..3.0, n in 2u64..500, alpha in 0.001f64..0.49) {
        let v = nu((n - 1) as f64);
        let p = point_p_value(z, n, v).unwrap();
        let zc = point_z_crit(alpha, n, v).unwrap();
        // skip razor-thin boundary cases
        prop_assume!((z.abs() - zc).abs() > 1e-9);
        prop_assert_eq!(p <= alpha, z.abs() >= zc);
    }

    #[test]
    fn point_z_crit_decreases_in_n(n in 2u64..10_000, alpha in 0.001f64..0.49, v in 1.0f64..100.0) {
        let a = point_z_crit(alpha, n, nu(v)).unwrap();
        let b = point_z_crit(alpha, n + 1, nu(v)).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn dist_p_value_matches_t_crit(
        t1 in -15.0f64..15.0,
        alpha in 0.001f64..0.49,
        n in 2u64..2_000,
        q in 0.0f64..1.0,
    ) {
        let v = nu((n - 1) as f64);
        let p = dist_p_value(t1, v, n, null(q)).unwrap();
        let tc = dist_t_crit(alpha, v, n, null(q)).unwrap();
        prop_assume!((t1.abs() - tc).abs() > 1e-9 * tc);
        prop_assert_eq!(p <= alpha, t1.abs() >= tc);
    }

    #[test]
    fn z_crit_strictly_above_bound(alpha in 0.001f64..0.49, n in 2u64..1_000_000, q in 1e-4f64..2.0) {
        let v = nu(30.0);
        let z = dist_z_crit(alpha, v, n, null(q)).unwrap();
        let b = asymptotic_z_bound(alpha, v, null(q)).unwrap();
        prop_assert!(z > b);
    }

    #[test]
    fn q_zero_reduces_to_point_form(
        t1 in -10.0f64..10.0,
        alpha in 0.001f64..0.49,
        n in 2u64..5_000,
    ) {
        let v = nu((n - 1) as f64);
        let z = t1 / (n as f64).sqrt();
        let dp = dist_p_value(t1, v, n, null(0.0)).unwrap();
        let pp = point_p_value(z, n, v).unwrap();
        prop_assert!((dp - pp).abs() <= 1e-13);
        let dz = dist_z_crit(alpha, v, n, null(0.0)).unwrap();
        let pz = point_z_crit(alpha, n, v).unwrap();
        prop_assert!((dz - pz).abs() <= 1e-13);
        prop_assert_eq!(replication_probability(t1, alpha, v, n, null(0.0)).unwrap(), alpha);
    }

    #[test]
    fn replication_probability_increases_in_abs_t(
        a in 0.0f64..10.0,
        d in 0.01f64..5.0,
        q in 0.001f64..1.0,
    ) {
        let v = nu(19.0);
        let lo = replication_probability(a, 0.05, v, 20, null(q)).unwrap();
        let hi = replication_probability(-(a + d), 0.05, v, 20, null(q)).unwrap();
        prop_assert!(hi >= lo);
        prop_assert!(lo > 0.0 && hi < 1.0);
    }
}

#[test]
fn sub_bound_effects_never_significant() {
    let v = nu(9.0);
    for &q in &[0.02, 0.05, 0.35] {
        let bound = asymptotic_z_bound(0.05, v, null(q)).unwrap();
        for frac in [0.1, 0.5, 0.99] {
            let z = frac * bound;
            for n in [2u64, 10, 1_000, 1_000_000] {
                let t = z * (n as f64).sqrt();
                let tc = dist_t_crit(0.05, v, n, null(q)).unwrap();
                assert!(t < tc, "q={q} z={z} n={n}");
            }
        }
    }
}

#[test]
fn paired_and_one_sample_reports_coincide() {
    let one = ExperimentSummary::new(ExperimentDesign::OneSample, 15, 0.7, 1.3).unwrap();
    let paired = ExperimentSummary::new(ExperimentDesign::Paired, 15, 0.7, 1.3).unwrap();
    assert_eq!(point_test(&one, 0.05).unwrap(), point_test(&paired, 0.05).unwrap());
    assert_eq!(
        dist_test(&one, 0.05, null(0.05)).unwrap(),
        dist_test(&paired, 0.05, null(0.05)).unwrap()
    );
}

#[test]
fn two_sample_uses_pooled_degrees_of_freedom() {
    let s = ExperimentSummary::two_sample(10, 3.0, 2.0, 10, 1.0, 2.0).unwrap();
    let r = dist_test(&s, 0.05, null(0.05)).unwrap();
    assert_eq!(r.nu.get(), 18.0);
    let expect_crit = t_quantile(0.95, nu(18.0)).unwrap() * 1.5f64.sqrt();
    assert!((r.t_crit - expect_crit).abs() < 1e-14);
}

#[test]
fn q_zero_reports_match_point_reports() {
    let s = ExperimentSummary::one_sample(30, 0.4, 1.1).unwrap();
    let p = point_test(&s, 0.05).unwrap();
    let d = dist_test(&s, 0.05, null(0.0)).unwrap();
    assert_eq!(p.p_value, d.p_value);
    assert_eq!(p.t_crit, d.t_crit);
    assert_eq!(p.z_crit, d.z_crit);
    assert_eq!(p.significant, d.significant);
    assert_eq!(d.asymptotic_bound_z, 0.0);
}
