use distnull::mc::{
    fpr_vs_n, simulate_fpr, simulate_replication, CalibrationReport, DrawMode, ReplicationVariant, SimConfig,
};
use distnull_core::dist::{dist_t_crit, DistributionalNull};
use distnull_core::special::t_cdf;
use distnull_core::{DegreesOfFreedom, ExperimentDesign};

const ALPHA: f64 = 0.05;

fn cfg(design: ExperimentDesign, n: u64, q: f64) -> SimConfig {
    SimConfig::new(design, n, q).with_trials(40_000).with_seed(11)
}

fn within(r: &CalibrationReport, target: f64) -> bool {
    r.agrees_with(target, 3.0)
}

#[test]
fn identical_seeds_give_identical_reports() {
    let c = cfg(ExperimentDesign::TwoSampleEqualN, 15, 0.05);
    assert_eq!(simulate_fpr(&c, ALPHA, 0.02).unwrap(), simulate_fpr(&c, ALPHA, 0.02).unwrap());
    let a = simulate_replication(2.5, &c, ALPHA, ReplicationVariant::IndependentS2).unwrap();
    let b = simulate_replication(2.5, &c, ALPHA, ReplicationVariant::IndependentS2).unwrap();
    assert_eq!(a, b);
    let other = simulate_fpr(&c.with_seed(12), ALPHA, 0.02).unwrap();
    assert_ne!(other.hits, simulate_fpr(&c, ALPHA, 0.02).unwrap().hits);
}

#[test]
fn rates_do_not_depend_on_sigma() {
    for design in [ExperimentDesign::OneSample, ExperimentDesign::Paired, ExperimentDesign::TwoSampleEqualN] {
        let base = simulate_fpr(&cfg(design, 12, 0.1), ALPHA, 0.0).unwrap();
        for sigma in [0.1, 10.0] {
            let r = simulate_fpr(&cfg(design, 12, 0.1).with_sigma(sigma), ALPHA, 0.0).unwrap();
            assert!((r.rate - base.rate).abs() <= 3.0 * base.mc_se.max(r.mc_se), "{design} sigma={sigma}");
        }
        let rep = |sigma: f64| {
            simulate_replication(3.0, &cfg(design, 12, 0.1).with_sigma(sigma), ALPHA, ReplicationVariant::SharedSd)
                .unwrap()
                .calibration
        };
        let (a, b) = (rep(1.0), rep(10.0));
        assert!((a.rate - b.rate).abs() <= 3.0 * a.mc_se.max(b.mc_se), "{design}");
    }
}

#[test]
fn every_design_is_calibrated() {
    for design in [ExperimentDesign::OneSample, ExperimentDesign::Paired, ExperimentDesign::TwoSampleEqualN] {
        for (n, q) in [(8u64, 0.0), (30, 0.05), (200, 0.35)] {
            let r = simulate_fpr(&cfg(design, n, q), ALPHA, q).unwrap();
            assert!(within(&r, ALPHA), "{design} n={n} q={q}: {r:?}");
        }
    }
}

#[test]
fn raw_draws_agree_with_sufficient_statistics() {
    for design in [ExperimentDesign::OneSample, ExperimentDesign::Paired, ExperimentDesign::TwoSampleEqualN] {
        let c = cfg(design, 10, 0.05).with_draw(DrawMode::Raw);
        let r = simulate_fpr(&c, ALPHA, 0.05).unwrap();
        assert!(within(&r, ALPHA), "{design}: {r:?}");
        let rep = simulate_replication(4.0, &c, ALPHA, ReplicationVariant::SharedSd).unwrap();
        assert!(within(&rep.calibration, rep.expected), "{design}: {rep:?}");
    }
}

#[test]
fn point_form_rates_grow_with_n() {
    let base = cfg(ExperimentDesign::OneSample, 2, 0.05);
    let rows = fpr_vs_n(&base, ALPHA, &[10, 100, 1000], 0.0).unwrap();
    assert!(rows[0].1.rate < rows[1].1.rate && rows[1].1.rate < rows[2].1.rate);
    assert!(rows[2].1.rate > 0.2);
    let flat = fpr_vs_n(&base, ALPHA, &[10, 100, 1000], 0.05).unwrap();
    for (n, r) in flat {
        assert!(within(&r, ALPHA), "n={n}");
    }
}

#[test]
fn replication_matches_formula_for_worked_example() {
    let c = SimConfig::new(ExperimentDesign::OneSample, 20, 0.05).with_seed(3);
    let r = simulate_replication(4.0, &c, ALPHA, ReplicationVariant::SharedSd).unwrap();
    assert!((r.expected - 0.360_071_774_963_771_85).abs() < 1e-12);
    assert!(within(&r.calibration, r.expected), "{r:?}");
}

#[test]
fn opposite_sign_replications_are_not_counted() {
    // a small positive t1 with a large q leaves room for negative significant repeats
    let c = cfg(ExperimentDesign::OneSample, 20, 0.5);
    let pos = simulate_replication(0.5, &c, ALPHA, ReplicationVariant::SharedSd).unwrap();
    let neg = simulate_replication(-0.5, &c, ALPHA, ReplicationVariant::SharedSd).unwrap();
    assert!(pos.wrong_sign > 0);
    assert!(pos.calibration.hits + pos.wrong_sign <= pos.calibration.trials);
    assert!(within(&pos.calibration, pos.expected));
    assert!(within(&neg.calibration, neg.expected));
    assert_eq!(pos.expected, neg.expected);

    // the opposite tail: T_ν((−s|t1| − t_crit)/scale)
    let nu = DegreesOfFreedom::new(19.0).unwrap();
    let null = DistributionalNull::new(0.5).unwrap();
    let qn: f64 = 10.0;
    let t_crit = dist_t_crit(ALPHA, nu, 20, null).unwrap();
    let arg = (-null.shrinkage(20) * 0.5 - t_crit) / ((1.0 + 2.0 * qn) / (1.0 + qn)).sqrt();
    let wrong = CalibrationReport::from_hits(pos.wrong_sign, pos.calibration.trials);
    assert!(within(&wrong, t_cdf(arg, nu)), "{wrong:?} vs {}", t_cdf(arg, nu));
}

#[test]
fn zero_q_replication_rate_is_alpha() {
    for t1 in [0.0, 3.0, -6.0] {
        let r = simulate_replication(t1, &cfg(ExperimentDesign::Paired, 25, 0.0), ALPHA, ReplicationVariant::SharedSd)
            .unwrap();
        assert_eq!(r.expected, ALPHA);
        assert!(within(&r.calibration, ALPHA), "t1={t1}: {r:?}");
    }
}

#[test]
fn independent_variant_runs_and_is_reported() {
    let c = cfg(ExperimentDesign::OneSample, 10, 0.05);
    let shared = simulate_replication(4.0, &c, ALPHA, ReplicationVariant::SharedSd).unwrap();
    let indep = simulate_replication(4.0, &c, ALPHA, ReplicationVariant::IndependentS2).unwrap();
    assert_eq!(shared.expected, indep.expected);
    assert!(indep.calibration.rate > 0.0 && indep.calibration.rate < 1.0);
}
