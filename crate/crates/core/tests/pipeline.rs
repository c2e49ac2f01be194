//! Cross-module pipeline checks on the synthetic benchmarks.

use counterfact_core::counterfactual::{analyze_unit, pairwise_table, AnalysisOptions};
use counterfact_core::exec::Parallelism;
use counterfact_core::experiments::{
    coverage_run, gen_nonlinear, nonlinear_mean0, nonlinear_mean1, CoverageConfig,
};

/// On the nonlinear benchmark the exposure-1 response at x = 30 sits well
/// above the exposure-0 response (96.0 vs 88.4 in the mean functions), so
/// the fitted point predictions should order that way in almost every
/// replication.
#[test]
fn nonlinear_effect_direction_at_x30() {
    assert!(nonlinear_mean1(30.0) > nonlinear_mean0(30.0));
    let opts = AnalysisOptions::new(0.9, 10);
    let mut correct = 0;
    let total = 100;
    for rep in 0..total {
        let (data, _units) = gen_nonlinear(120, 7000 + rep).unwrap();
        let analyses = analyze_unit(&data, &[30.0], &opts, Parallelism::Rayon).unwrap();
        if analyses[1].point > analyses[0].point {
            correct += 1;
        }
    }
    assert!(
        correct >= 95,
        "exposure-1 prediction exceeded exposure-0 in only {correct}/{total} replications"
    );
}

/// High target coverage with a binomial-slack bound: at beta = 0.99 and
/// 200 replicates, empirical coverage below 0.95 would be a > 3-sigma
/// deviation.
#[test]
fn near_one_coverage_lower_bound() {
    let mut config = CoverageConfig::nonlinear(200, 0.99, 17);
    config.grid_size = 200;
    let report = coverage_run(&config, Parallelism::Rayon).unwrap();
    for (z, &cov) in report.coverage.iter().enumerate() {
        assert!(
            cov >= 0.95,
            "exposure {z} coverage {cov} below 0.95 at beta 0.99"
        );
    }
}

/// Full analyses are deterministic across execution modes.
#[test]
fn analysis_identical_across_parallel_modes() {
    let (data, _units) = gen_nonlinear(90, 21).unwrap();
    let opts = AnalysisOptions::new(0.9, 6);
    let seq = analyze_unit(&data, &[28.0], &opts, Parallelism::Sequential).unwrap();
    let par = analyze_unit(&data, &[28.0], &opts, Parallelism::Rayon).unwrap();
    assert_eq!(seq.len(), par.len());
    for (a, b) in seq.iter().zip(&par) {
        assert_eq!(a.scores.ranks(), b.scores.ranks());
        assert_eq!(a.scores.prediction_at(), b.scores.prediction_at());
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.point, b.point);
    }
    let table_seq = pairwise_table(&seq).unwrap();
    let table_par = pairwise_table(&par).unwrap();
    assert_eq!(table_seq.confidence, table_par.confidence);
    assert_eq!(table_seq.effects, table_par.effects);
}
