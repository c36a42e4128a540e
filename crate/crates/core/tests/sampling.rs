//! Sampling inside rules and estimator calibration.

use rulex_core::classifiers::int_labels;
use rulex_core::measures::hoeffding_radius;
use rulex_core::{
    fidelity_estimate, sample_in_rule, Classifier, CoverageMeasure, Dataset, ExplanationScheme, FeatureSpace, Point,
    Rule, RuleFamily,
};

#[test]
fn samples_stay_inside_and_are_reproducible() {
    let s = FeatureSpace::unit_cube(3);
    let rules = [
        Rule::open_box(&s, &[(0.1, 0.2), (0.0, 1.0), (0.5, 0.9)]).unwrap(),
        Rule::ball(&s, vec![0.9, 0.9, 0.9], 0.3).unwrap(),
    ];
    for r in &rules {
        let a = sample_in_rule(&s, &CoverageMeasure::Lebesgue, r, 2000, 11).unwrap();
        let b = sample_in_rule(&s, &CoverageMeasure::Lebesgue, r, 2000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| r.contains(&s, p).unwrap()));
        let c = sample_in_rule(&s, &CoverageMeasure::Lebesgue, r, 2000, 12).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn box_samples_are_uniform_per_axis() {
    let s = FeatureSpace::unit_cube(2);
    let r = Rule::open_box(&s, &[(0.2, 0.6), (0.0, 1.0)]).unwrap();
    let pts = sample_in_rule(&s, &CoverageMeasure::Lebesgue, &r, 40_000, 3).unwrap();
    let mean = pts.iter().map(|p| p.real(0)).sum::<f64>() / pts.len() as f64;
    assert!((mean - 0.4).abs() < 0.005);
    let low = pts.iter().filter(|p| p.real(1) < 0.25).count() as f64 / pts.len() as f64;
    assert!((low - 0.25).abs() < 0.01);
}

#[test]
fn empirical_samples_follow_weights() {
    let s = FeatureSpace::integer_grid(1, 3);
    let data = Dataset::new(&s, vec![Point::ints(&[0]), Point::ints(&[2])], Some(vec![1.0, 3.0])).unwrap();
    let m = CoverageMeasure::Empirical(data);
    let pts = sample_in_rule(&s, &m, &Rule::full(&s), 20_000, 5).unwrap();
    let twos = pts.iter().filter(|p| **p == Point::ints(&[2])).count() as f64 / 20_000.0;
    assert!((twos - 0.75).abs() < 0.015);
}

#[test]
fn lower_bound_covers_the_truth_at_the_stated_rate() {
    let sch = ExplanationScheme::new(
        FeatureSpace::unit_cube(2),
        RuleFamily::boxes(),
        CoverageMeasure::Lebesgue,
    )
    .unwrap();
    let f = Classifier::linear(sch.space(), vec![1.0, 1.0], -1.0, int_labels(2)).unwrap();
    let r = Rule::open_box(sch.space(), &[(0.25, 0.75), (0.25, 0.75)]).unwrap();
    let x = Point::reals(&[0.7, 0.7]);
    let mut covered = 0;
    for seed in 0..200 {
        let e = fidelity_estimate(&sch, &f, &r, &x, 1000, 0.9, seed).unwrap();
        assert_eq!(e.sample_count, 1000);
        assert!((e.estimate - e.lower_bound - hoeffding_radius(1000, 0.9)).abs() < 1e-12 || e.lower_bound == 0.0);
        if e.lower_bound <= 0.5 {
            covered += 1;
        }
    }
    // Hoeffding is conservative: expect at least the nominal 90%.
    assert!(covered >= 180, "covered {covered}/200");
}
