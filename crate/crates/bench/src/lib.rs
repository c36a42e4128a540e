//! Shared workloads for the benchmarks.

use rulex_core::classifiers::{int_labels, Node};
use rulex_core::{Classifier, CoverageMeasure, ExplanationScheme, FeatureSpace, RuleFamily};

/// Unit square with bounded boxes and area as coverage.
pub fn square() -> ExplanationScheme {
    ExplanationScheme::new(
        FeatureSpace::unit_cube(2),
        RuleFamily::bounded_boxes(),
        CoverageMeasure::Lebesgue,
    )
    .expect("valid scheme")
}

/// Label 1 iff x0 + x1 > 1.
pub fn diagonal(scheme: &ExplanationScheme) -> Classifier {
    Classifier::linear(scheme.space(), vec![1.0, 1.0], -1.0, int_labels(2)).expect("valid classifier")
}

/// Depth-3 tree on the unit cube with thresholds on the default cut grid.
pub fn cube_tree() -> (ExplanationScheme, Classifier) {
    let s = ExplanationScheme::new(
        FeatureSpace::unit_cube(3),
        RuleFamily::bounded_boxes(),
        CoverageMeasure::Lebesgue,
    )
    .expect("valid scheme");
    let root = Node::split(
        0,
        0.5,
        Node::split(
            1,
            0.3,
            Node::Leaf(0),
            Node::split(2, 0.65, Node::Leaf(1), Node::Leaf(0)),
        ),
        Node::split(2, 0.4, Node::Leaf(1), Node::Leaf(0)),
    );
    let f = Classifier::tree(s.space(), root, int_labels(2)).expect("valid tree");
    (s, f)
}

/// `n x n` integer grid under integer boxes, labelled below/above the anti-diagonal.
pub fn grid(n: usize) -> (ExplanationScheme, Classifier) {
    let g = FeatureSpace::integer_grid(2, n as i64 - 1);
    let labels = (0..n * n).map(|i| usize::from(i / n + i % n >= n)).collect();
    let f = Classifier::table(&g, labels, int_labels(2)).expect("valid table");
    let s = ExplanationScheme::new(g, RuleFamily::boxes(), CoverageMeasure::Counting).expect("valid scheme");
    (s, f)
}

/// Product of two Khalimsky lines on `0..n`: odd coordinates are open points.
pub fn khalimsky(n: usize) -> (ExplanationScheme, Classifier) {
    let line = |i: usize| -> Vec<usize> {
        if i % 2 == 1 {
            vec![i]
        } else {
            (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect()
        }
    };
    let sets = (0..n * n)
        .map(|p| {
            let (a, b) = (p / n, p % n);
            let mut s = Vec::new();
            for i in line(a) {
                for j in line(b) {
                    s.push(i * n + j);
                }
            }
            s
        })
        .collect();
    let g = FeatureSpace::integer_grid(2, n as i64 - 1);
    let labels = (0..n * n).map(|i| usize::from(i / n + i % n >= n)).collect();
    let f = Classifier::table(&g, labels, int_labels(2)).expect("valid table");
    let s = ExplanationScheme::new(g, RuleFamily::explicit(sets), CoverageMeasure::Counting).expect("valid scheme");
    (s, f)
}
