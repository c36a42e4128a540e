//! Fidelity µ(A ∩ X_{f(x)}) / µ(A), exact and sampled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{coverage, member_indices, sample_with, substream, CoverageMeasure};
use crate::classifiers::Classifier;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rule::{Constraint, Rule};
use crate::scheme::ExplanationScheme;
use crate::space::Point;

/// A sampled fidelity with a one-sided Hoeffding lower confidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub estimate: f64,
    pub lower_bound: f64,
    pub sample_count: usize,
    pub confidence: f64,
}

impl FidelityEstimate {
    pub(crate) fn from_hits(hits: usize, n: usize, confidence: f64) -> Self {
        let estimate = hits as f64 / n as f64;
        let lower_bound = (estimate - hoeffding_radius(n, confidence)).clamp(0.0, 1.0);
        Self {
            estimate,
            lower_bound,
            sample_count: n,
            confidence,
        }
    }
}

/// `sqrt(ln(1 / (1 - confidence)) / (2n))`.
pub fn hoeffding_radius(n: usize, confidence: f64) -> f64 {
    ((1.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Exact fidelity of `rule` for the label of `x`.
///
/// Available on finite spaces, for empirical measures, and for linear or
/// tree classifiers under the Lebesgue measure.
pub fn fidelity_exact(scheme: &ExplanationScheme, f: &Classifier, rule: &Rule, x: &Point) -> Result<f64> {
    let y = f.evaluate_index(x)?;
    exact_for_label(scheme, f, rule, y)
}

pub(crate) fn exact_for_label(scheme: &ExplanationScheme, f: &Classifier, rule: &Rule, y: usize) -> Result<f64> {
    let space = scheme.space();
    let total = match coverage(space, scheme.measure(), rule)? {
        ExtendedReal::Infinite => return Err(Error::InfiniteMeasure),
        ExtendedReal::Finite(0.0) => return Ok(0.0),
        ExtendedReal::Finite(v) => v,
    };
    let same = match scheme.measure() {
        CoverageMeasure::Empirical(data) => {
            let members = data.members(space, rule);
            let pts: Vec<Point> = members.iter().map(|(i, _)| data.points()[*i].clone()).collect();
            let labels = f.evaluate_batch(&pts)?;
            members
                .iter()
                .zip(labels)
                .filter(|(_, l)| *l == y)
                .map(|((_, w), _)| w)
                .sum::<f64>()
        }
        m if space.is_finite() => {
            let masses = m.point_masses(space)?;
            let idx = member_indices(space, rule)?;
            let pts = idx.iter().map(|&i| space.point_at(i)).collect::<Result<Vec<_>>>()?;
            let labels = f.evaluate_batch(&pts)?;
            idx.iter()
                .zip(labels)
                .filter(|(_, l)| *l == y)
                .map(|(&i, _)| masses[i])
                .sum::<f64>()
        }
        CoverageMeasure::Lebesgue => return lebesgue_exact(scheme, f, rule, y),
        _ => return Err(Error::NotExactlyComputable("measure needs a finite space".into())),
    };
    Ok((same / total).clamp(0.0, 1.0))
}

fn lebesgue_exact(scheme: &ExplanationScheme, f: &Classifier, rule: &Rule, y: usize) -> Result<f64> {
    let Rule::Box { constraints } = rule else {
        return Err(Error::NotExactlyComputable(
            "exact fidelity under the Lebesgue measure needs a box rule".into(),
        ));
    };
    if let Some((dims, weights, bias)) = f.linear_parts() {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for &d in dims {
            match constraints[d] {
                Constraint::Open { lo: a, hi: b } => {
                    lo.push(a);
                    hi.push(b);
                }
                _ => unreachable!("linear weights index continuous features"),
            }
        }
        let total: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let below = volume_below(&lo, &hi, weights, -bias) / total;
        let positive = (1.0 - below).clamp(0.0, 1.0);
        return Ok(if y == 1 { positive } else { 1.0 - positive });
    }
    if f.tree_root().is_some() {
        let space = scheme.space();
        let total = coverage(space, scheme.measure(), rule)?
            .finite()
            .ok_or(Error::InfiniteMeasure)?;
        let mut same = 0.0;
        for leaf in f.tree_preimage(&f.labels()[y])? {
            if let Some(part) = rule.intersect(&leaf)? {
                same += coverage(space, scheme.measure(), &part)?
                    .finite()
                    .ok_or(Error::InfiniteMeasure)?;
            }
        }
        return Ok((same / total).clamp(0.0, 1.0));
    }
    Err(Error::NotExactlyComputable(format!(
        "no exact Lebesgue fidelity for {} classifiers",
        f.kind_name()
    )))
}

/// Volume of `{x in Π (lo_i, hi_i) : Σ w_i x_i ≤ c}` by inclusion–exclusion over vertices.
pub(crate) fn volume_below(lo: &[f64], hi: &[f64], w: &[f64], c: f64) -> f64 {
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut factor = 1.0;
    let mut c = c;
    let mut lens = Vec::new();
    let mut ws = Vec::new();
    for ((&a, &b), &wi) in lo.iter().zip(hi).zip(w) {
        if wi.abs() <= 1e-15 * scale || scale == 0.0 {
            factor *= b - a;
            continue;
        }
        // Shift to a box anchored at the origin with positive weights.
        let (start, weight) = if wi > 0.0 { (a, wi) } else { (b, -wi) };
        c -= wi * start;
        lens.push(b - a);
        ws.push(weight);
    }
    let d = lens.len();
    if d == 0 {
        return if c >= 0.0 { factor } else { 0.0 };
    }
    let full: f64 = lens.iter().product();
    let reach: f64 = lens.iter().zip(&ws).map(|(l, w)| l * w).sum();
    if c <= 0.0 {
        return 0.0;
    }
    if c >= reach {
        return factor * full;
    }
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << d) {
        let mut shift = 0.0;
        for i in 0..d {
            if mask & (1 << i) != 0 {
                shift += ws[i] * lens[i];
            }
        }
        let t = c - shift;
        if t > 0.0 {
            let term = t.powi(d as i32);
            if mask.count_ones() % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    let denom: f64 = ws.iter().product::<f64>() * (1..=d).map(|k| k as f64).product::<f64>();
    factor * (sum / denom).clamp(0.0, full)
}

/// Sampled fidelity of `rule` for the label of `x`, reproducible per seed.
pub fn fidelity_estimate(
    scheme: &ExplanationScheme,
    f: &Classifier,
    rule: &Rule,
    x: &Point,
    n: usize,
    confidence: f64,
    seed: u64,
) -> Result<FidelityEstimate> {
    let y = f.evaluate_index(x)?;
    estimate_for_label(scheme, f, rule, y, n, confidence, &mut substream(seed, 0))
}

pub(crate) fn estimate_for_label<R: Rng + ?Sized>(
    scheme: &ExplanationScheme,
    f: &Classifier,
    rule: &Rule,
    y: usize,
    n: usize,
    confidence: f64,
    rng: &mut R,
) -> Result<FidelityEstimate> {
    if n == 0 {
        return Err(Error::structural("sample budget must be positive"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::structural("confidence must lie in (0, 1)"));
    }
    match coverage(scheme.space(), scheme.measure(), rule)? {
        ExtendedReal::Infinite => return Err(Error::InfiniteMeasure),
        c if c.is_zero() => return Err(Error::ZeroMeasure),
        _ => {}
    }
    let pts = sample_with(scheme.space(), scheme.measure(), rule, n, rng)?;
    let hits = f.evaluate_batch(&pts)?.into_iter().filter(|&l| l == y).count();
    Ok(FidelityEstimate::from_hits(hits, n, confidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::int_labels;
    use crate::family::RuleFamily;
    use crate::space::FeatureSpace;

    fn linear_scheme() -> (ExplanationScheme, Classifier) {
        let s = FeatureSpace::unit_cube(2);
        let f = Classifier::linear(&s, vec![1.0, 1.0], -1.0, int_labels(2)).unwrap();
        (
            ExplanationScheme::new(s, RuleFamily::bounded_boxes(), CoverageMeasure::Lebesgue).unwrap(),
            f,
        )
    }

    #[test]
    fn hoeffding_radius_value() {
        assert!((hoeffding_radius(1000, 0.95) - 0.0387).abs() < 1e-4);
    }

    #[test]
    fn linear_examples() {
        let (sch, f) = linear_scheme();
        let s = sch.space().clone();
        let x = Point::reals(&[0.8, 0.8]);
        let corner = Rule::open_box(&s, &[(0.5, 1.0), (0.5, 1.0)]).unwrap();
        assert_eq!(fidelity_exact(&sch, &f, &corner, &x).unwrap(), 1.0);
        let half = Rule::open_box(&s, &[(0.25, 0.75), (0.25, 0.75)]).unwrap();
        assert!((fidelity_exact(&sch, &f, &half, &x).unwrap() - 0.5).abs() < 1e-12);
        let pure = Rule::open_box(&s, &[(0.6, 1.0), (0.6, 1.0)]).unwrap();
        assert_eq!(fidelity_exact(&sch, &f, &pure, &x).unwrap(), 1.0);
        let e = fidelity_estimate(&sch, &f, &pure, &x, 1000, 0.95, 0).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert!((e.lower_bound - 0.9613).abs() < 1e-3);
    }

    #[test]
    fn volume_below_matches_closed_forms() {
        // Triangle below x + y = 1 in the unit square.
        assert!((volume_below(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], 1.0) - 0.5).abs() < 1e-12);
        // Simplex corner in the unit cube.
        assert!((volume_below(&[0.0; 3], &[1.0; 3], &[1.0; 3], 1.0) - 1.0 / 6.0).abs() < 1e-12);
        // Negative weight: x - y <= 0 is half the square.
        assert!((volume_below(&[0.0, 0.0], &[1.0, 1.0], &[1.0, -1.0], 0.0) - 0.5).abs() < 1e-12);
        // Zero weight dimension factors out.
        assert!((volume_below(&[0.0, 0.0], &[1.0, 2.0], &[1.0, 0.0], 0.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_measure_rule_has_zero_fidelity() {
        let s = FeatureSpace::integer_grid(1, 3);
        let f = Classifier::table(&s, vec![0, 1, 0, 0], int_labels(2)).unwrap();
        let sch = ExplanationScheme::new(
            s.clone(),
            RuleFamily::boxes(),
            CoverageMeasure::Weighted(vec![0.0, 1.0, 0.0, 0.0]),
        )
        .unwrap();
        let r = Rule::int_box(&s, &[(2, 3)]).unwrap();
        assert_eq!(fidelity_exact(&sch, &f, &r, &Point::ints(&[2])).unwrap(), 0.0);
        assert!(matches!(
            fidelity_estimate(&sch, &f, &r, &Point::ints(&[2]), 10, 0.95, 0),
            Err(Error::ZeroMeasure)
        ));
    }

    #[test]
    fn finite_pure_rule_estimates_one() {
        let s = FeatureSpace::integer_grid(1, 3);
        let f = Classifier::table(&s, vec![0, 1, 0, 0], int_labels(2)).unwrap();
        let sch = ExplanationScheme::new(s.clone(), RuleFamily::boxes(), CoverageMeasure::Counting).unwrap();
        let r = Rule::int_box(&s, &[(2, 3)]).unwrap();
        for n in [1, 10, 100] {
            let e = fidelity_estimate(&sch, &f, &r, &Point::ints(&[3]), n, 0.9, 5).unwrap();
            assert_eq!(e.estimate, 1.0);
        }
        assert_eq!(fidelity_exact(&sch, &f, &r, &Point::ints(&[3])).unwrap(), 1.0);
        let mixed = Rule::int_box(&s, &[(0, 3)]).unwrap();
        assert_eq!(fidelity_exact(&sch, &f, &mixed, &Point::ints(&[3])).unwrap(), 0.75);
    }

    #[test]
    fn tree_exact_under_lebesgue() {
        use crate::classifiers::Node;
        let s = FeatureSpace::unit_cube(2);
        let root = Node::split(0, 0.5, Node::Leaf(0), Node::split(1, 0.5, Node::Leaf(1), Node::Leaf(0)));
        let f = Classifier::tree(&s, root, int_labels(2)).unwrap();
        let sch = ExplanationScheme::new(s.clone(), RuleFamily::boxes(), CoverageMeasure::Lebesgue).unwrap();
        let r = Rule::open_box(&s, &[(0.25, 0.75), (0.0, 1.0)]).unwrap();
        let v = fidelity_exact(&sch, &f, &r, &Point::reals(&[0.7, 0.2])).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }
}
