//! Reproducible sampling from a measure restricted to a rule.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ball_volume, member_indices, CoverageMeasure};
use crate::error::{Error, Result};
use crate::rule::{euclid, Constraint, Rule};
use crate::space::{FeatureKind, FeatureSpace, Point, Value};

/// Generator for one independent substream of a seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a parent seed and a tag (SplitMix64 finalizer).
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws `n` points from `measure` restricted to `rule`, reproducibly per seed.
pub fn sample_in_rule(
    space: &FeatureSpace,
    measure: &CoverageMeasure,
    rule: &Rule,
    n: usize,
    seed: u64,
) -> Result<Vec<Point>> {
    sample_with(space, measure, rule, n, &mut substream(seed, 0))
}

/// As [`sample_in_rule`], drawing from a caller-supplied generator.
pub fn sample_with<R: Rng + ?Sized>(
    space: &FeatureSpace,
    measure: &CoverageMeasure,
    rule: &Rule,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    match measure {
        CoverageMeasure::Counting | CoverageMeasure::Lebesgue => match rule {
            Rule::Box { constraints } => {
                if measure == &CoverageMeasure::Counting && !space.is_finite() {
                    return Err(Error::InfiniteMeasure);
                }
                if constraints
                    .iter()
                    .any(|c| matches!(c, Constraint::Open { lo, hi } if !lo.is_finite() || !hi.is_finite()))
                {
                    return Err(Error::InfiniteMeasure);
                }
                Ok((0..n).map(|_| sample_box(space, constraints, rng)).collect())
            }
            Rule::Ball { center, radius } => {
                if measure == &CoverageMeasure::Counting {
                    return Err(Error::InfiniteMeasure);
                }
                sample_ball(space, center, *radius, n, rng)
            }
            Rule::Set { members } => {
                let idx = members.to_vec();
                if idx.is_empty() {
                    return Err(Error::ZeroMeasure);
                }
                (0..n)
                    .map(|_| space.point_at(idx[rng.random_range(0..idx.len())]))
                    .collect()
            }
        },
        CoverageMeasure::Weighted(w) => {
            let idx = member_indices(space, rule)?;
            let weights: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
            let dist = weighted(&weights)?;
            (0..n).map(|_| space.point_at(idx[dist.sample(rng)])).collect()
        }
        CoverageMeasure::Empirical(data) => {
            let members = data.members(space, rule);
            let weights: Vec<f64> = members.iter().map(|(_, w)| *w).collect();
            let dist = weighted(&weights)?;
            Ok((0..n)
                .map(|_| data.points()[members[dist.sample(rng)].0].clone())
                .collect())
        }
    }
}

fn weighted(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroMeasure);
    }
    WeightedIndex::new(weights).map_err(|_| Error::ZeroMeasure)
}

fn sample_box<R: Rng + ?Sized>(space: &FeatureSpace, constraints: &[Constraint], rng: &mut R) -> Point {
    let values = constraints
        .iter()
        .zip(space.features())
        .map(|(c, f)| match c {
            Constraint::Open { lo, hi } => loop {
                let v = rng.random_range(*lo..*hi);
                if v > *lo {
                    break Value::Real(v);
                }
            },
            Constraint::Range { lo, hi } => Value::Int(rng.random_range(*lo..=*hi)),
            Constraint::Subset(idx) => f.value_at(idx[rng.random_range(0..idx.len())]),
        })
        .collect();
    Point::new(values)
}

/// Rejection sampling from the bounding cube, clipped to the domain.
fn sample_ball<R: Rng + ?Sized>(
    space: &FeatureSpace,
    center: &[f64],
    radius: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let bounds: Vec<(f64, f64)> = space
        .features()
        .iter()
        .zip(center)
        .map(|(f, c)| match f.kind {
            FeatureKind::Continuous { lower, upper } => ((c - radius).max(lower), (c + radius).min(upper)),
            _ => unreachable!("balls live on all-continuous spaces"),
        })
        .collect();
    let cube: f64 = bounds.iter().map(|(a, b)| b - a).product();
    // Enough attempts to fail only when the ball barely meets the domain.
    let ratio = (cube / ball_volume(center.len(), radius)).max(1.0);
    let max_attempts = ((n as f64 + 16.0) * ratio * 64.0) as usize;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::ZeroMeasure);
        }
        let p: Vec<f64> = bounds.iter().map(|(a, b)| rng.random_range(*a..*b)).collect();
        if euclid(&p, center) < radius {
            out.push(Point::reals(&p));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Dataset;
    use std::collections::HashMap;

    #[test]
    fn lebesgue_samples_stay_inside() {
        let s = FeatureSpace::unit_cube(2);
        let r = Rule::open_box(&s, &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let pts = sample_in_rule(&s, &CoverageMeasure::Lebesgue, &r, 3, 42).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| r.contains(&s, p).unwrap()));
        assert_eq!(pts, sample_in_rule(&s, &CoverageMeasure::Lebesgue, &r, 3, 42).unwrap());
    }

    #[test]
    fn counting_samples_are_uniform() {
        let g = FeatureSpace::integer_grid(2, 5);
        let r = Rule::int_box(&g, &[(1, 3), (2, 4)]).unwrap();
        let pts = sample_in_rule(&g, &CoverageMeasure::Counting, &r, 9000, 7).unwrap();
        let mut freq: HashMap<Point, usize> = HashMap::new();
        for p in &pts {
            assert!(r.contains(&g, p).unwrap());
            *freq.entry(p.clone()).or_default() += 1;
        }
        assert_eq!(freq.len(), 9);
        for c in freq.values() {
            assert!((*c as f64 / 9000.0 - 1.0 / 9.0).abs() < 0.02);
        }
    }

    #[test]
    fn empirical_samples_only_members() {
        let s = FeatureSpace::unit_cube(1);
        let pts: Vec<Point> = (0..10).map(|i| Point::reals(&[0.05 + i as f64 / 10.0])).collect();
        let data = Dataset::new(&s, pts.clone(), None).unwrap();
        let r = Rule::open_box(&s, &[(0.0, 0.4)]).unwrap();
        let out = sample_in_rule(&s, &CoverageMeasure::Empirical(data), &r, 200, 1).unwrap();
        assert!(out.iter().all(|p| pts[..4].contains(p)));
    }

    #[test]
    fn unbounded_rules_cannot_be_sampled() {
        let s = FeatureSpace::new(vec![crate::space::FeatureSpec::continuous("t", 0.0, f64::INFINITY)]).unwrap();
        let r = Rule::full(&s);
        assert!(matches!(
            sample_in_rule(&s, &CoverageMeasure::Lebesgue, &r, 1, 0),
            Err(Error::InfiniteMeasure)
        ));
    }

    #[test]
    fn ball_samples_inside_ball() {
        let s = FeatureSpace::unit_cube(2);
        let r = Rule::ball(&s, vec![0.1, 0.5], 0.3).unwrap();
        let pts = sample_in_rule(&s, &CoverageMeasure::Lebesgue, &r, 500, 3).unwrap();
        assert!(pts.iter().all(|p| r.contains(&s, p).unwrap()));
    }

    #[test]
    fn seed_mixing_separates_streams() {
        assert_ne!(mix_seed(0, 1), mix_seed(0, 2));
        assert_ne!(mix_seed(1, 0), mix_seed(0, 1));
        assert_eq!(mix_seed(5, 9), mix_seed(5, 9));
    }
}
