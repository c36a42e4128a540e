//! Refinement witnesses between boxes and balls on continuous spaces.

use crate::error::{Error, Result};
use crate::rule::{euclid, Constraint, Rule};
use crate::space::{FeatureSpace, Point};

/// A rule of the other shape that contains `x` and sits inside `outer`.
///
/// For a box this is the ball around `x` reaching the nearest facet. For a ball
/// of radius `r` and centre `c` it is the cube around `x` of half-width
/// `(r - |x - c|) / √d`, whose corners touch the sphere.
pub fn refinement_witness_continuous(space: &FeatureSpace, outer: &Rule, x: &Point) -> Result<Rule> {
    if !space.is_all_continuous() {
        return Err(Error::UnsupportedShape(
            "refinement witnesses need every feature continuous".into(),
        ));
    }
    if !outer.contains(space, x)? {
        return Err(Error::structural("the point lies outside the outer rule"));
    }
    let xs: Vec<f64> = (0..space.dim()).map(|i| x.real(i)).collect();
    match outer {
        Rule::Box { constraints } => {
            let mut radius = f64::INFINITY;
            for (c, &v) in constraints.iter().zip(&xs) {
                if let Constraint::Open { lo, hi } = c {
                    radius = radius.min(v - lo).min(hi - v);
                }
            }
            if !radius.is_finite() {
                return Err(Error::structural(
                    "an unbounded box has no ball witness of finite radius",
                ));
            }
            if radius <= 0.0 {
                return Err(Error::structural("the point lies on a facet of the box"));
            }
            Rule::ball(space, xs, radius)
        }
        Rule::Ball { center, radius } => {
            let slack = radius - euclid(&xs, center);
            if slack <= 0.0 {
                return Err(Error::structural("the point lies on the sphere"));
            }
            let h = slack / (space.dim() as f64).sqrt();
            let bounds: Vec<(f64, f64)> = xs.iter().map(|&v| (v - h, v + h)).collect();
            Rule::open_box(space, &bounds)
        }
        Rule::Set { .. } => Err(Error::UnsupportedShape(
            "explicit sets have no continuous witness".into(),
        )),
    }
}
