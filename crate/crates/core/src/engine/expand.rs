//! Single search steps.

use crate::family::{AxisGrid, Direction};
use crate::rule::Rule;

/// Moves one bound of a box to the adjacent cut (or domain bound).
///
/// Returns `None` when the bound is already at the outermost usable cut, or
/// when `rule` is not a box.
pub fn expand_facet(rule: &Rule, feature: usize, direction: Direction, grid: &AxisGrid) -> Option<Rule> {
    let constraints = rule.constraints()?;
    let moved = grid.expand(constraints.get(feature)?, direction)?;
    let mut out = constraints.to_vec();
    out[feature] = moved;
    Some(Rule::Box { constraints: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::RuleFamily;
    use crate::space::FeatureSpace;

    #[test]
    fn moves_to_next_cut() {
        let s = FeatureSpace::unit_cube(2);
        let tenths: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        let fam = RuleFamily::boxes_with_cuts([("x0", tenths.clone()), ("x1", tenths)]);
        let grids = fam.grids(&s).unwrap();
        let r = Rule::open_box(&s, &[(0.4, 0.6), (0.4, 0.6)]).unwrap();
        let up = expand_facet(&r, 0, Direction::Upper, &grids[0]).unwrap();
        assert_eq!(up, Rule::open_box(&s, &[(0.4, 0.7), (0.4, 0.6)]).unwrap());
    }

    #[test]
    fn moves_to_domain_bound_past_last_cut() {
        let s = FeatureSpace::unit_cube(2);
        let fam = RuleFamily::boxes_with_cuts([("x0", vec![0.4, 0.6]), ("x1", vec![0.4, 0.6])]);
        let grids = fam.grids(&s).unwrap();
        let r = Rule::open_box(&s, &[(0.4, 0.6), (0.4, 0.6)]).unwrap();
        let down = expand_facet(&r, 1, Direction::Lower, &grids[1]).unwrap();
        assert_eq!(down, Rule::open_box(&s, &[(0.4, 0.6), (0.0, 0.6)]).unwrap());
        assert_eq!(expand_facet(&down, 1, Direction::Lower, &grids[1]), None);
    }

    #[test]
    fn integer_upper_step() {
        let g = FeatureSpace::integer_grid(2, 5);
        let grids = RuleFamily::boxes().grids(&g).unwrap();
        let r = Rule::int_box(&g, &[(2, 3), (1, 1)]).unwrap();
        let up = expand_facet(&r, 1, Direction::Upper, &grids[1]).unwrap();
        assert_eq!(up, Rule::int_box(&g, &[(2, 3), (1, 2)]).unwrap());
    }
}
