//! Whether two families generate the same topology.

use serde::Serialize;

use crate::error::Result;
use crate::family::{enumerate_basic, RuleFamily};
use crate::rule::Rule;
use crate::set::PointSet;
use crate::space::{FeatureSpace, Point};

/// Which family failed to refine the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementGap {
    /// A basic set of the first family has no second-family set inside it at the point.
    FirstNotRefinedBySecond,
    SecondNotRefinedByFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub gap: RefinementGap,
    pub rule: Rule,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

/// Checks mutual refinement by scanning every basic set of both families.
pub fn check_equivalence(a: &RuleFamily, b: &RuleFamily, space: &FeatureSpace) -> Result<EquivalenceVerdict> {
    let rules_a: Vec<Rule> = enumerate_basic(a, space)?.collect();
    let rules_b: Vec<Rule> = enumerate_basic(b, space)?.collect();
    let sets_a = sets_of(&rules_a, space)?;
    let sets_b = sets_of(&rules_b, space)?;
    let found = first_gap(&rules_a, &sets_a, &sets_b, space)?
        .map(|(rule, point)| (RefinementGap::FirstNotRefinedBySecond, rule, point));
    let found = match found {
        Some(c) => Some(c),
        None => first_gap(&rules_b, &sets_b, &sets_a, space)?
            .map(|(rule, point)| (RefinementGap::SecondNotRefinedByFirst, rule, point)),
    };
    Ok(EquivalenceVerdict {
        equivalent: found.is_none(),
        counterexample: found.map(|(gap, rule, point)| Counterexample { gap, rule, point }),
    })
}

fn sets_of(rules: &[Rule], space: &FeatureSpace) -> Result<Vec<PointSet>> {
    rules.iter().map(|r| r.to_point_set(space)).collect()
}

/// First `(outer, x)` with `x ∈ outer` and no inner set `s` with `x ∈ s ⊆ outer`.
fn first_gap(
    outer_rules: &[Rule],
    outer: &[PointSet],
    inner: &[PointSet],
    space: &FeatureSpace,
) -> Result<Option<(Rule, Point)>> {
    let n = outer.first().map_or(0, PointSet::universe);
    let around = crate::family::incidence(inner, n);
    for (rule, o) in outer_rules.iter().zip(outer) {
        for x in o.iter() {
            if !around[x].iter().any(|&j| inner[j].is_subset(o)) {
                return Ok(Some((rule.clone(), space.point_at(x)?)));
            }
        }
    }
    Ok(None)
}
