//! Decision trees and their leaf boxes.

use crate::error::{Error, Result};
use crate::rule::{Constraint, Rule};
use crate::space::{FeatureKind, FeatureSpace, Point};

/// The test at an internal node; points passing it go left.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    /// `x ≤ threshold` on a continuous or integer feature.
    Threshold(f64),
    /// Membership in a set of categorical value indices.
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// A leaf holding a label index.
    Leaf(usize),
    Split {
        feature: usize,
        test: SplitTest,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn split(feature: usize, threshold: f64, left: Node, right: Node) -> Node {
        Node::Split {
            feature,
            test: SplitTest::Threshold(threshold),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub(crate) fn validate(&self, space: &FeatureSpace, n_labels: usize) -> Result<()> {
        match self {
            Node::Leaf(l) if *l < n_labels => Ok(()),
            Node::Leaf(l) => Err(Error::structural(format!("leaf label index {l} out of range"))),
            Node::Split {
                feature,
                test,
                left,
                right,
            } => {
                if *feature >= space.dim() {
                    return Err(Error::structural(format!("split on feature {feature} out of range")));
                }
                let f = space.feature(*feature);
                match (&f.kind, test) {
                    (FeatureKind::Continuous { lower, upper }, SplitTest::Threshold(t)) => {
                        if !(t >= lower && t <= upper) {
                            return Err(Error::structural(format!(
                                "threshold {t} outside [{lower}, {upper}] for `{}`",
                                f.name
                            )));
                        }
                    }
                    (FeatureKind::Integer { lo, hi }, SplitTest::Threshold(t)) => {
                        if !(*t >= *lo as f64 && *t <= *hi as f64) {
                            return Err(Error::structural(format!(
                                "threshold {t} outside [{lo}, {hi}] for `{}`",
                                f.name
                            )));
                        }
                    }
                    (FeatureKind::Categorical { values }, SplitTest::Subset(idx)) => {
                        if idx.iter().any(|&i| i >= values.len()) {
                            return Err(Error::structural(format!("subset index out of range for `{}`", f.name)));
                        }
                    }
                    _ => {
                        return Err(Error::structural(format!(
                            "split test does not match the kind of `{}`",
                            f.name
                        )))
                    }
                }
                left.validate(space, n_labels)?;
                right.validate(space, n_labels)
            }
        }
    }

    fn goes_left(space: &FeatureSpace, feature: usize, test: &SplitTest, x: &Point) -> bool {
        match test {
            SplitTest::Threshold(t) => x.get(feature).as_f64().is_some_and(|v| v <= *t),
            SplitTest::Subset(idx) => x
                .get(feature)
                .as_symbol()
                .and_then(|s| space.feature(feature).symbol_index(s))
                .is_some_and(|d| idx.contains(&d)),
        }
    }

    pub(crate) fn route(&self, space: &FeatureSpace, x: &Point) -> usize {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(l) => return *l,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    node = if Self::goes_left(space, *feature, test, x) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Every non-empty leaf region as (label index, box).
    pub(crate) fn leaf_boxes(&self, space: &FeatureSpace) -> Vec<(usize, Rule)> {
        let mut out = Vec::new();
        let full: Vec<Constraint> = space.features().iter().map(Constraint::full).collect();
        self.collect(full, &mut out);
        out
    }

    fn collect(&self, region: Vec<Constraint>, out: &mut Vec<(usize, Rule)>) {
        match self {
            Node::Leaf(l) => out.push((*l, Rule::Box { constraints: region })),
            Node::Split {
                feature,
                test,
                left,
                right,
            } => {
                let (l, r) = split_constraint(&region[*feature], test);
                if let Some(c) = l {
                    let mut reg = region.clone();
                    reg[*feature] = c;
                    left.collect(reg, out);
                }
                if let Some(c) = r {
                    let mut reg = region;
                    reg[*feature] = c;
                    right.collect(reg, out);
                }
            }
        }
    }

    pub(crate) fn leaf_box(&self, space: &FeatureSpace, x: &Point) -> Rule {
        let mut region: Vec<Constraint> = space.features().iter().map(Constraint::full).collect();
        let mut node = self;
        loop {
            match node {
                Node::Leaf(_) => return Rule::Box { constraints: region },
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    let (l, r) = split_constraint(&region[*feature], test);
                    // A point on a continuous threshold keeps the (open) left side.
                    if Self::goes_left(space, *feature, test, x) {
                        if let Some(c) = l {
                            region[*feature] = c;
                        }
                        node = left;
                    } else {
                        if let Some(c) = r {
                            region[*feature] = c;
                        }
                        node = right;
                    }
                }
            }
        }
    }
}

/// Left and right parts of a constraint under a split; `None` when empty.
fn split_constraint(c: &Constraint, test: &SplitTest) -> (Option<Constraint>, Option<Constraint>) {
    match (c, test) {
        (Constraint::Open { lo, hi }, SplitTest::Threshold(t)) => {
            let left = (lo < t).then(|| Constraint::Open {
                lo: *lo,
                hi: hi.min(*t),
            });
            let right = (hi > t).then(|| Constraint::Open {
                lo: lo.max(*t),
                hi: *hi,
            });
            (left, right)
        }
        (Constraint::Range { lo, hi }, SplitTest::Threshold(t)) => {
            let cut = t.floor() as i64;
            let left = (*lo <= cut).then(|| Constraint::Range {
                lo: *lo,
                hi: (*hi).min(cut),
            });
            let right = (*hi > cut).then(|| Constraint::Range {
                lo: (*lo).max(cut + 1),
                hi: *hi,
            });
            (left, right)
        }
        (Constraint::Subset(v), SplitTest::Subset(idx)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = v.iter().partition(|i| idx.contains(i));
            (
                (!l.is_empty()).then_some(Constraint::Subset(l)),
                (!r.is_empty()).then_some(Constraint::Subset(r)),
            )
        }
        _ => (Some(c.clone()), Some(c.clone())),
    }
}
