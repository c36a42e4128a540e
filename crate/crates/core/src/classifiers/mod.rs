//! Classifiers f: X → Y, voting ensembles, and model loading.

mod blackbox;
mod model;
mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::Rule;
use crate::space::{FeatureSpace, Point};

pub use blackbox::{BlackBox, DEFAULT_BATCH, DEFAULT_TIMEOUT_MS};
pub use model::{load_model, parse_model};
pub use tree::{Node, SplitTest};

/// A class label: a small integer or a symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Symbol(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Symbol(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::Int(v)
    }
}

impl From<&str> for Label {
    fn from(v: &str) -> Self {
        Label::Symbol(v.to_string())
    }
}

/// Integer labels `0..k`.
pub fn int_labels(k: usize) -> Vec<Label> {
    (0..k as i64).map(Label::Int).collect()
}

/// The most common label; ties go to the label declared first in `label_set`.
pub fn majority_vote(votes: &[Label], label_set: &[Label]) -> Result<Label> {
    if votes.is_empty() {
        return Err(Error::structural("majority vote over no votes"));
    }
    let mut counts = vec![0usize; label_set.len()];
    for v in votes {
        let i = label_set
            .iter()
            .position(|l| l == v)
            .ok_or_else(|| Error::structural(format!("vote `{v}` is not in the label set")))?;
        counts[i] += 1;
    }
    Ok(label_set[vote_winner(&counts)].clone())
}

/// Index of the highest count, smallest index on ties.
pub(crate) fn vote_winner(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone)]
enum Body {
    /// Label index 1 iff `w · x + b > 0` over the continuous features.
    Linear {
        dims: Vec<usize>,
        weights: Vec<f64>,
        bias: f64,
    },
    Tree(Node),
    /// Label index per point of a finite space, in enumeration order.
    Table(Vec<usize>),
    /// Members with a map from each member's label indices to ours.
    Ensemble(Vec<(Classifier, Vec<usize>)>),
    Blackbox(Arc<BlackBox>),
}

/// A total, deterministic classifier over a feature space.
#[derive(Clone)]
pub struct Classifier {
    space: FeatureSpace,
    labels: Vec<Label>,
    body: Body,
}

impl fmt::Debug for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Classifier")
            .field("kind", &self.kind_name())
            .field("labels", &self.labels)
            .finish()
    }
}

fn check_labels(labels: &[Label]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::structural("classifier needs at least one label"));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::structural(format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

impl Classifier {
    /// `labels[1]` iff `w · x + b > 0`, with one weight per continuous feature.
    pub fn linear(space: &FeatureSpace, weights: Vec<f64>, bias: f64, labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels)?;
        if labels.len() != 2 {
            return Err(Error::structural("linear classifiers need exactly two labels"));
        }
        let dims = space.continuous_dims();
        if weights.len() != dims.len() {
            return Err(Error::structural(format!(
                "{} weights for {} continuous features",
                weights.len(),
                dims.len()
            )));
        }
        if weights.iter().chain([&bias]).any(|v| !v.is_finite()) {
            return Err(Error::structural("linear weights must be finite"));
        }
        Ok(Self {
            space: space.clone(),
            labels,
            body: Body::Linear { dims, weights, bias },
        })
    }

    pub fn tree(space: &FeatureSpace, root: Node, labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels)?;
        root.validate(space, labels.len())?;
        Ok(Self {
            space: space.clone(),
            labels,
            body: Body::Tree(root),
        })
    }

    /// A lookup table giving a label index for every point of a finite space.
    pub fn table(space: &FeatureSpace, assignment: Vec<usize>, labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels)?;
        let n = space
            .cardinality()
            .filter(|_| space.is_finite())
            .ok_or_else(|| Error::structural("table classifiers need a finite space"))?;
        if assignment.len() != n {
            return Err(Error::structural(format!(
                "table has {} entries for {n} points",
                assignment.len()
            )));
        }
        if assignment.iter().any(|&i| i >= labels.len()) {
            return Err(Error::structural("table entry outside the label set"));
        }
        Ok(Self {
            space: space.clone(),
            labels,
            body: Body::Table(assignment),
        })
    }

    /// Majority-vote ensemble using the first member's label order.
    pub fn ensemble(members: Vec<Classifier>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::structural("ensemble needs at least one member"))?;
        let labels = first.labels.clone();
        Self::ensemble_with_labels(members, labels)
    }

    /// Majority-vote ensemble with an explicit label order for tie-breaking.
    pub fn ensemble_with_labels(members: Vec<Classifier>, labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels)?;
        let space = members
            .first()
            .ok_or_else(|| Error::structural("ensemble needs at least one member"))?
            .space
            .clone();
        let mut out = Vec::with_capacity(members.len());
        for (k, m) in members.into_iter().enumerate() {
            if m.space != space {
                return Err(Error::structural(format!("ensemble member {k} uses a different space")));
            }
            if m.labels.len() != labels.len() {
                return Err(Error::structural(format!(
                    "ensemble member {k} has a different label set"
                )));
            }
            let map = m
                .labels
                .iter()
                .map(|l| labels.iter().position(|x| x == l))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::structural(format!("ensemble member {k} has a different label set")))?;
            out.push((m, map));
        }
        Ok(Self {
            space,
            labels,
            body: Body::Ensemble(out),
        })
    }

    pub fn blackbox(space: &FeatureSpace, adapter: BlackBox, labels: Vec<Label>) -> Result<Self> {
        check_labels(&labels)?;
        Ok(Self {
            space: space.clone(),
            labels,
            body: Body::Blackbox(Arc::new(adapter)),
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    /// Declared label set, in tie-breaking order.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_index(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.body {
            Body::Linear { .. } => "linear",
            Body::Tree(_) => "tree",
            Body::Table(_) => "table",
            Body::Ensemble(_) => "ensemble",
            Body::Blackbox(_) => "blackbox",
        }
    }

    /// Linear weights, one per continuous feature, and bias.
    pub fn linear_parts(&self) -> Option<(&[usize], &[f64], f64)> {
        match &self.body {
            Body::Linear { dims, weights, bias } => Some((dims, weights, *bias)),
            _ => None,
        }
    }

    pub fn tree_root(&self) -> Option<&Node> {
        match &self.body {
            Body::Tree(root) => Some(root),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &Point) -> Result<Label> {
        Ok(self.labels[self.evaluate_index(x)?].clone())
    }

    /// Label of `x` as an index into [`Classifier::labels`].
    pub fn evaluate_index(&self, x: &Point) -> Result<usize> {
        self.space.check_point(x)?;
        match &self.body {
            Body::Blackbox(bb) => Ok(bb.query(&self.labels, std::slice::from_ref(x))?[0]),
            _ => self.eval_builtin(x),
        }
    }

    /// Label indices of many points; black boxes receive batched requests.
    pub fn evaluate_batch(&self, points: &[Point]) -> Result<Vec<usize>> {
        for p in points {
            self.space.check_point(p)?;
        }
        self.eval_many(points)
    }

    fn eval_many(&self, points: &[Point]) -> Result<Vec<usize>> {
        match &self.body {
            Body::Blackbox(bb) => bb.query(&self.labels, points),
            Body::Ensemble(members) => {
                let votes = members
                    .iter()
                    .map(|(m, map)| Ok(m.eval_many(points)?.into_iter().map(|i| map[i]).collect()))
                    .collect::<Result<Vec<Vec<usize>>>>()?;
                let mut counts = vec![0usize; self.labels.len()];
                Ok((0..points.len())
                    .map(|p| {
                        counts.iter_mut().for_each(|c| *c = 0);
                        for v in &votes {
                            counts[v[p]] += 1;
                        }
                        vote_winner(&counts)
                    })
                    .collect())
            }
            _ => points.iter().map(|p| self.eval_builtin(p)).collect(),
        }
    }

    fn eval_builtin(&self, x: &Point) -> Result<usize> {
        match &self.body {
            Body::Linear { dims, weights, bias } => {
                let s: f64 = dims.iter().zip(weights).map(|(&d, w)| w * x.real(d)).sum::<f64>() + bias;
                Ok(usize::from(s > 0.0))
            }
            Body::Tree(root) => Ok(root.route(&self.space, x)),
            Body::Table(t) => Ok(t[self.space.index_of(x)?]),
            Body::Ensemble(_) | Body::Blackbox(_) => Ok(self.eval_many(std::slice::from_ref(x))?[0]),
        }
    }

    /// Disjoint boxes whose union is the preimage of `label` (split boundaries aside).
    pub fn tree_preimage(&self, label: &Label) -> Result<Vec<Rule>> {
        let root = self
            .tree_root()
            .ok_or_else(|| Error::UnsupportedClassifier(format!("{} is not a decision tree", self.kind_name())))?;
        let y = self
            .label_index(label)
            .ok_or_else(|| Error::structural(format!("`{label}` is not in the label set")))?;
        Ok(root
            .leaf_boxes(&self.space)
            .into_iter()
            .filter(|(l, _)| *l == y)
            .map(|(_, r)| r)
            .collect())
    }

    /// The box of the tree leaf that `x` reaches.
    pub fn leaf_box(&self, x: &Point) -> Result<Rule> {
        self.space.check_point(x)?;
        let root = self
            .tree_root()
            .ok_or_else(|| Error::UnsupportedClassifier(format!("{} is not a decision tree", self.kind_name())))?;
        Ok(root.leaf_box(&self.space, x))
    }
}
