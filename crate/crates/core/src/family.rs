//! Scalable rule families: the sets of basic rules an explanation may use.
//!
//! Box families are products of per-feature interval families. Each feature
//! is split into atoms (open cells between cut values for continuous features,
//! runs of integers for integer features, single values for categorical
//! features) and a box constrains every feature to a contiguous run of at
//! least `min_cells` atoms (any non-empty subset for categorical features).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{euclid, Constraint, Rule};
use crate::set::PointSet;
use crate::space::{FeatureKind, FeatureSpace, FeatureSpec, Point, Value, EPS};

/// Number of uniform cells used for a bounded continuous feature without explicit cuts.
pub const DEFAULT_CELLS: usize = 20;

/// Largest categorical domain whose subsets are enumerated.
const MAX_SUBSET_VALUES: usize = 16;

fn one() -> usize {
    1
}

/// A rule family φ over a feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RuleFamily {
    /// Axis-aligned boxes whose continuous and integer sides follow a cut grid.
    Boxes {
        #[serde(default)]
        bounded_only: bool,
        #[serde(default = "one")]
        min_cells: usize,
        /// Cut values per feature name; continuous features default to
        /// `DEFAULT_CELLS` uniform cells, integer features to unit cells.
        #[serde(default)]
        cuts: BTreeMap<String, Vec<f64>>,
    },
    /// Open Euclidean balls (always bounded).
    Balls,
    /// An explicit list of point sets over a finite space.
    Explicit { sets: Vec<Vec<usize>> },
}

impl RuleFamily {
    pub fn boxes() -> Self {
        RuleFamily::Boxes {
            bounded_only: false,
            min_cells: 1,
            cuts: BTreeMap::new(),
        }
    }

    pub fn bounded_boxes() -> Self {
        RuleFamily::Boxes {
            bounded_only: true,
            min_cells: 1,
            cuts: BTreeMap::new(),
        }
    }

    pub fn boxes_with_cuts<S: Into<String>>(cuts: impl IntoIterator<Item = (S, Vec<f64>)>) -> Self {
        RuleFamily::Boxes {
            bounded_only: false,
            min_cells: 1,
            cuts: cuts.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn explicit(sets: Vec<Vec<usize>>) -> Self {
        RuleFamily::Explicit { sets }
    }

    /// Whether every generated rule has finite extent in every feature.
    pub fn is_bounded_only(&self) -> bool {
        match self {
            RuleFamily::Boxes { bounded_only, .. } => *bounded_only,
            RuleFamily::Balls | RuleFamily::Explicit { .. } => true,
        }
    }

    /// Checks the family against a space (cut grids, set indices, shapes).
    pub fn validate(&self, space: &FeatureSpace) -> Result<()> {
        match self {
            RuleFamily::Boxes { min_cells, cuts, .. } => {
                if *min_cells == 0 {
                    return Err(Error::parse("family.min_cells", "must be at least 1"));
                }
                for name in cuts.keys() {
                    if space.feature_index(name).is_none() {
                        return Err(Error::parse(format!("family.cuts.{name}"), "no feature with this name"));
                    }
                }
                for f in space.features() {
                    // Builds the grid, reporting malformed cuts.
                    match AxisGrid::build(f, cuts.get(&f.name), false) {
                        Ok(_) | Err(Error::NotEnumerable { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(())
            }
            RuleFamily::Balls => {
                if space.is_all_continuous() {
                    Ok(())
                } else {
                    Err(Error::UnsupportedFamily("balls need an all-continuous space".into()))
                }
            }
            RuleFamily::Explicit { sets } => {
                let n = finite_size(space)?;
                for (k, s) in sets.iter().enumerate() {
                    if s.is_empty() {
                        return Err(Error::parse(format!("family.sets[{k}]"), "empty set"));
                    }
                    if let Some(bad) = s.iter().find(|&&i| i >= n) {
                        return Err(Error::parse(
                            format!("family.sets[{k}]"),
                            format!("point index {bad} out of range for {n} points"),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Per-feature grids of a box family.
    pub fn grids(&self, space: &FeatureSpace) -> Result<Vec<AxisGrid>> {
        match self {
            RuleFamily::Boxes {
                bounded_only,
                min_cells,
                cuts,
            } => space
                .features()
                .iter()
                .map(|f| {
                    AxisGrid::build(f, cuts.get(&f.name), *bounded_only).map(|mut g| {
                        g.min_cells = *min_cells;
                        g
                    })
                })
                .collect(),
            _ => Err(Error::UnsupportedFamily("only box families have cut grids".into())),
        }
    }

    fn explicit_sets(&self, space: &FeatureSpace) -> Result<Vec<PointSet>> {
        match self {
            RuleFamily::Explicit { sets } => {
                let n = finite_size(space)?;
                self.validate(space)?;
                Ok(sets
                    .iter()
                    .map(|s| PointSet::from_indices(n, s.iter().copied()))
                    .collect())
            }
            _ => Err(Error::UnsupportedFamily("not an explicit family".into())),
        }
    }

    /// Whether `rule` is one of the family's basic rules.
    pub fn generates(&self, space: &FeatureSpace, rule: &Rule) -> Result<bool> {
        match (self, rule) {
            (RuleFamily::Boxes { .. }, Rule::Box { constraints }) => {
                let grids = self.grids(space)?;
                Ok(constraints.iter().zip(&grids).all(|(c, g)| g.is_member(c)))
            }
            (RuleFamily::Balls, Rule::Ball { .. }) => Ok(true),
            (RuleFamily::Explicit { .. }, Rule::Set { members }) => {
                Ok(self.explicit_sets(space)?.iter().any(|s| s == members))
            }
            _ => Ok(false),
        }
    }

    /// Smallest basic rule containing `x`, if any.
    ///
    /// For boxes this is the product of the smallest runs containing each
    /// coordinate; for explicit families the basic set of least cardinality
    /// (first in declaration order on ties).
    pub fn smallest_containing(&self, space: &FeatureSpace, x: &Point) -> Result<Option<Rule>> {
        space.check_point(x)?;
        match self {
            RuleFamily::Boxes { .. } => {
                let grids = self.grids(space)?;
                smallest_box(&grids, x)
            }
            RuleFamily::Explicit { .. } => {
                let i = space.index_of(x)?;
                let sets = self.explicit_sets(space)?;
                Ok(sets
                    .into_iter()
                    .filter(|s| s.contains(i))
                    .min_by_key(PointSet::len)
                    .map(|members| Rule::Set { members }))
            }
            RuleFamily::Balls => Err(Error::UnsupportedFamily(
                "balls have no smallest member containing a point".into(),
            )),
        }
    }
}

pub(crate) fn finite_size(space: &FeatureSpace) -> Result<usize> {
    if !space.is_finite() {
        return Err(Error::UnsupportedFamily("explicit families need a finite space".into()));
    }
    space
        .cardinality()
        .ok_or_else(|| Error::structural("finite space is too large"))
}

pub(crate) fn smallest_box(grids: &[AxisGrid], x: &Point) -> Result<Option<Rule>> {
    let mut constraints = Vec::with_capacity(grids.len());
    for (g, v) in grids.iter().zip(x.values()) {
        match g.locate(v).and_then(|pos| g.smallest_run(pos)) {
            Some(run) => constraints.push(g.run_constraint(run)),
            None => return Ok(None),
        }
    }
    Ok(Some(Rule::Box { constraints }))
}

/// Where a value falls on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisPosition {
    /// Strictly inside atom `j` (or on a domain bound adjacent to it).
    Inside(usize),
    /// On the cut between atoms `j - 1` and `j`.
    OnCut(usize),
}

impl AxisPosition {
    fn span(self) -> (usize, usize) {
        match self {
            AxisPosition::Inside(j) => (j, j),
            AxisPosition::OnCut(j) => (j - 1, j),
        }
    }
}

/// Direction of a facet move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
enum AxisKind {
    /// Atom `j` is the open interval `(bounds[j], bounds[j+1])`.
    Continuous { bounds: Vec<f64> },
    /// Atom `j` is `[starts[j], starts[j+1] - 1]`, the last ending at `hi`.
    Integer { starts: Vec<i64>, hi: i64 },
    /// Every value is its own atom; runs are arbitrary subsets.
    Categorical { n: usize },
}

/// The cut grid of a single feature within a box family.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisGrid {
    kind: AxisKind,
    bounded_only: bool,
    min_cells: usize,
}

impl AxisGrid {
    fn build(feature: &FeatureSpec, cuts: Option<&Vec<f64>>, bounded_only: bool) -> Result<AxisGrid> {
        let path = || format!("family.cuts.{}", feature.name);
        if let Some(cuts) = cuts {
            if cuts
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
                || cuts.iter().any(|c| !c.is_finite())
            {
                return Err(Error::parse(path(), "cuts must be finite and strictly increasing"));
            }
        }
        let kind = match &feature.kind {
            FeatureKind::Continuous { lower, upper } => {
                let inner: Vec<f64> = match cuts {
                    Some(c) => {
                        if c.iter().any(|v| v <= lower || v >= upper) {
                            return Err(Error::parse(path(), "cuts must lie strictly inside the feature bounds"));
                        }
                        c.clone()
                    }
                    None if feature.is_bounded() => (1..DEFAULT_CELLS)
                        .map(|k| lower + (upper - lower) * k as f64 / DEFAULT_CELLS as f64)
                        .collect(),
                    None => {
                        return Err(Error::NotEnumerable {
                            feature: feature.name.clone(),
                            reason: "unbounded continuous feature without a cut grid".into(),
                        })
                    }
                };
                let mut bounds = Vec::with_capacity(inner.len() + 2);
                bounds.push(*lower);
                bounds.extend(inner);
                bounds.push(*upper);
                AxisKind::Continuous { bounds }
            }
            FeatureKind::Integer { lo, hi } => {
                let mut starts = vec![*lo];
                match cuts {
                    Some(c) => {
                        for &cut in c {
                            if cut < *lo as f64 || cut >= *hi as f64 {
                                return Err(Error::parse(path(), "integer cuts must lie in [lo, hi)"));
                            }
                            let s = cut.floor() as i64 + 1;
                            if s <= *starts.last().unwrap_or(lo) {
                                return Err(Error::parse(path(), "integer cuts must separate distinct values"));
                            }
                            starts.push(s);
                        }
                    }
                    None => {
                        let n = hi - lo;
                        if n > 10_000_000 {
                            return Err(Error::NotEnumerable {
                                feature: feature.name.clone(),
                                reason: "integer domain too large for unit cells".into(),
                            });
                        }
                        starts.extend(lo + 1..=*hi);
                    }
                }
                AxisKind::Integer { starts, hi: *hi }
            }
            FeatureKind::Categorical { values } => {
                if cuts.is_some() {
                    return Err(Error::parse(path(), "categorical features take no cuts"));
                }
                AxisKind::Categorical { n: values.len() }
            }
        };
        Ok(AxisGrid {
            kind,
            bounded_only,
            min_cells: 1,
        })
    }

    pub fn n_atoms(&self) -> usize {
        match &self.kind {
            AxisKind::Continuous { bounds } => bounds.len() - 1,
            AxisKind::Integer { starts, .. } => starts.len(),
            AxisKind::Categorical { n } => *n,
        }
    }

    fn is_categorical(&self) -> bool {
        matches!(self.kind, AxisKind::Categorical { .. })
    }

    /// Inclusive range of atoms that basic rules may use, or `None` if empty.
    pub fn usable(&self) -> Option<(usize, usize)> {
        let n = self.n_atoms();
        match &self.kind {
            AxisKind::Continuous { bounds } if self.bounded_only => {
                let first = usize::from(bounds[0].is_infinite());
                let last = n as isize - 1 - isize::from(bounds[n].is_infinite());
                (last >= first as isize).then_some((first, last as usize))
            }
            _ => (n > 0).then_some((0, n - 1)),
        }
    }

    /// Locates a coordinate value on the axis.
    pub fn locate(&self, v: &Value) -> Option<AxisPosition> {
        match (&self.kind, v) {
            (AxisKind::Continuous { bounds }, Value::Real(x)) => {
                let n = bounds.len() - 1;
                // First interior boundary not strictly below x.
                let k = bounds[1..n].partition_point(|b| *b < *x - EPS) + 1;
                if k < n && (bounds[k] - x).abs() <= EPS {
                    Some(AxisPosition::OnCut(k))
                } else {
                    Some(AxisPosition::Inside(k - 1))
                }
            }
            (AxisKind::Integer { starts, .. }, Value::Int(i)) => {
                let k = starts.partition_point(|s| s <= i);
                (k > 0).then(|| AxisPosition::Inside(k - 1))
            }
            (AxisKind::Categorical { n }, Value::Symbol(_)) => {
                // Categorical positions are resolved by the caller through digits.
                let _ = n;
                None
            }
            _ => None,
        }
    }

    fn locate_in(&self, feature: &FeatureSpec, v: &Value) -> Option<AxisPosition> {
        match &self.kind {
            AxisKind::Categorical { .. } => v
                .as_symbol()
                .and_then(|s| feature.symbol_index(s))
                .map(AxisPosition::Inside),
            _ => self.locate(v),
        }
    }

    /// Smallest usable run covering a position (lexicographically first on ties).
    pub fn smallest_run(&self, pos: AxisPosition) -> Option<(usize, usize)> {
        let (need_s, need_e) = pos.span();
        if self.is_categorical() {
            return Some((need_s, need_e));
        }
        let (first, last) = self.usable()?;
        if need_s < first || need_e > last {
            return None;
        }
        let target = (need_e - need_s + 1).max(self.min_cells);
        let s = first.max((need_e + 1).saturating_sub(target));
        let e = s + target - 1;
        (e <= last && s <= need_s).then_some((s, e))
    }

    /// Constraint of the run of atoms `s..=e`.
    pub fn run_constraint(&self, (s, e): (usize, usize)) -> Constraint {
        match &self.kind {
            AxisKind::Continuous { bounds } => Constraint::Open {
                lo: bounds[s],
                hi: bounds[e + 1],
            },
            AxisKind::Integer { starts, hi } => Constraint::Range {
                lo: starts[s],
                hi: if e + 1 < starts.len() { starts[e + 1] - 1 } else { *hi },
            },
            AxisKind::Categorical { .. } => Constraint::Subset((s..=e).collect()),
        }
    }

    /// Runs of usable atoms, in lexicographic order of `(start, end)`.
    fn runs(&self) -> Vec<(usize, usize)> {
        let Some((first, last)) = self.usable() else {
            return Vec::new();
        };
        let m = self.min_cells;
        let mut out = Vec::new();
        for s in first..=last {
            for e in s..=last {
                if e - s + 1 >= m {
                    out.push((s, e));
                }
            }
        }
        out
    }

    /// All constraints this axis contributes to basic boxes.
    fn constraints(&self) -> Result<Vec<Constraint>> {
        match &self.kind {
            AxisKind::Categorical { n } => {
                if *n > MAX_SUBSET_VALUES {
                    return Err(Error::NotEnumerable {
                        feature: String::new(),
                        reason: format!("categorical feature with {n} values has too many subsets"),
                    });
                }
                Ok((1u32..(1u32 << n))
                    .map(|mask| Constraint::Subset((0..*n).filter(|i| mask & (1 << i) != 0).collect()))
                    .collect())
            }
            _ => Ok(self.runs().into_iter().map(|r| self.run_constraint(r)).collect()),
        }
    }

    /// The run of atoms matching a constraint exactly, if the constraint is grid aligned.
    fn run_of(&self, c: &Constraint) -> Option<(usize, usize)> {
        match (&self.kind, c) {
            (AxisKind::Continuous { bounds }, Constraint::Open { lo, hi }) => {
                let s = bounds.iter().position(|b| same(*b, *lo))?;
                let e1 = bounds.iter().position(|b| same(*b, *hi))?;
                (e1 > s).then(|| (s, e1 - 1))
            }
            (AxisKind::Integer { starts, hi: dhi }, Constraint::Range { lo, hi }) => {
                let s = starts.iter().position(|v| v == lo)?;
                let e = if hi == dhi {
                    starts.len() - 1
                } else {
                    starts.iter().position(|v| *v == hi + 1)? - 1
                };
                (e >= s).then_some((s, e))
            }
            _ => None,
        }
    }

    fn is_member(&self, c: &Constraint) -> bool {
        match (&self.kind, c) {
            (AxisKind::Categorical { n }, Constraint::Subset(idx)) => !idx.is_empty() && idx.iter().all(|i| i < n),
            _ => match (self.run_of(c), self.usable()) {
                (Some((s, e)), Some((first, last))) => s >= first && e <= last && e - s + 1 >= self.min_cells,
                _ => false,
            },
        }
    }

    /// Moves one side of a constraint to the adjacent cut (or domain bound).
    ///
    /// Returns `None` when that side is already at the outermost usable bound.
    pub fn expand(&self, c: &Constraint, direction: Direction) -> Option<Constraint> {
        match (&self.kind, c) {
            (AxisKind::Continuous { bounds }, Constraint::Open { lo, hi }) => {
                let (first, last) = self.usable()?;
                let usable = &bounds[first..=last + 1];
                match direction {
                    Direction::Upper => usable
                        .iter()
                        .find(|b| **b > hi + EPS)
                        .map(|b| Constraint::Open { lo: *lo, hi: *b }),
                    Direction::Lower => usable
                        .iter()
                        .rev()
                        .find(|b| **b < lo - EPS)
                        .map(|b| Constraint::Open { lo: *b, hi: *hi }),
                }
            }
            (AxisKind::Integer { starts, hi: dhi }, Constraint::Range { lo, hi }) => match direction {
                Direction::Upper => {
                    let k = starts.partition_point(|s| *s <= hi + 1);
                    // Atom starting at hi + 1 (if any) becomes the new last atom.
                    if k == 0 || starts[k - 1] != hi + 1 {
                        return None;
                    }
                    let end = if k < starts.len() { starts[k] - 1 } else { *dhi };
                    Some(Constraint::Range { lo: *lo, hi: end })
                }
                Direction::Lower => {
                    let k = starts.partition_point(|s| s < lo);
                    (k > 0).then(|| Constraint::Range {
                        lo: starts[k - 1],
                        hi: *hi,
                    })
                }
            },
            (AxisKind::Categorical { n }, Constraint::Subset(idx)) => {
                let (min, max) = (*idx.first()?, *idx.last()?);
                let add = match direction {
                    Direction::Lower => (0..min).rev().find(|i| idx.binary_search(i).is_err()),
                    Direction::Upper => (max + 1..*n).find(|i| idx.binary_search(i).is_err()),
                }?;
                let mut out = idx.clone();
                out.push(add);
                out.sort_unstable();
                Some(Constraint::Subset(out))
            }
            _ => None,
        }
    }

    /// Adds a cut inside a continuous axis; no-op for other kinds or existing cuts.
    pub fn insert_cut(&mut self, cut: f64) {
        if let AxisKind::Continuous { bounds } = &mut self.kind {
            let k = bounds.partition_point(|b| *b < cut);
            if k == 0 || k >= bounds.len() || same(bounds[k], cut) || same(bounds[k - 1], cut) {
                return;
            }
            bounds.insert(k, cut);
        }
    }

    /// Representative values used to probe coverage of the axis.
    fn probes(&self, feature: &FeatureSpec) -> Vec<Value> {
        match &self.kind {
            AxisKind::Continuous { bounds } => {
                let mut out = Vec::new();
                let n = bounds.len() - 1;
                for j in 0..n {
                    let (a, b) = (bounds[j], bounds[j + 1]);
                    if a.is_finite() {
                        out.push(a);
                    }
                    let mid = match (a.is_finite(), b.is_finite()) {
                        (true, true) => 0.5 * (a + b),
                        (true, false) => a + 1.0,
                        (false, true) => b - 1.0,
                        (false, false) => 0.0,
                    };
                    out.push(mid);
                }
                if bounds[n].is_finite() {
                    out.push(bounds[n]);
                }
                out.into_iter().map(Value::Real).collect()
            }
            AxisKind::Integer { starts, hi } => {
                let mut out = Vec::new();
                for (j, s) in starts.iter().enumerate() {
                    out.push(Value::Int(*s));
                    let end = if j + 1 < starts.len() { starts[j + 1] - 1 } else { *hi };
                    if end != *s {
                        out.push(Value::Int(end));
                    }
                }
                out
            }
            AxisKind::Categorical { n } => (0..*n).map(|d| feature.value_at(d)).collect(),
        }
    }

    /// A representative value inside atom `j`.
    fn atom_value(&self, j: usize) -> Value {
        match &self.kind {
            AxisKind::Continuous { bounds } => {
                let (a, b) = (bounds[j], bounds[j + 1]);
                Value::Real(match (a.is_finite(), b.is_finite()) {
                    (true, true) => 0.5 * (a + b),
                    (true, false) => a + 1.0,
                    (false, true) => b - 1.0,
                    (false, false) => 0.0,
                })
            }
            AxisKind::Integer { starts, .. } => Value::Int(starts[j]),
            AxisKind::Categorical { .. } => unreachable!("categorical axes never fail condition 2"),
        }
    }

    /// Widest usable constraint on the axis.
    fn widest(&self) -> Option<Constraint> {
        match &self.kind {
            AxisKind::Categorical { n } => Some(Constraint::Subset((0..*n).collect())),
            _ => self.usable().map(|r| self.run_constraint(r)),
        }
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EPS
}

/// Lists every basic rule of a family on a discretization, in lexicographic
/// order of constraint tuples (declaration order for explicit families).
pub fn enumerate_basic(family: &RuleFamily, space: &FeatureSpace) -> Result<Box<dyn Iterator<Item = Rule>>> {
    match family {
        RuleFamily::Boxes { .. } => {
            let grids = family.grids(space)?;
            let axes = grids
                .iter()
                .zip(space.features())
                .map(|(g, f)| {
                    g.constraints().map_err(|e| match e {
                        Error::NotEnumerable { reason, .. } => Error::NotEnumerable {
                            feature: f.name.clone(),
                            reason,
                        },
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Box::new(BoxProduct::new(axes)))
        }
        RuleFamily::Explicit { .. } => {
            let sets = family.explicit_sets(space)?;
            Ok(Box::new(sets.into_iter().map(|members| Rule::Set { members })))
        }
        RuleFamily::Balls => Err(Error::NotEnumerable {
            feature: "*".into(),
            reason: "ball families have no finite representation".into(),
        }),
    }
}

/// Odometer over per-axis constraint lists, first axis most significant.
struct BoxProduct {
    axes: Vec<Vec<Constraint>>,
    pos: Vec<usize>,
    done: bool,
}

impl BoxProduct {
    fn new(axes: Vec<Vec<Constraint>>) -> Self {
        let done = axes.iter().any(Vec::is_empty);
        let pos = vec![0; axes.len()];
        Self { axes, pos, done }
    }
}

impl Iterator for BoxProduct {
    type Item = Rule;

    fn next(&mut self) -> Option<Rule> {
        if self.done {
            return None;
        }
        let rule = Rule::Box {
            constraints: self.pos.iter().zip(&self.axes).map(|(&p, a)| a[p].clone()).collect(),
        };
        let mut k = self.axes.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.pos[k] += 1;
            if self.pos[k] < self.axes[k].len() {
                break;
            }
            self.pos[k] = 0;
        }
        Some(rule)
    }
}

/// Outcome of checking one scalability condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ConditionCheck {
    Pass,
    /// Condition 1 failure: a point covered by no basic rule.
    Uncovered {
        point: Point,
    },
    /// Condition 2 failure: no basic rule containing `point` fits inside `first ∩ second`.
    NoRefinement {
        first: Rule,
        second: Rule,
        point: Point,
    },
}

impl ConditionCheck {
    pub fn passed(&self) -> bool {
        matches!(self, ConditionCheck::Pass)
    }
}

/// Result of checking both conditions of a scalable rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalabilityReport {
    pub condition1: ConditionCheck,
    pub condition2: ConditionCheck,
}

impl ScalabilityReport {
    pub fn is_scalable(&self) -> bool {
        self.condition1.passed() && self.condition2.passed()
    }

    /// Converts a failing report into the matching error.
    pub fn into_result(self) -> Result<()> {
        match (self.condition1, self.condition2) {
            (ConditionCheck::Uncovered { point }, _) => Err(Error::Uncovered { point }),
            (_, ConditionCheck::NoRefinement { first, second, point }) => Err(Error::Condition2Violation {
                first: Box::new(first),
                second: Box::new(second),
                point,
            }),
            _ => Ok(()),
        }
    }
}

/// Checks that a family covers the space and refines at every shared point.
///
/// Box families are products of per-axis interval families, so both
/// conditions are checked axis by axis and failures are lifted to full boxes.
/// Explicit families are checked point by point over the enumeration.
pub fn verify_scalable(family: &RuleFamily, space: &FeatureSpace) -> Result<ScalabilityReport> {
    match family {
        RuleFamily::Boxes { .. } => verify_boxes(&family.grids(space)?, space),
        RuleFamily::Explicit { .. } => verify_explicit(&family.explicit_sets(space)?, space),
        RuleFamily::Balls => Err(Error::NotEnumerable {
            feature: "*".into(),
            reason: "ball families have no finite representation".into(),
        }),
    }
}

fn verify_boxes(grids: &[AxisGrid], space: &FeatureSpace) -> Result<ScalabilityReport> {
    let probes: Vec<Vec<Value>> = grids.iter().zip(space.features()).map(|(g, f)| g.probes(f)).collect();
    let base: Vec<Value> = probes.iter().map(|p| p[0].clone()).collect();

    let mut condition1 = ConditionCheck::Pass;
    'outer: for (d, (g, f)) in grids.iter().zip(space.features()).enumerate() {
        for v in &probes[d] {
            let covered = g.locate_in(f, v).and_then(|p| g.smallest_run(p)).is_some();
            if !covered {
                let mut values = base.clone();
                values[d] = v.clone();
                condition1 = ConditionCheck::Uncovered {
                    point: Point::new(values),
                };
                break 'outer;
            }
        }
    }

    // Condition 2 fails on an axis exactly when some atom lies in two runs
    // whose overlap is shorter than `min_cells`.
    let mut condition2 = ConditionCheck::Pass;
    let widest: Option<Vec<Constraint>> = grids.iter().map(AxisGrid::widest).collect();
    if let Some(widest) = widest {
        for (d, g) in grids.iter().enumerate() {
            if g.is_categorical() {
                continue;
            }
            let Some((first, last)) = g.usable() else { continue };
            let k = last - first + 1;
            let m = g.min_cells;
            if m < 2 || k <= m {
                continue;
            }
            let a1 = (first, first + m - 1);
            let a2 = if k >= 2 * m - 1 {
                (first + m - 1, first + 2 * m - 2)
            } else {
                (last + 1 - m, last)
            };
            let j = first + m - 1;
            let mut c1 = widest.clone();
            let mut c2 = widest.clone();
            c1[d] = g.run_constraint(a1);
            c2[d] = g.run_constraint(a2);
            let mut values = base.clone();
            values[d] = g.atom_value(j);
            for (e, h) in grids.iter().enumerate() {
                if e != d {
                    if let (Some(v), Some(_)) = (h.probes(space.feature(e)).first(), h.usable()) {
                        values[e] = v.clone();
                    }
                }
            }
            condition2 = ConditionCheck::NoRefinement {
                first: Rule::Box { constraints: c1 },
                second: Rule::Box { constraints: c2 },
                point: Point::new(values),
            };
            break;
        }
    }
    Ok(ScalabilityReport { condition1, condition2 })
}

fn verify_explicit(sets: &[PointSet], space: &FeatureSpace) -> Result<ScalabilityReport> {
    let n = finite_size(space)?;
    let check = check_sets(sets, n);
    let condition1 = match check.uncovered {
        Some(i) => ConditionCheck::Uncovered {
            point: space.point_at(i)?,
        },
        None => ConditionCheck::Pass,
    };
    let condition2 = match check.no_refinement {
        Some((a, b, x)) => ConditionCheck::NoRefinement {
            first: Rule::Set {
                members: sets[a].clone(),
            },
            second: Rule::Set {
                members: sets[b].clone(),
            },
            point: space.point_at(x)?,
        },
        None => ConditionCheck::Pass,
    };
    Ok(ScalabilityReport { condition1, condition2 })
}

/// Index-level result of checking a family of subsets of `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SetCheck {
    /// First point in no set.
    pub uncovered: Option<usize>,
    /// Set indices `(a, b)` and a shared point with no set between.
    pub no_refinement: Option<(usize, usize, usize)>,
}

pub(crate) fn check_sets(sets: &[PointSet], n: usize) -> SetCheck {
    let incidence = incidence(sets, n);
    let uncovered = incidence.iter().position(Vec::is_empty);
    for (x, around) in incidence.iter().enumerate() {
        let k = around.len();
        // below[j] = members of `around` contained in set around[j].
        let below: Vec<PointSet> = around
            .iter()
            .map(|&j| PointSet::from_indices(k, (0..k).filter(|&i| sets[around[i]].is_subset(&sets[j]))))
            .collect();
        for a in 0..k {
            for b in a + 1..k {
                if below[a].is_disjoint(&below[b]) {
                    return SetCheck {
                        uncovered,
                        no_refinement: Some((around[a], around[b], x)),
                    };
                }
            }
        }
    }
    SetCheck {
        uncovered,
        no_refinement: None,
    }
}

/// For every point, the indices of the sets containing it.
pub(crate) fn incidence(sets: &[PointSet], n: usize) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); n];
    for (j, s) in sets.iter().enumerate() {
        for i in s.iter() {
            inc[i].push(j);
        }
    }
    inc
}

/// A basic rule containing `x` inside `first ∩ second`.
///
/// Boxes return the intersection itself when it is basic, balls the ball at
/// `x` reaching the nearer sphere, explicit families the smallest basic set.
pub fn shrink_witness(
    family: &RuleFamily,
    space: &FeatureSpace,
    first: &Rule,
    second: &Rule,
    x: &Point,
) -> Result<Rule> {
    if !first.contains(space, x)? || !second.contains(space, x)? {
        return Err(Error::structural(format!("{x} is not in both rules")));
    }
    let violation = || Error::Condition2Violation {
        first: Box::new(first.clone()),
        second: Box::new(second.clone()),
        point: x.clone(),
    };
    match family {
        RuleFamily::Boxes { .. } => {
            let grids = family.grids(space)?;
            let inter = first
                .intersect(second)?
                .ok_or_else(|| Error::structural("rules with a common point cannot be disjoint"))?;
            let Rule::Box { constraints } = &inter else {
                return Err(Error::UnsupportedShape("box family with non-box rules".into()));
            };
            if constraints.iter().zip(&grids).all(|(c, g)| g.is_member(c)) {
                return Ok(inter);
            }
            let mut out = Vec::with_capacity(grids.len());
            for ((g, c), (f, v)) in grids
                .iter()
                .zip(constraints)
                .zip(space.features().iter().zip(x.values()))
            {
                let fitting = match &g.kind {
                    AxisKind::Categorical { .. } => {
                        let pos = g.locate_in(f, v).ok_or_else(violation)?;
                        let s = g.run_constraint(pos.span());
                        s.is_subset_of(c).then_some(s)
                    }
                    _ => {
                        let pos = g.locate(v).ok_or_else(violation)?;
                        let (need_s, need_e) = pos.span();
                        g.runs()
                            .into_iter()
                            .filter(|&(s, e)| s <= need_s && e >= need_e)
                            .map(|r| g.run_constraint(r))
                            .find(|r| r.is_subset_of(c))
                    }
                };
                out.push(fitting.ok_or_else(violation)?);
            }
            Ok(Rule::Box { constraints: out })
        }
        RuleFamily::Balls => match (first, second) {
            (Rule::Ball { center: c1, radius: r1 }, Rule::Ball { center: c2, radius: r2 }) => {
                let p: Vec<f64> = (0..space.dim()).map(|i| x.real(i)).collect();
                let r = (r1 - euclid(&p, c1)).min(r2 - euclid(&p, c2));
                if r <= 0.0 {
                    return Err(violation());
                }
                Ok(Rule::Ball { center: p, radius: r })
            }
            _ => Err(Error::UnsupportedShape("ball family with non-ball rules".into())),
        },
        RuleFamily::Explicit { .. } => {
            let i = space.index_of(x)?;
            let inter = first.to_point_set(space)?.intersection(&second.to_point_set(space)?);
            family
                .explicit_sets(space)?
                .into_iter()
                .filter(|s| s.contains(i) && s.is_subset(&inter))
                .min_by_key(PointSet::len)
                .map(|members| Rule::Set { members })
                .ok_or_else(violation)
        }
    }
}
