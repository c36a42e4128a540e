//! Coverage measures over rules and the fidelity functional.

mod fidelity;
mod sampling;

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::rule::{box_member_indices, Constraint, Rule};
use crate::space::{FeatureSpace, Point, Value};

pub(crate) use fidelity::estimate_for_label;
pub use fidelity::{fidelity_estimate, fidelity_exact, hoeffding_radius, FidelityEstimate};
pub use sampling::{mix_seed, sample_in_rule, sample_with, substream};

/// Column name carrying per-row weights in dataset files.
pub const WEIGHT_COLUMN: &str = "weight";

/// A weighted sample of points, the support of an empirical measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl Dataset {
    /// Unit weights are used when `weights` is `None`.
    pub fn new(space: &FeatureSpace, points: Vec<Point>, weights: Option<Vec<f64>>) -> Result<Self> {
        for p in &points {
            space.check_point(p)?;
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::structural(format!(
                        "{} weights for {} points",
                        w.len(),
                        points.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
                    return Err(Error::structural(format!(
                        "weights must be finite and nonnegative, got {bad}"
                    )));
                }
                w
            }
            None => vec![1.0; points.len()],
        };
        Ok(Self { points, weights })
    }

    pub fn from_csv(space: &FeatureSpace, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(space, file, &path.display().to_string())
    }

    /// Reads a CSV whose header names every feature, plus an optional `weight` column.
    pub fn from_reader<R: Read>(space: &FeatureSpace, reader: R, source: &str) -> Result<Self> {
        let (points, weights) = read_points(space, reader, source, true)?;
        Self::new(space, points, weights)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices and weights of the rows inside a rule.
    pub(crate) fn members(&self, space: &FeatureSpace, rule: &Rule) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .enumerate()
            .filter(|(_, (p, _))| rule.contains_unchecked(space, p))
            .map(|(i, (_, w))| (i, *w))
            .collect()
    }
}

/// Reads points from CSV; feature columns may appear in any order.
///
/// With `allow_weight` a `weight` column is returned separately. Other
/// unknown columns are rejected.
pub fn read_points<R: Read>(
    space: &FeatureSpace,
    reader: R,
    source: &str,
    allow_weight: bool,
) -> Result<(Vec<Point>, Option<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut columns = vec![None; space.dim()];
    let mut weight_col = None;
    for (c, name) in header.iter().enumerate() {
        if allow_weight && name == WEIGHT_COLUMN {
            weight_col = Some(c);
        } else if let Some(i) = space.feature_index(name) {
            if columns[i].replace(c).is_some() {
                return Err(Error::parse(source, format!("duplicate column `{name}`")));
            }
        } else {
            return Err(Error::parse(source, format!("unknown column `{name}`")));
        }
    }
    if let Some(i) = columns.iter().position(Option::is_none) {
        return Err(Error::parse(
            source,
            format!("missing column for feature `{}`", space.feature(i).name),
        ));
    }
    let mut points = Vec::new();
    let mut weights = weight_col.map(|_| Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let at = |c: usize| record.get(c).unwrap_or("").to_string();
        let raw = columns
            .iter()
            .map(|c| Value::Symbol(at(c.expect("checked above"))))
            .collect();
        let p = space
            .point(raw)
            .map_err(|e| Error::parse(format!("{source}: row {}", row + 1), e.to_string()))?;
        points.push(p);
        if let (Some(c), Some(w)) = (weight_col, weights.as_mut()) {
            let v: f64 = at(c)
                .parse()
                .map_err(|_| Error::parse(format!("{source}: row {}", row + 1), "weight is not a number"))?;
            w.push(v);
        }
    }
    Ok((points, weights))
}

/// A coverage measure µ over the rules of a space.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverageMeasure {
    /// Number of points (finite spaces only).
    Counting,
    /// Interval lengths on continuous features times value counts on discrete ones.
    Lebesgue,
    /// Total weight of the dataset rows inside a rule.
    Empirical(Dataset),
    /// A weight per point of a finite space, in enumeration order.
    Weighted(Vec<f64>),
}

impl CoverageMeasure {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CoverageMeasure::Counting => "counting",
            CoverageMeasure::Lebesgue => "lebesgue",
            CoverageMeasure::Empirical(_) => "empirical",
            CoverageMeasure::Weighted(_) => "weighted",
        }
    }

    /// Whether some rule over an unbounded feature gets infinite coverage.
    pub fn is_infinite_capable(&self) -> bool {
        matches!(self, CoverageMeasure::Counting | CoverageMeasure::Lebesgue)
    }

    pub fn validate(&self, space: &FeatureSpace) -> Result<()> {
        match self {
            CoverageMeasure::Counting => {
                if !space.is_finite() {
                    return Err(Error::parse("measure", "counting measure needs a finite space"));
                }
            }
            CoverageMeasure::Lebesgue => {}
            CoverageMeasure::Empirical(data) => {
                for p in data.points() {
                    space.check_point(p)?;
                }
            }
            CoverageMeasure::Weighted(w) => {
                let n = space
                    .cardinality()
                    .filter(|_| space.is_finite())
                    .ok_or_else(|| Error::parse("measure", "weighted measure needs a finite space"))?;
                if w.len() != n {
                    return Err(Error::parse(
                        "measure.weights",
                        format!("{} weights for {n} points", w.len()),
                    ));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::parse(
                        "measure.weights",
                        "weights must be finite and nonnegative",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Mass of every point of a finite space, in enumeration order.
    pub fn point_masses(&self, space: &FeatureSpace) -> Result<Vec<f64>> {
        let n = space
            .cardinality()
            .filter(|_| space.is_finite())
            .ok_or_else(|| Error::structural("point masses need a finite space"))?;
        Ok(match self {
            CoverageMeasure::Counting | CoverageMeasure::Lebesgue => vec![1.0; n],
            CoverageMeasure::Weighted(w) => w.clone(),
            CoverageMeasure::Empirical(data) => {
                let mut m = vec![0.0; n];
                for (p, w) in data.points().iter().zip(data.weights()) {
                    m[space.index_of(p)?] += w;
                }
                m
            }
        })
    }
}

/// Coverage µ(rule); +∞ is a value, not an error.
pub fn coverage(space: &FeatureSpace, measure: &CoverageMeasure, rule: &Rule) -> Result<ExtendedReal> {
    match measure {
        CoverageMeasure::Counting => Ok(match rule {
            Rule::Box { constraints } => constraints
                .iter()
                .map(|c| match c {
                    Constraint::Open { .. } => ExtendedReal::Infinite,
                    other => ExtendedReal::Finite(discrete_count(other)),
                })
                .fold(ExtendedReal::Finite(1.0), |a, b| a * b),
            Rule::Ball { .. } => ExtendedReal::Infinite,
            Rule::Set { members } => ExtendedReal::Finite(members.len() as f64),
        }),
        CoverageMeasure::Lebesgue => Ok(match rule {
            Rule::Box { constraints } => constraints
                .iter()
                .map(|c| match c {
                    Constraint::Open { lo, hi } => ExtendedReal::new(hi - lo),
                    other => ExtendedReal::Finite(discrete_count(other)),
                })
                .fold(ExtendedReal::Finite(1.0), |a, b| a * b),
            Rule::Ball { center, radius } => ExtendedReal::Finite(ball_volume(center.len(), *radius)),
            Rule::Set { members } => ExtendedReal::Finite(members.len() as f64),
        }),
        CoverageMeasure::Empirical(data) => Ok(ExtendedReal::Finite(
            data.members(space, rule).iter().map(|(_, w)| w).sum(),
        )),
        CoverageMeasure::Weighted(w) => {
            let idx = member_indices(space, rule)?;
            Ok(ExtendedReal::Finite(idx.iter().map(|&i| w[i]).sum()))
        }
    }
}

fn discrete_count(c: &Constraint) -> f64 {
    match c {
        Constraint::Range { lo, hi } => (hi - lo + 1) as f64,
        Constraint::Subset(v) => v.len() as f64,
        Constraint::Open { .. } => f64::INFINITY,
    }
}

/// Volume of a Euclidean ball of radius `r` in `d` dimensions.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0 * r, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * std::f64::consts::PI * r * r / k as f64;
        k += 2;
    }
    v
}

/// Enumeration indices of the points of a finite space inside a rule.
pub(crate) fn member_indices(space: &FeatureSpace, rule: &Rule) -> Result<Vec<usize>> {
    if !space.is_finite() {
        return Err(Error::structural("rule membership enumeration needs a finite space"));
    }
    Ok(match rule {
        Rule::Box { constraints } => box_member_indices(space, constraints),
        Rule::Set { members } => members.to_vec(),
        Rule::Ball { .. } => return Err(Error::UnsupportedShape("balls need an all-continuous space".into())),
    })
}
