//! Whole-model audits: run the search at many points and report the failures.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_bounded_coverage, explain_with, ExplainOutcome, NoExplanationReason, Oracle, SearchBudget};
use crate::classifiers::{Classifier, Label};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::measures::{mix_seed, sample_in_rule};
use crate::rule::Rule;
use crate::scheme::ExplanationScheme;
use crate::space::Point;

const AUDIT_STREAM: u64 = 0x0061_7564_6974;

/// Search result at one audited point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub point: Point,
    pub label: Label,
    pub explained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<ExtendedReal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<NoExplanationReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub sampled: usize,
    pub explained: usize,
    pub unexplained_points: Vec<Point>,
    pub unexplained_fraction: f64,
    /// Whether every point of a finite space was audited.
    pub exhaustive: bool,
    pub verdict_note: String,
    pub entries: Vec<AuditEntry>,
}

/// Runs the search with no coverage floor at `n_points` points drawn from the
/// scheme's measure, or at every point of a finite space when `n_points` is `None`.
pub fn audit(
    scheme: &ExplanationScheme,
    f: &Classifier,
    n_points: Option<usize>,
    tau: f64,
    budget: &SearchBudget,
) -> Result<AuditReport> {
    check_bounded_coverage(scheme)?;
    budget.validate()?;
    let space = scheme.space();
    let (points, exhaustive) = match n_points {
        None => (space.enumerate_points()?, true),
        Some(0) => return Err(Error::structural("audit needs at least one point")),
        Some(n) => (
            sample_in_rule(
                space,
                scheme.measure(),
                &Rule::full(space),
                n,
                mix_seed(budget.seed, AUDIT_STREAM),
            )?,
            false,
        ),
    };
    let oracle = Oracle::build(scheme, f)?;
    let outcomes: Vec<Result<ExplainOutcome>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let b = budget.with_seed(mix_seed(budget.seed, i as u64));
            explain_with(scheme, f, x, tau, 0.0, &b, &oracle)
        })
        .collect();
    let mut entries = Vec::with_capacity(points.len());
    for outcome in outcomes {
        entries.push(match outcome? {
            ExplainOutcome::Explained(e) => AuditEntry {
                point: e.point,
                label: e.label,
                explained: true,
                rule: Some(e.rule),
                fidelity_lower_bound: Some(e.fidelity.lower_bound()),
                coverage: Some(e.coverage),
                reason: None,
            },
            ExplainOutcome::NoExplanation(n) => AuditEntry {
                point: n.point,
                label: n.label,
                explained: false,
                rule: None,
                fidelity_lower_bound: n.fidelity.map(|f| f.lower_bound()),
                coverage: None,
                reason: Some(n.reason),
            },
        });
    }
    let unexplained_points: Vec<Point> = entries
        .iter()
        .filter(|e| !e.explained)
        .map(|e| e.point.clone())
        .collect();
    let sampled = entries.len();
    let explained = sampled - unexplained_points.len();
    let unexplained_fraction = unexplained_points.len() as f64 / sampled as f64;
    let verdict_note = format!(
        "{} of {sampled} {} points have no rule with fidelity lower bound at least {tau} within the \
         search budget; this under-approximates the set of explainable points",
        unexplained_points.len(),
        if exhaustive { "enumerated" } else { "sampled" },
    );
    Ok(AuditReport {
        sampled,
        explained,
        unexplained_points,
        unexplained_fraction,
        exhaustive,
        verdict_note,
        entries,
    })
}
