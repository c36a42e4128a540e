//! Explanation search and whole-model audits.
//!
//! The search starts from the smallest basic rule around the query point and
//! greedily grows it one facet at a time, accepting an enlargement when the
//! fidelity lower bound stays at or above the threshold.

mod audit;
mod expand;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, Label};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::family::{smallest_box, AxisGrid, Direction, RuleFamily};
use crate::measures::{estimate_for_label, FidelityEstimate};
use crate::measures::{member_indices, mix_seed, substream, CoverageMeasure};
use crate::rule::{Constraint, Rule};
use crate::scheme::ExplanationScheme;
use crate::set::PointSet;
use crate::space::{Point, EPS};

pub use audit::{audit, AuditEntry, AuditReport};
pub use expand::expand_facet;

/// Finite spaces up to this size get exact fidelity by enumeration.
pub const EXACT_LIMIT: usize = 1 << 18;

/// Continuous seed sides are not refined below this length.
const MIN_SEED_SIDE: f64 = 1e3 * EPS;

/// Search limits and randomness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub samples_per_candidate: usize,
    pub confidence: f64,
    pub max_expansions: usize,
    pub seed: u64,
    /// Halvings of the seed box allowed on continuous features when the grid cell is impure.
    pub seed_refinements: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            samples_per_candidate: 2000,
            confidence: 0.95,
            max_expansions: 200,
            seed: 0,
            seed_refinements: 20,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_candidate == 0 || self.max_expansions == 0 {
            return Err(Error::structural("sample and expansion budgets must be positive"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::structural("confidence must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Fidelity attached to an explanation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Fidelity {
    Exact { value: f64 },
    Estimated(FidelityEstimate),
}

impl Fidelity {
    /// The value compared against the threshold.
    pub fn lower_bound(&self) -> f64 {
        match self {
            Fidelity::Exact { value } => *value,
            Fidelity::Estimated(e) => e.lower_bound,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Fidelity::Exact { value } => *value,
            Fidelity::Estimated(e) => e.estimate,
        }
    }
}

/// One accepted enlargement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Index of the basic set moved to, for explicit families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basic_set: Option<usize>,
    pub coverage: ExtendedReal,
    pub fidelity_lower_bound: f64,
}

/// A rule explaining a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub rule: Rule,
    pub description: String,
    pub point: Point,
    pub label: Label,
    pub fidelity: Fidelity,
    pub coverage: ExtendedReal,
    /// Number of non-trivial constraints.
    pub length: usize,
    /// Seed halvings applied before the search.
    pub refinements: usize,
    pub trace: Vec<Expansion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoExplanationReason {
    /// The smallest basic rule at the point misses the fidelity threshold.
    NoPureSeed,
    /// The best rule found is smaller than the coverage floor.
    CoverageBelowThreshold,
    /// No basic rule contains the point.
    Uncovered,
}

/// A sound negative result with the best rule seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoExplanation {
    pub reason: NoExplanationReason,
    pub point: Point,
    pub label: Label,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<Fidelity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<ExtendedReal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExplainOutcome {
    Explained(Explanation),
    NoExplanation(NoExplanation),
}

impl ExplainOutcome {
    pub fn explanation(&self) -> Option<&Explanation> {
        match self {
            ExplainOutcome::Explained(e) => Some(e),
            ExplainOutcome::NoExplanation(_) => None,
        }
    }

    pub fn is_explained(&self) -> bool {
        matches!(self, ExplainOutcome::Explained(_))
    }
}

/// Rejects schemes whose rules can have incomparable infinite coverages.
pub fn check_bounded_coverage(scheme: &ExplanationScheme) -> Result<()> {
    if scheme.family().is_bounded_only() || !scheme.measure().is_infinite_capable() {
        return Ok(());
    }
    match scheme.space().features().iter().find(|f| !f.is_bounded()) {
        Some(f) => Err(Error::Principle2Violation(format!(
            "feature `{}` is unbounded and the family admits rules unbounded in it; under the {} measure \
             such rules all have coverage ∞ and cannot be compared (set bounded_only)",
            f.name,
            scheme.measure().kind_name()
        ))),
        None => Ok(()),
    }
}

/// How candidate fidelities are obtained.
pub(crate) enum Oracle {
    /// Labels and masses of every point of a finite space.
    Finite {
        labels: Vec<usize>,
        masses: Vec<f64>,
    },
    /// Labels of every dataset row of an empirical measure.
    Empirical {
        labels: Vec<usize>,
    },
    Sampled,
}

impl Oracle {
    pub(crate) fn build(scheme: &ExplanationScheme, f: &Classifier) -> Result<Oracle> {
        let space = scheme.space();
        if let CoverageMeasure::Empirical(data) = scheme.measure() {
            return Ok(Oracle::Empirical {
                labels: f.evaluate_batch(data.points())?,
            });
        }
        match space.cardinality().filter(|n| space.is_finite() && *n <= EXACT_LIMIT) {
            Some(_) => Ok(Oracle::Finite {
                labels: f.evaluate_batch(&space.enumerate_points()?)?,
                masses: scheme.measure().point_masses(space)?,
            }),
            None => Ok(Oracle::Sampled),
        }
    }
}

struct Search<'a> {
    scheme: &'a ExplanationScheme,
    f: &'a Classifier,
    oracle: &'a Oracle,
    y: usize,
    tau: f64,
    budget: SearchBudget,
}

impl Search<'_> {
    fn assess(&self, rule: &Rule, stream: u64) -> Result<(ExtendedReal, Fidelity)> {
        let space = self.scheme.space();
        let cov = self.scheme.coverage(rule)?;
        let fid = match self.oracle {
            Oracle::Finite { labels, masses } => {
                let total = cov.finite().ok_or(Error::InfiniteMeasure)?;
                let value = if total == 0.0 {
                    0.0
                } else {
                    let same: f64 = member_indices(space, rule)?
                        .into_iter()
                        .filter(|&i| labels[i] == self.y)
                        .map(|i| masses[i])
                        .sum();
                    (same / total).clamp(0.0, 1.0)
                };
                Fidelity::Exact { value }
            }
            Oracle::Empirical { labels } => {
                let CoverageMeasure::Empirical(data) = self.scheme.measure() else {
                    unreachable!("empirical oracle built from an empirical measure")
                };
                let total = cov.finite().ok_or(Error::InfiniteMeasure)?;
                let value = if total == 0.0 {
                    0.0
                } else {
                    let same: f64 = data
                        .members(space, rule)
                        .into_iter()
                        .filter(|(i, _)| labels[*i] == self.y)
                        .map(|(_, w)| w)
                        .sum();
                    (same / total).clamp(0.0, 1.0)
                };
                Fidelity::Exact { value }
            }
            Oracle::Sampled => Fidelity::Estimated(estimate_for_label(
                self.scheme,
                self.f,
                rule,
                self.y,
                self.budget.samples_per_candidate,
                self.budget.confidence,
                &mut substream(self.budget.seed, stream),
            )?),
        };
        Ok((cov, fid))
    }

    fn accepts(&self, fid: &Fidelity) -> bool {
        fid.lower_bound() >= self.tau
    }

    /// Evaluates candidates concurrently and returns the accepted one of largest
    /// coverage, first in candidate order on ties.
    fn best(
        &self,
        candidates: &[Rule],
        current: ExtendedReal,
        round: usize,
    ) -> Result<Option<(usize, ExtendedReal, Fidelity)>> {
        let round_seed = mix_seed(round as u64, 0x0072_6f75_6e64);
        let results: Vec<Result<(ExtendedReal, Fidelity)>> = candidates
            .par_iter()
            .enumerate()
            .map(|(k, rule)| self.assess(rule, mix_seed(round_seed, k as u64)))
            .collect();
        let mut best: Option<(usize, ExtendedReal, Fidelity)> = None;
        for (k, r) in results.into_iter().enumerate() {
            let (cov, fid) = r?;
            if !self.accepts(&fid) || cov.preference_cmp(&current)?.is_le() {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, b, _)) => cov.preference_cmp(b)?.is_gt(),
            };
            if better {
                best = Some((k, cov, fid));
            }
        }
        Ok(best)
    }
}

/// Finds a high-coverage rule around `x` whose fidelity clears `tau`.
pub fn explain(
    scheme: &ExplanationScheme,
    f: &Classifier,
    x: &Point,
    tau: f64,
    alpha_min: f64,
    budget: &SearchBudget,
) -> Result<ExplainOutcome> {
    check_bounded_coverage(scheme)?;
    budget.validate()?;
    let oracle = Oracle::build(scheme, f)?;
    explain_with(scheme, f, x, tau, alpha_min, budget, &oracle)
}

pub(crate) fn explain_with(
    scheme: &ExplanationScheme,
    f: &Classifier,
    x: &Point,
    tau: f64,
    alpha_min: f64,
    budget: &SearchBudget,
    oracle: &Oracle,
) -> Result<ExplainOutcome> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::structural("fidelity threshold must lie in (0, 1]"));
    }
    if alpha_min.is_nan() || alpha_min < 0.0 {
        return Err(Error::structural("coverage floor must be nonnegative"));
    }
    scheme.space().check_point(x)?;
    let y = f.evaluate_index(x)?;
    let search = Search {
        scheme,
        f,
        oracle,
        y,
        tau,
        budget: *budget,
    };
    let found = match scheme.family() {
        RuleFamily::Boxes { .. } => search_boxes(&search, x)?,
        RuleFamily::Explicit { .. } => search_explicit(&search, x)?,
        RuleFamily::Balls => {
            return Err(Error::UnsupportedFamily(
                "explanation search runs over box and explicit families".into(),
            ))
        }
    };
    let label = f.labels()[y].clone();
    let negative = |reason, rule, fidelity, coverage| {
        ExplainOutcome::NoExplanation(NoExplanation {
            reason,
            point: x.clone(),
            label: label.clone(),
            rule,
            fidelity,
            coverage,
        })
    };
    let Some(found) = found else {
        return Ok(negative(NoExplanationReason::Uncovered, None, None, None));
    };
    if !search.accepts(&found.fidelity) {
        return Ok(negative(
            NoExplanationReason::NoPureSeed,
            Some(found.rule),
            Some(found.fidelity),
            Some(found.coverage),
        ));
    }
    if found.coverage < ExtendedReal::Finite(alpha_min) {
        return Ok(negative(
            NoExplanationReason::CoverageBelowThreshold,
            Some(found.rule),
            Some(found.fidelity),
            Some(found.coverage),
        ));
    }
    Ok(ExplainOutcome::Explained(Explanation {
        description: found.rule.describe(scheme.space()),
        length: found.rule.length(scheme.space()),
        rule: found.rule,
        point: x.clone(),
        label,
        fidelity: found.fidelity,
        coverage: found.coverage,
        refinements: found.refinements,
        trace: found.trace,
    }))
}

struct Found {
    rule: Rule,
    coverage: ExtendedReal,
    fidelity: Fidelity,
    refinements: usize,
    trace: Vec<Expansion>,
}

/// Stream tags for seed assessments, disjoint from round streams.
fn seed_stream(level: usize) -> u64 {
    mix_seed(u64::MAX - level as u64, 0x7365_6564)
}

fn search_boxes(search: &Search<'_>, x: &Point) -> Result<Option<Found>> {
    let space = search.scheme.space();
    let mut grids = search.scheme.family().grids(space)?;
    let Some(mut rule) = smallest_box(&grids, x)? else {
        return Ok(None);
    };
    let (mut cov, mut fid) = search.assess(&rule, seed_stream(0))?;
    let mut refinements = 0;
    while !search.accepts(&fid) && refinements < search.budget.seed_refinements {
        if !refine_seed(&mut grids, &rule) {
            break;
        }
        let Some(next) = smallest_box(&grids, x)? else { break };
        refinements += 1;
        rule = next;
        (cov, fid) = search.assess(&rule, seed_stream(refinements))?;
    }
    let mut trace = Vec::new();
    if search.accepts(&fid) {
        for round in 0..search.budget.max_expansions {
            let moves: Vec<(usize, Direction, Rule)> = (0..space.dim())
                .flat_map(|d| [Direction::Lower, Direction::Upper].map(|dir| (d, dir)))
                .filter_map(|(d, dir)| expand_facet(&rule, d, dir, &grids[d]).map(|r| (d, dir, r)))
                .collect();
            if moves.is_empty() {
                break;
            }
            let candidates: Vec<Rule> = moves.iter().map(|(_, _, r)| r.clone()).collect();
            let Some((k, c, f)) = search.best(&candidates, cov, round)? else {
                break;
            };
            let (d, dir, next) = moves.into_iter().nth(k).expect("index from candidates");
            trace.push(Expansion {
                feature: Some(space.feature(d).name.clone()),
                direction: Some(dir),
                basic_set: None,
                coverage: c,
                fidelity_lower_bound: f.lower_bound(),
            });
            rule = next;
            cov = c;
            fid = f;
        }
    }
    Ok(Some(Found {
        rule,
        coverage: cov,
        fidelity: fid,
        refinements,
        trace,
    }))
}

/// Adds quarter cuts inside the seed on every continuous side long enough to split.
fn refine_seed(grids: &mut [AxisGrid], seed: &Rule) -> bool {
    let Some(constraints) = seed.constraints() else {
        return false;
    };
    let mut changed = false;
    for (g, c) in grids.iter_mut().zip(constraints) {
        if let Constraint::Open { lo, hi } = c {
            let len = hi - lo;
            if len.is_finite() && len / 2.0 >= MIN_SEED_SIDE {
                for k in 1..4 {
                    g.insert_cut(lo + len * k as f64 / 4.0);
                }
                changed = true;
            }
        }
    }
    changed
}

fn search_explicit(search: &Search<'_>, x: &Point) -> Result<Option<Found>> {
    let space = search.scheme.space();
    let RuleFamily::Explicit { sets } = search.scheme.family() else {
        unreachable!("explicit search over an explicit family")
    };
    let n = space.cardinality().unwrap_or(0);
    let sets: Vec<PointSet> = sets
        .iter()
        .map(|s| PointSet::from_indices(n, s.iter().copied()))
        .collect();
    let i = space.index_of(x)?;
    let Some(start) = (0..sets.len())
        .filter(|&k| sets[k].contains(i))
        .min_by_key(|&k| sets[k].len())
    else {
        return Ok(None);
    };
    let mut current = start;
    let mut rule = Rule::Set {
        members: sets[start].clone(),
    };
    let (mut cov, mut fid) = search.assess(&rule, seed_stream(0))?;
    let mut trace = Vec::new();
    if search.accepts(&fid) {
        for round in 0..search.budget.max_expansions {
            let ids: Vec<usize> = (0..sets.len())
                .filter(|&k| sets[current].is_subset(&sets[k]) && sets[k].len() > sets[current].len())
                .collect();
            if ids.is_empty() {
                break;
            }
            let candidates: Vec<Rule> = ids
                .iter()
                .map(|&k| Rule::Set {
                    members: sets[k].clone(),
                })
                .collect();
            let Some((k, c, f)) = search.best(&candidates, cov, round)? else {
                break;
            };
            current = ids[k];
            trace.push(Expansion {
                feature: None,
                direction: None,
                basic_set: Some(current),
                coverage: c,
                fidelity_lower_bound: f.lower_bound(),
            });
            rule = candidates.into_iter().nth(k).expect("index from candidates");
            cov = c;
            fid = f;
        }
    }
    Ok(Some(Found {
        rule,
        coverage: cov,
        fidelity: fid,
        refinements: 0,
        trace,
    }))
}
