//! Topologies on finite spaces, generated by scalable families.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{check_sets, finite_size, smallest_box, RuleFamily};
use crate::rule::Rule;
use crate::set::PointSet;
use crate::space::{FeatureSpace, Point};

/// A topology on `0..n` given by a verified basis.
///
/// Every point has a minimal open neighbourhood `U_x`: the smallest basic set
/// containing it, which lies inside every other basic set containing it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteTopology {
    n: usize,
    basis: Vec<PointSet>,
    minimal: Vec<usize>,
}

impl FiniteTopology {
    /// Checks both basis conditions on raw index sets.
    pub fn from_basis(n: usize, basis: Vec<PointSet>) -> Result<Self> {
        if let Some(s) = basis.iter().find(|s| s.universe() != n) {
            return Err(Error::structural(format!(
                "basis set over {} points in a space of {n}",
                s.universe()
            )));
        }
        let check = check_sets(&basis, n);
        if let Some(i) = check.uncovered {
            return Err(Error::Uncovered {
                point: Point::ints(&[i as i64]),
            });
        }
        if let Some((a, b, x)) = check.no_refinement {
            return Err(Error::Condition2Violation {
                first: Box::new(Rule::Set {
                    members: basis[a].clone(),
                }),
                second: Box::new(Rule::Set {
                    members: basis[b].clone(),
                }),
                point: Point::ints(&[x as i64]),
            });
        }
        Ok(Self::assume_basis(n, basis))
    }

    /// Topology generated by a scalable family on a finite space.
    ///
    /// Box families are represented by the minimal box around each point,
    /// which generates the same topology as the full family.
    pub fn generate(space: &FeatureSpace, family: &RuleFamily) -> Result<Self> {
        let n = finite_size(space)?;
        family.validate(space)?;
        crate::family::verify_scalable(family, space)?.into_result()?;
        let basis = match family {
            RuleFamily::Explicit { .. } => crate::family::enumerate_basic(family, space)?
                .map(|r| r.to_point_set(space))
                .collect::<Result<Vec<_>>>()?,
            RuleFamily::Boxes { .. } => {
                let grids = family.grids(space)?;
                let mut seen = HashSet::new();
                let mut basis = Vec::new();
                for x in space.enumerate_points()? {
                    let b = smallest_box(&grids, &x)?.ok_or_else(|| Error::Uncovered { point: x.clone() })?;
                    let set = b.to_point_set(space)?;
                    if seen.insert(set.clone()) {
                        basis.push(set);
                    }
                }
                basis
            }
            RuleFamily::Balls => {
                return Err(Error::UnsupportedFamily(
                    "balls need a continuous space; no finite topology".into(),
                ))
            }
        };
        Ok(Self::assume_basis(n, basis))
    }

    fn assume_basis(n: usize, basis: Vec<PointSet>) -> Self {
        let mut minimal = vec![usize::MAX; n];
        for (j, s) in basis.iter().enumerate() {
            for x in s.iter() {
                let m = minimal[x];
                if m == usize::MAX || s.len() < basis[m].len() {
                    minimal[x] = j;
                }
            }
        }
        Self { n, basis, minimal }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn basis(&self) -> &[PointSet] {
        &self.basis
    }

    /// `U_x`, the intersection of all open sets containing `x`.
    pub fn minimal_neighbourhood(&self, x: usize) -> &PointSet {
        &self.basis[self.minimal[x]]
    }

    fn check(&self, s: &PointSet) -> Result<()> {
        if s.universe() == self.n {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "set over {} points used with a topology on {}",
                s.universe(),
                self.n
            )))
        }
    }

    /// Points with a basic neighbourhood inside `s`.
    pub fn interior(&self, s: &PointSet) -> Result<PointSet> {
        self.check(s)?;
        Ok(PointSet::from_indices(
            self.n,
            s.iter().filter(|&x| self.minimal_neighbourhood(x).is_subset(s)),
        ))
    }

    /// Points whose every neighbourhood meets `s`.
    pub fn closure(&self, s: &PointSet) -> Result<PointSet> {
        self.check(s)?;
        Ok(PointSet::from_indices(
            self.n,
            (0..self.n).filter(|&x| !self.minimal_neighbourhood(x).is_disjoint(s)),
        ))
    }

    pub fn is_open(&self, s: &PointSet) -> Result<bool> {
        Ok(self.interior(s)? == *s)
    }

    pub fn is_closed(&self, s: &PointSet) -> Result<bool> {
        Ok(self.closure(s)? == *s)
    }

    /// Whether the closure of `s` has empty interior.
    pub fn is_nowhere_dense(&self, s: &PointSet) -> Result<bool> {
        Ok(self.interior(&self.closure(s)?)?.is_empty())
    }

    /// Whether `s` is a countable union of nowhere dense sets. On a finite
    /// space this holds iff each of its points is nowhere dense.
    pub fn is_meagre(&self, s: &PointSet) -> Result<bool> {
        self.check(s)?;
        for x in s.iter() {
            if !self.is_nowhere_dense(&PointSet::singleton(self.n, x))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Points lying in some basic set on which `labels` is constant.
    pub fn explained_points(&self, labels: &[usize]) -> Result<PointSet> {
        if labels.len() != self.n {
            return Err(Error::structural(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        let mut out = PointSet::empty(self.n);
        for b in &self.basis {
            let mut it = b.iter();
            let Some(first) = it.next() else { continue };
            if it.all(|x| labels[x] == labels[first]) {
                out.union_with(b);
            }
        }
        Ok(out)
    }
}
