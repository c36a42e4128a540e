//! Explanation schemes: a feature space, a rule family, and a coverage measure.

use crate::error::Result;
use crate::extended::ExtendedReal;
use crate::family::RuleFamily;
use crate::measures::{coverage, CoverageMeasure};
use crate::rule::Rule;
use crate::space::FeatureSpace;

/// The triple (X, φ, µ) fixing what counts as an explanation and how large it is.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationScheme {
    space: FeatureSpace,
    family: RuleFamily,
    measure: CoverageMeasure,
}

impl ExplanationScheme {
    /// Checks that family and measure are both defined over `space`.
    pub fn new(space: FeatureSpace, family: RuleFamily, measure: CoverageMeasure) -> Result<Self> {
        family.validate(&space)?;
        measure.validate(&space)?;
        Ok(Self { space, family, measure })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn family(&self) -> &RuleFamily {
        &self.family
    }

    pub fn measure(&self) -> &CoverageMeasure {
        &self.measure
    }

    pub fn coverage(&self, rule: &Rule) -> Result<ExtendedReal> {
        coverage(&self.space, &self.measure, rule)
    }

    /// Same space and family under another measure.
    pub fn with_measure(&self, measure: CoverageMeasure) -> Result<Self> {
        Self::new(self.space.clone(), self.family.clone(), measure)
    }
}
