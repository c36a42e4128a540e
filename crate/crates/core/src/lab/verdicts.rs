//! Preimage decompositions and exact explainability on finite spaces.

use serde::Serialize;

use super::topology::FiniteTopology;
use crate::classifiers::{Classifier, Label};
use crate::error::{Error, Result};
use crate::scheme::ExplanationScheme;
use crate::set::PointSet;
use crate::space::Point;

/// `f⁻¹(y)` split into its interior and the remaining edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub label: Label,
    pub open_part: PointSet,
    pub edge_part: PointSet,
    pub edge_is_meagre: bool,
    pub edge_is_null: bool,
    pub edge_measure: f64,
}

impl Decomposition {
    /// Whether the preimage is open up to a meagre null edge.
    pub fn is_regular(&self) -> bool {
        self.edge_is_meagre && self.edge_is_null
    }
}

/// Splits `preimage` into `int(preimage)` and the edge left over.
pub fn decompose_preimage(
    t: &FiniteTopology,
    label: Label,
    preimage: &PointSet,
    masses: &[f64],
) -> Result<Decomposition> {
    if masses.len() != t.len() {
        return Err(Error::structural(format!(
            "{} point masses for {} points",
            masses.len(),
            t.len()
        )));
    }
    let open_part = t.interior(preimage)?;
    let edge_part = preimage.difference(&open_part);
    let edge_measure: f64 = edge_part.iter().map(|i| masses[i]).sum();
    Ok(Decomposition {
        label,
        edge_is_meagre: t.is_meagre(&edge_part)?,
        edge_is_null: edge_measure == 0.0,
        edge_measure,
        open_part,
        edge_part,
    })
}

/// Exact explainability verdict for a classifier on a finite scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainabilityVerdict {
    /// Every preimage is open up to a meagre null edge.
    pub explainable: bool,
    pub per_label: Vec<Decomposition>,
    /// Points in no basic set on which the classifier is constant.
    pub unexplained_points: Vec<Point>,
    pub unexplained_measure: f64,
}

/// Decomposes every preimage of `f` in the topology generated by the scheme.
pub fn is_explainable(scheme: &ExplanationScheme, f: &Classifier) -> Result<ExplainabilityVerdict> {
    let space = scheme.space();
    let t = FiniteTopology::generate(space, scheme.family())?;
    let masses = scheme.measure().point_masses(space)?;
    let labels = f.evaluate_batch(&space.enumerate_points()?)?;
    let mut per_label = Vec::with_capacity(f.labels().len());
    for (k, y) in f.labels().iter().enumerate() {
        let pre = PointSet::from_indices(t.len(), (0..t.len()).filter(|&x| labels[x] == k));
        per_label.push(decompose_preimage(&t, y.clone(), &pre, &masses)?);
    }
    let unexplained = t.explained_points(&labels)?.complement();
    Ok(ExplainabilityVerdict {
        explainable: per_label.iter().all(Decomposition::is_regular),
        per_label,
        unexplained_measure: unexplained.iter().map(|i| masses[i]).sum(),
        unexplained_points: unexplained.iter().map(|i| space.point_at(i)).collect::<Result<_>>()?,
    })
}

/// Points with no pure basic rule around them, by scanning every basic set.
pub fn unexplained_points(scheme: &ExplanationScheme, f: &Classifier) -> Result<Vec<Point>> {
    let space = scheme.space();
    let t = FiniteTopology::generate(space, scheme.family())?;
    let labels = f.evaluate_batch(&space.enumerate_points()?)?;
    t.explained_points(&labels)?
        .complement()
        .iter()
        .map(|i| space.point_at(i))
        .collect()
}
