//! Rule-based local explanations over topological explanation schemes.

pub mod classifiers;
pub mod config;
pub mod engine;
pub mod error;
pub mod extended;
pub mod family;
pub mod lab;
pub mod measures;
pub mod rule;
pub mod scheme;
pub mod set;
pub mod space;

pub use classifiers::{majority_vote, Classifier, Label};
pub use engine::{audit, explain, AuditReport, ExplainOutcome, Explanation, SearchBudget};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use family::{enumerate_basic, shrink_witness, verify_scalable, RuleFamily, ScalabilityReport};
pub use lab::{check_equivalence, is_explainable, refinement_witness_continuous, FiniteTopology};
pub use measures::{
    coverage, fidelity_estimate, fidelity_exact, sample_in_rule, CoverageMeasure, Dataset, FidelityEstimate,
};
pub use rule::{Constraint, Rule};
pub use scheme::ExplanationScheme;
pub use set::PointSet;
pub use space::{FeatureKind, FeatureSpace, FeatureSpec, Point, Value};
