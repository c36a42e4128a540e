//! Exact topology on finite spaces and refinement witnesses on continuous ones.

mod equivalence;
mod topology;
mod verdicts;
mod witness;

pub use equivalence::{check_equivalence, Counterexample, EquivalenceVerdict, RefinementGap};
pub use topology::FiniteTopology;
pub use verdicts::{decompose_preimage, is_explainable, unexplained_points, Decomposition, ExplainabilityVerdict};
pub use witness::refinement_witness_continuous;
