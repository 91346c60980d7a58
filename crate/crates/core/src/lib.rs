//! Fault-tree and influence-diagram risk engine.
//!
//! Models are written in the `.risk` text format ([`dsl`]), expanded into a
//! [`FlatModel`] ([`expand()`]), and then quantified exactly ([`engine`]),
//! under parameter uncertainty ([`uncertainty`]) or analyzed for importance
//! and intervention effects ([`analysis`]). The bundled ASI-PATH pathway
//! models live in [`asipath`].

pub mod analysis;
pub mod asipath;
pub mod dsl;
pub mod engine;
pub mod expand;
pub mod flat;
pub mod model;
pub mod render;
pub mod uncertainty;
pub mod validate;

pub use dsl::{parse, serialize, ParseError, SourceSpan};
pub use engine::{
    brute_force, eval_structure, exact_probability, minimal_cut_sets, quantify, CutSetReport, EngineError,
    GateResolution, QuantOptions, QuantResult, Resolved, Scenario, TruthAssignment,
};
pub use expand::{expand, stats, ExpansionStats};
pub use flat::{FlatModel, FlatParts, NodeRef};
pub use render::render_dot;
pub use model::{
    effective_probability, BasicEvent, Decision, DecisionAssignment, Gate, GateKind, Identifier,
    InfluenceEdge, ModelDoc, ModuleDef, ModuleInstance, ProbabilitySpec,
};
pub use validate::{validate, Code, Diagnostic, Severity, Validate, ValidationReport};
