//! Boolean evaluation, exact quantification, minimal cut sets and a
//! brute-force oracle for small models.
//!
//! Basic events are independent. Exact quantification enumerates every
//! resolution of the ANDOR gates and, within a resolution, runs a memoized
//! Shannon expansion that conditions only on leaves shared between sibling
//! subtrees, so trees cost one bottom-up pass.

mod compiled;
mod cutsets;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flat::FlatModel;
use crate::model::{DecisionAssignment, GateKind, Identifier};

pub(crate) use compiled::{CNode, Compiled, Eval, Op};
pub use cutsets::minimal_cut_sets;
pub(crate) use cutsets::mocus;
pub use oracle::{brute_force, eval_structure, BruteForce};

pub const DEFAULT_MAX_UNCERTAIN_GATES: usize = 16;
/// Enumeration guard for [`brute_force`].
pub const BRUTE_FORCE_MAX_LEAVES: usize = 20;
pub const BRUTE_FORCE_MAX_UNCERTAIN: usize = 8;

/// Truth value per basic event.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruthAssignment(pub BTreeMap<Identifier, bool>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Resolved {
    And,
    Or,
}

/// Resolved kind per ANDOR gate.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateResolution(pub BTreeMap<Identifier, Resolved>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolutionTerm {
    pub resolution: GateResolution,
    pub weight: f64,
    pub top_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuantResult {
    pub top_probability: f64,
    pub per_node: BTreeMap<Identifier, f64>,
    /// One term per ANDOR resolution; a single empty resolution when the
    /// model has no ANDOR gates.
    pub resolution_breakdown: Vec<ResolutionTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CutSetReport {
    /// Sorted by size, then lexicographically.
    pub cut_sets: Vec<Vec<Identifier>>,
    pub truncated_at_order: Option<usize>,
}

/// What the caller varies on top of the model: decisions taken, base
/// probability overrides (applied before influences) and ANDOR weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Scenario {
    pub decisions: DecisionAssignment,
    pub overrides: BTreeMap<Identifier, f64>,
    pub gate_weights: BTreeMap<Identifier, f64>,
}

impl Scenario {
    pub fn with_decisions(decisions: DecisionAssignment) -> Self {
        Scenario { decisions, ..Default::default() }
    }

    /// Every id must resolve and every value lie in [0, 1].
    pub fn check(&self, flat: &FlatModel) -> Result<(), EngineError> {
        for id in self.decisions.0.keys() {
            if !flat.decisions().contains_key(id) {
                return Err(EngineError::UnknownId { kind: IdKind::Decision, id: id.to_string() });
            }
        }
        for (id, &p) in &self.overrides {
            if !flat.events().contains_key(id) {
                return Err(EngineError::UnknownId { kind: IdKind::Event, id: id.to_string() });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(EngineError::OutOfRange { id: id.clone(), what: "probability", value: p });
            }
        }
        for (id, &w) in &self.gate_weights {
            match flat.gates().get(id) {
                Some(g) if matches!(g.kind, GateKind::AndOr { .. }) => {}
                _ => return Err(EngineError::UnknownId { kind: IdKind::UncertainGate, id: id.to_string() }),
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(EngineError::OutOfRange { id: id.clone(), what: "weight", value: w });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdKind {
    Decision,
    Event,
    UncertainGate,
}

impl fmt::Display for IdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdKind::Decision => "decision",
            IdKind::Event => "event",
            IdKind::UncertainGate => "ANDOR gate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("event {event} has a distribution; sample or override it first")]
    NonpointParameter { event: Identifier },
    #[error("{count} ANDOR gates exceed the limit of {cap}")]
    TooManyUncertainGates { count: usize, cap: usize },
    #[error("no value given for {id}")]
    MissingAssignment { id: Identifier },
    #[error("gate {gate} is a NOT gate; cut sets need a coherent model")]
    NoncoherentModel { gate: Identifier },
    #[error("gate {gate} is an ANDOR gate; resolve it to AND or OR first")]
    UnresolvedAndor { gate: Identifier },
    #[error("{leaves} leaves and {uncertain} ANDOR gates exceed the enumeration limit of {BRUTE_FORCE_MAX_LEAVES} and {BRUTE_FORCE_MAX_UNCERTAIN}")]
    ModelTooLarge { leaves: usize, uncertain: usize },
    #[error("{count} decisions exceed the limit of {cap}")]
    TooManyDecisions { count: usize, cap: usize },
    #[error("unknown {kind} {id}")]
    UnknownId { kind: IdKind, id: String },
    #[error("{what} {value} for {id} is outside [0, 1]")]
    OutOfRange { id: Identifier, what: &'static str, value: f64 },
    #[error("at least 2 samples are needed, got {n}")]
    InvalidSampleCount { n: usize },
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::NonpointParameter { .. } => "NONPOINT_PARAMETER",
            EngineError::TooManyUncertainGates { .. } => "TOO_MANY_UNCERTAIN_GATES",
            EngineError::MissingAssignment { .. } => "MISSING_ASSIGNMENT",
            EngineError::NoncoherentModel { .. } => "NONCOHERENT_MODEL",
            EngineError::UnresolvedAndor { .. } => "UNRESOLVED_ANDOR",
            EngineError::ModelTooLarge { .. } => "MODEL_TOO_LARGE",
            EngineError::TooManyDecisions { .. } => "TOO_MANY_DECISIONS",
            EngineError::UnknownId { kind: IdKind::Decision, .. } => "UNKNOWN_DECISION",
            EngineError::UnknownId { kind: IdKind::Event, .. } => "UNKNOWN_EVENT",
            EngineError::UnknownId { kind: IdKind::UncertainGate, .. } => "UNKNOWN_GATE",
            EngineError::OutOfRange { what: "weight", .. } => "INVALID_WEIGHT",
            EngineError::OutOfRange { .. } => "INVALID_PROBABILITY",
            EngineError::InvalidSampleCount { .. } => "INVALID_SAMPLE_COUNT",
        }
    }

    /// The identifier the error is about, if there is one.
    pub fn id(&self) -> Option<String> {
        match self {
            EngineError::NonpointParameter { event: id }
            | EngineError::MissingAssignment { id }
            | EngineError::NoncoherentModel { gate: id }
            | EngineError::UnresolvedAndor { gate: id }
            | EngineError::OutOfRange { id, .. } => Some(id.to_string()),
            EngineError::UnknownId { id, .. } => Some(id.clone()),
            _ => None,
        }
    }

    /// True when the request itself is at fault rather than the model.
    pub fn is_request_error(&self) -> bool {
        matches!(self, EngineError::UnknownId { .. } | EngineError::OutOfRange { .. } | EngineError::InvalidSampleCount { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantOptions {
    pub max_uncertain_gates: usize,
}

impl Default for QuantOptions {
    fn default() -> Self {
        QuantOptions { max_uncertain_gates: DEFAULT_MAX_UNCERTAIN_GATES }
    }
}

/// Exact top-event probability with default options and no overrides.
pub fn exact_probability(flat: &FlatModel, decisions: &DecisionAssignment) -> Result<QuantResult, EngineError> {
    quantify(flat, &Scenario::with_decisions(decisions.clone()), &QuantOptions::default())
}

pub fn quantify(flat: &FlatModel, scenario: &Scenario, options: &QuantOptions) -> Result<QuantResult, EngineError> {
    scenario.check(flat)?;
    let c = Compiled::new(flat);
    let probs = c.leaf_probabilities(flat, scenario)?;
    let weights = c.weights(scenario);
    if weights.len() > options.max_uncertain_gates {
        return Err(EngineError::TooManyUncertainGates { count: weights.len(), cap: options.max_uncertain_gates });
    }
    let resolutions = resolutions(&weights);
    let per_resolution: Vec<Vec<f64>> = resolutions
        .par_iter()
        .map(|(res, _)| {
            let mut eval = Eval::new(&c, &probs, res);
            (0..c.len()).map(|n| eval.marginal(n)).collect()
        })
        .collect();

    let mut per_node = vec![0.0; c.len()];
    let mut breakdown = Vec::with_capacity(resolutions.len());
    for ((res, weight), values) in resolutions.iter().zip(&per_resolution) {
        for (acc, v) in per_node.iter_mut().zip(values) {
            *acc += weight * v;
        }
        breakdown.push(ResolutionTerm {
            resolution: c.resolution_map(res),
            weight: *weight,
            top_probability: values[c.top],
        });
    }
    // a single resolution with weight 1 must reproduce its values exactly
    Ok(QuantResult {
        top_probability: per_node[c.top].clamp(0.0, 1.0),
        per_node: c.ids.iter().cloned().zip(per_node.into_iter().map(|p| p.clamp(0.0, 1.0))).collect(),
        resolution_breakdown: breakdown,
    })
}

/// Top probability only, for callers that evaluate many leaf vectors.
pub(crate) fn top_probability(c: &Compiled, probs: &[f64], weights: &[f64]) -> f64 {
    let resolutions = resolutions(weights);
    let tops: Vec<f64> = resolutions.par_iter().map(|(res, _)| Eval::new(c, probs, res).marginal(c.top)).collect();
    resolutions.iter().zip(tops).map(|((_, w), p)| w * p).sum::<f64>().clamp(0.0, 1.0)
}

/// All `2^u` resolutions with their weights; `true` means the gate acts as
/// AND. Resolution `k` sets gate `i` to OR when bit `u - 1 - i` of `k` is
/// set, so the all-AND resolution comes first.
pub(crate) fn resolutions(weights: &[f64]) -> Vec<(Vec<bool>, f64)> {
    let u = weights.len();
    (0..1usize << u)
        .map(|k| {
            let res: Vec<bool> = (0..u).map(|i| k >> (u - 1 - i) & 1 == 0).collect();
            let weight = res.iter().zip(weights).fold(1.0, |acc, (&and, &w)| acc * if and { w } else { 1.0 - w });
            (res, weight)
        })
        .collect()
}

/// Replace the listed ANDOR gates by plain AND/OR gates.
pub fn resolve(flat: &FlatModel, resolution: &GateResolution) -> Result<FlatModel, EngineError> {
    let mut parts = flat.to_parts();
    for (id, kind) in &resolution.0 {
        match parts.gates.get_mut(id) {
            Some(g) if matches!(g.kind, GateKind::AndOr { .. }) => {
                g.kind = match kind {
                    Resolved::And => GateKind::And,
                    Resolved::Or => GateKind::Or,
                }
            }
            _ => return Err(EngineError::UnknownId { kind: IdKind::UncertainGate, id: id.to_string() }),
        }
    }
    Ok(FlatModel::from_parts(parts).expect("resolving gates keeps the model valid"))
}

/// Resolution of the ANDOR gates whose weight is exactly 0 or 1, taking
/// scenario weights into account.
pub fn certain_resolution(flat: &FlatModel, gate_weights: &BTreeMap<Identifier, f64>) -> GateResolution {
    GateResolution(
        flat.uncertain_gates()
            .filter_map(|g| {
                let GateKind::AndOr { w } = g.kind else { return None };
                let w = gate_weights.get(&g.id).copied().unwrap_or(w);
                match w {
                    w if w == 1.0 => Some((g.id.clone(), Resolved::And)),
                    w if w == 0.0 => Some((g.id.clone(), Resolved::Or)),
                    _ => None,
                }
            })
            .collect(),
    )
}
