//! Structural validation. Problems are reported as data, never as panics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::flat::{FlatModel, FlatParts};
use crate::model::{Identifier, ModelDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    BadArity,
    CycleDetected,
    DuplicateId,
    InfluenceTargetNotEvent,
    InvalidCost,
    InvalidFactor,
    InvalidProbability,
    InvalidTop,
    InvalidWeight,
    MissingTop,
    ModuleCycle,
    OrphanModule,
    OrphanNode,
    UnknownDecision,
    UnknownModule,
    UnresolvedOutput,
    UnresolvedReference,
}

impl Code {
    pub fn as_str(&self) -> &'static str {
        match self {
            Code::BadArity => "BAD_ARITY",
            Code::CycleDetected => "CYCLE_DETECTED",
            Code::DuplicateId => "DUPLICATE_ID",
            Code::InfluenceTargetNotEvent => "INFLUENCE_TARGET_NOT_EVENT",
            Code::InvalidCost => "INVALID_COST",
            Code::InvalidFactor => "INVALID_FACTOR",
            Code::InvalidProbability => "INVALID_PROBABILITY",
            Code::InvalidTop => "INVALID_TOP",
            Code::InvalidWeight => "INVALID_WEIGHT",
            Code::MissingTop => "MISSING_TOP",
            Code::ModuleCycle => "MODULE_CYCLE",
            Code::OrphanModule => "ORPHAN_MODULE",
            Code::OrphanNode => "ORPHAN_NODE",
            Code::UnknownDecision => "UNKNOWN_DECISION",
            Code::UnknownModule => "UNKNOWN_MODULE",
            Code::UnresolvedOutput => "UNRESOLVED_OUTPUT",
            Code::UnresolvedReference => "UNRESOLVED_REFERENCE",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub node_id: Option<Identifier>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.node_id {
            Some(id) => write!(f, "{sev}[{}] {id}: {}", self.code, self.message),
            None => write!(f, "{sev}[{}] {}", self.code, self.message),
        }
    }
}

/// Diagnostics sorted by node id, then code.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub(crate) fn from_unsorted(mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort_by(|a, b| {
            (&a.node_id, a.code, &a.message, a.severity).cmp(&(&b.node_id, b.code, &b.message, b.severity))
        });
        diagnostics.dedup();
        ValidationReport { diagnostics }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn warning_count(&self) -> usize {
        self.warnings().count()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn has(&self, code: Code, node: &str) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.code == code && d.node_id.as_ref().map(Identifier::as_str) == Some(node))
    }

    pub(crate) fn merge(self, other: ValidationReport) -> ValidationReport {
        let mut all = self.diagnostics;
        all.extend(other.diagnostics);
        ValidationReport::from_unsorted(all)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

pub(crate) fn error(code: Code, node: Option<&Identifier>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { severity: Severity::Error, code, node_id: node.cloned(), message: message.into() }
}

fn warning(code: Code, node: Option<&Identifier>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { severity: Severity::Warning, code, node_id: node.cloned(), message: message.into() }
}

/// Anything that can be structurally checked.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

pub fn validate(model: &impl Validate) -> ValidationReport {
    model.validate()
}

impl Validate for FlatModel {
    fn validate(&self) -> ValidationReport {
        check_parts(&self.to_parts()).report
    }
}

impl Validate for FlatParts {
    fn validate(&self) -> ValidationReport {
        check_parts(self).report
    }
}

impl Validate for ModelDoc {
    fn validate(&self) -> ValidationReport {
        let (parts, expansion) = crate::expand::expand_parts(self);
        match parts {
            Some(parts) => expansion.merge(check_parts(&parts).report),
            None => expansion,
        }
    }
}

pub(crate) struct Checked {
    pub report: ValidationReport,
    /// Children-before-parents order over events and gates; `None` on cycles.
    pub order: Option<Vec<Identifier>>,
}

pub(crate) fn check_parts(parts: &FlatParts) -> Checked {
    let mut out = Vec::new();

    // identifiers must be unique across node kinds
    let mut kinds: BTreeMap<&Identifier, Vec<&str>> = BTreeMap::new();
    for id in parts.events.keys() {
        kinds.entry(id).or_default().push("event");
    }
    for id in parts.gates.keys() {
        kinds.entry(id).or_default().push("gate");
    }
    for id in parts.decisions.keys() {
        kinds.entry(id).or_default().push("decision");
    }
    for (id, ks) in &kinds {
        if ks.len() > 1 {
            out.push(error(Code::DuplicateId, Some(id), format!("declared as {}", ks.join(" and "))));
        }
    }

    for (key, ev) in &parts.events {
        if let Some(why) = ev.prob.check() {
            out.push(error(Code::InvalidProbability, Some(key), why));
        }
    }
    for (key, d) in &parts.decisions {
        if let Some(c) = d.cost {
            if !(c >= 0.0 && c.is_finite()) {
                out.push(error(Code::InvalidCost, Some(key), format!("cost {c} must be finite and non-negative")));
            }
        }
    }

    let is_node = |id: &Identifier| parts.events.contains_key(id) || parts.gates.contains_key(id);

    for (key, g) in &parts.gates {
        if !g.kind.arity_ok(g.children.len()) {
            out.push(error(
                Code::BadArity,
                Some(key),
                format!("{} gate needs {}, has {}", g.kind.name(), g.kind.arity_rule(), g.children.len()),
            ));
        }
        if let crate::model::GateKind::AndOr { w } = g.kind {
            if !(0.0..=1.0).contains(&w) {
                out.push(error(Code::InvalidWeight, Some(key), format!("ANDOR weight {w} outside [0, 1]")));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &g.children {
            if !seen.insert(c) {
                out.push(error(Code::DuplicateId, Some(key), format!("child `{c}` listed twice")));
            }
            if !is_node(c) {
                let what = if parts.decisions.contains_key(c) { "a decision" } else { "undeclared" };
                out.push(error(Code::UnresolvedReference, Some(key), format!("child `{c}` is {what}")));
            }
        }
    }

    for edge in parts.influences.values() {
        if !parts.decisions.contains_key(&edge.decision) {
            out.push(error(
                Code::UnknownDecision,
                Some(&edge.target),
                format!("influence from undeclared decision `{}`", edge.decision),
            ));
        }
        if !(edge.factor >= 0.0 && edge.factor.is_finite()) {
            out.push(error(
                Code::InvalidFactor,
                Some(&edge.target),
                format!("factor {} from `{}` must be finite and non-negative", edge.factor, edge.decision),
            ));
        }
        if !parts.events.contains_key(&edge.target) {
            if parts.gates.contains_key(&edge.target) || parts.decisions.contains_key(&edge.target) {
                out.push(error(
                    Code::InfluenceTargetNotEvent,
                    Some(&edge.target),
                    format!("influence from `{}` must target a basic event", edge.decision),
                ));
            } else {
                out.push(error(
                    Code::UnresolvedReference,
                    Some(&edge.target),
                    format!("influence from `{}` targets an undeclared node", edge.decision),
                ));
            }
        }
    }

    // cycles
    let mut graph: DiGraph<&Identifier, ()> = DiGraph::new();
    let mut index: BTreeMap<&Identifier, NodeIndex> = BTreeMap::new();
    for id in parts.events.keys().chain(parts.gates.keys()) {
        index.entry(id).or_insert_with(|| graph.add_node(id));
    }
    for (key, g) in &parts.gates {
        for c in &g.children {
            if let Some(&ci) = index.get(c) {
                graph.add_edge(index[key], ci, ());
            }
        }
    }
    let mut cyclic = false;
    for scc in tarjan_scc(&graph) {
        let self_loop = scc.len() == 1 && graph.contains_edge(scc[0], scc[0]);
        if scc.len() > 1 || self_loop {
            cyclic = true;
            let members: BTreeSet<&Identifier> = scc.iter().map(|&n| graph[n]).collect();
            let first = *members.iter().next().expect("non-empty scc");
            let list: Vec<String> = members.iter().map(|m| m.to_string()).collect();
            out.push(error(
                Code::CycleDetected,
                Some(first),
                format!("node is its own ancestor via {}", list.join(", ")),
            ));
        }
    }

    match &parts.top {
        None => out.push(error(Code::MissingTop, None, "no `top` declaration")),
        Some(top) if parts.decisions.contains_key(top) && !is_node(top) => {
            out.push(error(Code::InvalidTop, Some(top), "top must be an event or gate, not a decision"))
        }
        Some(top) if !is_node(top) => {
            out.push(error(Code::UnresolvedReference, Some(top), "top refers to an undeclared node"))
        }
        Some(top) => {
            let reachable = reachable_from(parts, top);
            for id in parts.events.keys().chain(parts.gates.keys()) {
                if !reachable.contains(id) {
                    out.push(warning(Code::OrphanNode, Some(id), "not reachable from top"));
                }
            }
        }
    }

    let order = if cyclic { None } else { Some(topo_order(parts)) };
    Checked { report: ValidationReport::from_unsorted(out), order }
}

pub(crate) fn reachable_from<'a>(parts: &'a FlatParts, top: &'a Identifier) -> BTreeSet<&'a Identifier> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![top];
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        if let Some(g) = parts.gates.get(id) {
            stack.extend(g.children.iter().filter(|c| !seen.contains(c)));
        }
    }
    seen
}

/// Post-order DFS over nodes in identifier order; only called on acyclic input.
fn topo_order(parts: &FlatParts) -> Vec<Identifier> {
    let mut done: BTreeSet<&Identifier> = BTreeSet::new();
    let mut order = Vec::with_capacity(parts.events.len() + parts.gates.len());
    for root in parts.events.keys().chain(parts.gates.keys()) {
        if done.contains(root) {
            continue;
        }
        // (node, next child index)
        let mut stack: Vec<(&Identifier, usize)> = vec![(root, 0)];
        while let Some((id, next)) = stack.pop() {
            let children = parts.gates.get(id).map(|g| g.children.as_slice()).unwrap_or(&[]);
            match children.get(next) {
                Some(c) => {
                    stack.push((id, next + 1));
                    if !done.contains(c) && (parts.events.contains_key(c) || parts.gates.contains_key(c)) {
                        stack.push((c, 0));
                    }
                }
                None => {
                    if done.insert(id) {
                        order.push(id.clone());
                    }
                }
            }
        }
    }
    order
}
