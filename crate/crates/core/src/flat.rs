//! Fully expanded, validated models.

use std::collections::BTreeMap;

use crate::model::{BasicEvent, Decision, Gate, GateKind, Identifier, InfluenceEdge};
use crate::validate::{check_parts, ValidationReport};

/// Raw node collections of a flat model, not yet checked.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatParts {
    pub name: String,
    pub events: BTreeMap<Identifier, BasicEvent>,
    pub gates: BTreeMap<Identifier, Gate>,
    pub decisions: BTreeMap<Identifier, Decision>,
    pub influences: BTreeMap<(Identifier, Identifier), InfluenceEdge>,
    pub top: Option<Identifier>,
}

/// Node reference into a [`FlatModel`].
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Event(&'a BasicEvent),
    Gate(&'a Gate),
}

impl NodeRef<'_> {
    pub fn id(&self) -> &Identifier {
        match self {
            NodeRef::Event(e) => &e.id,
            NodeRef::Gate(g) => &g.id,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            NodeRef::Event(e) => e.label.as_deref(),
            NodeRef::Gate(g) => g.label.as_deref(),
        }
    }

    pub fn notes(&self) -> &[String] {
        match self {
            NodeRef::Event(e) => &e.notes,
            NodeRef::Gate(g) => &g.notes,
        }
    }
}

/// A validated DAG over namespaced identifiers with exactly one top node.
///
/// Construction fails unless the parts validate with zero errors, so every
/// engine can rely on resolved references, correct arities and acyclicity.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatModel {
    parts: FlatParts,
    top: Identifier,
    order: Vec<Identifier>,
    by_target: BTreeMap<Identifier, Vec<(Identifier, Identifier)>>,
}

impl FlatModel {
    pub fn from_parts(parts: FlatParts) -> Result<FlatModel, ValidationReport> {
        let checked = check_parts(&parts);
        if checked.report.has_errors() {
            return Err(checked.report);
        }
        let order = checked.order.expect("acyclic when error-free");
        let top = parts.top.clone().expect("top present when error-free");
        let mut by_target: BTreeMap<Identifier, Vec<(Identifier, Identifier)>> = BTreeMap::new();
        for key in parts.influences.keys() {
            by_target.entry(key.1.clone()).or_default().push(key.clone());
        }
        Ok(FlatModel { parts, top, order, by_target })
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn top(&self) -> &Identifier {
        &self.top
    }

    pub fn events(&self) -> &BTreeMap<Identifier, BasicEvent> {
        &self.parts.events
    }

    pub fn gates(&self) -> &BTreeMap<Identifier, Gate> {
        &self.parts.gates
    }

    pub fn decisions(&self) -> &BTreeMap<Identifier, Decision> {
        &self.parts.decisions
    }

    pub fn influences(&self) -> impl Iterator<Item = &InfluenceEdge> {
        self.parts.influences.values()
    }

    pub fn influence_count(&self) -> usize {
        self.parts.influences.len()
    }

    /// Influence edges whose target is `event`, ordered by decision id.
    pub fn influences_on<'a>(&'a self, event: &Identifier) -> impl Iterator<Item = &'a InfluenceEdge> + 'a {
        self.by_target
            .get(event)
            .into_iter()
            .flatten()
            .map(move |k| &self.parts.influences[k])
    }

    /// Events and gates, children before parents.
    pub fn topological_order(&self) -> &[Identifier] {
        &self.order
    }

    pub fn node(&self, id: &Identifier) -> Option<NodeRef<'_>> {
        if let Some(e) = self.parts.events.get(id) {
            Some(NodeRef::Event(e))
        } else {
            self.parts.gates.get(id).map(NodeRef::Gate)
        }
    }

    /// ANDOR gates in identifier order.
    pub fn uncertain_gates(&self) -> impl Iterator<Item = &Gate> {
        self.parts.gates.values().filter(|g| matches!(g.kind, GateKind::AndOr { .. }))
    }

    pub fn parts(&self) -> &FlatParts {
        &self.parts
    }

    pub fn to_parts(&self) -> FlatParts {
        self.parts.clone()
    }

    pub fn into_parts(self) -> FlatParts {
        self.parts
    }
}
