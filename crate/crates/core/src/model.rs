//! Domain types for fault-tree / influence-diagram models.
//!
//! A [`ModelDoc`] is what the DSL parser produces: module definitions and
//! instances are still unexpanded. The expander turns it into a
//! [`FlatModel`](crate::FlatModel), the form every engine consumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Dot-separated, namespaced node identifier such as `proofs.theory.before`.
///
/// Every segment matches `[a-z][a-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Identifier(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid identifier `{0}`: segments must match [a-z][a-z0-9_]*")]
pub struct InvalidIdentifier(pub String);

impl Identifier {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let text = text.into();
        if !text.is_empty() && text.split('.').all(is_valid_segment) {
            Ok(Identifier(text))
        } else {
            Err(InvalidIdentifier(text))
        }
    }

    /// Prefix `local` with `namespace`.
    pub fn join(namespace: &Identifier, local: &Identifier) -> Identifier {
        Identifier(format!("{}.{}", namespace.0, local.0))
    }

    /// Append a single segment.
    pub fn child(&self, segment: &str) -> Identifier {
        debug_assert!(is_valid_segment(segment));
        Identifier(format!("{}.{}", self.0, segment))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('.')
    }

    pub fn is_simple(&self) -> bool {
        !self.0.contains('.')
    }

    /// First segment and, if present, the remainder.
    pub fn split_first(&self) -> (&str, Option<&str>) {
        match self.0.split_once('.') {
            Some((head, rest)) => (head, Some(rest)),
            None => (&self.0, None),
        }
    }
}

pub fn is_valid_segment(seg: &str) -> bool {
    let mut chars = seg.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0)
    }
}

impl FromStr for Identifier {
    type Err = InvalidIdentifier;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identifier::new(s)
    }
}

impl TryFrom<String> for Identifier {
    type Error = InvalidIdentifier;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Identifier::new(value)
    }
}

impl From<Identifier> for String {
    fn from(id: Identifier) -> Self {
        id.0
    }
}

impl AsRef<str> for Identifier {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Probability of a basic event, either a point value or an epistemic
/// distribution (sampled by the uncertainty module).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ProbabilitySpec {
    Point { p: f64 },
    Beta { alpha: f64, beta: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ProbabilitySpec {
    pub fn point(p: f64) -> Self {
        ProbabilitySpec::Point { p }
    }

    pub fn as_point(&self) -> Option<f64> {
        match *self {
            ProbabilitySpec::Point { p } => Some(p),
            _ => None,
        }
    }

    /// Human readable reason why the parameters are out of range, if they are.
    pub fn check(&self) -> Option<String> {
        match *self {
            ProbabilitySpec::Point { p } if !(0.0..=1.0).contains(&p) => {
                Some(format!("point probability {p} outside [0, 1]"))
            }
            ProbabilitySpec::Beta { alpha, beta }
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) =>
            {
                Some(format!("beta({alpha}, {beta}) needs finite alpha > 0 and beta > 0"))
            }
            ProbabilitySpec::Uniform { lo, hi } if !(0.0 <= lo && lo <= hi && hi <= 1.0) => {
                Some(format!("uniform({lo}, {hi}) needs 0 <= lo <= hi <= 1"))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicEvent {
    pub id: Identifier,
    pub label: Option<String>,
    pub prob: ProbabilitySpec,
    /// Comment lines attached to the declaration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Logic gate type. `AndOr` is a gate whose type is itself uncertain: it
/// behaves as AND with probability `w` and as OR otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Not,
    #[serde(rename = "ANDOR")]
    AndOr { w: f64 },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::AndOr { .. } => "ANDOR",
        }
    }

    pub fn arity_ok(&self, n: usize) -> bool {
        match self {
            GateKind::Not => n == 1,
            _ => n >= 2,
        }
    }

    pub fn arity_rule(&self) -> &'static str {
        match self {
            GateKind::Not => "exactly 1 child",
            _ => "at least 2 children",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: Identifier,
    pub label: Option<String>,
    pub kind: GateKind,
    pub children: Vec<Identifier>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub id: Identifier,
    pub label: Option<String>,
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Arrow from a decision to a basic event: when the decision is taken the
/// event's probability is multiplied by `factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEdge {
    pub decision: Identifier,
    pub target: Identifier,
    pub factor: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Reusable subtree, instantiated with namespaced copies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleDef {
    pub id: Identifier,
    pub events: BTreeMap<Identifier, BasicEvent>,
    pub gates: BTreeMap<Identifier, Gate>,
    pub influences: BTreeMap<(Identifier, Identifier), InfluenceEdge>,
    pub instances: BTreeMap<Identifier, ModuleInstance>,
    pub output: Identifier,
    pub notes: Vec<String>,
}

impl ModuleDef {
    pub fn new(id: Identifier, output: Identifier) -> Self {
        ModuleDef {
            id,
            events: BTreeMap::new(),
            gates: BTreeMap::new(),
            influences: BTreeMap::new(),
            instances: BTreeMap::new(),
            output,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleInstance {
    pub id: Identifier,
    pub def: Identifier,
    pub notes: Vec<String>,
}

/// Parsed, unexpanded model.
///
/// Collections are keyed by identifier so structural equality does not
/// depend on declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelDoc {
    pub name: String,
    /// Comments before the `model` header, before `top`, or trailing the file.
    pub notes: Vec<String>,
    pub events: BTreeMap<Identifier, BasicEvent>,
    pub gates: BTreeMap<Identifier, Gate>,
    pub decisions: BTreeMap<Identifier, Decision>,
    pub influences: BTreeMap<(Identifier, Identifier), InfluenceEdge>,
    pub modules: BTreeMap<Identifier, ModuleDef>,
    pub instances: BTreeMap<Identifier, ModuleInstance>,
    pub top: Option<Identifier>,
}

impl ModelDoc {
    pub fn new(name: impl Into<String>) -> Self {
        ModelDoc { name: name.into(), ..Default::default() }
    }

    pub fn add_event(&mut self, id: &str, p: f64) -> &mut Self {
        let id = Identifier::new(id).expect("valid identifier");
        self.events.insert(
            id.clone(),
            BasicEvent { id, label: None, prob: ProbabilitySpec::point(p), notes: vec![] },
        );
        self
    }

    pub fn add_gate(&mut self, id: &str, kind: GateKind, children: &[&str]) -> &mut Self {
        let id = Identifier::new(id).expect("valid identifier");
        let children = children.iter().map(|c| Identifier::new(*c).expect("valid identifier"));
        self.gates.insert(
            id.clone(),
            Gate { id, label: None, kind, children: children.collect(), notes: vec![] },
        );
        self
    }

    pub fn add_decision(&mut self, id: &str) -> &mut Self {
        let id = Identifier::new(id).expect("valid identifier");
        self.decisions
            .insert(id.clone(), Decision { id, label: None, cost: None, notes: vec![] });
        self
    }

    pub fn add_influence(&mut self, decision: &str, target: &str, factor: f64) -> &mut Self {
        let decision = Identifier::new(decision).expect("valid identifier");
        let target = Identifier::new(target).expect("valid identifier");
        self.influences.insert(
            (decision.clone(), target.clone()),
            InfluenceEdge { decision, target, factor, notes: vec![] },
        );
        self
    }

    pub fn set_top(&mut self, id: &str) -> &mut Self {
        self.top = Some(Identifier::new(id).expect("valid identifier"));
        self
    }
}

/// Which decisions are taken. Missing keys mean "not taken".
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionAssignment(pub BTreeMap<Identifier, bool>);

impl DecisionAssignment {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn taking<'a>(ids: impl IntoIterator<Item = &'a Identifier>) -> Self {
        DecisionAssignment(ids.into_iter().map(|id| (id.clone(), true)).collect())
    }

    pub fn is_taken(&self, id: &Identifier) -> bool {
        self.0.get(id).copied().unwrap_or(false)
    }

    pub fn set(&mut self, id: Identifier, taken: bool) {
        self.0.insert(id, taken);
    }

    pub fn taken(&self) -> BTreeSet<&Identifier> {
        self.0.iter().filter(|(_, &t)| t).map(|(id, _)| id).collect()
    }
}

/// `clamp(p0 * product of active factors, 0, 1)`.
///
/// Only edges whose target is `event` and whose decision is taken count.
pub fn effective_probability<'a>(
    event: &Identifier,
    p0: f64,
    decisions: &DecisionAssignment,
    influences: impl IntoIterator<Item = &'a InfluenceEdge>,
) -> f64 {
    let p = influences
        .into_iter()
        .filter(|e| &e.target == event && decisions.is_taken(&e.decision))
        .fold(p0, |acc, e| acc * e.factor);
    p.clamp(0.0, 1.0)
}
