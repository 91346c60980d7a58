//! Request handling shared by the command line and the HTTP service, so
//! both produce the same JSON for the same query.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pathrisk::analysis::{self, ImportanceReport, PortfolioReport, WhatIfReport};
use pathrisk::engine::{certain_resolution, resolve};
use pathrisk::uncertainty::{self, McResult, RngSeed};
use pathrisk::{
    CutSetReport, DecisionAssignment, EngineError, ExpansionStats, FlatModel, Identifier, ModelDoc, NodeRef,
    ProbabilitySpec, QuantOptions, Scenario, ValidationReport,
};
use serde::{Deserialize, Serialize};

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    File(PathBuf),
    Bundled(&'static str),
}

impl ModelSource {
    /// A path that exists is read as a file; otherwise a bundled model name
    /// is accepted too.
    pub fn locate(arg: &str) -> ModelSource {
        let path = Path::new(arg);
        if !path.exists() {
            if let Some(m) = pathrisk::asipath::bundled(arg) {
                return ModelSource::Bundled(m.name);
            }
        }
        ModelSource::File(path.to_path_buf())
    }

    pub fn display(&self) -> String {
        match self {
            ModelSource::File(p) => p.display().to_string(),
            ModelSource::Bundled(name) => format!("{name}.risk"),
        }
    }

    fn read(&self) -> Result<String, LoadError> {
        match self {
            ModelSource::File(p) => std::fs::read(p)
                .map_err(|e| LoadError::Io(format!("{}: {e}", p.display())))
                .and_then(|bytes| String::from_utf8(bytes).map_err(|_| LoadError::Io(format!("{}: not UTF-8", p.display())))),
            ModelSource::Bundled(name) => Ok(pathrisk::asipath::bundled(name).expect("known bundled model").source.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    Io(String),
    Parse(Vec<String>),
    Invalid(ValidationReport),
}

impl LoadError {
    /// Lines for stderr.
    pub fn lines(&self) -> Vec<String> {
        match self {
            LoadError::Io(m) => vec![m.clone()],
            LoadError::Parse(lines) => lines.clone(),
            LoadError::Invalid(r) => r.diagnostics.iter().map(|d| d.to_string()).collect(),
        }
    }
}

/// An immutable, fully loaded model.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub source: ModelSource,
    pub doc: ModelDoc,
    pub flat: FlatModel,
    pub report: ValidationReport,
}

impl Snapshot {
    pub fn load(source: ModelSource) -> Result<Snapshot, LoadError> {
        let text = source.read()?;
        let name = source.display();
        let doc = pathrisk::parse(&text).map_err(|errs| LoadError::Parse(errs.iter().map(|e| e.render(&name)).collect()))?;
        let report = pathrisk::validate(&doc);
        let flat = pathrisk::expand(&doc).map_err(LoadError::Invalid)?;
        Ok(Snapshot { source, doc, flat, report })
    }
}

/// Error body: `{"error": {"code", "message", "id"}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl ApiError {
    pub fn bad_request(code: &str, message: impl Into<String>) -> ApiError {
        ApiError { status: 400, code: code.into(), message: message.into(), id: None }
    }

    pub fn body(&self) -> serde_json::Value {
        serde_json::json!({ "error": self })
    }

    /// Caller's fault (malformed or unresolvable request) rather than a
    /// property of the model.
    pub fn is_usage(&self) -> bool {
        self.status == 400 || self.status == 422
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> ApiError {
        let status = match &e {
            EngineError::UnknownId { .. } => 422,
            EngineError::OutOfRange { .. } | EngineError::InvalidSampleCount { .. } => 400,
            _ => 409,
        };
        ApiError { status, code: e.code().into(), message: e.to_string(), id: e.id() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ApiQuantifyRequest {
    pub decisions: BTreeMap<Identifier, bool>,
    pub overrides: BTreeMap<Identifier, f64>,
    pub gate_weights: BTreeMap<Identifier, f64>,
}

impl ApiQuantifyRequest {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            decisions: DecisionAssignment(self.decisions.clone()),
            overrides: self.overrides.clone(),
            gate_weights: self.gate_weights.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApiQuantifyResponse {
    pub top_probability: f64,
    pub per_node: BTreeMap<Identifier, f64>,
    pub placeholder_parameters: bool,
}

pub fn quantify(snap: &Snapshot, req: &ApiQuantifyRequest) -> Result<ApiQuantifyResponse, ApiError> {
    let scenario = req.scenario();
    let r = pathrisk::quantify(&snap.flat, &scenario, &QuantOptions::default())?;
    Ok(ApiQuantifyResponse {
        top_probability: r.top_probability,
        per_node: r.per_node,
        placeholder_parameters: analysis::placeholder_in_effect(&snap.flat, &scenario),
    })
}

/// Cut sets after fixing every ANDOR gate whose weight is exactly 0 or 1.
pub fn cutsets(snap: &Snapshot, max_order: Option<usize>, gate_weights: &BTreeMap<Identifier, f64>) -> Result<CutSetReport, ApiError> {
    let scenario = Scenario { gate_weights: gate_weights.clone(), ..Default::default() };
    scenario.check(&snap.flat)?;
    let fixed = resolve(&snap.flat, &certain_resolution(&snap.flat, gate_weights))?;
    Ok(pathrisk::minimal_cut_sets(&fixed, max_order)?)
}

pub fn importance(snap: &Snapshot, req: &ApiQuantifyRequest) -> Result<ImportanceReport, ApiError> {
    Ok(analysis::importance(&snap.flat, &req.scenario())?)
}

pub fn portfolios(snap: &Snapshot, req: &ApiQuantifyRequest) -> Result<PortfolioReport, ApiError> {
    Ok(analysis::portfolio_rank(&snap.flat, &req.scenario())?)
}

pub fn whatif(snap: &Snapshot, req: &ApiQuantifyRequest) -> Result<WhatIfReport, ApiError> {
    Ok(analysis::whatif(&snap.flat, &req.scenario())?)
}

pub fn monte_carlo(snap: &Snapshot, req: &ApiQuantifyRequest, samples: usize, seed: RngSeed) -> Result<McResult, ApiError> {
    Ok(uncertainty::mc_estimate_in(&snap.flat, &req.scenario(), samples, seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Event,
    Gate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeView {
    pub id: Identifier,
    pub kind: NodeKind,
    pub label: Option<String>,
    /// AND, OR, NOT or ANDOR for gates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<ProbabilitySpec>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub from: Identifier,
    pub to: Identifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionView {
    pub id: Identifier,
    pub label: Option<String>,
    pub cost: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InfluenceView {
    pub decision: Identifier,
    pub target: Identifier,
    pub factor: f64,
    pub notes: Vec<String>,
}

/// The expanded graph as served by `GET /api/model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelView {
    pub name: String,
    pub top: Identifier,
    pub notes: Vec<String>,
    /// Topological order, children before parents.
    pub nodes: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
    pub decisions: Vec<DecisionView>,
    pub influences: Vec<InfluenceView>,
    pub uncertain_gates: Vec<Identifier>,
    pub stats: ExpansionStats,
    pub placeholder_parameters: bool,
}

pub fn model_view(snap: &Snapshot) -> ModelView {
    let flat = &snap.flat;
    let nodes = flat
        .topological_order()
        .iter()
        .map(|id| match flat.node(id).expect("ordered node") {
            NodeRef::Event(e) => NodeView {
                id: e.id.clone(),
                kind: NodeKind::Event,
                label: e.label.clone(),
                gate_type: None,
                weight: None,
                probability: Some(e.prob),
                notes: e.notes.clone(),
            },
            NodeRef::Gate(g) => NodeView {
                id: g.id.clone(),
                kind: NodeKind::Gate,
                label: g.label.clone(),
                gate_type: Some(g.kind.name().into()),
                weight: match g.kind {
                    pathrisk::GateKind::AndOr { w } => Some(w),
                    _ => None,
                },
                probability: None,
                notes: g.notes.clone(),
            },
        })
        .collect();
    let edges = flat
        .gates()
        .values()
        .flat_map(|g| g.children.iter().map(|c| EdgeView { from: g.id.clone(), to: c.clone() }))
        .collect();
    ModelView {
        name: flat.name().to_string(),
        top: flat.top().clone(),
        notes: snap.doc.notes.clone(),
        nodes,
        edges,
        decisions: flat
            .decisions()
            .values()
            .map(|d| DecisionView { id: d.id.clone(), label: d.label.clone(), cost: d.cost, notes: d.notes.clone() })
            .collect(),
        influences: flat
            .influences()
            .map(|e| InfluenceView { decision: e.decision.clone(), target: e.target.clone(), factor: e.factor, notes: e.notes.clone() })
            .collect(),
        uncertain_gates: flat.uncertain_gates().map(|g| g.id.clone()).collect(),
        stats: pathrisk::stats(flat),
        placeholder_parameters: analysis::placeholder_in_effect(flat, &Scenario::default()),
    }
}
