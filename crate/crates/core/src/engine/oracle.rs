//! Direct evaluation over the flat model, kept independent of the compiled
//! evaluator so it can serve as a test oracle.

use std::collections::HashMap;

use super::{
    CutSetReport, EngineError, GateResolution, IdKind, Resolved, TruthAssignment, BRUTE_FORCE_MAX_LEAVES,
    BRUTE_FORCE_MAX_UNCERTAIN,
};
use crate::flat::{FlatModel, NodeRef};
use crate::model::{effective_probability, DecisionAssignment, GateKind, Identifier};

/// Boolean value of the top event.
pub fn eval_structure(flat: &FlatModel, truth: &TruthAssignment, resolution: &GateResolution) -> Result<bool, EngineError> {
    for id in flat.events().keys() {
        if !truth.0.contains_key(id) {
            return Err(EngineError::MissingAssignment { id: id.clone() });
        }
    }
    for g in flat.uncertain_gates() {
        if !resolution.0.contains_key(&g.id) {
            return Err(EngineError::MissingAssignment { id: g.id.clone() });
        }
    }
    if let Some(id) = truth.0.keys().find(|id| !flat.events().contains_key(*id)) {
        return Err(EngineError::UnknownId { kind: IdKind::Event, id: id.to_string() });
    }
    if let Some(id) = resolution.0.keys().find(|id| !flat.uncertain_gates().any(|g| &g.id == *id)) {
        return Err(EngineError::UnknownId { kind: IdKind::UncertainGate, id: id.to_string() });
    }
    let net = Net::new(flat);
    let leaves: Vec<bool> = net.leaves.iter().map(|id| truth.0[id]).collect();
    let res: Vec<bool> = net.uncertain.iter().map(|id| resolution.0[id] == Resolved::And).collect();
    Ok(net.eval(&leaves, &res))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub probability: f64,
    /// Minimal satisfying sets; `None` unless the model is coherent and
    /// free of ANDOR gates.
    pub cut_sets: Option<CutSetReport>,
}

/// Full enumeration of truth assignments and ANDOR resolutions.
pub fn brute_force(flat: &FlatModel, decisions: &DecisionAssignment) -> Result<BruteForce, EngineError> {
    let net = Net::new(flat);
    let (l, u) = (net.leaves.len(), net.uncertain.len());
    if l > BRUTE_FORCE_MAX_LEAVES || u > BRUTE_FORCE_MAX_UNCERTAIN {
        return Err(EngineError::ModelTooLarge { leaves: l, uncertain: u });
    }
    let probs: Vec<f64> = net
        .leaves
        .iter()
        .map(|id| {
            let p0 = flat.events()[id].prob.as_point().ok_or_else(|| EngineError::NonpointParameter { event: id.clone() })?;
            Ok(effective_probability(id, p0, decisions, flat.influences_on(id)))
        })
        .collect::<Result<_, EngineError>>()?;
    let weights: Vec<f64> = net
        .uncertain
        .iter()
        .map(|id| match flat.gates()[id].kind {
            GateKind::AndOr { w } => w,
            _ => unreachable!(),
        })
        .collect();

    let mut probability = 0.0;
    let mut leaves = vec![false; l];
    let mut res = vec![false; u];
    let mut satisfied = Vec::new();
    for r in 0..1usize << u {
        let mut weight = 1.0;
        for (i, w) in weights.iter().enumerate() {
            res[i] = r >> i & 1 == 1;
            weight *= if res[i] { *w } else { 1.0 - w };
        }
        let mut sum = 0.0;
        for t in 0..1usize << l {
            let mut term = 1.0;
            for (i, p) in probs.iter().enumerate() {
                leaves[i] = t >> i & 1 == 1;
                term *= if leaves[i] { *p } else { 1.0 - p };
            }
            let value = net.eval(&leaves, &res);
            if u == 0 {
                satisfied.push(value);
            }
            if value {
                sum += term;
            }
        }
        probability += weight * sum;
    }

    let cut_sets = (u == 0 && net.coherent).then(|| {
        let mut sets: Vec<Vec<Identifier>> = (0..1usize << l)
            .filter(|&t| satisfied[t] && (0..l).all(|i| t >> i & 1 == 0 || !satisfied[t & !(1 << i)]))
            .map(|t| (0..l).filter(|i| t >> i & 1 == 1).map(|i| net.leaves[i].clone()).collect())
            .collect();
        sets.sort_by(|a: &Vec<Identifier>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        CutSetReport { cut_sets: sets, truncated_at_order: None }
    });
    Ok(BruteForce { probability, cut_sets })
}

enum Step {
    Leaf(usize),
    Gate(GateKind, Vec<usize>, Option<usize>),
}

struct Net {
    leaves: Vec<Identifier>,
    uncertain: Vec<Identifier>,
    steps: Vec<Step>,
    top: usize,
    /// No NOT gate below the top.
    coherent: bool,
}

impl Net {
    fn new(flat: &FlatModel) -> Net {
        let leaves: Vec<Identifier> = flat.events().keys().cloned().collect();
        let uncertain: Vec<Identifier> = flat.uncertain_gates().map(|g| g.id.clone()).collect();
        let order = flat.topological_order();
        let pos: HashMap<&Identifier, usize> = order.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let steps = order
            .iter()
            .map(|id| match flat.node(id).expect("ordered node exists") {
                NodeRef::Event(_) => Step::Leaf(leaves.binary_search(id).expect("event listed")),
                NodeRef::Gate(g) => Step::Gate(
                    g.kind,
                    g.children.iter().map(|c| pos[c]).collect(),
                    uncertain.iter().position(|u| u == id),
                ),
            })
            .collect();
        let coherent = crate::validate::reachable_from(flat.parts(), flat.top())
            .into_iter()
            .all(|id| !matches!(flat.gates().get(id), Some(g) if g.kind == GateKind::Not));
        Net { leaves, uncertain, steps, top: pos[flat.top()], coherent }
    }

    fn eval(&self, leaves: &[bool], res: &[bool]) -> bool {
        let mut values: Vec<bool> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let v = match step {
                Step::Leaf(i) => leaves[*i],
                Step::Gate(kind, children, slot) => {
                    let and = match kind {
                        GateKind::And => true,
                        GateKind::Or => false,
                        GateKind::Not => {
                            values.push(!values[children[0]]);
                            continue;
                        }
                        GateKind::AndOr { .. } => res[slot.expect("uncertain slot")],
                    };
                    if and {
                        children.iter().all(|&c| values[c])
                    } else {
                        children.iter().any(|&c| values[c])
                    }
                }
            };
            values.push(v);
        }
        values[self.top]
    }
}
