//! Importance measures for basic events and intervention analysis for
//! decisions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{mocus, resolutions, top_probability, CNode, Compiled, EngineError, Eval, Op, Scenario};
use crate::flat::FlatModel;
use crate::model::{DecisionAssignment, GateKind, Identifier};

pub const MAX_PORTFOLIO_DECISIONS: usize = 16;

/// Note lines starting with this mark a parameter as a placeholder.
pub const PLACEHOLDER_MARK: &str = "placeholder";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventImportance {
    pub birnbaum: f64,
    pub fussell_vesely: f64,
    /// `None` when the risk with the event removed is zero while the top
    /// probability is not; `rrw_infinite` is then set.
    pub risk_reduction_worth: Option<f64>,
    pub rrw_infinite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImportanceReport {
    pub context: DecisionAssignment,
    pub top_probability: f64,
    pub events: BTreeMap<Identifier, EventImportance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionDelta {
    pub decision: Identifier,
    pub p_off: f64,
    pub p_on: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PortfolioEntry {
    pub portfolio: Vec<Identifier>,
    pub top_probability: f64,
    pub absolute_risk_reduction: f64,
    /// Sum of member costs when every member has one.
    pub total_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PortfolioReport {
    pub entries: Vec<PortfolioEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WhatIfReport {
    pub deltas: Vec<DecisionDelta>,
    pub portfolios: PortfolioReport,
    pub placeholder_parameters: bool,
}

struct Prepared {
    c: Compiled,
    probs: Vec<f64>,
    weights: Vec<f64>,
}

fn prepare(flat: &FlatModel, scenario: &Scenario) -> Result<Prepared, EngineError> {
    scenario.check(flat)?;
    let c = Compiled::new(flat);
    let probs = c.leaf_probabilities(flat, scenario)?;
    let weights = c.weights(scenario);
    check_uncertain(&weights)?;
    Ok(Prepared { c, probs, weights })
}

fn check_uncertain(weights: &[f64]) -> Result<(), EngineError> {
    let cap = crate::engine::DEFAULT_MAX_UNCERTAIN_GATES;
    if weights.len() > cap {
        return Err(EngineError::TooManyUncertainGates { count: weights.len(), cap });
    }
    Ok(())
}

/// `(P(top | e), P(top | not e))` for every leaf, by pinning its effective
/// probability to 1 and to 0.
fn pinned(p: &Prepared) -> Vec<(f64, f64)> {
    (0..p.c.leaf_count())
        .into_par_iter()
        .map(|l| {
            let mut probs = p.probs.clone();
            probs[l] = 1.0;
            let on = top_probability(&p.c, &probs, &p.weights);
            probs[l] = 0.0;
            let off = top_probability(&p.c, &probs, &p.weights);
            (on, off)
        })
        .collect()
}

pub fn birnbaum(flat: &FlatModel, decisions: &DecisionAssignment) -> Result<BTreeMap<Identifier, f64>, EngineError> {
    let p = prepare(flat, &Scenario::with_decisions(decisions.clone()))?;
    Ok(p.c.leaves.iter().cloned().zip(pinned(&p).into_iter().map(|(on, off)| on - off)).collect())
}

pub fn fussell_vesely(flat: &FlatModel, decisions: &DecisionAssignment) -> Result<BTreeMap<Identifier, f64>, EngineError> {
    let p = prepare(flat, &Scenario::with_decisions(decisions.clone()))?;
    let top = top_probability(&p.c, &p.probs, &p.weights);
    Ok(p.c.leaves.iter().cloned().zip(fv(&p, top)?).collect())
}

/// Birnbaum, Fussell-Vesely and risk reduction worth for every event.
pub fn importance(flat: &FlatModel, scenario: &Scenario) -> Result<ImportanceReport, EngineError> {
    let p = prepare(flat, scenario)?;
    let top = top_probability(&p.c, &p.probs, &p.weights);
    let fv = fv(&p, top)?;
    let events = p
        .c
        .leaves
        .iter()
        .zip(pinned(&p))
        .zip(fv)
        .map(|((id, (on, off)), fussell_vesely)| {
            let (risk_reduction_worth, rrw_infinite) = match (top, off) {
                (t, _) if t == 0.0 => (Some(1.0), false),
                (_, o) if o == 0.0 => (None, true),
                (t, o) => (Some(t / o), false),
            };
            (id.clone(), EventImportance { birnbaum: on - off, fussell_vesely, risk_reduction_worth, rrw_infinite })
        })
        .collect();
    Ok(ImportanceReport { context: scenario.decisions.clone(), top_probability: top, events })
}

/// Probability of the union of the cut sets containing each leaf, divided
/// by the top probability. ANDOR gates contribute per resolution, weighted.
fn fv(p: &Prepared, top: f64) -> Result<Vec<f64>, EngineError> {
    let c = &p.c;
    let reachable = c.reachable();
    for (n, node) in c.nodes.iter().enumerate() {
        if reachable[n] && matches!(node, CNode::Gate { op: Op::Not, .. }) {
            return Err(EngineError::NoncoherentModel { gate: c.ids[n].clone() });
        }
    }
    let l = c.leaf_count();
    let mut numerator = vec![0.0; l];
    for (res, weight) in resolutions(&p.weights) {
        if weight == 0.0 {
            continue;
        }
        let values: Vec<f64> = if c.is_tree() {
            (0..l)
                .into_par_iter()
                .map(|e| {
                    if c.support(c.top).contains(e) {
                        Eval::new(c, &p.probs, &res).with_focus(e).marginal(c.top)
                    } else {
                        0.0
                    }
                })
                .collect()
        } else {
            let sets = mocus(c, &res, None);
            (0..l)
                .into_par_iter()
                .map(|e| {
                    let with: Vec<Vec<u32>> = sets.iter().filter(|s| s.contains(&(e as u32))).cloned().collect();
                    if with.is_empty() {
                        return 0.0;
                    }
                    let d = Compiled::disjunction(c, &with);
                    Eval::new(&d, &p.probs, &[]).marginal(d.top)
                })
                .collect()
        };
        for (acc, v) in numerator.iter_mut().zip(values) {
            *acc += weight * v;
        }
    }
    Ok(numerator.into_iter().map(|n| if top > 0.0 { (n / top).clamp(0.0, 1.0) } else { 0.0 }).collect())
}

/// Each decision alone against no decisions, under the base scenario's
/// overrides and weights. Decisions in `base` are ignored.
pub fn decision_delta(flat: &FlatModel, base: &Scenario) -> Result<Vec<DecisionDelta>, EngineError> {
    let mut off = base.clone();
    off.decisions = DecisionAssignment::none();
    let p = prepare(flat, &off)?;
    let p_off = top_probability(&p.c, &p.probs, &p.weights);
    flat.decisions()
        .keys()
        .map(|d| {
            let mut on = off.clone();
            on.decisions.set(d.clone(), true);
            let probs = p.c.leaf_probabilities(flat, &on)?;
            let p_on = top_probability(&p.c, &probs, &p.weights);
            Ok(DecisionDelta { decision: d.clone(), p_off, p_on, delta: p_off - p_on })
        })
        .collect()
}

/// Every subset of decisions, best first.
pub fn portfolio_rank(flat: &FlatModel, base: &Scenario) -> Result<PortfolioReport, EngineError> {
    let ids: Vec<&Identifier> = flat.decisions().keys().collect();
    if ids.len() > MAX_PORTFOLIO_DECISIONS {
        return Err(EngineError::TooManyDecisions { count: ids.len(), cap: MAX_PORTFOLIO_DECISIONS });
    }
    let mut off = base.clone();
    off.decisions = DecisionAssignment::none();
    let p = prepare(flat, &off)?;
    let scored: Vec<(Vec<Identifier>, f64)> = (0..1usize << ids.len())
        .into_par_iter()
        .map(|mask| {
            let portfolio: Vec<Identifier> =
                ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, id)| (*id).clone()).collect();
            let scenario = Scenario { decisions: DecisionAssignment::taking(&portfolio), ..off.clone() };
            let probs = p.c.leaf_probabilities(flat, &scenario).expect("points checked by prepare");
            (portfolio, top_probability(&p.c, &probs, &p.weights))
        })
        .collect();
    let baseline = scored[0].1;
    let mut entries: Vec<PortfolioEntry> = scored
        .into_iter()
        .map(|(portfolio, top)| {
            let total_cost = portfolio.iter().map(|d| flat.decisions()[d].cost).sum::<Option<f64>>();
            PortfolioEntry { portfolio, top_probability: top, absolute_risk_reduction: baseline - top, total_cost }
        })
        .collect();
    entries.sort_by(|a, b| {
        a.top_probability
            .total_cmp(&b.top_probability)
            .then_with(|| a.portfolio.len().cmp(&b.portfolio.len()))
            .then_with(|| a.portfolio.cmp(&b.portfolio))
    });
    Ok(PortfolioReport { entries })
}

pub fn whatif(flat: &FlatModel, base: &Scenario) -> Result<WhatIfReport, EngineError> {
    Ok(WhatIfReport {
        deltas: decision_delta(flat, base)?,
        portfolios: portfolio_rank(flat, base)?,
        placeholder_parameters: placeholder_in_effect(flat, base),
    })
}

fn is_placeholder(notes: &[String]) -> bool {
    notes.iter().any(|n| n.starts_with(PLACEHOLDER_MARK))
}

/// True when a placeholder value still feeds the result: an event reachable
/// from the top that is not overridden, an influence of a taken decision,
/// or an ANDOR weight that the scenario does not set.
pub fn placeholder_in_effect(flat: &FlatModel, scenario: &Scenario) -> bool {
    let reachable = crate::validate::reachable_from(flat.parts(), flat.top());
    let events = flat
        .events()
        .values()
        .any(|e| reachable.contains(&e.id) && !scenario.overrides.contains_key(&e.id) && is_placeholder(&e.notes));
    let edges = flat.influences().any(|e| {
        scenario.decisions.is_taken(&e.decision)
            && reachable.contains(&e.target)
            && !scenario.overrides.contains_key(&e.target)
            && is_placeholder(&e.notes)
    });
    let gates = flat.gates().values().any(|g| {
        matches!(g.kind, GateKind::AndOr { .. })
            && reachable.contains(&g.id)
            && !scenario.gate_weights.contains_key(&g.id)
            && is_placeholder(&g.notes)
    });
    events || edges || gates
}
