//! Random model generators shared by the integration tests.
#![allow(dead_code)]

use pathrisk::{
    BasicEvent, Decision, DecisionAssignment, FlatModel, Gate, GateKind, Identifier, InfluenceEdge, ModelDoc,
    ModuleDef, ModuleInstance, ProbabilitySpec,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(s: &str) -> Identifier {
    Identifier::new(s).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A probability that is sometimes exactly 0 or 1.
fn prob(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_leaves: usize,
    pub max_gates: usize,
    /// Chance that a gate is ANDOR rather than AND or OR.
    pub andor: f64,
    pub max_decisions: usize,
}

impl Shape {
    pub const COHERENT: Shape = Shape { max_leaves: 12, max_gates: 8, andor: 0.0, max_decisions: 3 };
    pub const UNCERTAIN: Shape = Shape { max_leaves: 8, max_gates: 6, andor: 0.3, max_decisions: 2 };
}

/// Random AND/OR(/ANDOR) DAG with shared subtrees, random decisions and
/// influences, and a random decision assignment.
pub fn random_model(seed: u64, shape: Shape) -> (FlatModel, DecisionAssignment) {
    let mut rng = rng(seed);
    let mut doc = ModelDoc::new(format!("random_{seed}"));
    let leaves = rng.random_range(1..=shape.max_leaves);
    let mut pool: Vec<String> = Vec::new();
    for i in 0..leaves {
        let name = format!("e{i:02}");
        doc.add_event(&name, prob(&mut rng));
        pool.push(name);
    }
    let gates = if leaves == 1 { 0 } else { rng.random_range(1..=shape.max_gates) };
    for i in 0..gates {
        let k = rng.random_range(2..=pool.len().min(4));
        // favour the newest node so the top tends to cover most of the pool
        let mut children: Vec<&str> = vec![&pool[pool.len() - 1]];
        while children.len() < k {
            let c = pool.choose(&mut rng).unwrap();
            if !children.contains(&c.as_str()) {
                children.push(c);
            }
        }
        let kind = if rng.random::<f64>() < shape.andor {
            GateKind::AndOr { w: prob(&mut rng) }
        } else if rng.random() {
            GateKind::And
        } else {
            GateKind::Or
        };
        let name = format!("g{i:02}");
        doc.add_gate(&name, kind, &children);
        pool.push(name);
    }
    doc.set_top(pool.last().unwrap());

    let mut taken = DecisionAssignment::none();
    for d in 0..rng.random_range(0..=shape.max_decisions) {
        let name = format!("d{d}");
        doc.add_decision(&name);
        for _ in 0..rng.random_range(1..=3) {
            let target = format!("e{:02}", rng.random_range(0..leaves));
            doc.add_influence(&name, &target, rng.random_range(0.0..2.0));
        }
        taken.set(id(&name), rng.random());
    }
    (pathrisk::expand(&doc).expect("generated model is valid"), taken)
}

pub fn coherent_model() -> impl Strategy<Value = (FlatModel, DecisionAssignment)> {
    any::<u64>().prop_map(|s| random_model(s, Shape::COHERENT))
}

pub fn uncertain_model() -> impl Strategy<Value = (FlatModel, DecisionAssignment)> {
    any::<u64>().prop_map(|s| random_model(s, Shape::UNCERTAIN))
}

const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "x", "y2", "note", "under_score"];
const LABELS: [&str; 6] = ["plain", "with \"quotes\"", "back\\slash", "tab\there", "line\nbreak", "ünïcode ✓"];

fn notes(rng: &mut impl Rng) -> Vec<String> {
    (0..rng.random_range(0..3))
        .map(|_| {
            let n = rng.random_range(0..4);
            (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

fn label(rng: &mut impl Rng) -> Option<String> {
    rng.random_bool(0.5).then(|| LABELS.choose(rng).unwrap().to_string())
}

fn spec(rng: &mut impl Rng) -> ProbabilitySpec {
    match rng.random_range(0..3) {
        0 => ProbabilitySpec::Point { p: prob(rng) },
        1 => ProbabilitySpec::Beta { alpha: rng.random_range(0.01..20.0), beta: rng.random_range(0.01..20.0) },
        _ => {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            ProbabilitySpec::Uniform { lo: a.min(b), hi: a.max(b) }
        }
    }
}

fn event(rng: &mut impl Rng, name: &str) -> BasicEvent {
    BasicEvent { id: id(name), label: label(rng), prob: spec(rng), notes: notes(rng) }
}

fn gate(rng: &mut impl Rng, name: &str, pool: &[String]) -> Gate {
    let kind = match rng.random_range(0..4) {
        0 if !pool.is_empty() => GateKind::Not,
        1 => GateKind::AndOr { w: prob(rng) },
        2 => GateKind::And,
        _ => GateKind::Or,
    };
    let n = if kind == GateKind::Not { 1 } else { 2 };
    let mut children: Vec<Identifier> = Vec::new();
    let mut pick: Vec<&String> = pool.iter().collect();
    while children.len() < n {
        let i = rng.random_range(0..pick.len());
        children.push(id(pick.swap_remove(i)));
    }
    Gate { id: id(name), label: label(rng), kind, children, notes: notes(rng) }
}

/// Random valid document using every construct of the text format:
/// labels with escapes, notes, all distributions and gate kinds, costs,
/// modules (possibly nested) and instances.
pub fn random_doc(seed: u64) -> ModelDoc {
    let mut rng = rng(seed);
    let mut doc = ModelDoc::new(*LABELS.choose(&mut rng).unwrap());
    doc.notes = notes(&mut rng);
    let decisions: Vec<String> = (0..rng.random_range(0..3)).map(|i| format!("d{i}")).collect();
    for d in &decisions {
        let cost = rng.random_bool(0.5).then(|| rng.random_range(0.0..100.0));
        doc.decisions.insert(id(d), Decision { id: id(d), label: label(&mut rng), cost, notes: notes(&mut rng) });
    }

    let mut exported: Vec<String> = Vec::new();
    for m in 0..rng.random_range(0..3) {
        let name = format!("m{m}");
        let mut pool: Vec<String> = Vec::new();
        let mut def = ModuleDef::new(id(&name), id("g_out"));
        def.notes = notes(&mut rng);
        if let Some(inner) = exported.last() {
            if rng.random() {
                def.instances.insert(id("sub"), ModuleInstance { id: id("sub"), def: id(inner), notes: notes(&mut rng) });
                pool.push("sub.out".into());
            }
        }
        for e in 0..rng.random_range(2..4) {
            let en = format!("e{e}");
            def.events.insert(id(&en), event(&mut rng, &en));
            pool.push(en);
        }
        if let Some(d) = decisions.choose(&mut rng) {
            def.influences.insert(
                (id(d), id("e0")),
                InfluenceEdge { decision: id(d), target: id("e0"), factor: rng.random_range(0.0..2.0), notes: notes(&mut rng) },
            );
        }
        let mut g = gate(&mut rng, "g_out", &pool);
        if g.kind == GateKind::Not {
            g.kind = GateKind::Or;
            g.children.push(id(pool.iter().find(|p| id(p) != g.children[0]).unwrap()));
        }
        def.gates.insert(id("g_out"), g);
        doc.modules.insert(id(&name), def);
        exported.push(name);
    }

    let mut pool: Vec<String> = Vec::new();
    for (i, m) in exported.iter().enumerate() {
        for k in 0..rng.random_range(0..3) {
            let inst = format!("i{i}_{k}");
            doc.instances.insert(id(&inst), ModuleInstance { id: id(&inst), def: id(m), notes: notes(&mut rng) });
            pool.push(format!("{inst}.out"));
        }
    }
    for e in 0..rng.random_range(1..5) {
        let en = format!("ev{e}");
        doc.events.insert(id(&en), event(&mut rng, &en));
        pool.push(en);
    }
    for d in &decisions {
        if rng.random() {
            let t = id("ev0");
            doc.influences.insert(
                (id(d), t.clone()),
                InfluenceEdge { decision: id(d), target: t, factor: rng.random_range(0.0..2.0), notes: notes(&mut rng) },
            );
        }
    }
    let mut top = pool[0].clone();
    for g in 0..rng.random_range(0..4) {
        if pool.len() < 2 {
            break;
        }
        let gn = format!("gt{g}");
        let made = gate(&mut rng, &gn, &pool);
        doc.gates.insert(id(&gn), made);
        pool.push(gn.clone());
        top = gn;
    }
    doc.top = Some(id(&top));
    doc
}

pub fn doc_strategy() -> impl Strategy<Value = ModelDoc> {
    any::<u64>().prop_map(random_doc)
}
