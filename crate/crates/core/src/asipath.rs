//! The ASI-PATH pathway models shipped with the crate.
//!
//! Two variants share everything except the subtree under
//! `human_attempts_fail`: one breaks human attempts down by line of
//! thinking through the `x` and `y` modules, the other by specific safety
//! measure with two ANDOR gates. Every number in both files is a
//! placeholder. [`structural_check`] asserts the encoded shape of the
//! pathway diagrams against a model.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::PLACEHOLDER_MARK;
use crate::flat::FlatModel;
use crate::model::{Identifier, ModelDoc};
use crate::validate::reachable_from;

/// Note prefix that marks where a node comes from.
pub const PROVENANCE_MARK: &str = "ASI-PATH";

pub const DECISIONS: [&str; 5] = ["ai_confinement", "ai_enforcement", "encourage_safety", "enhance_humans", "review_boards"];

/// Root of the subtree in which the two variants differ.
pub const HUMAN_ATTEMPTS: &str = "human_attempts_fail";

const SEED_LEAVES: [&str; 9] = [
    "brain_scanning",
    "brain_simulation",
    "brain_translation",
    "networked_ai",
    "neuromorphic",
    "other_agi",
    "other_novel_design",
    "other_seed_ai",
    "self_improvement_specialist",
];

const SOFT_LEAVES: [&str; 3] = ["soft_hardware_quality", "soft_hardware_quantity", "soft_software_quality"];

const ATTEMPT_LINES: [&str; 3] = ["biasing", "other_attempts", "proofs"];
const FAILURE_MODES: [&str; 5] = ["adversary", "implementation", "no_attempt", "other_failure", "theory"];
const SEED_MEASURES: [&str; 4] = ["goal_safety_fails", "goal_stability_fails", "other_seed_measures_fail", "training_openness_fails"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Human attempts by line of thinking (`x`/`y` modules).
    Lines,
    /// Human attempts by specific measure (ANDOR gates).
    Measures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundledModel {
    pub name: &'static str,
    pub file: &'static str,
    pub variant: Variant,
    pub source: &'static str,
}

impl BundledModel {
    pub fn doc(&self) -> ModelDoc {
        crate::parse(self.source).expect("bundled model parses")
    }

    pub fn flat(&self) -> FlatModel {
        crate::expand(&self.doc()).expect("bundled model expands")
    }
}

pub const LINES: BundledModel = BundledModel {
    name: "asipath_v1_lines",
    file: "asipath_v1_lines.risk",
    variant: Variant::Lines,
    source: include_str!("../../../models/asipath_v1_lines.risk"),
};

pub const MEASURES: BundledModel = BundledModel {
    name: "asipath_v1_measures",
    file: "asipath_v1_measures.risk",
    variant: Variant::Measures,
    source: include_str!("../../../models/asipath_v1_measures.risk"),
};

pub fn bundled_models() -> [BundledModel; 2] {
    [LINES, MEASURES]
}

/// Look a bundled model up by name, with or without the `.risk` suffix.
pub fn bundled(name: &str) -> Option<BundledModel> {
    bundled_models().into_iter().find(|m| m.name == name || m.file == name)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// First mismatch found, empty when the check passed.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub model: String,
    pub checks: Vec<Check>,
}

impl FidelityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Outcome = Result<(), String>;

fn id(s: &str) -> Identifier {
    Identifier::new(s).expect("valid identifier")
}

fn gate_is(flat: &FlatModel, gate: &str, kind: &str, children: &[String]) -> Outcome {
    let g = flat.gates().get(&id(gate)).ok_or_else(|| format!("no gate {gate}"))?;
    if g.kind.name() != kind {
        return Err(format!("{gate} is {}, expected {kind}", g.kind.name()));
    }
    let got: BTreeSet<&str> = g.children.iter().map(Identifier::as_str).collect();
    let want: BTreeSet<&str> = children.iter().map(String::as_str).collect();
    if got != want || g.children.len() != children.len() {
        return Err(format!("{gate} children {got:?}, expected {want:?}"));
    }
    Ok(())
}

fn gate_of(flat: &FlatModel, gate: &str, kind: &str, children: &[&str]) -> Outcome {
    let owned: Vec<String> = children.iter().map(|s| s.to_string()).collect();
    gate_is(flat, gate, kind, &owned)
}

fn targets(flat: &FlatModel, decision: &str) -> BTreeSet<String> {
    flat.influences().filter(|e| e.decision.as_str() == decision).map(|e| e.target.to_string()).collect()
}

fn targets_are(flat: &FlatModel, decision: &str, want: &BTreeSet<String>) -> Outcome {
    let got = targets(flat, decision);
    if &got != want {
        return Err(format!("{decision} influences {got:?}, expected {want:?}"));
    }
    Ok(())
}

fn leaves_under(flat: &FlatModel, root: &str) -> BTreeSet<String> {
    let root = id(root);
    reachable_from(flat.parts(), &root)
        .into_iter()
        .filter(|n| flat.events().contains_key(*n))
        .map(|n| n.to_string())
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn all(checks: impl IntoIterator<Item = Outcome>) -> Outcome {
    checks.into_iter().collect()
}

fn decisions(flat: &FlatModel) -> Outcome {
    let got: BTreeSet<String> = flat.decisions().keys().map(|d| d.to_string()).collect();
    if got != set(&DECISIONS) {
        return Err(format!("decisions {got:?}"));
    }
    Ok(())
}

fn top_structure(flat: &FlatModel) -> Outcome {
    if flat.top().as_str() != "asi_catastrophe" {
        return Err(format!("top is {}", flat.top()));
    }
    all([
        gate_of(flat, "asi_catastrophe", "AND", &["asi_dsa", "asi_unsafe"]),
        gate_of(flat, "asi_dsa", "AND", &["takeoff_possible", "seed_ai_created", "containment_fails"]),
        gate_of(flat, "asi_unsafe", "AND", &[HUMAN_ATTEMPTS, "ai_own_goals_unsafe", "not_deterred"]),
    ])
}

fn seed_subtree(flat: &FlatModel) -> Outcome {
    all([
        gate_of(flat, "seed_ai_created", "OR", &["novel_design", "whole_brain_emulation", "other_seed_ai"]),
        gate_of(flat, "novel_design", "OR", &["agi", "self_improvement_specialist", "neuromorphic", "other_novel_design"]),
        gate_of(flat, "agi", "OR", &["networked_ai", "other_agi"]),
        gate_of(flat, "whole_brain_emulation", "AND", &["brain_scanning", "brain_translation", "brain_simulation"]),
    ])?;
    let leaves = leaves_under(flat, "seed_ai_created");
    if leaves != set(&SEED_LEAVES) {
        return Err(format!("seed leaves {leaves:?}"));
    }
    let mut want = leaves;
    want.insert("no_si_containment".into());
    targets_are(flat, "review_boards", &want)
}

fn containment_subtree(flat: &FlatModel) -> Outcome {
    all([
        gate_of(flat, "containment_fails", "AND", &["takeoff_limits_fail", "si_containment_fails"]),
        gate_of(flat, "takeoff_limits_fail", "OR", &["hard_takeoff_limits_fail", "soft_takeoff_limits_fail"]),
        gate_of(flat, "hard_takeoff_limits_fail", "OR", &["hard_hardware_quantity", "hard_hardware_quality", "hard_software_quality"]),
        gate_of(flat, "soft_takeoff_limits_fail", "OR", &SOFT_LEAVES),
        gate_of(flat, "si_containment_fails", "OR", &["no_si_containment", "ai_escapes_containment"]),
        targets_are(flat, "enhance_humans", &set(&SOFT_LEAVES)),
        targets_are(flat, "ai_confinement", &set(&["ai_escapes_containment"])),
        targets_are(flat, "ai_enforcement", &set(&["ai_escapes_containment"])),
    ])
}

fn lines_subtree(flat: &FlatModel) -> Outcome {
    let outs: Vec<String> = ATTEMPT_LINES.iter().map(|a| format!("{a}.out")).collect();
    gate_is(flat, HUMAN_ATTEMPTS, "AND", &outs)?;
    for a in ATTEMPT_LINES {
        let modes: Vec<String> = FAILURE_MODES.iter().map(|m| format!("{a}.{m}.out")).collect();
        gate_is(flat, &format!("{a}.out"), "OR", &modes)?;
        for m in FAILURE_MODES {
            gate_is(flat, &format!("{a}.{m}.out"), "OR", &[format!("{a}.{m}.before"), format!("{a}.{m}.during")])?;
        }
    }
    let leaves = leaves_under(flat, HUMAN_ATTEMPTS);
    if leaves.len() != 30 {
        return Err(format!("{} leaves under {HUMAN_ATTEMPTS}, expected 30", leaves.len()));
    }
    targets_are(flat, "encourage_safety", &leaves)
}

fn measures_subtree(flat: &FlatModel) -> Outcome {
    let andor = flat.uncertain_gates().count();
    if andor != 2 {
        return Err(format!("{andor} ANDOR gates, expected 2"));
    }
    gate_of(flat, HUMAN_ATTEMPTS, "ANDOR", &["seed_ai_measures_fail", "during_takeoff_measures_fail"])?;
    gate_of(flat, "seed_ai_measures_fail", "ANDOR", &SEED_MEASURES)?;
    let mut want = set(&SEED_MEASURES);
    want.insert("during_takeoff_measures_fail".into());
    if leaves_under(flat, HUMAN_ATTEMPTS) != want {
        return Err(format!("leaves under {HUMAN_ATTEMPTS} differ from {want:?}"));
    }
    targets_are(flat, "encourage_safety", &want)
}

fn marked(notes: &[String], mark: &str) -> bool {
    notes.iter().any(|n| n.starts_with(mark))
}

fn provenance(flat: &FlatModel) -> Outcome {
    let missing = flat
        .events()
        .values()
        .filter(|e| !marked(&e.notes, PROVENANCE_MARK))
        .map(|e| e.id.to_string())
        .chain(flat.gates().values().filter(|g| !marked(&g.notes, PROVENANCE_MARK)).map(|g| g.id.to_string()))
        .chain(flat.decisions().values().filter(|d| !marked(&d.notes, PROVENANCE_MARK)).map(|d| d.id.to_string()))
        .chain(
            flat.influences()
                .filter(|e| !marked(&e.notes, PROVENANCE_MARK))
                .map(|e| format!("{} -> {}", e.decision, e.target)),
        )
        .next();
    match missing {
        Some(m) => Err(format!("{m} has no provenance note")),
        None => Ok(()),
    }
}

fn placeholders(flat: &FlatModel) -> Outcome {
    let missing = flat
        .events()
        .values()
        .filter(|e| !marked(&e.notes, PLACEHOLDER_MARK))
        .map(|e| e.id.to_string())
        .chain(flat.uncertain_gates().filter(|g| !marked(&g.notes, PLACEHOLDER_MARK)).map(|g| g.id.to_string()))
        .chain(
            flat.influences()
                .filter(|e| !marked(&e.notes, PLACEHOLDER_MARK))
                .map(|e| format!("{} -> {}", e.decision, e.target)),
        )
        .next();
    match missing {
        Some(m) => Err(format!("{m} is not marked as a placeholder")),
        None => Ok(()),
    }
}

/// Assert the pathway structure of `flat` for the given variant.
pub fn structural_check(flat: &FlatModel, variant: Variant) -> FidelityReport {
    let subtree: (&'static str, fn(&FlatModel) -> Outcome) = match variant {
        Variant::Lines => ("lines_subtree", lines_subtree),
        Variant::Measures => ("measures_subtree", measures_subtree),
    };
    let checks: [(&'static str, fn(&FlatModel) -> Outcome); 7] = [
        ("decisions", decisions),
        ("top_structure", top_structure),
        ("seed_subtree", seed_subtree),
        ("containment_subtree", containment_subtree),
        subtree,
        ("provenance", provenance),
        ("placeholders", placeholders),
    ];
    FidelityReport {
        model: flat.name().to_string(),
        checks: checks
            .into_iter()
            .map(|(name, f)| {
                let r = f(flat);
                Check { name, passed: r.is_ok(), detail: r.err().unwrap_or_default() }
            })
            .collect(),
    }
}

/// Nodes and edges outside the `human_attempts_fail` subtree that differ
/// between two models. Decisions are compared too.
pub fn variant_diff(a: &FlatModel, b: &FlatModel) -> Vec<String> {
    let inside = |f: &FlatModel| -> BTreeSet<String> {
        let root = id(HUMAN_ATTEMPTS);
        if f.node(&root).is_none() {
            return BTreeSet::new();
        }
        reachable_from(f.parts(), &root).into_iter().map(|n| n.to_string()).collect()
    };
    let (ia, ib) = (inside(a), inside(b));
    let outside = |f: &FlatModel, inner: &BTreeSet<String>| -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for e in f.events().values().filter(|e| !inner.contains(e.id.as_str())) {
            m.insert(e.id.to_string(), format!("{e:?}"));
        }
        for g in f.gates().values().filter(|g| !inner.contains(g.id.as_str())) {
            m.insert(g.id.to_string(), format!("{g:?}"));
        }
        for d in f.decisions().values() {
            m.insert(d.id.to_string(), format!("{d:?}"));
        }
        for e in f.influences().filter(|e| !inner.contains(e.target.as_str())) {
            m.insert(format!("{} -> {}", e.decision, e.target), format!("{e:?}"));
        }
        m
    };
    let (oa, ob) = (outside(a, &ia), outside(b, &ib));
    let keys: BTreeSet<&String> = oa.keys().chain(ob.keys()).collect();
    keys.into_iter().filter(|k| oa.get(*k) != ob.get(*k)).cloned().collect()
}
