//! Module expansion: every instance becomes a namespaced copy of its
//! definition, with the definition's output node renamed `<instance>.out`.
//!
//! Influence edges declared inside a module are copied once per instance, so
//! each expanded leaf gets its own edge.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::flat::{FlatModel, FlatParts};
use crate::model::{Identifier, ModelDoc, ModuleDef, ModuleInstance};
use crate::validate::{error, Code, Diagnostic, Severity, ValidationReport};

/// Segment used for an instance's exposed output node.
pub const OUTPUT_SEGMENT: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionStats {
    pub node_count: usize,
    pub leaf_count: usize,
    pub gate_count: usize,
    pub influence_edge_count: usize,
}

pub fn stats(flat: &FlatModel) -> ExpansionStats {
    let leaf_count = flat.events().len();
    let gate_count = flat.gates().len();
    ExpansionStats {
        node_count: leaf_count + gate_count,
        leaf_count,
        gate_count,
        influence_edge_count: flat.influence_count(),
    }
}

/// Expand all module instances and validate the result.
pub fn expand(doc: &ModelDoc) -> Result<FlatModel, ValidationReport> {
    let (parts, report) = expand_parts(doc);
    let Some(parts) = parts else { return Err(report) };
    match FlatModel::from_parts(parts) {
        Ok(flat) if !report.has_errors() => Ok(flat),
        Ok(flat) => Err(report.merge(crate::validate::validate(&flat))),
        Err(flat_report) => Err(report.merge(flat_report)),
    }
}

/// Expansion without the final structural check. Returns `None` only when
/// module definitions instantiate each other cyclically.
pub(crate) fn expand_parts(doc: &ModelDoc) -> (Option<FlatParts>, ValidationReport) {
    let mut diags = Vec::new();

    if let Some(cycle) = find_module_cycle(&doc.modules) {
        diags.push(error(
            Code::ModuleCycle,
            Some(&cycle[0]),
            format!("module instantiation cycle: {}", join_ids(&cycle, " -> ")),
        ));
        return (None, ValidationReport::from_unsorted(diags));
    }

    for def in doc.modules.values() {
        check_def(def, &mut diags);
    }

    let mut parts = FlatParts {
        name: doc.name.clone(),
        events: doc.events.clone(),
        gates: doc.gates.clone(),
        decisions: doc.decisions.clone(),
        influences: doc.influences.clone(),
        top: doc.top.clone(),
    };

    let mut used = BTreeSet::new();
    for inst in doc.instances.values() {
        if doc.events.contains_key(&inst.id)
            || doc.gates.contains_key(&inst.id)
            || doc.decisions.contains_key(&inst.id)
        {
            diags.push(error(Code::DuplicateId, Some(&inst.id), "instance id also declared as a node"));
        }
        expand_instance(doc, inst, &inst.id, &mut parts, &mut used, &mut diags);
    }

    for id in doc.modules.keys() {
        if !used.contains(id) {
            diags.push(Diagnostic {
                severity: Severity::Warning,
                code: Code::OrphanModule,
                node_id: Some(id.clone()),
                message: "module is never instantiated".into(),
            });
        }
    }

    (Some(parts), ValidationReport::from_unsorted(diags))
}

fn check_def(def: &ModuleDef, diags: &mut Vec<Diagnostic>) {
    if !def.events.contains_key(&def.output) && !def.gates.contains_key(&def.output) {
        diags.push(error(
            Code::UnresolvedOutput,
            Some(&def.id),
            format!("output `{}` is not an event or gate declared in the module", def.output),
        ));
    }
    let out = Identifier::new(OUTPUT_SEGMENT).expect("valid");
    if def.output != out && (def.events.contains_key(&out) || def.gates.contains_key(&out)) {
        diags.push(error(
            Code::DuplicateId,
            Some(&def.id),
            format!("`{OUTPUT_SEGMENT}` is reserved for the module output"),
        ));
    }
    for inst in def.instances.keys() {
        if def.events.contains_key(inst) || def.gates.contains_key(inst) {
            diags.push(error(Code::DuplicateId, Some(&def.id), format!("instance `{inst}` also declared as a node")));
        }
    }
}

fn expand_instance(
    doc: &ModelDoc,
    inst: &ModuleInstance,
    ns: &Identifier,
    parts: &mut FlatParts,
    used: &mut BTreeSet<Identifier>,
    diags: &mut Vec<Diagnostic>,
) {
    let Some(def) = doc.modules.get(&inst.def) else {
        diags.push(error(Code::UnknownModule, Some(ns), format!("instance of undeclared module `{}`", inst.def)));
        return;
    };
    used.insert(def.id.clone());

    let map = |local: &Identifier| -> Identifier {
        if *local == def.output {
            ns.child(OUTPUT_SEGMENT)
        } else {
            Identifier::join(ns, local)
        }
    };

    for ev in def.events.values() {
        let mut ev = ev.clone();
        ev.id = map(&ev.id);
        insert_unique(&mut parts.events, ev.id.clone(), ev, diags);
    }
    for gate in def.gates.values() {
        let mut gate = gate.clone();
        gate.id = map(&gate.id);
        gate.children = gate.children.iter().map(map).collect();
        insert_unique(&mut parts.gates, gate.id.clone(), gate, diags);
    }
    for edge in def.influences.values() {
        let mut edge = edge.clone();
        edge.target = map(&edge.target);
        let key = (edge.decision.clone(), edge.target.clone());
        insert_unique(&mut parts.influences, key, edge, diags);
    }
    for nested in def.instances.values() {
        let nested_ns = Identifier::join(ns, &nested.id);
        expand_instance(doc, nested, &nested_ns, parts, used, diags);
    }
}

fn insert_unique<K: Ord + Clone + std::fmt::Debug, V>(
    map: &mut BTreeMap<K, V>,
    key: K,
    value: V,
    diags: &mut Vec<Diagnostic>,
) {
    if map.contains_key(&key) {
        diags.push(error(Code::DuplicateId, None, format!("expansion produces {key:?} twice")));
    } else {
        map.insert(key, value);
    }
}

fn find_module_cycle(modules: &BTreeMap<Identifier, ModuleDef>) -> Option<Vec<Identifier>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        id: &Identifier,
        modules: &BTreeMap<Identifier, ModuleDef>,
        marks: &mut BTreeMap<Identifier, Mark>,
        path: &mut Vec<Identifier>,
    ) -> Option<Vec<Identifier>> {
        match marks.get(id) {
            Some(Mark::Done) => return None,
            Some(Mark::Active) => {
                let start = path.iter().position(|p| p == id).expect("active module on path");
                let mut cycle = path[start..].to_vec();
                cycle.push(id.clone());
                return Some(cycle);
            }
            None => {}
        }
        let def = modules.get(id)?;
        marks.insert(id.clone(), Mark::Active);
        path.push(id.clone());
        for inst in def.instances.values() {
            if let Some(c) = visit(&inst.def, modules, marks, path) {
                return Some(c);
            }
        }
        path.pop();
        marks.insert(id.clone(), Mark::Done);
        None
    }

    let mut marks = BTreeMap::new();
    for id in modules.keys() {
        if let Some(c) = visit(id, modules, &mut marks, &mut Vec::new()) {
            return Some(c);
        }
    }
    None
}

fn join_ids(ids: &[Identifier], sep: &str) -> String {
    ids.iter().map(Identifier::as_str).collect::<Vec<_>>().join(sep)
}
