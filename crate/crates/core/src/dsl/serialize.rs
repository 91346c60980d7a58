//! Canonical text form: items grouped by kind, sorted by identifier,
//! two-space indentation inside modules, notes as `#` lines above their item.

use std::fmt::Write;

use crate::model::{
    BasicEvent, Decision, Gate, GateKind, InfluenceEdge, ModelDoc, ModuleDef, ModuleInstance,
    ProbabilitySpec,
};
use crate::validate::{Validate, ValidationReport};

/// Serialize a document that validates without errors.
pub fn serialize(doc: &ModelDoc) -> Result<String, ValidationReport> {
    let report = doc.validate();
    if report.has_errors() {
        return Err(report);
    }
    Ok(serialize_unchecked(doc))
}

/// Canonical text without validating first.
pub fn serialize_unchecked(doc: &ModelDoc) -> String {
    let mut out = String::new();
    notes(&mut out, "", &doc.notes);
    let _ = writeln!(out, "model {}", quote(&doc.name));

    let group = |out: &mut String, lines: Vec<String>| {
        if !lines.is_empty() {
            out.push('\n');
            for l in lines {
                out.push_str(&l);
            }
        }
    };

    group(&mut out, doc.decisions.values().map(|d| with_notes("", &d.notes, decision(d))).collect());
    for m in doc.modules.values() {
        group(&mut out, vec![module(m)]);
    }
    group(&mut out, doc.instances.values().map(|i| with_notes("", &i.notes, instance(i))).collect());
    group(&mut out, doc.events.values().map(|e| with_notes("", &e.notes, event(e))).collect());
    group(&mut out, doc.gates.values().map(|g| with_notes("", &g.notes, gate(g))).collect());
    group(&mut out, doc.influences.values().map(|e| with_notes("", &e.notes, influence(e))).collect());
    if let Some(top) = &doc.top {
        group(&mut out, vec![format!("top = {top}\n")]);
    }
    out
}

fn module(m: &ModuleDef) -> String {
    let mut body = String::new();
    notes(&mut body, "", &m.notes);
    let _ = writeln!(body, "module {} {{", m.id);
    let ind = "  ";
    for i in m.instances.values() {
        body.push_str(&with_notes(ind, &i.notes, instance(i)));
    }
    for e in m.events.values() {
        body.push_str(&with_notes(ind, &e.notes, event(e)));
    }
    for g in m.gates.values() {
        body.push_str(&with_notes(ind, &g.notes, gate(g)));
    }
    for e in m.influences.values() {
        body.push_str(&with_notes(ind, &e.notes, influence(e)));
    }
    let _ = writeln!(body, "{ind}output = {}", m.output);
    body.push_str("}\n");
    body
}

fn with_notes(indent: &str, lines: &[String], item: String) -> String {
    let mut s = String::new();
    notes(&mut s, indent, lines);
    s.push_str(indent);
    s.push_str(&item);
    s.push('\n');
    s
}

fn notes(out: &mut String, indent: &str, lines: &[String]) {
    for n in lines {
        if n.is_empty() {
            let _ = writeln!(out, "{indent}#");
        } else {
            let _ = writeln!(out, "{indent}# {n}");
        }
    }
}

fn label(l: &Option<String>) -> String {
    l.as_ref().map(|l| format!(" label {}", quote(l))).unwrap_or_default()
}

fn decision(d: &Decision) -> String {
    let cost = d.cost.map(|c| format!(" cost = {c}")).unwrap_or_default();
    format!("decision {}{}{}", d.id, label(&d.label), cost)
}

fn instance(i: &ModuleInstance) -> String {
    format!("instance {} = {}", i.id, i.def)
}

fn event(e: &BasicEvent) -> String {
    let p = match e.prob {
        ProbabilitySpec::Point { p } => format!("p = {p}"),
        ProbabilitySpec::Beta { alpha, beta } => format!("p ~ beta({alpha}, {beta})"),
        ProbabilitySpec::Uniform { lo, hi } => format!("p ~ uniform({lo}, {hi})"),
    };
    format!("event {}{} {{ {p} }}", e.id, label(&e.label))
}

fn gate(g: &Gate) -> String {
    let children = g.children.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ");
    let body = match g.kind {
        GateKind::AndOr { w } => format!("ANDOR(w = {w}; {children})"),
        k => format!("{}({children})", k.name()),
    };
    format!("gate {}{} = {body}", g.id, label(&g.label))
}

fn influence(e: &InfluenceEdge) -> String {
    format!("influence {} -> {} {{ factor = {} }}", e.decision, e.target, e.factor)
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            '\r' => q.push_str("\\r"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}
