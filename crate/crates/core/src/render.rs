//! Graphviz DOT output.
//!
//! Fault-tree edges are drawn without arrowheads, influence edges with
//! arrowheads and `constraint=false` so they do not disturb the tree
//! ranking. Decisions are black boxes with white text; events and gates
//! are rounded boxes. Nodes and edges appear in identifier order.

use std::fmt::Write;

use crate::flat::FlatModel;
use crate::model::Identifier;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn label(id: &Identifier, label: Option<&str>) -> String {
    label.unwrap_or(id.as_str()).to_string()
}

pub fn render_dot(flat: &FlatModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(flat.name()));
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [fontname=\"Helvetica\", fontsize=10];\n");

    for d in flat.decisions().values() {
        let _ = writeln!(
            out,
            "  {} [shape=box, style=filled, fillcolor=black, fontcolor=white, label={}];",
            quote(d.id.as_str()),
            quote(&label(&d.id, d.label.as_deref()))
        );
    }
    for e in flat.events().values() {
        let _ = writeln!(
            out,
            "  {} [shape=box, style=rounded, label={}];",
            quote(e.id.as_str()),
            quote(&label(&e.id, e.label.as_deref()))
        );
    }
    for g in flat.gates().values() {
        let text = format!("{}\n{}", label(&g.id, g.label.as_deref()), g.kind.name());
        let _ = writeln!(out, "  {} [shape=box, style=rounded, label={}];", quote(g.id.as_str()), quote(&text));
    }

    for g in flat.gates().values() {
        for c in &g.children {
            let _ = writeln!(out, "  {} -> {} [dir=none];", quote(g.id.as_str()), quote(c.as_str()));
        }
    }
    for e in flat.influences() {
        let _ = writeln!(
            out,
            "  {} -> {} [constraint=false, style=dashed];",
            quote(e.decision.as_str()),
            quote(e.target.as_str())
        );
    }
    out.push_str("}\n");
    out
}
