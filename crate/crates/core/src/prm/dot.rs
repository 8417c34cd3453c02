use std::fmt::Write as _;

use super::{Prm, FAILURE_STATE};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering with one edge per `(y, ℓ, y')` and reward, labelled
/// `⟨ℓ, r⟩ : p`.
pub fn to_dot(prm: &Prm) -> String {
    let ap = prm.ap();
    let mut out = String::from("digraph prm {\n  rankdir=LR;\n  node [shape=circle];\n");
    out.push_str("  __start [shape=point];\n");
    for name in prm.state_names() {
        if name == FAILURE_STATE {
            let _ = writeln!(out, "  {} [style=dashed];", quote(name));
        } else {
            let _ = writeln!(out, "  {};", quote(name));
        }
    }
    let _ = writeln!(out, "  __start -> {};", quote(prm.state_name(prm.init())));
    for (y, l, edges) in prm.defined_transitions() {
        for e in edges {
            let label = format!("⟨{}, {}⟩ : {}", ap.display_label(l), e.reward, e.prob);
            let _ = writeln!(
                out,
                "  {} -> {} [label={}];",
                quote(prm.state_name(y)),
                quote(prm.state_name(e.target)),
                quote(&label)
            );
        }
    }
    out.push_str("}\n");
    out
}
