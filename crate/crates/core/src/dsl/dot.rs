use std::fmt::Write;

use crate::graph::TransitionGraph;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. The initial state is drawn as a box, accepting
/// states with a double border; edges are labelled `id: trigger [guard]`.
pub fn emit_dot(g: &TransitionGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&g.name)).unwrap();
    writeln!(out, "    rankdir=LR;").unwrap();
    for (i, node) in g.nodes.iter().enumerate() {
        let shape = if i == g.initial { "box" } else { "ellipse" };
        let peripheries = if g.is_accepting(i) { 2 } else { 1 };
        writeln!(
            out,
            "    {} [shape={shape}, peripheries={peripheries}];",
            quote(node)
        )
        .unwrap();
    }
    for e in &g.edges {
        let mut label = format!("{}:", e.id);
        if let Some(t) = &e.trigger {
            write!(label, " {t}").unwrap();
        }
        if let Some(guard) = &e.guard {
            write!(label, " [{guard}]").unwrap();
        }
        writeln!(
            out,
            "    {} -> {} [label={}];",
            quote(&g.nodes[e.source]),
            quote(&g.nodes[e.target]),
            quote(&label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::graph::build_graph;

    #[test]
    fn rtvm_dot() {
        let sc = parse_model(include_str!("../../../../fixtures/rtvm.scm")).unwrap();
        let g = build_graph(&sc).unwrap();
        let dot = emit_dot(&g);
        assert_eq!(dot.lines().filter(|l| l.contains("[shape=")).count(), 6);
        assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 8);
        assert!(dot.contains("\"IN\" [shape=box, peripheries=1];"));
        assert!(dot.contains("\"IDL\" [shape=ellipse, peripheries=2];"));
        assert!(dot.contains("\"TS\" -> \"CM\" [label=\"c: [change < 0]\"];"));
        assert!(dot.contains("[label=\"a: powerOn\"]"));
        assert_eq!(dot, emit_dot(&g));
    }

    #[test]
    fn single_node_dot() {
        let sc = parse_model("statechart X\nstate A kind = initial\n").unwrap();
        let dot = emit_dot(&build_graph(&sc).unwrap());
        assert_eq!(
            dot,
            "digraph \"X\" {\n    rankdir=LR;\n    \"A\" [shape=box, peripheries=1];\n}\n"
        );
    }
}
