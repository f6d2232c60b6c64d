use std::fmt::Write;

use crate::model::{StateKind, Statechart};

/// Canonical DSL text for a chart; [`super::parse_model`] reads it back
/// to an equal model.
pub fn render_model(sc: &Statechart) -> String {
    let mut out = String::new();
    writeln!(out, "statechart {}", sc.name).unwrap();
    for v in &sc.vars {
        writeln!(out, "var {} : {} = {}", v.name, v.ty, v.initial).unwrap();
    }
    for e in &sc.events {
        write!(out, "event {}", e.name).unwrap();
        if !e.params.is_empty() {
            let params: Vec<String> = e
                .params
                .iter()
                .map(|p| format!("{}: {}", p.name, p.ty))
                .collect();
            write!(out, "({})", params.join(", ")).unwrap();
        }
        out.push('\n');
    }
    for s in &sc.states {
        write!(out, "state {}", s.id).unwrap();
        match s.kind {
            StateKind::Initial => out.push_str(" kind = initial"),
            StateKind::Composite => out.push_str(" kind = composite"),
            StateKind::Simple => {}
        }
        if let Some(p) = &s.parent {
            write!(out, " parent = {p}").unwrap();
        }
        if let Some(c) = &s.initial_child {
            write!(out, " initialchild = {c}").unwrap();
        }
        out.push('\n');
    }
    let accepting: Vec<&str> = sc
        .states
        .iter()
        .filter(|s| s.accepting)
        .map(|s| s.id.as_str())
        .collect();
    if !accepting.is_empty() {
        writeln!(out, "accepting {}", accepting.join(", ")).unwrap();
    }
    for t in &sc.transitions {
        write!(out, "transition {} : {} -> {}", t.id, t.source, t.target).unwrap();
        if let Some(ev) = &t.trigger {
            write!(out, " on {ev}").unwrap();
        }
        if let Some(g) = &t.guard {
            write!(out, " when {g}").unwrap();
        }
        if !t.actions.is_empty() {
            let actions: Vec<String> = t.actions.iter().map(|a| a.to_string()).collect();
            write!(out, " do {}", actions.join("; ")).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    #[test]
    fn rtvm_round_trip() {
        let sc = parse_model(include_str!("../../../../fixtures/rtvm.scm")).unwrap();
        let text = render_model(&sc);
        assert!(text.contains("transition b : IDL -> TS on selectTicket do total := fare * n; change := amount - total\n"));
        assert_eq!(parse_model(&text).unwrap(), sc);
    }
}
