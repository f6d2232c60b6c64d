use thiserror::Error;

use crate::graph::{GraphError, TransitionGraph};
use crate::testgen::TestCase;

/// Text form of a test case: states and parenthesized edge ids joined by
/// `-`, e.g. `IN-(a)-IDL-(b)-TS`.
pub fn format_testcase(tc: &TestCase) -> String {
    let mut out = tc
        .states
        .first()
        .cloned()
        .unwrap_or_else(|| tc.initial_state.clone());
    for (edge, state) in tc.edges.iter().zip(tc.states.iter().skip(1)) {
        out.push_str("-(");
        out.push_str(edge);
        out.push_str(")-");
        out.push_str(state);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TextFormError {
    #[error("malformed test sequence `{0}`")]
    Malformed(String),
    #[error("test sequence `{text}` disagrees with the model: {source}")]
    Graph {
        text: String,
        #[source]
        source: GraphError,
    },
    #[error("test sequence `{text}` claims state {claimed} but edge {edge} leads to {actual}")]
    StateMismatch {
        text: String,
        edge: String,
        claimed: String,
        actual: String,
    },
}

/// Parses a text form back into a case, re-deriving states from `g`.
pub fn parse_testcase_text(text: &str, g: &TransitionGraph) -> Result<TestCase, TextFormError> {
    let text = text.trim();
    let parts: Vec<&str> = text.split('-').collect();
    if parts.len().is_multiple_of(2) || parts.iter().any(|p| p.is_empty()) {
        return Err(TextFormError::Malformed(text.to_string()));
    }
    let mut edges = Vec::new();
    for p in parts.iter().skip(1).step_by(2) {
        let id = p
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .filter(|s| !s.is_empty())
            .ok_or_else(|| TextFormError::Malformed(text.to_string()))?;
        edges.push(id.to_string());
    }
    let graph_err = |source| TextFormError::Graph {
        text: text.to_string(),
        source,
    };
    let tc = TestCase::rebuild(g, "", &edges, parts[0]).map_err(graph_err)?;
    if tc.initial_state != parts[0] {
        return Err(graph_err(GraphError::NotAWalk {
            edge: edges[0].clone(),
            state: parts[0].to_string(),
        }));
    }
    for (i, claimed) in parts.iter().step_by(2).enumerate().skip(1) {
        if tc.states[i] != *claimed {
            return Err(TextFormError::StateMismatch {
                text: text.to_string(),
                edge: edges[i - 1].clone(),
                claimed: claimed.to_string(),
                actual: tc.states[i].clone(),
            });
        }
    }
    Ok(tc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> TransitionGraph {
        TransitionGraph::from_edges(
            "g",
            &["IN", "IDL", "TS"],
            &[("a", "IN", "IDL"), ("b", "IDL", "TS")],
            "IN",
            &["IDL"],
        )
        .unwrap()
    }

    #[test]
    fn formats_and_parses() {
        let g = g();
        let tc = TestCase::from_walk(&g, "tc9", 0, &[0, 1]).unwrap();
        assert_eq!(format_testcase(&tc), "IN-(a)-IDL-(b)-TS");
        let back = parse_testcase_text("IN-(a)-IDL-(b)-TS", &g).unwrap();
        assert_eq!(back.edges, tc.edges);
        assert_eq!(back.states, tc.states);
        let empty = TestCase::from_walk(&g, "z", 2, &[]).unwrap();
        assert_eq!(format_testcase(&empty), "TS");
    }

    #[test]
    fn rejects_bad_text() {
        let g = g();
        assert!(matches!(
            parse_testcase_text("IN-(a)", &g),
            Err(TextFormError::Malformed(_))
        ));
        assert!(matches!(
            parse_testcase_text("IN-a-IDL", &g),
            Err(TextFormError::Malformed(_))
        ));
        assert!(matches!(
            parse_testcase_text("IN-(a)-TS", &g),
            Err(TextFormError::StateMismatch { .. })
        ));
        assert!(matches!(
            parse_testcase_text("IDL-(a)-IDL", &g),
            Err(TextFormError::Graph { .. })
        ));
        assert!(matches!(
            parse_testcase_text("IN-(z)-IDL", &g),
            Err(TextFormError::Graph { .. })
        ));
    }
}
