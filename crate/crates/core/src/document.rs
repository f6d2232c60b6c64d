//! Suite documents: the on-disk shape of a generated suite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{format_testcase, parse_testcase_text, TextFormError};
use crate::graph::TransitionGraph;
use crate::testgen::{SuiteError, TestCase, TestSuite};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub text: String,
    pub edges: Vec<String>,
    pub states: Vec<String>,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteDocument {
    pub model: String,
    /// Generation method plus parameters, e.g. `ktrans k=2 embed`.
    pub method: String,
    pub cases: Vec<CaseRecord>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("line {line}: {source}")]
    Text {
        line: usize,
        #[source]
        source: TextFormError,
    },
    #[error("case {id}: text form `{text}` does not match its edge and state lists")]
    Inconsistent { id: String, text: String },
    #[error("document is for model `{found}`, not `{expected}`")]
    WrongModel { expected: String, found: String },
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

impl SuiteDocument {
    pub fn from_suite(model: &str, method: &str, suite: &TestSuite) -> SuiteDocument {
        SuiteDocument {
            model: model.to_string(),
            method: method.to_string(),
            cases: suite
                .cases()
                .iter()
                .map(|tc| CaseRecord {
                    id: tc.id.clone(),
                    text: format_testcase(tc),
                    edges: tc.edges.clone(),
                    states: tc.states.clone(),
                    complete: tc.complete,
                })
                .collect(),
        }
    }

    /// Rebuilds the suite from the text forms and checks every record
    /// against the graph.
    pub fn to_suite(&self, g: &TransitionGraph) -> Result<TestSuite, DocumentError> {
        if self.model != g.name {
            return Err(DocumentError::WrongModel {
                expected: g.name.clone(),
                found: self.model.clone(),
            });
        }
        let mut cases = Vec::with_capacity(self.cases.len());
        for (i, rec) in self.cases.iter().enumerate() {
            let mut tc =
                parse_testcase_text(&rec.text, g).map_err(|source| DocumentError::Text {
                    line: i + 1,
                    source,
                })?;
            tc.id = rec.id.clone();
            if tc.edges != rec.edges || tc.states != rec.states || tc.complete != rec.complete {
                return Err(DocumentError::Inconsistent {
                    id: rec.id.clone(),
                    text: rec.text.clone(),
                });
            }
            cases.push(tc);
        }
        Ok(TestSuite::new(cases)?)
    }
}

/// One `tcN = TEXT` line per case.
pub fn render_plain(suite: &TestSuite) -> String {
    suite
        .cases()
        .iter()
        .map(|tc| format!("{} = {}\n", tc.id, format_testcase(tc)))
        .collect()
}

/// Reads plain lines, either `id = TEXT` or a bare text form. Bare lines
/// are numbered `tc1, tc2, ...` by position. Blank lines and `#` comments
/// are skipped.
pub fn parse_plain(text: &str, g: &TransitionGraph) -> Result<TestSuite, DocumentError> {
    let mut cases: Vec<TestCase> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, form) = match line.split_once('=') {
            Some((id, form)) => (id.trim().to_string(), form.trim()),
            None => (format!("tc{}", cases.len() + 1), line),
        };
        let mut tc = parse_testcase_text(form, g).map_err(|source| DocumentError::Text {
            line: i + 1,
            source,
        })?;
        tc.id = id;
        cases.push(tc);
    }
    Ok(TestSuite::new(cases)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::graph::build_graph;
    use crate::testgen::prefix_suite;

    fn rtvm() -> TransitionGraph {
        build_graph(&parse_model(include_str!("../../../fixtures/rtvm.scm")).unwrap()).unwrap()
    }

    #[test]
    fn document_round_trip() {
        let g = rtvm();
        let suite = prefix_suite(&g);
        let doc = SuiteDocument::from_suite(&g.name, "prefix", &suite);
        assert_eq!(doc.cases[8].text, "IN-(a)-IDL-(b)-TS");
        assert_eq!(doc.to_suite(&g).unwrap(), suite);
    }

    #[test]
    fn plain_round_trip() {
        let g = rtvm();
        let suite = prefix_suite(&g);
        let text = render_plain(&suite);
        assert!(text.starts_with("tc1 = IN-(a)-IDL\n"));
        assert_eq!(parse_plain(&text, &g).unwrap(), suite);
        let bare = parse_plain("# two cases\nIN-(a)-IDL\n\nIDL-(b)-TS\n", &g).unwrap();
        assert_eq!(bare.cases()[1].id, "tc2");
        assert_eq!(bare.cases()[1].edges, ["b"]);
    }

    #[test]
    fn tampered_records_are_rejected() {
        let g = rtvm();
        let mut doc = SuiteDocument::from_suite(&g.name, "prefix", &prefix_suite(&g));
        doc.cases[0].states[1] = "TS".into();
        assert!(matches!(
            doc.to_suite(&g),
            Err(DocumentError::Inconsistent { .. })
        ));
        let mut doc = SuiteDocument::from_suite("other", "prefix", &prefix_suite(&g));
        assert!(matches!(
            doc.to_suite(&g),
            Err(DocumentError::WrongModel { .. })
        ));
        doc.model = g.name.clone();
        doc.cases[1].text = "IN-(b)-TS".into();
        assert!(matches!(
            doc.to_suite(&g),
            Err(DocumentError::Text { line: 2, .. })
        ));
        assert!(matches!(
            parse_plain("IN-(a)-IDL\nIN-(a)-IDL\n", &g),
            Err(DocumentError::Suite(SuiteError::DuplicateSequence(..)))
        ));
    }
}
