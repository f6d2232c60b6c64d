//! Suite reduction by subsumption (node-coverage sets) and by greedy
//! coverage-preserving set cover.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::coverage::{case_walk, contains_window, CoverageError, Criterion, Universe};
use crate::graph::TransitionGraph;
use crate::testgen::{TestCase, TestSuite};

/// `small` is covered by `big` when its edge sequence occurs as a
/// contiguous run inside `big`'s and the two differ. A case without edges
/// is covered only by cases passing through its state.
pub fn covers(small: &TestCase, big: &TestCase) -> bool {
    if small.edges.is_empty() {
        return !big.edges.is_empty() && big.states.contains(&small.initial_state);
    }
    small.edges != big.edges && contains_window(&big.edges, &small.edges)
}

/// For every case, the ids of the cases that cover it, in suite order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NcMap {
    entries: Vec<(String, Vec<String>)>,
}

impl NcMap {
    pub fn get(&self, id: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(k, _)| k == id)
            .map(|(_, v)| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One `NC(id) = {...}` line per case.
impl fmt::Display for NcMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, by) in &self.entries {
            writeln!(f, "NC({id}) = {{{}}}", by.join(", "))?;
        }
        Ok(())
    }
}

pub fn compute_nc(suite: &TestSuite) -> NcMap {
    let cases = suite.cases();
    NcMap {
        entries: cases
            .iter()
            .map(|tc| {
                let by = cases
                    .iter()
                    .filter(|other| covers(tc, other))
                    .map(|other| other.id.clone())
                    .collect();
                (tc.id.clone(), by)
            })
            .collect(),
    }
}

/// Cases that no other case covers, in suite order.
pub fn effective_set(suite: &TestSuite) -> TestSuite {
    let nc = compute_nc(suite);
    let keep: Vec<TestCase> = suite
        .cases()
        .iter()
        .zip(nc.iter())
        .filter(|(_, (_, by))| by.is_empty())
        .map(|(tc, _)| tc.clone())
        .collect();
    TestSuite::new(keep).expect("subset of a valid suite")
}

/// Greedy set cover over the items of `criteria`: repeatedly takes the case
/// adding the most uncovered items (lowest index on ties) until the
/// coverage of the whole suite is reached. Output is in selection order.
pub fn setcover_reduce(
    suite: &TestSuite,
    g: &TransitionGraph,
    criteria: &[Criterion],
) -> Result<TestSuite, CoverageError> {
    let universe = Universe::new(g);
    let mut items: Vec<BTreeSet<(Criterion, String)>> = Vec::with_capacity(suite.len());
    for tc in suite.cases() {
        let (start, edges) = case_walk(g, tc)?;
        let touched = universe.touched(g, start, &edges);
        let mut set = BTreeSet::new();
        for &c in criteria {
            if c == Criterion::Condition {
                continue;
            }
            set.extend(touched.get(c).iter().map(|id| (c, id.clone())));
        }
        items.push(set);
    }
    let mut uncovered: BTreeSet<(Criterion, String)> = items.iter().flatten().cloned().collect();
    let mut chosen = Vec::new();
    let mut taken = vec![false; items.len()];
    while !uncovered.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for (i, set) in items.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let gain = set.intersection(&uncovered).count();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        taken[i] = true;
        for item in &items[i] {
            uncovered.remove(item);
        }
        chosen.push(suite.cases()[i].clone());
    }
    Ok(TestSuite::new(chosen).expect("subset of a valid suite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::measure_suite;
    use crate::dsl::parse_model;
    use crate::graph::build_graph;
    use crate::testgen::prefix_suite;

    fn rtvm() -> (TransitionGraph, TestSuite) {
        let sc = parse_model(include_str!("../../../fixtures/rtvm.scm")).unwrap();
        let g = build_graph(&sc).unwrap();
        let suite = prefix_suite(&g);
        (g, suite)
    }

    fn ids(s: &TestSuite) -> Vec<&str> {
        s.cases().iter().map(|c| c.id.as_str()).collect()
    }

    #[test]
    fn covers_examples() {
        let (_, s) = rtvm();
        let tc = |id: &str| s.get(id).unwrap();
        assert!(covers(tc("tc8"), tc("tc14")));
        assert!(!covers(tc("tc14"), tc("tc14")));
        assert!(!covers(tc("tc5"), tc("tc19")));
        assert!(covers(tc("tc5"), tc("tc15")));
    }

    #[test]
    fn rtvm_nc_entries() {
        let (_, s) = rtvm();
        let nc = compute_nc(&s);
        let range = |a: usize, b: usize| (a..=b).map(|i| format!("tc{i}")).collect::<Vec<_>>();
        assert_eq!(nc.get("tc3").unwrap(), range(10, 14));
        assert_eq!(nc.get("tc7").unwrap(), ["tc13", "tc14", "tc16", "tc17"]);
        assert!(nc.get("tc14").unwrap().is_empty());
        assert!(nc.to_string().starts_with("NC(tc1) = {tc9, tc10, tc11"));
    }

    #[test]
    fn rtvm_effective_set() {
        let (g, s) = rtvm();
        let e = effective_set(&s);
        assert_eq!(ids(&e), ["tc14", "tc17", "tc19"]);
        assert_eq!(
            measure_suite(&e, &g).unwrap(),
            measure_suite(&s, &g).unwrap()
        );
    }

    #[test]
    fn small_effective_sets() {
        let g = TransitionGraph::from_edges(
            "c",
            &["A", "B", "C"],
            &[("e1", "A", "B"), ("e2", "B", "C")],
            "A",
            &[],
        )
        .unwrap();
        let one = TestCase::from_walk(&g, "x", 0, &[0]).unwrap();
        let two = TestCase::from_walk(&g, "y", 0, &[0, 1]).unwrap();
        let other = TestCase::from_walk(&g, "z", 1, &[1]).unwrap();
        let s = TestSuite::new(vec![one.clone(), two.clone()]).unwrap();
        let nc = compute_nc(&s);
        assert_eq!(nc.get("x").unwrap(), ["y"]);
        assert!(nc.get("y").unwrap().is_empty());
        assert_eq!(ids(&effective_set(&s)), ["y"]);
        let s = TestSuite::new(vec![one, other]).unwrap();
        assert_eq!(ids(&effective_set(&s)), ["x", "z"]);
        let single = TestSuite::new(vec![two]).unwrap();
        assert!(compute_nc(&single).get("y").unwrap().is_empty());
    }

    #[test]
    fn setcover_rtvm() {
        let (g, s) = rtvm();
        let t = setcover_reduce(&s, &g, &[Criterion::Transition]).unwrap();
        // tc14 covers a,b,c,d,e,g,h; the first case adding f is tc6.
        assert_eq!(ids(&t), ["tc14", "tc6"]);
        let st = setcover_reduce(&s, &g, &[Criterion::State]).unwrap();
        // tc13 already reaches EP, so it is the first case touching all six states.
        assert_eq!(ids(&st), ["tc13"]);
        let all = setcover_reduce(&s, &g, &Criterion::STRUCTURAL).unwrap();
        let full = measure_suite(&s, &g).unwrap();
        assert_eq!(measure_suite(&all, &g).unwrap(), full);
        assert!(
            setcover_reduce(&TestSuite::default(), &g, &[Criterion::State])
                .unwrap()
                .is_empty()
        );
    }
}
