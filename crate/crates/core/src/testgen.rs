//! Test sequence generation over a transition graph.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, GraphError, TransitionGraph};
use crate::model::{flatten, Statechart};

/// A test case `[I, S, O]`: a start state, the edge sequence to drive,
/// and the state sequence expected in response.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub initial_state: String,
    pub edges: Vec<String>,
    pub states: Vec<String>,
    /// Starts at the initial state and ends at an accepting state.
    pub complete: bool,
}

impl TestCase {
    /// Builds a case from a walk given as edge indices. `start` is only
    /// consulted when `edges` is empty.
    pub fn from_walk(
        g: &TransitionGraph,
        id: impl Into<String>,
        start: usize,
        edges: &[usize],
    ) -> Result<TestCase, GraphError> {
        let mut node = edges.first().map(|&e| g.edges[e].source).unwrap_or(start);
        let first = node;
        let mut states = vec![g.nodes[node].clone()];
        for &e in edges {
            let edge = &g.edges[e];
            if edge.source != node {
                return Err(GraphError::NotAWalk {
                    edge: edge.id.clone(),
                    state: g.nodes[node].clone(),
                });
            }
            node = edge.target;
            states.push(g.nodes[node].clone());
        }
        Ok(TestCase {
            id: id.into(),
            initial_state: g.nodes[first].clone(),
            edges: edges.iter().map(|&e| g.edges[e].id.clone()).collect(),
            states,
            complete: first == g.initial && g.is_accepting(node),
        })
    }

    /// Re-derives the state sequence from the graph, checking the walk.
    pub fn rebuild(
        g: &TransitionGraph,
        id: impl Into<String>,
        edges: &[String],
        start: &str,
    ) -> Result<TestCase, GraphError> {
        let idx = g.resolve_edges(edges)?;
        let start = g
            .node_index(start)
            .ok_or_else(|| GraphError::UnknownState(start.to_string()))?;
        TestCase::from_walk(g, id, start, &idx)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn final_state(&self) -> &str {
        self.states
            .last()
            .map(String::as_str)
            .unwrap_or(&self.initial_state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("duplicate test case id `{0}`")]
    DuplicateId(String),
    #[error("test cases `{0}` and `{1}` have the same edge sequence")]
    DuplicateSequence(String, String),
}

/// Ordered, duplicate-free collection of test cases.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TestSuite {
    cases: Vec<TestCase>,
}

impl TestSuite {
    pub fn new(cases: Vec<TestCase>) -> Result<TestSuite, SuiteError> {
        let mut ids = HashSet::new();
        let mut seqs: Vec<(&[String], &str)> = Vec::new();
        for c in &cases {
            if !ids.insert(c.id.as_str()) {
                return Err(SuiteError::DuplicateId(c.id.clone()));
            }
            if let Some((_, other)) = seqs.iter().find(|(s, _)| *s == c.edges.as_slice()) {
                return Err(SuiteError::DuplicateSequence(
                    other.to_string(),
                    c.id.clone(),
                ));
            }
            seqs.push((&c.edges, &c.id));
        }
        Ok(TestSuite { cases })
    }

    /// Numbers cases `tc1, tc2, ...` in order, dropping repeated sequences.
    pub fn numbered(cases: impl IntoIterator<Item = TestCase>) -> TestSuite {
        let mut seen: HashSet<Vec<String>> = HashSet::new();
        let mut out = Vec::new();
        for mut c in cases {
            if seen.insert(c.edges.clone()) {
                c.id = format!("tc{}", out.len() + 1);
                out.push(c);
            }
        }
        TestSuite { cases: out }
    }

    pub fn cases(&self) -> &[TestCase] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TestCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn into_cases(self) -> Vec<TestCase> {
        self.cases
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TestGenError {
    #[error("sequence cannot be embedded: {0}")]
    NotEmbeddable(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Edge-simple paths from the initial state that no unused edge extends.
///
/// A path branches over every unused out-edge of a state only on its first
/// visit to that state; on a later visit it continues through the first
/// unused out-edge in declaration order. Paths come out in backtracking
/// order with out-edges explored in declaration order.
pub fn maximal_paths(g: &TransitionGraph) -> Vec<TestCase> {
    maximal_path_indices(g)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            TestCase::from_walk(g, format!("p{}", i + 1), g.initial, p).expect("dfs produces walks")
        })
        .collect()
}

pub(crate) fn maximal_path_indices(g: &TransitionGraph) -> Vec<Vec<usize>> {
    struct Search<'a> {
        g: &'a TransitionGraph,
        used: Vec<bool>,
        visits: Vec<u32>,
        path: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn visit(&mut self, node: usize) {
            self.visits[node] += 1;
            let open: Vec<usize> = self.g.out_edges(node).filter(|&e| !self.used[e]).collect();
            if open.is_empty() {
                if !self.path.is_empty() {
                    self.out.push(self.path.clone());
                }
            } else {
                let branch = if self.visits[node] == 1 {
                    &open[..]
                } else {
                    &open[..1]
                };
                for &e in branch {
                    self.used[e] = true;
                    self.path.push(e);
                    self.visit(self.g.edges[e].target);
                    self.path.pop();
                    self.used[e] = false;
                }
            }
            self.visits[node] -= 1;
        }
    }
    let mut s = Search {
        g,
        used: vec![false; g.edges.len()],
        visits: vec![0; g.nodes.len()],
        path: Vec::new(),
        out: Vec::new(),
    };
    s.visit(g.initial);
    s.out
}

/// Every transition as a one-step case, then for each maximal path its
/// prefixes of two or more edges, shortest first, skipping sequences
/// already emitted.
pub fn prefix_suite(g: &TransitionGraph) -> TestSuite {
    let mut cases = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        cases.push(TestCase::from_walk(g, "", e.source, &[i]).expect("single edge"));
    }
    for path in maximal_path_indices(g) {
        for len in 2..=path.len() {
            cases.push(
                TestCase::from_walk(g, "", g.initial, &path[..len]).expect("prefix of a walk"),
            );
        }
    }
    TestSuite::numbered(cases)
}

/// All walks of exactly `k` transitions, plus every complete sequence
/// shorter than `k` that is not contained in any walk of length `k`.
/// Sorted lexicographically by edge declaration order.
pub fn k_transition_suite(g: &TransitionGraph, k: usize) -> Vec<TestCase> {
    assert!(k >= 1, "k must be positive");
    let mut seqs: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(g: &TransitionGraph, k: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == k {
            out.push(stack.clone());
            return;
        }
        let node = g.edges[*stack.last().expect("non-empty")].target;
        for e in g.out_edges(node) {
            stack.push(e);
            extend(g, k, stack, out);
            stack.pop();
        }
    }
    for e in 0..g.edges.len() {
        stack.push(e);
        extend(g, k, &mut stack, &mut seqs);
        stack.pop();
    }

    // fwd[m][v]: some walk of length m leaves v; back[m][v]: some walk of
    // length m arrives at v.
    let n = g.nodes.len();
    let mut fwd = vec![vec![true; n]];
    let mut back = vec![vec![true; n]];
    for m in 1..=k {
        let mut f = vec![false; n];
        let mut b = vec![false; n];
        for e in &g.edges {
            if fwd[m - 1][e.target] {
                f[e.source] = true;
            }
            if back[m - 1][e.source] {
                b[e.target] = true;
            }
        }
        fwd.push(f);
        back.push(b);
    }
    let extendable = |start: usize, end: usize, len: usize| {
        let slack = k - len;
        (0..=slack).any(|j| back[j][start] && fwd[slack - j][end])
    };
    let mut short: Vec<Vec<usize>> = Vec::new();
    let mut frontier: Vec<Vec<usize>> = g.out_edges(g.initial).map(|e| vec![e]).collect();
    for len in 1..k {
        let mut next = Vec::new();
        for w in frontier {
            let end = g.edges[*w.last().expect("non-empty")].target;
            if g.is_accepting(end) && !extendable(g.initial, end, len) {
                short.push(w.clone());
            }
            for e in g.out_edges(end) {
                let mut x = w.clone();
                x.push(e);
                next.push(x);
            }
        }
        frontier = next;
    }
    seqs.extend(short);
    seqs.sort();
    seqs.into_iter()
        .enumerate()
        .map(|(i, s)| TestCase::from_walk(g, format!("tc{}", i + 1), g.initial, &s).expect("walk"))
        .collect()
}

/// Breadth-first shortest edge path from `from` to the first node
/// satisfying `goal`; out-edges are expanded in declaration order.
pub(crate) fn shortest_path(
    g: &TransitionGraph,
    from: usize,
    goal: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent: Vec<Option<usize>> = vec![None; g.nodes.len()];
    let mut seen = vec![false; g.nodes.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            let mut path = Vec::new();
            let mut cur = u;
            while let Some(e) = parent[cur] {
                path.push(e);
                cur = g.edges[e].source;
            }
            path.reverse();
            return Some(path);
        }
        for e in g.out_edges(u) {
            let v = g.edges[e].target;
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(e);
                queue.push_back(v);
            }
        }
    }
    None
}

/// Prepends the shortest start sequence from the initial state and appends
/// the shortest completion to an accepting state.
pub fn embed_complete(seq: &TestCase, g: &TransitionGraph) -> Result<TestCase, TestGenError> {
    let edges = g.resolve_edges(&seq.edges)?;
    if !g.is_walk(&edges) {
        return Err(TestGenError::NotEmbeddable(format!(
            "`{}` is not a legal sequence",
            seq.id
        )));
    }
    let start = match edges.first() {
        Some(&e) => g.edges[e].source,
        None => g
            .node_index(&seq.initial_state)
            .ok_or_else(|| GraphError::UnknownState(seq.initial_state.clone()))?,
    };
    let end = edges.last().map(|&e| g.edges[e].target).unwrap_or(start);
    let prefix = shortest_path(g, g.initial, |v| v == start).ok_or_else(|| {
        TestGenError::NotEmbeddable(format!("state {} is unreachable", g.nodes[start]))
    })?;
    let suffix = shortest_path(g, end, |v| g.is_accepting(v)).ok_or_else(|| {
        TestGenError::NotEmbeddable(format!(
            "no accepting state is reachable from {}",
            g.nodes[end]
        ))
    })?;
    let full: Vec<usize> = prefix.into_iter().chain(edges).chain(suffix).collect();
    Ok(TestCase::from_walk(g, seq.id.clone(), g.initial, &full)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultTransition {
    pub state: String,
    pub event: String,
}

/// A legal start sequence from the initial state followed by one faulty
/// transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSequence {
    pub id: String,
    pub start_seq: Vec<String>,
    pub fault: FaultTransition,
    /// The faulty state has completion transitions, so an execution only
    /// rests there when none of their guards hold.
    pub transient: bool,
}

/// `(state, event)` pairs over simple states and declared events where no
/// outgoing transition of the state is triggered by the event.
pub fn fault_transitions(sc: &Statechart) -> Vec<FaultTransition> {
    let flat = flatten(sc);
    let mut out = Vec::new();
    for s in flat.simple_states() {
        for ev in &flat.events {
            let handled = flat
                .outgoing(&s.id)
                .any(|t| t.trigger.as_deref() == Some(ev.name.as_str()));
            if !handled {
                out.push(FaultTransition {
                    state: s.id.clone(),
                    event: ev.name.clone(),
                });
            }
        }
    }
    out
}

/// One complete faulty sequence per fault transition, using the shortest
/// start sequence.
pub fn fault_suite(sc: &Statechart) -> Result<Vec<FaultSequence>, TestGenError> {
    let flat = flatten(sc);
    let g = build_graph(&flat)?;
    fault_transitions(&flat)
        .into_iter()
        .enumerate()
        .map(|(i, fault)| {
            let node = g
                .node_index(&fault.state)
                .ok_or_else(|| GraphError::UnknownState(fault.state.clone()))?;
            let path = shortest_path(&g, g.initial, |v| v == node).ok_or_else(|| {
                TestGenError::NotEmbeddable(format!("state {} is unreachable", fault.state))
            })?;
            let transient = flat.outgoing(&fault.state).any(|t| t.is_completion());
            Ok(FaultSequence {
                id: format!("f{}", i + 1),
                start_seq: path.iter().map(|&e| g.edges[e].id.clone()).collect(),
                fault,
                transient,
            })
        })
        .collect()
}
