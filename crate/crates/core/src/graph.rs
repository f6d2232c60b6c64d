//! State-level transition graph and the transition-pair (dual) graph.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{flatten, Statechart};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub trigger: Option<String>,
    /// Guard in source syntax, for display.
    pub guard: Option<String>,
    pub action_count: usize,
}

/// Nodes are simple states and edges are transitions, both in
/// declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    pub name: String,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("chart has no initial state")]
    NoInitialState,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown transition `{0}`")]
    UnknownEdge(String),
    #[error("transition `{edge}` does not leave state `{state}`")]
    NotAWalk { edge: String, state: String },
}

impl TransitionGraph {
    /// Builds a bare graph from `(id, source, target)` triples.
    pub fn from_edges(
        name: impl Into<String>,
        nodes: &[&str],
        edges: &[(&str, &str, &str)],
        initial: &str,
        accepting: &[&str],
    ) -> Result<Self, GraphError> {
        let nodes: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let idx = |s: &str| {
            nodes
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| GraphError::UnknownState(s.to_string()))
        };
        let edges = edges
            .iter()
            .map(|(id, a, b)| {
                Ok(Edge {
                    id: id.to_string(),
                    source: idx(a)?,
                    target: idx(b)?,
                    trigger: None,
                    guard: None,
                    action_count: 0,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        let initial = idx(initial)?;
        let accepting = accepting.iter().map(|a| idx(a)).collect::<Result<_, _>>()?;
        Ok(TransitionGraph {
            name: name.into(),
            nodes,
            edges,
            initial,
            accepting,
        })
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Outgoing edge indices of `node`, in declaration order.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == node)
            .map(|(i, _)| i)
    }

    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.target == node)
            .map(|(i, _)| i)
    }

    pub fn is_accepting(&self, node: usize) -> bool {
        self.accepting.contains(&node)
    }

    /// True when consecutive edges share their connecting state.
    pub fn is_walk(&self, edges: &[usize]) -> bool {
        edges
            .windows(2)
            .all(|w| self.edges[w[0]].target == self.edges[w[1]].source)
    }

    /// Resolves edge ids to indices.
    pub fn resolve_edges<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>, GraphError> {
        ids.iter()
            .map(|id| {
                self.edge_index(id.as_ref())
                    .ok_or_else(|| GraphError::UnknownEdge(id.as_ref().to_string()))
            })
            .collect()
    }
}

/// Builds the transition graph of `sc`, flattening hierarchy first.
pub fn build_graph(sc: &Statechart) -> Result<TransitionGraph, GraphError> {
    let flat = flatten(sc);
    let nodes: Vec<String> = flat.states.iter().map(|s| s.id.clone()).collect();
    let idx = |s: &str| {
        nodes
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| GraphError::UnknownState(s.to_string()))
    };
    let initial = flat
        .initial_state()
        .ok_or(GraphError::NoInitialState)
        .and_then(|s| idx(&s.id))?;
    let accepting = flat
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.accepting)
        .map(|(i, _)| i)
        .collect();
    let edges = flat
        .transitions
        .iter()
        .map(|t| {
            Ok(Edge {
                id: t.id.clone(),
                source: idx(&t.source)?,
                target: idx(&t.target)?,
                trigger: t.trigger.clone(),
                guard: t.guard.as_ref().map(|g| g.to_string()),
                action_count: t.actions.len(),
            })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(TransitionGraph {
        name: flat.name.clone(),
        nodes,
        edges,
        initial,
        accepting,
    })
}

/// All ordered pairs `(t, t')` with `target(t) = source(t')`, ordered by
/// `t` then `t'` declaration order.
pub fn transition_pairs(g: &TransitionGraph) -> Vec<(String, String)> {
    pair_indices(g)
        .into_iter()
        .map(|(a, b)| (g.edges[a].id.clone(), g.edges[b].id.clone()))
        .collect()
}

pub(crate) fn pair_indices(g: &TransitionGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        for j in g.out_edges(e.target) {
            out.push((i, j));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DualVertex {
    Entry,
    Transition(usize),
    Exit,
}

/// Vertices are transitions plus virtual entry and exit vertices; arcs
/// join legal transition pairs, entry to every transition leaving the
/// initial state, and every transition entering an accepting state to exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub vertices: Vec<DualVertex>,
    pub arcs: Vec<(DualVertex, DualVertex)>,
}

impl DualGraph {
    pub fn successors(&self, v: DualVertex) -> impl Iterator<Item = DualVertex> + '_ {
        self.arcs
            .iter()
            .filter(move |(a, _)| *a == v)
            .map(|(_, b)| *b)
    }

    pub fn indegree(&self, v: DualVertex) -> usize {
        self.arcs.iter().filter(|(_, b)| *b == v).count()
    }

    pub fn outdegree(&self, v: DualVertex) -> usize {
        self.arcs.iter().filter(|(a, _)| *a == v).count()
    }
}

/// Arc order: entry arcs, pair arcs, exit arcs; each in declaration order.
pub fn build_dual(g: &TransitionGraph) -> DualGraph {
    let mut vertices = vec![DualVertex::Entry];
    vertices.extend((0..g.edges.len()).map(DualVertex::Transition));
    vertices.push(DualVertex::Exit);
    let mut arcs: Vec<(DualVertex, DualVertex)> = g
        .out_edges(g.initial)
        .map(|i| (DualVertex::Entry, DualVertex::Transition(i)))
        .collect();
    arcs.extend(
        pair_indices(g)
            .into_iter()
            .map(|(a, b)| (DualVertex::Transition(a), DualVertex::Transition(b))),
    );
    arcs.extend(
        g.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| g.is_accepting(e.target))
            .map(|(i, _)| (DualVertex::Transition(i), DualVertex::Exit)),
    );
    DualGraph { vertices, arcs }
}
