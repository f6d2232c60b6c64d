//! Structural coverage of test suites and dynamic coverage of traces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, GraphError, TransitionGraph};
use crate::interp::Trace;
use crate::model::{flatten, Statechart};
use crate::testgen::{maximal_path_indices, TestCase, TestSuite};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    State,
    Transition,
    Path,
    Action,
    Condition,
}

impl Criterion {
    pub const STRUCTURAL: [Criterion; 4] = [
        Criterion::State,
        Criterion::Transition,
        Criterion::Path,
        Criterion::Action,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::State => "state",
            Criterion::Transition => "transition",
            Criterion::Path => "path",
            Criterion::Action => "action",
            Criterion::Condition => "condition",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "state" => Ok(Criterion::State),
            "transition" => Ok(Criterion::Transition),
            "path" => Ok(Criterion::Path),
            "action" => Ok(Criterion::Action),
            "condition" => Ok(Criterion::Condition),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

/// Covered items of one criterion, both lists in universe order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionCoverage {
    pub criterion: Criterion,
    pub applicable: bool,
    pub covered: Vec<String>,
    pub universe: Vec<String>,
}

impl CriterionCoverage {
    fn new(criterion: Criterion, universe: Vec<String>, hit: &BTreeSet<String>) -> Self {
        let covered = universe
            .iter()
            .filter(|u| hit.contains(*u))
            .cloned()
            .collect();
        CriterionCoverage {
            criterion,
            applicable: true,
            covered,
            universe,
        }
    }

    fn not_applicable(criterion: Criterion) -> Self {
        CriterionCoverage {
            criterion,
            applicable: false,
            covered: Vec::new(),
            universe: Vec::new(),
        }
    }

    /// `(covered, universe)` counts.
    pub fn counts(&self) -> (usize, usize) {
        (self.covered.len(), self.universe.len())
    }

    /// Covered fraction; 1 when the universe is empty.
    pub fn ratio(&self) -> f64 {
        match self.universe.len() {
            0 => 1.0,
            n => self.covered.len() as f64 / n as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub state: CriterionCoverage,
    pub transition: CriterionCoverage,
    pub path: CriterionCoverage,
    pub action: CriterionCoverage,
    pub condition: CriterionCoverage,
    /// Elementary paths behind the `p<n>` ids of the path criterion.
    pub paths: BTreeMap<String, Vec<String>>,
}

impl CoverageReport {
    pub fn get(&self, c: Criterion) -> &CriterionCoverage {
        match c {
            Criterion::State => &self.state,
            Criterion::Transition => &self.transition,
            Criterion::Path => &self.path,
            Criterion::Action => &self.action,
            Criterion::Condition => &self.condition,
        }
    }

    pub fn criteria(&self) -> [&CriterionCoverage; 5] {
        [
            &self.state,
            &self.transition,
            &self.path,
            &self.action,
            &self.condition,
        ]
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>9}{:>9}", "criterion", "covered", "ratio")?;
        for c in self.criteria() {
            if c.applicable {
                let (n, d) = c.counts();
                writeln!(
                    f,
                    "{:<12}{:>9}{:>8.1}%",
                    c.criterion.name(),
                    format!("{n}/{d}"),
                    100.0 * c.ratio()
                )?;
            } else {
                writeln!(f, "{:<12}{:>9}{:>9}", c.criterion.name(), "-", "n/a")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("test case `{0}` is not a walk of the graph")]
    InvalidWalk(String),
    #[error("trace does not match the model: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Items touched by one walk.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Touched {
    pub states: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
    pub paths: BTreeSet<String>,
    pub actions: BTreeSet<String>,
}

impl Touched {
    pub(crate) fn get(&self, c: Criterion) -> &BTreeSet<String> {
        match c {
            Criterion::State => &self.states,
            Criterion::Transition => &self.transitions,
            Criterion::Path => &self.paths,
            Criterion::Action => &self.actions,
            Criterion::Condition => panic!("condition coverage is trace-only"),
        }
    }

    fn absorb(&mut self, other: Touched) {
        self.states.extend(other.states);
        self.transitions.extend(other.transitions);
        self.paths.extend(other.paths);
        self.actions.extend(other.actions);
    }
}

pub(crate) struct Universe {
    paths: Vec<Vec<usize>>,
}

impl Universe {
    pub(crate) fn new(g: &TransitionGraph) -> Self {
        Universe {
            paths: maximal_path_indices(g),
        }
    }

    fn path_id(i: usize) -> String {
        format!("p{}", i + 1)
    }

    pub(crate) fn touched(&self, g: &TransitionGraph, start: usize, edges: &[usize]) -> Touched {
        let mut t = Touched::default();
        t.states.insert(g.nodes[start].clone());
        for &e in edges {
            let edge = &g.edges[e];
            t.states.insert(g.nodes[edge.target].clone());
            t.transitions.insert(edge.id.clone());
            if edge.action_count > 0 {
                t.actions.insert(edge.id.clone());
            }
        }
        for (i, p) in self.paths.iter().enumerate() {
            if contains_window(edges, p) {
                t.paths.insert(Self::path_id(i));
            }
        }
        t
    }

    fn report(
        &self,
        g: &TransitionGraph,
        hit: &Touched,
        condition: CriterionCoverage,
    ) -> CoverageReport {
        CoverageReport {
            state: CriterionCoverage::new(Criterion::State, g.nodes.clone(), &hit.states),
            transition: CriterionCoverage::new(
                Criterion::Transition,
                g.edges.iter().map(|e| e.id.clone()).collect(),
                &hit.transitions,
            ),
            path: CriterionCoverage::new(
                Criterion::Path,
                (0..self.paths.len()).map(Self::path_id).collect(),
                &hit.paths,
            ),
            action: CriterionCoverage::new(
                Criterion::Action,
                g.edges
                    .iter()
                    .filter(|e| e.action_count > 0)
                    .map(|e| e.id.clone())
                    .collect(),
                &hit.actions,
            ),
            condition,
            paths: self
                .paths
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    (
                        Self::path_id(i),
                        p.iter().map(|&e| g.edges[e].id.clone()).collect(),
                    )
                })
                .collect(),
        }
    }
}

/// True when `needle` occurs as a contiguous run inside `hay`.
pub(crate) fn contains_window<T: PartialEq>(hay: &[T], needle: &[T]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

/// Resolves a case to `(start node, edge indices)`, checking that it is a
/// walk whose states agree with the graph.
pub(crate) fn case_walk(
    g: &TransitionGraph,
    tc: &TestCase,
) -> Result<(usize, Vec<usize>), CoverageError> {
    let invalid = || CoverageError::InvalidWalk(tc.id.clone());
    let rebuilt =
        TestCase::rebuild(g, tc.id.clone(), &tc.edges, &tc.initial_state).map_err(|_| invalid())?;
    if rebuilt.states != tc.states || rebuilt.initial_state != tc.initial_state {
        return Err(invalid());
    }
    let start = g.node_index(&tc.initial_state).ok_or_else(invalid)?;
    let edges = g.resolve_edges(&tc.edges).map_err(|_| invalid())?;
    Ok((start, edges))
}

/// State, transition, path and action coverage of `suite`. Condition
/// coverage needs variable values and is reported as not applicable.
pub fn measure_suite(
    suite: &TestSuite,
    g: &TransitionGraph,
) -> Result<CoverageReport, CoverageError> {
    measure_cases(suite.cases(), g)
}

pub fn measure_cases(
    cases: &[TestCase],
    g: &TransitionGraph,
) -> Result<CoverageReport, CoverageError> {
    let universe = Universe::new(g);
    let mut hit = Touched::default();
    for tc in cases {
        let (start, edges) = case_walk(g, tc)?;
        hit.absorb(universe.touched(g, start, &edges));
    }
    Ok(universe.report(
        g,
        &hit,
        CriterionCoverage::not_applicable(Criterion::Condition),
    ))
}

/// Coverage of one execution trace, including condition coverage.
pub fn measure_trace(trace: &Trace, sc: &Statechart) -> Result<CoverageReport, CoverageError> {
    measure_traces(std::slice::from_ref(trace), sc)
}

/// Combined coverage of several traces of the same chart.
///
/// Condition items are per guarded transition `t`: the decision `t` must be
/// seen true and false; guards with several atomic conditions add items
/// `t#1`, `t#2`, ... for each atom, which must also be seen both ways.
pub fn measure_traces(traces: &[Trace], sc: &Statechart) -> Result<CoverageReport, CoverageError> {
    let flat = flatten(sc);
    let g = build_graph(&flat)?;
    let universe = Universe::new(&g);
    let mut hit = Touched::default();
    let mut seen: BTreeMap<String, [bool; 2]> = BTreeMap::new();
    for trace in traces {
        let start = g.node_index(&trace.initial_state).ok_or_else(|| {
            CoverageError::ModelMismatch(format!("unknown state `{}`", trace.initial_state))
        })?;
        let edges = trace
            .steps
            .iter()
            .map(|s| {
                g.edge_index(&s.fired).ok_or_else(|| {
                    CoverageError::ModelMismatch(format!("unknown transition `{}`", s.fired))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !g.is_walk(&edges) || edges.first().is_some_and(|&e| g.edges[e].source != start) {
            return Err(CoverageError::ModelMismatch(
                "fired transitions do not form a walk".into(),
            ));
        }
        hit.absorb(universe.touched(&g, start, &edges));
        for ev in &trace.evaluations {
            let t = flat.transition(&ev.transition).ok_or_else(|| {
                CoverageError::ModelMismatch(format!("unknown transition `{}`", ev.transition))
            })?;
            let atom_count = t.guard.as_ref().map(|g| g.atoms().len()).unwrap_or(0);
            if atom_count != ev.atoms.len() {
                return Err(CoverageError::ModelMismatch(format!(
                    "guard of `{}` has {atom_count} conditions, trace records {}",
                    t.id,
                    ev.atoms.len()
                )));
            }
            seen.entry(t.id.clone()).or_default()[ev.outcome as usize] = true;
            if atom_count > 1 {
                for (i, &a) in ev.atoms.iter().enumerate() {
                    seen.entry(format!("{}#{}", t.id, i + 1)).or_default()[a as usize] = true;
                }
            }
        }
    }
    let mut cond_universe = Vec::new();
    for t in &flat.transitions {
        if let Some(guard) = &t.guard {
            cond_universe.push(t.id.clone());
            let n = guard.atoms().len();
            if n > 1 {
                cond_universe.extend((1..=n).map(|i| format!("{}#{i}", t.id)));
            }
        }
    }
    let both: BTreeSet<String> = seen
        .into_iter()
        .filter(|(_, s)| s[0] && s[1])
        .map(|(k, _)| k)
        .collect();
    let condition = CriterionCoverage::new(Criterion::Condition, cond_universe, &both);
    Ok(universe.report(&g, &hit, condition))
}
