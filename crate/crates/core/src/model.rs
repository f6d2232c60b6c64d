//! In-memory statechart model, structural checks, validation and flattening.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::expr::{BindingKind, Expr, Scope, Type, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    pub params: Vec<Param>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateKind {
    Initial,
    Simple,
    Composite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateNode {
    pub id: String,
    pub kind: StateKind,
    pub parent: Option<String>,
    pub initial_child: Option<String>,
    pub accepting: bool,
}

impl StateNode {
    pub fn simple(id: impl Into<String>) -> Self {
        StateNode {
            id: id.into(),
            kind: StateKind::Simple,
            parent: None,
            initial_child: None,
            accepting: false,
        }
    }

    pub fn initial(id: impl Into<String>) -> Self {
        StateNode {
            kind: StateKind::Initial,
            ..StateNode::simple(id)
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.kind != StateKind::Composite
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Assign { var: String, expr: Expr },
    Emit(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Assign { var, expr } => write!(f, "{var} := {expr}"),
            Action::Emit(name) => write!(f, "emit {name}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDef {
    pub id: String,
    pub source: String,
    pub target: String,
    pub trigger: Option<String>,
    pub guard: Option<Expr>,
    pub actions: Vec<Action>,
}

impl TransitionDef {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        TransitionDef {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            trigger: None,
            guard: None,
            actions: Vec::new(),
        }
    }

    pub fn on(mut self, event: impl Into<String>) -> Self {
        self.trigger = Some(event.into());
        self
    }

    pub fn is_completion(&self) -> bool {
        self.trigger.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
    pub initial: Value,
}

/// A statechart. All collections keep declaration order, which is the
/// tie-breaking order for every downstream algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statechart {
    pub name: String,
    pub events: Vec<EventDecl>,
    pub states: Vec<StateNode>,
    pub vars: Vec<VarDecl>,
    pub transitions: Vec<TransitionDef>,
}

impl Statechart {
    pub fn new(name: impl Into<String>) -> Self {
        Statechart {
            name: name.into(),
            events: Vec::new(),
            states: Vec::new(),
            vars: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn state(&self, id: &str) -> Option<&StateNode> {
        self.states.iter().find(|s| s.id == id)
    }

    pub fn event(&self, name: &str) -> Option<&EventDecl> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn transition(&self, id: &str) -> Option<&TransitionDef> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn initial_state(&self) -> Option<&StateNode> {
        self.states.iter().find(|s| s.kind == StateKind::Initial)
    }

    pub fn is_flat(&self) -> bool {
        self.states.iter().all(StateNode::is_leaf)
    }

    /// Leaf states (initial and simple) in declaration order.
    pub fn simple_states(&self) -> impl Iterator<Item = &StateNode> {
        self.states.iter().filter(|s| s.is_leaf())
    }

    pub fn outgoing<'s, 'q>(
        &'s self,
        state: &'q str,
    ) -> impl Iterator<Item = &'s TransitionDef> + 'q
    where
        's: 'q,
    {
        self.transitions.iter().filter(move |t| t.source == state)
    }

    /// Names visible inside guards and actions of `t`.
    pub fn scope_for(&self, t: &TransitionDef) -> Scope {
        let mut scope = Scope::new();
        for v in &self.vars {
            scope.push(v.name.clone(), v.ty, BindingKind::Var);
        }
        if let Some(ev) = t.trigger.as_deref().and_then(|n| self.event(n)) {
            for p in &ev.params {
                scope.push(p.name.clone(), p.ty, BindingKind::Param);
            }
        }
        scope
    }

    /// Reference resolution, uniqueness, hierarchy shape and typing.
    /// The DSL parser reports these with source positions; this is the
    /// same check for programmatically built charts.
    pub fn check_structure(&self) -> Result<(), StructureError> {
        let mut seen = HashSet::new();
        for e in &self.events {
            if !seen.insert(e.name.as_str()) {
                return Err(StructureError::Duplicate("event", e.name.clone()));
            }
            let mut params = HashSet::new();
            for p in &e.params {
                if !params.insert(p.name.as_str()) {
                    return Err(StructureError::Duplicate("parameter", p.name.clone()));
                }
                if self.var(&p.name).is_some() {
                    return Err(StructureError::ParamShadowsVar(p.name.clone()));
                }
            }
        }
        let mut seen = HashSet::new();
        for v in &self.vars {
            if !seen.insert(v.name.as_str()) {
                return Err(StructureError::Duplicate("variable", v.name.clone()));
            }
            if v.initial.ty() != v.ty {
                return Err(StructureError::BadInitialValue(v.name.clone()));
            }
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.id.as_str()) {
                return Err(StructureError::Duplicate("state", s.id.clone()));
            }
        }
        match self
            .states
            .iter()
            .filter(|s| s.kind == StateKind::Initial)
            .count()
        {
            0 => return Err(StructureError::NoInitialState),
            1 => {}
            _ => return Err(StructureError::MultipleInitialStates),
        }
        for s in &self.states {
            if let Some(p) = &s.parent {
                match self.state(p) {
                    None => return Err(StructureError::UnknownState(p.clone())),
                    Some(ps) if ps.kind != StateKind::Composite => {
                        return Err(StructureError::ParentNotComposite(s.id.clone()))
                    }
                    _ => {}
                }
            }
            match s.kind {
                StateKind::Composite => {
                    if s.accepting {
                        return Err(StructureError::AcceptingComposite(s.id.clone()));
                    }
                    let child = s
                        .initial_child
                        .as_ref()
                        .ok_or_else(|| StructureError::MissingInitialChild(s.id.clone()))?;
                    match self.state(child) {
                        Some(c) if c.parent.as_deref() == Some(s.id.as_str()) => {}
                        _ => return Err(StructureError::BadInitialChild(s.id.clone())),
                    }
                }
                _ => {
                    if s.initial_child.is_some() {
                        return Err(StructureError::InitialChildOnLeaf(s.id.clone()));
                    }
                }
            }
        }
        // Parent links must not cycle.
        for s in &self.states {
            let mut cur = s.parent.as_deref();
            let mut steps = 0;
            while let Some(p) = cur {
                steps += 1;
                if steps > self.states.len() {
                    return Err(StructureError::HierarchyCycle(s.id.clone()));
                }
                cur = self.state(p).and_then(|n| n.parent.as_deref());
            }
        }
        let mut seen = HashSet::new();
        for t in &self.transitions {
            if !seen.insert(t.id.as_str()) {
                return Err(StructureError::Duplicate("transition", t.id.clone()));
            }
            for end in [&t.source, &t.target] {
                if self.state(end).is_none() {
                    return Err(StructureError::UnknownState(end.clone()));
                }
            }
            if let Some(ev) = &t.trigger {
                if self.event(ev).is_none() {
                    return Err(StructureError::UnknownEvent(ev.clone()));
                }
            }
            let scope = self.scope_for(t);
            if let Some(g) = &t.guard {
                let ty = g
                    .type_of(&scope)
                    .map_err(|e| StructureError::Type(t.id.clone(), e.to_string()))?;
                if ty != Type::Bool {
                    return Err(StructureError::Type(
                        t.id.clone(),
                        "guard must be bool".into(),
                    ));
                }
            }
            for a in &t.actions {
                if let Action::Assign { var, expr } = a {
                    let decl = self
                        .var(var)
                        .ok_or_else(|| StructureError::UnknownVariable(var.clone()))?;
                    let ty = expr
                        .type_of(&scope)
                        .map_err(|e| StructureError::Type(t.id.clone(), e.to_string()))?;
                    if ty != decl.ty {
                        return Err(StructureError::Type(
                            t.id.clone(),
                            format!("cannot assign {ty} to {} variable `{var}`", decl.ty),
                        ));
                    }
                }
            }
            if t.is_completion() && t.guard.is_none() {
                let others = self
                    .outgoing(&t.source)
                    .filter(|u| u.is_completion() && u.id != t.id)
                    .count();
                if others > 0 {
                    return Err(StructureError::UnguardedCompletion(t.id.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("duplicate {0} `{1}`")]
    Duplicate(&'static str, String),
    #[error("parameter `{0}` shadows a variable")]
    ParamShadowsVar(String),
    #[error("initial value of `{0}` does not match its type")]
    BadInitialValue(String),
    #[error("no initial state")]
    NoInitialState,
    #[error("more than one initial state")]
    MultipleInitialStates,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("parent of `{0}` is not a composite state")]
    ParentNotComposite(String),
    #[error("composite state `{0}` cannot be accepting")]
    AcceptingComposite(String),
    #[error("composite state `{0}` needs an initialchild")]
    MissingInitialChild(String),
    #[error("initialchild of `{0}` must be one of its children")]
    BadInitialChild(String),
    #[error("non-composite state `{0}` cannot have an initialchild")]
    InitialChildOnLeaf(String),
    #[error("state hierarchy contains a cycle at `{0}`")]
    HierarchyCycle(String),
    #[error(
        "completion transition `{0}` needs a guard: its source has other completion transitions"
    )]
    UnguardedCompletion(String),
    #[error("transition `{0}`: {1}")]
    Type(String, String),
}

/// One finding of [`validate_statechart`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValidationIssue {
    NoInitialState,
    MultipleInitialStates,
    Unreachable(String),
    NotCoReachable(String),
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::NoInitialState => f.write_str("no initial state"),
            ValidationIssue::MultipleInitialStates => f.write_str("multiple initial states"),
            ValidationIssue::Unreachable(s) => {
                write!(f, "state {s} is unreachable from the initial state")
            }
            ValidationIssue::NotCoReachable(s) => {
                write!(f, "no accepting state is reachable from {s}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Reachability from the initial state for every simple state, and
/// co-reachability to an accepting state when any accepting state exists.
/// Hierarchical charts are checked on their flattened form.
pub fn validate_statechart(sc: &Statechart) -> ValidationReport {
    let mut issues = Vec::new();
    let initials: Vec<_> = sc
        .states
        .iter()
        .filter(|s| s.kind == StateKind::Initial)
        .collect();
    match initials.len() {
        0 => issues.push(ValidationIssue::NoInitialState),
        1 => {}
        _ => issues.push(ValidationIssue::MultipleInitialStates),
    }
    if !issues.is_empty() {
        return ValidationReport { issues };
    }
    let flat = flatten(sc);
    let ids: Vec<&str> = flat.states.iter().map(|s| s.id.as_str()).collect();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let edges: Vec<(usize, usize)> = flat
        .transitions
        .iter()
        .map(|t| (index[t.source.as_str()], index[t.target.as_str()]))
        .collect();
    let init = index[initials[0].id.as_str()];
    let fwd = bfs_reach(ids.len(), &edges, &[init], false);
    for (i, id) in ids.iter().enumerate() {
        if !fwd[i] {
            issues.push(ValidationIssue::Unreachable(id.to_string()));
        }
    }
    let accepting: Vec<usize> = flat
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.accepting)
        .map(|(i, _)| i)
        .collect();
    if !accepting.is_empty() {
        let back = bfs_reach(ids.len(), &edges, &accepting, true);
        for (i, id) in ids.iter().enumerate() {
            if !back[i] {
                issues.push(ValidationIssue::NotCoReachable(id.to_string()));
            }
        }
    }
    ValidationReport { issues }
}

fn bfs_reach(n: usize, edges: &[(usize, usize)], start: &[usize], reverse: bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = start.iter().copied().collect();
    for &s in start {
        seen[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(a, b) in edges {
            let (from, to) = if reverse { (b, a) } else { (a, b) };
            if from == u && !seen[to] {
                seen[to] = true;
                queue.push_back(to);
            }
        }
    }
    seen
}

/// Removes composite states. Transitions into a composite are redirected
/// to its (recursively resolved) initial leaf; transitions out of a
/// composite are replicated from every leaf descendant as `id@leaf`.
/// Flat charts are returned unchanged.
pub fn flatten(sc: &Statechart) -> Statechart {
    if sc.is_flat() {
        return sc.clone();
    }
    let entry_leaf = |id: &str| -> String {
        let mut cur = id;
        let mut guard = 0;
        while let Some(node) = sc.state(cur) {
            match (&node.kind, &node.initial_child) {
                (StateKind::Composite, Some(child)) if guard <= sc.states.len() => {
                    cur = child;
                    guard += 1;
                }
                _ => break,
            }
        }
        cur.to_string()
    };
    let is_descendant = |leaf: &str, ancestor: &str| -> bool {
        let mut cur = sc.state(leaf).and_then(|s| s.parent.as_deref());
        let mut steps = 0;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            steps += 1;
            if steps > sc.states.len() {
                break;
            }
            cur = sc.state(p).and_then(|s| s.parent.as_deref());
        }
        false
    };
    let leaves: Vec<&StateNode> = sc.simple_states().collect();
    let mut transitions = Vec::with_capacity(sc.transitions.len());
    for t in &sc.transitions {
        let target = entry_leaf(&t.target);
        let source_is_composite = sc
            .state(&t.source)
            .map(|s| s.kind == StateKind::Composite)
            .unwrap_or(false);
        if source_is_composite {
            for leaf in leaves.iter().filter(|l| is_descendant(&l.id, &t.source)) {
                transitions.push(TransitionDef {
                    id: format!("{}@{}", t.id, leaf.id),
                    source: leaf.id.clone(),
                    target: target.clone(),
                    ..t.clone()
                });
            }
        } else {
            transitions.push(TransitionDef {
                target,
                ..t.clone()
            });
        }
    }
    Statechart {
        name: sc.name.clone(),
        events: sc.events.clone(),
        vars: sc.vars.clone(),
        states: leaves
            .into_iter()
            .map(|s| StateNode {
                parent: None,
                ..s.clone()
            })
            .collect(),
        transitions,
    }
}

/// Set of states reachable from `from` in the chart's state graph.
pub fn reachable_states(sc: &Statechart, from: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from.to_string()]);
    seen.insert(from.to_string());
    while let Some(s) = queue.pop_front() {
        for t in sc.outgoing(&s) {
            if seen.insert(t.target.clone()) {
                queue.push_back(t.target.clone());
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(states: &[&str], edges: &[(&str, &str, &str)]) -> Statechart {
        let mut sc = Statechart::new("T");
        sc.events.push(EventDecl {
            name: "go".into(),
            params: vec![],
        });
        for (i, s) in states.iter().enumerate() {
            sc.states.push(if i == 0 {
                StateNode::initial(*s)
            } else {
                StateNode::simple(*s)
            });
        }
        for (id, a, b) in edges {
            sc.transitions
                .push(TransitionDef::new(*id, *a, *b).on("go"));
        }
        sc
    }

    #[test]
    fn single_state_is_valid() {
        let sc = chart(&["S0"], &[]);
        assert!(sc.check_structure().is_ok());
        assert!(validate_statechart(&sc).is_valid());
    }

    #[test]
    fn isolated_state_is_unreachable() {
        let sc = chart(&["A", "B", "Z"], &[("t", "A", "B")]);
        let report = validate_statechart(&sc);
        assert_eq!(
            report.issues,
            vec![ValidationIssue::Unreachable("Z".into())]
        );
    }

    #[test]
    fn co_reachability_only_with_accepting_states() {
        let mut sc = chart(&["A", "B", "C"], &[("t", "A", "B"), ("u", "A", "C")]);
        assert!(validate_statechart(&sc).is_valid());
        sc.states[1].accepting = true;
        assert_eq!(
            validate_statechart(&sc).issues,
            vec![ValidationIssue::NotCoReachable("C".into())]
        );
    }

    #[test]
    fn missing_or_extra_initial_state() {
        let mut sc = chart(&["A", "B"], &[]);
        sc.states[0].kind = StateKind::Simple;
        assert_eq!(
            validate_statechart(&sc).issues,
            vec![ValidationIssue::NoInitialState]
        );
        assert_eq!(sc.check_structure(), Err(StructureError::NoInitialState));
        sc.states[0].kind = StateKind::Initial;
        sc.states[1].kind = StateKind::Initial;
        assert_eq!(
            validate_statechart(&sc).issues,
            vec![ValidationIssue::MultipleInitialStates]
        );
    }

    fn hierarchical() -> Statechart {
        // X -t-> C{A(init), B}; C -u-> Y; A -v-> B
        let mut sc = chart(&["X", "Y"], &[]);
        sc.states.push(StateNode {
            kind: StateKind::Composite,
            initial_child: Some("A".into()),
            ..StateNode::simple("C")
        });
        for leaf in ["A", "B"] {
            sc.states.push(StateNode {
                parent: Some("C".into()),
                ..StateNode::simple(leaf)
            });
        }
        sc.transitions
            .push(TransitionDef::new("t", "X", "C").on("go"));
        sc.transitions
            .push(TransitionDef::new("u", "C", "Y").on("go"));
        sc.transitions
            .push(TransitionDef::new("v", "A", "B").on("go"));
        sc
    }

    #[test]
    fn flatten_redirects_and_replicates() {
        let sc = hierarchical();
        sc.check_structure().unwrap();
        let flat = flatten(&sc);
        assert!(flat.is_flat());
        let edges: Vec<(&str, &str, &str)> = flat
            .transitions
            .iter()
            .map(|t| (t.id.as_str(), t.source.as_str(), t.target.as_str()))
            .collect();
        assert_eq!(
            edges,
            [
                ("t", "X", "A"),
                ("u@A", "A", "Y"),
                ("u@B", "B", "Y"),
                ("v", "A", "B")
            ]
        );
        assert_eq!(flatten(&flat), flat);
        assert!(flat.check_structure().is_ok());
    }

    #[test]
    fn nested_composites_resolve_to_leaves() {
        let mut sc = hierarchical();
        // Put C inside an outer composite O whose initial child is C.
        sc.states.push(StateNode {
            kind: StateKind::Composite,
            initial_child: Some("C".into()),
            ..StateNode::simple("O")
        });
        sc.states[2].parent = Some("O".into());
        sc.transitions
            .push(TransitionDef::new("w", "O", "X").on("go"));
        sc.transitions
            .push(TransitionDef::new("z", "Y", "O").on("go"));
        sc.check_structure().unwrap();
        let flat = flatten(&sc);
        let w: Vec<_> = flat
            .transitions
            .iter()
            .filter(|t| t.id.starts_with("w@"))
            .collect();
        assert_eq!(w.len(), 2);
        assert_eq!(flat.transition("z").unwrap().target, "A");
        assert!(validate_statechart(&sc).is_valid());
    }

    #[test]
    fn structure_rejects_unguarded_completion_pair() {
        let mut sc = chart(&["A", "B"], &[]);
        sc.transitions.push(TransitionDef::new("p", "A", "B"));
        assert!(sc.check_structure().is_ok());
        sc.transitions.push(TransitionDef::new("q", "A", "A"));
        assert!(matches!(
            sc.check_structure(),
            Err(StructureError::UnguardedCompletion(_))
        ));
    }
}
