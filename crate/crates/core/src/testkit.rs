//! Proptest strategies for random graphs, suites, expressions and charts.
//! Enabled by the `testkit` feature.

use proptest::collection::vec;
use proptest::prelude::*;

use crate::expr::{BinaryOp, Expr, Type, UnaryOp, Value};
use crate::graph::TransitionGraph;
use crate::model::{Action, EventDecl, Param, StateNode, Statechart, TransitionDef, VarDecl};
use crate::testgen::{TestCase, TestSuite};

pub const MAX_NODES: usize = 10;
pub const MAX_EDGES: usize = 16;
pub const MAX_CASES: usize = 25;

fn node_name(i: usize) -> String {
    format!("S{i}")
}

fn assemble(n: usize, pairs: &[(usize, usize)], accepting: &[bool]) -> TransitionGraph {
    let names: Vec<String> = (0..n).map(node_name).collect();
    let ids: Vec<String> = (0..pairs.len()).map(|i| format!("e{}", i + 1)).collect();
    let nodes: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges: Vec<(&str, &str, &str)> = pairs
        .iter()
        .zip(&ids)
        .map(|(&(a, b), id)| (id.as_str(), nodes[a], nodes[b]))
        .collect();
    let acc: Vec<&str> = (0..n).filter(|&i| accepting[i]).map(|i| nodes[i]).collect();
    TransitionGraph::from_edges("G", &nodes, &edges, nodes[0], &acc).expect("indices are in range")
}

/// Any graph with 1..=10 nodes and up to 16 edges. Node `S0` is initial.
pub fn arb_graph() -> impl Strategy<Value = TransitionGraph> {
    (1..=MAX_NODES)
        .prop_flat_map(|n| {
            (
                Just(n),
                vec((0..n, 0..n), 0..=MAX_EDGES),
                vec(any::<bool>(), n),
            )
        })
        .prop_map(|(n, pairs, acc)| assemble(n, &pairs, &acc))
}

/// A graph where every node is reachable from `S0`: node `i > 0` gets an
/// edge from some lower-numbered node before any extra edges.
pub fn arb_reachable_graph() -> impl Strategy<Value = TransitionGraph> {
    (1..=MAX_NODES)
        .prop_flat_map(|n| {
            let tree: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
            (
                Just(n),
                tree,
                vec((0..n, 0..n), 0..=MAX_EDGES + 1 - n),
                vec(any::<bool>(), n),
            )
        })
        .prop_map(|(n, tree, extra, acc)| {
            let mut pairs: Vec<(usize, usize)> =
                tree.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            pairs.extend(extra);
            assemble(n, &pairs, &acc)
        })
}

/// Follows out-edges from `start`, picking the `choice % outdegree`-th
/// each step and stopping early at a dead end.
pub fn steer_walk(g: &TransitionGraph, start: usize, choices: &[usize]) -> Vec<usize> {
    let mut node = start;
    let mut walk = Vec::new();
    for &c in choices {
        let outs: Vec<usize> = g.out_edges(node).collect();
        if outs.is_empty() {
            break;
        }
        let e = outs[c % outs.len()];
        walk.push(e);
        node = g.edges[e].target;
    }
    walk
}

/// A graph with a suite of up to 25 random walks (numbered, deduplicated).
pub fn arb_graph_and_suite() -> impl Strategy<Value = (TransitionGraph, TestSuite)> {
    (
        arb_graph(),
        vec((any::<usize>(), vec(any::<usize>(), 0..8)), 0..=MAX_CASES),
    )
        .prop_map(|(g, raw)| {
            let cases: Vec<TestCase> = raw
                .iter()
                .map(|(s, choices)| {
                    let start = s % g.nodes.len();
                    let walk = steer_walk(&g, start, choices);
                    TestCase::from_walk(&g, "", start, &walk).expect("steered walks are walks")
                })
                .collect();
            let suite = TestSuite::numbered(cases);
            (g, suite)
        })
}

/// Names an expression generator may use: `x`, `y` (int) and `p` (bool).
pub fn expr_scope() -> crate::expr::Scope {
    use crate::expr::BindingKind::Var;
    crate::expr::Scope::new()
        .with("x", Type::Int, Var)
        .with("y", Type::Int, Var)
        .with("p", Type::Bool, Var)
}

fn int_leaf(names: Vec<&'static str>) -> BoxedStrategy<Expr> {
    prop_oneof![
        (-20i64..=20).prop_map(Expr::Int),
        proptest::sample::select(names).prop_map(|n| Expr::Var(n.to_string())),
    ]
    .boxed()
}

/// Well-typed int expressions over `names`.
pub fn arb_int_expr_over(names: Vec<&'static str>) -> BoxedStrategy<Expr> {
    int_leaf(names)
        .prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::unary(UnaryOp::Neg, e)),
                (
                    proptest::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul]),
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            ]
        })
        .boxed()
}

/// Well-typed bool expressions; int operands range over `ints`, bool
/// variables over `bools`.
pub fn arb_bool_expr_over(
    ints: Vec<&'static str>,
    bools: Vec<&'static str>,
) -> BoxedStrategy<Expr> {
    let cmp = (
        proptest::sample::select(vec![
            BinaryOp::Lt,
            BinaryOp::Le,
            BinaryOp::Gt,
            BinaryOp::Ge,
            BinaryOp::Eq,
            BinaryOp::Ne,
        ]),
        arb_int_expr_over(ints.clone()),
        arb_int_expr_over(ints),
    )
        .prop_map(|(op, l, r)| Expr::binary(op, l, r));
    let mut leaves = vec![any::<bool>().prop_map(Expr::Bool).boxed(), cmp.boxed()];
    if !bools.is_empty() {
        leaves.push(
            proptest::sample::select(bools)
                .prop_map(|n| Expr::Var(n.to_string()))
                .boxed(),
        );
    }
    proptest::strategy::Union::new(leaves)
        .prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::unary(UnaryOp::Not, e)),
                (
                    proptest::sample::select(vec![
                        BinaryOp::And,
                        BinaryOp::Or,
                        BinaryOp::Eq,
                        BinaryOp::Ne
                    ]),
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            ]
        })
        .boxed()
}

/// Well-typed expressions over [`expr_scope`], paired with their type.
pub fn arb_typed_expr() -> impl Strategy<Value = (Expr, Type)> {
    prop_oneof![
        arb_int_expr_over(vec!["x", "y"]).prop_map(|e| (e, Type::Int)),
        arb_bool_expr_over(vec!["x", "y"], vec!["p"]).prop_map(|e| (e, Type::Bool)),
    ]
}

#[derive(Clone, Debug)]
struct RawTransition {
    source: usize,
    target: usize,
    /// 0 = completion, 1 = `tick`, 2 = `put(k)`.
    trigger: usize,
    guard: Option<Expr>,
    action: Option<Expr>,
}

fn arb_raw_transition(n: usize) -> impl Strategy<Value = RawTransition> {
    (0..n, 0..n, 0usize..3).prop_flat_map(|(source, target, trigger)| {
        let ints = if trigger == 2 {
            vec!["x", "k"]
        } else {
            vec!["x"]
        };
        let guard = if trigger == 0 {
            // Completion transitions are always guarded so that several may
            // leave one state.
            arb_bool_expr_over(ints.clone(), vec!["flag"])
                .prop_map(Some)
                .boxed()
        } else {
            proptest::option::of(arb_bool_expr_over(ints.clone(), vec!["flag"])).boxed()
        };
        (
            Just(source),
            Just(target),
            Just(trigger),
            guard,
            proptest::option::of(arb_int_expr_over(ints)),
        )
            .prop_map(|(source, target, trigger, guard, action)| RawTransition {
                source,
                target,
                trigger,
                guard,
                action,
            })
    })
}

/// A flat, structurally valid chart with 1..=8 states, events `tick` and
/// `put(k: int)`, variables `x: int` and `flag: bool`. Reachability is not
/// guaranteed.
pub fn arb_statechart() -> impl Strategy<Value = Statechart> {
    (1usize..=8)
        .prop_flat_map(|n| {
            (
                Just(n),
                vec(arb_raw_transition(n), 0..=12),
                vec(any::<bool>(), n),
                -3i64..=3,
            )
        })
        .prop_map(|(_, raw, acc, x0)| {
            let mut sc = Statechart::new("R");
            sc.vars.push(VarDecl {
                name: "x".into(),
                ty: Type::Int,
                initial: Value::Int(x0),
            });
            sc.vars.push(VarDecl {
                name: "flag".into(),
                ty: Type::Bool,
                initial: Value::Bool(false),
            });
            sc.events.push(EventDecl {
                name: "tick".into(),
                params: Vec::new(),
            });
            sc.events.push(EventDecl {
                name: "put".into(),
                params: vec![Param {
                    name: "k".into(),
                    ty: Type::Int,
                }],
            });
            for (i, &accepting) in acc.iter().enumerate() {
                let mut s = if i == 0 {
                    StateNode::initial(node_name(i))
                } else {
                    StateNode::simple(node_name(i))
                };
                s.accepting = accepting;
                sc.states.push(s);
            }
            for (i, r) in raw.into_iter().enumerate() {
                let mut t = TransitionDef::new(
                    format!("t{}", i + 1),
                    node_name(r.source),
                    node_name(r.target),
                );
                t.trigger = match r.trigger {
                    1 => Some("tick".into()),
                    2 => Some("put".into()),
                    _ => None,
                };
                t.guard = r.guard;
                if let Some(e) = r.action {
                    t.actions.push(Action::Assign {
                        var: "x".into(),
                        expr: e,
                    });
                }
                sc.transitions.push(t);
            }
            sc
        })
}

/// A chart with 1..=6 leaves and 0..=3 composites. Leaf `S0` is the
/// top-level initial state; composite `Ck` always owns leaf `S{k}` so
/// every composite has a child. Transitions are triggered by `tick` and
/// may start or end at composites.
pub fn arb_hierarchical_statechart() -> impl Strategy<Value = Statechart> {
    (1usize..=6, 0usize..=3)
        .prop_flat_map(|(leaves, comps)| {
            let comps = comps.min(leaves.saturating_sub(1));
            let total = leaves + comps;
            (
                Just(leaves),
                Just(comps),
                // Parent choice per leaf (0 = top level, j = composite j).
                vec(0..=comps, leaves),
                // Parent choice per composite, restricted to lower composites.
                (0..comps).map(|k| (0..=k).boxed()).collect::<Vec<_>>(),
                vec((0..total, 0..total), 0..=10),
                vec(any::<bool>(), leaves),
            )
        })
        .prop_map(|(leaves, comps, leaf_parent, comp_parent, edges, acc)| {
            let name = |i: usize| {
                if i < leaves {
                    node_name(i)
                } else {
                    format!("C{}", i - leaves + 1)
                }
            };
            let mut sc = Statechart::new("H");
            sc.events.push(EventDecl {
                name: "tick".into(),
                params: Vec::new(),
            });
            for i in 0..leaves {
                let mut s = if i == 0 {
                    StateNode::initial(node_name(0))
                } else {
                    StateNode::simple(node_name(i))
                };
                s.accepting = acc[i];
                let parent = if i == 0 {
                    0
                } else if i <= comps {
                    i
                } else {
                    leaf_parent[i]
                };
                s.parent = (parent > 0).then(|| format!("C{parent}"));
                sc.states.push(s);
            }
            for k in 1..=comps {
                sc.states.push(StateNode {
                    id: format!("C{k}"),
                    kind: crate::model::StateKind::Composite,
                    parent: (comp_parent[k - 1] > 0).then(|| format!("C{}", comp_parent[k - 1])),
                    initial_child: Some(node_name(k)),
                    accepting: false,
                });
            }
            for (i, (a, b)) in edges.into_iter().enumerate() {
                sc.transitions
                    .push(TransitionDef::new(format!("t{}", i + 1), name(a), name(b)).on("tick"));
            }
            sc
        })
}
