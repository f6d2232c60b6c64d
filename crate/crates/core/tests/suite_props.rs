use std::collections::BTreeSet;

use proptest::prelude::*;
use stategen_core::coverage::{measure_cases, measure_suite, Criterion};
use stategen_core::format_testcase;
use stategen_core::graph::TransitionGraph;
use stategen_core::minimize::{compute_nc, covers, effective_set, setcover_reduce};
use stategen_core::testgen::{
    k_transition_suite, maximal_paths, prefix_suite, TestCase, TestSuite,
};
use stategen_core::testkit::{arb_graph, arb_graph_and_suite, arb_reachable_graph};

fn is_walk(g: &TransitionGraph, tc: &TestCase) -> bool {
    let idx = g.resolve_edges(&tc.edges).unwrap();
    let states_ok = tc.states.len() == tc.edges.len() + 1
        && tc.states[0] == tc.initial_state
        && idx.iter().enumerate().all(|(i, &e)| {
            g.nodes[g.edges[e].source] == tc.states[i]
                && g.nodes[g.edges[e].target] == tc.states[i + 1]
        });
    states_ok && g.is_walk(&idx)
}

fn covered_sets(s: &TestSuite, g: &TransitionGraph) -> Vec<BTreeSet<String>> {
    let r = measure_suite(s, g).unwrap();
    Criterion::STRUCTURAL
        .iter()
        .map(|&c| r.get(c).covered.iter().cloned().collect())
        .collect()
}

fn contains(big: &[String], small: &[String]) -> bool {
    big.windows(small.len()).any(|w| w == small)
}

/// Cases not covered by any other case, found by direct pairwise search.
fn maximal_elements(s: &TestSuite) -> Vec<String> {
    s.cases()
        .iter()
        .filter(|a| {
            !s.cases().iter().any(|b| {
                if a.edges.is_empty() {
                    !b.edges.is_empty() && b.states.contains(&a.initial_state)
                } else {
                    a.edges != b.edges && contains(&b.edges, &a.edges)
                }
            })
        })
        .map(|c| c.id.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_cases_are_walks(g in arb_graph(), k in 1usize..4) {
        for tc in prefix_suite(&g).cases() {
            prop_assert!(is_walk(&g, tc), "{}", format_testcase(tc));
        }
        for tc in maximal_paths(&g).iter().chain(&k_transition_suite(&g, k)) {
            prop_assert!(is_walk(&g, tc), "{}", format_testcase(tc));
        }
    }

    #[test]
    fn prefix_suite_shape(g in arb_reachable_graph()) {
        let suite = prefix_suite(&g);
        let report = measure_suite(&suite, &g).unwrap();
        prop_assert_eq!(report.transition.ratio(), 1.0);
        prop_assert_eq!(report.path.ratio(), 1.0);
        for p in maximal_paths(&g) {
            prop_assert!(suite.cases().iter().any(|c| c.edges == p.edges));
        }
        prop_assert_eq!(prefix_suite(&g), suite);
    }

    #[test]
    fn k_suites_nest(g in arb_graph(), k in 2usize..4) {
        let one: BTreeSet<Vec<String>> = k_transition_suite(&g, 1).into_iter().map(|c| c.edges).collect();
        let all: BTreeSet<Vec<String>> = g.edges.iter().map(|e| vec![e.id.clone()]).collect();
        prop_assert_eq!(one, all);
        let lower: BTreeSet<Vec<String>> = k_transition_suite(&g, k - 1).into_iter().map(|c| c.edges).collect();
        let upper = k_transition_suite(&g, k);
        for tc in upper.iter().filter(|c| c.len() == k) {
            for w in tc.edges.windows(k - 1) {
                prop_assert!(lower.contains(w));
            }
        }
        prop_assert_eq!(k_transition_suite(&g, k), upper);
    }

    #[test]
    fn text_forms_are_injective(g in arb_graph(), raw in proptest::collection::vec((any::<usize>(), proptest::collection::vec(any::<usize>(), 0..6)), 2)) {
        let cases: Vec<TestCase> = raw.iter().map(|(s, ch)| {
            let start = s % g.nodes.len();
            let walk = stategen_core::testkit::steer_walk(&g, start, ch);
            TestCase::from_walk(&g, "", start, &walk).unwrap()
        }).collect();
        if format_testcase(&cases[0]) == format_testcase(&cases[1]) {
            prop_assert_eq!(&cases[0].edges, &cases[1].edges);
            prop_assert_eq!(&cases[0].initial_state, &cases[1].initial_state);
        }
    }

    #[test]
    fn covers_is_a_strict_partial_order((_, s) in arb_graph_and_suite()) {
        let cs = s.cases();
        for a in cs {
            prop_assert!(!covers(a, a));
            for b in cs {
                if covers(a, b) {
                    prop_assert!(!covers(b, a));
                    prop_assert!(a.len() < b.len());
                    for c in cs {
                        if covers(b, c) {
                            prop_assert!(covers(a, c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn effective_set_dominates((g, s) in arb_graph_and_suite()) {
        let e = effective_set(&s);
        let ids: Vec<String> = e.cases().iter().map(|c| c.id.clone()).collect();
        prop_assert_eq!(&ids, &maximal_elements(&s));
        for tc in s.cases() {
            if e.get(&tc.id).is_none() {
                prop_assert!(e.cases().iter().any(|m| covers(tc, m)), "{} is not covered", tc.id);
            }
        }
        let nc = compute_nc(&s);
        for (id, by) in nc.iter() {
            prop_assert_eq!(by.is_empty(), e.get(id).is_some());
        }
        prop_assert_eq!(covered_sets(&e, &g), covered_sets(&s, &g));
    }

    #[test]
    fn effective_prefix_suite_is_made_of_maximal_paths(g in arb_reachable_graph()) {
        let suite = prefix_suite(&g);
        let e = effective_set(&suite);
        let ids: Vec<String> = e.cases().iter().map(|c| c.id.clone()).collect();
        prop_assert_eq!(ids, maximal_elements(&suite));
        let paths: Vec<Vec<String>> = maximal_paths(&g).into_iter().map(|p| p.edges).collect();
        for tc in e.cases() {
            prop_assert!(paths.contains(&tc.edges));
        }
    }

    #[test]
    fn adding_a_case_never_loses_coverage((g, s) in arb_graph_and_suite()) {
        let cases = s.cases();
        if let Some((last, rest)) = cases.split_last() {
            let before = measure_cases(rest, &g).unwrap();
            let after = measure_cases(cases, &g).unwrap();
            for c in Criterion::STRUCTURAL {
                let b: BTreeSet<&String> = before.get(c).covered.iter().collect();
                let a: BTreeSet<&String> = after.get(c).covered.iter().collect();
                prop_assert!(b.is_subset(&a), "{c} shrank after adding {}", last.id);
            }
        }
    }

    #[test]
    fn setcover_preserves_chosen_criteria((g, s) in arb_graph_and_suite(), mask in 1u8..16) {
        let criteria: Vec<Criterion> = Criterion::STRUCTURAL.iter().enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0).map(|(_, c)| *c).collect();
        let reduced = setcover_reduce(&s, &g, &criteria).unwrap();
        prop_assert!(reduced.len() <= s.len());
        let full = measure_suite(&s, &g).unwrap();
        let got = measure_suite(&reduced, &g).unwrap();
        for c in criteria {
            prop_assert_eq!(&got.get(c).covered, &full.get(c).covered);
        }
        prop_assert_eq!(setcover_reduce(&s, &g, &Criterion::STRUCTURAL).unwrap(), setcover_reduce(&s, &g, &Criterion::STRUCTURAL).unwrap());
    }
}
