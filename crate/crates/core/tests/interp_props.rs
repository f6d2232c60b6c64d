use std::collections::BTreeSet;

use proptest::prelude::*;
use stategen_core::expr::Value;
use stategen_core::graph::build_graph;
use stategen_core::interp::{run_scenario, step, Env, InterpError, Scenario, Stimulus};
use stategen_core::model::Statechart;
use stategen_core::parse_model;
use stategen_core::testgen::fault_transitions;
use stategen_core::testkit::arb_statechart;

fn rtvm() -> Statechart {
    parse_model(include_str!("../../../fixtures/rtvm.scm")).unwrap()
}

fn stimulus(sc: &Statechart, event: &str, arg: i64) -> Stimulus {
    let mut s = Stimulus::new(event);
    for p in &sc.event(event).unwrap().params {
        s = s.arg(p.name.clone(), Value::Int(arg));
    }
    s
}

/// Random RTVM inputs: event index and argument.
fn arb_rtvm_scenario() -> impl Strategy<Value = Scenario> {
    let names = [
        "powerOn",
        "selectTicket",
        "insertCash",
        "dispense",
        "printTicket",
    ];
    proptest::collection::vec((0usize..5, -3i64..=600), 0..12).prop_map(move |raw| {
        let sc = rtvm();
        Scenario {
            name: "random".into(),
            events: raw
                .into_iter()
                .map(|(e, v)| stimulus(&sc, names[e], v))
                .collect(),
        }
    })
}

fn arb_chart_and_scenario() -> impl Strategy<Value = (Statechart, Scenario)> {
    (
        arb_statechart(),
        proptest::collection::vec((any::<bool>(), -4i64..=4), 0..8),
    )
        .prop_map(|(sc, raw)| {
            let events = raw
                .into_iter()
                .map(|(tick, k)| {
                    if tick {
                        Stimulus::new("tick")
                    } else {
                        Stimulus::new("put").arg("k", Value::Int(k))
                    }
                })
                .collect();
            (
                sc,
                Scenario {
                    name: "random".into(),
                    events,
                },
            )
        })
}

fn fired_is_walk(sc: &Statechart, fired: &[&str]) -> bool {
    let g = build_graph(sc).unwrap();
    let idx = g.resolve_edges(fired).unwrap();
    idx.first().is_none_or(|&e| g.edges[e].source == g.initial) && g.is_walk(&idx)
}

#[test]
fn static_and_dynamic_refusal_agree() {
    let sc = rtvm();
    let faults: BTreeSet<(String, String)> = fault_transitions(&sc)
        .into_iter()
        .map(|f| (f.state, f.event))
        .collect();
    assert_eq!(faults.len(), 25);
    let env = Env::initial(&sc);
    for s in &sc.states {
        for e in &sc.events {
            for arg in [-1, 0, 2, 400] {
                let refused = matches!(
                    step(&sc, &s.id, &env, &stimulus(&sc, &e.name, arg)),
                    Err(InterpError::EventRefused { .. })
                );
                assert_eq!(
                    refused,
                    faults.contains(&(s.id.clone(), e.name.clone())),
                    "{} {}",
                    s.id,
                    e.name
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rtvm_change_is_amount_minus_total(scn in arb_rtvm_scenario()) {
        let t = run_scenario(&rtvm(), &scn);
        let holds = |env: &Env| env.int("change") == Some(env.int("amount").unwrap() - env.int("total").unwrap());
        prop_assert!(holds(&t.initial_env));
        for s in &t.steps {
            prop_assert!(holds(&s.env_after), "after {}", s.fired);
        }
        prop_assert!(fired_is_walk(&rtvm(), &t.fired()));
    }

    #[test]
    fn traces_are_walks_and_deterministic((sc, scn) in arb_chart_and_scenario()) {
        let a = run_scenario(&sc, &scn);
        let b = run_scenario(&sc, &scn);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert!(fired_is_walk(&sc, &a.fired()));
        if let Some(last) = a.steps.last() {
            prop_assert_eq!(&last.state_after, &a.final_state);
        }
    }
}
