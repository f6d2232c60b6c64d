//! Test generation from statechart models.
//!
//! A model is parsed from the DSL ([`dsl::parse_model`]), flattened into a
//! [`graph::TransitionGraph`], and then fed to the generators in
//! [`testgen`]. Suites are measured with [`coverage`] and reduced with
//! [`minimize`]. [`interp`] executes scenarios against the model, guards
//! and actions included.

pub mod coverage;
pub mod document;
pub mod dsl;
pub mod expr;
pub mod graph;
pub mod interp;
pub mod minimize;
pub mod model;
pub mod testgen;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use coverage::{measure_suite, measure_trace, measure_traces, CoverageReport, Criterion};
pub use dsl::{format_testcase, parse_model, SourceError};
pub use graph::{build_dual, build_graph, transition_pairs, TransitionGraph};
pub use interp::{run_scenario, Scenario, Trace};
pub use minimize::{compute_nc, covers, effective_set, setcover_reduce};
pub use model::{flatten, validate_statechart, Statechart};
pub use testgen::{
    embed_complete, fault_suite, fault_transitions, k_transition_suite, maximal_paths,
    prefix_suite, TestCase, TestSuite,
};
