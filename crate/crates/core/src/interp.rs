//! Executes scenarios against a statechart with variables and guards.
//!
//! Semantics: an event fires the unique enabled transition of the current
//! state triggered by it, then completion transitions fire while exactly
//! one is enabled. Two enabled candidates are a modelling error, as is a
//! completion chain longer than the number of transitions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Lookup, Type, Value};
use crate::model::{flatten, Action, Statechart, TransitionDef};
use crate::testgen::FaultSequence;

/// Variable valuation. Keys are the chart's declared variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Env(pub BTreeMap<String, Value>);

impl Env {
    pub fn initial(sc: &Statechart) -> Env {
        Env(sc
            .vars
            .iter()
            .map(|v| (v.name.clone(), v.initial))
            .collect())
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.get(name).copied()
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        self.get(name).and_then(|v| v.as_int())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arg {
    pub name: String,
    pub value: Value,
}

/// An event occurrence with its actual parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub event: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<Arg>,
}

impl Stimulus {
    pub fn new(event: impl Into<String>) -> Self {
        Stimulus {
            event: event.into(),
            args: Vec::new(),
        }
    }

    pub fn arg(mut self, name: impl Into<String>, value: Value) -> Self {
        self.args.push(Arg {
            name: name.into(),
            value,
        });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub events: Vec<Stimulus>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepCause {
    Event(Stimulus),
    Completion,
}

/// Outcome of one guard evaluation, with each atomic condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardOutcome {
    pub transition: String,
    pub outcome: bool,
    pub atoms: Vec<bool>,
}

/// One fired transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub stimulus: StepCause,
    pub fired: String,
    /// Guards evaluated while choosing this transition.
    pub guard_outcomes: Vec<GuardOutcome>,
    pub env_after: Env,
    pub state_after: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEnd {
    Completed,
    Refused {
        state: String,
        event: String,
    },
    Nondeterminism {
        state: String,
        candidates: Vec<String>,
    },
    Livelock {
        state: String,
    },
    Error {
        message: String,
    },
}

/// Record of one scenario execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub scenario: String,
    pub initial_state: String,
    pub initial_env: Env,
    pub steps: Vec<Step>,
    /// Every guard evaluation in order, including those where nothing fired.
    pub evaluations: Vec<GuardOutcome>,
    pub emitted: Vec<String>,
    pub end: TraceEnd,
    pub final_state: String,
}

impl Trace {
    pub fn fired(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.fired.as_str()).collect()
    }

    pub fn refused(&self) -> bool {
        matches!(self.end, TraceEnd::Refused { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("event `{event}` refused in state {state}")]
    EventRefused { state: String, event: String },
    #[error("several transitions enabled in state {state}: {}", candidates.join(", "))]
    Nondeterminism {
        state: String,
        candidates: Vec<String>,
    },
    #[error("completion transitions keep firing from state {state}")]
    LivelockSuspected { state: String },
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("bad arguments for `{event}`: {message}")]
    BadArguments { event: String, message: String },
    #[error("transition {transition}: {source}")]
    Eval {
        transition: String,
        #[source]
        source: EvalError,
    },
}

struct Frame<'a> {
    env: &'a Env,
    args: &'a [Arg],
}

impl Lookup for Frame<'_> {
    fn get(&self, name: &str) -> Option<Value> {
        self.args
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value)
            .or_else(|| self.env.get(name))
    }
}

/// Interpreter state over a flat chart.
#[derive(Clone, Debug)]
pub struct Machine<'a> {
    sc: &'a Statechart,
    pub state: String,
    pub env: Env,
    pub steps: Vec<Step>,
    pub evaluations: Vec<GuardOutcome>,
    pub emitted: Vec<String>,
}

impl<'a> Machine<'a> {
    /// A machine in `state` with `env`. `sc` must be flat.
    pub fn new(sc: &'a Statechart, state: impl Into<String>, env: Env) -> Self {
        Machine {
            sc,
            state: state.into(),
            env,
            steps: Vec::new(),
            evaluations: Vec::new(),
            emitted: Vec::new(),
        }
    }

    fn eval_guard(&mut self, t: &TransitionDef, args: &[Arg]) -> Result<bool, InterpError> {
        let Some(guard) = &t.guard else {
            return Ok(true);
        };
        let frame = Frame {
            env: &self.env,
            args,
        };
        let eval = |e: &Expr| -> Result<bool, InterpError> {
            e.eval(&frame)
                .map_err(|source| InterpError::Eval {
                    transition: t.id.clone(),
                    source,
                })?
                .as_bool()
                .ok_or(InterpError::Eval {
                    transition: t.id.clone(),
                    source: EvalError::TypeMismatch(Type::Bool),
                })
        };
        let outcome = eval(guard)?;
        let atoms = guard
            .atoms()
            .into_iter()
            .map(eval)
            .collect::<Result<Vec<_>, _>>()?;
        self.evaluations.push(GuardOutcome {
            transition: t.id.clone(),
            outcome,
            atoms,
        });
        Ok(outcome)
    }

    /// Evaluates the guards of `candidates`, returning the enabled ones.
    fn enabled(
        &mut self,
        candidates: &[&'a TransitionDef],
        args: &[Arg],
    ) -> Result<(Vec<&'a TransitionDef>, Vec<GuardOutcome>), InterpError> {
        let mark = self.evaluations.len();
        let mut on = Vec::new();
        for &t in candidates {
            if self.eval_guard(t, args)? {
                on.push(t);
            }
        }
        Ok((on, self.evaluations[mark..].to_vec()))
    }

    fn fire(
        &mut self,
        t: &TransitionDef,
        cause: StepCause,
        outcomes: Vec<GuardOutcome>,
    ) -> Result<(), InterpError> {
        let args: &[Arg] = match &cause {
            StepCause::Event(s) => &s.args,
            StepCause::Completion => &[],
        };
        for a in &t.actions {
            match a {
                Action::Assign { var, expr } => {
                    let v = expr
                        .eval(&Frame {
                            env: &self.env,
                            args,
                        })
                        .map_err(|source| InterpError::Eval {
                            transition: t.id.clone(),
                            source,
                        })?;
                    self.env.0.insert(var.clone(), v);
                }
                Action::Emit(sig) => self.emitted.push(sig.clone()),
            }
        }
        self.state = t.target.clone();
        self.steps.push(Step {
            stimulus: cause,
            fired: t.id.clone(),
            guard_outcomes: outcomes,
            env_after: self.env.clone(),
            state_after: self.state.clone(),
        });
        Ok(())
    }

    /// Fires enabled completion transitions until none is enabled.
    pub fn settle(&mut self) -> Result<(), InterpError> {
        let limit = self.sc.transitions.len();
        let mut fired = 0;
        loop {
            let candidates: Vec<&TransitionDef> = self
                .sc
                .outgoing(&self.state)
                .filter(|t| t.is_completion())
                .collect();
            if candidates.is_empty() {
                return Ok(());
            }
            let (on, outcomes) = self.enabled(&candidates, &[])?;
            match on.as_slice() {
                [] => return Ok(()),
                [t] => {
                    if fired >= limit {
                        return Err(InterpError::LivelockSuspected {
                            state: self.state.clone(),
                        });
                    }
                    self.fire(t, StepCause::Completion, outcomes)?;
                    fired += 1;
                }
                many => {
                    return Err(InterpError::Nondeterminism {
                        state: self.state.clone(),
                        candidates: many.iter().map(|t| t.id.clone()).collect(),
                    })
                }
            }
        }
    }

    fn check_args(&self, stim: &Stimulus) -> Result<(), InterpError> {
        let decl = self
            .sc
            .event(&stim.event)
            .ok_or_else(|| InterpError::UnknownEvent(stim.event.clone()))?;
        let bad = |message: String| InterpError::BadArguments {
            event: stim.event.clone(),
            message,
        };
        for p in &decl.params {
            let given: Vec<&Arg> = stim.args.iter().filter(|a| a.name == p.name).collect();
            match given.as_slice() {
                [a] if a.value.ty() == p.ty => {}
                [a] => {
                    return Err(bad(format!(
                        "`{}` must be {}, got {}",
                        p.name, p.ty, a.value
                    )))
                }
                [] => return Err(bad(format!("missing `{}`", p.name))),
                _ => return Err(bad(format!("`{}` given twice", p.name))),
            }
        }
        if let Some(a) = stim
            .args
            .iter()
            .find(|a| !decl.params.iter().any(|p| p.name == a.name))
        {
            return Err(bad(format!("unknown parameter `{}`", a.name)));
        }
        Ok(())
    }

    /// Processes one event followed by the completion closure.
    pub fn dispatch(&mut self, stim: &Stimulus) -> Result<(), InterpError> {
        self.check_args(stim)?;
        let candidates: Vec<&TransitionDef> = self
            .sc
            .outgoing(&self.state)
            .filter(|t| t.trigger.as_deref() == Some(stim.event.as_str()))
            .collect();
        let (on, outcomes) = self.enabled(&candidates, &stim.args)?;
        match on.as_slice() {
            [] => Err(InterpError::EventRefused {
                state: self.state.clone(),
                event: stim.event.clone(),
            }),
            [t] => {
                self.fire(t, StepCause::Event(stim.clone()), outcomes)?;
                self.settle()
            }
            many => Err(InterpError::Nondeterminism {
                state: self.state.clone(),
                candidates: many.iter().map(|t| t.id.clone()).collect(),
            }),
        }
    }
}

/// Result of [`step`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutput {
    pub state: String,
    pub env: Env,
    pub steps: Vec<Step>,
    pub evaluations: Vec<GuardOutcome>,
    pub emitted: Vec<String>,
}

/// Applies one event in `state` under `env`, including the completion
/// closure.
pub fn step(
    sc: &Statechart,
    state: &str,
    env: &Env,
    stim: &Stimulus,
) -> Result<StepOutput, InterpError> {
    let flat = flatten(sc);
    if flat.state(state).is_none() {
        return Err(InterpError::UnknownState(state.to_string()));
    }
    let mut m = Machine::new(&flat, state, env.clone());
    m.dispatch(stim)?;
    Ok(StepOutput {
        state: m.state,
        env: m.env,
        steps: m.steps,
        evaluations: m.evaluations,
        emitted: m.emitted,
    })
}

fn end_of(err: InterpError) -> TraceEnd {
    match err {
        InterpError::EventRefused { state, event } => TraceEnd::Refused { state, event },
        InterpError::Nondeterminism { state, candidates } => {
            TraceEnd::Nondeterminism { state, candidates }
        }
        InterpError::LivelockSuspected { state } => TraceEnd::Livelock { state },
        other => TraceEnd::Error {
            message: other.to_string(),
        },
    }
}

/// Runs a scenario from the initial state and declared initial values.
/// Execution stops at the first refused event or error; the partial trace
/// records how it ended.
pub fn run_scenario(sc: &Statechart, scn: &Scenario) -> Trace {
    let flat = flatten(sc);
    let initial_state = flat
        .initial_state()
        .map(|s| s.id.clone())
        .unwrap_or_default();
    let initial_env = Env::initial(&flat);
    let mut m = Machine::new(&flat, initial_state.clone(), initial_env.clone());
    let mut end = TraceEnd::Completed;
    if let Err(e) = m.settle() {
        end = end_of(e);
    } else {
        for stim in &scn.events {
            if let Err(e) = m.dispatch(stim) {
                end = end_of(e);
                break;
            }
        }
    }
    Trace {
        scenario: scn.name.clone(),
        initial_state,
        initial_env,
        final_state: m.state.clone(),
        steps: m.steps,
        evaluations: m.evaluations,
        emitted: m.emitted,
        end,
    }
}

const INT_DOMAIN: [i64; 11] = [0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5];
const SEARCH_BUDGET: usize = 100_000;

fn candidate_args(sc: &Statechart, event: &str) -> Vec<Vec<Arg>> {
    let Some(decl) = sc.event(event) else {
        return Vec::new();
    };
    let ints: &[i64] = if decl.params.len() > 3 {
        &INT_DOMAIN[..3]
    } else {
        &INT_DOMAIN
    };
    let mut out: Vec<Vec<Arg>> = vec![Vec::new()];
    for p in &decl.params {
        let values: Vec<Value> = match p.ty {
            Type::Int => ints.iter().map(|&v| Value::Int(v)).collect(),
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(Arg {
                        name: p.name.clone(),
                        value: *v,
                    });
                    next
                })
            })
            .collect();
    }
    out
}

/// Searches small parameter values for a list of events whose execution
/// fires exactly `edges` from the initial state. Returns `None` when no
/// such input exists within the search domain (for example when the last
/// state is always left by a completion transition).
pub fn realize_sequence(sc: &Statechart, edges: &[String]) -> Option<Vec<Stimulus>> {
    realize(sc, edges, false)
}

/// Like [`realize_sequence`], but completion transitions may keep firing
/// after the last event. Used for start sequences ending in a transient
/// state, where no input can leave the machine resting there.
pub fn realize_events(sc: &Statechart, edges: &[String]) -> Option<Vec<Stimulus>> {
    realize(sc, edges, false).or_else(|| realize(sc, edges, true))
}

fn realize(sc: &Statechart, edges: &[String], overrun: bool) -> Option<Vec<Stimulus>> {
    let flat = flatten(sc);
    let init = flat.initial_state()?.id.clone();
    let mut m = Machine::new(&flat, init, Env::initial(&flat));
    m.settle().ok()?;
    let fired: Vec<&str> = m.steps.iter().map(|s| s.fired.as_str()).collect();
    if !edges
        .iter()
        .map(String::as_str)
        .collect::<Vec<_>>()
        .starts_with(&fired)
    {
        return None;
    }
    let start = fired.len();

    fn search(
        sc: &Statechart,
        m: &Machine<'_>,
        idx: usize,
        edges: &[String],
        out: &mut Vec<Stimulus>,
        budget: &mut usize,
        overrun: bool,
    ) -> bool {
        if idx >= edges.len() {
            return true;
        }
        let Some(event) = sc.transition(&edges[idx]).and_then(|t| t.trigger.clone()) else {
            return false;
        };
        for args in candidate_args(sc, &event) {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let stim = Stimulus {
                event: event.clone(),
                args,
            };
            let mut next = m.clone();
            let before = next.steps.len();
            if next.dispatch(&stim).is_err() {
                continue;
            }
            let fired: Vec<&String> = next.steps[before..].iter().map(|s| &s.fired).collect();
            let fits = (overrun || fired.len() <= edges.len() - idx)
                && fired.len().min(edges.len() - idx) > 0
                && fired.iter().zip(&edges[idx..]).all(|(a, b)| *a == b);
            if !fits {
                continue;
            }
            out.push(stim);
            if search(sc, &next, idx + fired.len(), edges, out, budget, overrun) {
                return true;
            }
            out.pop();
        }
        false
    }

    let mut out = Vec::new();
    let mut budget = SEARCH_BUDGET;
    search(&flat, &m, start, edges, &mut out, &mut budget, overrun).then_some(out)
}

/// Events for the start sequence followed by the faulty event, whose
/// parameters take their zero values. When the start sequence ends in a
/// transient state the machine may already have moved on by the time the
/// faulty event arrives. `None` when the start sequence cannot be driven
/// at all.
pub fn fault_scenario(sc: &Statechart, fs: &FaultSequence) -> Option<Scenario> {
    let mut events = realize_events(sc, &fs.start_seq)?;
    let mut fault = Stimulus::new(fs.fault.event.clone());
    if let Some(decl) = sc.event(&fs.fault.event) {
        for p in &decl.params {
            fault = fault.arg(p.name.clone(), Value::default_of(p.ty));
        }
    }
    events.push(fault);
    Some(Scenario {
        name: fs.id.clone(),
        events,
    })
}
