//! Reference semantics for small runs. Keeps the whole history, rebuilds
//! prefixes from it on every access and settles each step by iterating all
//! declarations until nothing changes, with no notion of evaluation order.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use super::expr::{Env, Evaluator, Lookup};
use super::value::{format_params, Value};
use super::{eval_pacing, MonitorError, MonitorReport, RunConfig, Trace, Verdict};
use crate::ast::{Expression, OutputKind, Specification, StreamRef};
use crate::pacing_types::{PacingType, PacingTyping};
use crate::time::{format_rational, next_multiple_after, Rational};
use crate::value_types::{ValueType, ValueTyping};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    /// Some values of a step depend on themselves without delay.
    #[error("no unique model at time {time}: cannot settle {streams:?}")]
    NoModel { time: String, streams: Vec<String> },
    #[error("run exceeds the horizon of {0} steps")]
    HorizonExceeded(usize),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Pending,
    Done(Option<Value>),
}

#[derive(Default)]
struct History {
    times: Vec<Rational>,
    inputs: Vec<Vec<Option<Value>>>,
    values: Vec<Vec<BTreeMap<Vec<Value>, Option<Value>>>>,
}

struct Step<'a> {
    types: &'a ValueTyping,
    hist: &'a History,
    now: Rational,
    inputs: Vec<Option<Value>>,
    alive: Vec<BTreeMap<Vec<Value>, Rational>>,
    spawned: Vec<bool>,
    cur: Vec<BTreeMap<Vec<Value>, Slot>>,
}

impl Step<'_> {
    /// Settled values of an instance since `since`, excluding this step.
    fn past(&self, s: StreamRef, params: &[Value], since: &Rational) -> Vec<(Rational, Value)> {
        let mut out = Vec::new();
        for (j, t) in self.hist.times.iter().enumerate() {
            if t < since {
                continue;
            }
            let v = match s {
                StreamRef::Input(i) => self.hist.inputs[j][i].clone(),
                StreamRef::Output(o) => self.hist.values[j][o].get(params).cloned().flatten(),
            };
            if let Some(v) = v {
                out.push((*t, v));
            }
        }
        out
    }

    /// `None`: not alive. Otherwise the spawn time and this step's slot.
    fn instance(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<(Rational, Slot)>> {
        match s {
            StreamRef::Input(i) => Lookup::Known(Some((Rational::zero(), Slot::Done(self.inputs[i].clone())))),
            StreamRef::Output(o) => match self.alive[o].get(params) {
                Some(since) => Lookup::Known(Some((*since, self.cur[o].get(params).cloned().unwrap_or(Slot::Pending)))),
                None if self.spawned[o] => Lookup::Known(None),
                None => Lookup::Unknown,
            },
        }
    }
}

impl Env for Step<'_> {
    fn stream_type(&self, s: StreamRef) -> &ValueType {
        self.types.stream_type(s)
    }

    fn sync(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>> {
        match self.instance(s, params) {
            Lookup::Unknown | Lookup::Known(Some((_, Slot::Pending))) => Lookup::Unknown,
            Lookup::Known(Some((_, Slot::Done(v)))) => Lookup::Known(v),
            Lookup::Known(None) => Lookup::Known(None),
        }
    }

    fn hold(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>> {
        match self.instance(s, params) {
            Lookup::Unknown | Lookup::Known(Some((_, Slot::Pending))) => Lookup::Unknown,
            Lookup::Known(Some((_, Slot::Done(Some(v))))) => Lookup::Known(Some(v)),
            Lookup::Known(Some((since, Slot::Done(None)))) => {
                Lookup::Known(self.past(s, params, &since).pop().map(|(_, v)| v))
            }
            Lookup::Known(None) => Lookup::Known(None),
        }
    }

    fn offset(&self, s: StreamRef, params: &[Value], n: u32) -> Lookup<Option<Value>> {
        let since = match s {
            StreamRef::Input(_) => Rational::zero(),
            StreamRef::Output(o) => match self.alive[o].get(params) {
                Some(since) => *since,
                // Not alive before this step, so there is no earlier value.
                None => return Lookup::Known(None),
            },
        };
        let past = self.past(s, params, &since);
        let n = n as usize;
        Lookup::Known((n >= 1 && past.len() >= n).then(|| past[past.len() - n].1.clone()))
    }

    fn window(&self, s: StreamRef, params: &[Value], d: &Rational, exact: bool) -> Lookup<Option<Vec<Value>>> {
        let start = self.now - d;
        match self.instance(s, params) {
            Lookup::Unknown | Lookup::Known(Some((_, Slot::Pending))) => Lookup::Unknown,
            Lookup::Known(None) => Lookup::Known(if exact { None } else { Some(Vec::new()) }),
            Lookup::Known(Some((since, Slot::Done(current)))) => {
                if exact && since > start {
                    return Lookup::Known(None);
                }
                let mut vs: Vec<Value> =
                    self.past(s, params, &since).into_iter().filter(|(t, _)| *t > start).map(|(_, v)| v).collect();
                vs.extend(current);
                Lookup::Known(Some(vs))
            }
        }
    }
}

enum Attempt<T> {
    Settled(T),
    Blocked,
}

fn attempt(step: &Step, spec: &Specification, o: usize, params: &[Value], e: &Expression, location: &'static str) -> Result<Attempt<Value>, MonitorError> {
    let mut ev = Evaluator::new(step, params);
    let fault = |message: String, span| MonitorError::Fault {
        time: format_rational(&step.now),
        stream: spec.outputs[o].name.clone(),
        params: format_params(params),
        message,
        span,
    };
    match ev.eval(e).map_err(|(m, span)| fault(m, span))? {
        Lookup::Unknown => Ok(Attempt::Blocked),
        Lookup::Known(Some(v)) => Ok(Attempt::Settled(v)),
        Lookup::Known(None) => Err(MonitorError::SyncAccessFailure {
            time: format_rational(&step.now),
            stream: spec.outputs[o].name.clone(),
            params: format_params(params),
            location,
            span: ev.failed_sync.unwrap_or(e.span),
        }),
    }
}

fn condition(step: &Step, spec: &Specification, o: usize, params: &[Value], e: &Expression, location: &'static str) -> Result<Attempt<bool>, MonitorError> {
    Ok(match attempt(step, spec, o, params, e, location)? {
        Attempt::Settled(Value::Bool(b)) => Attempt::Settled(b),
        Attempt::Settled(other) => {
            return Err(MonitorError::Fault {
                time: format_rational(&step.now),
                stream: spec.outputs[o].name.clone(),
                params: format_params(params),
                message: format!("condition evaluated to {other}"),
                span: e.span,
            })
        }
        Attempt::Blocked => Attempt::Blocked,
    })
}

/// Runs the specification by brute force. Meant for tiny instances only:
/// every access rescans the full history.
pub fn oracle_run(
    spec: &Specification,
    types: &ValueTyping,
    pacing: &PacingTyping,
    trace: &Trace,
    horizon: usize,
    config: &RunConfig,
) -> Result<MonitorReport, OracleError> {
    for w in trace.events.windows(2) {
        if w[1].time <= w[0].time {
            return Err(MonitorError::NonMonotoneTrace {
                previous: format_rational(&w[0].time),
                next: format_rational(&w[1].time),
            }
            .into());
        }
    }
    let mut report = MonitorReport::default();
    let Some(end) = config.end_time.or_else(|| trace.events.last().map(|e| e.time)) else {
        return Ok(report);
    };
    let n = spec.outputs.len();
    let mut hist = History::default();
    let mut alive: Vec<BTreeMap<Vec<Value>, Rational>> = vec![BTreeMap::new(); n];
    let mut next_event = 0;
    let mut last: Option<Rational> = None;

    loop {
        // Candidate times: the next event, global multiples, local deadlines.
        let mut candidates: Vec<Rational> = trace.events.get(next_event).map(|e| e.time).into_iter().collect();
        for (o, t) in pacing.outputs.iter().enumerate() {
            for p in [&t.spawn, &t.eval, &t.close] {
                if let PacingType::GlobalPeriod(p) = p {
                    candidates.push(last.as_ref().map_or_else(Rational::zero, |l| next_multiple_after(l, p)));
                }
            }
            for p in [&t.eval, &t.close] {
                if let (PacingType::LocalPeriod(p), Some(l)) = (p, &last) {
                    for since in alive[o].values() {
                        candidates.push(since + next_multiple_after(&(l - since), p));
                    }
                }
            }
        }
        let Some(now) = candidates.into_iter().min() else { break };
        if now > end {
            break;
        }
        if hist.times.len() >= horizon {
            return Err(OracleError::HorizonExceeded(horizon));
        }
        let mut inputs = vec![None; spec.inputs.len()];
        if trace.events.get(next_event).is_some_and(|e| e.time == now) {
            for (&i, v) in &trace.events[next_event].values {
                if i >= inputs.len() {
                    return Err(MonitorError::UnknownInput(i).into());
                }
                inputs[i] = Some(v.clone());
            }
            next_event += 1;
        }
        let fresh: BTreeSet<usize> = (0..inputs.len()).filter(|&i| inputs[i].is_some()).collect();

        let mut step = Step {
            types,
            hist: &hist,
            now,
            inputs,
            alive: alive.clone(),
            spawned: vec![false; n],
            cur: vec![BTreeMap::new(); n],
        };
        loop {
            let mut progress = false;
            for o in 0..n {
                let out = &spec.outputs[o];
                if !step.spawned[o] {
                    let mut params = None;
                    if eval_pacing(&pacing.outputs[o].spawn, &now, &Rational::zero(), &fresh) {
                        match condition(&step, spec, o, &[], &out.spawn.when, "spawn")? {
                            Attempt::Blocked => continue,
                            Attempt::Settled(false) => {}
                            Attempt::Settled(true) => {
                                let mut ps = Vec::new();
                                for (k, e) in out.spawn.with.iter().enumerate() {
                                    match attempt(&step, spec, o, &[], e, "spawn")? {
                                        Attempt::Blocked => break,
                                        Attempt::Settled(v) => ps.push(
                                            v.conform(types.params[o].get(k).unwrap_or(&ValueType::Top))
                                                .map_err(|m| fault(spec, &now, o, &[], m, e.span))?,
                                        ),
                                    }
                                }
                                if ps.len() < out.spawn.with.len() {
                                    continue;
                                }
                                params = Some(ps);
                            }
                        }
                    }
                    if let Some(ps) = params {
                        step.alive[o].entry(ps).or_insert(now);
                    }
                    step.spawned[o] = true;
                    progress = true;
                }
                let instances: Vec<(Vec<Value>, Rational)> =
                    step.alive[o].iter().map(|(p, s)| (p.clone(), *s)).collect();
                for (params, since) in instances {
                    if step.cur[o].get(&params).is_some_and(|s| *s != Slot::Pending) {
                        continue;
                    }
                    let slot = if !eval_pacing(&pacing.outputs[o].eval, &now, &since, &fresh) {
                        Slot::Done(None)
                    } else {
                        match condition(&step, spec, o, &params, &out.eval.when, "eval when")? {
                            Attempt::Blocked => continue,
                            Attempt::Settled(false) => Slot::Done(None),
                            Attempt::Settled(true) => match attempt(&step, spec, o, &params, &out.eval.with, "eval with")? {
                                Attempt::Blocked => continue,
                                Attempt::Settled(v) => Slot::Done(Some(
                                    v.conform(&types.outputs[o])
                                        .map_err(|m| fault(spec, &now, o, &params, m, out.eval.with.span))?,
                                )),
                            },
                        }
                    };
                    step.cur[o].insert(params, slot);
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        let stuck: Vec<String> = (0..n)
            .filter(|&o| !step.spawned[o] || step.alive[o].keys().any(|p| step.cur[o].get(p).is_none_or(|s| *s == Slot::Pending)))
            .map(|o| spec.outputs[o].name.clone())
            .collect();
        if !stuck.is_empty() {
            return Err(OracleError::NoModel { time: format_rational(&now), streams: stuck });
        }

        let mut closing = Vec::new();
        for (o, out) in spec.outputs.iter().enumerate() {
            if out.close.when.is_const_bool(false) {
                continue;
            }
            for (params, since) in &step.alive[o] {
                if eval_pacing(&pacing.outputs[o].close, &now, since, &fresh) {
                    match condition(&step, spec, o, params, &out.close.when, "close")? {
                        Attempt::Settled(true) => closing.push((o, params.clone())),
                        Attempt::Settled(false) => {}
                        Attempt::Blocked => unreachable!("all values of the step are settled"),
                    }
                }
            }
        }

        for (o, vals) in step.cur.iter().enumerate() {
            for (params, slot) in vals {
                if let Slot::Done(Some(v)) = slot {
                    let verdict = Verdict {
                        time: now,
                        output: o,
                        stream: spec.outputs[o].name.clone(),
                        params: params.clone(),
                        value: v.clone(),
                    };
                    if spec.outputs[o].kind == OutputKind::Trigger {
                        report.verdicts.push(verdict.clone());
                    }
                    if config.dump {
                        report.dump.push(verdict);
                    }
                }
            }
        }

        let Step { inputs, alive: now_alive, cur, .. } = step;
        alive = now_alive;
        for (o, params) in closing {
            alive[o].remove(&params);
        }
        hist.times.push(now);
        hist.inputs.push(inputs);
        hist.values.push(
            cur.into_iter()
                .map(|m| m.into_iter().map(|(p, s)| (p, if let Slot::Done(v) = s { v } else { None })).collect())
                .collect(),
        );
        last = Some(now);
    }
    Ok(report)
}

fn fault(spec: &Specification, now: &Rational, o: usize, params: &[Value], message: String, span: crate::diagnostic::Span) -> MonitorError {
    MonitorError::Fault {
        time: format_rational(now),
        stream: spec.outputs[o].name.clone(),
        params: format_params(params),
        message,
        span,
    }
}
