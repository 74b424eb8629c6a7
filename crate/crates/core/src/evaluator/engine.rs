use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;

use super::expr::{Env, Evaluator, Lookup};
use super::value::{format_params, Value};
use super::{eval_pacing, MonitorError, MonitorReport, RunConfig, Trace, Verdict};
use crate::ast::{ExprKind, Expression, Location, OutputKind, Specification, StreamRef};
use crate::pacing_types::{PacingType, PacingTyping};
use crate::time::{format_rational, next_multiple_after, Rational};
use crate::value_types::{ValueType, ValueTyping};

#[derive(Clone, Debug)]
struct Instance {
    since: Rational,
    prefix: VecDeque<(Rational, Value)>,
}

/// How much history a stream must keep: entries newer than `window` and at
/// least the last `count` entries.
#[derive(Clone, Debug)]
struct Retention {
    window: Rational,
    count: usize,
}

/// The incremental monitor. Each step ingests inputs, then spawns and
/// evaluates outputs in dependency order, then applies closes, so a close
/// never affects evaluation in its own step.
#[derive(Clone, Debug)]
pub struct Monitor<'a> {
    spec: &'a Specification,
    types: &'a ValueTyping,
    pacing: &'a PacingTyping,
    config: RunConfig,
    order: Vec<usize>,
    inputs: Vec<VecDeque<(Rational, Value)>>,
    outputs: Vec<BTreeMap<Vec<Value>, Instance>>,
    retention: Vec<Retention>,
    periods: Vec<Rational>,
    now: Option<Rational>,
    report: MonitorReport,
}

/// Outputs ordered so that every zero-delay access (sync, hold, window;
/// outside close clauses) reads an output that was evaluated before.
fn evaluation_order(spec: &Specification, reverse: bool) -> Vec<usize> {
    let n = spec.outputs.len();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (o, out) in spec.outputs.iter().enumerate() {
        for (loc, e) in out.expressions() {
            if loc == Location::Close {
                continue;
            }
            e.walk(&mut |sub| {
                if let ExprKind::Sync { target: StreamRef::Output(t), .. }
                | ExprKind::Hold { target: StreamRef::Output(t), .. }
                | ExprKind::Aggregate { target: StreamRef::Output(t), .. } = &sub.kind
                {
                    if *t != o && *t < n {
                        deps[o].insert(*t);
                    }
                }
            });
        }
    }
    let mut indegree: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (o, ds) in deps.iter().enumerate() {
        for &d in ds {
            users[d].push(o);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&o| indegree[o] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(o) = if reverse { ready.pop_last() } else { ready.pop_first() } {
        order.push(o);
        for &u in &users[o] {
            indegree[u] -= 1;
            if indegree[u] == 0 {
                ready.insert(u);
            }
        }
    }
    // Only reachable for specifications that bypassed the checker.
    order.extend((0..n).filter(|o| !order.contains(o)).collect::<Vec<_>>());
    order
}

fn retention(spec: &Specification) -> Vec<Retention> {
    let idx = |s: StreamRef| match s {
        StreamRef::Input(i) => i,
        StreamRef::Output(o) => spec.inputs.len() + o,
    };
    let mut r = vec![Retention { window: Rational::zero(), count: 1 }; spec.inputs.len() + spec.outputs.len()];
    for out in &spec.outputs {
        for (_, e) in out.expressions() {
            e.walk(&mut |sub| match &sub.kind {
                ExprKind::Offset { target, offset, .. } => {
                    let k = &mut r[idx(*target)];
                    k.count = k.count.max(*offset as usize + 1);
                }
                ExprKind::Aggregate { target, window, .. } => {
                    let k = &mut r[idx(*target)];
                    k.window = k.window.max(*window);
                }
                _ => {}
            });
        }
    }
    r
}

fn trim(prefix: &mut VecDeque<(Rational, Value)>, keep: &Retention, now: &Rational) {
    while prefix.len() > keep.count && prefix.front().is_some_and(|(t, _)| *t <= now - keep.window) {
        prefix.pop_front();
    }
}

impl<'a> Monitor<'a> {
    pub fn new(spec: &'a Specification, types: &'a ValueTyping, pacing: &'a PacingTyping, config: RunConfig) -> Self {
        let mut periods: Vec<Rational> = Vec::new();
        for t in &pacing.outputs {
            for p in [&t.spawn, &t.eval, &t.close] {
                if let PacingType::GlobalPeriod(p) = p {
                    if !periods.contains(p) {
                        periods.push(*p);
                    }
                }
            }
        }
        Monitor {
            spec,
            types,
            pacing,
            order: evaluation_order(spec, config.reverse_ties),
            config,
            inputs: vec![VecDeque::new(); spec.inputs.len()],
            outputs: vec![BTreeMap::new(); spec.outputs.len()],
            retention: retention(spec),
            periods,
            now: None,
            report: MonitorReport::default(),
        }
    }

    pub fn report(&self) -> &MonitorReport {
        &self.report
    }

    pub fn into_report(self) -> MonitorReport {
        self.report
    }

    /// Parameters of the currently alive instances of an output.
    pub fn alive(&self, output: usize) -> Vec<Vec<Value>> {
        self.outputs[output].keys().cloned().collect()
    }

    /// Total number of alive output instances.
    pub fn instance_count(&self) -> usize {
        self.outputs.iter().map(BTreeMap::len).sum()
    }

    /// Values an instance currently retains, oldest first.
    pub fn retained(&self, output: usize, params: &[Value]) -> Vec<(Rational, Value)> {
        self.outputs[output].get(params).map(|i| i.prefix.iter().cloned().collect()).unwrap_or_default()
    }

    /// The next periodic deadline after the current step, or the first one
    /// from time 0 before any step ran.
    pub fn next_deadline(&self) -> Option<Rational> {
        let mut best: Option<Rational> = None;
        let mut offer = |t: Rational| {
            if best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        };
        for p in &self.periods {
            offer(match &self.now {
                None => Rational::zero(),
                Some(t) => next_multiple_after(t, p),
            });
        }
        let Some(now) = &self.now else { return best };
        for (o, t) in self.pacing.outputs.iter().enumerate() {
            for p in [&t.eval, &t.close] {
                if let PacingType::LocalPeriod(p) = p {
                    for inst in self.outputs[o].values() {
                        offer(&inst.since + next_multiple_after(&(now - &inst.since), p));
                    }
                }
            }
        }
        best
    }

    /// Replays a whole trace, stepping through periodic deadlines in between.
    pub fn run(mut self, trace: &Trace) -> Result<MonitorReport, MonitorError> {
        for w in trace.events.windows(2) {
            if w[1].time <= w[0].time {
                return Err(MonitorError::NonMonotoneTrace {
                    previous: format_rational(&w[0].time),
                    next: format_rational(&w[1].time),
                });
            }
        }
        let Some(end) = self.config.end_time.or_else(|| trace.events.last().map(|e| e.time)) else {
            return Ok(self.report);
        };
        let empty = BTreeMap::new();
        let mut events = trace.events.iter().peekable();
        loop {
            let next_event = events.peek().map(|e| e.time);
            let t = match (next_event, self.next_deadline()) {
                (Some(a), Some(b)) => a.min(b),
                (a, b) => match a.or(b) {
                    Some(t) => t,
                    None => break,
                },
            };
            if t > end {
                break;
            }
            if next_event == Some(t) {
                let e = events.next().expect("peeked");
                self.step(t, &e.values)?;
            } else {
                self.step(t, &empty)?;
            }
        }
        Ok(self.report)
    }

    fn fault(&self, o: usize, params: &[Value], (message, span): (String, crate::diagnostic::Span)) -> MonitorError {
        MonitorError::Fault {
            time: self.now.as_ref().map(format_rational).unwrap_or_default(),
            stream: self.spec.outputs[o].name.clone(),
            params: format_params(params),
            message,
            span,
        }
    }

    /// Evaluates an expression that must produce a value.
    fn value(&self, o: usize, params: &[Value], e: &Expression, location: &'static str) -> Result<Value, MonitorError> {
        let mut ev = Evaluator::new(self, params);
        match ev.eval(e).map_err(|f| self.fault(o, params, f))? {
            Lookup::Known(Some(v)) => Ok(v),
            Lookup::Known(None) => Err(MonitorError::SyncAccessFailure {
                time: self.now.as_ref().map(format_rational).unwrap_or_default(),
                stream: self.spec.outputs[o].name.clone(),
                params: format_params(params),
                location,
                span: ev.failed_sync.unwrap_or(e.span),
            }),
            Lookup::Unknown => unreachable!("the engine always knows stream values"),
        }
    }

    fn condition(&self, o: usize, params: &[Value], e: &Expression, location: &'static str) -> Result<bool, MonitorError> {
        if let ExprKind::Constant { value: crate::ast::Literal::Bool(b), .. } = &e.kind {
            return Ok(*b);
        }
        match self.value(o, params, e, location)? {
            Value::Bool(b) => Ok(b),
            other => Err(self.fault(o, params, (format!("condition evaluated to {other}"), e.span))),
        }
    }

    /// Processes one step at `time` with the given input values.
    pub fn step(&mut self, time: Rational, values: &BTreeMap<usize, Value>) -> Result<(), MonitorError> {
        if let Some(prev) = &self.now {
            if time <= *prev {
                return Err(MonitorError::NonMonotoneTrace {
                    previous: format_rational(prev),
                    next: format_rational(&time),
                });
            }
        }
        if let Some(&i) = values.keys().find(|&&i| i >= self.inputs.len()) {
            return Err(MonitorError::UnknownInput(i));
        }
        self.now = Some(time);
        for (&i, v) in values {
            self.inputs[i].push_back((time, v.clone()));
        }
        let fresh: BTreeSet<usize> = values.keys().copied().collect();
        let mut produced = Vec::new();

        for k in 0..self.order.len() {
            let o = self.order[k];
            self.spawn(o, &time, &fresh)?;
            self.evaluate(o, &time, &fresh, &mut produced)?;
        }

        let mut closing = Vec::new();
        for (o, out) in self.spec.outputs.iter().enumerate() {
            if out.close.when.is_const_bool(false) {
                continue;
            }
            for (params, inst) in &self.outputs[o] {
                if eval_pacing(&self.pacing.outputs[o].close, &time, &inst.since, &fresh)
                    && self.condition(o, params, &out.close.when, "close")?
                {
                    closing.push((o, params.clone()));
                }
            }
        }
        for (o, params) in closing {
            self.outputs[o].remove(&params);
        }

        produced.sort_by(|a: &Verdict, b: &Verdict| (a.output, &a.params).cmp(&(b.output, &b.params)));
        for v in produced {
            if self.spec.outputs[v.output].kind == OutputKind::Trigger {
                self.report.verdicts.push(v.clone());
            }
            if self.config.dump {
                self.report.dump.push(v);
            }
        }

        let n_in = self.inputs.len();
        for (i, prefix) in self.inputs.iter_mut().enumerate() {
            trim(prefix, &self.retention[i], &time);
        }
        for (o, instances) in self.outputs.iter_mut().enumerate() {
            for inst in instances.values_mut() {
                trim(&mut inst.prefix, &self.retention[n_in + o], &time);
            }
        }
        Ok(())
    }

    fn spawn(&mut self, o: usize, now: &Rational, fresh: &BTreeSet<usize>) -> Result<(), MonitorError> {
        let out = &self.spec.outputs[o];
        if !eval_pacing(&self.pacing.outputs[o].spawn, now, &Rational::zero(), fresh) {
            return Ok(());
        }
        if !self.condition(o, &[], &out.spawn.when, "spawn")? {
            return Ok(());
        }
        let mut params = Vec::with_capacity(out.spawn.with.len());
        for (k, e) in out.spawn.with.iter().enumerate() {
            let v = self.value(o, &[], e, "spawn")?;
            let ty = self.types.params[o].get(k).unwrap_or(&ValueType::Top);
            params.push(v.conform(ty).map_err(|m| self.fault(o, &[], (m, e.span)))?);
        }
        self.outputs[o].entry(params).or_insert_with(|| Instance { since: *now, prefix: VecDeque::new() });
        Ok(())
    }

    fn evaluate(&mut self, o: usize, now: &Rational, fresh: &BTreeSet<usize>, produced: &mut Vec<Verdict>) -> Result<(), MonitorError> {
        let out = &self.spec.outputs[o];
        let keys: Vec<Vec<Value>> = self.outputs[o].keys().cloned().collect();
        for params in keys {
            let since = self.outputs[o][&params].since;
            if !eval_pacing(&self.pacing.outputs[o].eval, now, &since, fresh) {
                continue;
            }
            if !self.condition(o, &params, &out.eval.when, "eval when")? {
                continue;
            }
            let v = self.value(o, &params, &out.eval.with, "eval with")?;
            let v = v.conform(&self.types.outputs[o]).map_err(|m| self.fault(o, &params, (m, out.eval.with.span)))?;
            produced.push(Verdict { time: *now, output: o, stream: out.name.clone(), params: params.clone(), value: v.clone() });
            if let Some(inst) = self.outputs[o].get_mut(&params) {
                inst.prefix.push_back((*now, v));
            }
        }
        Ok(())
    }

    fn prefix(&self, s: StreamRef, params: &[Value]) -> Option<(&Rational, &VecDeque<(Rational, Value)>)> {
        static ZERO: std::sync::OnceLock<Rational> = std::sync::OnceLock::new();
        match s {
            StreamRef::Input(i) => Some((ZERO.get_or_init(Rational::zero), &self.inputs[i])),
            StreamRef::Output(o) => self.outputs[o].get(params).map(|inst| (&inst.since, &inst.prefix)),
        }
    }
}

impl Env for Monitor<'_> {
    fn stream_type(&self, s: StreamRef) -> &ValueType {
        self.types.stream_type(s)
    }

    fn sync(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>> {
        let now = self.now.as_ref().expect("inside a step");
        Lookup::Known(
            self.prefix(s, params)
                .and_then(|(_, p)| p.back())
                .filter(|(t, _)| t == now)
                .map(|(_, v)| v.clone()),
        )
    }

    fn hold(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>> {
        Lookup::Known(self.prefix(s, params).and_then(|(_, p)| p.back()).map(|(_, v)| v.clone()))
    }

    fn offset(&self, s: StreamRef, params: &[Value], n: u32) -> Lookup<Option<Value>> {
        let now = self.now.as_ref().expect("inside a step");
        Lookup::Known(self.prefix(s, params).and_then(|(_, p)| {
            p.iter().rev().filter(|(t, _)| t < now).nth((n as usize).saturating_sub(1)).map(|(_, v)| v.clone())
        }))
    }

    fn window(&self, s: StreamRef, params: &[Value], d: &Rational, exact: bool) -> Lookup<Option<Vec<Value>>> {
        let now = self.now.as_ref().expect("inside a step");
        let start = now - d;
        let Some((since, prefix)) = self.prefix(s, params) else {
            return Lookup::Known(if exact { None } else { Some(Vec::new()) });
        };
        if exact && *since > start {
            return Lookup::Known(None);
        }
        Lookup::Known(Some(prefix.iter().filter(|(t, _)| *t > start).map(|(_, v)| v.clone()).collect()))
    }
}
