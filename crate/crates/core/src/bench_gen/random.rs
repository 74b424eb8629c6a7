//! Random specifications that are well-typed by construction.
//!
//! Every stream is Int64. Streams only read earlier streams (plus their own
//! past through offsets), and each read is picked from the set of targets the
//! typing rules admit in the current context:
//! - event streams read inputs and event streams whose inputs and guard
//!   conjuncts are subsets of their own;
//! - global streams read global streams whose period divides theirs;
//! - parameterized streams come in groups sharing spawn, guard and close, and
//!   read earlier members of their group with the same parameters.
//!
//! Anything else is read through `hold` or a window, which carry no
//! obligations. Offsets and window sums are clamped so values stay small.

use std::collections::BTreeSet;
use std::fmt::Write;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::Specification;
use crate::evaluator::{Trace, TraceEvent, Value};
use crate::time::{rat, Rational};
use crate::value_types::{ValueType, ValueTyping};

/// Periods in quarter seconds with their annotation.
const PERIODS: [(u32, &str); 3] = [(2, "2Hz"), (4, "1Hz"), (8, "0.5Hz")];
const CLAMP: i64 = 99;

#[derive(Clone, Debug)]
enum Pace {
    Event { inputs: BTreeSet<usize>, conds: BTreeSet<String> },
    Global(u32),
    Grouped { group: usize, inputs: BTreeSet<usize> },
    Local { group: usize, period: u32 },
}

struct Stream {
    name: String,
    pace: Pace,
}

struct Group {
    spawn: Vec<usize>,
    close: String,
}

const PARAMS: [&str; 2] = ["p", "q"];

struct Gen {
    rng: ChaCha8Rng,
    inputs: usize,
    streams: Vec<Stream>,
    groups: Vec<Group>,
}

/// Context of the expression under construction.
struct Cx<'a> {
    name: &'a str,
    pace: &'a Pace,
}

impl Gen {
    fn arity(&self, pace: &Pace) -> usize {
        match pace {
            Pace::Grouped { group, .. } | Pace::Local { group, .. } => self.groups[*group].spawn.len(),
            _ => 0,
        }
    }

    fn params_of(&self, pace: &Pace) -> String {
        let n = self.arity(pace);
        if n == 0 {
            String::new()
        } else {
            format!("({})", PARAMS[..n].join(", "))
        }
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("nonempty choice").clone()
    }

    fn small(&mut self) -> i64 {
        self.rng.gen_range(0..=3)
    }

    fn inputs_subset(&mut self, must: &[usize]) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = must.iter().copied().collect();
        for i in 0..self.inputs {
            if self.rng.gen_bool(0.3) {
                set.insert(i);
            }
        }
        if set.is_empty() {
            set.insert(self.rng.gen_range(0..self.inputs));
        }
        set
    }

    /// Accesses that may be read synchronously, and through offsets when
    /// `offset` is set. The own stream is only offered for offsets, and only
    /// when the context has a name.
    fn sync_targets(&self, cx: &Cx, offset: bool) -> Vec<String> {
        let mut out = Vec::new();
        let inputs = match cx.pace {
            Pace::Event { inputs, .. } | Pace::Grouped { inputs, .. } => Some(inputs),
            _ => None,
        };
        if let Some(inputs) = inputs {
            out.extend(inputs.iter().map(|i| format!("i{i}")));
        }
        for t in &self.streams {
            let ok = match (cx.pace, &t.pace) {
                (Pace::Event { inputs, conds }, Pace::Event { inputs: ti, conds: tc }) => {
                    ti.is_subset(inputs) && tc.is_subset(conds)
                }
                (Pace::Grouped { inputs, .. }, Pace::Event { inputs: ti, conds: tc }) => {
                    ti.is_subset(inputs) && tc.is_empty()
                }
                (Pace::Global(p), Pace::Global(tp)) => p % tp == 0,
                (Pace::Grouped { group, inputs }, Pace::Grouped { group: tg, inputs: ti }) => {
                    group == tg && ti.is_subset(inputs)
                }
                (Pace::Local { group, period }, Pace::Local { group: tg, period: tp }) => {
                    group == tg && period % tp == 0
                }
                _ => false,
            };
            if ok {
                out.push(format!("{}{}", t.name, self.params_of(&t.pace)));
            }
        }
        if offset && !cx.name.is_empty() {
            out.push(format!("{}{}", cx.name, self.params_of(cx.pace)));
        }
        out
    }

    /// Every stream declared so far, with arguments suitable for reads that
    /// carry no obligations.
    fn loose_target(&mut self, cx: &Cx) -> String {
        let total = self.inputs + self.streams.len();
        let k = self.rng.gen_range(0..total);
        if k < self.inputs {
            return format!("i{k}");
        }
        let t = k - self.inputs;
        let n = self.arity(&self.streams[t].pace.clone());
        let name = self.streams[t].name.clone();
        if n == 0 {
            return name;
        }
        let args: Vec<String> = (0..n).map(|_| self.loose_arg(cx)).collect();
        format!("{name}({})", args.join(", "))
    }

    fn loose_arg(&mut self, cx: &Cx) -> String {
        let mut options: Vec<String> = (0..=3).map(|c| c.to_string()).collect();
        options.extend(PARAMS[..self.arity(cx.pace)].iter().map(|p| p.to_string()));
        if let Pace::Event { inputs, .. } | Pace::Grouped { inputs, .. } = cx.pace {
            options.extend(inputs.iter().map(|i| format!("i{i}")));
        }
        self.pick(&options)
    }

    fn clamp(x: String) -> String {
        format!("max(min({x}, {CLAMP}), -{CLAMP})")
    }

    fn leaf(&mut self, cx: &Cx) -> String {
        let periodic = matches!(cx.pace, Pace::Global(_) | Pace::Local { .. });
        loop {
            match self.rng.gen_range(0..7) {
                0 => return self.small().to_string(),
                1 => {
                    let ts = self.sync_targets(cx, false);
                    if !ts.is_empty() {
                        return self.pick(&ts);
                    }
                }
                2 => {
                    let n = self.arity(cx.pace);
                    if n > 0 {
                        return PARAMS[self.rng.gen_range(0..n)].to_string();
                    }
                }
                3 => {
                    let t = self.loose_target(cx);
                    let c = self.small();
                    return format!("{t}.hold(or: {c})");
                }
                4 => {
                    let ts = self.sync_targets(cx, true);
                    if ts.is_empty() {
                        continue;
                    }
                    let t = self.pick(&ts);
                    let by = self.rng.gen_range(1..=2);
                    let c = self.small();
                    return Self::clamp(format!("{t}.offset(by: -{by}).defaults(to: {c})"));
                }
                _ if periodic => {
                    let t = self.loose_target(cx);
                    let d = self.rng.gen_range(1..=3);
                    let agg = match self.rng.gen_range(0..3) {
                        0 => format!("{t}.aggregate(over: {d}s, using: sum)"),
                        1 => format!("{t}.aggregate(over: {d}s, using: min).defaults(to: 0)"),
                        _ => format!("{t}.aggregate(over: {d}s, using: max).defaults(to: 0)"),
                    };
                    return Self::clamp(agg);
                }
                _ => {}
            }
        }
    }

    fn int_expr(&mut self, cx: &Cx, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return self.leaf(cx);
        }
        match self.rng.gen_range(0..4) {
            0 => format!("({} + {})", self.int_expr(cx, depth - 1), self.int_expr(cx, depth - 1)),
            1 => format!("({} - {})", self.int_expr(cx, depth - 1), self.int_expr(cx, depth - 1)),
            2 => format!("min({}, {})", self.int_expr(cx, depth - 1), self.int_expr(cx, depth - 1)),
            _ => format!(
                "(if {} then {} else {})",
                self.bool_expr(cx, depth - 1),
                self.int_expr(cx, depth - 1),
                self.int_expr(cx, depth - 1)
            ),
        }
    }

    fn bool_expr(&mut self, cx: &Cx, depth: u32) -> String {
        let op = self.pick(&["<", "<=", "==", "!=", ">"]);
        let lhs = self.int_expr(cx, depth);
        let rhs = self.int_expr(cx, depth);
        format!("{lhs} {op} {rhs}")
    }

    fn activation(inputs: &BTreeSet<usize>) -> String {
        inputs.iter().map(|i| format!("i{i}")).collect::<Vec<_>>().join(" && ")
    }

    fn group_guard(&self, group: usize) -> String {
        let g = &self.groups[group];
        g.spawn.iter().enumerate().map(|(k, i)| format!("{} == i{i}", PARAMS[k])).collect::<Vec<_>>().join(" && ")
    }

    fn new_group(&mut self, first: &str) -> usize {
        let arity = if self.inputs >= 2 && self.rng.gen_bool(0.3) { 2 } else { 1 };
        let mut all: Vec<usize> = (0..self.inputs).collect();
        all.shuffle(&mut self.rng);
        let spawn: Vec<usize> = all[..arity].to_vec();
        let args = PARAMS[..arity].join(", ");
        let close = match self.rng.gen_range(0..3) {
            0 => String::new(),
            1 => {
                let i = self.rng.gen_range(0..self.inputs);
                format!("\n    close when i{i} == 3")
            }
            _ => format!("\n    close @true@ when {first}({args}).hold(or: 0) > 5"),
        };
        self.groups.push(Group { spawn, close });
        self.groups.len() - 1
    }

    fn param_header(&self, name: &str, group: usize) -> String {
        let g = &self.groups[group];
        let params: Vec<String> = PARAMS[..g.spawn.len()].iter().map(|p| format!("{p}: Int64")).collect();
        let spawn: Vec<String> = g.spawn.iter().map(|i| format!("i{i}")).collect();
        format!("output {name}({}): Int64\n    spawn with ({})", params.join(", "), spawn.join(", "))
    }

    fn declare(&mut self, index: usize, out: &mut String) {
        let name = format!("s{index}");
        let roll = self.rng.gen_range(0..100);
        let grouped = if self.groups.is_empty() || self.rng.gen_bool(0.4) { None } else { Some(self.rng.gen_range(0..self.groups.len())) };
        let pace = if roll < 40 {
            let inputs = self.inputs_subset(&[]);
            let mut conds = BTreeSet::new();
            if self.rng.gen_bool(0.35) {
                let v: Vec<usize> = inputs.iter().copied().collect();
                for _ in 0..self.rng.gen_range(1..=2) {
                    let i = self.pick(&v);
                    let op = self.pick(&[">", "!=", "<="]);
                    let c = self.small();
                    conds.insert(format!("i{i} {op} {c}"));
                }
            }
            Pace::Event { inputs, conds }
        } else if roll < 60 {
            Pace::Global(self.pick(&PERIODS).0)
        } else if roll < 85 {
            let group = grouped.unwrap_or_else(|| self.new_group(&name));
            let spawn = self.groups[group].spawn.clone();
            Pace::Grouped { group, inputs: self.inputs_subset(&spawn) }
        } else {
            let group = grouped.unwrap_or_else(|| self.new_group(&name));
            Pace::Local { group, period: self.pick(&PERIODS).0 }
        };
        let cx = Cx { name: &name, pace: &pace };
        let body = self.int_expr(&cx, 2);
        let freq = |p: u32| PERIODS.iter().find(|x| x.0 == p).unwrap().1;
        match &pace {
            Pace::Event { inputs, conds } if conds.is_empty() => {
                writeln!(out, "output {name}: Int64 @{}@ := {body}", Self::activation(inputs)).unwrap();
            }
            Pace::Event { inputs, conds } => {
                let when = conds.iter().cloned().collect::<Vec<_>>().join(" && ");
                writeln!(out, "output {name}: Int64\n    eval @{}@ when {when} with {body}", Self::activation(inputs)).unwrap();
            }
            Pace::Global(p) => writeln!(out, "output {name}: Int64 @{}@ := {body}", freq(*p)).unwrap(),
            Pace::Grouped { group, inputs } => {
                writeln!(
                    out,
                    "{}\n    eval @{}@ when {} with {body}{}",
                    self.param_header(&name, *group),
                    Self::activation(inputs),
                    self.group_guard(*group),
                    self.groups[*group].close
                )
                .unwrap();
            }
            Pace::Local { group, period } => {
                writeln!(
                    out,
                    "{}\n    eval @{}@ with {body}{}",
                    self.param_header(&name, *group),
                    freq(*period),
                    self.groups[*group].close
                )
                .unwrap();
            }
        }
        self.streams.push(Stream { name, pace });
    }

    fn trigger(&mut self, k: usize, out: &mut String) {
        let (pace, annotation) = if self.rng.gen_bool(0.7) {
            let inputs = self.inputs_subset(&[]);
            let a = Self::activation(&inputs);
            (Pace::Event { inputs, conds: BTreeSet::new() }, a)
        } else {
            let (p, f) = self.pick(&PERIODS);
            (Pace::Global(p), f.to_string())
        };
        // Triggers cannot be read, not even by themselves.
        let cx = Cx { name: "", pace: &pace };
        let cond = self.bool_expr(&cx, 1);
        writeln!(out, "trigger @{annotation}@ {cond} \"alarm {k}\"").unwrap();
    }
}

/// A random specification over at most `budget` streams and triggers that
/// passes every static check. The same seed always yields the same text.
pub fn random_welltyped(seed: u64, budget: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.gen_range(1..=3);
    let mut gen = Gen { rng, inputs, streams: Vec::new(), groups: Vec::new() };
    let mut out = String::new();
    for i in 0..inputs {
        writeln!(out, "input i{i}: Int64").unwrap();
    }
    let total = budget.max(1);
    let mut triggers = 0;
    for _ in 0..total {
        if !gen.streams.is_empty() && gen.rng.gen_bool(0.15) {
            gen.trigger(triggers, &mut out);
            triggers += 1;
        } else {
            gen.declare(gen.streams.len(), &mut out);
        }
    }
    out
}

/// A trace of `events` events with strictly increasing times. Each event
/// carries a random nonempty subset of the inputs; integers are drawn
/// uniformly from `0..=max`.
pub fn random_trace(spec: &Specification, types: &ValueTyping, seed: u64, events: usize, max: i64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = [rat(1, 4), rat(1, 2), rat(1, 1), rat(3, 2)];
    let mut time = Rational::zero();
    let mut out = Vec::with_capacity(events);
    for _ in 0..events {
        let mut values = std::collections::BTreeMap::new();
        while values.is_empty() && !spec.inputs.is_empty() {
            for (i, ty) in types.inputs.iter().enumerate() {
                if rng.gen_bool(0.5) {
                    values.insert(i, sample(&mut rng, ty, max));
                }
            }
        }
        out.push(TraceEvent { time, values });
        time += gaps.choose(&mut rng).unwrap();
    }
    Trace { events: out }
}

fn sample(rng: &mut ChaCha8Rng, ty: &ValueType, max: i64) -> Value {
    match ty {
        ValueType::Bool => Value::Bool(rng.gen()),
        ValueType::UInt(_) => Value::UInt(rng.gen_range(0..=max.max(0) as u64)),
        ValueType::Float(_) => Value::Float(rng.gen_range(0..=max) as f64),
        ValueType::String => Value::Str(format!("v{}", rng.gen_range(0..=max))),
        ValueType::Tuple(ts) => Value::Tuple(ts.iter().map(|t| sample(rng, t, max)).collect()),
        ValueType::Option(t) => sample(rng, t, max),
        _ => Value::Int(rng.gen_range(0..=max)),
    }
}
