use std::fmt;

use super::lattice::{pt_meet, pt_more_concrete, PacingType};
use crate::activation::ActivationFormula;
use crate::ast::*;
use crate::diagnostic::{Diagnostic, DiagnosticKind as K, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacingTriple {
    pub spawn: PacingType,
    pub eval: PacingType,
    pub close: PacingType,
}

/// A type variable: one declaration of one output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacingVar {
    Spawn(usize),
    Eval(usize),
    Close(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PacingRhs {
    Var(PacingVar),
    Lit(PacingType),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `lhs ⊑ rhs`
    MoreConcreteThan,
    /// `lhs = rhs`
    EqualTo,
    /// `rhs ∈ {⊤, lhs}`
    EqualToOrTop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PacingConstraint {
    pub kind: ConstraintKind,
    pub lhs: PacingVar,
    pub rhs: PacingRhs,
    pub origin: Span,
    /// Whether the solver narrows `lhs` with this constraint or only checks it.
    pub narrows: bool,
    /// Only enforced if this variable solves to a local period.
    pub if_local: Option<PacingVar>,
    pub violation: K,
    pub reason: &'static str,
}

#[derive(Clone, Debug)]
pub struct PacingTyping {
    pub inputs: Vec<PacingTriple>,
    pub outputs: Vec<PacingTriple>,
    pub constraints: Vec<PacingConstraint>,
}

impl PacingTyping {
    pub fn triple(&self, s: StreamRef) -> &PacingTriple {
        match s {
            StreamRef::Input(i) => &self.inputs[i],
            StreamRef::Output(o) => &self.outputs[o],
        }
    }
}

fn annotation(p: &PacingAnnotation) -> Option<PacingType> {
    match p {
        PacingAnnotation::Any => None,
        PacingAnnotation::Event(f) => Some(PacingType::Event(f.clone())),
        PacingAnnotation::GlobalPeriod(x) => Some(PacingType::GlobalPeriod(*x)),
        PacingAnnotation::LocalPeriod(x) => Some(PacingType::LocalPeriod(*x)),
    }
}

/// Emits the premises of the pacing rules for every access in the specification.
pub fn pacing_constraints(spec: &Specification) -> (Vec<PacingConstraint>, Vec<Diagnostic>) {
    let mut cs = Vec::new();
    let mut diags = Vec::new();
    for (s, out) in spec.outputs.iter().enumerate() {
        for (loc, e) in out.expressions() {
            let decl = match loc {
                Location::Spawn => PacingVar::Spawn(s),
                Location::EvalWhen | Location::EvalWith => PacingVar::Eval(s),
                Location::Close => PacingVar::Close(s),
            };
            e.walk(&mut |sub| access_constraints(spec, s, loc, decl, sub, &mut cs, &mut diags));
        }
    }
    (cs, diags)
}

fn access_constraints(
    spec: &Specification,
    s: usize,
    loc: Location,
    decl: PacingVar,
    e: &Expression,
    cs: &mut Vec<PacingConstraint>,
    diags: &mut Vec<Diagnostic>,
) {
    let mut push = |kind, lhs, rhs, narrows, if_local, violation, reason| {
        cs.push(PacingConstraint { kind, lhs, rhs, origin: e.span, narrows, if_local, violation, reason })
    };
    use ConstraintKind::*;
    use PacingRhs::{Lit, Var};
    use PacingVar::{Close, Eval, Spawn};
    let target = match &e.kind {
        ExprKind::Sync { target, .. } | ExprKind::Offset { target, .. } => *target,
        ExprKind::Aggregate { .. } => {
            let reason = "sliding windows are only evaluated periodically";
            push(MoreConcreteThan, decl, Lit(PacingType::Periodic), true, None, K::PacingMismatch, reason);
            return;
        }
        _ => return,
    };
    let t = match target {
        StreamRef::Input(i) => {
            let lit = Lit(PacingType::Event(ActivationFormula::atom(i)));
            push(MoreConcreteThan, decl, lit, true, None, K::PacingMismatch, "input is not guaranteed to have a new value");
            return;
        }
        StreamRef::Output(t) => t,
    };
    let t_closes = spec.outputs[t].has_close();
    let reason = "accessed stream is not guaranteed to be evaluated at the same time";
    push(MoreConcreteThan, decl, Var(Eval(t)), true, None, K::PacingMismatch, reason);
    match loc {
        Location::EvalWhen | Location::EvalWith => {
            let reason = "accessed stream may be spawned later than the accessing stream";
            push(MoreConcreteThan, Spawn(s), Var(Spawn(t)), false, None, K::PacingMismatch, reason);
            let reason = "local frequencies of both streams must start at the same spawn";
            push(EqualToOrTop, Spawn(s), Var(Spawn(t)), false, Some(Eval(s)), K::LocalSyncViolation, reason);
            if t_closes {
                let reason = "accessed stream may be closed earlier than the accessing stream";
                push(MoreConcreteThan, Close(t), Var(Close(s)), false, None, K::PacingMismatch, reason);
                let reason = "local frequencies of both streams must end at the same close";
                push(EqualTo, Close(s), Var(Close(t)), false, Some(Eval(s)), K::LocalSyncViolation, reason);
            }
        }
        Location::Spawn => {
            let reason = "spawn conditions may only synchronously access streams that always exist";
            push(EqualTo, Spawn(t), Lit(PacingType::Top), false, None, K::PacingMismatch, reason);
            if t_closes {
                let name = &spec.outputs[t].name;
                diags.push(Diagnostic::error(
                    K::PacingMismatch,
                    e.span,
                    format!("spawn condition of `{}` reads `{name}`, which may be closed", spec.outputs[s].name),
                ));
            }
        }
        Location::Close => {
            let reason = "close conditions may only read streams spawned with the closing stream or always alive";
            push(EqualToOrTop, Spawn(s), Var(Spawn(t)), false, None, K::PacingMismatch, reason);
            if t_closes {
                let reason = "close conditions may only read streams closing at the same pacing";
                push(EqualTo, Close(s), Var(Close(t)), false, None, K::PacingMismatch, reason);
            }
        }
    }
}

struct Solution<'a> {
    spec: &'a Specification,
    vals: Vec<[PacingType; 3]>,
}

impl Solution<'_> {
    fn get(&self, v: PacingVar) -> &PacingType {
        match v {
            PacingVar::Spawn(o) => &self.vals[o][0],
            PacingVar::Eval(o) => &self.vals[o][1],
            PacingVar::Close(o) => &self.vals[o][2],
        }
    }

    fn set(&mut self, v: PacingVar, t: PacingType) {
        match v {
            PacingVar::Spawn(o) => self.vals[o][0] = t,
            PacingVar::Eval(o) => self.vals[o][1] = t,
            PacingVar::Close(o) => self.vals[o][2] = t,
        }
    }

    fn rhs(&self, r: &PacingRhs) -> PacingType {
        match r {
            PacingRhs::Var(v) => self.get(*v).clone(),
            PacingRhs::Lit(t) => t.clone(),
        }
    }

    fn show(&self, t: &PacingType) -> String {
        t.display_with(&|i| self.spec.input_name(i))
    }

    fn describe(&self, v: PacingVar) -> String {
        let (what, o) = match v {
            PacingVar::Spawn(o) => ("spawn", o),
            PacingVar::Eval(o) => ("eval", o),
            PacingVar::Close(o) => ("close", o),
        };
        format!("{what} of `{}`", self.spec.outputs[o].name)
    }
}

fn annotated(spec: &Specification, v: PacingVar) -> Option<PacingType> {
    match v {
        PacingVar::Spawn(o) => annotation(&spec.outputs[o].spawn.pacing),
        PacingVar::Eval(o) => annotation(&spec.outputs[o].eval.pacing),
        PacingVar::Close(o) => annotation(&spec.outputs[o].close.pacing),
    }
}

fn solve<'a>(spec: &'a Specification, constraints: &[PacingConstraint]) -> (Solution<'a>, Vec<[bool; 3]>) {
    let vars = |o: usize| [PacingVar::Spawn(o), PacingVar::Eval(o), PacingVar::Close(o)];
    let mut sol = Solution {
        spec,
        vals: (0..spec.outputs.len())
            .map(|o| vars(o).map(|v| annotated(spec, v).unwrap_or(PacingType::Top)))
            .collect(),
    };
    let free: Vec<[bool; 3]> = (0..spec.outputs.len()).map(|o| vars(o).map(|v| annotated(spec, v).is_none())).collect();
    let is_free = |v: PacingVar| match v {
        PacingVar::Spawn(o) => free[o][0],
        PacingVar::Eval(o) => free[o][1],
        PacingVar::Close(o) => free[o][2],
    };
    // Every step moves a variable strictly down a finite lattice, so this
    // terminates; meets commute, so the order of constraints is irrelevant.
    loop {
        let mut changed = false;
        for c in constraints.iter().filter(|c| c.narrows && is_free(c.lhs)) {
            let cur = sol.get(c.lhs);
            let next = pt_meet(cur, &sol.rhs(&c.rhs));
            if next != *cur {
                sol.set(c.lhs, next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (sol, free)
}

/// The inferred triples without any checks, for running specifications
/// that the checker rejects (negative testing only).
pub fn infer_pacing_unchecked(spec: &Specification) -> PacingTyping {
    let (constraints, _) = pacing_constraints(spec);
    let (sol, _) = solve(spec, &constraints);
    typing(spec, &sol, constraints)
}

fn typing(spec: &Specification, sol: &Solution, constraints: Vec<PacingConstraint>) -> PacingTyping {
    let triple = |v: &[PacingType; 3]| PacingTriple { spawn: v[0].clone(), eval: v[1].clone(), close: v[2].clone() };
    PacingTyping {
        inputs: (0..spec.inputs.len())
            .map(|i| PacingTriple {
                spawn: PacingType::Top,
                eval: PacingType::Event(ActivationFormula::atom(i)),
                close: PacingType::Top,
            })
            .collect(),
        outputs: sol.vals.iter().map(triple).collect(),
        constraints,
    }
}

/// Infers spawn, eval and close pacing for every stream. Annotated
/// declarations keep their annotation, which must refine what the
/// expressions allow; the rest are the meet of their constraints.
pub fn infer_pacing(spec: &Specification) -> Result<PacingTyping, Vec<Diagnostic>> {
    let (constraints, mut diags) = pacing_constraints(spec);
    let (sol, free) = solve(spec, &constraints);
    let is_free = |v: PacingVar| match v {
        PacingVar::Spawn(o) => free[o][0],
        PacingVar::Eval(o) => free[o][1],
        PacingVar::Close(o) => free[o][2],
    };

    let mut reported_bottom = Vec::new();
    for c in &constraints {
        if let Some(g) = c.if_local {
            if !sol.get(g).is_local() {
                continue;
            }
        }
        let l = sol.get(c.lhs).clone();
        let r = sol.rhs(&c.rhs);
        if l == PacingType::Bottom && is_free(c.lhs) {
            if !reported_bottom.contains(&c.lhs) {
                reported_bottom.push(c.lhs);
                diags.push(conflict(&sol, &constraints, c.lhs));
            }
            continue;
        }
        if r == PacingType::Bottom {
            continue;
        }
        let ok = match c.kind {
            ConstraintKind::MoreConcreteThan => pt_more_concrete(&l, &r),
            ConstraintKind::EqualTo => l == r,
            ConstraintKind::EqualToOrTop => r == PacingType::Top || l == r,
        };
        if !ok {
            let rel = match c.kind {
                ConstraintKind::MoreConcreteThan => "must refine",
                ConstraintKind::EqualTo => "must equal",
                ConstraintKind::EqualToOrTop => "must equal (or be unconstrained)",
            };
            let rhs_name = match &c.rhs {
                PacingRhs::Var(v) => sol.describe(*v),
                PacingRhs::Lit(_) => "required here".to_string(),
            };
            diags.push(
                Diagnostic::error(
                    c.violation,
                    c.origin,
                    format!("{} is {}, which {rel} {} ({rhs_name})", sol.describe(c.lhs), sol.show(&l), sol.show(&r)),
                )
                .with_note(c.reason),
            );
        }
    }

    for (o, out) in spec.outputs.iter().enumerate() {
        let [s, e, c] = &sol.vals[o];
        match e {
            PacingType::Top | PacingType::Periodic => {
                let hint = if *e == PacingType::Periodic { " such as @1Hz@" } else { "" };
                diags.push(Diagnostic::error(
                    K::UnderspecifiedPacing,
                    out.eval.span,
                    format!("cannot infer when `{}` is evaluated; add a pacing annotation{hint}", out.name),
                ));
            }
            _ => {}
        }
        for (t, span, what) in [(s, out.spawn.span, "spawn"), (c, out.close.span, "close")] {
            if *t == PacingType::Periodic {
                diags.push(Diagnostic::error(
                    K::UnderspecifiedPacing,
                    span,
                    format!("{what} of `{}` needs a frequency annotation", out.name),
                ));
            }
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(typing(spec, &sol, constraints))
}

/// Explains why a declaration has no common pacing by finding the first
/// requirement incompatible with the ones before it.
fn conflict(sol: &Solution, constraints: &[PacingConstraint], v: PacingVar) -> Diagnostic {
    let mut acc = PacingType::Top;
    let mut seen: Vec<(Span, PacingType)> = Vec::new();
    for c in constraints.iter().filter(|c| c.narrows && c.lhs == v) {
        let r = sol.rhs(&c.rhs);
        let next = pt_meet(&acc, &r);
        if next == PacingType::Bottom && r != PacingType::Bottom {
            let before: Vec<String> = seen.iter().map(|(_, t)| sol.show(t)).collect();
            return Diagnostic::error(
                K::PacingMismatch,
                c.origin,
                format!("{} has conflicting pacing requirements: {} and {}", sol.describe(v), before.join(", "), sol.show(&r)),
            )
            .with_note("a stream can only be evaluated at one pacing; add an annotation or use `.hold()`");
        }
        seen.push((c.origin, r));
        acc = next;
    }
    let span = constraints.iter().find(|c| c.lhs == v).map(|c| c.origin).unwrap_or_default();
    Diagnostic::error(K::PacingMismatch, span, format!("{} has no consistent pacing", sol.describe(v)))
}

impl fmt::Display for PacingTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.spawn, self.eval, self.close)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::time::int;

    fn pacing(src: &str) -> Result<(Specification, PacingTyping), Vec<K>> {
        let spec = desugar(&parse(src).unwrap()).unwrap();
        infer_pacing(&spec).map(|p| (spec, p)).map_err(|d| d.into_iter().map(|d| d.kind).collect())
    }

    #[test]
    fn event_stream_reading_periodic_is_rejected() {
        let errs = pacing(include_str!("../../specs/rejected/event_reads_periodic.lola")).unwrap_err();
        assert_eq!(errs, vec![K::PacingMismatch]);
    }

    #[test]
    fn local_reading_global_is_rejected() {
        let errs = pacing(include_str!("../../specs/rejected/global_local.lola")).unwrap_err();
        assert!(errs.contains(&K::PacingMismatch), "{errs:?}");
    }

    #[test]
    fn watchdog_pacing() {
        let (spec, p) = pacing(include_str!("../../specs/corpus/watchdog.lola")).unwrap();
        let pong = spec.lookup("pong").unwrap();
        let StreamRef::Input(pong) = pong else { panic!() };
        let pong_of_node = p.triple(spec.lookup("pong_of_node").unwrap());
        assert_eq!(pong_of_node.eval, PacingType::Event(ActivationFormula::atom(pong)));
        assert_eq!(p.triple(spec.lookup("is_alive").unwrap()).eval, PacingType::LocalPeriod(int(60)));
    }

    #[test]
    fn motivating_spec_is_rejected() {
        let errs = pacing(include_str!("../../specs/rejected/drone_intruder.lola")).unwrap_err();
        assert!(errs.contains(&K::LocalSyncViolation), "{errs:?}");
    }

    #[test]
    fn unannotated_constant_is_underspecified() {
        assert_eq!(pacing("output a := 1").unwrap_err(), vec![K::UnderspecifiedPacing]);
        assert_eq!(
            pacing("input x: Int\noutput a := x.aggregate(over: 1s, using: count)").unwrap_err(),
            vec![K::UnderspecifiedPacing]
        );
    }

    #[test]
    fn periodic_meet_is_lcm() {
        let (spec, p) = pacing("output a @2Hz@ := 1\noutput b @3Hz@ := 2\noutput c := a + b").unwrap();
        assert_eq!(p.triple(spec.lookup("c").unwrap()).eval, PacingType::GlobalPeriod(int(1)));
    }

    #[test]
    fn corpus_is_accepted() {
        for src in [
            include_str!("../../specs/corpus/intruder.lola"),
            include_str!("../../specs/corpus/waypoint.lola"),
            include_str!("../../specs/corpus/rcc.lola"),
            include_str!("../../specs/corpus/ffd.lola"),
            include_str!("../../specs/corpus/geofence.lola"),
        ] {
            pacing(src).unwrap_or_else(|e| panic!("{e:?}"));
        }
    }
}
