use std::time::{Duration, Instant};

use crate::ast::{desugar, validate_arities, Specification};
use crate::diagnostic::Diagnostic;
use crate::pacing_types::{infer_pacing, infer_pacing_unchecked, PacingTyping};
use crate::parser::parse;
use crate::semantic_types::{check_semantic_types, SemanticTyping};
use crate::value_types::{check_value_types, ValueTypeEnvironment, ValueTyping};
use crate::wellformedness::{build_graph, check_wellformed, DependencyGraph};

/// A specification that passed every static check.
#[derive(Clone, Debug)]
pub struct Checked {
    /// The specification with literal types elaborated.
    pub spec: Specification,
    pub values: ValueTyping,
    pub pacing: PacingTyping,
    pub semantics: SemanticTyping,
    pub graph: DependencyGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Parse,
    Desugar,
    ValueTypes,
    PacingTypes,
    SemanticTypes,
    WellFormedness,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Parse => "parse",
            Phase::Desugar => "desugar",
            Phase::ValueTypes => "value types",
            Phase::PacingTypes => "pacing types",
            Phase::SemanticTypes => "semantic types",
            Phase::WellFormedness => "well-formedness",
        }
    }
}

#[derive(Debug, Default)]
pub struct Timings {
    pub phases: Vec<(Phase, Duration)>,
}

impl Timings {
    fn time<T>(&mut self, phase: Phase, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push((phase, start.elapsed()));
        out
    }

    pub fn total(&self) -> Duration {
        self.phases.iter().map(|(_, d)| *d).sum()
    }
}

fn sorted(mut d: Vec<Diagnostic>) -> Vec<Diagnostic> {
    d.sort_by_key(|d| (d.span.start, d.span.end));
    d
}

/// Parses and desugars, then checks arities.
pub fn frontend(src: &str) -> Result<Specification, Vec<Diagnostic>> {
    frontend_timed(src, &mut Timings::default())
}

fn frontend_timed(src: &str, t: &mut Timings) -> Result<Specification, Vec<Diagnostic>> {
    let surface = t.time(Phase::Parse, || parse(src)).map_err(sorted)?;
    t.time(Phase::Desugar, || {
        let spec = desugar(&surface)?;
        let d = validate_arities(&spec);
        if d.is_empty() {
            Ok(spec)
        } else {
            Err(d)
        }
    })
    .map_err(sorted)
}

/// Runs every static analysis in order and stops at the first failing phase.
/// Diagnostics come back ordered by source position.
pub fn check_source(src: &str) -> Result<Checked, Vec<Diagnostic>> {
    check_source_timed(src).0
}

pub fn check_source_timed(src: &str) -> (Result<Checked, Vec<Diagnostic>>, Timings) {
    let mut t = Timings::default();
    let r = run_phases(src, &mut t);
    (r, t)
}

fn run_phases(src: &str, t: &mut Timings) -> Result<Checked, Vec<Diagnostic>> {
    let spec = frontend_timed(src, t)?;
    check_spec_timed(&spec, t)
}

pub fn check_spec(spec: &Specification) -> Result<Checked, Vec<Diagnostic>> {
    check_spec_timed(spec, &mut Timings::default())
}

fn check_spec_timed(spec: &Specification, t: &mut Timings) -> Result<Checked, Vec<Diagnostic>> {
    let values = t
        .time(Phase::ValueTypes, || check_value_types(spec, &ValueTypeEnvironment::from_annotations(spec)))
        .map_err(sorted)?;
    let spec = values.elaborated.clone();
    let pacing = t.time(Phase::PacingTypes, || infer_pacing(&spec)).map_err(sorted)?;
    let semantics = t.time(Phase::SemanticTypes, || check_semantic_types(&spec, &pacing)).map_err(sorted)?;
    let graph = t.time(Phase::WellFormedness, || build_graph(&spec));
    let cycles = t.time(Phase::WellFormedness, || check_wellformed(&graph));
    if !cycles.is_empty() {
        return Err(sorted(cycles.iter().map(|c| c.to_diagnostic(&spec)).collect()));
    }
    Ok(Checked { spec, values, pacing, semantics, graph })
}

/// Only what execution needs: value types and (unchecked) pacing. Pacing,
/// semantic and cycle errors are ignored. Meant for negative tests that show
/// what the checker prevents.
pub fn check_unsafe(src: &str) -> Result<(Specification, ValueTyping, PacingTyping), Vec<Diagnostic>> {
    let spec = frontend(src)?;
    let values = check_value_types(&spec, &ValueTypeEnvironment::from_annotations(&spec)).map_err(sorted)?;
    let spec = values.elaborated.clone();
    let pacing = infer_pacing_unchecked(&spec);
    Ok((spec, values, pacing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::DiagnosticKind as K;

    #[test]
    fn corpus_passes() {
        for src in [
            include_str!("../specs/corpus/intruder.lola"),
            include_str!("../specs/corpus/waypoint.lola"),
            include_str!("../specs/corpus/watchdog.lola"),
            include_str!("../specs/corpus/rcc.lola"),
            include_str!("../specs/corpus/ffd.lola"),
            include_str!("../specs/corpus/geofence.lola"),
        ] {
            let (r, t) = check_source_timed(src);
            assert!(r.is_ok(), "{:?}", r.err());
            assert_eq!(t.phases.len(), 7);
        }
    }

    #[test]
    fn rejections_stop_at_first_phase() {
        let (r, t) = check_source_timed("input x: Int64\noutput a: Int64 := a + x");
        assert_eq!(r.unwrap_err()[0].kind, K::IllFormedCycle);
        assert_eq!(t.phases.last().unwrap().0, Phase::WellFormedness);
        let (r, t) = check_source_timed("output a: Int64 := ");
        assert!(r.is_err());
        assert_eq!(t.phases.len(), 1);
    }
}
