//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines are always shown.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lolacheck::activation::ActivationFormula;
use lolacheck::ast::{Location, StreamRef};
use lolacheck::bench_gen::{generate, random_trace, random_welltyped, BenchKind};
use lolacheck::diagnostic::{line_col, Diagnostic, DiagnosticKind as K, Span};
use lolacheck::evaluator::{oracle_run, Monitor, MonitorError, MonitorReport, RunConfig, Trace, Value};
use lolacheck::pacing_types::{pt_meet, pt_more_concrete, PacingType};
use lolacheck::pipeline::{check_source, Checked};
use lolacheck::semantic_types::{canonicalize, st_meet, st_more_concrete, SemanticType};
use lolacheck::time::{int, rat};
use lolacheck::trace_io::{read_csv_trace, report_csv};
use lolacheck::value_types::{vt_meet, vt_more_concrete, ValueType};
use lolacheck::wellformedness::{check_wellformed, AccessKind, DependencyGraph, Edge, Label};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const CORPUS: [(&str, &str); 6] = [
    ("intruder", include_str!("../specs/corpus/intruder.lola")),
    ("waypoint", include_str!("../specs/corpus/waypoint.lola")),
    ("watchdog", include_str!("../specs/corpus/watchdog.lola")),
    ("rcc", include_str!("../specs/corpus/rcc.lola")),
    ("ffd", include_str!("../specs/corpus/ffd.lola")),
    ("geofence", include_str!("../specs/corpus/geofence.lola")),
];

fn checked(src: &str) -> Result<Checked, String> {
    check_source(src).map_err(|d| format!("{d:?}\n{src}"))
}

fn config(reverse_ties: bool) -> RunConfig {
    RunConfig { end_time: None, dump: true, reverse_ties }
}

fn run(c: &Checked, t: &Trace, reverse_ties: bool) -> Result<MonitorReport, MonitorError> {
    Monitor::new(&c.spec, &c.values, &c.pacing, config(reverse_ties)).run(t)
}

fn corpus_acceptance() -> Outcome {
    for (name, src) in CORPUS {
        check_source(src).map_err(|d| format!("{name} rejected: {d:?}"))?;
    }
    Ok(())
}

fn rejected_at(src: &str, kind: K, line: usize, col: usize) -> Result<Diagnostic, String> {
    let diags = match check_source(src) {
        Ok(_) => return Err(format!("accepted:\n{src}")),
        Err(d) => d,
    };
    diags
        .iter()
        .find(|d| d.kind == kind && line_col(src, d.span.start) == (line, col))
        .cloned()
        .ok_or_else(|| format!("no {kind:?} at {line}:{col}, got {diags:?}"))
}

fn negative_examples() -> Outcome {
    rejected_at(include_str!("../specs/rejected/event_reads_periodic.lola"), K::PacingMismatch, 3, 17)?;
    rejected_at(include_str!("../specs/rejected/global_local.lola"), K::PacingMismatch, 3, 44)?;
    let params = include_str!("../specs/rejected/parameter_mismatch.lola");
    rejected_at(params, K::ParameterMismatch, 6, 17)?;
    for ok in ["a(p3)", "a(p4)"] {
        checked(&params.replace("a(p2)", ok))?;
    }
    let drone = include_str!("../specs/rejected/drone_intruder.lola");
    let diags = check_source(drone).err().ok_or("motivating example accepted")?;
    ensure!(
        diags.iter().any(|d| d.message.contains("avg_distance") && line_col(drone, d.span.start).0 == 16),
        "no diagnostic at the trigger's avg_distance access: {diags:?}"
    );
    Ok(())
}

/// A cycle is harmless if a close breaks it, or if it stays within eval
/// expressions and passes through a real offset.
fn cycle_ok(cycle: &[&Edge]) -> bool {
    cycle.iter().any(|e| e.label.location == Location::Close)
        || (cycle.iter().all(|e| e.label.location == Location::EvalWith)
            && cycle.iter().any(|e| matches!(e.label.access, AccessKind::Offset(n) if n != 0)))
}

/// Enumerates every simple cycle, rooted at its smallest vertex, and reports
/// whether all of them are harmless.
fn all_simple_cycles_ok(g: &DependencyGraph, n: usize) -> bool {
    fn index(s: StreamRef) -> usize {
        match s {
            StreamRef::Output(i) | StreamRef::Input(i) => i,
        }
    }
    fn dfs<'a>(g: &'a DependencyGraph, start: usize, at: usize, seen: &mut Vec<bool>, path: &mut Vec<&'a Edge>) -> bool {
        for e in g.edges.iter().filter(|e| index(e.source) == at) {
            let next = index(e.target);
            path.push(e);
            let ok = if next == start {
                cycle_ok(path)
            } else if next > start && !seen[next] {
                seen[next] = true;
                let ok = dfs(g, start, next, seen, path);
                seen[next] = false;
                ok
            } else {
                true
            };
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    (0..n).all(|start| {
        let mut seen = vec![false; n];
        seen[start] = true;
        dfs(g, start, start, &mut seen, &mut Vec::new())
    })
}

fn well_formedness() -> Outcome {
    let self_loop = |with: &str| format!("input x: Int64\noutput a: Int64 := {with}");
    ensure!(check_source(&self_loop("a + x")).is_err(), "zero-delay self-cycle accepted");
    checked(&self_loop("a.offset(by: -1).defaults(to: 0) + x"))?;
    checked("input x: Int64\noutput a(p: Int64): Int64 spawn with x eval with x + p close when a(p) > 3")?;

    let locations = [Location::Spawn, Location::EvalWhen, Location::EvalWith, Location::Close];
    let accesses =
        [AccessKind::Sync, AccessKind::Hold, AccessKind::Offset(0), AccessKind::Offset(1), AccessKind::Offset(2), AccessKind::Aggr(int(1))];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut good, mut bad) = (0, 0);
    for sample in 0..20_000 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(0..=6);
        let edges = (0..m)
            .map(|_| Edge {
                source: StreamRef::Output(rng.gen_range(0..n)),
                label: Label {
                    location: locations[rng.gen_range(0..locations.len())],
                    access: accesses[rng.gen_range(0..accesses.len())],
                },
                target: StreamRef::Output(rng.gen_range(0..n)),
                span: Span::default(),
            })
            .collect();
        let g = DependencyGraph { vertices: (0..n).map(StreamRef::Output).collect(), edges };
        let expected = all_simple_cycles_ok(&g, n);
        let found = check_wellformed(&g);
        ensure!(found.is_empty() == expected, "sample {sample} disagrees with the cycle enumerator: {g:?}");
        for d in &found {
            let c = &d.cycle;
            ensure!(!c.is_empty() && c.iter().all(|e| g.edges.contains(e)), "reported edges not in graph: {g:?}");
            let closes = (0..c.len()).all(|i| c[i].target == c[(i + 1) % c.len()].source);
            ensure!(closes, "reported edges do not form a cycle: {c:?}");
            ensure!(!cycle_ok(&c.iter().collect::<Vec<_>>()), "reported cycle is fine: {c:?}");
        }
        if expected {
            good += 1;
        } else {
            bad += 1;
        }
    }
    ensure!(good > 1000 && bad > 1000, "unbalanced sample: {good} well-formed, {bad} ill-formed");
    Ok(())
}

/// Exhaustive partial-order laws and glb agreement over a finite universe.
fn lattice_laws<T: Clone + std::fmt::Debug + PartialEq>(
    name: &str,
    universe: &[T],
    le: impl Fn(&T, &T) -> bool,
    meet: impl Fn(&T, &T) -> T,
) -> Outcome {
    let n = universe.len();
    let table: Vec<Vec<bool>> = universe.iter().map(|a| universe.iter().map(|b| le(a, b)).collect()).collect();
    for i in 0..n {
        ensure!(table[i][i], "{name}: {:?} not reflexive", universe[i]);
        for j in 0..n {
            if i != j && table[i][j] && table[j][i] {
                return Err(format!("{name}: {:?} and {:?} are mutually below", universe[i], universe[j]));
            }
            if table[i][j] {
                for k in 0..n {
                    ensure!(!table[j][k] || table[i][k], "{name}: transitivity fails at {:?}", (&universe[i], &universe[j], &universe[k]));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let lower: Vec<usize> = (0..n).filter(|&c| table[c][i] && table[c][j]).collect();
            let greatest: Vec<usize> = lower.iter().copied().filter(|&c| lower.iter().all(|&d| table[d][c])).collect();
            ensure!(greatest.len() == 1, "{name}: no unique glb for {:?}, {:?}", universe[i], universe[j]);
            let m = meet(&universe[i], &universe[j]);
            ensure!(
                m == universe[greatest[0]],
                "{name}: meet of {:?} and {:?} is {m:?}, brute force says {:?}",
                universe[i],
                universe[j],
                universe[greatest[0]]
            );
        }
    }
    Ok(())
}

/// Normalized value types up to nesting depth 3: no nested options, no
/// option or tuple around bottom. The set is closed under meets.
fn value_universe() -> Vec<ValueType> {
    use ValueType::*;
    let leaves = vec![Top, Bool, Int(8), Int(64), Float(32)];
    let pairs = |items: &[ValueType]| {
        let mut out = vec![Tuple(vec![])];
        for a in items {
            out.push(Tuple(vec![a.clone()]));
            for b in items {
                out.push(Tuple(vec![a.clone(), b.clone()]));
            }
        }
        out
    };
    let mut level1 = leaves.clone();
    level1.extend(leaves.iter().cloned().map(ValueType::option));
    level1.extend(pairs(&leaves));
    let mut inner = leaves.clone();
    inner.extend([Top, Int(8), Int(64)].map(ValueType::option));
    let mut all: BTreeSet<ValueType> = level1.iter().cloned().collect();
    all.extend(level1.iter().filter(|t| !t.is_option()).cloned().map(ValueType::option));
    all.extend(pairs(&inner));
    all.insert(Bottom);
    all.into_iter().collect()
}

fn pacing_universe() -> Vec<PacingType> {
    let periods = [int(1), rat(1, 2), rat(1, 3), rat(1, 5)];
    let mut u = vec![PacingType::Top, PacingType::Bottom, PacingType::Periodic];
    for p in &periods {
        u.push(PacingType::GlobalPeriod(*p));
        u.push(PacingType::LocalPeriod(*p));
    }
    let subsets: Vec<BTreeSet<usize>> =
        (0u32..8).map(|m| (0..3).filter(|i| m & (1 << i) != 0).collect()).collect();
    let formulas: BTreeSet<ActivationFormula> = (0u32..256)
        .map(|m| ActivationFormula::from_terms((0..8).filter(|i| m & (1 << i) != 0).map(|i| subsets[i].clone())))
        .collect();
    assert_eq!(formulas.len(), 20, "monotone functions of three inputs");
    u.extend(formulas.into_iter().map(PacingType::Event));
    u
}

fn semantic_universe() -> Result<Vec<SemanticType>, String> {
    let c = checked("input a: Bool\ninput b: Bool\ninput x: Int64\noutput o := a && b && x > 1 && x == 2")?;
    let atoms: Vec<_> = match SemanticType::of(&c.spec.outputs[0].eval.with) {
        SemanticType::Expr(set) => set.into_iter().collect(),
        other => return Err(format!("unexpected {other:?}")),
    };
    ensure!(atoms.len() == 4, "expected four atoms, got {atoms:?}");
    let mut u = vec![SemanticType::Top, SemanticType::Bottom];
    for m in 1u32..16 {
        let set = (0..4).filter(|i| m & (1 << i) != 0).map(|i| canonicalize(&atoms[i])).collect();
        u.push(SemanticType::Expr(set));
    }
    Ok(u)
}

fn lattices() -> Outcome {
    let vt = value_universe();
    ensure!(vt.len() > 100, "value universe too small");
    lattice_laws("value types", &vt, vt_more_concrete, vt_meet)?;
    lattice_laws("pacing types", &pacing_universe(), pt_more_concrete, pt_meet)?;
    lattice_laws("semantic types", &semantic_universe()?, st_more_concrete, st_meet)
}

fn safety() -> Outcome {
    for seed in 0..1000u64 {
        let src = random_welltyped(seed, 2 + (seed as usize % 9));
        let c = checked(&src)?;
        for k in 0..10 {
            let t = random_trace(&c.spec, &c.values, seed * 31 + k, 100, 3);
            match run(&c, &t, false) {
                Ok(_) => {}
                Err(e @ MonitorError::SyncAccessFailure { .. }) => {
                    return Err(format!("seed {seed}, trace {k}: {e}\n{src}"));
                }
                Err(e) => return Err(format!("seed {seed}, trace {k}: unexpected fault {e}\n{src}")),
            }
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let mut cases: Vec<(String, String)> = CORPUS.iter().map(|(n, s)| (n.to_string(), s.to_string())).collect();
    cases.extend((0..300u64).map(|seed| (format!("random seed {seed}"), random_welltyped(50_000 + seed, 8))));
    for (name, src) in cases {
        let c = checked(&src)?;
        for k in 0..3 {
            let t = random_trace(&c.spec, &c.values, k, 80, 3);
            let first = run(&c, &t, false);
            ensure!(first == run(&c, &t, false), "{name}: two runs differ");
            ensure!(first == run(&c, &t, true), "{name}: reversed tie-breaking changes the report");
        }
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    for seed in 0..250u64 {
        let src = random_welltyped(10_000 + seed, 1 + (seed as usize % 4));
        let c = checked(&src)?;
        let t = random_trace(&c.spec, &c.values, seed, 20, 3);
        let oracle = oracle_run(&c.spec, &c.values, &c.pacing, &t, 1000, &config(false))
            .map_err(|e| format!("seed {seed}: oracle failed: {e}\n{src}"))?;
        let monitor = run(&c, &t, false).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(monitor == oracle, "seed {seed}: monitor and oracle differ\n{src}");
    }
    Ok(())
}

fn median_check_time(src: &str, reps: usize) -> Result<Duration, String> {
    let mut times = Vec::new();
    for _ in 0..reps {
        let start = Instant::now();
        check_source(src).map_err(|d| format!("{d:?}"))?;
        times.push(start.elapsed());
    }
    times.sort();
    Ok(times[reps / 2])
}

fn scaling() -> Outcome {
    let mut report = Vec::new();
    for kind in BenchKind::ALL {
        let mut points = Vec::new();
        for n in [25usize, 50, 100] {
            let t = median_check_time(&generate(kind, n), 3)?;
            ensure!(t <= Duration::from_secs(60), "{} n={n} took {t:?}", kind.name());
            // Sub-millisecond timings are dominated by noise.
            points.push(((n as f64).ln(), t.as_secs_f64().max(1e-3).ln()));
        }
        let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
        let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
        let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        ensure!(slope <= 4.0, "{} grows like n^{slope:.2}", kind.name());
        report.push(format!("{} n^{slope:.2}", kind.name()));
    }
    let geofence = median_check_time(CORPUS[5].1, 3)?;
    ensure!(geofence <= Duration::from_secs(5), "geofence took {geofence:?}");
    println!("    growth: {}; geofence {:.1} ms", report.join(", "), geofence.as_secs_f64() * 1e3);
    Ok(())
}

fn hand_traces() -> Outcome {
    let c = checked(CORPUS[2].1)?;
    let t = read_csv_trace("time,ping,pong\n0,1,\n30,,1\n".as_bytes(), &c.spec, &c.values).map_err(|e| e.to_string())?;
    let cfg = RunConfig { end_time: Some(int(60)), dump: true, reverse_ties: false };
    let mut m = Monitor::new(&c.spec, &c.values, &c.pacing, cfg.clone());
    for e in &t.events {
        m.step(e.time, &e.values).map_err(|e| e.to_string())?;
    }
    m.step(int(60), &Default::default()).map_err(|e| e.to_string())?;
    ensure!(m.alive(1).is_empty(), "is_alive(1) still open after 60");
    let report = Monitor::new(&c.spec, &c.values, &c.pacing, cfg).run(&t).map_err(|e| e.to_string())?;
    ensure!(
        report_csv(&report.dump) == "time,stream,params,value\n30,pong_of_node,[1],true\n60,is_alive,[1],true\n",
        "watchdog report: {}",
        report_csv(&report.dump)
    );

    let c = checked(CORPUS[1].1)?;
    let csv = "time,pos,waypoint\n0,\"(10.0, 0.0)\",\"(0.0, 0.0)\"\n1,\"(6.0, 0.0)\",\n2,\"(7.0, 0.0)\",\n3,\"(3.0, 0.0)\",\n4,\"(1.0, 0.0)\",\n";
    let t = read_csv_trace(csv.as_bytes(), &c.spec, &c.values).map_err(|e| e.to_string())?;
    let report = run(&c, &t, false).map_err(|e| e.to_string())?;
    let origin = vec![Value::Float(0.0), Value::Float(0.0)];
    let expected: Vec<(i64, &str, Value)> = vec![
        (0, "waypoint_distance", Value::Float(10.0)),
        (0, "waypoint_approaching", Value::Bool(false)),
        (0, "waypoint_reached", Value::Bool(false)),
        (1, "waypoint_distance", Value::Float(6.0)),
        (1, "waypoint_approaching", Value::Bool(true)),
        (1, "waypoint_reached", Value::Bool(false)),
        (2, "waypoint_distance", Value::Float(7.0)),
        (2, "waypoint_approaching", Value::Bool(false)),
        (2, "waypoint_reached", Value::Bool(false)),
        (3, "waypoint_distance", Value::Float(3.0)),
        (3, "waypoint_approaching", Value::Bool(true)),
        (3, "waypoint_reached", Value::Bool(true)),
    ];
    let got: Vec<(i64, &str, Value)> = report
        .dump
        .iter()
        .map(|v| (v.time.to_integer() as i64, v.stream.as_str(), v.value.clone()))
        .collect();
    ensure!(got == expected, "waypoint dump: {got:?}");
    ensure!(report.dump.iter().all(|v| v.params == origin), "waypoint instances: {:?}", report.dump);
    let oracle = oracle_run(&c.spec, &c.values, &c.pacing, &t, 100, &config(false)).map_err(|e| e.to_string())?;
    ensure!(oracle == report, "waypoint oracle disagrees");
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("corpus acceptance", corpus_acceptance),
        ("negative examples", negative_examples),
        ("well-formedness against cycle enumeration", well_formedness),
        ("lattice laws", lattices),
        ("safety of accepted specifications", safety),
        ("determinism", determinism),
        ("oracle equivalence", oracle_equivalence),
        ("scaling", scaling),
        ("hand traces", hand_traces),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("{label}: PASS ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("{label}: FAIL ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
