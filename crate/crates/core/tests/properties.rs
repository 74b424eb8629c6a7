use proptest::prelude::*;

use lolacheck::ast::{desugar, resugar, ExprKind, Expression, Function, Literal, StreamRef};
use lolacheck::bench_gen::{generate, random_trace, random_welltyped, BenchKind};
use lolacheck::parser::{parse, print_spec};
use lolacheck::pipeline::{check_source, frontend};
use lolacheck::semantic_types::{canonicalize, st_meet, st_more_concrete, SemanticType};
use lolacheck::trace_io::{read_csv_trace, write_csv_trace};
use lolacheck::value_types::{vt_meet, vt_more_concrete, ValueType};

/// Truth value of a boolean expression over the inputs, with input `i` set
/// to bit `i` of `bits`.
fn truth(e: &Expression, bits: u32) -> bool {
    match &e.kind {
        ExprKind::Constant { value: Literal::Bool(b), .. } => *b,
        ExprKind::Sync { target: StreamRef::Input(i), .. } => bits & (1 << i) != 0,
        ExprKind::Function { func, args } => {
            let arg = |k: usize| truth(&args[k], bits);
            match func {
                Function::Not => !arg(0),
                Function::And => args.iter().all(|a| truth(a, bits)),
                Function::Or => args.iter().any(|a| truth(a, bits)),
                Function::Eq => arg(0) == arg(1),
                Function::Ne => arg(0) != arg(1),
                other => panic!("unexpected {other:?}"),
            }
        }
        other => panic!("unexpected {other:?}"),
    }
}

fn bool_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        4 => prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from),
        1 => prop::sample::select(vec!["true", "false"]).prop_map(String::from),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} && {y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} || {y})")),
            inner.clone().prop_map(|x| format!("!{x}")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x} == {y})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("({x} != {y})")),
        ]
    })
}

fn bool_expr(src: &str) -> Expression {
    let spec = frontend(&format!("input a: Bool\ninput b: Bool\ninput c: Bool\ninput d: Bool\noutput o := {src}"))
        .unwrap_or_else(|e| panic!("{e:?}"));
    spec.outputs[0].eval.with.clone()
}

fn implies(a: &Expression, b: &Expression) -> bool {
    (0..16).all(|bits| !truth(a, bits) || truth(b, bits))
}

fn value_type() -> impl Strategy<Value = ValueType> {
    let leaf = prop_oneof![
        Just(ValueType::Top),
        Just(ValueType::Bottom),
        Just(ValueType::Bool),
        Just(ValueType::String),
        prop::sample::select(vec![8u8, 16, 32, 64]).prop_map(ValueType::UInt),
        prop::sample::select(vec![8u8, 16, 32, 64]).prop_map(ValueType::Int),
        prop::sample::select(vec![32u8, 64]).prop_map(ValueType::Float),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(ValueType::option),
            prop::collection::vec(inner, 0..3).prop_map(|items| {
                if items.contains(&ValueType::Bottom) {
                    ValueType::Bottom
                } else {
                    ValueType::Tuple(items)
                }
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn canonical_forms_keep_their_truth_table(src in bool_source()) {
        let e = bool_expr(&src);
        let c = canonicalize(&e);
        for bits in 0..16 {
            prop_assert_eq!(truth(&e, bits), truth(&c, bits), "{}", src);
        }
        let st = SemanticType::of(&e);
        prop_assert!(implies(&st.expression(), &e) && implies(&e, &st.expression()));
    }

    #[test]
    fn semantic_refinement_is_sound(x in bool_source(), y in bool_source()) {
        let (ex, ey) = (bool_expr(&x), bool_expr(&y));
        let (sx, sy) = (SemanticType::of(&ex), SemanticType::of(&ey));
        if st_more_concrete(&sx, &sy) {
            prop_assert!(implies(&ex, &ey), "{} should imply {}", x, y);
        }
        let m = st_meet(&sx, &sy).expression();
        for bits in 0..16 {
            prop_assert_eq!(truth(&m, bits), truth(&ex, bits) && truth(&ey, bits));
        }
    }

    #[test]
    fn value_type_order_and_meet(a in value_type(), b in value_type(), c in value_type()) {
        prop_assert!(vt_more_concrete(&a, &a));
        if vt_more_concrete(&a, &b) && vt_more_concrete(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if vt_more_concrete(&a, &b) && vt_more_concrete(&b, &c) {
            prop_assert!(vt_more_concrete(&a, &c));
        }
        let m = vt_meet(&a, &b);
        prop_assert!(vt_more_concrete(&m, &a) && vt_more_concrete(&m, &b));
        if vt_more_concrete(&c, &a) && vt_more_concrete(&c, &b) {
            prop_assert!(vt_more_concrete(&c, &m));
        }
        prop_assert_eq!(vt_meet(&a, &b), vt_meet(&b, &a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn printing_reaches_a_fixpoint(seed in any::<u64>(), budget in 1usize..12) {
        let src = random_welltyped(seed, budget);
        let once = print_spec(&parse(&src).unwrap());
        let reparsed = parse(&once).unwrap_or_else(|e| panic!("{e:?}\n{once}"));
        prop_assert_eq!(print_spec(&reparsed), once);
    }

    #[test]
    fn desugaring_is_idempotent(seed in any::<u64>(), budget in 1usize..12) {
        let once = desugar(&parse(&random_welltyped(seed, budget)).unwrap()).unwrap();
        let printed = print_spec(&resugar(&once));
        let twice = desugar(&parse(&printed).unwrap()).unwrap();
        prop_assert_eq!(&once, &twice, "{}", printed);
        prop_assert!(check_source(&printed).is_ok());
    }

    #[test]
    fn traces_survive_csv(seed in any::<u64>(), events in 0usize..40) {
        let c = check_source(&random_welltyped(seed, 4)).unwrap();
        let trace = random_trace(&c.spec, &c.values, seed, events, 3);
        let mut buf = Vec::new();
        write_csv_trace(&trace, &c.spec, &mut buf).unwrap();
        prop_assert_eq!(read_csv_trace(buf.as_slice(), &c.spec, &c.values).unwrap(), trace);
    }
}

#[test]
fn corpus_traces_survive_csv() {
    for src in [
        include_str!("../specs/corpus/intruder.lola"),
        include_str!("../specs/corpus/waypoint.lola"),
        include_str!("../specs/corpus/geofence.lola"),
    ] {
        let c = check_source(src).unwrap();
        for seed in 0..5 {
            let trace = random_trace(&c.spec, &c.values, seed, 30, 7);
            let mut buf = Vec::new();
            write_csv_trace(&trace, &c.spec, &mut buf).unwrap();
            assert_eq!(read_csv_trace(buf.as_slice(), &c.spec, &c.values).unwrap(), trace);
        }
    }
}

#[test]
fn benchmarks_roundtrip() {
    for kind in BenchKind::ALL {
        let src = generate(kind, 6);
        let once = desugar(&parse(&src).unwrap()).unwrap();
        let twice = desugar(&parse(&print_spec(&resugar(&once))).unwrap()).unwrap();
        assert_eq!(once, twice);
    }
}
