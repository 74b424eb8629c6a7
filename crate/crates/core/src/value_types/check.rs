use super::lattice::{vt_meet, vt_more_concrete, ValueType};
use crate::ast::*;
use crate::diagnostic::{Diagnostic, DiagnosticKind as K, Span};

/// Declared types: `alpha` per stream (inputs first, then outputs; `Top` when
/// not annotated) and `rho` per output parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueTypeEnvironment {
    pub alpha: Vec<ValueType>,
    pub rho: Vec<Vec<ValueType>>,
}

impl ValueTypeEnvironment {
    pub fn from_annotations(spec: &Specification) -> ValueTypeEnvironment {
        let ann = |t: &Option<ValueType>| t.clone().unwrap_or(ValueType::Top);
        let mut alpha: Vec<ValueType> = spec.inputs.iter().map(|i| ann(&i.value_type)).collect();
        alpha.extend(spec.outputs.iter().map(|o| ann(&o.value_type)));
        let rho = spec.outputs.iter().map(|o| o.params.iter().map(|p| ann(&p.ty)).collect()).collect();
        ValueTypeEnvironment { alpha, rho }
    }
}

/// Outcome of value type checking.
#[derive(Clone, Debug)]
pub struct ValueTyping {
    /// `Top` for inputs without annotation whose values are never read.
    pub inputs: Vec<ValueType>,
    pub outputs: Vec<ValueType>,
    pub params: Vec<Vec<ValueType>>,
    /// The input specification with every literal's type filled in.
    pub elaborated: Specification,
}

impl ValueTyping {
    pub fn stream_type(&self, s: StreamRef) -> &ValueType {
        match s {
            StreamRef::Input(i) => &self.inputs[i],
            StreamRef::Output(o) => &self.outputs[o],
        }
    }
}

/// Infers a value type for every stream and parameter, or explains why none
/// exists. Unannotated outputs are solved by iterating to a fixpoint.
pub fn check_value_types(spec: &Specification, env: &ValueTypeEnvironment) -> Result<ValueTyping, Vec<Diagnostic>> {
    let n_in = spec.inputs.len();
    let mut cx = Checker {
        spec,
        inputs: env.alpha[..n_in].to_vec(),
        outputs: env.alpha[n_in..].to_vec(),
        params: env.rho.clone(),
        diags: Vec::new(),
        report: false,
    };
    let mut work = spec.clone();
    for _ in 0..spec.outputs.len() + 2 {
        let mut changed = false;
        for o in 0..work.outputs.len() {
            let (params, ty) = cx.output(&mut work.outputs[o], o, env);
            changed |= params != cx.params[o] || ty != cx.outputs[o];
            cx.params[o] = params;
            cx.outputs[o] = ty;
        }
        if !changed {
            break;
        }
    }
    cx.report = true;
    for o in 0..work.outputs.len() {
        let before = cx.diags.len();
        let (params, ty) = cx.output(&mut work.outputs[o], o, env);
        let out = &spec.outputs[o];
        if ty == ValueType::Top && cx.diags.len() == before {
            cx.err(K::UnresolvedType, out.span, format!("cannot infer a value type for `{}`; add an annotation", out.name));
        }
        for (p, t) in out.params.iter().zip(&params) {
            if *t == ValueType::Top {
                cx.err(K::UnresolvedType, p.span, format!("cannot infer a value type for parameter `{}`", p.name));
            }
        }
        cx.params[o] = params;
        cx.outputs[o] = ty;
    }
    if cx.diags.is_empty() {
        Ok(ValueTyping { inputs: cx.inputs, outputs: cx.outputs, params: cx.params, elaborated: work })
    } else {
        Err(cx.diags)
    }
}

struct Checker<'a> {
    spec: &'a Specification,
    inputs: Vec<ValueType>,
    outputs: Vec<ValueType>,
    params: Vec<Vec<ValueType>>,
    diags: Vec<Diagnostic>,
    report: bool,
}

fn mismatch_text(expected: &ValueType, found: &ValueType) -> String {
    format!("expected {expected}, found {found}")
}

impl Checker<'_> {
    fn err(&mut self, kind: K, span: Span, message: impl Into<String>) {
        if self.report {
            self.diags.push(Diagnostic::error(kind, span, message));
        }
    }

    /// Types one output; returns its parameter types and value type.
    fn output(&mut self, out: &mut OutputStream, o: usize, env: &ValueTypeEnvironment) -> (Vec<ValueType>, ValueType) {
        let none: Vec<ValueType> = Vec::new();
        let t = self.infer(&mut out.spawn.when, &ValueType::Bool, &none, false);
        self.require(&ValueType::Bool, &t, out.spawn.when.span, "spawn condition");
        let mut params = Vec::new();
        for (k, with) in out.spawn.with.iter_mut().enumerate() {
            let ann = env.rho[o][k].clone();
            let t = self.infer(with, &ann, &none, false);
            if !is_unknown(&t) && ann != ValueType::Top && !vt_more_concrete(&ann, &t) {
                let name = out.params[k].name.clone();
                self.err(K::TypeMismatch, with.span, format!("spawn value for parameter `{name}`: {}", mismatch_text(&ann, &t)));
            }
            params.push(if ann == ValueType::Top { t } else { ann });
        }
        while params.len() < out.params.len() {
            params.push(env.rho[o][params.len()].clone());
        }
        let t = self.infer(&mut out.eval.when, &ValueType::Bool, &params, false);
        self.require(&ValueType::Bool, &t, out.eval.when.span, "eval condition");
        let ann = env.alpha[self.spec.inputs.len() + o].clone();
        let t = self.infer(&mut out.eval.with, &ann, &params, false);
        if out.is_trigger() {
            if !is_unknown(&t) && t != ValueType::Bool && t != ValueType::String {
                self.err(K::TypeMismatch, out.eval.with.span, format!("trigger messages must be String or Bool, found {t}"));
            }
        } else if !is_unknown(&t) && ann != ValueType::Top && !vt_more_concrete(&ann, &t) {
            self.err(
                K::TypeMismatch,
                out.eval.with.span,
                format!("value of `{}` does not match its annotation: {}", out.name, mismatch_text(&ann, &t)),
            );
        }
        let t_close = self.infer(&mut out.close.when, &ValueType::Bool, &params, false);
        self.require(&ValueType::Bool, &t_close, out.close.when.span, "close condition");
        let ty = if ann != ValueType::Top {
            ann
        } else if t == ValueType::Bottom {
            ValueType::Top
        } else {
            t
        };
        (params, ty)
    }

    fn require(&mut self, expected: &ValueType, found: &ValueType, span: Span, what: &str) {
        if !is_unknown(found) && found != expected {
            self.err(K::TypeMismatch, span, format!("{what}: {}", mismatch_text(expected, found)));
        }
    }

    fn stream_type(&mut self, target: StreamRef, span: Span) -> ValueType {
        match target {
            StreamRef::Input(i) => {
                let t = self.inputs[i].clone();
                if t == ValueType::Top {
                    let name = &self.spec.inputs[i].name;
                    let msg = format!("input `{name}` has no type annotation but its value is used");
                    self.err(K::UnresolvedType, span, msg);
                    return ValueType::Bottom;
                }
                t
            }
            StreamRef::Output(o) => self.outputs[o].clone(),
        }
    }

    /// Types the parameter arguments of a stream access.
    fn access_args(&mut self, target: StreamRef, args: &mut [Expression], params: &[ValueType]) {
        let want: Vec<ValueType> = match target {
            StreamRef::Output(o) => self.params[o].clone(),
            StreamRef::Input(_) => Vec::new(),
        };
        for (k, arg) in args.iter_mut().enumerate() {
            let p = want.get(k).cloned().unwrap_or(ValueType::Top);
            let t = self.infer(arg, &p, params, false);
            if !is_unknown(&t) && !is_unknown(&p) && !vt_more_concrete(&p, &t) {
                let name = self.spec.stream_name(target).to_string();
                self.err(K::TypeMismatch, arg.span, format!("argument {k} of `{name}`: {}", mismatch_text(&p, &t)));
            }
        }
    }

    fn infer(&mut self, e: &mut Expression, expect: &ValueType, params: &[ValueType], option_ok: bool) -> ValueType {
        let span = e.span;
        let t = match &mut e.kind {
            ExprKind::Constant { value, ty } => {
                let t = self.literal(value, expect, span);
                *ty = (!is_unknown(&t)).then(|| t.clone());
                t
            }
            ExprKind::ParameterAccess(i) => params.get(*i).cloned().unwrap_or(ValueType::Bottom),
            ExprKind::Tuple(items) => {
                let expects: Vec<ValueType> = match expect {
                    ValueType::Tuple(ts) if ts.len() == items.len() => ts.clone(),
                    _ => vec![ValueType::Top; items.len()],
                };
                let ts: Vec<ValueType> =
                    items.iter_mut().zip(&expects).map(|(i, x)| self.infer(i, x, params, false)).collect();
                if ts.contains(&ValueType::Bottom) {
                    ValueType::Bottom
                } else {
                    ValueType::Tuple(ts)
                }
            }
            ExprKind::Sync { target, args } => {
                let target = *target;
                self.access_args(target, args, params);
                self.stream_type(target, span)
            }
            ExprKind::Hold { target, args } | ExprKind::Offset { target, args, .. } => {
                let target = *target;
                self.access_args(target, args, params);
                ValueType::option(self.stream_type(target, span))
            }
            ExprKind::Aggregate { target, args, func, exact, .. } => {
                let (target, func, exact) = (*target, *func, *exact);
                self.access_args(target, args, params);
                let st = self.stream_type(target, span);
                self.aggregate(func, exact, st, span)
            }
            ExprKind::Default { inner, fallback } => {
                let inner_expect = if *expect == ValueType::Top { ValueType::Top } else { ValueType::option(expect.clone()) };
                let it = self.infer(inner, &inner_expect, params, true);
                let v1 = match it {
                    ValueType::Option(v) => *v,
                    ValueType::Top => ValueType::Top,
                    ValueType::Bottom => ValueType::Bottom,
                    other => {
                        self.err(
                            K::TypeMismatch,
                            inner.span,
                            format!("`defaults` needs an optional value, found {other} which always exists"),
                        );
                        ValueType::Bottom
                    }
                };
                let fe = if v1 == ValueType::Top || v1 == ValueType::Bottom { expect.clone() } else { v1.clone() };
                let v2 = self.infer(fallback, &fe, params, false);
                self.meet(&v1, &v2, fallback.span, "default value")
            }
            ExprKind::Function { func, args } => {
                let func = func.clone();
                self.function(&func, args, expect, params, span)
            }
        };
        if t.is_option() && !option_ok {
            let msg = format!("value of type {t} may be absent here; provide a default with `.defaults(to: ...)`");
            self.err(K::TypeMismatch, span, msg);
            return ValueType::Bottom;
        }
        t
    }

    fn meet(&mut self, a: &ValueType, b: &ValueType, span: Span, what: &str) -> ValueType {
        if *a == ValueType::Bottom || *b == ValueType::Bottom {
            return ValueType::Bottom;
        }
        let m = vt_meet(a, b);
        if m == ValueType::Bottom {
            self.err(K::TypeMismatch, span, format!("{what}: incompatible types {a} and {b}"));
        }
        m
    }

    fn literal(&mut self, v: &Literal, expect: &ValueType, span: Span) -> ValueType {
        match v {
            Literal::Bool(_) => ValueType::Bool,
            Literal::Str(_) => ValueType::String,
            Literal::Float(_) => match expect {
                ValueType::Float(w) => ValueType::Float(*w),
                _ => ValueType::FLOAT64,
            },
            Literal::Int(i) => {
                let t = match expect {
                    ValueType::Int(_) | ValueType::UInt(_) => expect.clone(),
                    _ => ValueType::INT64,
                };
                if int_fits(*i, &t) {
                    t
                } else {
                    self.err(K::TypeMismatch, span, format!("literal {i} does not fit in {t}"));
                    ValueType::Bottom
                }
            }
        }
    }

    fn aggregate(&mut self, func: AggregationFunction, exact: bool, st: ValueType, span: Span) -> ValueType {
        use AggregationFunction as A;
        if st == ValueType::Bottom {
            return st;
        }
        let t = match func {
            A::Count => ValueType::UINT64,
            A::Sum | A::Avg | A::Min | A::Max => {
                if !st.is_numeric() && st != ValueType::Top {
                    self.err(K::TypeMismatch, span, format!("`{}` aggregates numbers, found {st}", func.name()));
                    return ValueType::Bottom;
                }
                if func == A::Sum {
                    st
                } else {
                    ValueType::option(st)
                }
            }
            A::Exists | A::Forall => {
                if st != ValueType::Bool && st != ValueType::Top {
                    self.err(K::TypeMismatch, span, format!("`{}` aggregates booleans, found {st}", func.name()));
                    return ValueType::Bottom;
                }
                ValueType::Bool
            }
        };
        if exact {
            ValueType::option(t)
        } else {
            t
        }
    }

    /// Types operands that must share one type. Literal-only operands are
    /// typed last so they adopt the type of their siblings.
    fn unify(&mut self, args: &mut [Expression], expect: &ValueType, params: &[ValueType]) -> Vec<ValueType> {
        let mut types = vec![ValueType::Top; args.len()];
        let mut m = ValueType::Top;
        for (i, a) in args.iter_mut().enumerate() {
            if !flexible(a) {
                types[i] = self.infer(a, expect, params, false);
                if types[i] != ValueType::Bottom {
                    m = vt_meet(&m, &types[i]);
                }
            }
        }
        let lit_expect = if m == ValueType::Top || m == ValueType::Bottom { expect.clone() } else { m };
        for (i, a) in args.iter_mut().enumerate() {
            if flexible(a) {
                types[i] = self.infer(a, &lit_expect, params, false);
            }
        }
        types
    }

    fn function(
        &mut self,
        func: &Function,
        args: &mut [Expression],
        expect: &ValueType,
        params: &[ValueType],
        span: Span,
    ) -> ValueType {
        use Function as F;
        if let Some(n) = func.arity() {
            if n != args.len() {
                // Reported by arity validation.
                return ValueType::Bottom;
            }
        }
        match func {
            F::Neg | F::Add | F::Sub | F::Mul | F::Div | F::Rem | F::Pow | F::Min | F::Max | F::Abs => {
                let types = self.unify(args, expect, params);
                let t = self.meet_all(&types, span);
                self.numeric(t, func, span, matches!(func, F::Neg))
            }
            F::Eq | F::Ne | F::Lt | F::Le | F::Gt | F::Ge => {
                let types = self.unify(args, &ValueType::Top, params);
                let t = self.meet_all(&types, span);
                let ordered = !matches!(func, F::Eq | F::Ne);
                if ordered && !is_unknown(&t) && !t.is_numeric() && t != ValueType::String {
                    self.err(K::TypeMismatch, span, format!("cannot order values of type {t}"));
                    return ValueType::Bottom;
                }
                if t == ValueType::Bottom {
                    ValueType::Bottom
                } else {
                    ValueType::Bool
                }
            }
            F::Not | F::And | F::Or => {
                let mut bad = false;
                for a in args.iter_mut() {
                    let t = self.infer(a, &ValueType::Bool, params, false);
                    if t == ValueType::Bottom {
                        bad = true;
                    } else if t != ValueType::Bool && t != ValueType::Top {
                        self.err(K::TypeMismatch, a.span, format!("boolean operator: {}", mismatch_text(&ValueType::Bool, &t)));
                        bad = true;
                    }
                }
                if bad {
                    ValueType::Bottom
                } else {
                    ValueType::Bool
                }
            }
            F::Ite => {
                let (cond, branches) = args.split_at_mut(1);
                let c = self.infer(&mut cond[0], &ValueType::Bool, params, false);
                self.require(&ValueType::Bool, &c, cond[0].span, "if condition");
                let types = self.unify(branches, expect, params);
                let t = self.meet_all(&types, span);
                if c != ValueType::Bool && !is_unknown(&c) {
                    return ValueType::Bottom;
                }
                t
            }
            F::Project(i) => {
                let t = self.infer(&mut args[0], &ValueType::Top, params, true);
                let (inner, opt) = match t {
                    ValueType::Option(inner) => (*inner, true),
                    other => (other, false),
                };
                let elem = match inner {
                    ValueType::Tuple(items) if *i < items.len() => items[*i].clone(),
                    ValueType::Top => ValueType::Top,
                    ValueType::Bottom => ValueType::Bottom,
                    other => {
                        self.err(K::TypeMismatch, span, format!("cannot take element {i} of {other}"));
                        ValueType::Bottom
                    }
                };
                if opt {
                    ValueType::option(elem)
                } else {
                    elem
                }
            }
            F::Sqrt | F::Sin | F::Cos | F::Tan | F::Arcsin | F::Arccos | F::Arctan | F::Exp | F::Ln => {
                let x = if matches!(expect, ValueType::Float(_)) { expect.clone() } else { ValueType::FLOAT64 };
                let t = self.infer(&mut args[0], &x, params, false);
                match t {
                    ValueType::Float(_) | ValueType::Top | ValueType::Bottom => t,
                    other => {
                        let name = func.builtin_name().unwrap_or("function");
                        self.err(K::TypeMismatch, span, format!("`{name}` needs a Float argument, found {other}"));
                        ValueType::Bottom
                    }
                }
            }
            F::Cast(from, to) => {
                if !from.is_numeric() || !to.is_numeric() {
                    self.err(K::TypeMismatch, span, "`cast` converts between numeric types");
                    return ValueType::Bottom;
                }
                let t = self.infer(&mut args[0], from, params, false);
                if !is_unknown(&t) && !vt_more_concrete(from, &t) {
                    self.err(K::TypeMismatch, args[0].span, format!("cast argument: {}", mismatch_text(from, &t)));
                    return ValueType::Bottom;
                }
                to.clone()
            }
            F::Format => {
                let (fmt, rest) = args.split_at_mut(1);
                let t = self.infer(&mut fmt[0], &ValueType::String, params, false);
                self.require(&ValueType::String, &t, fmt[0].span, "format string");
                let mut ok = t == ValueType::String || t == ValueType::Top;
                for a in rest {
                    ok &= self.infer(a, &ValueType::Top, params, false) != ValueType::Bottom;
                }
                if ok {
                    ValueType::String
                } else {
                    ValueType::Bottom
                }
            }
        }
    }

    fn meet_all(&mut self, types: &[ValueType], span: Span) -> ValueType {
        if types.contains(&ValueType::Bottom) {
            return ValueType::Bottom;
        }
        let m = types.iter().fold(ValueType::Top, |acc, t| vt_meet(&acc, t));
        if m == ValueType::Bottom {
            let shown: Vec<String> = types.iter().map(|t| t.to_string()).collect();
            self.err(K::TypeMismatch, span, format!("operands have incompatible types {}", shown.join(" and ")));
        }
        m
    }

    fn numeric(&mut self, t: ValueType, func: &Function, span: Span, signed: bool) -> ValueType {
        match &t {
            ValueType::Top | ValueType::Bottom => t,
            ValueType::UInt(_) if signed => {
                self.err(K::TypeMismatch, span, format!("cannot negate unsigned value of type {t}"));
                ValueType::Bottom
            }
            _ if t.is_numeric() => t,
            _ => {
                let what = func.builtin_name().map_or_else(|| "arithmetic".to_string(), |n| format!("`{n}`"));
                self.err(K::TypeMismatch, span, format!("{what} needs numeric operands, found {t}"));
                ValueType::Bottom
            }
        }
    }
}

fn is_unknown(t: &ValueType) -> bool {
    matches!(t, ValueType::Top | ValueType::Bottom)
}

/// Expressions built only from numeric literals; their type is dictated by
/// the surrounding operands.
fn flexible(e: &Expression) -> bool {
    match &e.kind {
        ExprKind::Constant { value: Literal::Int(_) | Literal::Float(_), .. } => true,
        ExprKind::Function { func, args } => match func {
            Function::Neg | Function::Add | Function::Sub | Function::Mul | Function::Div | Function::Rem | Function::Pow => {
                args.iter().all(flexible)
            }
            Function::Ite => args[1..].iter().all(flexible),
            _ => false,
        },
        _ => false,
    }
}

fn int_fits(i: i128, t: &ValueType) -> bool {
    match t {
        ValueType::Int(w) => {
            let half = 1i128 << (w - 1);
            -half <= i && i < half
        }
        ValueType::UInt(w) => 0 <= i && i < (1i128 << w),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn typed(src: &str) -> Result<(Specification, ValueTyping), Vec<K>> {
        let spec = desugar(&parse(src).unwrap()).unwrap();
        let env = ValueTypeEnvironment::from_annotations(&spec);
        check_value_types(&spec, &env).map(|t| (spec, t)).map_err(|d| d.into_iter().map(|d| d.kind).collect())
    }

    fn type_of(src: &str, name: &str) -> ValueType {
        let (spec, t) = typed(src).unwrap_or_else(|e| panic!("{e:?}"));
        t.stream_type(spec.lookup(name).unwrap()).clone()
    }

    #[test]
    fn sync_takes_accessed_type() {
        assert_eq!(type_of("input a: Int64\noutput b: Int64 @a@ := a\noutput c @a@ := b", "c"), ValueType::INT64);
    }

    #[test]
    fn offset_without_default_is_rejected() {
        assert_eq!(typed("input b: Int\noutput c: Int := b.offset(by: -1)").unwrap_err(), vec![K::TypeMismatch]);
        assert_eq!(typed("input b: Int\noutput c := b.offset(by: -1) + 1").unwrap_err(), vec![K::TypeMismatch]);
    }

    #[test]
    fn literals_adopt_operand_types() {
        assert_eq!(type_of("input s: UInt8\noutput c := s == 1", "c"), ValueType::Bool);
        assert_eq!(type_of("input s: Int32\noutput c := 1 + s * 2", "c"), ValueType::Int(32));
        assert_eq!(typed("input s: UInt8\noutput c := s == 300").unwrap_err(), vec![K::TypeMismatch]);
        assert_eq!(typed("input s: UInt8\noutput c := s + 1.5").unwrap_err(), vec![K::TypeMismatch]);
    }

    #[test]
    fn widening_to_annotations() {
        assert_eq!(type_of("input s: Int32\noutput c: Int64 := s", "c"), ValueType::INT64);
        assert_eq!(typed("input s: Int64\noutput c: Int32 := s").unwrap_err(), vec![K::TypeMismatch]);
    }

    #[test]
    fn self_reference_resolves() {
        let src = "input h: Float\noutput i := i.offset(by: -1).defaults(to: h)";
        assert_eq!(type_of(src, "i"), ValueType::FLOAT64);
        assert_eq!(typed("output i := i.offset(by: -1).defaults(to: i)").unwrap_err(), vec![K::UnresolvedType]);
    }

    #[test]
    fn untyped_input_only_fails_when_read() {
        assert!(typed("input a\noutput b @a@ := 1").is_ok());
        assert_eq!(typed("input a\noutput b := a").unwrap_err(), vec![K::UnresolvedType]);
    }

    #[test]
    fn waypoint_types() {
        let src = include_str!("../../specs/corpus/waypoint.lola");
        assert_eq!(type_of(src, "waypoint_distance"), ValueType::FLOAT64);
        assert_eq!(type_of(src, "waypoint_reached"), ValueType::Bool);
    }

    #[test]
    fn partial_aggregation_needs_default() {
        assert_eq!(
            typed("input x: Float\noutput a @1Hz@ := x.aggregate(over: 1s, using: avg)").unwrap_err(),
            vec![K::TypeMismatch]
        );
        assert!(typed("input x: Float\noutput a @1Hz@ := x.aggregate(over: 1s, using: sum)").is_ok());
    }

    #[test]
    fn corpus_types() {
        for src in [
            include_str!("../../specs/corpus/intruder.lola"),
            include_str!("../../specs/corpus/watchdog.lola"),
            include_str!("../../specs/corpus/rcc.lola"),
            include_str!("../../specs/corpus/ffd.lola"),
            include_str!("../../specs/corpus/geofence.lola"),
        ] {
            typed(src).unwrap_or_else(|e| panic!("{e:?}"));
        }
    }
}
