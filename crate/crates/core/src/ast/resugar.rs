use super::*;
use crate::parser::surface::{self as s, SExpr, SExprKind};
use crate::time::format_rational;

/// Turns a core specification back into surface syntax. Desugaring the
/// result gives back the same specification.
pub fn resugar(spec: &Specification) -> s::SurfaceSpec {
    let mut decls = Vec::new();
    for input in &spec.inputs {
        decls.push(s::Decl::Input(s::InputDecl {
            name: ident(&input.name),
            ty: input.value_type.as_ref().map(surface_type),
            span: Span::default(),
        }));
    }
    for out in &spec.outputs {
        decls.push(output(spec, out));
    }
    s::SurfaceSpec { decls }
}

/// Renders one core expression in surface syntax. `params` names the
/// parameters of the stream the expression belongs to.
pub fn print_expression(spec: &Specification, params: &[Parameter], e: &Expression) -> String {
    crate::parser::print_expr(&Names { spec, params }.expr(e))
}

fn ident(name: &str) -> s::Ident {
    s::Ident { name: name.to_string(), span: Span::default() }
}

fn sexpr(kind: SExprKind) -> SExpr {
    SExpr { kind, span: Span::default() }
}

fn surface_type(ty: &ValueType) -> s::SurfaceType {
    match ty {
        ValueType::Tuple(items) => s::SurfaceType::Tuple(items.iter().map(surface_type).collect(), Span::default()),
        other => s::SurfaceType::Named(ident(&other.to_string())),
    }
}

fn output(spec: &Specification, out: &OutputStream) -> s::Decl {
    let params: Vec<s::Param> = out
        .params
        .iter()
        .map(|p| s::Param { name: ident(&p.name), ty: p.ty.as_ref().map(surface_type) })
        .collect();
    let cx = Names { spec, params: &out.params };
    let local = [&out.eval.pacing, &out.close.pacing].iter().any(|p| matches!(p, PacingAnnotation::LocalPeriod(_)));
    let needs_spawn = out.has_spawn() || !out.params.is_empty() || local;
    let simple = !needs_spawn && !out.has_close();
    if out.is_trigger() {
        let message = match &out.eval.with.kind {
            ExprKind::Constant { value: Literal::Str(m), .. } => Some(Some(m.clone())),
            _ if out.eval.with.is_const_bool(true) => Some(None),
            _ => None,
        };
        if let (true, Some(message)) = (simple, message) {
            return s::Decl::Trigger(s::TriggerDecl {
                params,
                body: s::TriggerBody::Condition {
                    pacing: pacing(spec, &out.eval.pacing),
                    condition: cx.expr(&out.eval.when),
                    message,
                },
                span: Span::default(),
            });
        }
        return s::Decl::Trigger(s::TriggerDecl {
            params,
            body: s::TriggerBody::Clauses(clauses(&cx, out, needs_spawn)),
            span: Span::default(),
        });
    }
    let body = if simple && out.eval.when.is_const_bool(true) {
        s::StreamBody::Shorthand { pacing: pacing(spec, &out.eval.pacing), expr: cx.expr(&out.eval.with) }
    } else {
        s::StreamBody::Clauses(clauses(&cx, out, needs_spawn))
    };
    s::Decl::Output(s::OutputDecl {
        name: ident(&out.name),
        params,
        ty: out.value_type.as_ref().map(surface_type),
        body,
        span: Span::default(),
    })
}

fn clauses(cx: &Names, out: &OutputStream, needs_spawn: bool) -> s::Clauses {
    let spawn_cx = Names { spec: cx.spec, params: &[] };
    let spawn = needs_spawn.then(|| s::Clause {
        pacing: pacing(cx.spec, &out.spawn.pacing),
        when: (!out.spawn.when.is_const_bool(true)).then(|| spawn_cx.expr(&out.spawn.when)),
        with: match out.spawn.with.as_slice() {
            [] => None,
            [one] => Some(spawn_cx.expr(one)),
            many => Some(sexpr(SExprKind::Tuple(many.iter().map(|e| spawn_cx.expr(e)).collect()))),
        },
        span: Span::default(),
    });
    let with_omitted = out.is_trigger() && out.eval.with.is_const_bool(true);
    let eval = Some(s::Clause {
        pacing: pacing(cx.spec, &out.eval.pacing),
        when: (!out.eval.when.is_const_bool(true)).then(|| cx.expr(&out.eval.when)),
        with: (!with_omitted).then(|| cx.expr(&out.eval.with)),
        span: Span::default(),
    });
    let close = out.has_close().then(|| s::Clause {
        pacing: pacing(cx.spec, &out.close.pacing),
        when: Some(cx.expr(&out.close.when)),
        with: None,
        span: Span::default(),
    });
    s::Clauses { spawn, eval, close }
}

fn pacing(spec: &Specification, p: &PacingAnnotation) -> Option<s::SPacing> {
    match p {
        PacingAnnotation::Any => None,
        PacingAnnotation::GlobalPeriod(period) | PacingAnnotation::LocalPeriod(period) => {
            let (value, unit) = duration(period);
            Some(s::SPacing::Frequency { value, unit, span: Span::default() })
        }
        PacingAnnotation::Event(f) => {
            let term = |t: &std::collections::BTreeSet<usize>| {
                t.iter()
                    .map(|&i| s::Activation::Stream(ident(&spec.input_name(i))))
                    .reduce(|a, b| s::Activation::And(Box::new(a), Box::new(b)))
                    .unwrap_or(s::Activation::True(Span::default()))
            };
            let act = f
                .terms()
                .iter()
                .map(term)
                .reduce(|a, b| s::Activation::Or(Box::new(a), Box::new(b)))
                .unwrap_or(s::Activation::True(Span::default()));
            Some(s::SPacing::Activation(act))
        }
    }
}

/// A period as `value unit`, preferring seconds when the decimal terminates.
fn duration(period: &crate::time::Rational) -> (String, String) {
    let secs = format_rational(period);
    if !secs.contains('/') {
        return (secs, "s".into());
    }
    let hz = format_rational(&period.recip());
    if !hz.contains('/') {
        return (hz, "Hz".into());
    }
    // Not reachable from parsed input: every unit scales a decimal.
    (secs, "s".into())
}

struct Names<'a> {
    spec: &'a Specification,
    params: &'a [Parameter],
}

impl Names<'_> {
    fn access(&self, target: StreamRef, args: &[Expression]) -> SExpr {
        let name = self.spec.stream_name(target);
        if args.is_empty() {
            sexpr(SExprKind::Ident(name.to_string()))
        } else {
            sexpr(SExprKind::Call { name: ident(name), generics: Vec::new(), args: args.iter().map(|a| self.expr(a)).collect() })
        }
    }

    fn method(&self, receiver: SExpr, name: &str, args: Vec<(Option<&str>, SExpr)>) -> SExpr {
        sexpr(SExprKind::Method {
            receiver: Box::new(receiver),
            name: ident(name),
            args: args.into_iter().map(|(l, value)| s::NamedArg { label: l.map(ident), value }).collect(),
        })
    }

    fn expr(&self, e: &Expression) -> SExpr {
        match &e.kind {
            ExprKind::Sync { target, args } => self.access(*target, args),
            ExprKind::Hold { target, args } => self.method(self.access(*target, args), "hold", Vec::new()),
            ExprKind::Offset { target, args, offset } => {
                let by = sexpr(SExprKind::Unary(s::UnOp::Neg, Box::new(sexpr(SExprKind::Int(offset.to_string())))));
                self.method(self.access(*target, args), "offset", vec![(Some("by"), by)])
            }
            ExprKind::Aggregate { target, args, window, func, exact } => {
                let (value, unit) = duration(window);
                let over = if *exact { "over_exactly" } else { "over" };
                self.method(
                    self.access(*target, args),
                    "aggregate",
                    vec![
                        (Some(over), sexpr(SExprKind::Duration(value, unit))),
                        (Some("using"), sexpr(SExprKind::Ident(func.name().to_string()))),
                    ],
                )
            }
            ExprKind::Default { inner, fallback } => {
                self.method(self.expr(inner), "defaults", vec![(Some("to"), self.expr(fallback))])
            }
            ExprKind::Constant { value, .. } => literal(value),
            ExprKind::ParameterAccess(i) => {
                let name = self.params.get(*i).map_or_else(|| format!("p{i}"), |p| p.name.clone());
                sexpr(SExprKind::Ident(name))
            }
            ExprKind::Tuple(items) => sexpr(SExprKind::Tuple(items.iter().map(|i| self.expr(i)).collect())),
            ExprKind::Function { func, args } => self.function(func, args),
        }
    }

    fn function(&self, func: &Function, args: &[Expression]) -> SExpr {
        let a: Vec<SExpr> = args.iter().map(|x| self.expr(x)).collect();
        let binary = |op: s::BinOp, a: Vec<SExpr>| {
            let mut it = a.into_iter();
            let l = it.next().expect("binary operand");
            let r = it.next().expect("binary operand");
            sexpr(SExprKind::Binary(op, Box::new(l), Box::new(r)))
        };
        let call = |name: &str, generics: Vec<s::SurfaceType>, a: Vec<SExpr>| {
            sexpr(SExprKind::Call { name: ident(name), generics, args: a })
        };
        match func {
            Function::Neg => sexpr(SExprKind::Unary(s::UnOp::Neg, Box::new(a.into_iter().next().expect("operand")))),
            Function::Not => sexpr(SExprKind::Unary(s::UnOp::Not, Box::new(a.into_iter().next().expect("operand")))),
            Function::Add => binary(s::BinOp::Add, a),
            Function::Sub => binary(s::BinOp::Sub, a),
            Function::Mul => binary(s::BinOp::Mul, a),
            Function::Div => binary(s::BinOp::Div, a),
            Function::Rem => binary(s::BinOp::Rem, a),
            Function::Pow => binary(s::BinOp::Pow, a),
            Function::Eq => binary(s::BinOp::Eq, a),
            Function::Ne => binary(s::BinOp::Ne, a),
            Function::Lt => binary(s::BinOp::Lt, a),
            Function::Le => binary(s::BinOp::Le, a),
            Function::Gt => binary(s::BinOp::Gt, a),
            Function::Ge => binary(s::BinOp::Ge, a),
            Function::And => binary(s::BinOp::And, a),
            Function::Or => binary(s::BinOp::Or, a),
            Function::Ite => {
                let mut it = a.into_iter();
                let (c, t, f) = (it.next().expect("cond"), it.next().expect("then"), it.next().expect("else"));
                sexpr(SExprKind::Ite(Box::new(c), Box::new(t), Box::new(f)))
            }
            Function::Project(i) => sexpr(SExprKind::Field(Box::new(a.into_iter().next().expect("operand")), *i)),
            Function::Cast(from, to) => call("cast", vec![surface_type(from), surface_type(to)], a),
            Function::Format => {
                let mut it = a.into_iter();
                let recv = it.next().expect("format string");
                self.method(recv, "format", it.map(|x| (None, x)).collect())
            }
            other => call(other.builtin_name().expect("named builtin"), Vec::new(), a),
        }
    }
}

fn literal(value: &Literal) -> SExpr {
    let neg = |inner: SExpr| sexpr(SExprKind::Unary(s::UnOp::Neg, Box::new(inner)));
    match value {
        Literal::Bool(b) => sexpr(SExprKind::Bool(*b)),
        Literal::Str(text) => sexpr(SExprKind::Str(text.clone())),
        Literal::Int(i) if *i < 0 => neg(sexpr(SExprKind::Int(i.unsigned_abs().to_string()))),
        Literal::Int(i) => sexpr(SExprKind::Int(i.to_string())),
        Literal::Float(x) => {
            let text = format!("{:?}", x.0.abs());
            if x.0.is_sign_negative() {
                neg(sexpr(SExprKind::Float(text)))
            } else {
                sexpr(SExprKind::Float(text))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, print_spec};

    #[test]
    fn corpus_desugaring_is_idempotent() {
        for src in [
            include_str!("../../specs/corpus/intruder.lola"),
            include_str!("../../specs/corpus/waypoint.lola"),
            include_str!("../../specs/corpus/watchdog.lola"),
            include_str!("../../specs/corpus/rcc.lola"),
            include_str!("../../specs/corpus/ffd.lola"),
            include_str!("../../specs/corpus/geofence.lola"),
        ] {
            let once = desugar(&parse(src).unwrap()).unwrap();
            let printed = print_spec(&resugar(&once));
            let twice = desugar(&parse(&printed).unwrap_or_else(|e| panic!("{e:?}\n{printed}"))).unwrap();
            assert_eq!(once, twice, "{printed}");
        }
    }
}
