use std::collections::HashMap;

use super::*;
use crate::diagnostic::{Diagnostic, DiagnosticKind as K};
use crate::parser::surface::{self as s, SExpr, SExprKind, StreamBody, SurfaceSpec, TriggerBody};
use crate::time::period_of;

/// Lowers a parsed specification into the core form: every output gets
/// explicit spawn/eval/close declarations, triggers become verdict outputs,
/// constants are inlined and method sugar becomes access operators.
pub fn desugar(surface: &SurfaceSpec) -> Result<Specification, Vec<Diagnostic>> {
    let mut cx = Cx::default();
    cx.declare(surface);
    let mut spec = Specification::default();
    let mut trigger_count = 0;
    for decl in &surface.decls {
        match decl {
            s::Decl::Import(name) => {
                if name.name != "math" {
                    cx.err(K::InvalidDeclaration, name.span, format!("unknown module `{}`", name.name));
                }
            }
            s::Decl::Constant(_) => {}
            s::Decl::Input(i) => spec.inputs.push(InputStream {
                name: i.name.name.clone(),
                value_type: i.ty.as_ref().and_then(|t| cx.ty(t)),
                span: i.span,
            }),
            s::Decl::Output(o) => {
                let out = cx.output(o);
                spec.outputs.push(out);
            }
            s::Decl::Trigger(t) => {
                let name = cx.trigger_names[trigger_count].clone();
                trigger_count += 1;
                let out = cx.trigger(t, name);
                spec.outputs.push(out);
            }
        }
    }
    if cx.diags.is_empty() {
        Ok(spec)
    } else {
        Err(cx.diags)
    }
}

#[derive(Default)]
struct Cx {
    streams: HashMap<String, StreamRef>,
    constants: HashMap<String, Expression>,
    trigger_names: Vec<String>,
    diags: Vec<Diagnostic>,
}

impl Cx {
    fn err(&mut self, kind: K, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(kind, span, message));
    }

    /// Registers every stream and constant name so that forward references
    /// resolve regardless of declaration order.
    fn declare(&mut self, surface: &SurfaceSpec) {
        let mut taken: HashMap<String, Span> = HashMap::new();
        let mut claim = |cx: &mut Cx, name: &s::Ident| {
            if let Some(prev) = taken.get(&name.name) {
                let d = Diagnostic::error(K::DuplicateName, name.span, format!("`{}` is declared twice", name.name))
                    .with_note(format!("first declared at byte {}", prev.start));
                cx.diags.push(d);
                false
            } else {
                taken.insert(name.name.clone(), name.span);
                true
            }
        };
        let mut inputs = 0;
        let mut outputs = 0;
        let mut triggers = 0;
        for decl in &surface.decls {
            match decl {
                s::Decl::Input(i) => {
                    if claim(self, &i.name) {
                        self.streams.insert(i.name.name.clone(), StreamRef::Input(inputs));
                    }
                    inputs += 1;
                }
                s::Decl::Output(o) => {
                    if claim(self, &o.name) {
                        self.streams.insert(o.name.name.clone(), StreamRef::Output(outputs));
                    }
                    outputs += 1;
                }
                s::Decl::Trigger(_) => {
                    outputs += 1;
                    triggers += 1;
                }
                s::Decl::Constant(c) => {
                    claim(self, &c.name);
                }
                s::Decl::Import(_) => {}
            }
        }
        for k in 0..triggers {
            let mut name = format!("trigger_{k}");
            while taken.contains_key(&name) {
                name.push('_');
            }
            taken.insert(name.clone(), Span::default());
            self.trigger_names.push(name);
        }
        for decl in &surface.decls {
            if let s::Decl::Constant(c) = decl {
                self.constant(c);
            }
        }
    }

    fn constant(&mut self, c: &s::ConstantDecl) {
        let ty = c.ty.as_ref().and_then(|t| self.ty(t));
        let Some(mut value) = self.literal(&c.value) else {
            self.err(K::InvalidDeclaration, c.value.span, format!("constant `{}` must be a literal", c.name.name));
            return;
        };
        if let (Some(ValueType::Float(_)), ExprKind::Constant { value: Literal::Int(i), .. }) = (&ty, &value.kind) {
            value.kind = ExprKind::Constant { value: Literal::Float(FloatLit(*i as f64)), ty: None };
        }
        self.constants.insert(c.name.name.clone(), value);
    }

    fn literal(&mut self, e: &SExpr) -> Option<Expression> {
        match &e.kind {
            SExprKind::Int(_) | SExprKind::Float(_) | SExprKind::Str(_) | SExprKind::Bool(_) => {
                Some(self.expr(e, &[]))
            }
            SExprKind::Unary(s::UnOp::Neg, inner) if matches!(inner.kind, SExprKind::Int(_) | SExprKind::Float(_)) => {
                Some(self.expr(e, &[]))
            }
            _ => None,
        }
    }

    fn ty(&mut self, t: &s::SurfaceType) -> Option<ValueType> {
        match t {
            s::SurfaceType::Named(n) => {
                let ty = ValueType::from_name(&n.name);
                if ty.is_none() {
                    self.err(K::UnresolvedType, n.span, format!("unknown type `{}`", n.name));
                }
                ty
            }
            s::SurfaceType::Tuple(items, _) => {
                let items: Vec<Option<ValueType>> = items.iter().map(|i| self.ty(i)).collect();
                items.into_iter().collect::<Option<Vec<_>>>().map(ValueType::Tuple)
            }
        }
    }

    fn params(&mut self, params: &[s::Param]) -> Vec<Parameter> {
        let mut seen: Vec<&str> = Vec::new();
        let mut out = Vec::new();
        for p in params {
            if seen.contains(&p.name.name.as_str()) {
                self.err(K::DuplicateName, p.name.span, format!("parameter `{}` is declared twice", p.name.name));
            }
            seen.push(&p.name.name);
            out.push(Parameter {
                name: p.name.name.clone(),
                ty: p.ty.as_ref().and_then(|t| self.ty(t)),
                span: p.name.span,
            });
        }
        out
    }

    fn pacing(&mut self, p: Option<&s::SPacing>, local: bool) -> PacingAnnotation {
        match p {
            None => PacingAnnotation::Any,
            Some(s::SPacing::Frequency { value, unit, span }) => match period_of(value, unit) {
                Some(period) if local => PacingAnnotation::LocalPeriod(period),
                Some(period) => PacingAnnotation::GlobalPeriod(period),
                None => {
                    self.err(K::InvalidDeclaration, *span, format!("invalid frequency `{value}{unit}`"));
                    PacingAnnotation::Any
                }
            },
            Some(s::SPacing::Activation(a)) => match self.activation(a) {
                Some(f) => PacingAnnotation::Event(f),
                None => PacingAnnotation::Any,
            },
        }
    }

    fn activation(&mut self, a: &s::Activation) -> Option<ActivationFormula> {
        match a {
            s::Activation::True(_) => Some(ActivationFormula::truth()),
            s::Activation::Stream(id) => match self.streams.get(&id.name) {
                Some(StreamRef::Input(i)) => Some(ActivationFormula::atom(*i)),
                Some(StreamRef::Output(_)) => {
                    self.err(
                        K::InvalidDeclaration,
                        id.span,
                        format!("activation conditions may only mention input streams, `{}` is an output", id.name),
                    );
                    None
                }
                None => {
                    self.err(K::UnknownStream, id.span, format!("unknown stream `{}`", id.name));
                    None
                }
            },
            s::Activation::And(l, r) => {
                let (l, r) = (self.activation(l), self.activation(r));
                Some(l?.and(&r?))
            }
            s::Activation::Or(l, r) => {
                let (l, r) = (self.activation(l), self.activation(r));
                Some(l?.or(&r?))
            }
        }
    }

    fn output(&mut self, o: &s::OutputDecl) -> OutputStream {
        let params = self.params(&o.params);
        let value_type = o.ty.as_ref().and_then(|t| self.ty(t));
        let names: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
        let (spawn, eval, close) = match &o.body {
            StreamBody::Shorthand { pacing, expr } => {
                let with = self.expr(expr, &names);
                let eval = EvalDecl {
                    pacing: self.pacing(pacing.as_ref(), false),
                    when: Expression::bool(true, expr.span),
                    with,
                    span: expr.span,
                };
                let spawn = self.spawn(None, &names, o.span);
                (spawn, eval, default_close(o.span))
            }
            StreamBody::Clauses(c) => self.clauses(c, &names, o.span, None),
        };
        OutputStream {
            name: o.name.name.clone(),
            kind: OutputKind::Regular,
            params,
            value_type,
            spawn,
            eval,
            close,
            span: o.span,
        }
    }

    fn trigger(&mut self, t: &s::TriggerDecl, name: String) -> OutputStream {
        let params = self.params(&t.params);
        let names: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
        let (spawn, eval, close) = match &t.body {
            TriggerBody::Condition { pacing, condition, message } => {
                let when = self.expr(condition, &names);
                let eval = EvalDecl {
                    pacing: self.pacing(pacing.as_ref(), false),
                    when,
                    with: message_expr(message.as_deref(), t.span),
                    span: t.span,
                };
                (self.spawn(None, &names, t.span), eval, default_close(t.span))
            }
            TriggerBody::Clauses(c) => self.clauses(c, &names, t.span, Some(())),
        };
        OutputStream {
            name,
            kind: OutputKind::Trigger,
            params,
            value_type: None,
            spawn,
            eval,
            close,
            span: t.span,
        }
    }

    fn clauses(
        &mut self,
        c: &s::Clauses,
        names: &[String],
        span: Span,
        trigger: Option<()>,
    ) -> (SpawnDecl, EvalDecl, CloseDecl) {
        let local = c.spawn.is_some();
        let spawn = self.spawn(c.spawn.as_ref(), names, span);
        let eval = match &c.eval {
            Some(clause) => {
                let when = match &clause.when {
                    Some(w) => self.expr(w, names),
                    None => Expression::bool(true, clause.span),
                };
                let with = match (&clause.with, trigger) {
                    (Some(w), _) => self.expr(w, names),
                    (None, Some(())) => message_expr(None, clause.span),
                    (None, None) => {
                        self.err(K::InvalidDeclaration, clause.span, "eval clause needs a `with` expression");
                        Expression::bool(true, clause.span)
                    }
                };
                EvalDecl { pacing: self.pacing(clause.pacing.as_ref(), local), when, with, span: clause.span }
            }
            None => {
                self.err(K::InvalidDeclaration, span, "stream has no eval clause");
                EvalDecl {
                    pacing: PacingAnnotation::Any,
                    when: Expression::bool(true, span),
                    with: Expression::bool(true, span),
                    span,
                }
            }
        };
        let close = match &c.close {
            Some(clause) => {
                if let Some(w) = &clause.with {
                    self.err(K::InvalidDeclaration, w.span, "close clauses take no `with` expression");
                }
                let when = match &clause.when {
                    Some(w) => self.expr(w, names),
                    None => {
                        self.err(K::InvalidDeclaration, clause.span, "close clause needs a `when` condition");
                        Expression::bool(false, clause.span)
                    }
                };
                CloseDecl { pacing: self.pacing(clause.pacing.as_ref(), local), when, span: clause.span }
            }
            None => default_close(span),
        };
        (spawn, eval, close)
    }

    fn spawn(&mut self, clause: Option<&s::Clause>, names: &[String], span: Span) -> SpawnDecl {
        let Some(clause) = clause else {
            if !names.is_empty() {
                self.err(K::ArityMismatch, span, format!("stream has {} parameters but no spawn clause", names.len()));
            }
            return SpawnDecl { pacing: PacingAnnotation::Any, when: Expression::bool(true, span), with: Vec::new(), span };
        };
        // Spawn expressions cannot see the parameters they are about to bind.
        let when = match &clause.when {
            Some(w) => self.expr(w, &[]),
            None => Expression::bool(true, clause.span),
        };
        let with = match (&clause.with, names.len()) {
            (None, 0) => Vec::new(),
            (None, n) => {
                self.err(K::ArityMismatch, clause.span, format!("spawn clause must bind {n} parameters with `with`"));
                Vec::new()
            }
            (Some(w), 1) => vec![self.expr(w, &[])],
            (Some(w), n) => match &w.kind {
                SExprKind::Tuple(items) if items.len() == n => items.iter().map(|i| self.expr(i, &[])).collect(),
                _ => {
                    let got = match &w.kind {
                        SExprKind::Tuple(items) => items.len(),
                        _ => 1,
                    };
                    self.err(
                        K::ArityMismatch,
                        w.span,
                        format!("stream has {n} parameters but the spawn clause provides {got} values"),
                    );
                    Vec::new()
                }
            },
        };
        SpawnDecl { pacing: self.pacing(clause.pacing.as_ref(), false), when, with, span: clause.span }
    }

    fn expr(&mut self, e: &SExpr, params: &[String]) -> Expression {
        let span = e.span;
        let func = |f: Function, args: Vec<Expression>| Expression::new(ExprKind::Function { func: f, args }, span);
        match &e.kind {
            SExprKind::Int(lexeme) => match lexeme.parse::<i128>() {
                Ok(i) => Expression::constant(Literal::Int(i), span),
                Err(_) => {
                    self.err(K::Lexical, span, format!("integer literal `{lexeme}` is out of range"));
                    Expression::constant(Literal::Int(0), span)
                }
            },
            SExprKind::Float(lexeme) => match lexeme.parse::<f64>() {
                Ok(x) if x.is_finite() => Expression::constant(Literal::Float(FloatLit(x)), span),
                _ => {
                    self.err(K::Lexical, span, format!("float literal `{lexeme}` is out of range"));
                    Expression::constant(Literal::Float(FloatLit(0.0)), span)
                }
            },
            SExprKind::Str(text) => Expression::constant(Literal::Str(text.clone()), span),
            SExprKind::Bool(b) => Expression::bool(*b, span),
            SExprKind::Duration(v, u) => {
                self.err(K::InvalidDeclaration, span, format!("duration `{v}{u}` is only valid as a window length"));
                Expression::bool(false, span)
            }
            SExprKind::Ident(name) => {
                if let Some(i) = params.iter().position(|p| p == name) {
                    return Expression::new(ExprKind::ParameterAccess(i), span);
                }
                if let Some(c) = self.constants.get(name) {
                    let mut c = c.clone();
                    c.span = span;
                    return c;
                }
                match self.streams.get(name) {
                    Some(target) => Expression::new(ExprKind::Sync { target: *target, args: Vec::new() }, span),
                    None => {
                        self.err(K::UnknownStream, span, format!("unknown stream `{name}`"));
                        Expression::bool(false, span)
                    }
                }
            }
            SExprKind::Call { name, generics, args } => {
                let args: Vec<Expression> = args.iter().map(|a| self.expr(a, params)).collect();
                if let Some(target) = self.streams.get(&name.name).copied() {
                    if !generics.is_empty() {
                        self.err(K::InvalidDeclaration, name.span, "stream accesses take no type arguments");
                    }
                    return Expression::new(ExprKind::Sync { target, args }, span);
                }
                if name.name == "cast" {
                    let tys: Vec<Option<ValueType>> = generics.iter().map(|g| self.ty(g)).collect();
                    return match tys.as_slice() {
                        [Some(a), Some(b)] => func(Function::Cast(a.clone(), b.clone()), args),
                        [_, _] => Expression::bool(false, span),
                        _ => {
                            self.err(K::ArityMismatch, name.span, "`cast` needs two type arguments: cast<From, To>");
                            Expression::bool(false, span)
                        }
                    };
                }
                if !generics.is_empty() {
                    self.err(K::InvalidDeclaration, name.span, format!("`{}` takes no type arguments", name.name));
                }
                match Function::builtin(&name.name) {
                    Some(f) => func(f, args),
                    None => {
                        self.err(K::UnknownFunction, name.span, format!("unknown stream or function `{}`", name.name));
                        Expression::bool(false, span)
                    }
                }
            }
            SExprKind::Unary(op, inner) => match (op, &inner.kind) {
                (s::UnOp::Neg, SExprKind::Int(_) | SExprKind::Float(_)) => {
                    let mut lit = self.expr(inner, params);
                    if let ExprKind::Constant { value, .. } = &mut lit.kind {
                        match value {
                            Literal::Int(i) => *i = -*i,
                            Literal::Float(x) => x.0 = -x.0,
                            _ => {}
                        }
                    }
                    lit.span = span;
                    lit
                }
                (s::UnOp::Neg, _) => {
                    let a = self.expr(inner, params);
                    func(Function::Neg, vec![a])
                }
                (s::UnOp::Not, _) => {
                    let a = self.expr(inner, params);
                    func(Function::Not, vec![a])
                }
            },
            SExprKind::Binary(op, l, r) => {
                let args = vec![self.expr(l, params), self.expr(r, params)];
                func(binop(*op), args)
            }
            SExprKind::Ite(c, t, f) => {
                let args = vec![self.expr(c, params), self.expr(t, params), self.expr(f, params)];
                func(Function::Ite, args)
            }
            SExprKind::Tuple(items) => {
                Expression::new(ExprKind::Tuple(items.iter().map(|i| self.expr(i, params)).collect()), span)
            }
            SExprKind::Field(inner, index) => {
                let a = self.expr(inner, params);
                func(Function::Project(*index), vec![a])
            }
            SExprKind::Method { receiver, name, args } => self.method(receiver, name, args, params, span),
        }
    }

    fn method(
        &mut self,
        receiver: &SExpr,
        name: &s::Ident,
        args: &[s::NamedArg],
        params: &[String],
        span: Span,
    ) -> Expression {
        let recv = self.expr(receiver, params);
        let known: &[&str] = match name.name.as_str() {
            "hold" | "last" => &["or"],
            "offset" => &["by", "or"],
            "defaults" => &["to"],
            "aggregate" => &["over", "over_exactly", "using"],
            _ => &[],
        };
        if !known.is_empty() {
            for a in args {
                match &a.label {
                    Some(l) if known.contains(&l.name.as_str()) => {}
                    Some(l) => self.err(K::InvalidDeclaration, l.span, format!("`{}` takes no `{}` argument", name.name, l.name)),
                    None => self.err(K::InvalidDeclaration, a.value.span, format!("arguments of `{}` must be labeled", name.name)),
                }
            }
        }
        let arg = |label: &str| args.iter().find(|a| a.label.as_ref().is_some_and(|l| l.name == label)).map(|a| &a.value);
        let with_default = |cx: &mut Cx, inner: Expression, label: &str| match arg(label) {
            Some(d) => {
                let d = cx.expr(d, params);
                Expression::new(ExprKind::Default { inner: Box::new(inner), fallback: Box::new(d) }, span)
            }
            None => inner,
        };
        match name.name.as_str() {
            "defaults" => match arg("to") {
                Some(d) => {
                    let d = self.expr(d, params);
                    Expression::new(ExprKind::Default { inner: Box::new(recv), fallback: Box::new(d) }, span)
                }
                None => {
                    self.err(K::InvalidDeclaration, name.span, "`defaults` needs a `to:` argument");
                    recv
                }
            },
            "hold" => {
                let Some((target, targs)) = self.stream_receiver(recv, name) else { return Expression::bool(false, span) };
                with_default(self, Expression::new(ExprKind::Hold { target, args: targs }, span), "or")
            }
            "last" => {
                let Some((target, targs)) = self.stream_receiver(recv, name) else { return Expression::bool(false, span) };
                with_default(self, Expression::new(ExprKind::Offset { target, args: targs, offset: 1 }, span), "or")
            }
            "offset" => {
                let Some((target, targs)) = self.stream_receiver(recv, name) else { return Expression::bool(false, span) };
                let Some(by) = arg("by") else {
                    self.err(K::InvalidDeclaration, name.span, "`offset` needs a `by:` argument");
                    return Expression::bool(false, span);
                };
                let inner = match self.offset_amount(by) {
                    Some(0) => Expression::new(ExprKind::Sync { target, args: targs }, span),
                    Some(n) => Expression::new(ExprKind::Offset { target, args: targs, offset: n }, span),
                    None => return Expression::bool(false, span),
                };
                with_default(self, inner, "or")
            }
            "aggregate" => {
                let Some((target, targs)) = self.stream_receiver(recv, name) else { return Expression::bool(false, span) };
                let (window, exact) = match (arg("over"), arg("over_exactly")) {
                    (Some(w), None) => (w, false),
                    (None, Some(w)) => (w, true),
                    _ => {
                        self.err(K::InvalidDeclaration, name.span, "`aggregate` needs exactly one of `over:` or `over_exactly:`");
                        return Expression::bool(false, span);
                    }
                };
                let window = match &window.kind {
                    SExprKind::Duration(v, u) if !crate::time::is_frequency_unit(u) => period_of(v, u),
                    _ => None,
                };
                let Some(window) = window else {
                    self.err(K::InvalidDeclaration, span, "aggregation window must be a positive duration such as `10s`");
                    return Expression::bool(false, span);
                };
                let func = match arg("using").map(|u| &u.kind) {
                    Some(SExprKind::Ident(f)) => AggregationFunction::from_name(f),
                    _ => None,
                };
                let Some(func) = func else {
                    self.err(K::UnknownFunction, name.span, "`using:` must name one of count, sum, avg, min, max, exists, forall");
                    return Expression::bool(false, span);
                };
                Expression::new(ExprKind::Aggregate { target, args: targs, window, func, exact }, span)
            }
            other => {
                if let Some(a) = args.iter().find_map(|a| a.label.as_ref()) {
                    self.err(K::InvalidDeclaration, a.span, format!("`{other}` takes no labeled arguments"));
                }
                let mut all = vec![recv];
                all.extend(args.iter().map(|a| self.expr(&a.value, params)));
                let f = if other == "format" { Some(Function::Format) } else { Function::builtin(other) };
                match f {
                    Some(func) => Expression::new(ExprKind::Function { func, args: all }, span),
                    None => {
                        self.err(K::UnknownFunction, name.span, format!("unknown method `{other}`"));
                        Expression::bool(false, span)
                    }
                }
            }
        }
    }

    fn stream_receiver(&mut self, recv: Expression, method: &s::Ident) -> Option<(StreamRef, Vec<Expression>)> {
        match recv.kind {
            ExprKind::Sync { target, args } => Some((target, args)),
            _ => {
                self.err(
                    K::InvalidDeclaration,
                    recv.span,
                    format!("`.{}` can only be applied to a stream access", method.name),
                );
                None
            }
        }
    }

    /// `by: -n` as a look-back distance `n`.
    fn offset_amount(&mut self, by: &SExpr) -> Option<u32> {
        let (neg, lexeme) = match &by.kind {
            SExprKind::Int(l) => (false, l),
            SExprKind::Unary(s::UnOp::Neg, inner) => match &inner.kind {
                SExprKind::Int(l) => (true, l),
                _ => (false, &String::new()),
            },
            _ => (false, &String::new()),
        };
        let n: Option<u32> = lexeme.parse().ok();
        match n {
            Some(0) => Some(0),
            Some(n) if neg => Some(n),
            Some(_) => {
                self.err(K::InvalidDeclaration, by.span, "only past offsets are supported; use a negative `by:`");
                None
            }
            None => {
                self.err(K::InvalidDeclaration, by.span, "`by:` must be an integer literal such as -1");
                None
            }
        }
    }
}

fn default_close(span: Span) -> CloseDecl {
    CloseDecl { pacing: PacingAnnotation::Any, when: Expression::bool(false, span), span }
}

fn message_expr(message: Option<&str>, span: Span) -> Expression {
    match message {
        Some(m) => Expression::constant(Literal::Str(m.to_string()), span),
        None => Expression::bool(true, span),
    }
}

fn binop(op: s::BinOp) -> Function {
    match op {
        s::BinOp::Add => Function::Add,
        s::BinOp::Sub => Function::Sub,
        s::BinOp::Mul => Function::Mul,
        s::BinOp::Div => Function::Div,
        s::BinOp::Rem => Function::Rem,
        s::BinOp::Pow => Function::Pow,
        s::BinOp::Eq => Function::Eq,
        s::BinOp::Ne => Function::Ne,
        s::BinOp::Lt => Function::Lt,
        s::BinOp::Le => Function::Le,
        s::BinOp::Gt => Function::Gt,
        s::BinOp::Ge => Function::Ge,
        s::BinOp::And => Function::And,
        s::BinOp::Or => Function::Or,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::time::int;

    fn lower(src: &str) -> Specification {
        desugar(&parse(src).unwrap()).unwrap_or_else(|e| panic!("{e:?}"))
    }

    fn lower_err(src: &str) -> Vec<K> {
        desugar(&parse(src).unwrap()).unwrap_err().into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn shorthand_gets_default_declarations() {
        let spec = lower("output b @1Hz@ := 42");
        let b = &spec.outputs[0];
        assert_eq!(b.param_count(), 0);
        assert_eq!(b.spawn.pacing, PacingAnnotation::Any);
        assert!(b.spawn.when.is_const_bool(true));
        assert!(b.spawn.with.is_empty());
        assert_eq!(b.eval.pacing, PacingAnnotation::GlobalPeriod(int(1)));
        assert!(b.eval.when.is_const_bool(true));
        assert_eq!(b.eval.with.kind, ExprKind::Constant { value: Literal::Int(42), ty: None });
        assert_eq!(b.close.pacing, PacingAnnotation::Any);
        assert!(b.close.when.is_const_bool(false));
        assert!(!b.has_close() && !b.has_spawn());
    }

    #[test]
    fn trigger_becomes_verdict_output() {
        let spec = lower("input x: Int\ntrigger(id)\n spawn with x\n eval @1Hz@ when x > id with \"Intruder\"");
        let t = &spec.outputs[0];
        assert!(t.is_trigger());
        assert_eq!(t.name, "trigger_0");
        assert_eq!(t.eval.with.kind, ExprKind::Constant { value: Literal::Str("Intruder".into()), ty: None });
        assert_eq!(t.eval.pacing, PacingAnnotation::LocalPeriod(int(1)));
    }

    #[test]
    fn unknown_stream_is_reported() {
        assert_eq!(lower_err("input a: Int\noutput b := a + z"), vec![K::UnknownStream]);
    }

    #[test]
    fn method_sugar() {
        let spec = lower("input x: Int\noutput a := x.last(or: 0) + x.offset(by: 0) + x.offset(by: -2, or: 1)");
        let ExprKind::Function { args, .. } = &spec.outputs[0].eval.with.kind else { panic!() };
        let ExprKind::Function { args: inner, .. } = &args[0].kind else { panic!() };
        assert!(matches!(&inner[0].kind, ExprKind::Default { inner, .. } if matches!(inner.kind, ExprKind::Offset { offset: 1, .. })));
        assert!(matches!(inner[1].kind, ExprKind::Sync { .. }));
        assert!(matches!(&args[1].kind, ExprKind::Default { inner, .. } if matches!(inner.kind, ExprKind::Offset { offset: 2, .. })));
    }

    #[test]
    fn spawn_arity_must_match_parameters() {
        assert_eq!(lower_err("input x: Int\noutput a(p, q) spawn with x eval with p"), vec![K::ArityMismatch]);
        assert_eq!(lower_err("input x: Int\noutput a(p) eval with p"), vec![K::ArityMismatch]);
    }

    #[test]
    fn constants_are_inlined() {
        let spec = lower("constant C: Float := 2\ninput x: Float\noutput a := x * C");
        let ExprKind::Function { args, .. } = &spec.outputs[0].eval.with.kind else { panic!() };
        assert_eq!(args[1].kind, ExprKind::Constant { value: Literal::Float(FloatLit(2.0)), ty: None });
    }

    #[test]
    fn activation_rejects_outputs() {
        assert_eq!(lower_err("input x: Int\noutput a := x\noutput b @a@ := 1"), vec![K::InvalidDeclaration]);
    }
}
