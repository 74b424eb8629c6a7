use super::surface::*;

/// Prints a surface specification in a canonical layout that parses back to
/// a structurally equal tree.
pub fn print_spec(spec: &SurfaceSpec) -> String {
    let mut out = String::new();
    for decl in &spec.decls {
        print_decl(decl, &mut out);
    }
    out
}

fn print_decl(decl: &Decl, out: &mut String) {
    match decl {
        Decl::Import(name) => out.push_str(&format!("import {}\n", name.name)),
        Decl::Constant(c) => {
            out.push_str(&format!("constant {}", c.name.name));
            if let Some(ty) = &c.ty {
                out.push_str(&format!(": {}", print_type(ty)));
            }
            out.push_str(&format!(" := {}\n", print_expr(&c.value)));
        }
        Decl::Input(i) => {
            out.push_str(&format!("input {}", i.name.name));
            if let Some(ty) = &i.ty {
                out.push_str(&format!(": {}", print_type(ty)));
            }
            out.push('\n');
        }
        Decl::Output(o) => {
            out.push_str(&format!("output {}{}", o.name.name, print_params(&o.params)));
            if let Some(ty) = &o.ty {
                out.push_str(&format!(": {}", print_type(ty)));
            }
            match &o.body {
                StreamBody::Shorthand { pacing, expr } => {
                    if let Some(p) = pacing {
                        out.push_str(&format!(" {}", print_pacing(p)));
                    }
                    out.push_str(&format!(" := {}\n", print_expr(expr)));
                }
                StreamBody::Clauses(c) => {
                    out.push('\n');
                    print_clauses(c, out);
                }
            }
        }
        Decl::Trigger(t) => {
            out.push_str("trigger");
            match &t.body {
                TriggerBody::Condition { pacing, condition, message } => {
                    if let Some(p) = pacing {
                        out.push_str(&format!(" {}", print_pacing(p)));
                    }
                    out.push_str(&format!(" {}", print_expr(condition)));
                    if let Some(m) = message {
                        out.push_str(&format!(" {}", quote(m)));
                    }
                    out.push('\n');
                }
                TriggerBody::Clauses(c) => {
                    out.push_str(&print_params(&t.params));
                    out.push('\n');
                    print_clauses(c, out);
                }
            }
        }
    }
}

fn print_params(params: &[Param]) -> String {
    if params.is_empty() {
        return String::new();
    }
    let items: Vec<String> = params
        .iter()
        .map(|p| match &p.ty {
            Some(ty) => format!("{}: {}", p.name.name, print_type(ty)),
            None => p.name.name.clone(),
        })
        .collect();
    format!("({})", items.join(", "))
}

fn print_clauses(c: &Clauses, out: &mut String) {
    for (kw, clause) in [("spawn", &c.spawn), ("eval", &c.eval), ("close", &c.close)] {
        let Some(clause) = clause else { continue };
        out.push_str("    ");
        out.push_str(kw);
        if let Some(p) = &clause.pacing {
            out.push_str(&format!(" {}", print_pacing(p)));
        }
        if let Some(w) = &clause.when {
            out.push_str(&format!(" when {}", print_expr(w)));
        }
        if let Some(w) = &clause.with {
            out.push_str(&format!(" with {}", print_expr(w)));
        }
        out.push('\n');
    }
}

pub fn print_type(ty: &SurfaceType) -> String {
    match ty {
        SurfaceType::Named(n) => n.name.clone(),
        SurfaceType::Tuple(elems, _) => {
            let items: Vec<String> = elems.iter().map(print_type).collect();
            format!("({})", items.join(", "))
        }
    }
}

pub fn print_pacing(p: &SPacing) -> String {
    match p {
        SPacing::Frequency { value, unit, .. } => format!("@{value}{unit}@"),
        SPacing::Activation(a) => format!("@{}@", print_activation(a, 0)),
    }
}

fn print_activation(a: &Activation, min: u8) -> String {
    let (text, level) = match a {
        Activation::True(_) => ("true".to_string(), 3),
        Activation::Stream(i) => (i.name.clone(), 3),
        Activation::Or(l, r) => (format!("{} || {}", print_activation(l, 1), print_activation(r, 2)), 1),
        Activation::And(l, r) => (format!("{} && {}", print_activation(l, 2), print_activation(r, 3)), 2),
    };
    if level < min {
        format!("({text})")
    } else {
        text
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

const POSTFIX: u8 = 8;
const UNARY: u8 = 6;

fn level(e: &SExpr) -> u8 {
    match &e.kind {
        SExprKind::Ite(..) => 0,
        SExprKind::Binary(op, ..) => op.precedence(),
        SExprKind::Unary(..) => UNARY,
        SExprKind::Field(..) | SExprKind::Method { .. } => POSTFIX,
        _ => 9,
    }
}

pub fn print_expr(e: &SExpr) -> String {
    print_prec(e, 0)
}

fn print_prec(e: &SExpr, min: u8) -> String {
    let text = match &e.kind {
        SExprKind::Int(s) | SExprKind::Float(s) => s.clone(),
        SExprKind::Str(s) => quote(s),
        SExprKind::Bool(b) => b.to_string(),
        SExprKind::Duration(v, u) => format!("{v}{u}"),
        SExprKind::Ident(n) => n.clone(),
        SExprKind::Call { name, generics, args } => {
            let mut s = name.name.clone();
            if !generics.is_empty() {
                let g: Vec<String> = generics.iter().map(print_type).collect();
                s.push_str(&format!("<{}>", g.join(", ")));
            }
            let a: Vec<String> = args.iter().map(print_expr).collect();
            format!("{s}({})", a.join(", "))
        }
        SExprKind::Unary(op, inner) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            format!("{sym}{}", print_prec(inner, UNARY))
        }
        SExprKind::Binary(BinOp::Pow, l, r) => {
            format!("{} ** {}", print_prec(l, POSTFIX), print_prec(r, UNARY))
        }
        SExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            format!("{} {} {}", print_prec(l, p), op.symbol(), print_prec(r, p + 1))
        }
        SExprKind::Ite(c, t, f) => {
            format!("if {} then {} else {}", print_expr(c), print_expr(t), print_expr(f))
        }
        SExprKind::Tuple(items) => {
            let a: Vec<String> = items.iter().map(print_expr).collect();
            format!("({})", a.join(", "))
        }
        SExprKind::Field(inner, index) => format!("{}.{index}", receiver(inner)),
        SExprKind::Method { receiver: r, name, args } => {
            let a: Vec<String> = args
                .iter()
                .map(|arg| match &arg.label {
                    Some(l) => format!("{}: {}", l.name, print_expr(&arg.value)),
                    None => print_expr(&arg.value),
                })
                .collect();
            format!("{}.{}({})", receiver(r), name.name, a.join(", "))
        }
    };
    if level(e) < min {
        format!("({text})")
    } else {
        text
    }
}

fn receiver(e: &SExpr) -> String {
    // `1.0` would lex as a float, so integer receivers get parentheses.
    if matches!(e.kind, SExprKind::Int(_) | SExprKind::Duration(..)) {
        return format!("({})", print_expr(e));
    }
    print_prec(e, POSTFIX)
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let a = parse(src).unwrap();
        let printed = print_spec(&a);
        let b = parse(&printed).unwrap_or_else(|e| panic!("reparse failed: {e:?}\n{printed}"));
        assert_eq!(a, b, "{printed}");
    }

    #[test]
    fn empty_spec_prints_empty() {
        assert_eq!(print_spec(&SurfaceSpec::default()), "");
    }

    #[test]
    fn tricky_expressions_roundtrip() {
        roundtrip("output a := (-x) ** 2.0 - -x ** 2 ** y");
        roundtrip("output a := (if c then 1 else 2) + if d then 3 else 4");
        roundtrip("output a := (1).0 + (a, b).1 + x.hold().0.defaults(to: 0.0)");
        roundtrip("output a := a - (b - c) - d / (e * f)");
        roundtrip("output a := !(a || b) && (c || d) = e");
        roundtrip("output a := \"q\\\"uote\\\\\".format(1, 2)");
        roundtrip("output a := x.offset(by: -1, or: -1)");
        roundtrip("output a @(a || b) && c@ := cast<Int64, Float64>(x)");
    }
}
