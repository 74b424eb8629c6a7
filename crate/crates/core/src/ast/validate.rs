use super::*;
use crate::diagnostic::{Diagnostic, DiagnosticKind as K};

/// Checks that stream accesses pass as many arguments as the target has
/// parameters, that parameter indices are in range, and that spawn-with
/// binds every parameter. Returns one diagnostic per violation.
pub fn validate_arities(spec: &Specification) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for out in &spec.outputs {
        let n = out.param_count();
        if out.spawn.with.len() != n {
            diags.push(Diagnostic::error(
                K::ArityMismatch,
                out.spawn.span,
                format!("`{}` has {n} parameters but spawns with {} values", out.name, out.spawn.with.len()),
            ));
        }
        for (loc, e) in out.expressions() {
            // Parameters are not bound yet while spawning.
            let bound = if loc == Location::Spawn { 0 } else { n };
            e.walk(&mut |sub| check(spec, sub, bound, &mut diags));
        }
    }
    diags
}

fn check(spec: &Specification, e: &Expression, bound: usize, diags: &mut Vec<Diagnostic>) {
    match &e.kind {
        ExprKind::ParameterAccess(i) if *i >= bound => diags.push(Diagnostic::error(
            K::ParamIndexOutOfRange,
            e.span,
            format!("parameter #{i} is out of range, only {bound} are bound here"),
        )),
        ExprKind::Function { func, args } => {
            if let Some(n) = func.arity() {
                if n != args.len() {
                    diags.push(Diagnostic::error(
                        K::ArityMismatch,
                        e.span,
                        format!("function expects {n} arguments, got {}", args.len()),
                    ));
                }
            } else if args.is_empty() {
                diags.push(Diagnostic::error(K::ArityMismatch, e.span, "`format` needs a format string"));
            }
        }
        _ => {
            if let Some((target, args)) = e.access() {
                let valid = match target {
                    StreamRef::Input(i) => i < spec.inputs.len(),
                    StreamRef::Output(o) => o < spec.outputs.len(),
                };
                if !valid {
                    diags.push(Diagnostic::error(K::UnknownStream, e.span, "access to an undeclared stream"));
                    return;
                }
                let want = spec.param_count(target);
                if want != args.len() {
                    diags.push(Diagnostic::error(
                        K::ArityMismatch,
                        e.span,
                        format!("`{}` has {want} parameters but is accessed with {}", spec.stream_name(target), args.len()),
                    ));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn kinds(src: &str) -> Vec<K> {
        let spec = desugar(&parse(src).unwrap()).unwrap();
        validate_arities(&spec).into_iter().map(|d| d.kind).collect()
    }

    #[test]
    fn watchdog_is_consistent() {
        let src = include_str!("../../specs/corpus/watchdog.lola");
        assert_eq!(kinds(src), vec![]);
    }

    #[test]
    fn access_arity() {
        assert_eq!(
            kinds("input x: Int\noutput a(p) spawn with x eval with p\noutput b := a(x, x).hold(or: 0)"),
            vec![K::ArityMismatch]
        );
    }

    #[test]
    fn parameter_index_out_of_range() {
        let mut spec = desugar(&parse("input x: Int\noutput a(p, q) spawn with (x, x) eval with p").unwrap()).unwrap();
        spec.outputs[0].eval.with = Expression::new(ExprKind::ParameterAccess(3), Span::default());
        let d: Vec<K> = validate_arities(&spec).into_iter().map(|d| d.kind).collect();
        assert_eq!(d, vec![K::ParamIndexOutOfRange]);
    }
}
