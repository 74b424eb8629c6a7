use std::collections::BTreeSet;

use crate::ast::{print_expression, ExprKind, Expression, Function, Parameter, Specification};
use crate::diagnostic::Span;

/// A boolean refinement. `Expr` holds the top-level conjuncts of a
/// canonical expression; `true` maps to `Top` and `false` to `Bottom`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticType {
    Top,
    Bottom,
    Expr(BTreeSet<Expression>),
}

impl SemanticType {
    pub fn of(e: &Expression) -> SemanticType {
        let c = canonicalize(e);
        if c.is_const_bool(true) {
            SemanticType::Top
        } else if c.is_const_bool(false) {
            SemanticType::Bottom
        } else {
            let mut set = BTreeSet::new();
            conjuncts(c, &mut set);
            SemanticType::Expr(set)
        }
    }

    /// Rebuilds the boolean expression this type stands for.
    pub fn expression(&self) -> Expression {
        match self {
            SemanticType::Top => Expression::bool(true, Span::default()),
            SemanticType::Bottom => Expression::bool(false, Span::default()),
            SemanticType::Expr(set) => chain(Function::And, set.iter().cloned().collect()),
        }
    }

    pub fn display_with(&self, spec: &Specification, params: &[Parameter]) -> String {
        match self {
            SemanticType::Top => "⊤".into(),
            SemanticType::Bottom => "⊥".into(),
            SemanticType::Expr(_) => print_expression(spec, params, &self.expression()),
        }
    }
}

/// `a ⊑ b`: `a` holds at no more time points than `b`. Implication is
/// approximated syntactically: `a` must contain every conjunct of `b`.
pub fn st_more_concrete(a: &SemanticType, b: &SemanticType) -> bool {
    match (a, b) {
        (_, SemanticType::Top) | (SemanticType::Bottom, _) => true,
        (SemanticType::Top, _) | (_, SemanticType::Bottom) => false,
        (SemanticType::Expr(x), SemanticType::Expr(y)) => x.is_superset(y),
    }
}

pub fn st_meet(a: &SemanticType, b: &SemanticType) -> SemanticType {
    match (a, b) {
        (SemanticType::Top, x) | (x, SemanticType::Top) => x.clone(),
        (SemanticType::Bottom, _) | (_, SemanticType::Bottom) => SemanticType::Bottom,
        (SemanticType::Expr(x), SemanticType::Expr(y)) => SemanticType::Expr(x.union(y).cloned().collect()),
    }
}

/// Normal form for syntactic comparison: spans and elaborated literal types
/// are dropped, `&&`/`||` chains are flattened, sorted and deduplicated,
/// operands of `==`/`!=` are ordered and double negation is removed.
pub fn canonicalize(e: &Expression) -> Expression {
    let mut out = e.clone();
    out.span = Span::default();
    for c in out.children_mut() {
        *c = canonicalize(c);
    }
    match &mut out.kind {
        ExprKind::Constant { ty, .. } => *ty = None,
        ExprKind::Function { func: f @ (Function::And | Function::Or), args } => {
            let f = f.clone();
            let (unit, zero) = (f == Function::And, f == Function::Or);
            let mut set = BTreeSet::new();
            for a in std::mem::take(args) {
                flatten(&f, a, &mut set);
            }
            if set.iter().any(|a| a.is_const_bool(zero)) {
                return Expression::bool(zero, Span::default());
            }
            set.retain(|a| !a.is_const_bool(unit));
            return match set.len() {
                0 => Expression::bool(unit, Span::default()),
                _ => chain(f, set.into_iter().collect()),
            };
        }
        ExprKind::Function { func: Function::Eq | Function::Ne, args } if args.len() == 2 => args.sort(),
        ExprKind::Function { func: Function::Not, args } if args.len() == 1 => {
            if let ExprKind::Function { func: Function::Not, args: inner } = &args[0].kind {
                if inner.len() == 1 {
                    return inner[0].clone();
                }
            }
        }
        _ => {}
    }
    out
}

fn flatten(f: &Function, e: Expression, set: &mut BTreeSet<Expression>) {
    match e.kind {
        ExprKind::Function { func, args } if func == *f => {
            for a in args {
                flatten(f, a, set);
            }
        }
        _ => {
            set.insert(e);
        }
    }
}

fn conjuncts(e: Expression, set: &mut BTreeSet<Expression>) {
    flatten(&Function::And, e, set)
}

fn chain(f: Function, items: Vec<Expression>) -> Expression {
    let mut it = items.into_iter();
    let first = it.next().unwrap_or_else(|| Expression::bool(f == Function::And, Span::default()));
    it.fold(first, |acc, x| Expression::new(ExprKind::Function { func: f.clone(), args: vec![acc, x] }, Span::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::desugar;
    use crate::parser::parse;

    fn when(cond: &str) -> SemanticType {
        let src = format!("input i: Int64\ninput a: Bool\ninput b: Bool\noutput o: Bool eval when {cond} with true");
        let spec = desugar(&parse(&src).unwrap()).unwrap();
        SemanticType::of(&spec.outputs[0].eval.when)
    }

    #[test]
    fn syntactic_implication() {
        assert!(!st_more_concrete(&when("i > 7"), &when("i > 5")));
        assert!(st_more_concrete(&when("i > 7"), &when("i > 7")));
        assert!(st_more_concrete(&when("a && b"), &when("a")));
        assert!(!st_more_concrete(&when("a"), &when("a && b")));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(when("a && b"), when("b && (a && a)"));
        assert_eq!(when("a || b"), when("b || a"));
        assert_eq!(when("i == 3"), when("3 = i"));
        assert_eq!(when("!!a"), when("a"));
        assert_eq!(when("a && true"), when("a"));
        assert_eq!(when("a || true"), SemanticType::Top);
        assert_eq!(when("a && false"), SemanticType::Bottom);
    }

    #[test]
    fn meet() {
        assert_eq!(st_meet(&when("a"), &when("b")), when("a && b"));
        assert_eq!(st_meet(&SemanticType::Top, &when("b")), when("b"));
        assert_eq!(st_meet(&SemanticType::Bottom, &when("b")), SemanticType::Bottom);
    }
}
