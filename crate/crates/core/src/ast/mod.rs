//! Desugared specification: inputs plus outputs with explicit spawn, eval and
//! close declarations.

mod desugar;
mod resugar;
mod validate;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::activation::ActivationFormula;
use crate::diagnostic::Span;
use crate::time::Rational;
use crate::value_types::ValueType;

pub use desugar::desugar;
pub use resugar::{print_expression, resugar};
pub use validate::validate_arities;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Specification {
    pub inputs: Vec<InputStream>,
    pub outputs: Vec<OutputStream>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamRef {
    Input(usize),
    Output(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputStream {
    pub name: String,
    /// `None` for an input declared without a type.
    pub value_type: Option<ValueType>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub ty: Option<ValueType>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    Regular,
    /// Desugared trigger; its values are emitted as verdicts.
    Trigger,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputStream {
    pub name: String,
    pub kind: OutputKind,
    pub params: Vec<Parameter>,
    pub value_type: Option<ValueType>,
    pub spawn: SpawnDecl,
    pub eval: EvalDecl,
    pub close: CloseDecl,
    pub span: Span,
}

impl OutputStream {
    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn is_trigger(&self) -> bool {
        self.kind == OutputKind::Trigger
    }

    /// False for the default `close when false`.
    pub fn has_close(&self) -> bool {
        !self.close.when.is_const_bool(false)
    }

    /// False for the default `spawn when true` with no parameters.
    pub fn has_spawn(&self) -> bool {
        self.spawn.pacing != PacingAnnotation::Any || !self.spawn.when.is_const_bool(true) || !self.spawn.with.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpawnDecl {
    pub pacing: PacingAnnotation,
    pub when: Expression,
    /// One expression per parameter.
    pub with: Vec<Expression>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalDecl {
    pub pacing: PacingAnnotation,
    pub when: Expression,
    pub with: Expression,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloseDecl {
    pub pacing: PacingAnnotation,
    pub when: Expression,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PacingAnnotation {
    Any,
    Event(ActivationFormula),
    /// Period in seconds, aligned with monitor start.
    GlobalPeriod(Rational),
    /// Period in seconds, aligned with the instance's spawn time.
    LocalPeriod(Rational),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregationFunction {
    Count,
    Sum,
    Avg,
    Min,
    Max,
    Exists,
    Forall,
}

impl AggregationFunction {
    pub fn from_name(name: &str) -> Option<AggregationFunction> {
        Some(match name {
            "count" => AggregationFunction::Count,
            "sum" => AggregationFunction::Sum,
            "avg" | "average" => AggregationFunction::Avg,
            "min" => AggregationFunction::Min,
            "max" => AggregationFunction::Max,
            "exists" | "disjunction" => AggregationFunction::Exists,
            "forall" | "conjunction" => AggregationFunction::Forall,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AggregationFunction::Count => "count",
            AggregationFunction::Sum => "sum",
            AggregationFunction::Avg => "avg",
            AggregationFunction::Min => "min",
            AggregationFunction::Max => "max",
            AggregationFunction::Exists => "exists",
            AggregationFunction::Forall => "forall",
        }
    }

    /// Partial functions yield no value on an empty window.
    pub fn is_partial(self) -> bool {
        matches!(self, AggregationFunction::Avg | AggregationFunction::Min | AggregationFunction::Max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Ite,
    Project(usize),
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tan,
    Arcsin,
    Arccos,
    Arctan,
    Exp,
    Ln,
    Min,
    Max,
    Cast(ValueType, ValueType),
    Format,
}

impl Function {
    /// Named builtins callable as `name(args)` or `receiver.name(args)`.
    pub fn builtin(name: &str) -> Option<Function> {
        Some(match name {
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "arcsin" => Function::Arcsin,
            "arccos" => Function::Arccos,
            "arctan" => Function::Arctan,
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "min" => Function::Min,
            "max" => Function::Max,
            _ => return None,
        })
    }

    pub fn builtin_name(&self) -> Option<&'static str> {
        Some(match self {
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Arcsin => "arcsin",
            Function::Arccos => "arccos",
            Function::Arctan => "arctan",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Min => "min",
            Function::Max => "max",
            Function::Cast(..) => "cast",
            Function::Format => "format",
            _ => return None,
        })
    }

    pub fn arity(&self) -> Option<usize> {
        match self {
            Function::Neg | Function::Not | Function::Project(_) | Function::Cast(..) => Some(1),
            Function::Sqrt | Function::Abs | Function::Sin | Function::Cos | Function::Tan => Some(1),
            Function::Arcsin | Function::Arccos | Function::Arctan | Function::Exp | Function::Ln => Some(1),
            Function::Ite => Some(3),
            Function::Format => None,
            _ => Some(2),
        }
    }
}

/// Float literal compared by bit pattern so that syntax trees stay `Eq`.
#[derive(Clone, Copy, Debug)]
pub struct FloatLit(pub f64);

impl PartialEq for FloatLit {
    fn eq(&self, other: &FloatLit) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for FloatLit {}

impl PartialOrd for FloatLit {
    fn partial_cmp(&self, other: &FloatLit) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FloatLit {
    fn cmp(&self, other: &FloatLit) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for FloatLit {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Bool(bool),
    Str(String),
    Int(i128),
    Float(FloatLit),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Str(s) => write!(f, "{s:?}"),
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => write!(f, "{:?}", x.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expression {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExprKind {
    Sync { target: StreamRef, args: Vec<Expression> },
    Hold { target: StreamRef, args: Vec<Expression> },
    /// Reads the `offset`-th value before the latest one; always >= 1.
    Offset { target: StreamRef, args: Vec<Expression>, offset: u32 },
    Aggregate {
        target: StreamRef,
        args: Vec<Expression>,
        window: Rational,
        func: AggregationFunction,
        /// `over_exactly`: no value unless the instance covers the whole window.
        exact: bool,
    },
    Default { inner: Box<Expression>, fallback: Box<Expression> },
    Function { func: Function, args: Vec<Expression> },
    /// `ty` is filled in by value type elaboration.
    Constant { value: Literal, ty: Option<ValueType> },
    ParameterAccess(usize),
    Tuple(Vec<Expression>),
}

impl Expression {
    pub fn new(kind: ExprKind, span: Span) -> Expression {
        Expression { kind, span }
    }

    pub fn constant(value: Literal, span: Span) -> Expression {
        Expression::new(ExprKind::Constant { value, ty: None }, span)
    }

    pub fn bool(b: bool, span: Span) -> Expression {
        Expression::constant(Literal::Bool(b), span)
    }

    pub fn is_const_bool(&self, b: bool) -> bool {
        matches!(&self.kind, ExprKind::Constant { value: Literal::Bool(v), .. } if *v == b)
    }

    /// Direct subexpressions, in evaluation order.
    pub fn children(&self) -> Vec<&Expression> {
        match &self.kind {
            ExprKind::Sync { args, .. }
            | ExprKind::Hold { args, .. }
            | ExprKind::Offset { args, .. }
            | ExprKind::Aggregate { args, .. }
            | ExprKind::Function { args, .. }
            | ExprKind::Tuple(args) => args.iter().collect(),
            ExprKind::Default { inner, fallback } => vec![inner, fallback],
            ExprKind::Constant { .. } | ExprKind::ParameterAccess(_) => Vec::new(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expression> {
        match &mut self.kind {
            ExprKind::Sync { args, .. }
            | ExprKind::Hold { args, .. }
            | ExprKind::Offset { args, .. }
            | ExprKind::Aggregate { args, .. }
            | ExprKind::Function { args, .. }
            | ExprKind::Tuple(args) => args.iter_mut().collect(),
            ExprKind::Default { inner, fallback } => vec![inner, fallback],
            ExprKind::Constant { .. } | ExprKind::ParameterAccess(_) => Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expression)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Replaces every `ParameterAccess(i)` with `args[i]`.
    pub fn substitute_params(&self, args: &[Expression]) -> Expression {
        match &self.kind {
            ExprKind::ParameterAccess(i) if *i < args.len() => args[*i].clone(),
            _ => {
                let mut e = self.clone();
                for (c, orig) in e.children_mut().into_iter().zip(self.children()) {
                    *c = orig.substitute_params(args);
                }
                e
            }
        }
    }

    /// The stream read by this node, if it is an access.
    pub fn access(&self) -> Option<(StreamRef, &[Expression])> {
        match &self.kind {
            ExprKind::Sync { target, args }
            | ExprKind::Hold { target, args }
            | ExprKind::Offset { target, args, .. }
            | ExprKind::Aggregate { target, args, .. } => Some((*target, args)),
            _ => None,
        }
    }
}

impl Specification {
    pub fn stream_name(&self, s: StreamRef) -> &str {
        match s {
            StreamRef::Input(i) => &self.inputs[i].name,
            StreamRef::Output(o) => &self.outputs[o].name,
        }
    }

    pub fn param_count(&self, s: StreamRef) -> usize {
        match s {
            StreamRef::Input(_) => 0,
            StreamRef::Output(o) => self.outputs[o].param_count(),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<StreamRef> {
        if let Some(i) = self.inputs.iter().position(|s| s.name == name) {
            return Some(StreamRef::Input(i));
        }
        self.outputs.iter().position(|s| s.name == name).map(StreamRef::Output)
    }

    pub fn input_name(&self, i: usize) -> String {
        self.inputs.get(i).map_or_else(|| format!("#{i}"), |s| s.name.clone())
    }
}

/// Which declaration of an output an expression belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Spawn,
    EvalWhen,
    EvalWith,
    Close,
}

impl Location {
    pub fn name(self) -> &'static str {
        match self {
            Location::Spawn => "Spawn",
            Location::EvalWhen => "EvalWhen",
            Location::EvalWith => "EvalWith",
            Location::Close => "Close",
        }
    }
}

impl OutputStream {
    /// Every expression of the stream tagged with its location.
    pub fn expressions(&self) -> Vec<(Location, &Expression)> {
        let mut out = vec![(Location::Spawn, &self.spawn.when)];
        out.extend(self.spawn.with.iter().map(|e| (Location::Spawn, e)));
        out.push((Location::EvalWhen, &self.eval.when));
        out.push((Location::EvalWith, &self.eval.with));
        out.push((Location::Close, &self.close.when));
        out
    }
}
