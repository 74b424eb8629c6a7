use super::value::{aggregate, apply, Value};
use crate::ast::{ExprKind, Expression, Function, StreamRef};
use crate::diagnostic::Span;
use crate::time::Rational;
use crate::value_types::ValueType;

/// Result of reading a stream: either known (possibly absent) or not yet
/// determined in the current step. The engine never answers `Unknown`; the
/// fixpoint oracle does until the value is settled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Lookup<T> {
    Known(T),
    Unknown,
}

pub(crate) trait Env {
    fn stream_type(&self, s: StreamRef) -> &ValueType;
    /// Value of the instance in the current step.
    fn sync(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>>;
    /// Latest value, including the current step.
    fn hold(&self, s: StreamRef, params: &[Value]) -> Lookup<Option<Value>>;
    /// The `n`-th latest value strictly before the current step.
    fn offset(&self, s: StreamRef, params: &[Value], n: u32) -> Lookup<Option<Value>>;
    /// Values with timestamps in `(now - d, now]`. `None` if `exact` and the
    /// instance was not alive for the whole window.
    fn window(&self, s: StreamRef, params: &[Value], d: &Rational, exact: bool) -> Lookup<Option<Vec<Value>>>;
}

pub(crate) type Fault = (String, Span);
pub(crate) type Outcome = Result<Lookup<Option<Value>>, Fault>;

macro_rules! known {
    ($e:expr) => {
        match $e? {
            Lookup::Known(v) => v,
            Lookup::Unknown => return Ok(Lookup::Unknown),
        }
    };
}

pub(crate) struct Evaluator<'a, E: Env> {
    pub env: &'a E,
    pub params: &'a [Value],
    /// The first synchronous access that found no value, if its absence was
    /// not caught by a default.
    pub failed_sync: Option<Span>,
}

impl<'a, E: Env> Evaluator<'a, E> {
    pub fn new(env: &'a E, params: &'a [Value]) -> Self {
        Evaluator { env, params, failed_sync: None }
    }

    fn args(&mut self, args: &[Expression]) -> Result<Lookup<Option<Vec<Value>>>, Fault> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            match self.eval(a)? {
                Lookup::Known(Some(v)) => out.push(v),
                Lookup::Known(None) => return Ok(Lookup::Known(None)),
                Lookup::Unknown => return Ok(Lookup::Unknown),
            }
        }
        Ok(Lookup::Known(Some(out)))
    }

    pub fn eval(&mut self, e: &Expression) -> Outcome {
        let fault = |msg: String| (msg, e.span);
        let v = match &e.kind {
            ExprKind::Constant { value, ty } => Some(Value::from_literal(value, ty.as_ref())),
            ExprKind::ParameterAccess(i) => Some(self.params.get(*i).cloned().ok_or_else(|| fault("unbound parameter".into()))?),
            ExprKind::Tuple(items) => known!(self.args(items)).map(Value::Tuple),
            ExprKind::Sync { target, args } => {
                let v = match known!(self.args(args)) {
                    Some(p) => known!(Ok::<_, Fault>(self.env.sync(*target, &p))),
                    None => None,
                };
                if v.is_none() && self.failed_sync.is_none() {
                    self.failed_sync = Some(e.span);
                }
                v
            }
            ExprKind::Hold { target, args } => match known!(self.args(args)) {
                Some(p) => known!(Ok::<_, Fault>(self.env.hold(*target, &p))),
                None => None,
            },
            ExprKind::Offset { target, args, offset } => match known!(self.args(args)) {
                Some(p) => known!(Ok::<_, Fault>(self.env.offset(*target, &p, *offset))),
                None => None,
            },
            ExprKind::Aggregate { target, args, window, func, exact } => match known!(self.args(args)) {
                Some(p) => match known!(Ok::<_, Fault>(self.env.window(*target, &p, window, *exact))) {
                    Some(values) => aggregate(*func, &values, self.env.stream_type(*target)).map_err(fault)?,
                    None => None,
                },
                None => None,
            },
            ExprKind::Default { inner, fallback } => {
                let before = self.failed_sync;
                match known!(self.eval(inner)) {
                    Some(v) => Some(v),
                    None => {
                        self.failed_sync = before;
                        known!(self.eval(fallback))
                    }
                }
            }
            ExprKind::Function { func: Function::Ite, args } if args.len() == 3 => match known!(self.eval(&args[0])) {
                Some(Value::Bool(c)) => known!(self.eval(&args[if c { 1 } else { 2 }])),
                Some(other) => return Err(fault(format!("condition evaluated to {other}"))),
                None => None,
            },
            ExprKind::Function { func: f @ (Function::And | Function::Or), args } if args.len() == 2 => {
                // Short-circuit: the right operand is only evaluated if needed.
                let short = *f == Function::Or;
                match known!(self.eval(&args[0])) {
                    Some(Value::Bool(b)) if b == short => Some(Value::Bool(b)),
                    Some(Value::Bool(_)) => match known!(self.eval(&args[1])) {
                        Some(Value::Bool(b)) => Some(Value::Bool(b)),
                        Some(other) => return Err(fault(format!("operand evaluated to {other}"))),
                        None => None,
                    },
                    Some(other) => return Err(fault(format!("operand evaluated to {other}"))),
                    None => None,
                }
            }
            ExprKind::Function { func, args } => match known!(self.args(args)) {
                Some(vs) => Some(apply(func, &vs).map_err(fault)?),
                None => None,
            },
        };
        Ok(Lookup::Known(v))
    }
}
