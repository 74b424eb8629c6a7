use std::cmp::Ordering;
use std::fmt;

use crate::ast::{AggregationFunction, Function, Literal};
use crate::value_types::ValueType;

/// A stream value. Absence is modelled as `Option<Value>` by the evaluator,
/// so stored prefixes never contain it.
#[derive(Clone, Debug)]
pub enum Value {
    Bool(bool),
    Int(i64),
    UInt(u64),
    Float(f64),
    Str(String),
    Tuple(Vec<Value>),
}

impl Value {
    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::UInt(_) => 2,
            Value::Float(_) => 3,
            Value::Str(_) => 4,
            Value::Tuple(_) => 5,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn from_literal(lit: &Literal, ty: Option<&ValueType>) -> Value {
        match (lit, ty) {
            (Literal::Bool(b), _) => Value::Bool(*b),
            (Literal::Str(s), _) => Value::Str(s.clone()),
            (Literal::Int(i), Some(ValueType::UInt(_))) => Value::UInt(*i as u64),
            (Literal::Int(i), Some(ValueType::Float(_))) => Value::Float(*i as f64),
            (Literal::Int(i), _) => Value::Int(*i as i64),
            (Literal::Float(f), _) => Value::Float(f.0),
        }
    }

    /// Checks that the value fits `ty` and rounds 32-bit floats.
    pub fn conform(self, ty: &ValueType) -> Result<Value, String> {
        let out_of_range = |v: &dyn fmt::Display| Err(format!("{v} does not fit {ty}"));
        match (self, ty) {
            (Value::Int(i), ValueType::Int(w)) => {
                let bits = u32::from(*w);
                if bits < 64 && (i < -(1i64 << (bits - 1)) || i >= 1i64 << (bits - 1)) {
                    return out_of_range(&i);
                }
                Ok(Value::Int(i))
            }
            (Value::UInt(u), ValueType::UInt(w)) => {
                if *w < 64 && u >= 1u64 << w {
                    return out_of_range(&u);
                }
                Ok(Value::UInt(u))
            }
            (Value::Float(f), ValueType::Float(32)) => Ok(Value::Float(f as f32 as f64)),
            (Value::Tuple(items), ValueType::Tuple(tys)) if items.len() == tys.len() => {
                Ok(Value::Tuple(items.into_iter().zip(tys).map(|(v, t)| v.conform(t)).collect::<Result<_, _>>()?))
            }
            (v, ValueType::Option(inner)) => v.conform(inner),
            (v, _) => Ok(v),
        }
    }

    /// Parses a trace cell: `true`/`false`, decimal numbers, raw strings and
    /// parenthesized tuples like `(1.0, 2.5)`.
    pub fn parse(text: &str, ty: &ValueType) -> Option<Value> {
        let t = text.trim();
        let v = match ty {
            ValueType::Bool => Value::Bool(t.parse().ok()?),
            ValueType::Int(_) => Value::Int(t.parse().ok()?),
            ValueType::UInt(_) => Value::UInt(t.parse().ok()?),
            ValueType::Float(_) => Value::Float(t.parse().ok()?),
            ValueType::String => Value::Str(text.to_string()),
            ValueType::Tuple(tys) => {
                let inner = t.strip_prefix('(')?.strip_suffix(')')?;
                let parts = split_top_level(inner);
                let parts = if tys.is_empty() && parts.len() == 1 && parts[0].trim().is_empty() { vec![] } else { parts };
                if parts.len() != tys.len() {
                    return None;
                }
                Value::Tuple(parts.iter().zip(tys).map(|(p, ty)| Value::parse(p, ty)).collect::<Option<_>>()?)
            }
            ValueType::Option(inner) => return Value::parse(text, inner),
            ValueType::Top | ValueType::Bottom => return None,
        };
        v.conform(ty).ok()
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => (*b).into(),
            Value::Int(i) => (*i).into(),
            Value::UInt(u) => (*u).into(),
            Value::Float(f) => serde_json::Number::from_f64(*f).map_or_else(|| format!("{f:?}").into(), Into::into),
            Value::Str(s) => s.clone().into(),
            Value::Tuple(items) => items.iter().map(Value::to_json).collect::<Vec<_>>().into(),
        }
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Total order (floats by `total_cmp`) so values can key instance maps;
/// equality is bitwise for floats and therefore reflexive.
impl Ord for Value {
    fn cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::UInt(a), Value::UInt(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Tuple(a), Value::Tuple(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::UInt(u) => write!(f, "{u}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Renders instance parameters as `[a, b]`.
pub fn format_params(params: &[Value]) -> String {
    let items: Vec<String> = params.iter().map(Value::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn type_error(func: &Function, args: &[Value]) -> String {
    let shown: Vec<String> = args.iter().map(Value::to_string).collect();
    format!("{} cannot be applied to ({})", func.builtin_name().unwrap_or("operator"), shown.join(", "))
}

fn overflow() -> String {
    "arithmetic overflow".into()
}

fn int_op(func: &Function, a: i64, b: i64) -> Result<Value, String> {
    let r = match func {
        Function::Add => a.checked_add(b),
        Function::Sub => a.checked_sub(b),
        Function::Mul => a.checked_mul(b),
        Function::Div | Function::Rem if b == 0 => return Err("division by zero".into()),
        Function::Div => a.checked_div(b),
        Function::Rem => a.checked_rem(b),
        Function::Pow => u32::try_from(b).ok().and_then(|e| a.checked_pow(e)),
        Function::Min => Some(a.min(b)),
        Function::Max => Some(a.max(b)),
        _ => return Err(type_error(func, &[Value::Int(a), Value::Int(b)])),
    };
    r.map(Value::Int).ok_or_else(overflow)
}

fn uint_op(func: &Function, a: u64, b: u64) -> Result<Value, String> {
    let r = match func {
        Function::Add => a.checked_add(b),
        Function::Sub => a.checked_sub(b),
        Function::Mul => a.checked_mul(b),
        Function::Div | Function::Rem if b == 0 => return Err("division by zero".into()),
        Function::Div => a.checked_div(b),
        Function::Rem => a.checked_rem(b),
        Function::Pow => u32::try_from(b).ok().and_then(|e| a.checked_pow(e)),
        Function::Min => Some(a.min(b)),
        Function::Max => Some(a.max(b)),
        _ => return Err(type_error(func, &[Value::UInt(a), Value::UInt(b)])),
    };
    r.map(Value::UInt).ok_or_else(overflow)
}

fn float_op(func: &Function, a: f64, b: f64) -> Result<Value, String> {
    Ok(Value::Float(match func {
        Function::Add => a + b,
        Function::Sub => a - b,
        Function::Mul => a * b,
        Function::Div => a / b,
        Function::Rem => a % b,
        Function::Pow => a.powf(b),
        Function::Min => a.min(b),
        Function::Max => a.max(b),
        _ => return Err(type_error(func, &[Value::Float(a), Value::Float(b)])),
    }))
}

fn compare(func: &Function, a: &Value, b: &Value) -> Result<Value, String> {
    let ord = match (a, b) {
        (Value::Float(x), Value::Float(y)) => {
            // IEEE comparison: NaN is unordered and unequal to itself.
            return Ok(Value::Bool(match func {
                Function::Eq => x == y,
                Function::Ne => x != y,
                Function::Lt => x < y,
                Function::Le => x <= y,
                Function::Gt => x > y,
                _ => x >= y,
            }));
        }
        _ if a.rank() == b.rank() => a.cmp(b),
        _ => return Err(type_error(func, &[a.clone(), b.clone()])),
    };
    Ok(Value::Bool(match func {
        Function::Eq => ord == Ordering::Equal,
        Function::Ne => ord != Ordering::Equal,
        Function::Lt => ord == Ordering::Less,
        Function::Le => ord != Ordering::Greater,
        Function::Gt => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    }))
}

fn cast(v: &Value, to: &ValueType) -> Result<Value, String> {
    let bad = || format!("cannot cast {v} to {to}");
    let out = match (v, to) {
        (Value::Int(i), ValueType::Int(_)) => Value::Int(*i),
        (Value::Int(i), ValueType::UInt(_)) => Value::UInt(u64::try_from(*i).map_err(|_| bad())?),
        (Value::Int(i), ValueType::Float(_)) => Value::Float(*i as f64),
        (Value::UInt(u), ValueType::Int(_)) => Value::Int(i64::try_from(*u).map_err(|_| bad())?),
        (Value::UInt(u), ValueType::UInt(_)) => Value::UInt(*u),
        (Value::UInt(u), ValueType::Float(_)) => Value::Float(*u as f64),
        (Value::Float(f), ValueType::Float(_)) => Value::Float(*f),
        (Value::Float(f), ValueType::Int(_)) if f.is_finite() && f.trunc().abs() < 9.2e18 => Value::Int(f.trunc() as i64),
        (Value::Float(f), ValueType::UInt(_)) if f.is_finite() && f.trunc() >= 0.0 && f.trunc() < 1.8e19 => {
            Value::UInt(f.trunc() as u64)
        }
        _ => return Err(bad()),
    };
    out.conform(to).map_err(|_| bad())
}

/// `{}` placeholders; a run of n `{` followed by exactly n `}` is a single
/// placeholder, other braces are copied verbatim.
pub fn format_string(fmt: &str, args: &[Value]) -> Result<String, String> {
    let chars: Vec<char> = fmt.chars().collect();
    let mut out = String::new();
    let mut next = args.iter();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '{' {
            let open = chars[i..].iter().take_while(|&&c| c == '{').count();
            let close = chars[i + open..].iter().take_while(|&&c| c == '}').count();
            if close == open {
                let v = next.next().ok_or("format string has more placeholders than arguments")?;
                out.push_str(&v.to_string());
                i += open + close;
                continue;
            }
            out.extend(&chars[i..i + open]);
            i += open;
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    if next.next().is_some() {
        return Err("format string has fewer placeholders than arguments".into());
    }
    Ok(out)
}

/// Applies a strict built-in function. `Ite`, `And` and `Or` are handled
/// lazily by the expression evaluator and only reach here fully evaluated.
pub fn apply(func: &Function, args: &[Value]) -> Result<Value, String> {
    use Function as F;
    let float1 = |g: fn(f64) -> f64| match args {
        [Value::Float(x)] => Ok(Value::Float(g(*x))),
        _ => Err(type_error(func, args)),
    };
    match func {
        F::Neg => match args {
            [Value::Int(i)] => i.checked_neg().map(Value::Int).ok_or_else(overflow),
            [Value::Float(x)] => Ok(Value::Float(-x)),
            _ => Err(type_error(func, args)),
        },
        F::Not => match args {
            [Value::Bool(b)] => Ok(Value::Bool(!b)),
            _ => Err(type_error(func, args)),
        },
        F::And | F::Or => match args {
            [Value::Bool(a), Value::Bool(b)] => Ok(Value::Bool(if *func == F::And { *a && *b } else { *a || *b })),
            _ => Err(type_error(func, args)),
        },
        F::Ite => match args {
            [Value::Bool(c), a, b] => Ok(if *c { a.clone() } else { b.clone() }),
            _ => Err(type_error(func, args)),
        },
        F::Add | F::Sub | F::Mul | F::Div | F::Rem | F::Pow | F::Min | F::Max => match args {
            [Value::Int(a), Value::Int(b)] => int_op(func, *a, *b),
            [Value::UInt(a), Value::UInt(b)] => uint_op(func, *a, *b),
            [Value::Float(a), Value::Float(b)] => float_op(func, *a, *b),
            [Value::Str(a), Value::Str(b)] if *func == F::Add => Ok(Value::Str(format!("{a}{b}"))),
            _ => Err(type_error(func, args)),
        },
        F::Eq | F::Ne | F::Lt | F::Le | F::Gt | F::Ge => match args {
            [a, b] => compare(func, a, b),
            _ => Err(type_error(func, args)),
        },
        F::Project(i) => match args {
            [Value::Tuple(items)] if *i < items.len() => Ok(items[*i].clone()),
            _ => Err(type_error(func, args)),
        },
        F::Abs => match args {
            [Value::Int(i)] => i.checked_abs().map(Value::Int).ok_or_else(overflow),
            [Value::UInt(u)] => Ok(Value::UInt(*u)),
            [Value::Float(x)] => Ok(Value::Float(x.abs())),
            _ => Err(type_error(func, args)),
        },
        F::Sqrt => float1(f64::sqrt),
        F::Sin => float1(f64::sin),
        F::Cos => float1(f64::cos),
        F::Tan => float1(f64::tan),
        F::Arcsin => float1(f64::asin),
        F::Arccos => float1(f64::acos),
        F::Arctan => float1(f64::atan),
        F::Exp => float1(f64::exp),
        F::Ln => float1(f64::ln),
        F::Cast(_, to) => match args {
            [v] => cast(v, to),
            _ => Err(type_error(func, args)),
        },
        F::Format => match args {
            [Value::Str(fmt), rest @ ..] => format_string(fmt, rest).map(Value::Str),
            _ => Err(type_error(func, args)),
        },
    }
}

/// Aggregates a window slice. `None` means no value, as for an average over
/// an empty window.
pub fn aggregate(func: AggregationFunction, values: &[Value], elem: &ValueType) -> Result<Option<Value>, String> {
    use AggregationFunction as A;
    let zero = match elem {
        ValueType::Int(_) => Value::Int(0),
        ValueType::UInt(_) => Value::UInt(0),
        _ => Value::Float(0.0),
    };
    Ok(match func {
        A::Count => Some(Value::UInt(values.len() as u64)),
        A::Exists => Some(Value::Bool(values.iter().any(|v| v.as_bool() == Some(true)))),
        A::Forall => Some(Value::Bool(values.iter().all(|v| v.as_bool() == Some(true)))),
        A::Sum => Some(values.iter().try_fold(zero, |acc, v| apply(&Function::Add, &[acc, v.clone()]))?),
        _ if values.is_empty() => None,
        A::Avg => {
            let sum = values.iter().skip(1).try_fold(values[0].clone(), |acc, v| apply(&Function::Add, &[acc, v.clone()]))?;
            let n = values.len();
            Some(match sum {
                Value::Int(s) => Value::Int(s / n as i64),
                Value::UInt(s) => Value::UInt(s / n as u64),
                Value::Float(s) => Value::Float(s / n as f64),
                other => return Err(format!("cannot average {other}")),
            })
        }
        A::Min | A::Max => {
            let f = if func == A::Min { Function::Min } else { Function::Max };
            Some(values.iter().skip(1).try_fold(values[0].clone(), |acc, v| apply(&f, &[acc, v.clone()]))?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders() {
        let one = [Value::UInt(7)];
        assert_eq!(format_string("Intruder {{}} detected", &one).unwrap(), "Intruder 7 detected");
        assert_eq!(format_string("id={}", &one).unwrap(), "id=7");
        assert_eq!(format_string("{ {}", &one).unwrap(), "{ 7");
        assert!(format_string("{} {}", &one).is_err());
    }

    #[test]
    fn arithmetic_faults() {
        assert!(apply(&Function::Div, &[Value::Int(1), Value::Int(0)]).is_err());
        assert!(apply(&Function::Add, &[Value::Int(i64::MAX), Value::Int(1)]).is_err());
        assert_eq!(apply(&Function::Pow, &[Value::Int(2), Value::Int(10)]).unwrap(), Value::Int(1024));
    }

    #[test]
    fn conformance() {
        assert!(Value::Int(200).conform(&ValueType::Int(8)).is_err());
        assert!(Value::Int(-128).conform(&ValueType::Int(8)).is_ok());
        assert!(Value::UInt(256).conform(&ValueType::UInt(8)).is_err());
    }

    #[test]
    fn parse_cells() {
        let pair = ValueType::Tuple(vec![ValueType::FLOAT64, ValueType::FLOAT64]);
        assert_eq!(Value::parse("(1.5, -2)", &pair), Some(Value::Tuple(vec![Value::Float(1.5), Value::Float(-2.0)])));
        assert_eq!(Value::parse("true", &ValueType::Bool), Some(Value::Bool(true)));
        assert_eq!(Value::parse("x", &ValueType::INT64), None);
    }

    #[test]
    fn aggregates() {
        let vs = [Value::Int(3), Value::Int(1), Value::Int(2)];
        assert_eq!(aggregate(AggregationFunction::Sum, &vs, &ValueType::INT64).unwrap(), Some(Value::Int(6)));
        assert_eq!(aggregate(AggregationFunction::Min, &vs, &ValueType::INT64).unwrap(), Some(Value::Int(1)));
        assert_eq!(aggregate(AggregationFunction::Avg, &[], &ValueType::INT64).unwrap(), None);
        assert_eq!(aggregate(AggregationFunction::Sum, &[], &ValueType::FLOAT64).unwrap(), Some(Value::Float(0.0)));
    }
}
