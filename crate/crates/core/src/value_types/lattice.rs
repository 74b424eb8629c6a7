use std::fmt;

/// Value types ordered so that `a ⊑ b` means `a` is at least as concrete as
/// `b`; wider numeric types are more concrete (Int64 ⊑ Int32).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueType {
    Top,
    Bottom,
    Bool,
    String,
    UInt(u8),
    Int(u8),
    Float(u8),
    Option(Box<ValueType>),
    Tuple(Vec<ValueType>),
}

impl ValueType {
    pub const INT64: ValueType = ValueType::Int(64);
    pub const UINT64: ValueType = ValueType::UInt(64);
    pub const FLOAT64: ValueType = ValueType::Float(64);

    pub fn option(inner: ValueType) -> ValueType {
        match inner {
            ValueType::Bottom => ValueType::Bottom,
            ValueType::Option(_) => inner,
            other => ValueType::Option(Box::new(other)),
        }
    }

    pub fn unit() -> ValueType {
        ValueType::Tuple(Vec::new())
    }

    pub fn from_name(name: &str) -> Option<ValueType> {
        Some(match name {
            "Bool" => ValueType::Bool,
            "String" => ValueType::String,
            "Int" | "Int64" => ValueType::Int(64),
            "Int8" => ValueType::Int(8),
            "Int16" => ValueType::Int(16),
            "Int32" => ValueType::Int(32),
            "UInt" | "UInt64" => ValueType::UInt(64),
            "UInt8" => ValueType::UInt(8),
            "UInt16" => ValueType::UInt(16),
            "UInt32" => ValueType::UInt(32),
            "Float" | "Float64" => ValueType::Float(64),
            "Float32" => ValueType::Float(32),
            _ => return None,
        })
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ValueType::UInt(_) | ValueType::Int(_) | ValueType::Float(_))
    }

    pub fn is_option(&self) -> bool {
        matches!(self, ValueType::Option(_))
    }

    /// True if `Top` occurs anywhere inside.
    pub fn has_top(&self) -> bool {
        match self {
            ValueType::Top => true,
            ValueType::Option(inner) => inner.has_top(),
            ValueType::Tuple(items) => items.iter().any(ValueType::has_top),
            _ => false,
        }
    }

    pub fn has_option(&self) -> bool {
        match self {
            ValueType::Option(_) => true,
            ValueType::Tuple(items) => items.iter().any(ValueType::has_option),
            _ => false,
        }
    }
}

/// `a ⊑ b`.
pub fn vt_more_concrete(a: &ValueType, b: &ValueType) -> bool {
    use ValueType::*;
    match (a, b) {
        (_, Top) | (Bottom, _) => true,
        (Top, _) | (_, Bottom) => false,
        (Bool, Bool) | (String, String) => true,
        (UInt(x), UInt(y)) | (Int(x), Int(y)) | (Float(x), Float(y)) => x >= y,
        (Option(x), Option(y)) => vt_more_concrete(x, y),
        (Tuple(xs), Tuple(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| vt_more_concrete(x, y)),
        _ => false,
    }
}

/// Greatest lower bound; `Bottom` if the types have no common refinement.
pub fn vt_meet(a: &ValueType, b: &ValueType) -> ValueType {
    use ValueType::*;
    match (a, b) {
        (Top, x) | (x, Top) => x.clone(),
        (Bottom, _) | (_, Bottom) => Bottom,
        (Bool, Bool) => Bool,
        (String, String) => String,
        (UInt(x), UInt(y)) => UInt(*x.max(y)),
        (Int(x), Int(y)) => Int(*x.max(y)),
        (Float(x), Float(y)) => Float(*x.max(y)),
        (Option(x), Option(y)) => ValueType::option(vt_meet(x, y)),
        (Tuple(xs), Tuple(ys)) if xs.len() == ys.len() => {
            let items: Vec<ValueType> = xs.iter().zip(ys).map(|(x, y)| vt_meet(x, y)).collect();
            if items.contains(&Bottom) {
                Bottom
            } else {
                Tuple(items)
            }
        }
        _ => Bottom,
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Top => write!(f, "⊤"),
            ValueType::Bottom => write!(f, "⊥"),
            ValueType::Bool => write!(f, "Bool"),
            ValueType::String => write!(f, "String"),
            ValueType::UInt(w) => write!(f, "UInt{w}"),
            ValueType::Int(w) => write!(f, "Int{w}"),
            ValueType::Float(w) => write!(f, "Float{w}"),
            ValueType::Option(inner) => write!(f, "{inner}?"),
            ValueType::Tuple(items) => {
                write!(f, "(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ValueType::*;

    #[test]
    fn widths() {
        assert!(vt_more_concrete(&Int(64), &Int(32)));
        assert!(!vt_more_concrete(&Int(32), &Int(64)));
        assert!(!vt_more_concrete(&UInt(8), &Int(8)));
        assert!(vt_more_concrete(&Bool, &Top));
        assert_eq!(vt_meet(&Int(32), &Int(64)), Int(64));
        assert_eq!(vt_meet(&Bool, &String), Bottom);
        assert_eq!(vt_meet(&Float(32), &Top), Float(32));
    }

    #[test]
    fn smashed_constructors() {
        assert_eq!(vt_meet(&ValueType::option(Bool), &ValueType::option(Int(8))), Bottom);
        assert_eq!(vt_meet(&Tuple(vec![Bool, Int(8)]), &Tuple(vec![Bool, String])), Bottom);
        assert_eq!(vt_meet(&Tuple(vec![Bool]), &Tuple(vec![Bool, Bool])), Bottom);
        assert_eq!(ValueType::option(ValueType::option(Bool)), ValueType::option(Bool));
    }
}
