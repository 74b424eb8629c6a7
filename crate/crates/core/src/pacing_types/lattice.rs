use std::fmt;

use crate::activation::ActivationFormula;
use crate::time::{format_rational, is_multiple, rational_lcm, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PacingType {
    Top,
    Bottom,
    /// Some periodic pacing whose period is not yet known.
    Periodic,
    GlobalPeriod(Rational),
    LocalPeriod(Rational),
    Event(ActivationFormula),
}

impl PacingType {
    pub fn is_local(&self) -> bool {
        matches!(self, PacingType::LocalPeriod(_))
    }

    pub fn display_with(&self, names: &dyn Fn(usize) -> String) -> String {
        match self {
            PacingType::Top => "⊤".into(),
            PacingType::Bottom => "⊥".into(),
            PacingType::Periodic => "Periodic".into(),
            PacingType::GlobalPeriod(p) => format!("Global({}s)", format_rational(p)),
            PacingType::LocalPeriod(p) => format!("Local({}s)", format_rational(p)),
            PacingType::Event(f) => format!("Event({})", f.display_with(names)),
        }
    }
}

impl fmt::Display for PacingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|i| format!("#{i}")))
    }
}

/// `a ⊑ b`. Periods order by divisibility (a slower stream refines a faster
/// one); events order by implication of their activation conditions.
pub fn pt_more_concrete(a: &PacingType, b: &PacingType) -> bool {
    use PacingType::*;
    match (a, b) {
        (_, Top) | (Bottom, _) => true,
        (Top, _) | (_, Bottom) => false,
        (Periodic | GlobalPeriod(_) | LocalPeriod(_), Periodic) => true,
        (GlobalPeriod(x), GlobalPeriod(y)) | (LocalPeriod(x), LocalPeriod(y)) => is_multiple(x, y),
        (Event(x), Event(y)) => x.implies(y),
        _ => false,
    }
}

pub fn pt_meet(a: &PacingType, b: &PacingType) -> PacingType {
    use PacingType::*;
    match (a, b) {
        (Top, x) | (x, Top) => x.clone(),
        (Bottom, _) | (_, Bottom) => Bottom,
        (Periodic, x @ (Periodic | GlobalPeriod(_) | LocalPeriod(_)))
        | (x @ (GlobalPeriod(_) | LocalPeriod(_)), Periodic) => x.clone(),
        (GlobalPeriod(x), GlobalPeriod(y)) => GlobalPeriod(rational_lcm(x, y)),
        (LocalPeriod(x), LocalPeriod(y)) => LocalPeriod(rational_lcm(x, y)),
        (Event(x), Event(y)) => Event(x.and(y)),
        _ => Bottom,
    }
}
