mod engine;
mod expr;
mod oracle;
mod value;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

pub use engine::Monitor;
pub use oracle::{oracle_run, OracleError};
pub use value::{aggregate, apply, format_params, format_string, Value};

use crate::diagnostic::Span;
use crate::pacing_types::PacingType;
use crate::time::{is_multiple, Rational};

/// One input event: the inputs that carry a value at `time`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TraceEvent {
    pub time: Rational,
    pub values: BTreeMap<usize, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

/// A value produced by an output instance. Verdicts are the values of
/// triggers; dumps record every output evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub time: Rational,
    pub output: usize,
    pub stream: String,
    pub params: Vec<Value>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MonitorReport {
    pub verdicts: Vec<Verdict>,
    /// Every output evaluation, filled only when dumping is enabled.
    pub dump: Vec<Verdict>,
}

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    /// Keep stepping through periodic deadlines up to this time. Defaults to
    /// the last event's time.
    pub end_time: Option<Rational>,
    pub dump: bool,
    /// Break ties between independent streams in reverse order. Reports must
    /// not change; used to test determinism.
    pub reverse_ties: bool,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("trace time {next} does not come after {previous}")]
    NonMonotoneTrace { previous: String, next: String },
    #[error("event refers to input #{0}, which is not declared")]
    UnknownInput(usize),
    #[error("synchronous access failed at time {time} in `{stream}{params}` ({location})")]
    SyncAccessFailure { time: String, stream: String, params: String, location: &'static str, span: Span },
    #[error("runtime error at time {time} in `{stream}{params}`: {message}")]
    Fault { time: String, stream: String, params: String, message: String, span: Span },
}

/// Whether a declaration with pacing `p` is due. `fresh` holds the inputs
/// with a value in this step. Local frequencies count from the spawn and
/// first fire one full period after it.
pub fn eval_pacing(p: &PacingType, now: &Rational, spawn_time: &Rational, fresh: &BTreeSet<usize>) -> bool {
    match p {
        PacingType::Top => true,
        PacingType::Bottom | PacingType::Periodic => false,
        PacingType::Event(ac) => ac.eval(fresh),
        PacingType::GlobalPeriod(period) => is_multiple(now, period),
        PacingType::LocalPeriod(period) => {
            let d = now - spawn_time;
            d > Rational::zero() && is_multiple(&d, period)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationFormula;
    use crate::time::{int, rat};

    #[test]
    fn pacing() {
        let none = BTreeSet::new();
        let g = PacingType::GlobalPeriod(int(1));
        assert!(eval_pacing(&g, &int(3), &int(0), &none));
        assert!(!eval_pacing(&g, &rat(5, 2), &int(0), &none));
        let ab = PacingType::Event(ActivationFormula::conjunction([0, 1]));
        assert!(!eval_pacing(&ab, &int(1), &int(0), &BTreeSet::from([0])));
        assert!(eval_pacing(&ab, &int(1), &int(0), &BTreeSet::from([0, 1])));
        let l = PacingType::LocalPeriod(int(1));
        assert!(eval_pacing(&l, &rat(3, 2), &rat(1, 2), &none));
        assert!(!eval_pacing(&l, &rat(1, 2), &rat(1, 2), &none));
    }
}
