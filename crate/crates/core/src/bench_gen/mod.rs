//! Scalable benchmark specifications and random well-typed specifications.

mod random;

use std::fmt::Write;

pub use random::{random_trace, random_welltyped};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchKind {
    /// `s_i := s_{i+1}` down to an input.
    SyncChain,
    /// Stream `s_i` has `n - i + 1` parameters and reads `s_{i+1}` with a prefix of them.
    ParamChain,
    /// Stream `s_i` is guarded by the first `n - i + 1` inputs.
    ConjunctChain,
}

impl BenchKind {
    pub const ALL: [BenchKind; 3] = [BenchKind::SyncChain, BenchKind::ParamChain, BenchKind::ConjunctChain];

    pub fn name(self) -> &'static str {
        match self {
            BenchKind::SyncChain => "sync",
            BenchKind::ParamChain => "param",
            BenchKind::ConjunctChain => "conjunct",
        }
    }

    pub fn from_name(s: &str) -> Option<BenchKind> {
        BenchKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Source text of the benchmark of the given kind with `n` streams.
///
/// # Panics
/// If `n` is zero.
pub fn generate(kind: BenchKind, n: usize) -> String {
    assert!(n >= 1, "benchmarks need at least one stream");
    let mut out = String::new();
    match kind {
        BenchKind::SyncChain => {
            out.push_str("input bench: Int\n");
            for i in 1..n {
                writeln!(out, "output s{i} := s{}", i + 1).unwrap();
            }
            writeln!(out, "output s{n} := bench").unwrap();
        }
        BenchKind::ParamChain => {
            out.push_str("input bench: Int\n");
            for i in 1..=n {
                let arity = n - i + 1;
                let params: Vec<String> = (1..=arity).map(|k| format!("p{k}: Int")).collect();
                let spawn = vec!["bench"; arity].join(", ");
                let access = if i == n {
                    "bench".to_string()
                } else {
                    let args: Vec<String> = (1..arity).map(|k| format!("p{k}")).collect();
                    format!("s{}({})", i + 1, args.join(", "))
                };
                writeln!(out, "output s{i}({})\n    spawn with ({spawn})\n    eval with {access}", params.join(", ")).unwrap();
            }
        }
        BenchKind::ConjunctChain => {
            for k in 1..=n {
                writeln!(out, "input i{k}: Bool").unwrap();
            }
            for i in 1..=n {
                let guard: Vec<String> = (1..=n - i + 1).map(|k| format!("i{k}")).collect();
                let value = if i == n { "i1".to_string() } else { format!("s{}", i + 1) };
                writeln!(out, "output s{i}\n    eval when {} with {value}", guard.join(" && ")).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::check_source;

    fn squash(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn figures_at_three() {
        assert_eq!(
            squash(&generate(BenchKind::SyncChain, 3)),
            squash("input bench: Int output s1 := s2 output s2 := s3 output s3 := bench")
        );
        assert_eq!(
            squash(&generate(BenchKind::ParamChain, 3)),
            squash(
                "input bench: Int
                 output s1(p1: Int, p2: Int, p3: Int) spawn with (bench, bench, bench) eval with s2(p1, p2)
                 output s2(p1: Int, p2: Int) spawn with (bench, bench) eval with s3(p1)
                 output s3(p1: Int) spawn with (bench) eval with bench"
            )
        );
        assert_eq!(
            squash(&generate(BenchKind::ConjunctChain, 3)),
            squash(
                "input i1: Bool input i2: Bool input i3: Bool
                 output s1 eval when i1 && i2 && i3 with s2
                 output s2 eval when i1 && i2 with s3
                 output s3 eval when i1 with i1"
            )
        );
    }

    #[test]
    fn base_case() {
        assert_eq!(squash(&generate(BenchKind::ConjunctChain, 1)), "input i1: Bool output s1 eval when i1 with i1");
    }

    #[test]
    fn all_kinds_check() {
        for kind in BenchKind::ALL {
            for n in [1, 2, 3, 12] {
                let src = generate(kind, n);
                if let Err(d) = check_source(&src) {
                    panic!("{kind:?} n={n} rejected: {d:?}\n{src}");
                }
            }
        }
    }

    #[test]
    fn names_roundtrip() {
        for kind in BenchKind::ALL {
            assert_eq!(BenchKind::from_name(kind.name()), Some(kind));
        }
    }
}
