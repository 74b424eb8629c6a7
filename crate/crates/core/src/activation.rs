//! Positive boolean formulas over input streams, kept in minimal DNF.
//!
//! A monotone formula is uniquely represented by the antichain of its minimal
//! satisfying input sets, which makes equality, implication and conjunction
//! exact without truth tables.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationFormula {
    terms: BTreeSet<BTreeSet<usize>>,
}

impl ActivationFormula {
    /// Holds at every step.
    pub fn truth() -> ActivationFormula {
        ActivationFormula { terms: BTreeSet::from([BTreeSet::new()]) }
    }

    /// Holds at no step.
    pub fn falsity() -> ActivationFormula {
        ActivationFormula { terms: BTreeSet::new() }
    }

    pub fn atom(input: usize) -> ActivationFormula {
        ActivationFormula { terms: BTreeSet::from([BTreeSet::from([input])]) }
    }

    pub fn conjunction(inputs: impl IntoIterator<Item = usize>) -> ActivationFormula {
        ActivationFormula { terms: BTreeSet::from([inputs.into_iter().collect()]) }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = BTreeSet<usize>>) -> ActivationFormula {
        minimize(terms.into_iter().collect())
    }

    pub fn terms(&self) -> &BTreeSet<BTreeSet<usize>> {
        &self.terms
    }

    pub fn is_true(&self) -> bool {
        self.terms.contains(&BTreeSet::new())
    }

    pub fn inputs(&self) -> BTreeSet<usize> {
        self.terms.iter().flatten().copied().collect()
    }

    pub fn and(&self, other: &ActivationFormula) -> ActivationFormula {
        let mut terms = BTreeSet::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.insert(a.union(b).copied().collect());
            }
        }
        minimize(terms)
    }

    pub fn or(&self, other: &ActivationFormula) -> ActivationFormula {
        minimize(self.terms.union(&other.terms).cloned().collect())
    }

    /// `self ⟹ other`: every minimal model of self contains one of other.
    pub fn implies(&self, other: &ActivationFormula) -> bool {
        self.terms.iter().all(|t| other.terms.iter().any(|o| o.is_subset(t)))
    }

    pub fn eval(&self, fresh: &BTreeSet<usize>) -> bool {
        self.terms.iter().any(|t| t.is_subset(fresh))
    }

    pub fn display_with(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.terms.is_empty() {
            return "false".to_string();
        }
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                if t.is_empty() {
                    "true".to_string()
                } else {
                    t.iter().map(|&i| names(i)).collect::<Vec<_>>().join(" && ")
                }
            })
            .collect();
        if terms.len() == 1 {
            terms.into_iter().next().expect("one term")
        } else {
            terms.iter().map(|t| if t.contains("&&") { format!("({t})") } else { t.clone() }).collect::<Vec<_>>().join(" || ")
        }
    }
}

fn minimize(terms: BTreeSet<BTreeSet<usize>>) -> ActivationFormula {
    let kept = terms
        .iter()
        .filter(|t| !terms.iter().any(|o| o != *t && o.is_subset(t)))
        .cloned()
        .collect();
    ActivationFormula { terms: kept }
}

impl fmt::Display for ActivationFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&|i| format!("#{i}")))
    }
}
