//! Closure-aware comparison of a discovered dependency set with the truth.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::attrs::{AttrId, MAX_ATTRS};
use crate::error::{Error, Result};
use crate::fd::{FdRecord, FdSet, FunctionalDependency};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalMetrics {
    /// Share of discovered dependencies implied by the truth.
    pub precision: f64,
    /// Share of true dependencies implied by the discovered set.
    pub recall: f64,
    pub discovered: usize,
    pub truth: usize,
    pub discovered_correct: usize,
    pub truth_recovered: usize,
    /// Nothing was discovered; precision is reported as 1.
    pub precision_undefined: bool,
    /// The truth is empty; recall is reported as 1.
    pub recall_undefined: bool,
}

pub fn evaluate(discovered: &FdSet, truth: &FdSet) -> EvalMetrics {
    let correct = discovered.iter().filter(|d| truth.implies(d)).count();
    let recovered = truth.iter().filter(|t| discovered.implies(t)).count();
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    EvalMetrics {
        precision: ratio(correct, discovered.len()),
        recall: ratio(recovered, truth.len()),
        discovered: discovered.len(),
        truth: truth.len(),
        discovered_correct: correct,
        truth_recovered: recovered,
        precision_undefined: discovered.is_empty(),
        recall_undefined: truth.is_empty(),
    }
}

/// [`evaluate`] over records resolved against the union of their names.
pub fn evaluate_records(discovered: &[FdRecord], truth: &[FdRecord]) -> Result<EvalMetrics> {
    let names: BTreeSet<&str> = discovered
        .iter()
        .chain(truth)
        .flat_map(|r| r.lhs.iter().map(String::as_str).chain([r.rhs.as_str()]))
        .collect();
    if names.len() > MAX_ATTRS {
        return Err(Error::SchemaTooWide(names.len()));
    }
    let names: Vec<&str> = names.into_iter().collect();
    let id = |n: &str| AttrId::new(names.binary_search(&n).expect("collected above"));
    let resolve = |recs: &[FdRecord]| -> Result<FdSet> {
        let mut s = FdSet::new();
        for r in recs {
            if r.error != 0.0 {
                return Err(Error::Contract(format!(
                    "approximate dependency with rhs {} cannot be compared",
                    r.rhs
                )));
            }
            let lhs = r.lhs.iter().map(|n| id(n)).collect();
            let rhs = id(&r.rhs);
            if r.lhs.contains(&r.rhs) {
                continue;
            }
            s.insert(FunctionalDependency::new(lhs, rhs));
        }
        Ok(s)
    };
    Ok(evaluate(&resolve(discovered)?, &resolve(truth)?))
}
