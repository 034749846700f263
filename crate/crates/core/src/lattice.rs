//! Level-wise lattice search for exact and approximate dependencies.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::attrs::{AttrId, AttrSet};
use crate::error::{Error, Result};
use crate::fd::{Afd, FdSet, FunctionalDependency};
use crate::partition::{build_partition, partition_product, violation_count_with, StrippedPartition};
use crate::relation::Instance;

/// Memoized stripped partitions of one instance.
pub struct PartitionCache<'a> {
    instance: &'a Instance,
    parts: HashMap<AttrSet, Arc<StrippedPartition>>,
}

impl<'a> PartitionCache<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        PartitionCache {
            instance,
            parts: HashMap::new(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn get(&mut self, attrs: AttrSet) -> Arc<StrippedPartition> {
        if let Some(p) = self.parts.get(&attrs) {
            return Arc::clone(p);
        }
        let p = match attrs.last() {
            Some(last) if attrs.len() > 1 => {
                let head = self.get(attrs.without(last));
                let tail = self.get(AttrSet::singleton(last));
                partition_product(&head, &tail).expect("partitions of one instance")
            }
            _ => build_partition(self.instance, attrs).expect("attributes checked by caller"),
        };
        let p = Arc::new(p);
        self.parts.insert(attrs, Arc::clone(&p));
        p
    }

    pub fn holds(&mut self, fd: &FunctionalDependency) -> bool {
        let p = self.get(fd.lhs);
        p.refines(self.instance, fd.rhs)
    }

    pub fn violations(&mut self, fd: &FunctionalDependency) -> usize {
        let p = self.get(fd.lhs);
        violation_count_with(self.instance, &p, fd.rhs)
    }
}

/// Outcome of visiting one lattice node.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    /// A solution; its supersets are not visited.
    Emit,
    /// Not a solution and its supersets are not visited.
    Skip,
    /// Not a solution; supersets may be visited.
    Extend,
}

/// Visits subsets of `universe` bottom-up, starting from the empty set, in
/// canonical order. A set is visited only if every subset one size smaller
/// was extended. Returns the emitted sets in visiting order.
pub fn minimal_sets(universe: AttrSet, mut verdict: impl FnMut(AttrSet) -> Verdict) -> Vec<AttrSet> {
    let mut emitted = Vec::new();
    let mut level = vec![AttrSet::EMPTY];
    while !level.is_empty() {
        let mut extended = Vec::new();
        for s in level {
            match verdict(s) {
                Verdict::Emit => emitted.push(s),
                Verdict::Skip => {}
                Verdict::Extend => extended.push(s),
            }
        }
        level = next_level_sets(&extended, universe);
    }
    emitted
}

/// Apriori join: unions of two sets differing only in their largest member,
/// kept when every subset one size smaller is in `current`. The empty level
/// expands to the singletons of `universe`.
pub fn next_level_sets(current: &[AttrSet], universe: AttrSet) -> Vec<AttrSet> {
    if current.len() == 1 && current[0].is_empty() {
        return universe.iter().map(AttrSet::singleton).collect();
    }
    let present: HashSet<AttrSet> = current.iter().copied().collect();
    let mut by_prefix: BTreeMap<AttrSet, Vec<AttrId>> = BTreeMap::new();
    for s in current {
        if let Some(last) = s.last() {
            by_prefix.entry(s.without(last)).or_default().push(last);
        }
    }
    let mut out = Vec::new();
    for (prefix, mut tails) in by_prefix {
        tails.sort_unstable();
        for i in 0..tails.len() {
            for j in i + 1..tails.len() {
                let cand = prefix.with(tails[i]).with(tails[j]);
                if !cand.is_subset(universe) {
                    continue;
                }
                if cand.iter().all(|a| present.contains(&cand.without(a))) {
                    out.push(cand);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Next-level candidate dependencies, grouped per rhs, excluding any
/// candidate implied by `pruned`.
pub fn next_level_candidates(
    current: &[FunctionalDependency],
    pruned: &FdSet,
) -> Vec<FunctionalDependency> {
    let mut by_rhs: BTreeMap<AttrId, Vec<AttrSet>> = BTreeMap::new();
    for fd in current {
        by_rhs.entry(fd.rhs).or_default().push(fd.lhs);
    }
    let mut out = Vec::new();
    for (rhs, sets) in by_rhs {
        let universe = AttrSet::prefix(crate::attrs::MAX_ATTRS).without(rhs);
        for lhs in next_level_sets(&sets, universe) {
            let fd = FunctionalDependency::new(lhs, rhs);
            if !pruned.implies(&fd) {
                out.push(fd);
            }
        }
    }
    out.sort();
    out
}

/// All minimal exact dependencies, and all minimal approximate ones with
/// `0 < error ≤ epsilon`.
pub fn discover_fds(instance: &Instance, epsilon: f64) -> Result<(FdSet, Vec<Afd>)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Config(format!("epsilon {epsilon} must lie in [0, 1)")));
    }
    let exact = discover_exact(instance);
    let afds = if epsilon > 0.0 {
        discover_approximate(instance, epsilon)
    } else {
        Vec::new()
    };
    Ok((exact, afds))
}

/// Minimal exact dependencies by a level-wise search with rhs-candidate
/// pruning.
pub fn discover_exact(instance: &Instance) -> FdSet {
    let all = instance.all_attrs();
    let mut out = FdSet::new();
    let empty = Arc::new(build_partition(instance, AttrSet::EMPTY).expect("empty set"));
    let mut prev_parts: HashMap<AttrSet, Arc<StrippedPartition>> = HashMap::new();
    let mut prev_cplus: HashMap<AttrSet, AttrSet> = HashMap::new();
    prev_parts.insert(AttrSet::EMPTY, empty);
    prev_cplus.insert(AttrSet::EMPTY, all);
    let mut level: Vec<AttrSet> = all.iter().map(AttrSet::singleton).collect();
    while !level.is_empty() {
        let mut parts: HashMap<AttrSet, Arc<StrippedPartition>> = HashMap::new();
        let mut cplus: HashMap<AttrSet, AttrSet> = HashMap::new();
        for &x in &level {
            let p = if x.len() == 1 {
                Arc::new(build_partition(instance, x).expect("attributes of instance"))
            } else {
                let last = x.last().expect("non-empty");
                let before = x.without(last).last().expect("two members");
                let a = &prev_parts[&x.without(last)];
                let b = &prev_parts[&x.without(before)];
                Arc::new(partition_product(a, b).expect("same instance"))
            };
            let mut c = all;
            for a in x.iter() {
                c = c.intersection(prev_cplus[&x.without(a)]);
            }
            let e = p.key_error();
            for a in x.intersection(c).iter() {
                let sub = x.without(a);
                if prev_parts[&sub].key_error() == e {
                    out.insert(FunctionalDependency::new(sub, a));
                    c.remove(a);
                    c = c.difference(all.difference(x));
                }
            }
            parts.insert(x, p);
            cplus.insert(x, c);
        }
        let survivors: Vec<AttrSet> = level
            .into_iter()
            .filter(|x| !cplus[x].is_empty())
            .collect();
        level = next_level_sets(&survivors, all);
        prev_parts = parts;
        prev_cplus = cplus;
    }
    out
}

fn discover_approximate(instance: &Instance, epsilon: f64) -> Vec<Afd> {
    let n = instance.row_count();
    if n == 0 {
        return Vec::new();
    }
    // Tolerance keeps e.g. 0.2 * 5 from rounding below 1.
    let limit = (epsilon * n as f64 + 1e-9).floor() as usize;
    let mut cache = PartitionCache::new(instance);
    let mut out = Vec::new();
    for rhs in instance.all_attrs().iter() {
        let universe = instance.all_attrs().without(rhs);
        minimal_sets(universe, |lhs| {
            let fd = FunctionalDependency::new(lhs, rhs);
            let v = cache.violations(&fd);
            if v > limit {
                return Verdict::Extend;
            }
            if v > 0 {
                out.push(Afd {
                    fd,
                    error: v as f64 / n as f64,
                    degree: v,
                });
            }
            Verdict::Emit
        });
    }
    out.sort_by_key(|a| a.fd);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(i: usize) -> AttrId {
        AttrId::new(i)
    }

    fn set(ids: &[usize]) -> AttrSet {
        ids.iter().map(|&i| a(i)).collect()
    }

    fn fd(lhs: &[usize], rhs: usize) -> FunctionalDependency {
        FunctionalDependency::new(set(lhs), a(rhs))
    }

    fn proof_right() -> Instance {
        Instance::from_strs(
            "R",
            &["Y", "A'", "b"],
            &[&["0", "0", "0"], &["1", "0", "0"], &["1", "1", "1"], &["2", "1", "0"]],
        )
        .unwrap()
    }

    #[test]
    fn proof_table_right_dependencies() {
        let (exact, afds) = discover_fds(&proof_right(), 0.0).unwrap();
        let expect: FdSet = [fd(&[0, 1], 2), fd(&[0, 2], 1)].into_iter().collect();
        assert_eq!(exact, expect);
        assert!(afds.is_empty());
    }

    #[test]
    fn key_column_determines_everything() {
        let i = Instance::from_strs(
            "t",
            &["k", "x", "y"],
            &[&["1", "a", "a"], &["2", "a", "b"], &["3", "b", "a"]],
        )
        .unwrap();
        let (exact, _) = discover_fds(&i, 0.0).unwrap();
        assert!(exact.contains(&fd(&[0], 1)));
        assert!(exact.contains(&fd(&[0], 2)));
    }

    #[test]
    fn constant_column_is_empty_lhs() {
        let i = Instance::from_strs("t", &["c", "x"], &[&["1", "a"], &["1", "b"]]).unwrap();
        let (exact, _) = discover_fds(&i, 0.0).unwrap();
        assert_eq!(exact, [fd(&[], 0)].into_iter().collect());
    }

    #[test]
    fn approximate_dependencies_are_minimal() {
        let i = Instance::from_strs(
            "t",
            &["f", "d"],
            &[&["y", "1"], &["y", "1"], &["y", "1"], &["y", "2"], &["n", "3"]],
        )
        .unwrap();
        let (exact, afds) = discover_fds(&i, 0.25).unwrap();
        assert!(exact.contains(&fd(&[1], 0)));
        // One row breaks both the constant `f` and `f -> d`.
        let found: Vec<FunctionalDependency> = afds.iter().map(|a| a.fd).collect();
        assert_eq!(found, vec![fd(&[], 0), fd(&[0], 1)]);
        assert!(afds.iter().all(|a| a.degree == 1));
        assert!((afds[1].error - 0.2).abs() < 1e-12);
    }

    #[test]
    fn epsilon_out_of_range() {
        assert!(matches!(discover_fds(&proof_right(), 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn next_level_examples() {
        assert!(next_level_candidates(&[], &FdSet::new()).is_empty());
        let lvl = [fd(&[0], 2), fd(&[1], 2)];
        assert_eq!(next_level_candidates(&lvl, &FdSet::new()), vec![fd(&[0, 1], 2)]);
        let pruned: FdSet = [fd(&[0], 2)].into_iter().collect();
        assert!(next_level_candidates(&lvl, &pruned).is_empty());
    }

    #[test]
    fn next_level_requires_all_subsets() {
        let cur = [set(&[0, 1]), set(&[0, 2])];
        assert!(next_level_sets(&cur, set(&[0, 1, 2])).is_empty());
        let cur = [set(&[0, 1]), set(&[0, 2]), set(&[1, 2])];
        assert_eq!(next_level_sets(&cur, set(&[0, 1, 2])), vec![set(&[0, 1, 2])]);
    }
}
