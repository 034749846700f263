//! Stripped partitions and the g3 error measure.

use std::collections::{BTreeSet, HashMap};

use crate::attrs::{AttrId, AttrSet};
use crate::error::{Error, Result};
use crate::fd::FunctionalDependency;
use crate::relation::{Instance, NULL_CODE};

/// Row index within one instance.
pub type TupleId = usize;

/// Equivalence classes of size two or more under an attribute set.
///
/// Classes hold ascending tuple ids and are ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrippedPartition {
    classes: Vec<Vec<TupleId>>,
    source_rows: usize,
    attrs: AttrSet,
}

impl StrippedPartition {
    pub fn classes(&self) -> &[Vec<TupleId>] {
        &self.classes
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn attrs(&self) -> AttrSet {
        self.attrs
    }

    /// Rows covered by non-singleton classes.
    pub fn covered(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    /// Minimum number of rows to delete so that `attrs` becomes a key.
    pub fn key_error(&self) -> usize {
        self.covered() - self.classes.len()
    }

    /// Number of equivalence classes including stripped singletons.
    pub fn class_count(&self) -> usize {
        self.source_rows - self.key_error()
    }

    /// True when every class is constant on `rhs`.
    pub fn refines(&self, instance: &Instance, rhs: AttrId) -> bool {
        let codes = instance.codes(rhs);
        self.classes.iter().all(|c| {
            let first = codes[c[0]];
            c[1..].iter().all(|&t| codes[t] == first)
        })
    }

    fn normalize(mut classes: Vec<Vec<TupleId>>, source_rows: usize, attrs: AttrSet) -> Self {
        classes.retain(|c| c.len() >= 2);
        classes.sort_unstable_by_key(|c| c[0]);
        StrippedPartition {
            classes,
            source_rows,
            attrs,
        }
    }
}

/// Groups rows by their codes on `attrs`.
///
/// The empty attribute set yields a single class holding every row.
pub fn build_partition(instance: &Instance, attrs: AttrSet) -> Result<StrippedPartition> {
    instance.check_attrs(attrs)?;
    let rows = instance.row_count();
    let classes = match attrs.len() {
        0 => vec![(0..rows).collect()],
        1 => group_single(instance.codes(attrs.first().unwrap_or(AttrId::new(0)))),
        _ => {
            let list: Vec<AttrId> = attrs.iter().collect();
            let mut groups: HashMap<Vec<u32>, Vec<TupleId>> = HashMap::new();
            for r in 0..rows {
                groups.entry(instance.row_key(r, &list)).or_default().push(r);
            }
            groups.into_values().collect()
        }
    };
    Ok(StrippedPartition::normalize(classes, rows, attrs))
}

fn group_single(codes: &[u32]) -> Vec<Vec<TupleId>> {
    let mut groups: HashMap<u32, Vec<TupleId>> = HashMap::new();
    for (r, &c) in codes.iter().enumerate() {
        groups.entry(c).or_default().push(r);
    }
    groups.into_values().collect()
}

/// Partition of the union of both attribute sets, by class intersection.
pub fn partition_product(
    p: &StrippedPartition,
    q: &StrippedPartition,
) -> Result<StrippedPartition> {
    if p.source_rows != q.source_rows {
        return Err(Error::PartitionMismatch {
            left: p.source_rows,
            right: q.source_rows,
        });
    }
    const NONE: usize = usize::MAX;
    let mut owner = vec![NONE; p.source_rows];
    for (i, c) in p.classes.iter().enumerate() {
        for &t in c {
            owner[t] = i;
        }
    }
    let mut out = Vec::new();
    let mut buckets: HashMap<usize, Vec<TupleId>> = HashMap::new();
    for c in &q.classes {
        for &t in c {
            if owner[t] != NONE {
                buckets.entry(owner[t]).or_default().push(t);
            }
        }
        out.extend(buckets.drain().map(|(_, v)| v));
    }
    Ok(StrippedPartition::normalize(
        out,
        p.source_rows,
        p.attrs.union(q.attrs),
    ))
}

/// Number of rows to delete so that `lhs → rhs` holds, given `π_lhs`.
pub fn violation_count_with(instance: &Instance, lhs: &StrippedPartition, rhs: AttrId) -> usize {
    let codes = instance.codes(rhs);
    let mut counts: HashMap<u32, usize> = HashMap::new();
    lhs.classes
        .iter()
        .map(|c| {
            counts.clear();
            for &t in c {
                *counts.entry(codes[t]).or_default() += 1;
            }
            c.len() - counts.values().copied().max().unwrap_or(0)
        })
        .sum()
}

/// The g3 error of `lhs → rhs`: the minimum fraction of rows to delete for
/// the dependency to hold. An empty instance has error 0.
pub fn g3_error(instance: &Instance, lhs: AttrSet, rhs: AttrId) -> Result<f64> {
    let n = instance.row_count();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(violation_count(instance, lhs, rhs)? as f64 / n as f64)
}

pub fn violation_count(instance: &Instance, lhs: AttrSet, rhs: AttrId) -> Result<usize> {
    instance.check_attrs(lhs.with(rhs))?;
    let p = build_partition(instance, lhs)?;
    Ok(violation_count_with(instance, &p, rhs))
}

/// Rows whose removal makes a dependency hold, of minimum cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationSet {
    pub tuple_ids: BTreeSet<TupleId>,
    pub fd: FunctionalDependency,
}

/// For every lhs class, every row outside one largest rhs subclass. Ties keep
/// the subclass with the smallest tuple id.
pub fn violating_tuples(instance: &Instance, fd: &FunctionalDependency) -> Result<ViolationSet> {
    instance.check_attrs(fd.lhs.with(fd.rhs))?;
    let p = build_partition(instance, fd.lhs)?;
    let codes = instance.codes(fd.rhs);
    let mut tuple_ids = BTreeSet::new();
    for c in p.classes() {
        // Subclasses in order of their smallest member, since `c` is ascending.
        let mut order: Vec<u32> = Vec::new();
        let mut sizes: HashMap<u32, usize> = HashMap::new();
        for &t in c {
            let e = sizes.entry(codes[t]).or_insert_with(|| {
                order.push(codes[t]);
                0
            });
            *e += 1;
        }
        let mut best = order[0];
        for &k in &order[1..] {
            if sizes[&k] > sizes[&best] {
                best = k;
            }
        }
        tuple_ids.extend(c.iter().copied().filter(|&t| codes[t] != best));
    }
    Ok(ViolationSet {
        tuple_ids,
        fd: *fd,
    })
}

/// True if `row` is null on every attribute of `attrs`.
pub(crate) fn all_null(instance: &Instance, row: TupleId, attrs: &[AttrId]) -> bool {
    attrs.iter().all(|&a| instance.codes(a)[row] == NULL_CODE)
}
