//! Shared state of one binary join discovery: the side views, what is known
//! on each side, and streaming validation against the join.
//!
//! Dependencies handled here use combined ordinals: left attributes first,
//! then right attributes shifted by the left arity, as in the join output.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::attrs::{AttrId, AttrSet};
use crate::error::Result;
use crate::fd::{FdSet, FunctionalDependency};
use crate::join::{shared_keys, JoinSpec};
use crate::relation::{Instance, NULL_CODE};
use crate::upstage::{Side, SideOutcome, SideView};

/// Work done without materializing the full join.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Candidate dependencies checked against a partial join.
    pub candidates_validated: u64,
    /// Candidates accepted by the key argument, without any partial join.
    pub key_shortcuts: u64,
    pub partial_joins: u64,
    pub partial_join_rows_total: u64,
    /// Rows of the largest partial join held at once.
    pub partial_join_rows_peak: u64,
}

pub struct JoinContext<'a> {
    pub left: &'a Instance,
    pub right: &'a Instance,
    pub spec: &'a JoinSpec,
    pub left_view: SideView,
    pub right_view: SideView,
    /// Stage-one knowledge per side, over side ordinals.
    pub left_known: FdSet,
    pub right_known: FdSet,
    pub counters: Counters,
    keys: (Vec<Vec<u32>>, Vec<Vec<u32>>),
}

impl<'a> JoinContext<'a> {
    pub fn new(
        left: &'a Instance,
        right: &'a Instance,
        spec: &'a JoinSpec,
        left_view: SideView,
        right_view: SideView,
        left_outcome: &SideOutcome,
        right_outcome: &SideOutcome,
    ) -> Self {
        JoinContext {
            left,
            right,
            spec,
            left_view,
            right_view,
            left_known: left_outcome.known(),
            right_known: right_outcome.known(),
            counters: Counters::default(),
            keys: shared_keys(left, right, spec),
        }
    }

    pub fn nl(&self) -> usize {
        self.left.arity()
    }

    pub fn width(&self) -> usize {
        self.left.arity() + self.right.arity()
    }

    pub fn left_attrs(&self) -> AttrSet {
        AttrSet::prefix(self.nl())
    }

    pub fn right_attrs(&self) -> AttrSet {
        AttrSet::range(self.nl(), self.width())
    }

    pub fn side_attrs(&self, side: Side) -> AttrSet {
        match side {
            Side::Left => self.left_attrs(),
            Side::Right => self.right_attrs(),
        }
    }

    pub fn side_of(&self, a: AttrId) -> Side {
        if a.index() < self.nl() {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Join attributes of a side, in combined ordinals.
    pub fn join_attrs(&self, side: Side) -> AttrSet {
        match side {
            Side::Left => self.spec.left_set(),
            Side::Right => self.spec.right_set().shifted(self.nl()),
        }
    }

    pub fn view(&self, side: Side) -> &SideView {
        match side {
            Side::Left => &self.left_view,
            Side::Right => &self.right_view,
        }
    }

    /// Stage-one knowledge of a side, in combined ordinals.
    pub fn known_combined(&self, side: Side) -> FdSet {
        match side {
            Side::Left => self.left_known.clone(),
            Side::Right => self.right_known.shifted(self.nl()),
        }
    }

    /// Closure of a combined attribute set restricted to one side, under that
    /// side's stage-one knowledge. Returned in combined ordinals.
    pub fn side_closure(&self, side: Side, attrs: AttrSet) -> AttrSet {
        let own = attrs.intersection(self.side_attrs(side));
        match side {
            Side::Left => self.left_known.closure(own),
            Side::Right => self
                .right_known
                .closure(own.unshifted(self.nl()))
                .shifted(self.nl()),
        }
    }

    /// `attrs` is a superkey of the side view.
    pub fn is_side_key(&self, side: Side, attrs: AttrSet) -> bool {
        self.side_attrs(side).is_subset(self.side_closure(side, attrs))
    }

    /// Checks a combined-ordinal dependency on the projection of the join onto
    /// its attributes, streaming that projection row by row and stopping at
    /// the first violation.
    ///
    /// The projection is produced from a compressed join: matched join values
    /// with the same set of left tuples form one class whose right tuples are
    /// pooled, and each kept dangling tuple is padded once. Every class thus
    /// contributes the product of its distinct tuples, and the counters record
    /// the rows actually produced.
    pub fn validate(&mut self, fd: &FunctionalDependency) -> Result<bool> {
        self.counters.candidates_validated += 1;
        let nl = self.nl();
        let attrs = fd.attrs();
        let la: Vec<AttrId> = attrs.intersection(self.left_attrs()).iter().collect();
        let ra: Vec<AttrId> = attrs
            .intersection(self.right_attrs())
            .unshifted(nl)
            .iter()
            .collect();
        let lhs_pos: Vec<usize> = fd.lhs.iter().map(|a| rank(attrs, a)).collect();
        let rhs_pos = rank(attrs, fd.rhs);

        let (lk, rk) = &self.keys;
        let mut left_sets: BTreeMap<&[u32], BTreeSet<Vec<u32>>> = BTreeMap::new();
        let mut right_sets: BTreeMap<&[u32], BTreeSet<Vec<u32>>> = BTreeMap::new();
        let mut left_dangling = BTreeSet::new();
        let mut right_dangling = BTreeSet::new();
        let right_keys: HashSet<&[u32]> = rk.iter().map(Vec::as_slice).collect();
        let left_keys: HashSet<&[u32]> = lk.iter().map(Vec::as_slice).collect();
        for (r, k) in lk.iter().enumerate() {
            let t = self.left.row_key(r, &la);
            if right_keys.contains(k.as_slice()) {
                left_sets.entry(k.as_slice()).or_default().insert(t);
            } else {
                left_dangling.insert(t);
            }
        }
        for (r, k) in rk.iter().enumerate() {
            let t = self.right.row_key(r, &ra);
            if left_keys.contains(k.as_slice()) {
                right_sets.entry(k.as_slice()).or_default().insert(t);
            } else {
                right_dangling.insert(t);
            }
        }
        let mut classes: BTreeMap<BTreeSet<Vec<u32>>, BTreeSet<Vec<u32>>> = BTreeMap::new();
        for (k, ls) in left_sets {
            let rs = right_sets.remove(k).unwrap_or_default();
            classes.entry(ls).or_default().extend(rs);
        }
        let op = self.spec.op;
        let left_pad = vec![NULL_CODE; la.len()];
        let right_pad = vec![NULL_CODE; ra.len()];
        let mut blocks: Vec<Block> = classes
            .into_iter()
            .map(|(l, r)| (l.into_iter().collect(), r.into_iter().collect()))
            .collect();
        if op.keeps_dangling_left() {
            blocks.push((left_dangling.into_iter().collect(), vec![right_pad]));
        }
        if op.keeps_dangling_right() {
            blocks.push((vec![left_pad], right_dangling.into_iter().collect()));
        }

        let mut seen: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut rows = 0usize;
        let mut holds = true;
        'outer: for (ls, rs) in &blocks {
            for l in ls {
                for r in rs {
                    rows += 1;
                    let row: Vec<u32> = l.iter().chain(r).copied().collect();
                    let key: Vec<u32> = lhs_pos.iter().map(|&p| row[p]).collect();
                    let v = row[rhs_pos];
                    if *seen.entry(key).or_insert(v) != v {
                        holds = false;
                        break 'outer;
                    }
                }
            }
        }
        self.record(rows);
        Ok(holds)
    }

    fn record(&mut self, rows: usize) {
        let rows = rows as u64;
        self.counters.partial_joins += 1;
        self.counters.partial_join_rows_total += rows;
        self.counters.partial_join_rows_peak = self.counters.partial_join_rows_peak.max(rows);
    }
}

/// Left and right tuples whose product is part of the streamed join.
type Block = (Vec<Vec<u32>>, Vec<Vec<u32>>);

/// Position of `a` among the members of `set`.
fn rank(set: AttrSet, a: AttrId) -> usize {
    set.intersection(AttrSet::prefix(a.index())).len()
}
