//! Sampling-based discovery: a few representative join values per attribute
//! value on each side, a micro-join over them, and the dependencies every
//! micro-join agrees on.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attrs::{AttrId, AttrSet};
use crate::context::JoinContext;
use crate::error::{Error, Result};
use crate::fd::{FdSet, FunctionalDependency, Origin};
use crate::join::{join, shared_keys, JoinSpec};
use crate::lattice::{discover_exact, minimal_sets, Verdict};
use crate::relation::{Instance, ValueTuple};

/// How selected join values are grouped into micro-joins.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    /// One micro-join over every selected value.
    #[default]
    Merged,
    /// One micro-join per attribute-value branch that contributed values.
    PerBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Representative join values kept per multi-value branch.
    pub n_b: usize,
    /// Attributes with the most distinct values left out of the tree.
    pub n_v: usize,
    pub seed: u64,
    pub grouping: Grouping,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n_b: 1,
            n_v: 0,
            seed: 0,
            grouping: Grouping::Merged,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_b == 0 {
            return Err(Error::Config("n_b must be at least 1".into()));
        }
        Ok(())
    }
}

type JoinKey = Vec<u32>;

/// Join values contributed by one tree branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// `None` for the single branch of a side without non-join attributes.
    pub attr: Option<AttrId>,
    pub value: u32,
    pub ids: BTreeSet<JoinKey>,
}

/// Seeded ranks over a set of keys: a permutation of their sorted order.
fn ranks(keys: &BTreeSet<JoinKey>, seed: u64, stream: u64) -> HashMap<JoinKey, usize> {
    let mut order: Vec<JoinKey> = keys.iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    order.shuffle(&mut rng);
    order.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
}

/// Tree branches over `rows` of `instance`: non-join attributes in ascending
/// order of distinct values, minus the `n_v` with the most, and for each of
/// their values the join keys of the matching rows, cut to the `n_b`
/// lowest-ranked keys.
fn branches(
    instance: &Instance,
    keys: &[JoinKey],
    rows: &[usize],
    on: AttrSet,
    cfg: &SampleConfig,
    rank: &HashMap<JoinKey, usize>,
) -> Vec<Branch> {
    if rows.is_empty() {
        return Vec::new();
    }
    let free = instance.all_attrs().difference(on);
    let pick = |ids: BTreeSet<JoinKey>| -> BTreeSet<JoinKey> {
        if ids.len() <= cfg.n_b {
            return ids;
        }
        let mut v: Vec<JoinKey> = ids.into_iter().collect();
        v.sort_by_key(|k| rank[k]);
        v.truncate(cfg.n_b);
        v.into_iter().collect()
    };
    if free.is_empty() {
        let ids = rows.iter().map(|&r| keys[r].clone()).collect();
        return vec![Branch {
            attr: None,
            value: 0,
            ids: pick(ids),
        }];
    }
    let mut levels: Vec<(usize, AttrId)> = free
        .iter()
        .map(|a| {
            let codes = instance.codes(a);
            let distinct: HashSet<u32> = rows.iter().map(|&r| codes[r]).collect();
            (distinct.len(), a)
        })
        .collect();
    levels.sort();
    levels.truncate(levels.len().saturating_sub(cfg.n_v));
    let mut out = Vec::new();
    for (_, a) in levels {
        let codes = instance.codes(a);
        let mut groups: std::collections::BTreeMap<u32, BTreeSet<JoinKey>> = Default::default();
        for &r in rows {
            groups.entry(codes[r]).or_default().insert(keys[r].clone());
        }
        for (value, ids) in groups {
            out.push(Branch {
                attr: Some(a),
                value,
                ids: pick(ids),
            });
        }
    }
    out
}

fn union_ids(bs: &[Branch]) -> BTreeSet<JoinKey> {
    bs.iter().flat_map(|b| b.ids.iter().cloned()).collect()
}

/// Join values selected on one instance, over its own distinct join values.
pub fn generate_ids_set(
    instance: &Instance,
    on: &[AttrId],
    cfg: &SampleConfig,
) -> Result<BTreeSet<ValueTuple>> {
    cfg.validate()?;
    instance.check_list(on)?;
    let keys: Vec<JoinKey> = (0..instance.row_count())
        .map(|r| instance.row_key(r, on))
        .collect();
    let all: BTreeSet<JoinKey> = keys.iter().cloned().collect();
    let rank = ranks(&all, cfg.seed, 0);
    let rows: Vec<usize> = (0..instance.row_count()).collect();
    let picked = union_ids(&branches(
        instance,
        &keys,
        &rows,
        on.iter().collect(),
        cfg,
        &rank,
    ));
    Ok(picked
        .into_iter()
        .map(|k| decode_key(instance, on, &k))
        .collect())
}

fn decode_key(instance: &Instance, on: &[AttrId], key: &[u32]) -> ValueTuple {
    on.iter()
        .zip(key)
        .map(|(&a, &c)| instance.column(a).decode(c).map(str::to_owned))
        .collect()
}

/// The selection shared by both sides plus, per side whose dangling rows
/// survive the join, the dangling join values selected on that side.
#[derive(Clone, Debug, Default)]
struct Selection {
    shared: BTreeSet<JoinKey>,
    dangling_left: BTreeSet<JoinKey>,
    dangling_right: BTreeSet<JoinKey>,
    groups: Vec<BTreeSet<JoinKey>>,
}

fn select(left: &Instance, right: &Instance, spec: &JoinSpec, cfg: &SampleConfig) -> Selection {
    let (lk, rk) = shared_keys(left, right, spec);
    let lset: BTreeSet<JoinKey> = lk.iter().cloned().collect();
    let rset: BTreeSet<JoinKey> = rk.iter().cloned().collect();
    let e: BTreeSet<JoinKey> = lset.intersection(&rset).cloned().collect();
    let rank = ranks(&e, cfg.seed, 0);
    let rows_in = |keys: &[JoinKey], inside: bool| -> Vec<usize> {
        (0..keys.len())
            .filter(|&r| e.contains(&keys[r]) == inside)
            .collect()
    };
    let lb = branches(left, &lk, &rows_in(&lk, true), spec.left_set(), cfg, &rank);
    let rb = branches(right, &rk, &rows_in(&rk, true), spec.right_set(), cfg, &rank);
    let shared: BTreeSet<JoinKey> = union_ids(&lb)
        .intersection(&union_ids(&rb))
        .cloned()
        .collect();
    let mut sel = Selection {
        shared,
        ..Selection::default()
    };
    let mut dangling_branches = Vec::new();
    if spec.op.keeps_dangling_left() {
        let rows = rows_in(&lk, false);
        let keys: BTreeSet<JoinKey> = rows.iter().map(|&r| lk[r].clone()).collect();
        let b = branches(left, &lk, &rows, spec.left_set(), cfg, &ranks(&keys, cfg.seed, 1));
        sel.dangling_left = union_ids(&b);
        dangling_branches.extend(b);
    }
    if spec.op.keeps_dangling_right() {
        let rows = rows_in(&rk, false);
        let keys: BTreeSet<JoinKey> = rows.iter().map(|&r| rk[r].clone()).collect();
        let b = branches(right, &rk, &rows, spec.right_set(), cfg, &ranks(&keys, cfg.seed, 2));
        sel.dangling_right = union_ids(&b);
        dangling_branches.extend(b);
    }
    match cfg.grouping {
        Grouping::Merged => {
            let all: BTreeSet<JoinKey> = sel
                .shared
                .iter()
                .chain(&sel.dangling_left)
                .chain(&sel.dangling_right)
                .cloned()
                .collect();
            if !all.is_empty() {
                sel.groups.push(all);
            }
        }
        Grouping::PerBranch => {
            let mut seen = BTreeSet::new();
            for b in lb.iter().chain(&rb) {
                let g: BTreeSet<JoinKey> = b.ids.intersection(&sel.shared).cloned().collect();
                if !g.is_empty() && seen.insert(g.clone()) {
                    sel.groups.push(g);
                }
            }
            for b in dangling_branches {
                if seen.insert(b.ids.clone()) {
                    sel.groups.push(b.ids);
                }
            }
        }
    }
    sel
}

/// Join values selected on both sides of the join, decoded with the left
/// dictionaries.
pub fn selective_sampling(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    cfg: &SampleConfig,
) -> Result<BTreeSet<ValueTuple>> {
    cfg.validate()?;
    spec.validate(left, right)?;
    let sel = select(left, right, spec, cfg);
    Ok(sel
        .shared
        .iter()
        .map(|k| decode_key(left, &spec.left_on, k))
        .collect())
}

/// The micro-join over the rows whose join value lies in `ids`.
fn micro_join(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    ids: &BTreeSet<JoinKey>,
) -> Result<Instance> {
    let (lk, rk) = shared_keys(left, right, spec);
    let lrows: Vec<usize> = (0..lk.len()).filter(|&r| ids.contains(&lk[r])).collect();
    let rrows: Vec<usize> = (0..rk.len()).filter(|&r| ids.contains(&rk[r])).collect();
    join(&left.select_rows(&lrows), &right.select_rows(&rrows), spec)
}

/// Dependencies implied by every set: for each rhs, unions of one lhs per
/// set together with the members themselves, kept when every set implies
/// them, then reduced to a minimal cover.
pub fn consensus(fd_sets: &[FdSet]) -> Result<FdSet> {
    let Some(first) = fd_sets.first() else {
        return Err(Error::Config("consensus needs at least one dependency set".into()));
    };
    let rhs: BTreeSet<AttrId> = fd_sets
        .iter()
        .flat_map(|s| s.iter().map(|d| d.rhs))
        .collect();
    let mut out = FdSet::new();
    for b in rhs {
        let mut family: Vec<AttrSet> = first.iter().filter(|d| d.rhs == b).map(|d| d.lhs).collect();
        for s in &fd_sets[1..] {
            let next: Vec<AttrSet> = s.iter().filter(|d| d.rhs == b).map(|d| d.lhs).collect();
            let mut product: Vec<AttrSet> = family
                .iter()
                .flat_map(|f| next.iter().map(move |n| f.union(*n)))
                .collect();
            product.sort();
            product.dedup();
            family = minimal_only(product);
        }
        let members = fd_sets.iter().flat_map(|s| s.iter().filter(|d| d.rhs == b).map(|d| d.lhs));
        for lhs in family.into_iter().chain(members) {
            let d = FunctionalDependency::new(lhs, b);
            if fd_sets.iter().all(|s| s.implies(&d)) {
                out.insert(d);
            }
        }
    }
    Ok(out.minimal_cover())
}

fn minimal_only(sets: Vec<AttrSet>) -> Vec<AttrSet> {
    let mut out: Vec<AttrSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|o| o.is_subset(s)) {
            out.retain(|o| !s.is_subset(*o));
            out.push(s);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, Default)]
pub struct SampleOutcome {
    /// New dependencies, over combined ordinals, tagged `sampled`.
    pub fds: FdSet,
    pub selected_ids: usize,
    pub micro_joins: usize,
    /// Rows of the micro-joins, summed.
    pub sample_rows: u64,
    pub warnings: Vec<String>,
}

/// Replaces selective mining by sampling. Dependencies with an lhs inside
/// the rhs side are taken from `known` only; the sample decides the rest.
pub fn discover_sampled(
    ctx: &JoinContext<'_>,
    known: &FdSet,
    cfg: &SampleConfig,
) -> Result<SampleOutcome> {
    cfg.validate()?;
    let sel = select(ctx.left, ctx.right, ctx.spec, cfg);
    let mut out = SampleOutcome {
        selected_ids: sel.shared.len() + sel.dangling_left.len() + sel.dangling_right.len(),
        ..SampleOutcome::default()
    };
    if sel.groups.is_empty() {
        out.warnings
            .push("the sample selected no join values; no dependency was sampled".into());
        return Ok(out);
    }
    let mut sets = Vec::with_capacity(sel.groups.len());
    for g in &sel.groups {
        let micro = micro_join(ctx.left, ctx.right, ctx.spec, g)?;
        out.sample_rows += micro.row_count() as u64;
        sets.push(discover_exact(&micro));
    }
    out.micro_joins = sets.len();
    let agreed = consensus(&sets)?;
    let width = ctx.width();
    let mut k = known.clone();
    for b in AttrSet::prefix(width).iter() {
        let own = ctx.side_attrs(ctx.side_of(b));
        let universe = AttrSet::prefix(width).without(b);
        if !agreed.closure(universe).contains(b) {
            continue;
        }
        let hits = minimal_sets(universe, |z| {
            let fd = FunctionalDependency::new(z, b);
            if k.implies(&fd) {
                Verdict::Skip
            } else if z.is_subset(own) || !agreed.implies(&fd) {
                Verdict::Extend
            } else {
                k.insert(fd);
                Verdict::Emit
            }
        });
        for z in hits {
            out.fds
                .insert_tagged(FunctionalDependency::new(z, b), Some(Origin::Sampled));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(lhs: &[usize], rhs: usize) -> FunctionalDependency {
        FunctionalDependency::new(lhs.iter().map(|&i| AttrId::new(i)).collect(), AttrId::new(rhs))
    }

    fn set(fds: &[FunctionalDependency]) -> FdSet {
        fds.iter().copied().collect()
    }

    #[test]
    fn consensus_keeps_common_members() {
        let a = set(&[fd(&[0], 1)]);
        let b = set(&[fd(&[0], 1), fd(&[2], 1)]);
        assert_eq!(consensus(&[a.clone(), b]).unwrap(), a);
        assert_eq!(consensus(std::slice::from_ref(&a)).unwrap(), a.minimal_cover());
        assert!(consensus(&[a, FdSet::new()]).unwrap().is_empty());
        assert!(consensus(&[]).is_err());
    }

    #[test]
    fn consensus_combines_lhs_across_sets() {
        let a = set(&[fd(&[0], 2)]);
        let b = set(&[fd(&[1], 2)]);
        assert_eq!(consensus(&[a, b]).unwrap(), set(&[fd(&[0, 1], 2)]));
    }

    #[test]
    fn consensus_follows_implication() {
        let a = set(&[fd(&[0], 2), fd(&[2], 1)]);
        let b = set(&[fd(&[0], 1)]);
        assert_eq!(consensus(&[a, b]).unwrap(), set(&[fd(&[0], 1)]));
    }

    #[test]
    fn constant_attribute_keeps_one_id() {
        let inst = Instance::from_strs("T", &["k", "c"], &[&["1", "x"], &["2", "x"], &["3", "x"]])
            .unwrap();
        let cfg = SampleConfig::default();
        let ids = generate_ids_set(&inst, &[AttrId::new(0)], &cfg).unwrap();
        assert_eq!(ids.len(), 1);
        let all = SampleConfig { n_v: 1, ..cfg };
        assert!(generate_ids_set(&inst, &[AttrId::new(0)], &all).unwrap().is_empty());
    }

    #[test]
    fn selection_is_seeded() {
        let inst = Instance::from_strs(
            "T",
            &["k", "c"],
            &[&["1", "x"], &["2", "x"], &["3", "x"], &["4", "x"], &["5", "x"]],
        )
        .unwrap();
        let pick = |seed| {
            let cfg = SampleConfig { seed, ..SampleConfig::default() };
            generate_ids_set(&inst, &[AttrId::new(0)], &cfg).unwrap()
        };
        assert_eq!(pick(7), pick(7));
        let distinct: BTreeSet<_> = (0..20).map(pick).collect();
        assert!(distinct.len() > 1);
    }
}
