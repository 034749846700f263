//! Dependencies that become exact on a join because rows left without a
//! partner are filtered out.
//!
//! Each input side is viewed through the set of its tuples that survive into
//! the join ("side view"). Dependencies of the input that still hold there are
//! preserved; new dependencies holding only on the side view are upstaged.
//! Outer joins can pad a side with one all-null tuple, which may also break
//! dependencies; those are reported as violated instead of silently dropped.

use crate::attrs::AttrId;
use crate::error::{Error, Result};
use crate::fd::{Afd, FdSet, FunctionalDependency, Origin};
use crate::join::{match_flags, JoinOperator, JoinSpec};
use crate::lattice::{discover_fds, minimal_sets, PartitionCache, Verdict};
use crate::partition::{all_null, violating_tuples};
use crate::relation::Instance;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn preserved(self) -> Origin {
        match self {
            Side::Left => Origin::PreservedLeft,
            Side::Right => Origin::PreservedRight,
        }
    }

    pub fn upstaged(self) -> Origin {
        match self {
            Side::Left => Origin::UpstagedLeft,
            Side::Right => Origin::UpstagedRight,
        }
    }
}

/// The tuples of one input that appear in the join output, as a set.
#[derive(Clone, Debug)]
pub struct SideView {
    pub side: Side,
    /// Surviving input rows, plus an all-null row when the side is padded.
    pub instance: Instance,
    /// Per input row, whether it survives.
    pub kept: Vec<bool>,
    pub rows_filtered: usize,
    pub padded: bool,
    /// Some surviving input row is null on every join attribute.
    pub null_key_row: bool,
    /// The side's attributes appear in the join output.
    pub present: bool,
}

impl SideView {
    pub fn build(left: &Instance, right: &Instance, spec: &JoinSpec, side: Side) -> SideView {
        let (lm, rm) = match_flags(left, right, spec);
        let op = spec.op;
        let (inst, own, other, keeps_dangling, pads, present, on) = match side {
            Side::Left => (
                left,
                &lm,
                &rm,
                op.keeps_dangling_left(),
                op.pads_left(),
                op.outputs_left(),
                &spec.left_on,
            ),
            Side::Right => (
                right,
                &rm,
                &lm,
                op.keeps_dangling_right(),
                op.pads_right(),
                op.outputs_right(),
                &spec.right_on,
            ),
        };
        let kept: Vec<bool> = own.iter().map(|&m| m || keeps_dangling).collect();
        let padded = pads && other.iter().any(|&m| !m);
        let rows: Vec<usize> = (0..inst.row_count()).filter(|&r| kept[r]).collect();
        let null_key_row = rows.iter().any(|&r| all_null(inst, r, on));
        let mut instance = inst.select_rows(&rows);
        if padded {
            instance = instance.with_null_row();
        }
        SideView {
            side,
            rows_filtered: inst.row_count() - rows.len(),
            instance,
            kept,
            padded,
            null_key_row,
            present,
        }
    }

    /// The view differs from the input as a set of tuples.
    pub fn changed(&self) -> bool {
        self.rows_filtered > 0 || self.padded
    }
}

/// Dependencies supplied by the caller for one input.
#[derive(Clone, Debug, Default)]
pub struct ProvidedFds {
    /// Expected to list every minimal exact dependency of the input.
    pub exact: FdSet,
    pub afds: Vec<Afd>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpstageStats {
    pub rows_filtered: usize,
    pub padded: bool,
    pub afds_checked: usize,
    pub afds_promoted: usize,
    pub candidates_checked: usize,
}

/// Stage outcome for one side, over that side's own attribute ordinals.
#[derive(Clone, Debug, Default)]
pub struct SideOutcome {
    /// The input's dependencies as used by the pipeline.
    pub sigma: FdSet,
    pub preserved: FdSet,
    pub upstaged: FdSet,
    /// Input dependencies broken by null padding.
    pub violated: FdSet,
    pub stats: UpstageStats,
}

impl SideOutcome {
    /// Everything known to hold on the side view.
    pub fn known(&self) -> FdSet {
        self.preserved.union(&self.upstaged)
    }
}

#[derive(Clone, Debug, Default)]
pub struct UpstageResult {
    pub left: SideOutcome,
    pub right: SideOutcome,
}

impl UpstageResult {
    pub fn left_upstaged(&self) -> &FdSet {
        &self.left.upstaged
    }

    pub fn right_upstaged(&self) -> &FdSet {
        &self.right.upstaged
    }
}

/// Stage 1 for both sides. Without provided dependencies they are discovered
/// on the inputs, approximate ones only when `epsilon > 0`.
pub fn upstage(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    left_fds: Option<&ProvidedFds>,
    right_fds: Option<&ProvidedFds>,
    epsilon: f64,
) -> Result<UpstageResult> {
    spec.validate(left, right)?;
    let lv = SideView::build(left, right, spec, Side::Left);
    let rv = SideView::build(left, right, spec, Side::Right);
    Ok(UpstageResult {
        left: upstage_side(left, &lv, left_fds, epsilon)?,
        right: upstage_side(right, &rv, right_fds, epsilon)?,
    })
}

pub(crate) fn upstage_side(
    input: &Instance,
    view: &SideView,
    provided: Option<&ProvidedFds>,
    epsilon: f64,
) -> Result<SideOutcome> {
    if !view.present {
        return Ok(SideOutcome::default());
    }
    let (sigma, afds) = match provided {
        Some(p) => {
            check_provided(input, p)?;
            (p.exact.clone(), p.afds.clone())
        }
        None => discover_fds(input, epsilon)?,
    };
    let side = view.side;
    let mut cache = PartitionCache::new(&view.instance);
    let mut preserved = FdSet::new();
    let mut violated = FdSet::new();
    for fd in sigma.iter() {
        if cache.holds(fd) {
            preserved.insert_tagged(*fd, Some(side.preserved()));
        } else {
            violated.insert(*fd);
        }
    }
    let mut stats = UpstageStats {
        rows_filtered: view.rows_filtered,
        padded: view.padded,
        ..UpstageStats::default()
    };
    let mut upstaged = FdSet::new();
    if view.changed() {
        for afd in &afds {
            stats.afds_checked += 1;
            if promotable(input, view, afd)? && cache.holds(&afd.fd) {
                upstaged.insert_tagged(afd.fd, Some(side.upstaged()));
                stats.afds_promoted += 1;
            }
        }
        upstaged = upstaged.without_redundant();
        let known = preserved.union(&upstaged);
        let (found, checked) = search_new(&mut cache, &known);
        stats.candidates_checked = checked;
        upstaged.extend(&found.retagged(Some(side.upstaged())));
    }
    Ok(SideOutcome {
        sigma,
        preserved,
        upstaged,
        violated,
        stats,
    })
}

fn check_provided(input: &Instance, p: &ProvidedFds) -> Result<()> {
    let mut cache = PartitionCache::new(input);
    for fd in p.exact.iter() {
        input.check_attrs(fd.attrs())?;
        if !cache.holds(fd) {
            return Err(Error::Contract(format!(
                "supplied dependency {} does not hold on {}",
                fd.display(&input.attr_names()),
                input.name()
            )));
        }
    }
    for a in &p.afds {
        input.check_attrs(a.fd.attrs())?;
    }
    Ok(())
}

/// An approximate dependency whose violating rows all fail to survive.
fn promotable(input: &Instance, view: &SideView, afd: &Afd) -> Result<bool> {
    let v = violating_tuples(input, &afd.fd)?;
    Ok(!v.tuple_ids.is_empty() && v.tuple_ids.iter().all(|&t| !view.kept[t]))
}

/// Minimal dependencies of the cached instance not implied by `known`.
/// Returns them with the number of candidates validated.
fn search_new(cache: &mut PartitionCache<'_>, known: &FdSet) -> (FdSet, usize) {
    let all = cache.instance().all_attrs();
    let mut k = known.clone();
    let mut found = FdSet::new();
    let mut checked = 0;
    for rhs in all.iter() {
        let hits = minimal_sets(all.without(rhs), |lhs| {
            let fd = FunctionalDependency::new(lhs, rhs);
            if k.implies(&fd) {
                return Verdict::Skip;
            }
            checked += 1;
            if cache.holds(&fd) {
                k.insert(fd);
                Verdict::Emit
            } else {
                Verdict::Extend
            }
        });
        for lhs in hits {
            found.insert(FunctionalDependency::new(lhs, rhs));
        }
    }
    (found, checked)
}

/// New minimal dependencies of `i` once it is semi-filtered by the join
/// values of `j`, pruning every candidate implied by `known` (the exact
/// dependencies of `i`) or by earlier output.
pub fn upstaged_fds(
    i: &Instance,
    j: &Instance,
    x: &[AttrId],
    y: &[AttrId],
    known: &FdSet,
) -> Result<FdSet> {
    let spec = JoinSpec::new(JoinOperator::Inner, x.to_vec(), y.to_vec());
    spec.validate(i, j)?;
    let view = SideView::build(i, j, &spec, Side::Left);
    if !view.changed() {
        return Ok(FdSet::new());
    }
    let mut cache = PartitionCache::new(&view.instance);
    Ok(search_new(&mut cache, known).0)
}

/// Approximate dependencies of `i` whose violating rows all lack a partner
/// in `j`, with mutually implied members removed.
pub fn upstaged_afds(
    i: &Instance,
    j: &Instance,
    x: &[AttrId],
    y: &[AttrId],
    afds: &[Afd],
) -> Result<FdSet> {
    let spec = JoinSpec::new(JoinOperator::Inner, x.to_vec(), y.to_vec());
    spec.validate(i, j)?;
    let view = SideView::build(i, j, &spec, Side::Left);
    let mut out = FdSet::new();
    for afd in afds {
        if promotable(i, &view, afd)? {
            out.insert(afd.fd);
        }
    }
    Ok(out.without_redundant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::discover_fds;

    fn a(i: usize) -> AttrId {
        AttrId::new(i)
    }

    fn fd(lhs: &[usize], rhs: usize) -> FunctionalDependency {
        FunctionalDependency::new(lhs.iter().map(|&i| a(i)).collect(), a(rhs))
    }

    /// Patients with a flag that determines a date except for one patient
    /// whose admission is missing from the other table.
    fn patients() -> (Instance, Instance) {
        let p = Instance::from_strs(
            "P",
            &["id", "flag", "dod"],
            &[
                &["1", "y", "d1"],
                &["2", "y", "d1"],
                &["3", "y", "d1"],
                &["4", "n", "d2"],
                &["5", "y", "d9"],
            ],
        )
        .unwrap();
        let adm = Instance::from_strs(
            "A",
            &["pid", "ward"],
            &[&["1", "w1"], &["2", "w1"], &["3", "w2"], &["4", "w2"]],
        )
        .unwrap();
        (p, adm)
    }

    #[test]
    fn dangling_violator_promotes_afd() {
        let (p, adm) = patients();
        let (exact, afds) = discover_fds(&p, 0.2).unwrap();
        let flag_dod = fd(&[1], 2);
        assert!(afds.iter().any(|x| x.fd == flag_dod && x.degree == 1));
        let promoted = upstaged_afds(&p, &adm, &[a(0)], &[a(0)], &afds).unwrap();
        assert!(promoted.contains(&flag_dod));
        let found = upstaged_fds(&p, &adm, &[a(0)], &[a(0)], &exact).unwrap();
        assert!(found.contains(&flag_dod));
        assert!(found.iter().all(|f| !exact.implies(f)));
    }

    #[test]
    fn surviving_violator_blocks_promotion() {
        let (p, _) = patients();
        let adm = Instance::from_strs("A", &["pid"], &[&["1"], &["5"], &["4"]]).unwrap();
        let (_, afds) = discover_fds(&p, 0.2).unwrap();
        let promoted = upstaged_afds(&p, &adm, &[a(0)], &[a(0)], &afds).unwrap();
        assert!(!promoted.contains(&fd(&[1], 2)));
    }

    #[test]
    fn no_filtering_means_nothing_upstaged() {
        let (p, _) = patients();
        let all = Instance::from_strs("A", &["pid"], &[&["1"], &["2"], &["3"], &["4"], &["5"]])
            .unwrap();
        let (exact, afds) = discover_fds(&p, 0.2).unwrap();
        assert!(upstaged_fds(&p, &all, &[a(0)], &[a(0)], &exact).unwrap().is_empty());
        let spec = JoinSpec::new(JoinOperator::Inner, vec![a(0)], vec![a(0)]);
        let provided = ProvidedFds { exact, afds };
        let r = upstage(&p, &all, &spec, Some(&provided), None, 0.0).unwrap();
        assert!(r.left_upstaged().is_empty());
        assert!(r.right_upstaged().is_empty());
    }

    #[test]
    fn violated_input_dependency_is_a_contract_error() {
        let (p, adm) = patients();
        let spec = JoinSpec::new(JoinOperator::Inner, vec![a(0)], vec![a(0)]);
        let bad = ProvidedFds {
            exact: [fd(&[1], 2)].into_iter().collect(),
            afds: Vec::new(),
        };
        assert!(matches!(
            upstage(&p, &adm, &spec, Some(&bad), None, 0.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn padding_breaks_constant_columns() {
        let l = Instance::from_strs("L", &["k", "c"], &[&["1", "z"], &["2", "z"]]).unwrap();
        let r = Instance::from_strs("R", &["k"], &[&["1"], &["3"]]).unwrap();
        let spec = JoinSpec::new(JoinOperator::FullOuter, vec![a(0)], vec![a(0)]);
        let res = upstage(&l, &r, &spec, None, None, 0.0).unwrap();
        assert!(res.left.violated.contains(&fd(&[], 1)));
        assert!(res.left.upstaged.contains(&fd(&[0], 1)));
    }
}
