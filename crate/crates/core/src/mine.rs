//! Selective mining of join dependencies whose lhs spans both inputs.
//!
//! For an rhs `b` on one side, a dependency `Z → b` can only hold on the join
//! if `Y ∪ (Z ∩ side) → b` holds on that side's view, `Y` being the side's
//! join attributes. Candidates failing this closure test are never validated.

use serde::Serialize;

use crate::attrs::{AttrId, AttrSet};
use crate::context::JoinContext;
use crate::error::Result;
use crate::fd::{FdSet, FunctionalDependency, Origin};
use crate::lattice::{minimal_sets, Verdict};
use crate::upstage::Side;

/// The rhs attributes worth exploring, each with the anchoring side rule.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MiningFrontier {
    /// Combined ordinals of plausible rhs attributes.
    pub plausible_rhs: Vec<usize>,
    /// Per side, whether the closure test is sound for rhs attributes there.
    pub precheck_left: bool,
    pub precheck_right: bool,
}

/// The closure test is sound unless the side's padding row could be
/// confused with a genuine row that is null on every join attribute.
fn precheck_enabled(ctx: &JoinContext<'_>, side: Side) -> bool {
    let v = ctx.view(side);
    !(v.padded && v.null_key_row)
}

pub fn frontier(ctx: &JoinContext<'_>) -> MiningFrontier {
    let mut out = MiningFrontier {
        precheck_left: precheck_enabled(ctx, Side::Left),
        precheck_right: precheck_enabled(ctx, Side::Right),
        ..MiningFrontier::default()
    };
    for b in AttrSet::prefix(ctx.width()).iter() {
        let side = ctx.side_of(b);
        let enabled = match side {
            Side::Left => out.precheck_left,
            Side::Right => out.precheck_right,
        };
        let rest = ctx.side_attrs(side).without(b).union(ctx.join_attrs(side));
        if !enabled || ctx.side_closure(side, rest).contains(b) {
            out.plausible_rhs.push(b.index());
        }
    }
    out
}

/// Mines the minimal dependencies with an lhs touching the side opposite to
/// the rhs, pruning with everything in `known` (combined ordinals).
pub fn discover_selective(ctx: &mut JoinContext<'_>, known: &FdSet) -> Result<FdSet> {
    let front = frontier(ctx);
    let width = ctx.width();
    let mut k = known.clone();
    let mut mined = FdSet::new();
    for &bi in &front.plausible_rhs {
        let b = AttrId::new(bi);
        let side = ctx.side_of(b);
        let other = side.other();
        let own = ctx.side_attrs(side);
        let other_attrs = ctx.side_attrs(other);
        let anchor = ctx.join_attrs(side);
        let precheck = match side {
            Side::Left => front.precheck_left,
            Side::Right => front.precheck_right,
        };
        let shortcut = precheck && !ctx.view(other).padded;
        let mut failure = None;
        let hits = minimal_sets(AttrSet::prefix(width).without(b), |z| {
            if failure.is_some() {
                return Verdict::Skip;
            }
            let fd = FunctionalDependency::new(z, b);
            if k.implies(&fd) {
                return Verdict::Skip;
            }
            if z.is_disjoint(other_attrs) {
                return Verdict::Extend;
            }
            if precheck && !ctx.side_closure(side, anchor.union(z.intersection(own))).contains(b) {
                return Verdict::Extend;
            }
            if shortcut && ctx.is_side_key(other, z) {
                ctx.counters.key_shortcuts += 1;
                k.insert(fd);
                return Verdict::Emit;
            }
            match ctx.validate(&fd) {
                Ok(true) => {
                    k.insert(fd);
                    Verdict::Emit
                }
                Ok(false) => Verdict::Extend,
                Err(e) => {
                    failure = Some(e);
                    Verdict::Skip
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        for z in hits {
            mined.insert_tagged(FunctionalDependency::new(z, b), Some(Origin::Mined));
        }
    }
    Ok(mined)
}
