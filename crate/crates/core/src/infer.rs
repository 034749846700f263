//! Join dependencies with a one-sided lhs, obtained by transitivity through
//! the join attributes and then minimized on partial joins.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::attrs::{AttrId, AttrSet};
use crate::error::Result;
use crate::fd::{FdSet, FunctionalDependency, Origin};
use crate::context::JoinContext;
use crate::lattice::{minimal_sets, Verdict};
use crate::upstage::Side;

/// One transitivity step `A → X`, `X = Y`, `Y → b`, over side ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferredRule {
    /// `A`, over the ordinals of the side holding `X`.
    pub lhs: AttrSet,
    /// `b`, over the ordinals of the side holding `Y`.
    pub rhs: AttrId,
}

/// Minimal `A ⊆ universe` with `X ⊆ closure(A, Σ)`, combined with every
/// `b ∈ closure(Y, Σ′) ∖ Y`.
pub fn infer(
    x: &[AttrId],
    y: &[AttrId],
    sigma: &FdSet,
    sigma_prime: &FdSet,
    universe: AttrSet,
) -> Vec<InferredRule> {
    let xs: AttrSet = x.iter().collect();
    let ys: AttrSet = y.iter().collect();
    let rhs = sigma_prime.closure(ys).difference(ys);
    if rhs.is_empty() || sigma.is_empty() {
        return Vec::new();
    }
    // Only attributes occurring in some lhs can contribute to a closure.
    let useful: AttrSet = sigma
        .iter()
        .fold(AttrSet::EMPTY, |acc, fd| acc.union(fd.lhs));
    let universe = universe.difference(xs).intersection(useful);
    let lhs_sets = minimal_sets(universe, |a| {
        if xs.is_subset(sigma.closure(a)) {
            Verdict::Emit
        } else {
            Verdict::Extend
        }
    });
    let mut out = Vec::new();
    for a in lhs_sets {
        for b in rhs.iter() {
            out.push(InferredRule { lhs: a, rhs: b });
        }
    }
    out
}

/// The pair of rules an inferred dependency came from, by attribute name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub determinant: Vec<String>,
    pub join_attrs: Vec<String>,
    pub bridge: Vec<String>,
    pub rhs: String,
}

#[derive(Clone, Debug, Default)]
pub struct InferredFdSet {
    /// Over combined ordinals, tagged `inferred` or `refined`.
    pub fds: FdSet,
    pub provenance: BTreeMap<FunctionalDependency, Provenance>,
    /// Inferred dependencies rejected by validation.
    pub rejected: usize,
}

/// Both inference directions followed by refinement.
pub fn infer_join_fds(ctx: &mut JoinContext<'_>, known: &FdSet) -> Result<InferredFdSet> {
    let nl = ctx.nl();
    let mut candidates: Vec<(FunctionalDependency, bool, Provenance)> = Vec::new();
    let names: Vec<String> = ctx
        .left
        .attr_names()
        .into_iter()
        .chain(ctx.right.attr_names())
        .map(str::to_owned)
        .collect();
    let named = |s: AttrSet| s.iter().map(|a| names[a.index()].clone()).collect::<Vec<_>>();
    for side in [Side::Left, Side::Right] {
        let (x, y, sigma, sigma_p) = match side {
            Side::Left => (
                &ctx.spec.left_on,
                &ctx.spec.right_on,
                &ctx.left_known,
                &ctx.right_known,
            ),
            Side::Right => (
                &ctx.spec.right_on,
                &ctx.spec.left_on,
                &ctx.right_known,
                &ctx.left_known,
            ),
        };
        let universe = match side {
            Side::Left => AttrSet::prefix(ctx.left.arity()),
            Side::Right => AttrSet::prefix(ctx.right.arity()),
        };
        // Transitivity is only sound when the lhs side carries no padding.
        let sound = !ctx.view(side).padded;
        for rule in infer(x, y, sigma, sigma_p, universe) {
            let (lhs, rhs) = match side {
                Side::Left => (rule.lhs, AttrId::new(rule.rhs.index() + nl)),
                Side::Right => (rule.lhs.shifted(nl), rule.rhs),
            };
            let fd = FunctionalDependency::new(lhs, rhs);
            let prov = Provenance {
                determinant: named(lhs),
                join_attrs: named(ctx.join_attrs(side)),
                bridge: named(ctx.join_attrs(side.other())),
                rhs: names[rhs.index()].clone(),
            };
            candidates.push((fd, sound, prov));
        }
    }
    refine(ctx, known, candidates)
}

/// Replaces each inferred `A → b` by the holding subsets of `A` of the
/// smallest size, tested bottom-up on `π_{X∪A}(L) ◇ π_{Y∪b}(R)`. Candidates
/// not known to be sound are validated first.
pub fn refine(
    ctx: &mut JoinContext<'_>,
    known: &FdSet,
    candidates: Vec<(FunctionalDependency, bool, Provenance)>,
) -> Result<InferredFdSet> {
    let mut k = known.clone();
    let mut out = InferredFdSet::default();
    for (fd, sound, prov) in candidates {
        if k.implies(&fd) {
            continue;
        }
        if !sound && !ctx.validate(&fd)? {
            out.rejected += 1;
            continue;
        }
        let mut found = Vec::new();
        for size in 0..fd.lhs.len() {
            for sub in fd.lhs.subsets_of_size(size) {
                let cand = FunctionalDependency::new(sub, fd.rhs);
                if ctx.validate(&cand)? {
                    found.push(cand);
                }
            }
            if !found.is_empty() {
                break;
            }
        }
        if found.is_empty() {
            out.fds.insert_tagged(fd, Some(Origin::Inferred));
            out.provenance.insert(fd, prov);
            k.insert(fd);
        } else {
            for f in found {
                out.fds.insert_tagged(f, Some(Origin::Refined));
                out.provenance.insert(f, prov.clone());
                k.insert(f);
            }
        }
    }
    Ok(out)
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

    #[test]
    fn single_transitivity() {
        // Σ = {A → X} with A = 1, X = 0; Σ′ = {Y → b} with Y = 0, b = 1.
        let s: FdSet = [fd(&[1], 0)].into_iter().collect();
        let sp: FdSet = [fd(&[0], 1)].into_iter().collect();
        let rules = infer(&[a(0)], &[a(0)], &s, &sp, set(&[0, 1]));
        assert_eq!(rules, vec![InferredRule { lhs: set(&[1]), rhs: a(1) }]);
        assert!(infer(&[a(0)], &[a(0)], &s, &FdSet::new(), set(&[0, 1])).is_empty());
    }

    #[test]
    fn composite_determination_through_closure() {
        // A = 2 determines c = 1, and c determines X = 0.
        let s: FdSet = [fd(&[2], 1), fd(&[1], 0)].into_iter().collect();
        let sp: FdSet = [fd(&[0], 1)].into_iter().collect();
        let rules = infer(&[a(0)], &[a(0)], &s, &sp, set(&[0, 1, 2]));
        let lhs: Vec<AttrSet> = rules.iter().map(|r| r.lhs).collect();
        assert_eq!(lhs, vec![set(&[1]), set(&[2])]);
    }

    #[test]
    fn no_rule_into_join_attributes_infers_nothing() {
        let s = FdSet::new();
        let sp: FdSet = [fd(&[0, 1], 2), fd(&[0, 2], 1)].into_iter().collect();
        assert!(infer(&[a(0)], &[a(0)], &s, &sp, set(&[0, 1])).is_empty());
    }
}
