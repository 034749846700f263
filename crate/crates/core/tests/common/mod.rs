//! Brute-force references and random instance generators shared by the
//! integration tests.

#![allow(dead_code)]

use joinfd::{AttrId, AttrSet, FdSet, FunctionalDependency, Instance, JoinOperator, JoinSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every pair of rows agreeing on `lhs` agrees on `rhs`, by pairwise scan.
pub fn brute_holds(inst: &Instance, lhs: AttrSet, rhs: AttrId) -> bool {
    let n = inst.row_count();
    for i in 0..n {
        for j in i + 1..n {
            let agree = lhs.iter().all(|a| inst.codes(a)[i] == inst.codes(a)[j]);
            if agree && inst.codes(rhs)[i] != inst.codes(rhs)[j] {
                return false;
            }
        }
    }
    true
}

/// All minimal non-trivial dependencies, by enumerating every lhs.
pub fn brute_fds(inst: &Instance) -> FdSet {
    let k = inst.arity();
    let mut out = FdSet::new();
    for b in 0..k {
        let rhs = AttrId::new(b);
        let mut holding: Vec<AttrSet> = Vec::new();
        let mut lhs_sets: Vec<AttrSet> = (0u32..1 << k)
            .map(|m| (0..k).filter(|i| m >> i & 1 == 1).map(AttrId::new).collect::<AttrSet>())
            .filter(|s| !s.contains(rhs))
            .collect();
        lhs_sets.sort();
        for s in lhs_sets {
            if holding.iter().any(|h| h.is_subset(s)) {
                continue;
            }
            if brute_holds(inst, s, rhs) {
                holding.push(s);
                out.insert(FunctionalDependency::new(s, rhs));
            }
        }
    }
    out
}

/// Nested-loop join reference returning value rows, sorted.
pub fn brute_join_rows(
    l: &Instance,
    r: &Instance,
    spec: &JoinSpec,
) -> Vec<Vec<Option<String>>> {
    let lrows = l.to_rows();
    let rrows = r.to_rows();
    let lk = |row: &Vec<Option<String>>| spec.left_on.iter().map(|a| row[a.index()].clone()).collect::<Vec<_>>();
    let rk = |row: &Vec<Option<String>>| spec.right_on.iter().map(|a| row[a.index()].clone()).collect::<Vec<_>>();
    let mut out = Vec::new();
    let mut rmatched = vec![false; rrows.len()];
    for lr in &lrows {
        let mut matched = false;
        for (j, rr) in rrows.iter().enumerate() {
            if lk(lr) == rk(rr) {
                matched = true;
                rmatched[j] = true;
                let mut row = lr.clone();
                row.extend(rr.iter().cloned());
                out.push(row);
            }
        }
        if !matched && spec.op.keeps_dangling_left() {
            let mut row = lr.clone();
            row.extend(std::iter::repeat_n(None, r.arity()));
            out.push(row);
        }
    }
    if spec.op.keeps_dangling_right() {
        for (j, rr) in rrows.iter().enumerate() {
            if !rmatched[j] {
                let mut row: Vec<Option<String>> = vec![None; l.arity()];
                row.extend(rr.iter().cloned());
                out.push(row);
            }
        }
    }
    match spec.op {
        JoinOperator::LeftSemi => {
            out = lrows.into_iter().filter(|lr| rrows.iter().any(|rr| lk(lr) == rk(rr))).collect();
            out.sort();
            out.dedup();
        }
        JoinOperator::RightSemi => {
            out = rrows.into_iter().filter(|rr| lrows.iter().any(|lr| lk(lr) == rk(rr))).collect();
            out.sort();
            out.dedup();
        }
        _ => out.sort(),
    }
    out
}

/// A random table over a small domain. Column 0 is the join column.
pub fn random_table(
    rng: &mut ChaCha8Rng,
    name: &str,
    arity: usize,
    rows: usize,
    keys: &[String],
    null_rate: f64,
) -> Instance {
    let names: Vec<String> = (0..arity).map(|i| format!("{}{}", name.to_lowercase(), i)).collect();
    let domain = rng.random_range(2..=4);
    let data: Vec<Vec<Option<String>>> = (0..rows)
        .map(|_| {
            (0..arity)
                .map(|c| {
                    if rng.random_bool(null_rate) {
                        None
                    } else if c == 0 {
                        Some(keys[rng.random_range(0..keys.len())].clone())
                    } else {
                        Some(rng.random_range(0..domain).to_string())
                    }
                })
                .collect()
        })
        .collect();
    Instance::from_rows(name, &names, &data).unwrap()
}

/// Random pair joined on their first columns. With dangling fraction `d`,
/// about that share of each side's key values has no partner.
pub fn random_pair(seed: u64, dangling: f64, op: JoinOperator) -> (Instance, Instance, JoinSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared_n = rng.random_range(2..=6);
    let shared: Vec<String> = (0..shared_n).map(|i| format!("k{i}")).collect();
    let own = |rng: &mut ChaCha8Rng, tag: &str| -> Vec<String> {
        let mut keys = shared.clone();
        if dangling > 0.0 {
            let extra = ((shared_n as f64) * dangling / (1.0 - dangling)).ceil() as usize;
            keys.extend((0..extra.max(1)).map(|i| format!("{tag}{i}")));
        }
        let _ = rng;
        keys
    };
    let lkeys = own(&mut rng, "l");
    let rkeys = own(&mut rng, "r");
    let null_rate = if rng.random_bool(0.25) { 0.1 } else { 0.0 };
    let la = rng.random_range(2..=5);
    let ra = rng.random_range(2..=5);
    let ln = rng.random_range(5..=30);
    let rn = rng.random_range(5..=30);
    let l = random_table(&mut rng, "L", la, ln, &lkeys, null_rate);
    let r = random_table(&mut rng, "R", ra, rn, &rkeys, null_rate);
    let spec = JoinSpec::new(op, vec![AttrId::new(0)], vec![AttrId::new(0)]);
    (l, r, spec)
}
