//! Ground truth by brute force: materialize the join and mine it.

use crate::error::{Error, Result};
use crate::fd::FdSet;
use crate::join::{join, join_row_count, JoinSpec};
use crate::lattice::discover_exact;
use crate::relation::Instance;

/// Largest join the oracle materializes unless told otherwise.
pub const DEFAULT_ROW_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, Default)]
pub struct OracleOutcome {
    /// Minimal cover of the dependencies of the join, over its ordinals.
    pub fds: FdSet,
    pub join_rows: u64,
    /// The join is empty, so every dependency holds and none is listed.
    pub vacuous: bool,
}

/// Dependencies of `left ◇ right`, refusing joins above `row_limit` rows.
pub fn oracle_join_fds(
    left: &Instance,
    right: &Instance,
    spec: &JoinSpec,
    row_limit: u64,
) -> Result<OracleOutcome> {
    let rows = join_row_count(left, right, spec)?;
    if rows > row_limit {
        return Err(Error::RowLimit {
            rows,
            limit: row_limit,
        });
    }
    if rows == 0 {
        return Ok(OracleOutcome {
            vacuous: true,
            ..OracleOutcome::default()
        });
    }
    let joined = join(left, right, spec)?;
    Ok(OracleOutcome {
        fds: discover_exact(&joined).minimal_cover(),
        join_rows: joined.row_count() as u64,
        vacuous: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attrs::AttrId;
    use crate::fd::FunctionalDependency;
    use crate::join::JoinOperator;

    fn proof_tables() -> (Instance, Instance) {
        let l = Instance::from_strs(
            "L",
            &["X", "A"],
            &[&["0", "0"], &["1", "0"], &["1", "1"], &["2", "2"]],
        )
        .unwrap();
        let r = Instance::from_strs(
            "R",
            &["Y", "A'", "b"],
            &[&["0", "0", "0"], &["1", "0", "0"], &["1", "1", "1"], &["2", "1", "0"]],
        )
        .unwrap();
        (l, r)
    }

    #[test]
    fn proof_tables_yield_cross_table_dependency() {
        let (l, r) = proof_tables();
        let spec = JoinSpec::new(JoinOperator::Inner, vec![AttrId::new(0)], vec![AttrId::new(0)]);
        let out = oracle_join_fds(&l, &r, &spec, DEFAULT_ROW_LIMIT).unwrap();
        assert_eq!(out.join_rows, 6);
        let target = FunctionalDependency::new(
            [AttrId::new(1), AttrId::new(3)].into_iter().collect(),
            AttrId::new(4),
        );
        assert!(out.fds.implies(&target));
    }

    #[test]
    fn guard_and_empty_join() {
        let (l, r) = proof_tables();
        let spec = JoinSpec::new(JoinOperator::Inner, vec![AttrId::new(0)], vec![AttrId::new(0)]);
        assert!(matches!(
            oracle_join_fds(&l, &r, &spec, 5),
            Err(Error::RowLimit { rows: 6, limit: 5 })
        ));
        let empty = r.select_rows(&[]);
        let out = oracle_join_fds(&l, &empty, &spec, DEFAULT_ROW_LIMIT).unwrap();
        assert!(out.vacuous && out.fds.is_empty());
    }
}
