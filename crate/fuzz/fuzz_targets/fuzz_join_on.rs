//! Join conditions never panic; an accepted condition yields a join whose
//! size matches the counted size.

#![no_main]

use joinfd::fixture::proof_tables;
use joinfd::join::join_row_count;
use joinfd::{join, JoinOperator, JoinSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&op, rest)) = data.split_first() else {
        return;
    };
    let Ok(on) = std::str::from_utf8(rest) else {
        return;
    };
    let op = JoinOperator::ALL[op as usize % JoinOperator::ALL.len()];
    if let Ok(other) = on.parse::<JoinOperator>() {
        let _ = other.as_str();
    }
    let (l, r) = proof_tables();
    let Ok(spec) = JoinSpec::parse_on(op, &l, &r, on) else {
        return;
    };
    let j = join(&l, &r, &spec).expect("accepted specs join");
    assert_eq!(join_row_count(&l, &r, &spec).unwrap(), j.row_count() as u64);
});
