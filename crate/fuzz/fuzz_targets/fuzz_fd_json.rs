//! Dependency-record JSON never panics, and resolving records against a
//! table either fails cleanly or yields dependencies over its attributes.

#![no_main]

use joinfd::fd::{parse_fd_records, resolve_records};
use joinfd::fixture::proof_tables;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_fd_records(text) else {
        return;
    };
    let (_, r) = proof_tables();
    if let Ok((exact, afds)) = resolve_records(&records, &r) {
        let all = r.all_attrs();
        assert!(exact.iter().all(|f| f.attrs().is_subset(all)));
        assert!(afds.iter().all(|a| a.fd.attrs().is_subset(all)));
    }
});
