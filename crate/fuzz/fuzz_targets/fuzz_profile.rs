//! Fixture profiles never panic when parsed, print back to an equal
//! profile, and small accepted profiles build.

#![no_main]

use joinfd::fixture::{make_fixture, FixtureProfile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(p) = FixtureProfile::parse(text) else {
        return;
    };
    let again = FixtureProfile::parse(&p.to_string()).expect("printed profiles parse");
    assert_eq!(again.to_string(), p.to_string());
    let small = p.rows_left <= 64 && p.rows_right <= 64 && p.attrs_left <= 8 && p.attrs_right <= 8;
    if small && p.check().is_ok() {
        let f = make_fixture(&p, 0).expect("checked profiles build");
        assert_eq!(f.left.row_count(), p.rows_left);
    }
});
