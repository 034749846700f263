//! CSV decoding never panics, and a decoded table survives a write and
//! re-read unchanged.

#![no_main]

use joinfd::{parse_csv, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let opts = CsvOptions::default();
    let Ok(t) = parse_csv("T", data, &opts) else {
        return;
    };
    let text = t.to_csv_string(b',').expect("decoded tables are writable");
    let back = parse_csv("T", text.as_bytes(), &opts).expect("written tables are readable");
    assert_eq!(back.attr_names(), t.attr_names());
    assert_eq!(back.to_rows(), t.to_rows());
});
