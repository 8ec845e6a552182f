#![no_main]

use libfuzzer_sys::fuzz_target;
use sectorcoint::ingest::{format_csv, parse_csv_str};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = parse_csv_str(text, "x", "date", "value") {
        assert!(!s.is_empty());
        let again = parse_csv_str(&format_csv(&s), "x", "date", "value").expect("formatted series parses");
        assert_eq!(again.values().len(), s.values().len());
    }
});
