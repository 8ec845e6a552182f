#![no_main]

use std::str::FromStr;

use libfuzzer_sys::fuzz_target;
use sectorcoint::series::MonthIndex;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = MonthIndex::from_str(text) {
            assert_eq!(MonthIndex::from_str(&m.iso()).ok(), Some(m));
            assert_eq!(MonthIndex::from_str(&m.to_string()).ok(), Some(m));
        }
    }
});
