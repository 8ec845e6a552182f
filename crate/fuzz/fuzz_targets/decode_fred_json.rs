#![no_main]

use libfuzzer_sys::fuzz_target;
use sectorcoint::ingest::decode_fred_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(body) = std::str::from_utf8(data) {
        if let Ok(s) = decode_fred_json(body, "CPIAUCSL") {
            assert!(s.values().iter().all(|v| v.is_finite()));
        }
    }
});
