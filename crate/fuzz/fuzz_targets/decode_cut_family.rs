#![no_main]

use libfuzzer_sys::fuzz_target;
use reglue_kit::cuts::decode_cut_family;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = decode_cut_family(text);
    }
});
