#![no_main]

use libfuzzer_sys::fuzz_target;
use reglue_kit::config::{parse_angle, parse_complex, parse_pair, parse_window};

fuzz_target!(|s: &str| {
    let _ = parse_complex(s);
    let _ = parse_window(s);
    let _ = parse_angle(s);
    let _ = parse_pair(s);
});
