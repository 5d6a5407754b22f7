#![no_main]

use libfuzzer_sys::fuzz_target;
use reglue_kit::config::{parse_scan_line, scan_line};

fuzz_target!(|line: &str| {
    if let Ok(cell) = parse_scan_line(line) {
        // Accepted records survive a round trip.
        let again = parse_scan_line(&scan_line(&cell)).expect("re-encoded record parses");
        assert_eq!(again.index, cell.index);
    }
});
