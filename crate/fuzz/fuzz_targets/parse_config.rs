#![no_main]

use libfuzzer_sys::fuzz_target;
use reglue_kit::config::{parse_config, Command, JobConfig};

fuzz_target!(|text: &str| {
    if let Ok(pairs) = parse_config(text) {
        let _ = JobConfig::from_pairs(Command::Scan, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    }
});
