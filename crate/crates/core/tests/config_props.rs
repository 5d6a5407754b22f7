use std::fs;
use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;
use reglue_kit::classify::{scan_cell, ScanOptions, Window};
use reglue_kit::config::{
    parse_angle, parse_complex, parse_config, parse_pair, parse_scan_line, parse_window, scan_line, Command, JobConfig,
};
use reglue_kit::cuts::decode_cut_family;

proptest! {
    #[test]
    fn complex_literals_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let text = format!("{re}{im:+}i");
        prop_assert_eq!(parse_complex(&text), Some(Complex64::new(re, im)));
        let exp = format!("{re:e}{}{:e}i", if im < 0.0 { "-" } else { "+" }, im.abs());
        prop_assert_eq!(parse_complex(&exp), Some(Complex64::new(re, im)));
    }

    #[test]
    fn windows_round_trip(a in -10.0f64..10.0, w in 0.01f64..10.0, b in -10.0f64..10.0, h in 0.01f64..10.0) {
        let text = format!("[{a},{}]x[{b},{}]", a + w, b + h);
        let win = parse_window(&text).unwrap();
        prop_assert_eq!(win.re, [a, a + w]);
        prop_assert_eq!(win.im, [b, b + h]);
    }

    #[test]
    fn reduced_and_unreduced_angles(p in 0u64..1000, q in 1u64..1000) {
        let a = parse_angle(&format!("{p}/{q}"));
        prop_assert_eq!(a.is_some(), p < q);
    }

    #[test]
    fn text_never_panics(s in "\\PC*") {
        let _ = parse_config(&s);
        let _ = parse_complex(&s);
        let _ = parse_window(&s);
        let _ = parse_angle(&s);
        let _ = parse_pair(&s);
        let _ = parse_scan_line(&s);
        let _ = decode_cut_family(&s);
    }

    #[test]
    fn later_settings_win(r1 in 64usize..512, r2 in 64usize..512) {
        let cfg = JobConfig::from_pairs(Command::Scan, [("res", r1.to_string().as_str()), ("res", r2.to_string().as_str())]).unwrap();
        prop_assert_eq!(cfg.resolution, r2);
    }
}

#[test]
fn scan_records_round_trip() {
    let window = Window::new([-2.2, 0.8], [-1.3, 1.3]).unwrap();
    let opts = ScanOptions { resolution: 64, basin_resolution: 64, ..ScanOptions::default() };
    for index in [0, 427, 2080, 4095] {
        let cell = scan_cell(1, &window, &opts, index);
        let line = scan_line(&cell);
        assert_eq!(parse_scan_line(&line).unwrap(), cell);
        assert_eq!(scan_line(&parse_scan_line(&line).unwrap()), line);
    }
}

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

/// The checked-in fuzz seeds exercise both the accepting and rejecting
/// paths of every decoder.
#[test]
fn fuzz_seeds_decode_as_expected() {
    for (name, bytes) in corpus("parse_config") {
        let text = String::from_utf8(bytes).unwrap();
        let job = parse_config(&text).map_err(|e| e.to_string()).and_then(|pairs| {
            JobConfig::from_pairs(Command::Scan, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(|e| e.to_string())
        });
        let valid = name.starts_with("scan_");
        assert_eq!(job.is_ok(), valid, "{name}: {job:?}");
    }
    for (name, bytes) in corpus("parse_scan_line") {
        let r = parse_scan_line(std::str::from_utf8(&bytes).unwrap().trim_end());
        assert_eq!(r.is_ok(), name != "overflow", "{name}: {r:?}");
    }
    for (name, bytes) in corpus("decode_cut_family") {
        let r = decode_cut_family(std::str::from_utf8(&bytes).unwrap());
        assert_eq!(r.is_ok(), name != "truncated.json", "{name}: {:?}", r.err());
    }
    for (_, bytes) in corpus("parse_values") {
        let s = String::from_utf8(bytes).unwrap();
        let parsed = parse_complex(&s).is_some() as u8
            + parse_window(&s).is_some() as u8
            + parse_angle(&s).is_some() as u8
            + parse_pair(&s).is_some() as u8;
        assert!(parsed >= 1, "{s:?} parses as nothing");
    }
}
