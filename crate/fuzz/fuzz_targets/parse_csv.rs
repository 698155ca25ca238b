#![no_main]

use libfuzzer_sys::fuzz_target;
use stablekit::io::parse_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for expected in [None, Some(1), Some(2)] {
        if let Ok(m) = parse_csv(text, expected) {
            assert!(m.nrows() > 0 && m.ncols() > 0);
            assert!(m.iter().all(|v| v.is_finite()));
            if let Some(d) = expected {
                assert_eq!(m.ncols(), d);
            }
        }
    }
});
