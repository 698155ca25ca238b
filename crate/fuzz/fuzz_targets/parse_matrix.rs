#![no_main]

use libfuzzer_sys::fuzz_target;
use stablekit::io::parse_matrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix(text) {
        assert_eq!(m.nrows(), text.split(';').count());
        assert!(m.iter().all(|x| x.is_finite()));
    }
});
