#![no_main]

use libfuzzer_sys::fuzz_target;
use stablekit::io::{parse_list, parse_vector};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let list = parse_list(text);
    if let Ok(v) = &list {
        assert_eq!(v.len(), text.split(',').count());
        assert!(v.iter().all(|x| x.is_finite()));
    }
    assert_eq!(list.ok(), parse_vector(text).ok().map(|v| v.as_slice().to_vec()));
});
