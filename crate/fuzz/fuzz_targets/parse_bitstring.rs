#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::bitspace::BitString;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(bits) = text.parse::<BitString>() {
            let again: BitString = bits.to_string().parse().unwrap();
            assert_eq!(bits, again);
            assert!(bits.weight() as usize <= bits.len());
        }
    }
});
