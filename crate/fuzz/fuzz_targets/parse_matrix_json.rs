#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::semilinear::BasisMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(matrix) = BasisMatrix::from_json(text) {
            let zero = matrix.encode_set(&[]).expect("empty set always encodes");
            assert_eq!(zero.weight(), 0);
            assert_eq!(matrix.encode_set(&[0]).unwrap(), *matrix.column(0));
            // keep per-input work bounded; the budget guard handles the rest
            if matrix.verify_work().map(|w| w <= 1 << 16).unwrap_or(false) {
                let _ = matrix.verify();
            }
        }
    }
});
