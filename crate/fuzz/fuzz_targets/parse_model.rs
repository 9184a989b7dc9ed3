#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::blockmodel::MemoryModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(model) = text.parse::<MemoryModel>() {
            let again: MemoryModel = model.to_string().parse().unwrap();
            assert_eq!(model, again);
        }
    }
});
