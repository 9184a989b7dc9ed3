#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::blockmodel::{canonicalize, BlockState, MemoryModel, Scm};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(state) = text.parse::<BlockState>() {
            let again: BlockState = state.to_string().parse().unwrap();
            assert_eq!(state, again);
            let loa = MemoryModel::new(true, false, Scm::None);
            let canonical = canonicalize(&state, loa);
            assert_eq!(canonicalize(&canonical, loa), canonical);
            assert_eq!(canonical.occupied(), state.occupied());
        }
    }
});
