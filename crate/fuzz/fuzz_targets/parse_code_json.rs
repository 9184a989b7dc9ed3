#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::codecraft::Code;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(code) = Code::from_json(text) {
            // decoding any assigned word must return a state of the code
            for words in code.codeword_sets() {
                for word in words {
                    let state = code.decode(word).expect("assigned words decode");
                    assert!(code.states().contains(state));
                }
            }
            // validation must terminate without panicking on small domains
            if code.shape().total_bits() <= 12 {
                let _ = code.validate();
            }
        }
    }
});
