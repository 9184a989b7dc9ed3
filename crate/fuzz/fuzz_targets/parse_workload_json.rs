#![no_main]

use libfuzzer_sys::fuzz_target;
use wemlab::flipsim::{run_workload, EncodingKind, WorkloadConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = serde_json::from_str::<WorkloadConfig>(text) {
            if config.validate().is_err() {
                return;
            }
            // execute only desk-scale workloads; the matrix search behind
            // the semilinear encoding is too slow for a fuzz iteration
            let small = config.shape.total_bits() <= 8
                && config.blocks <= 16
                && config.operations <= 64
                && config.encodings.len() <= 2
                && !config.encodings.contains(&EncodingKind::Semilinear);
            if small {
                let _ = run_workload(&config);
            }
        }
    }
});
