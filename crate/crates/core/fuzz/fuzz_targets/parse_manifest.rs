#![no_main]

use libfuzzer_sys::fuzz_target;
use toeplab::harness::Manifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = Manifest::parse(data) {
        let _ = m.artifacts().count();
    }
});
