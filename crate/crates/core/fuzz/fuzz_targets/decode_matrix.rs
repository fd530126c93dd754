#![no_main]

use libfuzzer_sys::fuzz_target;
use toeplab::quantize::{decode_matrix, encode_matrix};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = decode_matrix(data) {
        // Re-encoding canonicalizes the symbol record; after that it is a fixed point.
        let canonical = encode_matrix(&t);
        let again = decode_matrix(&canonical).expect("canonical encoding decodes");
        assert_eq!(encode_matrix(&again), canonical);
    }
});
