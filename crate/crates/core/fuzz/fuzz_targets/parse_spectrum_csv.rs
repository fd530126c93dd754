#![no_main]

use libfuzzer_sys::fuzz_target;
use toeplab::spectra::parse_spectrum_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(eigs) = parse_spectrum_csv(data) {
        assert!(eigs.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }
});
