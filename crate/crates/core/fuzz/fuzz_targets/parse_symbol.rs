#![no_main]

use libfuzzer_sys::fuzz_target;
use toeplab::SymbolSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sym) = SymbolSpec::parse_record(text) {
        // Printing and reparsing must be lossless.
        let again = SymbolSpec::parse_record(&sym.to_record()).expect("printed record reparses");
        assert_eq!(again, sym);
    }
});
