#![no_main]

use libfuzzer_sys::fuzz_target;
use toeplab::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        let _ = cfg.check_shape();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).expect("serialized config reparses");
        assert_eq!(again.to_toml(), cfg.to_toml());
    }
});
