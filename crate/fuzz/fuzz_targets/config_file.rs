#![no_main]

use beepsim::config::ConfigFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ConfigFile::parse(text) else { return };
    if let Ok(exp) = cfg.experiment() {
        exp.validate().expect("experiment() returns validated configs");
    }
});
