#![no_main]

use glkit::{check_derivation, Derivation};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = serde_json::from_slice::<Derivation>(data) {
        let _ = check_derivation(&d);
    }
});
