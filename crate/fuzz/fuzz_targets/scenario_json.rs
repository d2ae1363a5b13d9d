#![no_main]

use glkit::scenario::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = serde_json::from_slice::<Scenario>(data) {
        let _ = s.validate();
    }
});
