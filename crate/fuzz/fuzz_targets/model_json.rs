#![no_main]

use glkit::emitter::{build_kit, check_invariants};
use glkit::TreeModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = TreeModel::from_json(text) else { return };
    assert_eq!(TreeModel::from_json(&model.to_json()).as_ref(), Ok(&model));
    if model.frame.len() <= 64 {
        let kit = build_kit(&model);
        check_invariants(&kit).unwrap();
    }
});
