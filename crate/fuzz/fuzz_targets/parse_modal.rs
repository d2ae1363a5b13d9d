#![no_main]

use glkit::{parse_modal, print_modal, ModalFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(phi) = parse_modal(text) {
        // whatever parses must survive a print/parse cycle
        for format in [ModalFormat::Ascii, ModalFormat::Unicode] {
            let printed = print_modal(&phi, format);
            assert_eq!(parse_modal(&printed).as_ref(), Ok(&phi), "{printed}");
        }
    }
});
