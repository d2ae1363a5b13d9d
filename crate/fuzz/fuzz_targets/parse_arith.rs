#![no_main]

use std::fmt::Debug;

use glkit::arith::{parse_arith, parse_term, print_arith, print_term, ArithError, ArithFormat};
use libfuzzer_sys::fuzz_target;

// Large literals expand to numerals whose printed form can exceed the
// nesting limit; anything else must read back unchanged.
fn reparses<T: PartialEq + Debug>(printed: &str, back: Result<T, ArithError>, original: &T) {
    match back {
        Ok(t) => assert_eq!(&t, original, "{printed}"),
        Err(e) => assert!(e.to_string().contains("nested too deeply"), "{printed}: {e}"),
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_arith(text) {
        let printed = print_arith(&f, ArithFormat::Ascii);
        reparses(&printed, parse_arith(&printed), &f);
        let _ = print_arith(&f, ArithFormat::Latex);
    }
    if let Ok(t) = parse_term(text) {
        let printed = print_term(&t, ArithFormat::Ascii);
        reparses(&printed, parse_term(&printed), &t);
    }
});
