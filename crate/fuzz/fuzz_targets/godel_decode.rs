#![no_main]

use glkit::arith::{godel_decode, godel_encode};
use libfuzzer_sys::fuzz_target;
use num_bigint::BigUint;

fuzz_target!(|data: &[u8]| {
    let n = BigUint::from_bytes_be(data);
    match godel_decode(&n) {
        Ok(bits) => assert_eq!(godel_encode(&bits), n),
        Err(_) => assert_eq!(n, BigUint::from(0u32)),
    }
});
