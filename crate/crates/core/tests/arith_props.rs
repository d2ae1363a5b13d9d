mod common;

use glkit::arith::{
    eval_closed_term, godel_decode, godel_encode, godel_number, numeral, parse_arith, print_arith, quote, ArithFormat,
    ArithFormula, ArithTerm, BitBudget, BitString,
};
use num_bigint::BigUint;
use proptest::prelude::*;

use common::arith;

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

#[test]
fn godel_boundary_cases() {
    assert_eq!(godel_encode(&bits("01")), BigUint::from(5u32));
    assert_eq!(godel_encode(&bits("")), BigUint::from(1u32));
    for n in [1u64, 2, 3, u32::MAX as u64, u64::MAX] {
        let n = BigUint::from(n);
        assert_eq!(godel_encode(&godel_decode(&n).unwrap()), n);
    }
    assert!(godel_decode(&BigUint::from(0u32)).is_err());
}

#[test]
fn quote_size_bound() {
    for text in ["0=1", "~0=0", "exists x.(Prf(x,[0=1]) & logstar(x) === 1 (mod 2))"] {
        let phi = parse_arith(text).unwrap();
        let printed = print_arith(&phi, ArithFormat::Ascii);
        let literal = quote(&phi).unfold_quotes();
        assert!(literal.size() <= 8 * (8 * printed.len() + 1));
        assert_eq!(literal, numeral(&godel_number(&phi)));
        assert_eq!(eval_closed_term(&literal, BitBudget::default()).unwrap(), godel_number(&phi));
    }
}

#[test]
fn log_star_of_exp_star() {
    for m in 0u32..=5 {
        let t = ArithTerm::log_star(ArithTerm::exp_star(numeral(&m.into())));
        assert_eq!(eval_closed_term(&t, BitBudget::default()).unwrap(), BigUint::from(m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn godel_round_trip(s in proptest::collection::vec(any::<bool>(), 0..=64)) {
        let s = BitString(s);
        let n = godel_encode(&s);
        prop_assert_eq!(n.bits() as usize - 1, s.len());
        prop_assert_eq!(godel_decode(&n).unwrap(), s);
    }

    #[test]
    fn numerals_are_short_and_exact(n in 1u64..=1_000_000) {
        let t = numeral(&n.into());
        let log2 = 63 - n.leading_zeros() as usize;
        prop_assert!(t.size() <= 8 * (log2 + 1));
        if n <= 100_000 {
            prop_assert_eq!(eval_closed_term(&t, BitBudget::default()).unwrap(), BigUint::from(n));
        }
    }

    #[test]
    fn ascii_round_trip(phi in arith()) {
        let text = print_arith(&phi, ArithFormat::Ascii);
        prop_assert_eq!(parse_arith(&text).unwrap(), phi.clone(), "{}", text);
        let json = print_arith(&phi, ArithFormat::Json);
        prop_assert_eq!(serde_json::from_str::<ArithFormula>(&json).unwrap(), phi);
    }

    #[test]
    fn godel_numbers_decode_to_the_printing(phi in arith()) {
        let n = godel_number(&phi);
        let bytes = godel_decode(&n).unwrap().to_bytes().unwrap();
        prop_assert_eq!(String::from_utf8(bytes).unwrap(), print_arith(&phi, ArithFormat::Ascii));
    }

    #[test]
    fn latex_braces_balance(phi in arith()) {
        let text = print_arith(&phi, ArithFormat::Latex);
        let mut depth = 0i64;
        for c in text.chars() {
            match c {
                '{' => depth += 1,
                '}' => depth -= 1,
                _ => {}
            }
            prop_assert!(depth >= 0);
        }
        prop_assert_eq!(depth, 0);
    }
}
