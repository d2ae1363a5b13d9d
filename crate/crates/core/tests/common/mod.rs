#![allow(dead_code)]

use glkit::arith::{ArithFormula, ArithTerm, TheoryId};
use glkit::ModalFormula;
use proptest::prelude::*;

pub fn modal(vars: &'static [&'static str], depth: u32) -> impl Strategy<Value = ModalFormula> {
    let leaf = prop_oneof![
        1 => Just(ModalFormula::Top),
        1 => Just(ModalFormula::Bot),
        6 => proptest::sample::select(vars).prop_map(ModalFormula::var),
    ];
    leaf.prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(ModalFormula::not),
            inner.clone().prop_map(ModalFormula::boxed),
            inner.clone().prop_map(ModalFormula::dia),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ModalFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ModalFormula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| ModalFormula::imp(a, b)),
        ]
    })
}

pub fn term() -> impl Strategy<Value = ArithTerm> {
    let leaf = prop_oneof![
        Just(ArithTerm::Zero),
        Just(ArithTerm::One),
        proptest::sample::select(&["x", "y", "z1"][..]).prop_map(ArithTerm::var),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithTerm::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithTerm::mul(a, b)),
            inner.clone().prop_map(ArithTerm::exp),
            inner.clone().prop_map(ArithTerm::log),
            inner.clone().prop_map(ArithTerm::exp_star),
            inner.prop_map(ArithTerm::log_star),
        ]
    })
}

pub fn arith() -> impl Strategy<Value = ArithFormula> {
    let atom = prop_oneof![
        (term(), term()).prop_map(|(a, b)| ArithFormula::Eq(a, b)),
        (term(), term()).prop_map(|(a, b)| ArithFormula::Less(a, b)),
        (term(), term()).prop_map(|(a, b)| ArithFormula::Leq(a, b)),
        (term(), 1u64..7).prop_flat_map(|(t, m)| (Just(t), 0..m, Just(m))).prop_map(|(term, residue, modulus)| {
            ArithFormula::CongMod {
                term,
                residue,
                modulus,
            }
        }),
        (0usize..4, term()).prop_map(|(k, t)| ArithFormula::prf(
            TheoryId(k),
            t,
            glkit::arith::quote(&ArithFormula::bot())
        )),
    ];
    atom.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(ArithFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithFormula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ArithFormula::imp(a, b)),
            inner.clone().prop_map(|b| ArithFormula::exists("x", b)),
            inner.clone().prop_map(|b| ArithFormula::forall("y", b)),
            (term(), inner.clone()).prop_map(|(t, b)| ArithFormula::bounded_exists("u", t, b)),
            (term(), inner.clone()).prop_map(|(t, b)| ArithFormula::bounded_forall("v", t, b)),
            inner.prop_map(|b| ArithFormula::Eq(ArithTerm::var("x"), glkit::arith::quote(&b))),
        ]
    })
}
