//! First-order arithmetic over the signature `0, 1, +, ·, exp, log, exp*,
//! log*` with indexed proof predicates, effective binary numerals and
//! Gödel numbering.

mod eval;
mod godel;
mod parse;
mod print;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{eval_closed_term, exp_star, log_star, BitBudget};
pub use godel::{godel_decode, godel_encode, godel_number, BitString};
pub use parse::{parse_arith, parse_term};
pub use print::{print_arith, print_term, ArithFormat};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("value exceeds the bit budget of {0} bits")]
    BudgetExceeded(u64),
    #[error("free variable {0} in a closed term")]
    FreeVariable(String),
    #[error("syntax error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("only positive integers encode strings")]
    NotPositive,
    #[error("bad bit string: {0}")]
    BadBits(String),
}

/// The theory `PA + ◇^k ⊤`; `k = 0` is PA itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TheoryId(pub usize);

impl TheoryId {
    pub const PA: TheoryId = TheoryId(0);
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithTerm {
    Zero,
    One,
    Var(String),
    Add(Box<ArithTerm>, Box<ArithTerm>),
    Mul(Box<ArithTerm>, Box<ArithTerm>),
    Exp(Box<ArithTerm>),
    Log(Box<ArithTerm>),
    ExpStar(Box<ArithTerm>),
    LogStar(Box<ArithTerm>),
    /// `⌜F⌝`: stands for the numeral of the Gödel number of `F`.
    Quote(Box<ArithFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithFormula {
    Eq(ArithTerm, ArithTerm),
    Less(ArithTerm, ArithTerm),
    Leq(ArithTerm, ArithTerm),
    /// `t ≡ residue (mod modulus)`, shorthand for
    /// `∃z (t = z·m + r ∧ r < m)`.
    CongMod {
        term: ArithTerm,
        residue: u64,
        modulus: u64,
    },
    /// `Prf_T(proof, target)` for `T = PA + ◇^k ⊤`.
    PrfAt {
        theory: TheoryId,
        proof: ArithTerm,
        target: ArithTerm,
    },
    Not(Box<ArithFormula>),
    And(Box<ArithFormula>, Box<ArithFormula>),
    Or(Box<ArithFormula>, Box<ArithFormula>),
    Imp(Box<ArithFormula>, Box<ArithFormula>),
    ForAll(String, Box<ArithFormula>),
    Exists(String, Box<ArithFormula>),
    BoundedForAll {
        var: String,
        bound: ArithTerm,
        body: Box<ArithFormula>,
    },
    BoundedExists {
        var: String,
        bound: ArithTerm,
        body: Box<ArithFormula>,
    },
}

impl ArithTerm {
    pub fn var(name: &str) -> Self {
        ArithTerm::Var(name.to_string())
    }

    pub fn add(a: ArithTerm, b: ArithTerm) -> Self {
        ArithTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ArithTerm, b: ArithTerm) -> Self {
        ArithTerm::Mul(Box::new(a), Box::new(b))
    }

    pub fn exp(a: ArithTerm) -> Self {
        ArithTerm::Exp(Box::new(a))
    }

    pub fn log(a: ArithTerm) -> Self {
        ArithTerm::Log(Box::new(a))
    }

    pub fn exp_star(a: ArithTerm) -> Self {
        ArithTerm::ExpStar(Box::new(a))
    }

    pub fn log_star(a: ArithTerm) -> Self {
        ArithTerm::LogStar(Box::new(a))
    }

    /// Number of symbol occurrences (nodes); a quotation counts as one.
    pub fn size(&self) -> usize {
        use ArithTerm::*;
        match self {
            Zero | One | Var(_) | Quote(_) => 1,
            Add(a, b) | Mul(a, b) => 1 + a.size() + b.size(),
            Exp(a) | Log(a) | ExpStar(a) | LogStar(a) => 1 + a.size(),
        }
    }

    /// Replaces every quotation by the numeral it abbreviates.
    pub fn unfold_quotes(&self) -> ArithTerm {
        use ArithTerm::*;
        match self {
            Zero | One | Var(_) => self.clone(),
            Add(a, b) => ArithTerm::add(a.unfold_quotes(), b.unfold_quotes()),
            Mul(a, b) => ArithTerm::mul(a.unfold_quotes(), b.unfold_quotes()),
            Exp(a) => ArithTerm::exp(a.unfold_quotes()),
            Log(a) => ArithTerm::log(a.unfold_quotes()),
            ExpStar(a) => ArithTerm::exp_star(a.unfold_quotes()),
            LogStar(a) => ArithTerm::log_star(a.unfold_quotes()),
            Quote(f) => numeral(&godel_number(f)),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        use ArithTerm::*;
        match self {
            Zero | One | Quote(_) => {}
            Var(v) => {
                out.insert(v.clone());
            }
            Add(a, b) | Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Exp(a) | Log(a) | ExpStar(a) | LogStar(a) => a.collect_vars(out),
        }
    }
}

impl ArithFormula {
    /// `0=0`
    pub fn top() -> Self {
        ArithFormula::Eq(ArithTerm::Zero, ArithTerm::Zero)
    }

    /// `0=1`
    pub fn bot() -> Self {
        ArithFormula::Eq(ArithTerm::Zero, ArithTerm::One)
    }

    pub fn is_top(&self) -> bool {
        *self == Self::top()
    }

    pub fn not(a: ArithFormula) -> Self {
        ArithFormula::Not(Box::new(a))
    }

    pub fn and(a: ArithFormula, b: ArithFormula) -> Self {
        ArithFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ArithFormula, b: ArithFormula) -> Self {
        ArithFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: ArithFormula, b: ArithFormula) -> Self {
        ArithFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: ArithFormula) -> Self {
        ArithFormula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: ArithFormula) -> Self {
        ArithFormula::ForAll(var.to_string(), Box::new(body))
    }

    pub fn bounded_forall(var: &str, bound: ArithTerm, body: ArithFormula) -> Self {
        ArithFormula::BoundedForAll {
            var: var.to_string(),
            bound,
            body: Box::new(body),
        }
    }

    pub fn bounded_exists(var: &str, bound: ArithTerm, body: ArithFormula) -> Self {
        ArithFormula::BoundedExists {
            var: var.to_string(),
            bound,
            body: Box::new(body),
        }
    }

    pub fn prf(theory: TheoryId, proof: ArithTerm, target: ArithTerm) -> Self {
        ArithFormula::PrfAt {
            theory,
            proof,
            target,
        }
    }

    /// Left-nested conjunction; the empty conjunction is `0=0`.
    pub fn conj(parts: impl IntoIterator<Item = ArithFormula>) -> Self {
        parts
            .into_iter()
            .reduce(ArithFormula::and)
            .unwrap_or_else(ArithFormula::top)
    }

    /// Left-nested disjunction; the empty disjunction is `0=1`.
    pub fn disj(parts: impl IntoIterator<Item = ArithFormula>) -> Self {
        parts
            .into_iter()
            .reduce(ArithFormula::or)
            .unwrap_or_else(ArithFormula::bot)
    }

    /// Conjuncts of a left-nested conjunction, outermost last.
    pub fn conjuncts(&self) -> Vec<&ArithFormula> {
        match self {
            ArithFormula::And(a, b) => {
                let mut out = a.conjuncts();
                out.push(b);
                out
            }
            other => vec![other],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        use ArithFormula::*;
        let mut out = BTreeSet::new();
        match self {
            Eq(a, b) | Less(a, b) | Leq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            CongMod { term, .. } => term.collect_vars(&mut out),
            PrfAt { proof, target, .. } => {
                proof.collect_vars(&mut out);
                target.collect_vars(&mut out);
            }
            Not(a) => out = a.free_vars(),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                out = a.free_vars();
                out.extend(b.free_vars());
            }
            ForAll(v, body) | Exists(v, body) => {
                out = body.free_vars();
                out.remove(v);
            }
            BoundedForAll { var, bound, body } | BoundedExists { var, bound, body } => {
                out = body.free_vars();
                out.remove(var);
                bound.collect_vars(&mut out);
            }
        }
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// No quantifier rebinds a variable already bound on the path from the
    /// root; quoted formulas are checked as separate sentences.
    pub fn binders_are_fresh(&self) -> bool {
        fn term_ok(t: &ArithTerm) -> bool {
            use ArithTerm::*;
            match t {
                Zero | One | Var(_) => true,
                Quote(f) => f.binders_are_fresh(),
                Add(a, b) | Mul(a, b) => term_ok(a) && term_ok(b),
                Exp(a) | Log(a) | ExpStar(a) | LogStar(a) => term_ok(a),
            }
        }
        fn go(f: &ArithFormula, bound: &mut Vec<String>) -> bool {
            use ArithFormula::*;
            match f {
                Eq(a, b) | Less(a, b) | Leq(a, b) => term_ok(a) && term_ok(b),
                CongMod { term, .. } => term_ok(term),
                PrfAt { proof, target, .. } => term_ok(proof) && term_ok(target),
                Not(a) => go(a, bound),
                And(a, b) | Or(a, b) | Imp(a, b) => go(a, bound) && go(b, bound),
                ForAll(v, body) | Exists(v, body) => bind(v, None, body, bound),
                BoundedForAll { var, bound: t, body } | BoundedExists { var, bound: t, body } => {
                    bind(var, Some(t), body, bound)
                }
            }
        }
        fn bind(v: &str, t: Option<&ArithTerm>, body: &ArithFormula, bound: &mut Vec<String>) -> bool {
            if bound.iter().any(|b| b == v) || !t.map_or(true, term_ok) {
                return false;
            }
            bound.push(v.to_string());
            let ok = go(body, bound);
            bound.pop();
            ok
        }
        go(self, &mut Vec::new())
    }

    /// Replaces `t ≡ r (mod m)` by `∃z (t = z·m + r ∧ r < m)` with
    /// effective numerals for `m` and `r`.
    pub fn expand_congruences(&self) -> ArithFormula {
        use ArithFormula::*;
        let rec = |f: &ArithFormula| f.expand_congruences();
        match self {
            Eq(..) | Less(..) | Leq(..) | PrfAt { .. } => self.clone(),
            CongMod {
                term,
                residue,
                modulus,
            } => {
                let mut used = BTreeSet::new();
                term.collect_vars(&mut used);
                let z = (0..)
                    .map(|i| if i == 0 { "z".to_string() } else { format!("z{i}") })
                    .find(|name| !used.contains(name))
                    .expect("infinitely many names");
                let m = numeral(&BigUint::from(*modulus));
                let r = numeral(&BigUint::from(*residue));
                ArithFormula::Exists(
                    z.clone(),
                    Box::new(ArithFormula::and(
                        Eq(
                            term.clone(),
                            ArithTerm::add(ArithTerm::mul(ArithTerm::Var(z), m.clone()), r.clone()),
                        ),
                        Less(r, m),
                    )),
                )
            }
            Not(a) => ArithFormula::not(rec(a)),
            And(a, b) => ArithFormula::and(rec(a), rec(b)),
            Or(a, b) => ArithFormula::or(rec(a), rec(b)),
            Imp(a, b) => ArithFormula::imp(rec(a), rec(b)),
            ForAll(v, b) => ForAll(v.clone(), Box::new(rec(b))),
            Exists(v, b) => Exists(v.clone(), Box::new(rec(b))),
            BoundedForAll { var, bound, body } => BoundedForAll {
                var: var.clone(),
                bound: bound.clone(),
                body: Box::new(rec(body)),
            },
            BoundedExists { var, bound, body } => BoundedExists {
                var: var.clone(),
                bound: bound.clone(),
                body: Box::new(rec(body)),
            },
        }
    }
}

/// The effective binary numeral: `0`, `1`, `(1+1)·n`, `(1+1)·n+1`.
pub fn numeral(n: &BigUint) -> ArithTerm {
    let bits = n.bits();
    if bits == 0 {
        return ArithTerm::Zero;
    }
    let two = || ArithTerm::add(ArithTerm::One, ArithTerm::One);
    let mut t = ArithTerm::One;
    for i in (0..bits - 1).rev() {
        t = ArithTerm::mul(two(), t);
        if n.bit(i) {
            t = ArithTerm::add(t, ArithTerm::One);
        }
    }
    t
}

/// `⌜φ⌝`
pub fn quote(phi: &ArithFormula) -> ArithTerm {
    ArithTerm::Quote(Box::new(phi.clone()))
}

/// `Prv(⌜φ⌝) = ∃x Prf(x, ⌜φ⌝)`
pub fn provable(phi: &ArithFormula) -> ArithFormula {
    ArithFormula::exists(
        "x",
        ArithFormula::prf(TheoryId::PA, ArithTerm::var("x"), quote(phi)),
    )
}

/// `□^n φ`
pub fn box_n(n: usize, phi: &ArithFormula) -> ArithFormula {
    (0..n).fold(phi.clone(), |acc, _| provable(&acc))
}

/// `◇^n φ`, where `◇ψ = ¬Prv(⌜¬ψ⌝)`.
pub fn diamond_n(n: usize, phi: &ArithFormula) -> ArithFormula {
    (0..n).fold(phi.clone(), |acc, _| {
        ArithFormula::not(provable(&ArithFormula::not(acc)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeral_clauses() {
        assert_eq!(numeral(&BigUint::from(0u32)), ArithTerm::Zero);
        assert_eq!(numeral(&BigUint::from(1u32)), ArithTerm::One);
        let two = || ArithTerm::add(ArithTerm::One, ArithTerm::One);
        let three = ArithTerm::add(ArithTerm::mul(two(), ArithTerm::One), ArithTerm::One);
        assert_eq!(numeral(&BigUint::from(6u32)), ArithTerm::mul(two(), three));
    }

    #[test]
    fn numeral_size_is_logarithmic() {
        for n in 1u32..5000 {
            let t = numeral(&BigUint::from(n));
            let bound = 8 * (n.ilog2() as usize + 1);
            assert!(t.size() <= bound, "{n}: {} > {bound}", t.size());
        }
    }

    #[test]
    fn box_and_diamond_unfold() {
        let bot = ArithFormula::bot();
        assert_eq!(box_n(0, &bot), bot);
        let expected = ArithFormula::not(ArithFormula::exists(
            "x",
            ArithFormula::prf(
                TheoryId::PA,
                ArithTerm::var("x"),
                quote(&ArithFormula::not(ArithFormula::top())),
            ),
        ));
        assert_eq!(diamond_n(1, &ArithFormula::top()), expected);
        assert_eq!(diamond_n(0, &ArithFormula::top()), ArithFormula::top());
    }

    #[test]
    fn quote_unfolds_to_the_numeral_of_the_godel_number() {
        let t = quote(&ArithFormula::bot());
        assert_eq!(t, quote(&ArithFormula::bot()));
        let gn = godel_encode(&BitString::from_bytes(b"0=1"));
        assert_eq!(t.unfold_quotes(), numeral(&gn));
    }

    #[test]
    fn freshness_and_free_variables() {
        let x = ArithTerm::var("x");
        let ok = ArithFormula::exists(
            "x",
            ArithFormula::and(
                ArithFormula::bounded_forall("y", x.clone(), ArithFormula::Eq(ArithTerm::var("y"), x.clone())),
                ArithFormula::bounded_exists("y", x.clone(), ArithFormula::top()),
            ),
        );
        assert!(ok.binders_are_fresh());
        assert!(ok.is_sentence());
        let shadow = ArithFormula::exists("x", ArithFormula::exists("x", ArithFormula::top()));
        assert!(!shadow.binders_are_fresh());
        let open = ArithFormula::Eq(x.clone(), ArithTerm::Zero);
        assert_eq!(open.free_vars(), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn congruence_expansion() {
        let f = ArithFormula::CongMod {
            term: ArithTerm::var("z"),
            residue: 1,
            modulus: 2,
        };
        let e = f.expand_congruences();
        let ArithFormula::Exists(v, _) = &e else { panic!() };
        assert_eq!(v, "z1");
        assert_eq!(
            print_arith(&e, ArithFormat::Ascii),
            "exists z1.(z=z1*((1+1)*1)+1 & 1<(1+1)*1)"
        );
    }
}
