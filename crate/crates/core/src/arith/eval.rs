use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::godel::godel_number;
use super::{ArithError, ArithTerm};

/// Upper bound on the bit length of any intermediate value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitBudget(pub u64);

impl Default for BitBudget {
    fn default() -> Self {
        BitBudget(1 << 20)
    }
}

impl BitBudget {
    fn check(self, n: BigUint) -> Result<BigUint, ArithError> {
        if n.bits() > self.0 {
            Err(ArithError::BudgetExceeded(self.0))
        } else {
            Ok(n)
        }
    }

    fn pow2(self, x: &BigUint) -> Result<BigUint, ArithError> {
        match x.to_u64() {
            Some(e) if e < self.0 => Ok(BigUint::from(1u32) << e),
            _ => Err(ArithError::BudgetExceeded(self.0)),
        }
    }
}

/// `log*(x) = max({y | exp*(y) ≤ x} ∪ 0)`
pub fn log_star(x: &BigUint) -> u64 {
    let mut y = 0;
    let mut v = BigUint::zero();
    // exp*(y+1) = 2^v ≤ x  iff  v < bits(x)
    while v < BigUint::from(x.bits()) {
        v = BigUint::from(1u32) << v.to_u64().expect("bounded by bits(x)");
        y += 1;
    }
    y
}

/// `exp*(m)`: `m` iterations of `exp` starting from 0.
pub fn exp_star(m: &BigUint, budget: BitBudget) -> Result<BigUint, ArithError> {
    let mut v = BigUint::zero();
    let mut i = BigUint::zero();
    while &i < m {
        v = budget.pow2(&v)?;
        i += 1u32;
    }
    Ok(v)
}

pub fn eval_closed_term(t: &ArithTerm, budget: BitBudget) -> Result<BigUint, ArithError> {
    use ArithTerm::*;
    let rec = |t: &ArithTerm| eval_closed_term(t, budget);
    match t {
        Zero => Ok(BigUint::zero()),
        One => Ok(BigUint::from(1u32)),
        Var(v) => Err(ArithError::FreeVariable(v.clone())),
        Add(a, b) => budget.check(rec(a)? + rec(b)?),
        Mul(a, b) => {
            let (a, b) = (rec(a)?, rec(b)?);
            if a.bits() + b.bits() > budget.0 + 1 {
                return Err(ArithError::BudgetExceeded(budget.0));
            }
            budget.check(a * b)
        }
        Exp(a) => budget.pow2(&rec(a)?),
        Log(a) => {
            let a = rec(a)?;
            Ok(BigUint::from(a.bits().saturating_sub(1)))
        }
        ExpStar(a) => exp_star(&rec(a)?, budget),
        LogStar(a) => Ok(BigUint::from(log_star(&rec(a)?))),
        Quote(f) => budget.check(godel_number(f)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::numeral;
    use super::*;

    fn n(v: u64) -> ArithTerm {
        numeral(&BigUint::from(v))
    }

    fn eval(t: &ArithTerm) -> Result<BigUint, ArithError> {
        eval_closed_term(t, BitBudget::default())
    }

    #[test]
    fn function_symbols() {
        assert_eq!(eval(&ArithTerm::exp_star(n(4))).unwrap(), BigUint::from(16u32));
        assert_eq!(eval(&ArithTerm::log_star(n(65536))).unwrap(), BigUint::from(5u32));
        assert_eq!(eval(&ArithTerm::log_star(n(65535))).unwrap(), BigUint::from(4u32));
        assert_eq!(eval(&ArithTerm::log(n(1))).unwrap(), BigUint::from(0u32));
        assert_eq!(eval(&ArithTerm::log(n(0))).unwrap(), BigUint::from(0u32));
        assert_eq!(eval(&ArithTerm::log(n(1024))).unwrap(), BigUint::from(10u32));
        assert_eq!(eval(&ArithTerm::exp(n(10))).unwrap(), BigUint::from(1024u32));
        for m in 0..=5 {
            let t = ArithTerm::log_star(ArithTerm::exp_star(n(m)));
            assert_eq!(eval(&t).unwrap(), BigUint::from(m));
        }
    }

    #[test]
    fn log_star_matches_definition() {
        // brute force over exp* values 0,1,2,4,16,65536
        let stars = [0u64, 1, 2, 4, 16, 65536];
        for x in 0u64..70000 {
            let expected = stars.iter().rposition(|&s| s <= x).unwrap() as u64;
            assert_eq!(log_star(&BigUint::from(x)), expected, "{x}");
        }
    }

    #[test]
    fn budget_and_free_variables() {
        assert_eq!(eval(&ArithTerm::exp_star(n(6))).unwrap().bits(), 65537);
        assert_eq!(
            eval(&ArithTerm::exp_star(n(7))),
            Err(ArithError::BudgetExceeded(1 << 20))
        );
        let small = BitBudget(8);
        assert!(eval_closed_term(&ArithTerm::exp(n(7)), small).is_ok());
        assert!(eval_closed_term(&ArithTerm::exp(n(8)), small).is_err());
        assert!(eval_closed_term(&ArithTerm::mul(n(255), n(255)), small).is_err());
        assert_eq!(
            eval(&ArithTerm::add(ArithTerm::var("x"), ArithTerm::One)),
            Err(ArithError::FreeVariable("x".into()))
        );
    }

    #[test]
    fn numerals_evaluate_to_themselves() {
        for v in 0..=100_000u64 {
            assert_eq!(eval(&n(v)).unwrap(), BigUint::from(v));
        }
    }
}
