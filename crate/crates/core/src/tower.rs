//! Exact arithmetic on numbers of the form `exp^h(b) + c`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{exp_star, log_star, BitBudget};

/// Largest admissible offset magnitude on a proper tower.
pub const MAX_OFFSET: i64 = 1 << 10;

/// Bases below this are exponentiated eagerly.
const EAGER_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("unsupported form: {0}")]
    Unsupported(String),
    #[error("result would be negative")]
    Negative,
    #[error("exact value exceeds the bit budget of {0} bits")]
    Budget(u64),
    #[error("syntax error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

/// `exp^height(base) + offset`. When `height > 0` the base is at least
/// 2^16 and the offset is small; when `height = 0` the offset is zero.
#[derive(Clone, Debug)]
pub struct TowerNum {
    height: u64,
    base: BigUint,
    offset: i64,
}

impl TowerNum {
    pub fn from_int(n: impl Into<BigUint>) -> Self {
        TowerNum {
            height: 0,
            base: n.into(),
            offset: 0,
        }
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn base(&self) -> &BigUint {
        &self.base
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        (self.height == 0).then_some(&self.base)
    }

    /// The denoted value, if it fits in the budget.
    pub fn to_biguint(&self, budget: BitBudget) -> Result<BigUint, TowerError> {
        let mut v = self.base.clone();
        for _ in 0..self.height {
            match v.to_u64() {
                Some(e) if e < budget.0 => v = BigUint::from(1u32) << e,
                _ => return Err(TowerError::Budget(budget.0)),
            }
        }
        apply_offset(v, self.offset)
    }

    /// Adds a small signed constant.
    pub fn add_offset(&self, delta: i64) -> Result<TowerNum, TowerError> {
        if self.height == 0 {
            return Ok(TowerNum::from_int(apply_offset(self.base.clone(), delta)?));
        }
        let offset = self.offset + delta;
        if offset.abs() > MAX_OFFSET {
            return Err(TowerError::Unsupported(format!("offset {offset} out of range")));
        }
        Ok(TowerNum {
            offset,
            ..self.clone()
        })
    }
}

fn apply_offset(v: BigUint, delta: i64) -> Result<BigUint, TowerError> {
    if delta >= 0 {
        Ok(v + delta as u64)
    } else {
        let d = BigUint::from(delta.unsigned_abs());
        if d > v {
            Err(TowerError::Negative)
        } else {
            Ok(v - d)
        }
    }
}

/// `exp^h1(b1)` against `exp^h2(b2)` on the bare towers.
fn compare_towers(h1: u64, b1: &BigUint, h2: u64, b2: &BigUint) -> Ordering {
    if h1 < h2 {
        return compare_towers(h2, b2, h1, b1).reverse();
    }
    if h1 == h2 {
        return b1.cmp(b2);
    }
    // exp^{h1-h2}(b1) against b2; taking logs on both sides h2 times is
    // exact because both sides are then powers of two or b2 is exact.
    if h2 > 0 {
        // b2 ≥ 2^16 is a base, so exp^{h2}(b2) and exp^{h2}(...) compare as
        // their arguments do.
        return compare_towers(h1 - h2, b1, 0, b2);
    }
    if h1 >= 2 {
        // exp^2(b1) ≥ 2^(2^65536) has more bits than any stored integer.
        return Ordering::Greater;
    }
    // 2^b1 against b2
    let bits = BigUint::from(b2.bits());
    let top = b1 + 1u32;
    match top.cmp(&bits) {
        Ordering::Greater => Ordering::Greater,
        Ordering::Less => Ordering::Less,
        Ordering::Equal => {
            if b2.trailing_zeros() == b1.to_u64() {
                Ordering::Equal
            } else {
                Ordering::Less
            }
        }
    }
}

/// Total order on denoted values.
pub fn tower_compare(s: &TowerNum, t: &TowerNum) -> Ordering {
    match (s.height, t.height) {
        (0, 0) => s.base.cmp(&t.base),
        (_, 0) => tower_vs_exact(s, &t.base),
        (0, _) => tower_vs_exact(t, &s.base).reverse(),
        // Two proper towers are powers of two beyond 2^65536, so offsets
        // matter only when the towers coincide.
        _ => compare_towers(s.height, &s.base, t.height, &t.base).then(s.offset.cmp(&t.offset)),
    }
}

/// `T + c` against `e` is `T` against `e - c`.
fn tower_vs_exact(t: &TowerNum, e: &BigUint) -> Ordering {
    match apply_offset(e.clone(), -t.offset) {
        Ok(shifted) => compare_towers(t.height, &t.base, 0, &shifted),
        Err(_) => Ordering::Greater,
    }
}

impl PartialEq for TowerNum {
    fn eq(&self, other: &Self) -> bool {
        tower_compare(self, other) == Ordering::Equal
    }
}

impl Eq for TowerNum {}

impl PartialOrd for TowerNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TowerNum {
    fn cmp(&self, other: &Self) -> Ordering {
        tower_compare(self, other)
    }
}

/// `2^t`
pub fn tower_exp(t: &TowerNum) -> Result<TowerNum, TowerError> {
    if t.offset != 0 {
        return Err(TowerError::Unsupported(format!("exp({t}) with a nonzero offset")));
    }
    if t.height == 0 && t.base < BigUint::from(EAGER_LIMIT) {
        let e = t.base.to_u64().expect("below 2^16");
        return Ok(TowerNum::from_int(BigUint::from(1u32) << e));
    }
    Ok(TowerNum {
        height: t.height + 1,
        base: t.base.clone(),
        offset: 0,
    })
}

/// `exp*(m)`
pub fn tower_exp_star(m: u64) -> TowerNum {
    if m <= 5 {
        let v = exp_star(&BigUint::from(m), BitBudget::default()).expect("small");
        return TowerNum::from_int(v);
    }
    TowerNum {
        height: m - 5,
        base: BigUint::from(EAGER_LIMIT),
        offset: 0,
    }
}

/// `log(t)`, the floor of the binary logarithm, with `log(0) = 0`.
pub fn tower_log(t: &TowerNum) -> TowerNum {
    if t.height == 0 {
        return TowerNum::from_int(t.base.bits().saturating_sub(1));
    }
    let inner = if t.height == 1 {
        TowerNum::from_int(t.base.clone())
    } else {
        TowerNum {
            height: t.height - 1,
            base: t.base.clone(),
            offset: 0,
        }
    };
    if t.offset < 0 {
        inner.add_offset(-1).expect("inner tower is huge")
    } else {
        inner
    }
}

fn is_exp_star_value(b: &BigUint) -> bool {
    let k = log_star(b);
    exp_star(&BigUint::from(k), BitBudget::default()).is_ok_and(|v| &v == b)
}

/// `log*(t) = max({y | exp*(y) ≤ t} ∪ 0)`
pub fn tower_log_star(t: &TowerNum) -> u64 {
    if t.height == 0 {
        return log_star(&t.base);
    }
    let mut l = t.height + log_star(&t.base);
    if t.offset < 0 && is_exp_star_value(&t.base) {
        l -= 1;
    }
    l
}

/// `log*(t) mod m`
pub fn tower_residue(t: &TowerNum, m: u64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    tower_log_star(t) % m
}

/// `s < exp(exp(t))`, decided without building the double exponential.
pub fn less_than_exp_exp(s: &TowerNum, t: &TowerNum) -> bool {
    // y < 2^X iff log(y) < X for y ≥ 1
    let one = TowerNum::from_int(1u32);
    if *s < one {
        return true;
    }
    let ls = tower_log(s);
    if ls < one {
        return true;
    }
    tower_log(&ls) < *t
}

impl fmt::Display for TowerNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.height == 0 {
            return write!(f, "{}", self.base);
        }
        if self.base == BigUint::from(EAGER_LIMIT) {
            write!(f, "expstar({})", self.height + 5)?;
        } else {
            for _ in 0..self.height {
                f.write_str("exp(")?;
            }
            write!(f, "{}", self.base)?;
            for _ in 0..self.height {
                f.write_str(")")?;
            }
        }
        match self.offset.cmp(&0) {
            Ordering::Greater => write!(f, "+{}", self.offset),
            Ordering::Less => write!(f, "-{}", self.offset.unsigned_abs()),
            Ordering::Equal => Ok(()),
        }
    }
}

impl Serialize for TowerNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TowerNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for TowerNum {
    type Err = TowerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        eval_tower_expr(s, BitBudget::default())
    }
}

/// Evaluates a closed calculator expression: decimals, `+`, `-`, `*`,
/// `exp`, `log`, `expstar`, `logstar` and parentheses.
pub fn eval_tower_expr(text: &str, budget: BitBudget) -> Result<TowerNum, TowerError> {
    let mut p = Calc {
        chars: text.chars().collect(),
        pos: 0,
        budget,
    };
    p.skip_ws();
    if p.pos == p.chars.len() {
        return p.error("empty input");
    }
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return p.error("unexpected trailing input");
    }
    Ok(v)
}

struct Calc {
    chars: Vec<char>,
    pos: usize,
    budget: BitBudget,
}

impl Calc {
    fn error<T>(&self, message: &str) -> Result<T, TowerError> {
        Err(TowerError::Parse {
            position: self.pos,
            message: message.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        let hit = self.chars.get(self.pos) == Some(&c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect(&mut self, c: char) -> Result<(), TowerError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(&format!("expected {c:?}"))
        }
    }

    fn fits(&self, v: BigUint) -> Result<TowerNum, TowerError> {
        if v.bits() > self.budget.0 {
            Err(TowerError::Budget(self.budget.0))
        } else {
            Ok(TowerNum::from_int(v))
        }
    }

    fn small(t: &TowerNum) -> Option<i64> {
        t.as_exact()
            .and_then(|v| v.to_i64())
            .filter(|&v| v <= MAX_OFFSET)
    }

    fn expr(&mut self) -> Result<TowerNum, TowerError> {
        let mut acc = self.product()?;
        loop {
            if self.eat('+') {
                let rhs = self.product()?;
                acc = match (acc.as_exact(), rhs.as_exact()) {
                    (Some(a), Some(b)) => self.fits(a + b)?,
                    _ => match (Self::small(&acc), Self::small(&rhs)) {
                        (_, Some(d)) => acc.add_offset(d)?,
                        (Some(d), _) => rhs.add_offset(d)?,
                        _ => return Err(TowerError::Unsupported("sum of two towers".into())),
                    },
                };
            } else if self.eat('-') {
                let rhs = self.product()?;
                acc = match (acc.as_exact(), rhs.as_exact()) {
                    (Some(a), Some(b)) if b > a => return Err(TowerError::Negative),
                    (Some(a), Some(b)) => TowerNum::from_int(a - b),
                    _ => match Self::small(&rhs) {
                        Some(d) => acc.add_offset(-d)?,
                        None => {
                            return Err(TowerError::Unsupported("subtracting a large value".into()))
                        }
                    },
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<TowerNum, TowerError> {
        let mut acc = self.primary()?;
        while self.eat('*') {
            let rhs = self.primary()?;
            acc = match (acc.as_exact(), rhs.as_exact()) {
                (Some(a), Some(b)) => {
                    if a.bits() + b.bits() > self.budget.0 + 1 {
                        return Err(TowerError::Budget(self.budget.0));
                    }
                    self.fits(a * b)?
                }
                (Some(a), _) if a.is_zero() => acc,
                (_, Some(b)) if b.is_zero() => rhs,
                (Some(a), _) if *a == BigUint::from(1u32) => rhs,
                (_, Some(b)) if *b == BigUint::from(1u32) => acc,
                _ => return Err(TowerError::Unsupported("product of towers".into())),
            };
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<TowerNum, TowerError> {
        self.skip_ws();
        let start = self.pos;
        if self.eat('(') {
            let v = self.expr()?;
            self.expect(')')?;
            return Ok(v);
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        if word.is_empty() {
            return self.error("expected a number or a function");
        }
        if word.chars().all(|c| c.is_ascii_digit()) {
            return self.fits(word.parse().expect("digits"));
        }
        let known = ["exp", "log", "expstar", "logstar"];
        if !known.contains(&word.as_str()) {
            self.pos = start;
            return self.error(&format!("unknown function {word:?}"));
        }
        self.expect('(')?;
        let arg = self.expr()?;
        self.expect(')')?;
        match word.as_str() {
            "exp" => {
                let v = tower_exp(&arg)?;
                match v.as_exact() {
                    Some(e) if e.bits() > self.budget.0 => Err(TowerError::Budget(self.budget.0)),
                    _ => Ok(v),
                }
            }
            "log" => Ok(tower_log(&arg)),
            "logstar" => Ok(TowerNum::from_int(tower_log_star(&arg))),
            _ => match arg.as_exact().and_then(|m| m.to_u64()) {
                Some(m) => Ok(tower_exp_star(m)),
                None => Err(TowerError::Unsupported("expstar of a tower".into())),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calc(s: &str) -> TowerNum {
        s.parse().unwrap()
    }

    /// exp*(m) + d for the template family, with its exact value.
    fn templates() -> Vec<(TowerNum, BigUint)> {
        let budget = BitBudget::default();
        let mut out = Vec::new();
        for m in 0..=6u64 {
            for d in -2..=2i64 {
                if let Ok(t) = tower_exp_star(m).add_offset(d) {
                    let exact = exp_star(&BigUint::from(m), budget).unwrap();
                    if let Ok(v) = apply_offset(exact, d) {
                        out.push((t, v));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn worked_values() {
        assert_eq!(tower_compare(&tower_exp_star(5), &TowerNum::from_int(65536u32)), Ordering::Equal);
        let e6 = tower_exp_star(6);
        assert_eq!(tower_compare(&e6.add_offset(-1).unwrap(), &e6), Ordering::Less);
        let ee16 = tower_exp(&tower_exp(&TowerNum::from_int(16u32)).unwrap()).unwrap();
        assert_eq!(tower_compare(&ee16, &e6), Ordering::Equal);
        assert_eq!(tower_exp_star(4), TowerNum::from_int(16u32));
        assert_eq!(tower_exp(&tower_exp_star(5)).unwrap().to_string(), "expstar(6)");
        assert_eq!(tower_exp(&TowerNum::from_int(10u32)).unwrap(), TowerNum::from_int(1024u32));
        assert_eq!(tower_log_star(&TowerNum::from_int(65536u32)), 5);
        assert_eq!(tower_log_star(&tower_exp_star(9).add_offset(-1).unwrap()), 8);
        assert_eq!(tower_log_star(&TowerNum::from_int(0u32)), 0);
    }

    #[test]
    fn exp_of_offset_tower_is_rejected() {
        let t = tower_exp_star(7).add_offset(-1).unwrap();
        assert!(matches!(tower_exp(&t), Err(TowerError::Unsupported(_))));
        assert!(tower_exp_star(7).add_offset(MAX_OFFSET + 1).is_err());
    }

    #[test]
    fn exp_star_identity() {
        for m in 0..=40 {
            assert_eq!(tower_log_star(&tower_exp_star(m)), m);
            assert_eq!(tower_residue(&tower_exp_star(m), 3), m % 3);
        }
    }

    #[test]
    fn oracle_agreement_on_templates() {
        let family = templates();
        let budget = BitBudget::default();
        for (t, v) in &family {
            assert_eq!(&t.to_biguint(budget).unwrap(), v);
            assert_eq!(tower_log_star(t), log_star(v), "{t}");
            assert_eq!(tower_log(t).to_biguint(budget).unwrap(), BigUint::from(v.bits().saturating_sub(1)));
            if let Ok(e) = tower_exp(t) {
                if v.bits() <= 20 {
                    let exact = BigUint::from(1u32) << v.to_u64().unwrap();
                    assert_eq!(e.to_biguint(budget).unwrap(), exact);
                }
            }
            for (s, w) in &family {
                assert_eq!(tower_compare(t, s), v.cmp(w), "{t} vs {s}");
            }
        }
    }

    #[test]
    fn mixed_exact_and_tower_forms() {
        let exact = TowerNum::from_int(BigUint::from(1u32) << 65536u32);
        let tower = tower_exp_star(6);
        assert_eq!(exact, tower);
        let below = TowerNum::from_int((BigUint::from(1u32) << 65536u32) - 1u32);
        assert_eq!(below, tower.add_offset(-1).unwrap());
        assert!(below < tower);
        assert!(TowerNum::from_int(3u32) < tower.add_offset(-5).unwrap());
    }

    #[test]
    fn monotone_log_star() {
        let mut family: Vec<TowerNum> = templates().into_iter().map(|p| p.0).collect();
        family.extend((7..=12).flat_map(|m| (-2..=2).map(move |d| tower_exp_star(m).add_offset(d).unwrap())));
        family.sort();
        for w in family.windows(2) {
            assert!(tower_log_star(&w[0]) <= tower_log_star(&w[1]));
        }
    }

    #[test]
    fn double_exponential_bound() {
        let small: Vec<u64> = (0..80).collect();
        for &a in &small {
            for &b in &small[..5] {
                // oracle: a < 2^(2^b)
                let bound = BigUint::from(1u32) << (1u64 << b);
                let expected = BigUint::from(a) < bound;
                let got = less_than_exp_exp(&TowerNum::from_int(a), &TowerNum::from_int(b));
                assert_eq!(got, expected, "{a} < exp(exp({b}))");
            }
        }
        let e6 = tower_exp_star(6);
        assert!(less_than_exp_exp(&tower_exp_star(8).add_offset(-1).unwrap(), &e6));
        assert!(!less_than_exp_exp(&tower_exp_star(8), &e6));
        assert!(!less_than_exp_exp(&e6.add_offset(5).unwrap(), &TowerNum::from_int(16u32)));
        assert!(less_than_exp_exp(&e6.add_offset(5).unwrap(), &TowerNum::from_int(17u32)));
        assert!(less_than_exp_exp(&e6.add_offset(-1).unwrap(), &TowerNum::from_int(16u32)));
    }

    #[test]
    fn calculator() {
        assert_eq!(calc("logstar(expstar(9)-1)"), TowerNum::from_int(8u32));
        assert_eq!(calc("2*3+exp(4)-1"), TowerNum::from_int(21u32));
        assert_eq!(calc("expstar(9)-1").to_string(), "expstar(9)-1");
        assert_eq!(calc("exp(exp(70000))+3").to_string(), "exp(exp(70000))+3");
        assert_eq!(calc("log(expstar(7))").to_string(), "expstar(6)");
        assert_eq!(calc("logstar(exp(exp(70000)))"), TowerNum::from_int(7u32));
        assert!(matches!("expstar(7)+expstar(7)".parse::<TowerNum>(), Err(TowerError::Unsupported(_))));
        assert!(matches!("3-4".parse::<TowerNum>(), Err(TowerError::Negative)));
        assert_eq!(calc("exp(2000000)").height(), 1);
        assert!(matches!(eval_tower_expr("exp(20)", BitBudget(16)), Err(TowerError::Budget(16))));
        assert!(matches!("1 +".parse::<TowerNum>(), Err(TowerError::Parse { position: 3, .. })));
        assert!(matches!("foo(1)".parse::<TowerNum>(), Err(TowerError::Parse { position: 0, .. })));
    }
}
