use std::collections::HashMap;

use num_bigint::BigUint;

use super::{numeral, ArithError, ArithFormula, ArithTerm, TheoryId};
use crate::modal::MAX_NESTING;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigUint),
    Word(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 17] = [
    "===", "->", "<=", "(", ")", "[", "]", "+", "*", "=", "<", "~", "&", "|", ".", ",", "^",
];

const KEYWORDS: [&str; 8] = [
    "exp", "log", "expstar", "logstar", "forall", "exists", "mod", "Prf",
];

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ArithError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse().expect("ascii digits");
            out.push((start, Tok::Num(n)));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Word(chars[start..i].iter().collect())));
            continue;
        }
        for sym in SYMBOLS {
            let len = sym.chars().count();
            if chars[i..].iter().take(len).copied().eq(sym.chars()) {
                out.push((i, Tok::Sym(sym)));
                i += len;
                continue 'outer;
            }
        }
        return Err(ArithError::Parse {
            position: i,
            message: format!("unexpected character {c:?}"),
        });
    }
    Ok(out)
}

fn is_variable(w: &str) -> bool {
    crate::kripke::is_identifier(w) && !KEYWORDS.contains(&w)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    depth: usize,
    too_deep: Option<usize>,
    // atomic attempts at a "(" keyed by start token: the result and end token
    atomic_memo: HashMap<usize, Option<(ArithFormula, usize)>>,
}

type Res<T> = Result<T, ArithError>;

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn error<T>(&self, message: impl Into<String>) -> Res<T> {
        Err(ArithError::Parse {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(t)) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Res<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected {s:?}"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Res<()> {
        if self.at_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {w:?}"))
        }
    }

    fn number(&mut self) -> Res<BigUint> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected a number"),
        }
    }

    fn small_number(&mut self) -> Res<u64> {
        let at = self.offset();
        let n = self.number()?;
        u64::try_from(&n).map_err(|_| ArithError::Parse {
            position: at,
            message: "number too large".into(),
        })
    }

    fn variable(&mut self) -> Res<String> {
        match self.peek() {
            Some(Tok::Word(w)) if is_variable(w) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error("expected a variable"),
        }
    }

    fn term(&mut self) -> Res<ArithTerm> {
        let mut t = self.product()?;
        while self.eat_sym("+") {
            t = ArithTerm::add(t, self.product()?);
        }
        Ok(t)
    }

    fn product(&mut self) -> Res<ArithTerm> {
        let mut t = self.primary()?;
        while self.eat_sym("*") {
            t = ArithTerm::mul(t, self.primary()?);
        }
        Ok(t)
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> Res<T>) -> Res<T> {
        if self.depth == MAX_NESTING {
            self.too_deep.get_or_insert(self.offset());
            return self.error("input nested too deeply");
        }
        self.depth += 1;
        let out = f(self);
        self.depth -= 1;
        out
    }

    fn primary(&mut self) -> Res<ArithTerm> {
        self.nested(Self::primary_inner)
    }

    fn primary_inner(&mut self) -> Res<ArithTerm> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(numeral(&n))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Some(Tok::Sym("[")) => {
                self.pos += 1;
                let f = self.imp()?;
                self.expect_sym("]")?;
                Ok(ArithTerm::Quote(Box::new(f)))
            }
            Some(Tok::Word(w)) => {
                let build: fn(ArithTerm) -> ArithTerm = match w.as_str() {
                    "exp" => ArithTerm::exp,
                    "log" => ArithTerm::log,
                    "expstar" => ArithTerm::exp_star,
                    "logstar" => ArithTerm::log_star,
                    _ => return self.variable().map(ArithTerm::Var),
                };
                self.pos += 1;
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(build(t))
            }
            _ => self.error("expected a term"),
        }
    }

    fn imp(&mut self) -> Res<ArithFormula> {
        let a = self.or()?;
        if self.eat_sym("->") {
            Ok(ArithFormula::imp(a, self.imp()?))
        } else {
            Ok(a)
        }
    }

    fn or(&mut self) -> Res<ArithFormula> {
        let mut f = self.and()?;
        while self.eat_sym("|") {
            f = ArithFormula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Res<ArithFormula> {
        let mut f = self.unary()?;
        while self.eat_sym("&") {
            f = ArithFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Res<ArithFormula> {
        self.nested(Self::unary_inner)
    }

    fn unary_inner(&mut self) -> Res<ArithFormula> {
        if self.eat_sym("~") {
            return Ok(ArithFormula::not(self.unary()?));
        }
        for (word, universal) in [("forall", true), ("exists", false)] {
            if self.at_word(word) {
                self.pos += 1;
                let var = self.variable()?;
                let bound = if self.eat_sym("<") { Some(self.term()?) } else { None };
                self.expect_sym(".")?;
                let body = Box::new(self.unary()?);
                return Ok(match (universal, bound) {
                    (true, None) => ArithFormula::ForAll(var, body),
                    (false, None) => ArithFormula::Exists(var, body),
                    (true, Some(bound)) => ArithFormula::BoundedForAll { var, bound, body },
                    (false, Some(bound)) => ArithFormula::BoundedExists { var, bound, body },
                });
            }
        }
        if self.at_word("Prf") {
            return self.prf();
        }
        if self.at_sym("(") {
            let save = self.pos;
            let attempt = match self.atomic_memo.get(&save) {
                Some(hit) => hit.clone(),
                None => {
                    let hit = self.atomic().ok().map(|f| (f, self.pos));
                    self.atomic_memo.insert(save, hit.clone());
                    hit
                }
            };
            if let Some((f, end)) = attempt {
                self.pos = end;
                return Ok(f);
            }
            self.pos = save + 1;
            let f = self.imp()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.atomic()
    }

    fn prf(&mut self) -> Res<ArithFormula> {
        self.expect_word("Prf")?;
        let mut k = 0;
        if self.eat_sym("[") {
            self.expect_word("PA")?;
            self.expect_sym("+")?;
            self.expect_word("Dia")?;
            self.expect_sym("^")?;
            let at = self.offset();
            k = self.small_number()?;
            if k == 0 {
                return Err(ArithError::Parse {
                    position: at,
                    message: "PA itself is written Prf".into(),
                });
            }
            self.expect_sym("(")?;
            self.expect_word("T")?;
            self.expect_sym(")")?;
            self.expect_sym("]")?;
        }
        self.expect_sym("(")?;
        let proof = self.term()?;
        self.expect_sym(",")?;
        let target = self.term()?;
        self.expect_sym(")")?;
        Ok(ArithFormula::prf(TheoryId(k as usize), proof, target))
    }

    fn atomic(&mut self) -> Res<ArithFormula> {
        let a = self.term()?;
        if self.eat_sym("=") {
            return Ok(ArithFormula::Eq(a, self.term()?));
        }
        if self.eat_sym("<=") {
            return Ok(ArithFormula::Leq(a, self.term()?));
        }
        if self.eat_sym("<") {
            return Ok(ArithFormula::Less(a, self.term()?));
        }
        if self.eat_sym("===") {
            let residue = self.small_number()?;
            self.expect_sym("(")?;
            self.expect_word("mod")?;
            let at = self.offset();
            let modulus = self.small_number()?;
            self.expect_sym(")")?;
            if modulus == 0 || residue >= modulus {
                return Err(ArithError::Parse {
                    position: at,
                    message: "need 0 <= residue < modulus".into(),
                });
            }
            return Ok(ArithFormula::CongMod {
                term: a,
                residue,
                modulus,
            });
        }
        self.error("expected a relation")
    }
}

fn run<T>(text: &str, f: impl FnOnce(&mut Parser) -> Res<T>) -> Res<T> {
    let toks = tokenize(text)?;
    let end = text.chars().count();
    if toks.is_empty() {
        return Err(ArithError::Parse {
            position: 0,
            message: "empty input".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        depth: 0,
        too_deep: None,
        atomic_memo: HashMap::new(),
    };
    let out = f(&mut p).and_then(|out| {
        if p.pos < p.toks.len() {
            return p.error("unexpected trailing input");
        }
        Ok(out)
    });
    match (out, p.too_deep) {
        // a speculative branch may have swallowed the limit
        (Err(_), Some(position)) => Err(ArithError::Parse {
            position,
            message: "input nested too deeply".into(),
        }),
        (out, _) => out,
    }
}

/// Parses the canonical ascii grammar. Decimal literals are read as
/// effective numerals.
pub fn parse_arith(text: &str) -> Result<ArithFormula, ArithError> {
    run(text, Parser::imp)
}

pub fn parse_term(text: &str) -> Result<ArithTerm, ArithError> {
    run(text, Parser::term)
}
