//! Syntax of the modal language of GL: formulas, a parser, printers and a
//! few structural queries.
//!
//! Concrete grammar (loosest binding first):
//!
//! ```text
//! imp   := or ( "->" imp )?              right associative
//! or    := and ( "|" and )*
//! and   := unary ( "&" unary )*
//! unary := ("~" | "[]" | "<>") unary | atom
//! atom  := "T" | "F" | ident | "(" imp ")"
//! ```
//!
//! Unicode spellings (`¬ □ ◇ ∧ ∨ → ⊤ ⊥`) are accepted everywhere the ascii
//! ones are.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalFormula {
    Top,
    Bot,
    Var(String),
    Not(Box<ModalFormula>),
    And(Box<ModalFormula>, Box<ModalFormula>),
    Or(Box<ModalFormula>, Box<ModalFormula>),
    Imp(Box<ModalFormula>, Box<ModalFormula>),
    Box(Box<ModalFormula>),
    Dia(Box<ModalFormula>),
}

/// Output flavour for [`print_modal`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModalFormat {
    Ascii,
    Unicode,
    Latex,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ModalParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

impl ModalFormula {
    pub fn var(name: &str) -> Self {
        ModalFormula::Var(name.to_string())
    }

    pub fn not(a: ModalFormula) -> Self {
        ModalFormula::Not(Box::new(a))
    }

    pub fn and(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn boxed(a: ModalFormula) -> Self {
        ModalFormula::Box(Box::new(a))
    }

    pub fn dia(a: ModalFormula) -> Self {
        ModalFormula::Dia(Box::new(a))
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        use ModalFormula::*;
        match self {
            Top | Bot | Var(_) => 1,
            Not(a) | Box(a) | Dia(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of connectives (non-leaf nodes).
    pub fn connectives(&self) -> usize {
        use ModalFormula::*;
        match self {
            Top | Bot | Var(_) => 0,
            Not(a) | Box(a) | Dia(a) => 1 + a.connectives(),
            And(a, b) | Or(a, b) | Imp(a, b) => 1 + a.connectives() + b.connectives(),
        }
    }

    /// Variables occurring in the formula, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        use ModalFormula::*;
        match self {
            Top | Bot => {}
            Var(v) => {
                out.insert(v.clone());
            }
            Not(a) | Box(a) | Dia(a) => a.collect_vars(out),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Rewrites every `◇φ` into `¬□¬φ`.
    pub fn expand_dia(&self) -> ModalFormula {
        use ModalFormula as M;
        match self {
            M::Top | M::Bot | M::Var(_) => self.clone(),
            M::Not(a) => M::not(a.expand_dia()),
            M::Box(a) => M::boxed(a.expand_dia()),
            M::Dia(a) => M::not(M::boxed(M::not(a.expand_dia()))),
            M::And(a, b) => M::and(a.expand_dia(), b.expand_dia()),
            M::Or(a, b) => M::or(a.expand_dia(), b.expand_dia()),
            M::Imp(a, b) => M::imp(a.expand_dia(), b.expand_dia()),
        }
    }

    fn precedence(&self) -> u8 {
        use ModalFormula::*;
        match self {
            Imp(..) => 1,
            Or(..) => 2,
            And(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_modal(self, ModalFormat::Ascii))
    }
}

impl Serialize for ModalFormula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&print_modal(self, ModalFormat::Ascii))
    }
}

impl<'de> Deserialize<'de> for ModalFormula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_modal(&text).map_err(serde::de::Error::custom)
    }
}

/// The set of all subtrees of `phi`, `phi` included.
pub fn subformulas(phi: &ModalFormula) -> BTreeSet<ModalFormula> {
    fn go(phi: &ModalFormula, out: &mut BTreeSet<ModalFormula>) {
        use ModalFormula::*;
        if out.contains(phi) {
            return;
        }
        match phi {
            Top | Bot | Var(_) => {}
            Not(a) | Box(a) | Dia(a) => go(a, out),
            And(a, b) | Or(a, b) | Imp(a, b) => {
                go(a, out);
                go(b, out);
            }
        }
        out.insert(phi.clone());
    }
    let mut out = BTreeSet::new();
    go(phi, &mut out);
    out
}

struct Glyphs {
    top: &'static str,
    bot: &'static str,
    not: &'static str,
    boxed: &'static str,
    dia: &'static str,
    and: &'static str,
    or: &'static str,
    imp: &'static str,
}

const ASCII: Glyphs = Glyphs {
    top: "T",
    bot: "F",
    not: "~",
    boxed: "[]",
    dia: "<>",
    and: " & ",
    or: " | ",
    imp: " -> ",
};

const UNICODE: Glyphs = Glyphs {
    top: "⊤",
    bot: "⊥",
    not: "¬",
    boxed: "□",
    dia: "◇",
    and: " ∧ ",
    or: " ∨ ",
    imp: " → ",
};

const LATEX: Glyphs = Glyphs {
    top: "\\top",
    bot: "\\bot",
    not: "\\lnot ",
    boxed: "\\Box ",
    dia: "\\Diamond ",
    and: " \\land ",
    or: " \\lor ",
    imp: " \\to ",
};

/// Renders a formula with minimal parentheses.
pub fn print_modal(phi: &ModalFormula, format: ModalFormat) -> String {
    let glyphs = match format {
        ModalFormat::Ascii => &ASCII,
        ModalFormat::Unicode => &UNICODE,
        ModalFormat::Latex => &LATEX,
    };
    let mut out = String::new();
    write_modal(phi, glyphs, &mut out);
    out
}

fn write_child(child: &ModalFormula, parens: bool, g: &Glyphs, out: &mut String) {
    if parens {
        out.push('(');
        write_modal(child, g, out);
        out.push(')');
    } else {
        write_modal(child, g, out);
    }
}

fn write_modal(phi: &ModalFormula, g: &Glyphs, out: &mut String) {
    use ModalFormula::*;
    let prec = phi.precedence();
    match phi {
        Top => out.push_str(g.top),
        Bot => out.push_str(g.bot),
        Var(v) => out.push_str(v),
        Not(a) | Box(a) | Dia(a) => {
            out.push_str(match phi {
                Not(_) => g.not,
                Box(_) => g.boxed,
                _ => g.dia,
            });
            write_child(a, a.precedence() < 4, g, out);
        }
        And(a, b) | Or(a, b) => {
            let op = if matches!(phi, And(..)) { g.and } else { g.or };
            write_child(a, a.precedence() < prec, g, out);
            out.push_str(op);
            write_child(b, b.precedence() <= prec, g, out);
        }
        Imp(a, b) => {
            write_child(a, a.precedence() <= prec, g, out);
            out.push_str(g.imp);
            write_child(b, b.precedence() < prec, g, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Top,
    Bot,
    Ident(String),
    Not,
    Box,
    Dia,
    And,
    Or,
    Imp,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ModalParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |position: usize, message: String| ModalParseError { position, message };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let next = chars.get(i + 1).copied();
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            'T' | '⊤' => Tok::Top,
            'F' | '⊥' => Tok::Bot,
            '~' | '¬' => Tok::Not,
            '□' => Tok::Box,
            '◇' => Tok::Dia,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Imp,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' if next == Some(']') => {
                i += 1;
                Tok::Box
            }
            '<' if next == Some('>') => {
                i += 1;
                Tok::Dia
            }
            '-' if next == Some('>') => {
                i += 1;
                Tok::Imp
            }
            'a'..='z' => {
                let mut name = String::new();
                while i < chars.len()
                    && (chars[i].is_ascii_lowercase()
                        || chars[i].is_ascii_digit()
                        || chars[i] == '_')
                {
                    name.push(chars[i]);
                    i += 1;
                }
                toks.push((start, Tok::Ident(name)));
                continue;
            }
            other => return Err(err(start, format!("unexpected character {other:?}"))),
        };
        i += 1;
        toks.push((start, tok));
    }
    Ok(toks)
}

/// Deepest nesting of parentheses and prefix operators the parsers accept.
pub const MAX_NESTING: usize = 256;

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ModalParseError> {
        Err(ModalParseError {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn imp(&mut self) -> Result<ModalFormula, ModalParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Imp) {
            self.pos += 1;
            let rhs = self.imp()?;
            return Ok(ModalFormula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<ModalFormula, ModalParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = ModalFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<ModalFormula, ModalParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = ModalFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ModalFormula, ModalParseError> {
        if self.depth == MAX_NESTING {
            return self.error("formula nested too deeply");
        }
        self.depth += 1;
        let out = self.prefixed();
        self.depth -= 1;
        out
    }

    fn prefixed(&mut self) -> Result<ModalFormula, ModalParseError> {
        let wrap: fn(ModalFormula) -> ModalFormula = match self.peek() {
            Some(Tok::Not) => ModalFormula::not,
            Some(Tok::Box) => ModalFormula::boxed,
            Some(Tok::Dia) => ModalFormula::dia,
            _ => return self.atom(),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }

    fn atom(&mut self) -> Result<ModalFormula, ModalParseError> {
        let phi = match self.peek() {
            Some(Tok::Top) => ModalFormula::Top,
            Some(Tok::Bot) => ModalFormula::Bot,
            Some(Tok::Ident(name)) => ModalFormula::Var(name.clone()),
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.imp()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                inner
            }
            Some(_) => return self.error("expected a formula"),
            None => return self.error("unexpected end of input"),
        };
        self.pos += 1;
        Ok(phi)
    }
}

pub fn parse_modal(text: &str) -> Result<ModalFormula, ModalParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ModalParseError {
            position: 0,
            message: "empty input".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        depth: 0,
    };
    let phi = p.imp()?;
    if p.pos != p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(phi)
}
