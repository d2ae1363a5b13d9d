use super::{ArithFormula, ArithTerm, TheoryId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithFormat {
    Ascii,
    Latex,
    Json,
}

pub fn print_term(t: &ArithTerm, format: ArithFormat) -> String {
    let mut out = String::new();
    match format {
        ArithFormat::Json => out = serde_json::to_string(t).expect("terms serialize"),
        _ => term(t, format == ArithFormat::Latex, 0, &mut out),
    }
    out
}

pub fn print_arith(f: &ArithFormula, format: ArithFormat) -> String {
    let mut out = String::new();
    match format {
        ArithFormat::Json => out = serde_json::to_string(f).expect("formulas serialize"),
        _ => formula(f, format == ArithFormat::Latex, 0, &mut out),
    }
    out
}

fn term_prec(t: &ArithTerm) -> u8 {
    match t {
        ArithTerm::Add(..) => 1,
        ArithTerm::Mul(..) => 2,
        _ => 3,
    }
}

fn term(t: &ArithTerm, latex: bool, min: u8, out: &mut String) {
    use ArithTerm::*;
    let paren = term_prec(t) < min;
    if paren {
        out.push('(');
    }
    match t {
        Zero => out.push('0'),
        One => out.push('1'),
        Var(v) => out.push_str(v),
        Add(a, b) => {
            term(a, latex, 1, out);
            out.push('+');
            term(b, latex, 2, out);
        }
        Mul(a, b) => {
            term(a, latex, 2, out);
            out.push_str(if latex { "\\cdot " } else { "*" });
            term(b, latex, 3, out);
        }
        Exp(a) | Log(a) | ExpStar(a) | LogStar(a) => {
            let name = match (t, latex) {
                (Exp(_), false) => "exp",
                (Log(_), false) => "log",
                (ExpStar(_), false) => "expstar",
                (LogStar(_), false) => "logstar",
                (Exp(_), true) => "\\exp",
                (Log(_), true) => "\\log",
                (ExpStar(_), true) => "\\exp^{\\star}",
                _ => "\\log^{\\star}",
            };
            out.push_str(name);
            out.push('(');
            term(a, latex, 0, out);
            out.push(')');
        }
        Quote(f) => {
            out.push_str(if latex { "\\ulcorner " } else { "[" });
            formula(f, latex, 0, out);
            out.push_str(if latex { "\\urcorner" } else { "]" });
        }
    }
    if paren {
        out.push(')');
    }
}

fn formula_prec(f: &ArithFormula) -> u8 {
    use ArithFormula::*;
    match f {
        Imp(..) => 1,
        Or(..) => 2,
        And(..) => 3,
        Not(_) | ForAll(..) | Exists(..) | BoundedForAll { .. } | BoundedExists { .. } => 4,
        _ => 5,
    }
}

fn theory(k: TheoryId, latex: bool, out: &mut String) {
    match (k.0, latex) {
        (0, false) => out.push_str("Prf"),
        (0, true) => out.push_str("\\mathsf{Prf}"),
        (k, false) => out.push_str(&format!("Prf[PA+Dia^{k}(T)]")),
        (k, true) => out.push_str(&format!(
            "\\mathsf{{Prf}}_{{\\mathsf{{PA}}+\\Diamond^{{{k}}}\\top}}"
        )),
    }
}

fn quantifier(
    universal: bool,
    var: &str,
    bound: Option<&ArithTerm>,
    body: &ArithFormula,
    latex: bool,
    out: &mut String,
) {
    match (universal, latex) {
        (true, false) => out.push_str("forall "),
        (false, false) => out.push_str("exists "),
        (true, true) => out.push_str("\\forall "),
        (false, true) => out.push_str("\\exists "),
    }
    out.push_str(var);
    if let Some(t) = bound {
        out.push_str(if latex { "<" } else { " < " });
        term(t, latex, 0, out);
    }
    out.push_str(if latex { "\\," } else { "." });
    formula(body, latex, 4, out);
}

fn formula(f: &ArithFormula, latex: bool, min: u8, out: &mut String) {
    use ArithFormula::*;
    let paren = formula_prec(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Eq(a, b) | Less(a, b) | Leq(a, b) => {
            term(a, latex, 0, out);
            out.push_str(match (f, latex) {
                (Eq(..), _) => "=",
                (Less(..), _) => "<",
                (_, false) => "<=",
                (_, true) => "\\le ",
            });
            term(b, latex, 0, out);
        }
        CongMod {
            term: t,
            residue,
            modulus,
        } => {
            term(t, latex, 0, out);
            if latex {
                out.push_str(&format!("\\equiv {residue}\\;(\\mathrm{{mod}}\\;{modulus})"));
            } else {
                out.push_str(&format!(" === {residue} (mod {modulus})"));
            }
        }
        PrfAt {
            theory: k,
            proof,
            target,
        } => {
            theory(*k, latex, out);
            out.push('(');
            term(proof, latex, 0, out);
            out.push(',');
            term(target, latex, 0, out);
            out.push(')');
        }
        Not(a) => {
            out.push_str(if latex { "\\lnot " } else { "~" });
            formula(a, latex, 4, out);
        }
        And(a, b) | Or(a, b) => {
            let p = formula_prec(f);
            formula(a, latex, p, out);
            out.push_str(match (f, latex) {
                (And(..), false) => " & ",
                (And(..), true) => " \\land ",
                (_, false) => " | ",
                (_, true) => " \\lor ",
            });
            formula(b, latex, p + 1, out);
        }
        Imp(a, b) => {
            formula(a, latex, 2, out);
            out.push_str(if latex { " \\to " } else { " -> " });
            formula(b, latex, 1, out);
        }
        ForAll(v, body) => quantifier(true, v, None, body, latex, out),
        Exists(v, body) => quantifier(false, v, None, body, latex, out),
        BoundedForAll { var, bound, body } => quantifier(true, var, Some(bound), body, latex, out),
        BoundedExists { var, bound, body } => quantifier(false, var, Some(bound), body, latex, out),
    }
    if paren {
        out.push(')');
    }
}
