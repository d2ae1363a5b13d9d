//! The `glkit` command line: argument model and the `run` entry point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use glkit::arith::{print_arith, ArithFormat, BitBudget};
use glkit::emitter::{build_kit, check_invariants, dossier, simplify_kit, Dossier, EvaluationKit};
use glkit::kripke::{enumerate_frames, forces};
use glkit::oracle::{agreement_sweep, oracle_decide, OracleVerdict};
use glkit::scenario::{audit, enumerate_scenarios, realized_world, Audit};
use glkit::tower::eval_tower_expr;
use glkit::{check_derivation, parse_modal, print_modal, prove, ModalFormat, ModalFormula, TreeModel, Verdict};
use serde::Deserialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

pub const BUDGET_VAR: &str = "GLKIT_BIT_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Prove,
    Evaluate,
    Simulate,
    Oracle,
    Tower,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Latex,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Provable,
    Unprovable,
}

/// Decide GL formulas, build arithmetical evaluations from countermodels
/// and check them against a finite scenario semantics.
#[derive(Clone, Debug, Parser)]
#[command(name = "glkit", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Modal formula, or a closed term for `tower`.
    pub formula: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Rewrite the kit into the short form (`evaluate`, `simulate`).
    #[arg(long)]
    pub simplify: bool,
    /// Referee bound for `oracle`, frame bound for a formula-less `simulate`.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_worlds: u64,
    /// Connective bound of the exhaustive `oracle` family.
    #[arg(long, default_value_t = 4)]
    pub max_connectives: usize,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    /// Directory of golden cases to check instead of a single formula.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Exact-arithmetic bit budget; defaults to GLKIT_BIT_BUDGET or 2^20.
    #[arg(skip)]
    pub bit_budget: Option<u64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            formula: None,
            format: Format::Text,
            simplify: false,
            max_worlds: 5,
            max_connectives: 4,
            expect: None,
            corpus: None,
            bit_budget: None,
        }
    }

    pub fn with_formula(mut self, formula: &str) -> Self {
        self.formula = Some(formula.to_string());
        self
    }

    fn budget(&self) -> Result<BitBudget, Failure> {
        if let Some(b) = self.bit_budget {
            return Ok(BitBudget(b));
        }
        match std::env::var(BUDGET_VAR) {
            Ok(v) => v
                .trim()
                .parse()
                .map(BitBudget)
                .map_err(|_| Failure::input(format!("{BUDGET_VAR} must be a natural number, got {v:?}"))),
            Err(_) => Ok(BitBudget::default()),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VIOLATION,
            message: message.into(),
        }
    }
}

/// Runs one command, writing the result to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match (&config.corpus, config.command) {
        (Some(dir), Command::Prove | Command::Evaluate) => run_corpus(config, dir),
        (Some(_), _) => Err(Failure::input("--corpus applies to prove and evaluate")),
        (None, Command::Prove) => run_prove(config),
        (None, Command::Evaluate) => run_evaluate(config),
        (None, Command::Simulate) => run_simulate(config),
        (None, Command::Oracle) => run_oracle(config, err),
        (None, Command::Tower) => run_tower(config),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "glkit: {}", f.message);
            f.code
        }
    }
}

type Outcome = Result<(String, i32), Failure>;

fn formula_arg(config: &RunConfig) -> Result<(String, ModalFormula), Failure> {
    let text = config
        .formula
        .as_deref()
        .ok_or_else(|| Failure::input("this command needs a formula"))?;
    let phi = parse_modal(text).map_err(|e| Failure::input(e.to_string()))?;
    Ok((text.to_string(), phi))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values print")
}

fn expectation_code(expect: Option<Expect>, provable: bool) -> i32 {
    match expect {
        Some(Expect::Provable) if !provable => EXIT_MISMATCH,
        Some(Expect::Unprovable) if provable => EXIT_MISMATCH,
        _ => EXIT_OK,
    }
}

/// Re-checks a verdict independently of the search that produced it.
fn certify(phi: &ModalFormula, verdict: &Verdict) -> Result<(), Failure> {
    match verdict {
        Verdict::Provable { derivation } if !check_derivation(derivation) => {
            Err(Failure::violation("derivation failed the checker"))
        }
        Verdict::Refuted { model } if forces(model, model.frame.root(), phi).unwrap_or(true) => {
            Err(Failure::violation("countermodel does not refute the formula"))
        }
        _ => Ok(()),
    }
}

fn model_lines(model: &TreeModel, out: &mut String) {
    for w in model.frame.worlds() {
        let parent = model.frame.parent(w).expect("world exists");
        let vars: Vec<&str> = model
            .valuation()
            .iter()
            .filter(|(_, ws)| ws.contains(&w))
            .map(|(v, _)| v.as_str())
            .collect();
        let edge = parent.map_or("root".to_string(), |p| format!("child of {p}"));
        let _ = writeln!(out, "  world {w} ({edge}): {}", vars.join(" "));
    }
}

fn run_prove(config: &RunConfig) -> Outcome {
    let (_, phi) = formula_arg(config)?;
    let verdict = prove(&phi);
    certify(&phi, &verdict)?;
    let provable = verdict.is_provable();
    let text = match config.format {
        Format::Json => {
            let mut v = serde_json::to_value(&verdict).expect("verdicts serialize");
            v["formula"] = json!(phi.to_string());
            v["checked"] = json!(true);
            pretty(&v)
        }
        Format::Text | Format::Latex => {
            let mut s = String::new();
            let shown = match config.format {
                Format::Latex => print_modal(&phi, ModalFormat::Latex),
                _ => phi.to_string(),
            };
            match &verdict {
                Verdict::Provable { derivation } => {
                    let _ = writeln!(s, "provable: {shown}");
                    let _ = writeln!(s, "derivation: {} sequents, checked", derivation.node_count());
                }
                Verdict::Refuted { model } => {
                    let _ = writeln!(s, "unprovable: {shown}");
                    let _ = writeln!(s, "countermodel: {}", model.to_json());
                    model_lines(model, &mut s);
                }
            }
            s
        }
    };
    Ok((text, expectation_code(config.expect, provable)))
}

fn kit_for(phi: &ModalFormula, simplify: bool) -> Result<EvaluationKit, Failure> {
    let verdict = prove(phi);
    certify(phi, &verdict)?;
    let model = match verdict {
        Verdict::Provable { .. } => return Err(Failure::input("formula is GL-provable; no countermodel")),
        Verdict::Refuted { model } => model,
    };
    let kit = build_kit(&model);
    check_invariants(&kit).map_err(Failure::violation)?;
    if !simplify {
        return Ok(kit);
    }
    let simple = simplify_kit(&kit);
    check_invariants(&simple).map_err(Failure::violation)?;
    Ok(simple)
}

/// The evaluation as an `align*` block.
pub fn latex_dossier(d: &Dossier) -> String {
    let mut s = String::from("\\begin{align*}\n");
    for w in &d.worlds {
        let _ = writeln!(s, "C_{{{}}} &:= {}\\\\", w.id, w.c.latex);
        let _ = writeln!(s, "F_{{{}}} &:= {}\\\\", w.id, w.f.latex);
    }
    for (v, r) in &d.f {
        let _ = writeln!(s, "f({v}) &:= {}\\\\", r.latex);
    }
    let _ = writeln!(s, "f(\\varphi) &:= {}", d.f_formula.latex);
    s.push_str("\\end{align*}\n");
    s
}

fn text_dossier(d: &Dossier) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "formula: {}", d.formula);
    let _ = writeln!(s, "countermodel: {}", d.model.to_json());
    for w in &d.worlds {
        let _ = writeln!(s, "world {} height {}", w.id, w.height);
        let _ = writeln!(s, "  C: {}", w.c.ascii);
        let _ = writeln!(s, "  F: {}", w.f.ascii);
    }
    for (v, r) in &d.f {
        let _ = writeln!(s, "f({v}) = {}", r.ascii);
    }
    s
}

fn run_evaluate(config: &RunConfig) -> Outcome {
    let (_, phi) = formula_arg(config)?;
    let kit = kit_for(&phi, config.simplify)?;
    let d = dossier(&kit, &phi);
    let text = match config.format {
        Format::Json => pretty(&serde_json::to_value(&d).expect("dossiers serialize")),
        Format::Latex => latex_dossier(&d),
        Format::Text => text_dossier(&d),
    };
    Ok((text, EXIT_OK))
}

fn audit_summary(a: &Audit) -> Value {
    serde_json::to_value(a).expect("audits serialize")
}

fn run_simulate(config: &RunConfig) -> Outcome {
    match &config.formula {
        Some(_) => {
            let (_, phi) = formula_arg(config)?;
            let kit = kit_for(&phi, config.simplify)?;
            let report = audit(&kit);
            let mut rows = Vec::new();
            for s in enumerate_scenarios(&kit) {
                let realized = realized_world(&s, &kit).ok();
                let least: BTreeMap<String, String> =
                    s.least.iter().map(|(j, v)| (j.to_string(), v.to_string())).collect();
                rows.push((s.threshold, least, realized));
            }
            let text = match config.format {
                Format::Json => pretty(&json!({
                    "formula": phi.to_string(),
                    "horizon": kit.worlds[kit.model.frame.root()].height,
                    "rows": rows.iter().map(|(t, least, w)| json!({"threshold": t, "least": least, "realized": w})).collect::<Vec<_>>(),
                    "summary": audit_summary(&report),
                })),
                _ => {
                    let mut s = String::from("threshold,least,realized\n");
                    for (t, least, w) in &rows {
                        let cells: Vec<String> = least.iter().map(|(j, v)| format!("L{j}={v}")).collect();
                        let w = w.map_or("none".to_string(), |w| w.to_string());
                        let _ = writeln!(s, "{t},{},{w}", cells.join(" "));
                    }
                    let _ = writeln!(
                        s,
                        "# {} scenarios, {} violations, coverage {}",
                        report.scenarios,
                        report.violations(),
                        if report.coverage.is_empty() { "complete" } else { "incomplete" }
                    );
                    s
                }
            };
            Ok((text, if report.is_clean() { EXIT_OK } else { EXIT_VIOLATION }))
        }
        None => {
            let mut total = Audit::default();
            let mut frames = Vec::new();
            for frame in enumerate_frames(config.max_worlds as usize) {
                let parents = frame.parents().to_vec();
                let kit = build_kit(&TreeModel::new(frame, BTreeMap::new()).expect("empty valuation"));
                let kit = if config.simplify { simplify_kit(&kit) } else { kit };
                let report = audit(&kit);
                frames.push((parents, report.scenarios, report.violations(), report.coverage.is_empty()));
                total.merge(report);
            }
            let text = match config.format {
                Format::Json => pretty(&json!({
                    "max_worlds": config.max_worlds,
                    "frames": frames.iter().map(|(p, n, v, c)| json!({"parents": p, "scenarios": n, "violations": v, "covered": c})).collect::<Vec<_>>(),
                    "summary": audit_summary(&total),
                })),
                _ => {
                    let mut s = String::from("parents,scenarios,violations,covered\n");
                    for (p, n, v, c) in &frames {
                        let p: Vec<String> = p.iter().map(|x| x.map_or("-".into(), |x| x.to_string())).collect();
                        let _ = writeln!(s, "{},{n},{v},{c}", p.join(" "));
                    }
                    let _ = writeln!(s, "# {} frames, {} scenarios, {} violations", frames.len(), total.scenarios, total.violations());
                    s
                }
            };
            Ok((text, if total.is_clean() { EXIT_OK } else { EXIT_VIOLATION }))
        }
    }
}

fn run_oracle(config: &RunConfig, err: &mut dyn Write) -> Outcome {
    let max_worlds = config.max_worlds as usize;
    if config.formula.is_some() {
        let (_, phi) = formula_arg(config)?;
        let verdict = prove(&phi);
        certify(&phi, &verdict)?;
        let referee = oracle_decide(&phi, max_worlds);
        let agree = verdict.is_provable() == matches!(referee, OracleVerdict::NoCountermodelUpTo { .. });
        let text = match config.format {
            Format::Json => pretty(&json!({
                "formula": phi.to_string(),
                "prover": if verdict.is_provable() { "provable" } else { "refuted" },
                "oracle": referee,
                "agree": agree,
            })),
            _ => format!(
                "prover: {}\noracle: {}\n{}\n",
                if verdict.is_provable() { "provable" } else { "refuted" },
                match &referee {
                    OracleVerdict::RefutedBy { model } => format!("refuted by {}", model.to_json()),
                    OracleVerdict::NoCountermodelUpTo { max_worlds } => format!("no countermodel up to {max_worlds} worlds"),
                },
                if agree { "agree" } else { "DISAGREE" }
            ),
        };
        return Ok((text, if agree { EXIT_OK } else { EXIT_VIOLATION }));
    }
    let vars = ["p".to_string(), "q".to_string()];
    let mut last = 0;
    let report = agreement_sweep(config.max_connectives, &vars, max_worlds, true, &mut |n| {
        if n >= last + 1_000_000 {
            last = n;
            let _ = writeln!(err, "glkit: {n} formulas checked");
        }
    });
    let text = match config.format {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("reports serialize");
            v["agreements"] = json!(report.agreements());
            v["explained_by_bound"] = json!(report.explained_by_bound());
            pretty(&v)
        }
        _ => {
            let mut s = format!(
                "{} formulas (<= {} connectives over p, q), {} provable\nagreement at max_worlds = {}: {}/{}\n",
                report.formulas,
                report.max_connectives,
                report.provable,
                report.max_worlds,
                report.agreements(),
                report.formulas
            );
            let _ = writeln!(
                s,
                "prover countermodels checked: {}, failed: {}",
                report.refutations_checked,
                report.refutations_failed.len()
            );
            for d in &report.disagreements {
                let _ = writeln!(
                    s,
                    "  {}: prover {}, countermodel {} worlds{}",
                    d.formula,
                    if d.prover_says_provable { "provable" } else { "refuted" },
                    d.countermodel_worlds.map_or("-".to_string(), |n| n.to_string()),
                    if d.countermodel_verified { " (verified)" } else { "" }
                );
            }
            if !report.disagreements.is_empty() {
                let _ = writeln!(
                    s,
                    "{} of {} disagreements have a verified countermodel above the bound",
                    report.explained_by_bound(),
                    report.disagreements.len()
                );
            }
            s
        }
    };
    let code = if report.disagreements.is_empty() && report.refutations_failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    Ok((text, code))
}

fn run_tower(config: &RunConfig) -> Outcome {
    let expr = config
        .formula
        .as_deref()
        .ok_or_else(|| Failure::input("tower needs an expression"))?;
    let value = eval_tower_expr(expr, config.budget()?).map_err(|e| Failure::input(e.to_string()))?;
    let text = match config.format {
        Format::Json => pretty(&json!({"input": expr, "value": value.to_string()})),
        _ => value.to_string(),
    };
    Ok((text, EXIT_OK))
}

/// One golden case of a corpus directory.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub formula: String,
    pub expect: Expect,
    #[serde(default)]
    pub simplify: bool,
    /// Expected ascii `f(v)` per variable.
    #[serde(default)]
    pub f: BTreeMap<String, String>,
}

pub fn load_corpus(dir: &Path) -> Result<Vec<(String, CorpusCase)>, String> {
    let mut cases = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let case: CorpusCase = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let name = path.file_stem().expect("json file").to_string_lossy().into_owned();
        cases.push((name, case));
    }
    Ok(cases)
}

fn run_corpus(config: &RunConfig, dir: &Path) -> Outcome {
    let cases = load_corpus(dir).map_err(Failure::input)?;
    let mut lines = Vec::new();
    let mut failed = 0;
    for (name, case) in &cases {
        let phi = parse_modal(&case.formula).map_err(|e| Failure::input(format!("{name}: {e}")))?;
        let verdict = prove(&phi);
        certify(&phi, &verdict)?;
        let mut problems = Vec::new();
        if expectation_code(Some(case.expect), verdict.is_provable()) != EXIT_OK {
            problems.push("verdict".to_string());
        }
        if config.command == Command::Evaluate && !verdict.is_provable() {
            let kit = kit_for(&phi, case.simplify || config.simplify)?;
            for (v, want) in &case.f {
                let got = print_arith(&glkit::emitter::evaluate_formula(&kit, &ModalFormula::var(v)), ArithFormat::Ascii);
                if &got != want {
                    problems.push(format!("f({v})"));
                }
            }
        }
        if problems.is_empty() {
            lines.push(json!({"case": name, "ok": true}));
        } else {
            failed += 1;
            lines.push(json!({"case": name, "ok": false, "mismatches": problems}));
        }
    }
    let text = match config.format {
        Format::Json => pretty(&json!({"cases": lines, "failed": failed})),
        _ => {
            let mut s = String::new();
            for l in &lines {
                let status = if l["ok"] == true { "ok" } else { "MISMATCH" };
                let _ = writeln!(s, "{status} {}", l["case"].as_str().unwrap_or_default());
            }
            let _ = writeln!(s, "{} cases, {failed} mismatches", lines.len());
            s
        }
    };
    Ok((text, if failed == 0 { EXIT_OK } else { EXIT_MISMATCH }))
}
