use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use glkit_cli::{load_corpus, run, Command, Expect, Format, RunConfig, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK};
use jsonschema::JSONSchema;
use serde_json::Value;

const LATEX_MACROS: &[&str] = &[
    "begin", "end", "mathsf", "ulcorner", "urcorner", "exists", "forall", "lnot", "land", "lor", "to", "cdot", "exp",
    "log", "star", "equiv", "mathrm", "Diamond", "Box", "top", "bot", "le", "varphi",
];

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn schema(name: &str) -> JSONSchema {
    let path = crate_dir().join("schemas").join(format!("{name}.schema.json"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&doc).unwrap()
}

fn exec(config: &RunConfig) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(config, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_of(config: RunConfig, schema_name: &str) -> Value {
    let config = RunConfig {
        format: Format::Json,
        ..config
    };
    let (code, out, err) = exec(&config);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let s = schema(schema_name);
    if let Err(errors) = s.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("{schema_name}: {msgs:?}");
    }
    v
}

/// Balanced braces and only whitelisted control words.
fn latex_ok(text: &str) -> Result<(), String> {
    let mut depth = 0i64;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            '\\' => {
                let mut word = String::new();
                while let Some(&n) = chars.peek() {
                    if !n.is_ascii_alphabetic() {
                        break;
                    }
                    word.push(n);
                    chars.next();
                }
                if word.is_empty() {
                    // control symbols: \\ \, \;
                    match chars.next() {
                        Some('\\' | ',' | ';') => {}
                        other => return Err(format!("bad control symbol {other:?}")),
                    }
                } else if !LATEX_MACROS.contains(&word.as_str()) {
                    return Err(format!("unknown macro \\{word}"));
                }
            }
            _ => {}
        }
        if depth < 0 {
            return Err("unbalanced }".into());
        }
    }
    if depth == 0 {
        Ok(())
    } else {
        Err("unbalanced {".into())
    }
}

const TWO_DIAMONDS: &str = "<>v -> (<>u -> <>(v&u))";

#[test]
fn prove_outputs_match_schema() {
    for f in [TWO_DIAMONDS, "[]([]p->p)->[]p", "<>T", "T", "p -> []p"] {
        let v = json_of(RunConfig::new(Command::Prove).with_formula(f), "prove");
        assert_eq!(v["checked"], true);
    }
}

#[test]
fn expectations_set_the_exit_code() {
    let mut c = RunConfig::new(Command::Prove).with_formula(TWO_DIAMONDS);
    c.expect = Some(Expect::Unprovable);
    assert_eq!(exec(&c).0, EXIT_OK);
    c.expect = Some(Expect::Provable);
    assert_eq!(exec(&c).0, EXIT_MISMATCH);
}

#[test]
fn evaluate_rejects_theorems() {
    let (code, _, err) = exec(&RunConfig::new(Command::Evaluate).with_formula("[]p->[][]p"));
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("formula is GL-provable; no countermodel"), "{err}");
}

#[test]
fn malformed_input_reports_position() {
    let (code, _, err) = exec(&RunConfig::new(Command::Prove).with_formula("<>v -> (u"));
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("position"), "{err}");
    let (code, _, _) = exec(&RunConfig::new(Command::Prove));
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn evaluate_dossiers_match_schema_and_latex_compiles() {
    for f in [
        TWO_DIAMONDS,
        "<>p & <><>q -> <>(p & <>q)",
        "<>p & <>q & <>r -> <>(p & q) | <>(q & r) | <>(p & r)",
        "<><><>T",
    ] {
        for simplify in [false, true] {
            let mut c = RunConfig::new(Command::Evaluate).with_formula(f);
            c.simplify = simplify;
            let v = json_of(c.clone(), "evaluate");
            assert_eq!(v["simplified"], simplify);
            c.format = Format::Latex;
            let (code, out, _) = exec(&c);
            assert_eq!(code, EXIT_OK);
            latex_ok(&out).unwrap_or_else(|e| panic!("{f}: {e}\n{out}"));
            assert!(out.starts_with("\\begin{align*}"));
        }
    }
}

#[test]
fn simulate_outputs_match_schema() {
    let v = json_of(RunConfig::new(Command::Simulate).with_formula(TWO_DIAMONDS), "simulate");
    assert_eq!(v["rows"].as_array().unwrap().len(), v["summary"]["scenarios"].as_u64().unwrap() as usize);
    let mut c = RunConfig::new(Command::Simulate);
    c.max_worlds = 4;
    let v = json_of(c, "simulate");
    assert_eq!(v["frames"].as_array().unwrap().len(), 8);
}

#[test]
fn oracle_outputs_match_schema() {
    let mut c = RunConfig::new(Command::Oracle);
    c.max_connectives = 3;
    let v = json_of(c, "oracle");
    assert_eq!(v["formulas"], v["agreements"]);
    let v = json_of(RunConfig::new(Command::Oracle).with_formula("p -> []p"), "oracle");
    assert_eq!(v["agree"], true);
}

#[test]
fn tower_calculator() {
    let (code, out, _) = exec(&RunConfig::new(Command::Tower).with_formula("logstar(65536)"));
    assert_eq!((code, out.as_str()), (EXIT_OK, "5\n"));
    let (_, out, _) = exec(&RunConfig::new(Command::Tower).with_formula("logstar(expstar(9)-1)"));
    assert_eq!(out, "8\n");
    json_of(RunConfig::new(Command::Tower).with_formula("exp(expstar(7))"), "tower");
    let mut c = RunConfig::new(Command::Tower).with_formula("exp(20)");
    c.bit_budget = Some(8);
    assert_eq!(exec(&c).0, EXIT_INPUT);
}

#[test]
fn golden_corpus() {
    let dir = crate_dir().join("corpus");
    let case_schema = schema("corpus-case");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert!(case_schema.is_valid(&doc), "{}", path.display());
    }
    assert!(!case_schema.is_valid(&serde_json::json!({"formula": "p", "expect": "maybe"})));
    assert!(!schema("evaluate").is_valid(&serde_json::json!({"formula": "p"})));
    assert!(!schema("prove").is_valid(&serde_json::json!({"formula": "p", "status": "provable", "checked": true})));
    assert!(load_corpus(&dir).unwrap().len() >= 10);
    for command in [Command::Prove, Command::Evaluate] {
        let mut c = RunConfig::new(command);
        c.corpus = Some(dir.clone());
        let v = json_of(c, "corpus-report");
        assert_eq!(v["failed"], 0, "{v}");
    }
}

#[test]
fn corpus_mismatches_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("wrong.json"),
        r#"{"formula": "[]p -> p", "expect": "provable"}"#,
    )
    .unwrap();
    let mut c = RunConfig::new(Command::Prove);
    c.corpus = Some(tmp.path().to_path_buf());
    assert_eq!(exec(&c).0, EXIT_MISMATCH);
}

fn binary() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_glkit"))
}

#[test]
fn binary_exit_codes() {
    let out = Proc::new(binary())
        .args(["prove", TWO_DIAMONDS, "--expect", "unprovable", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["model"]["parents"], serde_json::json!([null, 0, 0]));

    let out = Proc::new(binary()).args(["evaluate", "[]p->[][]p"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Proc::new(binary()).args(["tower", "logstar(65536)"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "5\n");

    let out = Proc::new(binary())
        .args(["tower", "exp(20)"])
        .env("GLKIT_BIT_BUDGET", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Proc::new(binary()).args(["oracle", "--max-worlds", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
