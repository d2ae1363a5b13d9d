//! Brute-force referees for the prover.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kripke::{enumerate_frames, enumerate_models, forces, TreeFrame, TreeModel, World};
use crate::modal::ModalFormula;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleVerdict {
    RefutedBy { model: TreeModel },
    NoCountermodelUpTo { max_worlds: usize },
}

/// Scans every model with at most `max_worlds` worlds over the variables of
/// `phi` and returns the first one refuting `phi` at its root.
pub fn oracle_decide(phi: &ModalFormula, max_worlds: usize) -> OracleVerdict {
    assert!(max_worlds >= 1, "max_worlds must be positive");
    let vars: Vec<String> = phi.variables().into_iter().collect();
    for model in enumerate_models(max_worlds, &vars) {
        let root = model.frame.root();
        if !forces(&model, root, phi).expect("root exists") {
            return OracleVerdict::RefutedBy { model };
        }
    }
    OracleVerdict::NoCountermodelUpTo { max_worlds }
}

/// Truth values of a formula at every world of every model in a
/// [`ModelBank`], one bit per (frame, world, valuation).
pub type Signature = Box<[u64]>;

struct Block {
    frame: usize,
    offset: usize,
    descendants: Vec<usize>,
}

/// Every model with at most `max_worlds` worlds over a fixed variable list,
/// evaluated bit-parallel. Within a frame the valuations are numbered as in
/// [`enumerate_models`], and each world owns a word-aligned block indexed
/// by valuation, so modal operators become word-wise folds over blocks.
pub struct ModelBank {
    vars: Vec<String>,
    frames: Vec<TreeFrame>,
    /// `blocks_of[f][w]` indexes `blocks`.
    blocks_of: Vec<Vec<usize>>,
    blocks: Vec<Block>,
    block_words: Vec<usize>,
    words: usize,
    atoms: Vec<Signature>,
    root_mask: Signature,
}

impl ModelBank {
    pub fn new(max_worlds: usize, vars: &[String]) -> Self {
        let frames = enumerate_frames(max_worlds);
        let v = vars.len();
        assert!(max_worlds * v <= 20, "bank would be too large");
        let mut blocks = Vec::new();
        let mut blocks_of = Vec::new();
        let mut block_words = Vec::new();
        let mut words = 0;
        for (fi, frame) in frames.iter().enumerate() {
            let vals = 1usize << (frame.len() * v);
            let per = vals.div_ceil(64);
            block_words.push(per);
            let first = blocks.len();
            for w in frame.worlds() {
                let descendants = frame
                    .descendants(w)
                    .expect("world exists")
                    .into_iter()
                    .map(|d| first + d)
                    .collect();
                blocks.push(Block {
                    frame: fi,
                    offset: words,
                    descendants,
                });
                words += per;
            }
            blocks_of.push((first..first + frame.len()).collect());
        }
        let mut bank = ModelBank {
            vars: vars.to_vec(),
            frames,
            blocks_of,
            blocks,
            block_words,
            words,
            atoms: Vec::new(),
            root_mask: Box::default(),
        };
        bank.atoms = (0..v).map(|k| bank.build_atom(k)).collect();
        let mut mask = bank.zeros();
        for (fi, frame) in bank.frames.iter().enumerate() {
            let vals = 1usize << (frame.len() * v);
            let b = &bank.blocks[bank.blocks_of[fi][frame.root()]];
            for val in 0..vals {
                mask[b.offset + val / 64] |= 1 << (val % 64);
            }
        }
        bank.root_mask = mask;
        bank
    }

    fn zeros(&self) -> Signature {
        vec![0; self.words].into_boxed_slice()
    }

    fn build_atom(&self, k: usize) -> Signature {
        let v = self.vars.len();
        let mut sig = self.zeros();
        for b in &self.blocks {
            let frame = &self.frames[b.frame];
            let w = self.blocks_of[b.frame]
                .iter()
                .position(|&x| std::ptr::eq(&self.blocks[x], b))
                .expect("block belongs to its frame");
            let vals = 1usize << (frame.len() * v);
            for val in 0..vals {
                if val >> (w * v + k) & 1 == 1 {
                    sig[b.offset + val / 64] |= 1 << (val % 64);
                }
            }
        }
        sig
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn model_count(&self) -> usize {
        let v = self.vars.len();
        self.frames.iter().map(|f| 1usize << (f.len() * v)).sum()
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn atom(&self, k: usize) -> Signature {
        self.atoms[k].clone()
    }

    pub fn not(&self, a: &[u64]) -> Signature {
        a.iter().map(|x| !x).collect()
    }

    pub fn and(&self, a: &[u64], b: &[u64]) -> Signature {
        a.iter().zip(b).map(|(x, y)| x & y).collect()
    }

    pub fn or(&self, a: &[u64], b: &[u64]) -> Signature {
        a.iter().zip(b).map(|(x, y)| x | y).collect()
    }

    pub fn imp(&self, a: &[u64], b: &[u64]) -> Signature {
        a.iter().zip(b).map(|(x, y)| !x | y).collect()
    }

    fn modal(&self, a: &[u64], universal: bool) -> Signature {
        let mut out = self.zeros();
        for b in &self.blocks {
            let per = self.block_words[b.frame];
            let dst = &mut out[b.offset..b.offset + per];
            dst.fill(if universal { !0 } else { 0 });
            for &d in &b.descendants {
                let src = &a[self.blocks[d].offset..self.blocks[d].offset + per];
                for (x, y) in dst.iter_mut().zip(src) {
                    if universal {
                        *x &= y;
                    } else {
                        *x |= y;
                    }
                }
            }
        }
        out
    }

    pub fn boxed(&self, a: &[u64]) -> Signature {
        self.modal(a, true)
    }

    pub fn dia(&self, a: &[u64]) -> Signature {
        self.modal(a, false)
    }

    /// Signature of `phi`, whose variables must all be in the bank.
    pub fn signature(&self, phi: &ModalFormula) -> Signature {
        use ModalFormula as M;
        match phi {
            M::Top => vec![!0; self.words].into_boxed_slice(),
            M::Bot => self.zeros(),
            M::Var(name) => self.atom(
                self.vars
                    .iter()
                    .position(|v| v == name)
                    .unwrap_or_else(|| panic!("variable {name} not in the bank")),
            ),
            M::Not(a) => self.not(&self.signature(a)),
            M::And(a, b) => self.and(&self.signature(a), &self.signature(b)),
            M::Or(a, b) => self.or(&self.signature(a), &self.signature(b)),
            M::Imp(a, b) => self.imp(&self.signature(a), &self.signature(b)),
            M::Box(a) => self.boxed(&self.signature(a)),
            M::Dia(a) => self.dia(&self.signature(a)),
        }
    }

    /// True at the root of every model in the bank.
    pub fn valid(&self, sig: &[u64]) -> bool {
        sig.iter().zip(self.root_mask.iter()).all(|(s, m)| s & m == *m)
    }

    /// The first model in enumeration order whose root falsifies `sig`.
    pub fn first_refuting(&self, sig: &[u64]) -> Option<TreeModel> {
        let v = self.vars.len();
        for (fi, frame) in self.frames.iter().enumerate() {
            let b = &self.blocks[self.blocks_of[fi][frame.root()]];
            let vals = 1usize << (frame.len() * v);
            for val in 0..vals {
                if sig[b.offset + val / 64] >> (val % 64) & 1 == 0 {
                    return Some(self.model(fi, val));
                }
            }
        }
        None
    }

    fn model(&self, fi: usize, val: usize) -> TreeModel {
        let frame = self.frames[fi].clone();
        let v = self.vars.len();
        let mut valuation: BTreeMap<String, BTreeSet<World>> =
            self.vars.iter().map(|x| (x.clone(), BTreeSet::new())).collect();
        for w in frame.worlds() {
            for (k, name) in self.vars.iter().enumerate() {
                if val >> (w * v + k) & 1 == 1 {
                    valuation.get_mut(name).expect("known").insert(w);
                }
            }
        }
        TreeModel::new(frame, valuation).expect("valid valuation")
    }
}

/// A formula on which the prover and the bounded referee disagree.
#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub formula: ModalFormula,
    pub prover_says_provable: bool,
    /// Size of the prover's countermodel, when it produced one.
    pub countermodel_worlds: Option<usize>,
    /// The prover's countermodel refutes the formula under `forces`.
    pub countermodel_verified: bool,
}

/// Outcome of comparing the prover with a [`ModelBank`] on every formula
/// of a family.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub max_connectives: usize,
    pub max_worlds: usize,
    pub formulas: u64,
    pub provable: u64,
    pub disagreements: Vec<Disagreement>,
    /// Prover countermodels re-checked with `forces`, when requested.
    pub refutations_checked: u64,
    /// Formulas whose prover countermodel does not refute them.
    pub refutations_failed: Vec<ModalFormula>,
}

impl SweepReport {
    pub fn agreements(&self) -> u64 {
        self.formulas - self.disagreements.len() as u64
    }

    /// Disagreements explained by the bound: the prover's countermodel is
    /// genuine but larger than any model the referee looks at.
    pub fn explained_by_bound(&self) -> usize {
        self.disagreements
            .iter()
            .filter(|d| {
                !d.prover_says_provable
                    && d.countermodel_verified
                    && d.countermodel_worlds.is_some_and(|n| n > self.max_worlds)
            })
            .count()
    }
}

type Sink<'a> = dyn FnMut(&ModalFormula, &[u64]) + 'a;

/// Every formula built from the bank's variables with the connectives
/// `¬ ∧ ∨ → □ ◇` (no constants), grouped by number of connectives.
struct Family<'b> {
    bank: &'b ModelBank,
    memo: Vec<Vec<(ModalFormula, Signature)>>,
}

impl<'b> Family<'b> {
    fn new(bank: &'b ModelBank, memo_depth: usize) -> Self {
        let mut fam = Family {
            bank,
            memo: Vec::new(),
        };
        for n in 0..=memo_depth {
            let mut level = Vec::new();
            fam.each(n, &mut |f, s| level.push((f.clone(), s.to_vec().into_boxed_slice())));
            fam.memo.push(level);
        }
        fam
    }

    fn each(&self, n: usize, sink: &mut Sink<'_>) {
        if let Some(level) = self.memo.get(n) {
            for (f, s) in level {
                sink(f, s);
            }
            return;
        }
        let bank = self.bank;
        if n == 0 {
            for (k, name) in bank.vars.iter().enumerate() {
                sink(&ModalFormula::Var(name.clone()), &bank.atoms[k]);
            }
            return;
        }
        self.each(n - 1, &mut |f, s| {
            sink(&ModalFormula::not(f.clone()), &bank.not(s));
            sink(&ModalFormula::boxed(f.clone()), &bank.boxed(s));
            sink(&ModalFormula::dia(f.clone()), &bank.dia(s));
        });
        for i in 0..n {
            let j = n - 1 - i;
            let emit = |sink: &mut Sink<'_>, a: &ModalFormula, sa: &[u64], b: &ModalFormula, sb: &[u64]| {
                sink(&ModalFormula::and(a.clone(), b.clone()), &bank.and(sa, sb));
                sink(&ModalFormula::or(a.clone(), b.clone()), &bank.or(sa, sb));
                sink(&ModalFormula::imp(a.clone(), b.clone()), &bank.imp(sa, sb));
            };
            if i < self.memo.len() && j < self.memo.len() {
                for (a, sa) in &self.memo[i] {
                    for (b, sb) in &self.memo[j] {
                        emit(sink, a, sa, b, sb);
                    }
                }
            } else if j < self.memo.len() {
                self.each(i, &mut |a, sa| {
                    for (b, sb) in &self.memo[j] {
                        emit(sink, a, sa, b, sb);
                    }
                });
            } else if i < self.memo.len() {
                for (a, sa) in &self.memo[i] {
                    self.each(j, &mut |b, sb| emit(sink, a, sa, b, sb));
                }
            } else {
                self.each(i, &mut |a, sa| self.each(j, &mut |b, sb| emit(sink, a, sa, b, sb)));
            }
        }
    }
}

/// Number of formulas with exactly `n` connectives over `v` variables.
pub fn family_size(n: usize, v: u64) -> u64 {
    let mut a = vec![v];
    for k in 1..=n {
        let binary: u64 = (0..k).map(|i| a[i] * a[k - 1 - i]).sum();
        a.push(3 * a[k - 1] + 3 * binary);
    }
    a[n]
}

/// Compares [`crate::prover::is_provable`] with the bounded referee on
/// every formula with at most `max_connectives` connectives. With
/// `verify_refutations` every refuted formula also gets its countermodel
/// built and model-checked. `progress` is called with the running formula
/// count every million formulas.
pub fn agreement_sweep(
    max_connectives: usize,
    vars: &[String],
    max_worlds: usize,
    verify_refutations: bool,
    progress: &mut dyn FnMut(u64),
) -> SweepReport {
    let bank = ModelBank::new(max_worlds, vars);
    let memo_depth = max_connectives.saturating_sub(3).min(3);
    let family = Family::new(&bank, memo_depth);
    let mut report = SweepReport {
        max_connectives,
        max_worlds,
        ..SweepReport::default()
    };
    for n in 0..=max_connectives {
        family.each(n, &mut |f, sig| {
            report.formulas += 1;
            if report.formulas % 1_000_000 == 0 {
                progress(report.formulas);
            }
            let by_prover = crate::prover::is_provable(f);
            report.provable += by_prover as u64;
            if by_prover != bank.valid(sig) {
                report.disagreements.push(explain(f, by_prover));
            }
            if verify_refutations && !by_prover {
                report.refutations_checked += 1;
                let refutes = match crate::prover::prove(f) {
                    crate::prover::Verdict::Refuted { model } => {
                        !forces(&model, model.frame.root(), f).expect("root exists")
                    }
                    crate::prover::Verdict::Provable { .. } => false,
                };
                if !refutes {
                    report.refutations_failed.push(f.clone());
                }
            }
        });
    }
    report
}

fn explain(f: &ModalFormula, by_prover: bool) -> Disagreement {
    let (countermodel_worlds, countermodel_verified) = match crate::prover::prove(f) {
        crate::prover::Verdict::Refuted { model } => {
            let ok = !forces(&model, model.frame.root(), f).expect("root exists");
            (Some(model.frame.len()), ok)
        }
        crate::prover::Verdict::Provable { .. } => (None, false),
    };
    Disagreement {
        formula: f.clone(),
        prover_says_provable: by_prover,
        countermodel_worlds,
        countermodel_verified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::parse_modal;

    fn phi(s: &str) -> ModalFormula {
        parse_modal(s).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(
            oracle_decide(&phi("[]p->[][]p"), 4),
            OracleVerdict::NoCountermodelUpTo { max_worlds: 4 }
        );
        assert_eq!(
            oracle_decide(&phi("T"), 1),
            OracleVerdict::NoCountermodelUpTo { max_worlds: 1 }
        );
        let OracleVerdict::RefutedBy { model } = oracle_decide(&phi("p->[]p"), 2) else {
            panic!("p->[]p is refutable");
        };
        assert_eq!(model.frame.parents(), &[None, Some(0)]);
        assert_eq!(model.valuation()["p"], BTreeSet::from([0]));
    }

    #[test]
    fn family_is_enumerated_once_each() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let bank = ModelBank::new(2, &vars);
        for memo in 0..=2 {
            let fam = Family::new(&bank, memo);
            for n in 0..=4 {
                let mut seen = BTreeSet::new();
                let mut count = 0u64;
                fam.each(n, &mut |f, s| {
                    assert_eq!(f.connectives(), n);
                    assert_eq!(&*bank.signature(f), s);
                    seen.insert(f.clone());
                    count += 1;
                });
                assert_eq!(count, family_size(n, 2));
                assert_eq!(seen.len() as u64, count);
            }
        }
        assert_eq!(family_size(6, 2), 54_346_950);
    }

    #[test]
    fn small_sweep_agrees() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let report = agreement_sweep(3, &vars, 5, true, &mut |_| {});
        assert_eq!(report.formulas, (0..=3).map(|n| family_size(n, 2)).sum::<u64>());
        assert!(report.disagreements.is_empty());
    }

    #[test]
    fn deep_boxes_need_more_worlds_than_the_bound() {
        let vars = vec!["p".to_string()];
        let report = agreement_sweep(5, &vars, 5, false, &mut |_| {});
        let bad: Vec<String> = report.disagreements.iter().map(|d| d.formula.to_string()).collect();
        assert!(bad.contains(&"[][][][][]p".to_string()), "{bad:?}");
        assert_eq!(report.explained_by_bound(), report.disagreements.len());
    }

    #[test]
    fn bank_layout() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let bank = ModelBank::new(5, &vars);
        assert_eq!(bank.words(), 793);
        assert_eq!(bank.model_count(), 4 + 16 + 2 * 64 + 4 * 256 + 9 * 1024);
    }

    #[test]
    fn bank_matches_naive_scan() {
        let vars = vec!["p".to_string(), "q".to_string()];
        let bank = ModelBank::new(3, &vars);
        for s in [
            "[]p->[][]p",
            "p->[]p",
            "<>p & <>q -> <>(p & q)",
            "[]([]p->p)->[]p",
            "<><>T",
            "~<>~p | []F",
            "[](p|q) -> []p | []q",
        ] {
            let f = phi(s);
            let sig = bank.signature(&f);
            let naive = match oracle_decide(&f, 3) {
                OracleVerdict::RefutedBy { model } => Some(model),
                OracleVerdict::NoCountermodelUpTo { .. } => None,
            };
            let banked = bank.first_refuting(&sig);
            assert_eq!(bank.valid(&sig), naive.is_none(), "{s}");
            // both scans visit models in the same order; compare up to
            // variables the formula does not mention
            if let (Some(a), Some(b)) = (naive, banked) {
                assert_eq!(a.frame, b.frame, "{s}");
                for (name, worlds) in a.valuation() {
                    assert_eq!(&b.valuation()[name], worlds, "{s}");
                }
            }
        }
    }
}
