//! Arithmetical evaluations of refuted formulas: per-world sentences `C_a`,
//! `F_a` and the map `f` from modal to arithmetic formulas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{
    box_n, diamond_n, print_arith, provable, quote, ArithFormat, ArithFormula, ArithTerm, TheoryId,
};
use crate::kripke::{TreeModel, World};
use crate::modal::ModalFormula;

/// `C_{b_i}` for a non-last successor: the least inconsistency proof of
/// `T_k` has `log*` residue `residue`, and `T_witness` has an
/// inconsistency proof below `exp(exp(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedC {
    pub parent_theory: TheoryId,
    pub residue: u64,
    pub modulus: u64,
    /// `None` once the simplifier has dropped the witness conjunct.
    pub witness_theory: Option<TheoryId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CAnnotation {
    Root,
    Indexed(IndexedC),
    Last {
        parent_theory: TheoryId,
        box_level: usize,
        negated_siblings: Vec<IndexedC>,
    },
    /// A `Last` sentence rewritten to the residue form with `residue = n`.
    LastResidue(IndexedC),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WorldSentences {
    pub world: World,
    pub height: usize,
    pub annotation: CAnnotation,
    pub c: ArithFormula,
    pub f: ArithFormula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvaluationKit {
    pub model: TreeModel,
    pub worlds: Vec<WorldSentences>,
    pub simplified: bool,
}

fn least_proof(k: TheoryId) -> ArithFormula {
    let bot = quote(&ArithFormula::bot());
    ArithFormula::and(
        ArithFormula::prf(k, ArithTerm::var("x"), bot.clone()),
        ArithFormula::bounded_forall(
            "y",
            ArithTerm::var("x"),
            ArithFormula::not(ArithFormula::prf(k, ArithTerm::var("y"), bot)),
        ),
    )
}

fn indexed_sentence(c: &IndexedC) -> ArithFormula {
    let mut body = ArithFormula::and(
        least_proof(c.parent_theory),
        ArithFormula::CongMod {
            term: ArithTerm::log_star(ArithTerm::var("x")),
            residue: c.residue,
            modulus: c.modulus,
        },
    );
    if let Some(w) = c.witness_theory {
        let bound = ArithTerm::exp(ArithTerm::exp(ArithTerm::var("x")));
        let witness = ArithFormula::prf(w, ArithTerm::var("y"), quote(&ArithFormula::bot()));
        body = ArithFormula::and(body, ArithFormula::bounded_exists("y", bound, witness));
    }
    ArithFormula::exists("x", body)
}

/// The sentence an annotation stands for.
pub fn annotation_sentence(a: &CAnnotation) -> ArithFormula {
    match a {
        CAnnotation::Root => ArithFormula::top(),
        CAnnotation::Indexed(c) | CAnnotation::LastResidue(c) => indexed_sentence(c),
        CAnnotation::Last {
            box_level,
            negated_siblings,
            ..
        } => ArithFormula::conj(
            std::iter::once(box_n(*box_level, &ArithFormula::bot())).chain(
                negated_siblings
                    .iter()
                    .map(|c| ArithFormula::not(indexed_sentence(c))),
            ),
        ),
    }
}

fn f_sentence(annotations: &[CAnnotation], model: &TreeModel, a: World, drop_top: bool) -> ArithFormula {
    let frame = &model.frame;
    let path = frame.path_from_root(a).expect("world exists");
    let parts = path
        .iter()
        .map(|&b| annotation_sentence(&annotations[b]))
        .chain(std::iter::once(diamond_n(frame.heights()[a], &ArithFormula::top())));
    if drop_top {
        ArithFormula::conj(parts.filter(|p| !p.is_top()))
    } else {
        ArithFormula::conj(parts)
    }
}

fn assemble(model: &TreeModel, annotations: Vec<CAnnotation>, simplified: bool) -> EvaluationKit {
    let heights = model.frame.heights();
    let worlds = model
        .frame
        .worlds()
        .map(|w| WorldSentences {
            world: w,
            height: heights[w],
            c: annotation_sentence(&annotations[w]),
            f: f_sentence(&annotations, model, w, simplified),
            annotation: annotations[w].clone(),
        })
        .collect();
    EvaluationKit {
        model: model.clone(),
        worlds,
        simplified,
    }
}

/// Assigns `C_a` and `F_a` to every world of `model`.
pub fn build_kit(model: &TreeModel) -> EvaluationKit {
    let frame = &model.frame;
    let heights = frame.heights();
    let mut annotations = vec![CAnnotation::Root; frame.len()];
    for a in frame.worlds() {
        if frame.is_leaf(a).expect("world exists") {
            continue;
        }
        let succ = frame.ordered_successors(a).expect("inner world");
        let (&last, rest) = succ.split_last().expect("inner worlds have successors");
        let parent_theory = TheoryId(heights[a] - 1);
        let modulus = succ.len() as u64;
        let siblings: Vec<IndexedC> = rest
            .iter()
            .enumerate()
            .map(|(i, &b)| IndexedC {
                parent_theory,
                residue: i as u64,
                modulus,
                witness_theory: Some(TheoryId(heights[b])),
            })
            .collect();
        for (&b, c) in rest.iter().zip(&siblings) {
            annotations[b] = CAnnotation::Indexed(c.clone());
        }
        annotations[last] = CAnnotation::Last {
            parent_theory,
            box_level: heights[a],
            negated_siblings: siblings,
        };
    }
    assemble(model, annotations, false)
}

/// Rewrites the kit into the shorter form of the worked example: witness
/// conjuncts that the least proof already provides are dropped, a last
/// sentence whose siblings all lost their witness becomes a residue
/// sentence, and `0=0` conjuncts disappear from `F_a`.
pub fn simplify_kit(kit: &EvaluationKit) -> EvaluationKit {
    let drop = |c: &IndexedC| {
        let mut c = c.clone();
        if c.witness_theory == Some(c.parent_theory) {
            c.witness_theory = None;
        }
        c
    };
    let annotations = kit
        .worlds
        .iter()
        .map(|w| match &w.annotation {
            CAnnotation::Indexed(c) => CAnnotation::Indexed(drop(c)),
            CAnnotation::Last {
                parent_theory,
                box_level,
                negated_siblings,
            } => {
                let siblings: Vec<IndexedC> = negated_siblings.iter().map(drop).collect();
                if !siblings.is_empty() && siblings.iter().all(|c| c.witness_theory.is_none()) {
                    CAnnotation::LastResidue(IndexedC {
                        parent_theory: *parent_theory,
                        residue: siblings.len() as u64,
                        modulus: siblings.len() as u64 + 1,
                        witness_theory: None,
                    })
                } else {
                    CAnnotation::Last {
                        parent_theory: *parent_theory,
                        box_level: *box_level,
                        negated_siblings: siblings,
                    }
                }
            }
            other => other.clone(),
        })
        .collect();
    assemble(&kit.model, annotations, true)
}

/// The arithmetical evaluation `f` induced by the kit.
pub fn evaluate_formula(kit: &EvaluationKit, psi: &ModalFormula) -> ArithFormula {
    use ModalFormula as M;
    let rec = |p: &ModalFormula| evaluate_formula(kit, p);
    match psi {
        M::Top => ArithFormula::top(),
        M::Bot => ArithFormula::bot(),
        M::Var(v) => ArithFormula::disj(
            kit.worlds
                .iter()
                .filter(|w| kit.model.holds_at(v, w.world))
                .map(|w| w.f.clone()),
        ),
        M::Not(a) => ArithFormula::not(rec(a)),
        M::And(a, b) => ArithFormula::and(rec(a), rec(b)),
        M::Or(a, b) => ArithFormula::or(rec(a), rec(b)),
        M::Imp(a, b) => ArithFormula::imp(rec(a), rec(b)),
        M::Box(a) => provable(&rec(a)),
        M::Dia(a) => ArithFormula::not(provable(&ArithFormula::not(rec(a)))),
    }
}

/// Regenerating every sentence from its annotation reproduces the stored
/// `C_a`, and each `F_a` has the documented shape.
pub fn check_coherence(kit: &EvaluationKit) -> bool {
    let annotations: Vec<CAnnotation> = kit.worlds.iter().map(|w| w.annotation.clone()).collect();
    kit.worlds.iter().all(|w| {
        annotation_sentence(&w.annotation) == w.c
            && f_sentence(&annotations, &kit.model, w.world, kit.simplified) == w.f
    }) && matches!(kit.worlds.first(), Some(w) if w.c.is_top())
}

/// `∃x M` where `M` has only bounded quantifiers.
pub fn is_sigma1_shape(phi: &ArithFormula) -> bool {
    fn bounded_only(f: &ArithFormula) -> bool {
        use ArithFormula::*;
        match f {
            Eq(..) | Less(..) | Leq(..) | CongMod { .. } | PrfAt { .. } => true,
            Not(a) => bounded_only(a),
            And(a, b) | Or(a, b) | Imp(a, b) => bounded_only(a) && bounded_only(b),
            ForAll(..) | Exists(..) => false,
            BoundedForAll { body, .. } | BoundedExists { body, .. } => bounded_only(body),
        }
    }
    matches!(phi, ArithFormula::Exists(_, body) if bounded_only(body))
}

/// Structural invariants of a kit; returns a description of the first
/// violation.
pub fn check_invariants(kit: &EvaluationKit) -> Result<(), String> {
    if !check_coherence(kit) {
        return Err("annotation and syntax disagree".into());
    }
    let frame = &kit.model.frame;
    for a in frame.worlds() {
        if frame.is_leaf(a).expect("world exists") {
            continue;
        }
        let succ = frame.ordered_successors(a).expect("inner world");
        let lasts = succ
            .iter()
            .filter(|&&b| {
                matches!(
                    kit.worlds[b].annotation,
                    CAnnotation::Last { .. } | CAnnotation::LastResidue(_)
                )
            })
            .count();
        if lasts != 1 {
            return Err(format!("world {a} has {lasts} last successors"));
        }
        let mut residues = Vec::new();
        for &b in &succ {
            match &kit.worlds[b].annotation {
                CAnnotation::Indexed(c) | CAnnotation::LastResidue(c) => {
                    if !is_sigma1_shape(&kit.worlds[b].c) {
                        return Err(format!("C of world {b} is not Σ1-shaped"));
                    }
                    if c.residue >= c.modulus || c.modulus != succ.len() as u64 {
                        return Err(format!("bad residue at world {b}"));
                    }
                    if c.witness_theory.is_some_and(|w| w > c.parent_theory) {
                        return Err(format!("witness above parent theory at world {b}"));
                    }
                    residues.push(c.residue);
                }
                CAnnotation::Last {
                    parent_theory,
                    box_level,
                    ..
                } => {
                    if *box_level != parent_theory.0 + 1 {
                        return Err(format!("box level mismatch at world {b}"));
                    }
                }
                CAnnotation::Root => return Err(format!("successor {b} annotated as root")),
            }
        }
        let distinct: std::collections::BTreeSet<_> = residues.iter().collect();
        if distinct.len() != residues.len() {
            return Err(format!("repeated residue among successors of {a}"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Rendered {
    pub ascii: String,
    pub latex: String,
}

impl Rendered {
    pub fn of(phi: &ArithFormula) -> Self {
        Rendered {
            ascii: print_arith(phi, ArithFormat::Ascii),
            latex: print_arith(phi, ArithFormat::Latex),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderedC {
    pub ascii: String,
    pub latex: String,
    pub annotation: CAnnotation,
}

#[derive(Clone, Debug, Serialize)]
pub struct DossierWorld {
    pub id: World,
    pub height: usize,
    #[serde(rename = "C")]
    pub c: RenderedC,
    #[serde(rename = "F")]
    pub f: Rendered,
}

/// Everything the evaluation of one refuted formula consists of.
#[derive(Clone, Debug, Serialize)]
pub struct Dossier {
    pub formula: String,
    pub simplified: bool,
    pub model: TreeModel,
    pub worlds: Vec<DossierWorld>,
    pub f: BTreeMap<String, Rendered>,
    pub f_formula: Rendered,
}

pub fn dossier(kit: &EvaluationKit, phi: &ModalFormula) -> Dossier {
    let worlds = kit
        .worlds
        .iter()
        .map(|w| DossierWorld {
            id: w.world,
            height: w.height,
            c: RenderedC {
                ascii: print_arith(&w.c, ArithFormat::Ascii),
                latex: print_arith(&w.c, ArithFormat::Latex),
                annotation: w.annotation.clone(),
            },
            f: Rendered::of(&w.f),
        })
        .collect();
    let f = phi
        .variables()
        .into_iter()
        .map(|v| {
            let value = evaluate_formula(kit, &ModalFormula::Var(v.clone()));
            (v, Rendered::of(&value))
        })
        .collect();
    Dossier {
        formula: phi.to_string(),
        simplified: kit.simplified,
        model: kit.model.clone(),
        worlds,
        f,
        f_formula: Rendered::of(&evaluate_formula(kit, phi)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::TreeFrame;
    use std::collections::BTreeSet;

    fn model(parents: &[Option<usize>], val: &[(&str, &[usize])]) -> TreeModel {
        let frame = TreeFrame::from_parents(parents.to_vec()).unwrap();
        let valuation = val
            .iter()
            .map(|(v, ws)| (v.to_string(), ws.iter().copied().collect::<BTreeSet<_>>()))
            .collect();
        TreeModel::new(frame, valuation).unwrap()
    }

    fn two_leaves() -> TreeModel {
        model(&[None, Some(0), Some(0)], &[("v", &[1]), ("u", &[2])])
    }

    fn ascii(f: &ArithFormula) -> String {
        print_arith(f, ArithFormat::Ascii)
    }

    #[test]
    fn single_world() {
        let kit = build_kit(&model(&[None], &[]));
        assert_eq!(ascii(&kit.worlds[0].c), "0=0");
        assert_eq!(ascii(&kit.worlds[0].f), "0=0 & 0=0");
        assert!(check_invariants(&kit).is_ok());
    }

    #[test]
    fn two_leaf_annotations() {
        let kit = build_kit(&two_leaves());
        assert_eq!(
            kit.worlds[1].annotation,
            CAnnotation::Indexed(IndexedC {
                parent_theory: TheoryId(0),
                residue: 0,
                modulus: 2,
                witness_theory: Some(TheoryId(0)),
            })
        );
        assert!(matches!(kit.worlds[2].annotation, CAnnotation::Last { box_level: 1, .. }));
        assert!(check_invariants(&kit).is_ok());
    }

    #[test]
    fn chain_gets_boxes() {
        let kit = build_kit(&model(&[None, Some(0), Some(1)], &[]));
        assert_eq!(kit.worlds[1].c, box_n(2, &ArithFormula::bot()));
        assert_eq!(kit.worlds[2].c, box_n(1, &ArithFormula::bot()));
        let simple = simplify_kit(&kit);
        assert_eq!(simple.worlds[1].c, kit.worlds[1].c);
        assert!(check_invariants(&simple).is_ok());
    }

    #[test]
    fn worked_example_evaluation() {
        let kit = simplify_kit(&build_kit(&two_leaves()));
        let fv = evaluate_formula(&kit, &ModalFormula::var("v"));
        let fu = evaluate_formula(&kit, &ModalFormula::var("u"));
        assert_eq!(
            ascii(&fv),
            "exists x.(Prf(x,[0=1]) & forall y < x.~Prf(y,[0=1]) & logstar(x) === 0 (mod 2))"
        );
        assert_eq!(
            ascii(&fu),
            "exists x.(Prf(x,[0=1]) & forall y < x.~Prf(y,[0=1]) & logstar(x) === 1 (mod 2))"
        );
        let both = ModalFormula::and(ModalFormula::var("v"), ModalFormula::var("u"));
        assert_eq!(evaluate_formula(&kit, &both), ArithFormula::and(fv.clone(), fu.clone()));
        let dia = evaluate_formula(&kit, &ModalFormula::dia(both));
        assert_eq!(dia, ArithFormula::not(provable(&ArithFormula::not(ArithFormula::and(fv, fu)))));
        assert!(check_invariants(&kit).is_ok());
    }

    #[test]
    fn simplifier_leaves_lower_witnesses() {
        // root with a leaf and a two-chain: heights 2, 0, 1, 0
        let kit = build_kit(&model(&[None, Some(0), Some(0), Some(2)], &[]));
        let simple = simplify_kit(&kit);
        let CAnnotation::Indexed(c) = &simple.worlds[1].annotation else {
            panic!("leaf is indexed");
        };
        assert_eq!(c.witness_theory, Some(TheoryId(0)));
        assert_eq!(simple.worlds[1].c, kit.worlds[1].c);
        assert!(check_invariants(&simple).is_ok());
    }

    #[test]
    fn homomorphic_clauses() {
        let kit = build_kit(&two_leaves());
        let v = ModalFormula::var("v");
        let u = ModalFormula::var("u");
        let fv = evaluate_formula(&kit, &v);
        let fu = evaluate_formula(&kit, &u);
        assert_eq!(evaluate_formula(&kit, &ModalFormula::and(v.clone(), u.clone())), ArithFormula::and(fv.clone(), fu.clone()));
        assert_eq!(evaluate_formula(&kit, &ModalFormula::imp(v.clone(), u.clone())), ArithFormula::imp(fv.clone(), fu));
        assert_eq!(evaluate_formula(&kit, &ModalFormula::Top), ArithFormula::top());
        assert_eq!(evaluate_formula(&kit, &ModalFormula::Bot), ArithFormula::bot());
        assert_eq!(evaluate_formula(&kit, &ModalFormula::var("w")), ArithFormula::bot());
        assert_eq!(evaluate_formula(&kit, &ModalFormula::boxed(v)), provable(&fv));
    }
}
