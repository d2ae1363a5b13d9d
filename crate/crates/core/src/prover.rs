//! Decision procedure for GL by backward search in a cut-free sequent
//! calculus.
//!
//! Sequents are pairs of finite sets of formulas. Propositional rules are
//! used in their cumulative form (the principal formula stays in the
//! premise), so a saturated open branch is a Hintikka set and reads off
//! directly as a world of a countermodel. The modal rule is the GL rule
//!
//! ```text
//!   Γ, □Γ, □B ⇒ B
//! -------------------
//!  Θ, □Γ ⇒ □B, Λ
//! ```
//!
//! `◇A` is handled by definitional rules that trade it for `□¬A` on the
//! opposite side.
//!
//! Search is terminating: an application of the GL rule to `□B ∉ Γ` strictly
//! enlarges the set of boxed formulas on the left, and when some `□B` sits
//! on both sides the rule is applied to the smallest such formula, whose
//! premise is an identity on a strictly smaller formula.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::kripke::{TreeFrame, TreeModel, World};
use crate::modal::ModalFormula;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bot,
    Atom(String),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Imp(u32, u32),
    Box(u32),
    /// `◇A`, with the index of `A` and of its unfolding `□¬A`.
    Dia { inner: u32, box_not: u32 },
}

/// The formulas a proof search for a fixed goal can touch: its subformulas
/// plus `¬A` and `□¬A` for every `◇A`. Indices follow a left-to-right
/// post-order traversal of the goal, so every formula comes after its
/// components; the search always works on the lowest index available.
struct Closure {
    nodes: Vec<Node>,
    sizes: Vec<u32>,
    index: HashMap<Node, u32>,
}

impl Closure {
    fn new(goal: &ModalFormula) -> (Self, u32) {
        let mut c = Closure {
            nodes: Vec::new(),
            sizes: Vec::new(),
            index: HashMap::new(),
        };
        let root = c.intern(goal);
        (c, root)
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn push(&mut self, node: Node) -> u32 {
        if let Some(&i) = self.index.get(&node) {
            return i;
        }
        let size = match &node {
            Node::Top | Node::Bot | Node::Atom(_) => 1,
            Node::Not(a) | Node::Box(a) => 1 + self.sizes[*a as usize],
            // measured as its unfolding ¬□¬A
            Node::Dia { inner, .. } => 3 + self.sizes[*inner as usize],
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => {
                1 + self.sizes[*a as usize] + self.sizes[*b as usize]
            }
        };
        let i = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.sizes.push(size);
        self.index.insert(node, i);
        i
    }

    fn intern(&mut self, phi: &ModalFormula) -> u32 {
        use ModalFormula as M;
        let node = match phi {
            M::Top => Node::Top,
            M::Bot => Node::Bot,
            M::Var(v) => Node::Atom(v.clone()),
            M::Not(a) => Node::Not(self.intern(a)),
            M::Box(a) => Node::Box(self.intern(a)),
            M::And(a, b) => {
                let a = self.intern(a);
                Node::And(a, self.intern(b))
            }
            M::Or(a, b) => {
                let a = self.intern(a);
                Node::Or(a, self.intern(b))
            }
            M::Imp(a, b) => {
                let a = self.intern(a);
                Node::Imp(a, self.intern(b))
            }
            M::Dia(a) => {
                let inner = self.intern(a);
                let not = self.push(Node::Not(inner));
                let box_not = self.push(Node::Box(not));
                Node::Dia { inner, box_not }
            }
        };
        self.push(node)
    }

    fn materialize(&self) -> Vec<ModalFormula> {
        use ModalFormula as M;
        let mut out: Vec<ModalFormula> = Vec::with_capacity(self.len());
        for node in &self.nodes {
            let get = |i: &u32| out[*i as usize].clone();
            let phi = match node {
                Node::Top => M::Top,
                Node::Bot => M::Bot,
                Node::Atom(v) => M::Var(v.clone()),
                Node::Not(a) => M::not(get(a)),
                Node::Box(a) => M::boxed(get(a)),
                Node::Dia { inner, .. } => M::dia(get(inner)),
                Node::And(a, b) => M::and(get(a), get(b)),
                Node::Or(a, b) => M::or(get(a), get(b)),
                Node::Imp(a, b) => M::imp(get(a), get(b)),
            };
            out.push(phi);
        }
        out
    }
}

/// Finite sets of closure indices.
trait Bits: Clone + Eq + Hash + Debug {
    fn empty(len: usize) -> Self;
    fn get(&self, i: u32) -> bool;
    fn set(&mut self, i: u32);
    fn and(&self, other: &Self) -> Self;
    fn first(&self) -> Option<u32>;
    fn ones(&self) -> Vec<u32>;

    fn with(&self, i: u32) -> Self {
        let mut s = self.clone();
        s.set(i);
        s
    }
}

impl Bits for u128 {
    fn empty(_: usize) -> Self {
        0
    }
    fn get(&self, i: u32) -> bool {
        self >> i & 1 == 1
    }
    fn set(&mut self, i: u32) {
        *self |= 1 << i;
    }
    fn and(&self, o: &Self) -> Self {
        self & o
    }
    fn first(&self) -> Option<u32> {
        (*self != 0).then(|| self.trailing_zeros())
    }
    fn ones(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut rest = *self;
        while rest != 0 {
            out.push(rest.trailing_zeros());
            rest &= rest - 1;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct WideBits(Box<[u64]>);

impl Bits for WideBits {
    fn empty(len: usize) -> Self {
        WideBits(vec![0; len.div_ceil(64)].into_boxed_slice())
    }
    fn get(&self, i: u32) -> bool {
        self.0[i as usize / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: u32) {
        self.0[i as usize / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Self) -> Self {
        WideBits(self.0.iter().zip(o.0.iter()).map(|(a, b)| a & b).collect())
    }
    fn first(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k as u32 * 64 + w.trailing_zeros())
    }
    fn ones(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (k, &w) in self.0.iter().enumerate() {
            let mut rest = w;
            while rest != 0 {
                out.push(k as u32 * 64 + rest.trailing_zeros());
                rest &= rest - 1;
            }
        }
        out
    }
}

/// Names of the inference rules of the calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Initial sequent: an atom on both sides.
    Axiom,
    TopRight,
    BotLeft,
    NotLeft,
    NotRight,
    AndLeft,
    AndRight,
    OrLeft,
    OrRight,
    ImpLeft,
    ImpRight,
    DiaLeft,
    DiaRight,
    GlBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl RuleKind {
    fn side(self) -> Side {
        use RuleKind::*;
        match self {
            BotLeft | NotLeft | AndLeft | OrLeft | ImpLeft | DiaLeft => Side::Left,
            _ => Side::Right,
        }
    }
}

#[derive(Clone, Debug)]
enum Outcome {
    Proved(u32),
    Refuted(u32),
}

#[derive(Clone, Debug)]
struct ProofStep<B> {
    left: B,
    right: B,
    rule: RuleKind,
    principal: u32,
    premises: Vec<u32>,
}

#[derive(Clone, Debug)]
struct WorldStep<B> {
    left: B,
    children: Vec<u32>,
}

struct Engine<'c, B> {
    closure: &'c Closure,
    atoms: B,
    boxes: B,
    left_linear: B,
    left_branching: B,
    right_linear: B,
    right_branching: B,
    top: Option<u32>,
    bot: Option<u32>,
    proofs: Vec<ProofStep<B>>,
    worlds: Vec<WorldStep<B>>,
}

impl<'c, B: Bits> Engine<'c, B> {
    fn new(closure: &'c Closure) -> Self {
        let n = closure.len();
        let mut e = Engine {
            closure,
            atoms: B::empty(n),
            boxes: B::empty(n),
            left_linear: B::empty(n),
            left_branching: B::empty(n),
            right_linear: B::empty(n),
            right_branching: B::empty(n),
            top: None,
            bot: None,
            proofs: Vec::new(),
            worlds: Vec::new(),
        };
        for (i, node) in closure.nodes.iter().enumerate() {
            let i = i as u32;
            match node {
                Node::Top => e.top = Some(i),
                Node::Bot => e.bot = Some(i),
                Node::Atom(_) => e.atoms.set(i),
                Node::Box(_) => e.boxes.set(i),
                Node::Not(_) | Node::Dia { .. } => {
                    e.left_linear.set(i);
                    e.right_linear.set(i);
                }
                Node::And(..) => {
                    e.left_linear.set(i);
                    e.right_branching.set(i);
                }
                Node::Or(..) | Node::Imp(..) => {
                    e.left_branching.set(i);
                    e.right_linear.set(i);
                }
            }
        }
        e
    }

    fn node(&self, i: u32) -> &Node {
        &self.closure.nodes[i as usize]
    }

    fn proof(&mut self, left: &B, right: &B, rule: RuleKind, principal: u32, premises: Vec<u32>) -> Outcome {
        self.proofs.push(ProofStep {
            left: left.clone(),
            right: right.clone(),
            rule,
            principal,
            premises,
        });
        Outcome::Proved(self.proofs.len() as u32 - 1)
    }

    fn initial(&self, left: &B, right: &B) -> Option<(RuleKind, u32)> {
        if let Some(a) = left.and(right).and(&self.atoms).first() {
            return Some((RuleKind::Axiom, a));
        }
        if let Some(b) = self.bot.filter(|&b| left.get(b)) {
            return Some((RuleKind::BotLeft, b));
        }
        self.top
            .filter(|&t| right.get(t))
            .map(|t| (RuleKind::TopRight, t))
    }

    /// First formula whose single-premise rule has not been applied yet.
    fn linear_step(&self, left: &B, right: &B) -> Option<(RuleKind, u32, B, B)> {
        for i in left.and(&self.left_linear).ones() {
            match *self.node(i) {
                Node::Not(a) if !right.get(a) => {
                    return Some((RuleKind::NotLeft, i, left.clone(), right.with(a)))
                }
                Node::And(a, b) if !(left.get(a) && left.get(b)) => {
                    return Some((RuleKind::AndLeft, i, left.with(a).with(b), right.clone()))
                }
                Node::Dia { box_not, .. } if !right.get(box_not) => {
                    return Some((RuleKind::DiaLeft, i, left.clone(), right.with(box_not)))
                }
                _ => {}
            }
        }
        for i in right.and(&self.right_linear).ones() {
            match *self.node(i) {
                Node::Not(a) if !left.get(a) => {
                    return Some((RuleKind::NotRight, i, left.with(a), right.clone()))
                }
                Node::Or(a, b) if !(right.get(a) && right.get(b)) => {
                    return Some((RuleKind::OrRight, i, left.clone(), right.with(a).with(b)))
                }
                Node::Imp(a, b) if !(left.get(a) && right.get(b)) => {
                    return Some((RuleKind::ImpRight, i, left.with(a), right.with(b)))
                }
                Node::Dia { box_not, .. } if !left.get(box_not) => {
                    return Some((RuleKind::DiaRight, i, left.with(box_not), right.clone()))
                }
                _ => {}
            }
        }
        None
    }

    /// First formula whose two-premise rule has not been applied yet.
    #[allow(clippy::type_complexity)]
    fn branching_step(&self, left: &B, right: &B) -> Option<(RuleKind, u32, (B, B), (B, B))> {
        for i in left.and(&self.left_branching).ones() {
            match *self.node(i) {
                Node::Or(a, b) if !(left.get(a) || left.get(b)) => {
                    return Some((
                        RuleKind::OrLeft,
                        i,
                        (left.with(a), right.clone()),
                        (left.with(b), right.clone()),
                    ))
                }
                Node::Imp(a, b) if !(right.get(a) || left.get(b)) => {
                    return Some((
                        RuleKind::ImpLeft,
                        i,
                        (left.clone(), right.with(a)),
                        (left.with(b), right.clone()),
                    ))
                }
                _ => {}
            }
        }
        for i in right.and(&self.right_branching).ones() {
            if let Node::And(a, b) = *self.node(i) {
                if !(right.get(a) || right.get(b)) {
                    return Some((
                        RuleKind::AndRight,
                        i,
                        (left.clone(), right.with(a)),
                        (left.clone(), right.with(b)),
                    ));
                }
            }
        }
        None
    }

    fn box_inner(&self, i: u32) -> u32 {
        match *self.node(i) {
            Node::Box(a) => a,
            _ => unreachable!("not a box"),
        }
    }

    /// Premise of the GL rule with principal `□B` (index `principal`),
    /// keeping every boxed formula of the antecedent.
    fn box_premise(&self, left: &B, principal: u32) -> (B, B) {
        let n = self.closure.len();
        let boxed = left.and(&self.boxes);
        let mut premise_left = boxed.with(principal);
        for j in boxed.ones() {
            premise_left.set(self.box_inner(j));
        }
        let mut premise_right = B::empty(n);
        premise_right.set(self.box_inner(principal));
        (premise_left, premise_right)
    }

    fn search(&mut self, left: B, right: B) -> Outcome {
        if let Some((rule, principal)) = self.initial(&left, &right) {
            return self.proof(&left, &right, rule, principal, Vec::new());
        }
        if let Some((rule, principal, l2, r2)) = self.linear_step(&left, &right) {
            return match self.search(l2, r2) {
                Outcome::Proved(p) => self.proof(&left, &right, rule, principal, vec![p]),
                refuted => refuted,
            };
        }
        if let Some((rule, principal, (l1, r1), (l2, r2))) = self.branching_step(&left, &right) {
            let p1 = match self.search(l1, r1) {
                Outcome::Proved(p) => p,
                refuted => return refuted,
            };
            let p2 = match self.search(l2, r2) {
                Outcome::Proved(p) => p,
                refuted => return refuted,
            };
            return self.proof(&left, &right, rule, principal, vec![p1, p2]);
        }

        // Saturated. A box on both sides is an identity.
        let shared = left.and(&right).and(&self.boxes).ones();
        if let Some(&i) = shared
            .iter()
            .min_by_key(|&&i| (self.closure.sizes[i as usize], i))
        {
            let (pl, pr) = self.box_premise(&left, i);
            return match self.search(pl, pr) {
                Outcome::Proved(p) => self.proof(&left, &right, RuleKind::GlBox, i, vec![p]),
                Outcome::Refuted(_) => unreachable!("identity premise refuted"),
            };
        }
        let mut children = Vec::new();
        for i in right.and(&self.boxes).ones() {
            let (pl, pr) = self.box_premise(&left, i);
            match self.search(pl, pr) {
                Outcome::Proved(p) => return self.proof(&left, &right, RuleKind::GlBox, i, vec![p]),
                Outcome::Refuted(w) => children.push(w),
            }
        }
        self.worlds.push(WorldStep { left, children });
        Outcome::Refuted(self.worlds.len() as u32 - 1)
    }

    fn run(&mut self, goal: u32) -> Outcome {
        let n = self.closure.len();
        let right = B::empty(n).with(goal);
        self.search(B::empty(n), right)
    }

    fn to_sequent(&self, formulas: &[ModalFormula], left: &B, right: &B) -> Sequent {
        let collect = |s: &B| s.ones().into_iter().map(|i| formulas[i as usize].clone()).collect();
        Sequent {
            left: collect(left),
            right: collect(right),
        }
    }

    fn derivation_node(&self, formulas: &[ModalFormula], p: u32) -> DerivationNode {
        let step = &self.proofs[p as usize];
        DerivationNode {
            sequent: self.to_sequent(formulas, &step.left, &step.right),
            rule: step.rule,
            principal: formulas[step.principal as usize].clone(),
            premises: step
                .premises
                .iter()
                .map(|&q| self.derivation_node(formulas, q))
                .collect(),
        }
    }

    fn countermodel(&self, goal: &ModalFormula, root: u32) -> TreeModel {
        let mut parents: Vec<Option<World>> = Vec::new();
        let mut valuation: BTreeMap<String, BTreeSet<World>> = goal
            .variables()
            .into_iter()
            .map(|v| (v, BTreeSet::new()))
            .collect();
        let mut stack = vec![(root, None)];
        while let Some((w, parent)) = stack.pop() {
            let id = parents.len();
            parents.push(parent);
            let step = &self.worlds[w as usize];
            for a in step.left.and(&self.atoms).ones() {
                if let Node::Atom(name) = self.node(a) {
                    valuation.entry(name.clone()).or_default().insert(id);
                }
            }
            stack.extend(step.children.iter().rev().map(|&c| (c, Some(id))));
        }
        let frame = TreeFrame::from_parents(parents).expect("search produces a tree");
        TreeModel::new(frame, valuation).expect("atoms are identifiers")
    }
}

/// A sequent `left ⇒ right`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequent {
    pub left: BTreeSet<ModalFormula>,
    pub right: BTreeSet<ModalFormula>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationNode {
    pub sequent: Sequent,
    pub rule: RuleKind,
    /// For axioms, the shared atom; for `top_right`/`bot_left`, the constant.
    pub principal: ModalFormula,
    pub premises: Vec<DerivationNode>,
}

/// A derivation of `⇒ goal`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub goal: ModalFormula,
    pub root: Option<DerivationNode>,
}

impl Derivation {
    pub fn node_count(&self) -> usize {
        fn count(n: &DerivationNode) -> usize {
            1 + n.premises.iter().map(count).sum::<usize>()
        }
        self.root.as_ref().map_or(0, count)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Provable { derivation: Derivation },
    Refuted { model: TreeModel },
}

impl Verdict {
    pub fn is_provable(&self) -> bool {
        matches!(self, Verdict::Provable { .. })
    }
}

fn with_engine<R>(phi: &ModalFormula, f: impl FnOnce(&Closure, u32, Outcome, &dyn EngineView) -> R) -> R {
    let (closure, goal) = Closure::new(phi);
    if closure.len() <= 128 {
        let mut e = Engine::<u128>::new(&closure);
        let out = e.run(goal);
        f(&closure, goal, out, &e)
    } else {
        let mut e = Engine::<WideBits>::new(&closure);
        let out = e.run(goal);
        f(&closure, goal, out, &e)
    }
}

trait EngineView {
    fn derivation(&self, formulas: &[ModalFormula], root: u32) -> DerivationNode;
    fn model(&self, goal: &ModalFormula, root: u32) -> TreeModel;
}

impl<B: Bits> EngineView for Engine<'_, B> {
    fn derivation(&self, formulas: &[ModalFormula], root: u32) -> DerivationNode {
        self.derivation_node(formulas, root)
    }
    fn model(&self, goal: &ModalFormula, root: u32) -> TreeModel {
        self.countermodel(goal, root)
    }
}

/// Decides GL-provability of `phi`, returning either a derivation of
/// `⇒ phi` or a finite tree model refuting `phi` at its root.
pub fn prove(phi: &ModalFormula) -> Verdict {
    with_engine(phi, |closure, _, out, view| match out {
        Outcome::Proved(p) => {
            let formulas = closure.materialize();
            Verdict::Provable {
                derivation: Derivation {
                    goal: phi.clone(),
                    root: Some(view.derivation(&formulas, p)),
                },
            }
        }
        Outcome::Refuted(w) => Verdict::Refuted {
            model: view.model(phi, w),
        },
    })
}

/// Same search as [`prove`], without materializing the certificate.
pub fn is_provable(phi: &ModalFormula) -> bool {
    with_engine(phi, |_, _, out, _| matches!(out, Outcome::Proved(_)))
}

fn components(principal: &ModalFormula, rule: RuleKind) -> Option<Vec<(Vec<&ModalFormula>, Vec<&ModalFormula>)>> {
    use ModalFormula as M;
    use RuleKind::*;
    // (added to the left, added to the right) for each premise
    let out = match (rule, principal) {
        (NotLeft, M::Not(a)) => vec![(vec![], vec![&**a])],
        (NotRight, M::Not(a)) => vec![(vec![&**a], vec![])],
        (AndLeft, M::And(a, b)) => vec![(vec![&**a, &**b], vec![])],
        (AndRight, M::And(a, b)) => vec![(vec![], vec![&**a]), (vec![], vec![&**b])],
        (OrLeft, M::Or(a, b)) => vec![(vec![&**a], vec![]), (vec![&**b], vec![])],
        (OrRight, M::Or(a, b)) => vec![(vec![], vec![&**a, &**b])],
        (ImpLeft, M::Imp(a, b)) => vec![(vec![], vec![&**a]), (vec![&**b], vec![])],
        (ImpRight, M::Imp(a, b)) => vec![(vec![&**a], vec![&**b])],
        _ => return None,
    };
    Some(out)
}

fn check_node(node: &DerivationNode) -> bool {
    use ModalFormula as M;
    use RuleKind::*;
    let DerivationNode {
        sequent,
        rule,
        principal,
        premises,
    } = node;
    let on_side = match rule.side() {
        Side::Left => sequent.left.contains(principal),
        Side::Right => sequent.right.contains(principal),
    };
    if !on_side {
        return false;
    }
    let locally_ok = match rule {
        Axiom => {
            matches!(principal, M::Var(_)) && sequent.left.contains(principal) && premises.is_empty()
        }
        TopRight => *principal == M::Top && premises.is_empty(),
        BotLeft => *principal == M::Bot && premises.is_empty(),
        DiaLeft | DiaRight => {
            let M::Dia(a) = principal else { return false };
            let unfolded = M::boxed(M::not((**a).clone()));
            let mut expected = sequent.clone();
            if *rule == DiaLeft {
                expected.right.insert(unfolded);
            } else {
                expected.left.insert(unfolded);
            }
            premises.len() == 1 && premises[0].sequent == expected
        }
        GlBox => {
            let M::Box(b) = principal else { return false };
            let [premise] = premises.as_slice() else { return false };
            let mut expected_left = BTreeSet::new();
            for phi in &premise.sequent.left {
                if let M::Box(c) = phi {
                    if sequent.left.contains(phi) {
                        expected_left.insert(phi.clone());
                        expected_left.insert((**c).clone());
                    }
                }
            }
            expected_left.insert(principal.clone());
            premise.sequent.left == expected_left
                && premise.sequent.right == BTreeSet::from([(**b).clone()])
        }
        _ => {
            let Some(parts) = components(principal, *rule) else { return false };
            parts.len() == premises.len()
                && parts.iter().zip(premises).all(|((add_l, add_r), prem)| {
                    let mut expected = sequent.clone();
                    expected.left.extend(add_l.iter().map(|f| (*f).clone()));
                    expected.right.extend(add_r.iter().map(|f| (*f).clone()));
                    prem.sequent == expected
                })
        }
    };
    locally_ok && premises.iter().all(check_node)
}

/// True iff every node is a correct rule instance and the root sequent is
/// `⇒ goal`.
pub fn check_derivation(d: &Derivation) -> bool {
    let Some(root) = &d.root else { return false };
    root.sequent.left.is_empty()
        && root.sequent.right == BTreeSet::from([d.goal.clone()])
        && check_node(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::forces;
    use crate::modal::parse_modal;

    fn verdict(s: &str) -> Verdict {
        prove(&parse_modal(s).unwrap())
    }

    #[test]
    fn lob_is_provable_with_checked_derivation() {
        let Verdict::Provable { derivation } = verdict("[]([]p->p)->[]p") else {
            panic!("Löb axiom refuted");
        };
        assert!(check_derivation(&derivation));
    }

    #[test]
    fn dia_top_is_refuted_by_a_single_world() {
        let Verdict::Refuted { model } = verdict("<>T") else {
            panic!("<>T proved");
        };
        assert_eq!(model.frame.len(), 1);
    }

    #[test]
    fn two_diamond_formula_gets_root_and_two_leaves() {
        let phi = parse_modal("<>v -> (<>u -> <>(v&u))").unwrap();
        let Verdict::Refuted { model } = prove(&phi) else {
            panic!("proved");
        };
        assert_eq!(model.frame.parents(), &[None, Some(0), Some(0)]);
        assert!(model.holds_at("v", 1) && !model.holds_at("u", 1));
        assert!(model.holds_at("u", 2) && !model.holds_at("v", 2));
        assert!(!forces(&model, 0, &phi).unwrap());
    }

    #[test]
    fn tampered_derivations_fail() {
        let Verdict::Provable { derivation } = verdict("[]p -> [][]p") else {
            panic!()
        };
        assert!(check_derivation(&derivation));

        let mut pruned = derivation.clone();
        fn drop_a_premise(n: &mut DerivationNode) -> bool {
            if !n.premises.is_empty() {
                n.premises.pop();
                return true;
            }
            false
        }
        assert!(drop_a_premise(pruned.root.as_mut().unwrap()));
        assert!(!check_derivation(&pruned));

        let empty = Derivation {
            goal: derivation.goal.clone(),
            root: None,
        };
        assert!(!check_derivation(&empty));

        let mut wrong_goal = derivation.clone();
        wrong_goal.goal = parse_modal("[]p").unwrap();
        assert!(!check_derivation(&wrong_goal));
    }

    #[test]
    fn identity_on_boxes() {
        for s in ["[]p -> []p", "[][]p -> [][]p", "[](p&q) -> [](p&q)", "<>p -> <>p"] {
            let Verdict::Provable { derivation } = verdict(s) else {
                panic!("{s} refuted")
            };
            assert!(check_derivation(&derivation), "{s}");
        }
    }

    #[test]
    fn non_theorems_of_gl() {
        for s in ["[]p -> p", "p -> []p", "<>T", "[]([]p -> q) | [](q -> p)", "[]F"] {
            let phi = parse_modal(s).unwrap();
            let Verdict::Refuted { model } = prove(&phi) else {
                panic!("{s} proved")
            };
            assert!(!forces(&model, 0, &phi).unwrap(), "{s}");
        }
    }

    #[test]
    fn wide_closures_use_the_same_search() {
        // 70 distinct atoms plus connectives overflow a 128-bit set
        let atoms: Vec<String> = (0..70).map(|i| format!("p{i}")).collect();
        let conj = atoms.join(" & ");
        let valid = parse_modal(&format!("[]({conj}) -> []p0")).unwrap();
        assert!(Closure::new(&valid).0.len() > 128);
        let Verdict::Provable { derivation } = prove(&valid) else { panic!() };
        assert!(check_derivation(&derivation));
        let invalid = parse_modal(&format!("[]({conj}) -> p0")).unwrap();
        let Verdict::Refuted { model } = prove(&invalid) else { panic!() };
        assert!(!forces(&model, 0, &invalid).unwrap());
    }

    #[test]
    fn verdict_json_shape() {
        let v = verdict("<>T");
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "refuted");
        assert_eq!(json["model"]["parents"], serde_json::json!([null]));
        let back: Verdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
        let v = verdict("T");
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "provable");
        assert_eq!(json["derivation"]["root"]["rule"], "top_right");
    }
}
