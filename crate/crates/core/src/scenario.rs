//! Finite abstract semantics for emitted sentences: which theories
//! `T_j = PA + ◇^j ⊤` are inconsistent and the size of their least
//! inconsistency proofs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emitter::{simplify_kit, CAnnotation, EvaluationKit, IndexedC};
use crate::kripke::World;
use crate::tower::{less_than_exp_exp, tower_exp, tower_exp_star, tower_log_star, tower_residue, TowerNum};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario horizon {scenario} does not match kit horizon {kit}")]
    HorizonMismatch { scenario: usize, kit: usize },
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error("{count} worlds have a true F sentence")]
    PartitionViolation { count: usize },
    #[error("inject precondition: {0}")]
    Precondition(String),
}

/// `T_j` is inconsistent iff `j ≥ threshold`; `least[j]` is the least
/// inconsistency proof of `T_j` for `threshold ≤ j < horizon`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub horizon: usize,
    pub threshold: usize,
    pub least: BTreeMap<usize, TowerNum>,
}

impl Scenario {
    pub fn new(horizon: usize, threshold: usize, least: BTreeMap<usize, TowerNum>) -> Result<Self, ScenarioError> {
        let s = Scenario {
            horizon,
            threshold,
            least,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.threshold > self.horizon {
            return Err(ScenarioError::Malformed("threshold above horizon".into()));
        }
        let (t, h) = (self.threshold, self.horizon);
        if self.least.len() != h - t || !self.least.keys().copied().eq(t..h) {
            return Err(ScenarioError::Malformed(format!(
                "least values must cover exactly {t}..{h}"
            )));
        }
        let two = TowerNum::from_int(2u32);
        if self.least.values().any(|v| *v < two) {
            return Err(ScenarioError::Malformed("least values are at least 2".into()));
        }
        Ok(())
    }

    fn inconsistent(&self, j: usize) -> bool {
        j >= self.threshold
    }

    fn least_of(&self, j: usize) -> &TowerNum {
        &self.least[&j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    C,
    F,
}

pub fn horizon(kit: &EvaluationKit) -> usize {
    kit.worlds[kit.model.frame.root()].height
}

fn eval_indexed(s: &Scenario, c: &IndexedC) -> bool {
    let k = c.parent_theory.0;
    if !s.inconsistent(k) {
        return false;
    }
    let lk = s.least_of(k);
    if tower_residue(lk, c.modulus) != c.residue {
        return false;
    }
    match c.witness_theory {
        None => true,
        Some(w) => s.inconsistent(w.0) && less_than_exp_exp(s.least_of(w.0), lk),
    }
}

fn eval_annotation(s: &Scenario, a: &CAnnotation) -> bool {
    match a {
        CAnnotation::Root => true,
        CAnnotation::Indexed(c) | CAnnotation::LastResidue(c) => eval_indexed(s, c),
        CAnnotation::Last {
            box_level,
            negated_siblings,
            ..
        } => {
            // □^m ⊥ says T_{m-1} is inconsistent
            *box_level > s.threshold && !negated_siblings.iter().any(|c| eval_indexed(s, c))
        }
    }
}

fn check_horizon(s: &Scenario, kit: &EvaluationKit) -> Result<(), ScenarioError> {
    let h = horizon(kit);
    if s.horizon != h {
        return Err(ScenarioError::HorizonMismatch {
            scenario: s.horizon,
            kit: h,
        });
    }
    Ok(())
}

/// Truth of every `F_a`, computed from the annotations.
pub fn f_truths(s: &Scenario, kit: &EvaluationKit) -> Result<Vec<bool>, ScenarioError> {
    check_horizon(s, kit)?;
    let frame = &kit.model.frame;
    let c: Vec<bool> = kit.worlds.iter().map(|w| eval_annotation(s, &w.annotation)).collect();
    Ok(frame
        .worlds()
        .map(|a| {
            // ◇^h ⊤ says T_h is consistent
            kit.worlds[a].height <= s.threshold
                && frame
                    .path_from_root(a)
                    .expect("world exists")
                    .iter()
                    .all(|&b| c[b])
        })
        .collect())
}

pub fn eval_sentence(s: &Scenario, kit: &EvaluationKit, a: World, which: Which) -> Result<bool, ScenarioError> {
    check_horizon(s, kit)?;
    if a >= kit.worlds.len() {
        return Err(ScenarioError::Malformed(format!("no world {a}")));
    }
    match which {
        Which::C => Ok(eval_annotation(s, &kit.worlds[a].annotation)),
        Which::F => Ok(f_truths(s, kit)?[a]),
    }
}

/// The unique world whose `F` sentence holds.
pub fn realized_world(s: &Scenario, kit: &EvaluationKit) -> Result<World, ScenarioError> {
    let truths = f_truths(s, kit)?;
    let hits: Vec<World> = (0..truths.len()).filter(|&a| truths[a]).collect();
    match hits[..] {
        [a] => Ok(a),
        _ => Err(ScenarioError::PartitionViolation { count: hits.len() }),
    }
}

/// Moves the scenario from its realized world `a` to the immediate
/// successor `b` by giving `T_{h(a)-1}` a fresh least proof of the right
/// residue, far above every existing least value.
pub fn inject(s: &Scenario, kit: &EvaluationKit, b: World) -> Result<Scenario, ScenarioError> {
    let a = realized_world(s, kit)?;
    let frame = &kit.model.frame;
    if b >= frame.len() || frame.parent(b).ok().flatten() != Some(a) {
        return Err(ScenarioError::Precondition(format!(
            "world {b} is not an immediate successor of the realized world {a}"
        )));
    }
    let succ = frame.ordered_successors(a).expect("a has successors");
    let k = succ.iter().position(|&x| x == b).expect("b is a successor") as u64;
    let modulus = succ.len() as u64;
    let mx = s.least.values().max().cloned().unwrap_or_else(|| tower_exp_star(6));
    let m0 = tower_log_star(&mx) + 4;
    let m = m0 + (k + modulus - m0 % modulus) % modulus;
    let d = tower_exp_star(m);
    let ha = kit.worlds[a].height;
    let hb = kit.worlds[b].height;
    let mut least: BTreeMap<usize, TowerNum> = s
        .least
        .iter()
        .filter(|(&j, _)| j >= ha)
        .map(|(&j, v)| (j, v.clone()))
        .collect();
    least.insert(ha - 1, d.clone());
    if hb + 1 < ha {
        let above = tower_exp(&d).expect("exp* values have no offset");
        for j in hb..ha - 1 {
            least.insert(j, above.clone());
        }
    }
    Scenario::new(s.horizon, hb, least)
}

/// Largest modulus among the kit's annotations (1 if there is none).
fn max_modulus(kit: &EvaluationKit) -> u64 {
    kit.worlds
        .iter()
        .filter_map(|w| match &w.annotation {
            CAnnotation::Indexed(c) | CAnnotation::LastResidue(c) => Some(c.modulus),
            CAnnotation::Last {
                negated_siblings, ..
            } => Some(negated_siblings.len() as u64 + 1),
            CAnnotation::Root => None,
        })
        .max()
        .unwrap_or(1)
}

/// `exp*(m) + δ` for `m` in `6..=6+2M` and `δ ∈ {-1, 0, 1}`.
pub fn template_family(max_modulus: u64) -> Vec<TowerNum> {
    (6..=6 + 2 * max_modulus)
        .flat_map(|m| (-1..=1).map(move |d| tower_exp_star(m).add_offset(d).expect("small offset")))
        .collect()
}

/// Full products of template values while they stay small, otherwise a
/// base assignment with every single and pairwise deviation.
pub const FULL_PRODUCT_LIMIT: usize = 1000;

pub fn enumerate_scenarios(kit: &EvaluationKit) -> Vec<Scenario> {
    let h = horizon(kit);
    let family = template_family(max_modulus(kit));
    let mut out = Vec::new();
    for t in 0..=h {
        let keys: Vec<usize> = (t..h).collect();
        let product = (family.len() as f64).powi(keys.len() as i32);
        let assignments: Vec<Vec<usize>> = if product <= FULL_PRODUCT_LIMIT as f64 {
            let mut all = vec![Vec::new()];
            for _ in &keys {
                all = all
                    .into_iter()
                    .flat_map(|prefix| {
                        (0..family.len()).map(move |v| {
                            let mut next = prefix.clone();
                            next.push(v);
                            next
                        })
                    })
                    .collect();
            }
            all
        } else {
            let base = vec![0; keys.len()];
            let mut seen = BTreeSet::new();
            seen.insert(base.clone());
            for i in 0..keys.len() {
                for vi in 0..family.len() {
                    for j in i + 1..keys.len() {
                        for vj in 0..family.len() {
                            let mut a = base.clone();
                            a[i] = vi;
                            a[j] = vj;
                            seen.insert(a);
                        }
                    }
                    let mut a = base.clone();
                    a[i] = vi;
                    seen.insert(a);
                }
            }
            seen.into_iter().collect()
        };
        for assignment in assignments {
            let least = keys
                .iter()
                .zip(&assignment)
                .map(|(&j, &v)| (j, family[v].clone()))
                .collect();
            out.push(Scenario::new(h, t, least).expect("enumerated scenarios are well formed"));
        }
    }
    out
}

/// What a scenario family leaves unexercised in a kit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverageGaps {
    /// (theory, modulus, residue) never taken by a least value in range.
    pub residues: Vec<(usize, u64, u64)>,
    /// (least-proof theory, witness theory, outcome) never observed.
    pub comparisons: Vec<(usize, usize, bool)>,
}

impl CoverageGaps {
    pub fn is_empty(&self) -> bool {
        self.residues.is_empty() && self.comparisons.is_empty()
    }
}

/// Checks that every residue class of every annotation's modulus and
/// both outcomes of every nontrivial witness comparison occur. A witness
/// equal to the least-proof theory always compares true and is skipped.
pub fn coverage_gaps(kit: &EvaluationKit, scenarios: &[Scenario]) -> CoverageGaps {
    let mut residues = BTreeSet::new();
    let mut comparisons = BTreeSet::new();
    for w in &kit.worlds {
        let cs: Vec<&IndexedC> = match &w.annotation {
            CAnnotation::Indexed(c) | CAnnotation::LastResidue(c) => vec![c],
            CAnnotation::Last {
                negated_siblings, ..
            } => negated_siblings.iter().collect(),
            CAnnotation::Root => vec![],
        };
        for c in cs {
            let k = c.parent_theory.0;
            for r in 0..c.modulus {
                residues.insert((k, c.modulus, r));
            }
            if let Some(wt) = c.witness_theory.filter(|wt| wt.0 < k) {
                comparisons.insert((k, wt.0, true));
                comparisons.insert((k, wt.0, false));
            }
        }
    }
    for s in scenarios {
        residues.retain(|&(k, m, r)| !(s.inconsistent(k) && tower_residue(s.least_of(k), m) == r));
        comparisons.retain(|&(k, w, outcome)| {
            !(s.inconsistent(w) && less_than_exp_exp(s.least_of(w), s.least_of(k)) == outcome)
        });
    }
    CoverageGaps {
        residues: residues.into_iter().collect(),
        comparisons: comparisons.into_iter().collect(),
    }
}

/// Violation counts for the scenario-level properties of one kit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    pub scenarios: usize,
    pub partition: usize,
    pub height_law: usize,
    pub set_lemma: usize,
    pub exclusivity: usize,
    pub reachability: usize,
    pub simplifier: usize,
    pub coverage: CoverageGaps,
    /// First violation found, for diagnostics.
    pub first: Option<String>,
}

impl Audit {
    pub fn violations(&self) -> usize {
        self.partition + self.height_law + self.set_lemma + self.exclusivity + self.reachability + self.simplifier
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0 && self.coverage.is_empty()
    }

    pub fn merge(&mut self, other: Audit) {
        self.scenarios += other.scenarios;
        self.partition += other.partition;
        self.height_law += other.height_law;
        self.set_lemma += other.set_lemma;
        self.exclusivity += other.exclusivity;
        self.reachability += other.reachability;
        self.simplifier += other.simplifier;
        self.coverage.residues.extend(other.coverage.residues);
        self.coverage.comparisons.extend(other.coverage.comparisons);
        if self.first.is_none() {
            self.first = other.first;
        }
    }

    fn note(&mut self, what: impl FnOnce() -> String) {
        if self.first.is_none() {
            self.first = Some(what());
        }
    }
}

/// Runs every scenario property over the enumerated scenarios of `kit`.
/// Set-lemma subsets are exhaustive up to 10 worlds.
pub fn audit(kit: &EvaluationKit) -> Audit {
    let scenarios = enumerate_scenarios(kit);
    let simple = simplify_kit(kit);
    let frame = &kit.model.frame;
    let n = frame.len();
    let h = horizon(kit);
    let mut out = Audit {
        scenarios: scenarios.len(),
        coverage: coverage_gaps(kit, &scenarios),
        ..Audit::default()
    };
    let families: Vec<Vec<World>> = frame
        .worlds()
        .filter(|&a| !frame.is_leaf(a).unwrap_or(true))
        .map(|a| frame.ordered_successors(a).expect("non-leaf"))
        .collect();
    for s in &scenarios {
        let truths = f_truths(s, kit).expect("enumerated for this kit");
        let hits: Vec<World> = (0..n).filter(|&a| truths[a]).collect();
        if hits.len() != 1 {
            out.partition += 1;
            out.note(|| format!("t={} least={:?}: F true at {hits:?}", s.threshold, s.least));
            continue;
        }
        let a = hits[0];
        if kit.worlds[a].height != s.threshold.min(h) {
            out.height_law += 1;
            out.note(|| format!("t={}: realized world {a} has height {}", s.threshold, kit.worlds[a].height));
        }
        if n <= 10 {
            let mask: u32 = (0..n).filter(|&w| truths[w]).map(|w| 1 << w).sum();
            let bad = (0u32..1 << n).filter(|set| (mask & set != 0) != (set >> a & 1 == 1)).count();
            out.set_lemma += bad;
        }
        let c: Vec<bool> = kit.worlds.iter().map(|w| eval_annotation(s, &w.annotation)).collect();
        for family in &families {
            if family.iter().filter(|&&b| c[b]).count() > 1 {
                out.exclusivity += 1;
                out.note(|| format!("t={}: two sibling C sentences hold in {family:?}", s.threshold));
            }
        }
        for w in frame.worlds() {
            let cs = eval_annotation(s, &simple.worlds[w].annotation);
            let fs = f_truths(s, &simple).expect("same horizon")[w];
            if cs != c[w] || fs != truths[w] {
                out.simplifier += 1;
                out.note(|| format!("t={}: simplification changes world {w}", s.threshold));
            }
        }
        out.reachability += reachability_violations(s, kit, a, &mut out.first);
    }
    out
}

fn reachability_violations(s: &Scenario, kit: &EvaluationKit, a: World, first: &mut Option<String>) -> usize {
    let frame = &kit.model.frame;
    let mut bad = 0;
    let mut fail = |msg: String, first: &mut Option<String>| {
        bad += 1;
        first.get_or_insert(msg);
    };
    let below = frame.descendants(a).expect("world exists");
    for w in frame.worlds() {
        let immediate = frame.parent(w).ok().flatten() == Some(a);
        match inject(s, kit, w) {
            Ok(next) if immediate => {
                let ha = kit.worlds[a].height;
                if realized_world(&next, kit).ok() != Some(w) {
                    fail(format!("inject {a}->{w} misses"), first);
                } else if s.least.range(ha..).any(|(j, v)| next.least.get(j) != Some(v)) {
                    fail(format!("inject {a}->{w} changes a kept least value"), first);
                }
            }
            Ok(_) => fail(format!("inject accepted non-successor {w} of {a}"), first),
            Err(_) if immediate => fail(format!("inject {a}->{w} rejected"), first),
            Err(_) => {}
        }
    }
    for b in below {
        let path = frame.path_from_root(b).expect("world exists");
        let start = path.iter().position(|&x| x == a).expect("a precedes b");
        let mut cur = s.clone();
        for &step in &path[start + 1..] {
            match inject(&cur, kit, step) {
                Ok(next) => cur = next,
                Err(e) => {
                    fail(format!("iterated inject {a}->{b} failed at {step}: {e}"), first);
                    break;
                }
            }
        }
        if realized_world(&cur, kit).ok() != Some(b) {
            fail(format!("iterated inject {a}->{b} lands elsewhere"), first);
        }
    }
    bad
}
