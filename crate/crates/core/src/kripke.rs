//! Finite irreflexive transitive trees, valuations and forcing.
//!
//! A frame is given by a parent map; the accessibility relation `a ≺ b`
//! holds exactly when `a` is a proper ancestor of `b`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::modal::ModalFormula;

pub type World = usize;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world {0}")]
    UnknownWorld(World),
    #[error("world {0} is a leaf")]
    Leaf(World),
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("malformed valuation: {0}")]
    MalformedValuation(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeFrame {
    parent: Vec<Option<World>>,
    root: World,
    children: Vec<Vec<World>>,
    heights: Vec<usize>,
    /// Every world after all of its descendants.
    postorder: Vec<World>,
}

impl TreeFrame {
    pub fn from_parents(parent: Vec<Option<World>>) -> Result<Self, KripkeError> {
        let n = parent.len();
        if n == 0 {
            return Err(KripkeError::MalformedFrame("no worlds".into()));
        }
        let roots: Vec<World> = (0..n).filter(|&w| parent[w].is_none()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(KripkeError::MalformedFrame("no root".into())),
            _ => return Err(KripkeError::MalformedFrame(format!("several roots: {roots:?}"))),
        };
        let mut children = vec![Vec::new(); n];
        for (w, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(KripkeError::MalformedFrame(format!(
                        "world {w} has out-of-range parent {p}"
                    )));
                }
                children[p].push(w);
            }
        }
        // Reaching every world from the root rules out cycles.
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(w) = stack.pop() {
            preorder.push(w);
            stack.extend(children[w].iter().rev().copied());
        }
        if preorder.len() != n {
            return Err(KripkeError::MalformedFrame(
                "parent map contains a cycle".into(),
            ));
        }
        let postorder: Vec<World> = preorder.iter().rev().copied().collect();
        let mut heights = vec![0; n];
        for &w in &postorder {
            heights[w] = children[w].iter().map(|&c| heights[c] + 1).max().unwrap_or(0);
        }
        Ok(TreeFrame {
            parent,
            root,
            children,
            heights,
            postorder,
        })
    }

    /// A chain `0 ≺ 1 ≺ … ≺ n-1`.
    pub fn chain(n: usize) -> Self {
        let parents = (0..n).map(|w| w.checked_sub(1)).collect();
        TreeFrame::from_parents(parents).expect("chain is a tree")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> World {
        self.root
    }

    pub fn parents(&self) -> &[Option<World>] {
        &self.parent
    }

    pub fn worlds(&self) -> std::ops::Range<World> {
        0..self.len()
    }

    fn check(&self, w: World) -> Result<(), KripkeError> {
        if w < self.len() {
            Ok(())
        } else {
            Err(KripkeError::UnknownWorld(w))
        }
    }

    pub fn parent(&self, w: World) -> Result<Option<World>, KripkeError> {
        self.check(w)?;
        Ok(self.parent[w])
    }

    /// Immediate successors in ascending id order.
    pub fn children(&self, w: World) -> Result<&[World], KripkeError> {
        self.check(w)?;
        Ok(&self.children[w])
    }

    pub fn is_leaf(&self, w: World) -> Result<bool, KripkeError> {
        Ok(self.children(w)?.is_empty())
    }

    /// `a ≺ b`: `a` is a proper ancestor of `b`.
    pub fn precedes(&self, a: World, b: World) -> Result<bool, KripkeError> {
        self.check(a)?;
        self.check(b)?;
        let mut cur = self.parent[b];
        while let Some(p) = cur {
            if p == a {
                return Ok(true);
            }
            cur = self.parent[p];
        }
        Ok(false)
    }

    /// All `b` with `a ≺ b`, in preorder.
    pub fn descendants(&self, a: World) -> Result<Vec<World>, KripkeError> {
        self.check(a)?;
        let mut out = Vec::new();
        let mut stack: Vec<World> = self.children[a].iter().rev().copied().collect();
        while let Some(w) = stack.pop() {
            out.push(w);
            stack.extend(self.children[w].iter().rev().copied());
        }
        Ok(out)
    }

    /// The path `root = c_0 ≺ c_1 ≺ … ≺ c_k = a`.
    pub fn path_from_root(&self, a: World) -> Result<Vec<World>, KripkeError> {
        self.check(a)?;
        let mut path = vec![a];
        let mut cur = self.parent[a];
        while let Some(p) = cur {
            path.push(p);
            cur = self.parent[p];
        }
        path.reverse();
        Ok(path)
    }

    /// `h(a) = sup({0} ∪ {h(b)+1 | a ≺ b})`.
    pub fn height(&self, a: World) -> Result<usize, KripkeError> {
        self.check(a)?;
        Ok(self.heights[a])
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn postorder(&self) -> &[World] {
        &self.postorder
    }

    /// Immediate successors of `a` in the fixed enumeration used by the
    /// evaluation construction: ascending ids, except that the
    /// maximal-height successor with the largest id goes last (so the last
    /// element has height `h(a) - 1`).
    pub fn ordered_successors(&self, a: World) -> Result<Vec<World>, KripkeError> {
        let kids = self.children(a)?;
        if kids.is_empty() {
            return Err(KripkeError::Leaf(a));
        }
        let tallest = self.heights[a] - 1;
        let last = *kids
            .iter()
            .rev()
            .find(|&&c| self.heights[c] == tallest)
            .expect("some child realizes the height");
        let mut out: Vec<World> = kids.iter().copied().filter(|&c| c != last).collect();
        out.push(last);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeModel {
    pub frame: TreeFrame,
    valuation: BTreeMap<String, BTreeSet<World>>,
}

impl TreeModel {
    pub fn new(
        frame: TreeFrame,
        valuation: BTreeMap<String, BTreeSet<World>>,
    ) -> Result<Self, KripkeError> {
        for (name, worlds) in &valuation {
            if !is_identifier(name) {
                return Err(KripkeError::MalformedValuation(format!(
                    "bad variable name {name:?}"
                )));
            }
            if let Some(&w) = worlds.iter().find(|&&w| w >= frame.len()) {
                return Err(KripkeError::MalformedValuation(format!(
                    "variable {name} mentions unknown world {w}"
                )));
            }
        }
        Ok(TreeModel { frame, valuation })
    }

    pub fn valuation(&self) -> &BTreeMap<String, BTreeSet<World>> {
        &self.valuation
    }

    /// Worlds where `var` holds; unknown variables hold nowhere.
    pub fn holds_at(&self, var: &str, w: World) -> bool {
        self.valuation.get(var).is_some_and(|s| s.contains(&w))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some('a'..='z'))
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    parents: Vec<Option<World>>,
    valuation: BTreeMap<String, BTreeSet<World>>,
}

impl Serialize for TreeModel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelDoc {
            parents: self.frame.parent.clone(),
            valuation: self.valuation.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = ModelDoc::deserialize(d)?;
        if doc.parents.first() != Some(&None) {
            return Err(D::Error::custom("world 0 must be the root"));
        }
        let frame = TreeFrame::from_parents(doc.parents).map_err(D::Error::custom)?;
        TreeModel::new(frame, doc.valuation).map_err(D::Error::custom)
    }
}

/// Truth value of `phi` at every world of `model`.
pub fn truth_set(model: &TreeModel, phi: &ModalFormula) -> Vec<bool> {
    use ModalFormula as M;
    let frame = &model.frame;
    let n = frame.len();
    match phi {
        M::Top => vec![true; n],
        M::Bot => vec![false; n],
        M::Var(v) => (0..n).map(|w| model.holds_at(v, w)).collect(),
        M::Not(a) => truth_set(model, a).into_iter().map(|b| !b).collect(),
        M::And(a, b) | M::Or(a, b) | M::Imp(a, b) => {
            let (x, y) = (truth_set(model, a), truth_set(model, b));
            x.into_iter()
                .zip(y)
                .map(|(x, y)| match phi {
                    M::And(..) => x && y,
                    M::Or(..) => x || y,
                    _ => !x || y,
                })
                .collect()
        }
        M::Box(a) | M::Dia(a) => {
            let inner = truth_set(model, a);
            let universal = matches!(phi, M::Box(_));
            // below[w]: inner holds at every (some) proper descendant of w
            let mut below = vec![universal; n];
            for &w in frame.postorder() {
                below[w] = if universal {
                    frame.children[w].iter().all(|&c| inner[c] && below[c])
                } else {
                    frame.children[w].iter().any(|&c| inner[c] || below[c])
                };
            }
            below
        }
    }
}

pub fn forces(model: &TreeModel, a: World, phi: &ModalFormula) -> Result<bool, KripkeError> {
    model.frame.check(a)?;
    Ok(truth_set(model, phi)[a])
}

/// AHU-style canonical code of the subtree at `w`.
fn canonical_code(frame: &TreeFrame, w: World) -> String {
    let mut codes: Vec<String> = frame.children[w]
        .iter()
        .map(|&c| canonical_code(frame, c))
        .collect();
    codes.sort();
    format!("({})", codes.concat())
}

/// Relabels a frame so that the root is 0, children follow their sorted
/// canonical codes in preorder, and `parent[i] < i`.
pub fn canonical_frame(frame: &TreeFrame) -> TreeFrame {
    fn visit(frame: &TreeFrame, w: World, parent: Option<World>, out: &mut Vec<Option<World>>) {
        let me = out.len();
        out.push(parent);
        let mut kids: Vec<(String, World)> = frame.children[w]
            .iter()
            .map(|&c| (canonical_code(frame, c), c))
            .collect();
        kids.sort();
        for (_, c) in kids {
            visit(frame, c, Some(me), out);
        }
    }
    let mut parents = Vec::with_capacity(frame.len());
    visit(frame, frame.root, None, &mut parents);
    TreeFrame::from_parents(parents).expect("relabelling preserves tree shape")
}

/// One representative per isomorphism class of rooted trees with exactly
/// `n` worlds, in canonical form.
pub fn frames_of_size(n: usize) -> Vec<TreeFrame> {
    if n == 0 {
        return Vec::new();
    }
    let mut level = vec![TreeFrame::chain(1)];
    for _ in 1..n {
        let mut seen = BTreeMap::new();
        for f in &level {
            for w in f.worlds() {
                let mut parents = f.parent.clone();
                parents.push(Some(w));
                let grown = TreeFrame::from_parents(parents).expect("adding a leaf");
                seen.entry(canonical_code(&grown, grown.root))
                    .or_insert_with(|| canonical_frame(&grown));
            }
        }
        level = seen.into_values().collect();
    }
    level
}

/// Every frame with at most `max_worlds` worlds, smallest first.
pub fn enumerate_frames(max_worlds: usize) -> Vec<TreeFrame> {
    (1..=max_worlds).flat_map(frames_of_size).collect()
}

/// Streams every frame with at most `max_worlds` worlds (one per
/// isomorphism class) crossed with every valuation of `vars`.
///
/// Valuations of a frame with `n` worlds are visited in counter order:
/// `vars[k]` holds at world `w` iff bit `w * vars.len() + k` is set.
pub fn enumerate_models(max_worlds: usize, vars: &[String]) -> impl Iterator<Item = TreeModel> + '_ {
    enumerate_frames(max_worlds)
        .into_iter()
        .flat_map(move |frame| ValuationIter::new(frame, vars))
}

struct ValuationIter<'a> {
    frame: TreeFrame,
    vars: &'a [String],
    bits: Vec<bool>,
    done: bool,
}

impl<'a> ValuationIter<'a> {
    fn new(frame: TreeFrame, vars: &'a [String]) -> Self {
        let bits = vec![false; frame.len() * vars.len()];
        ValuationIter {
            frame,
            vars,
            bits,
            done: false,
        }
    }
}

impl Iterator for ValuationIter<'_> {
    type Item = TreeModel;

    fn next(&mut self) -> Option<TreeModel> {
        if self.done {
            return None;
        }
        let k = self.vars.len();
        let mut valuation: BTreeMap<String, BTreeSet<World>> =
            self.vars.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            valuation
                .get_mut(&self.vars[i % k])
                .expect("known variable")
                .insert(i / k);
        }
        let model = TreeModel::new(self.frame.clone(), valuation).expect("valid valuation");
        // odometer increment, least significant bit first
        self.done = true;
        for b in self.bits.iter_mut() {
            *b = !*b;
            if *b {
                self.done = false;
                break;
            }
        }
        Some(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::parse_modal;

    fn frame(parents: &[Option<usize>]) -> TreeFrame {
        TreeFrame::from_parents(parents.to_vec()).unwrap()
    }

    fn two_leaves() -> TreeModel {
        let f = frame(&[None, Some(0), Some(0)]);
        let val = [
            ("v".to_string(), BTreeSet::from([1])),
            ("u".to_string(), BTreeSet::from([2])),
        ]
        .into_iter()
        .collect();
        TreeModel::new(f, val).unwrap()
    }

    #[test]
    fn heights() {
        let f = frame(&[None, Some(0), Some(0)]);
        assert_eq!(f.height(1).unwrap(), 0);
        assert_eq!(f.height(0).unwrap(), 1);
        assert_eq!(TreeFrame::chain(3).height(0).unwrap(), 2);
        assert_eq!(f.height(7), Err(KripkeError::UnknownWorld(7)));
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(TreeFrame::from_parents(vec![]).is_err());
        assert!(TreeFrame::from_parents(vec![None, None]).is_err());
        assert!(TreeFrame::from_parents(vec![Some(1), Some(0)]).is_err());
        assert!(TreeFrame::from_parents(vec![None, Some(2), Some(1)]).is_err());
        assert!(TreeFrame::from_parents(vec![None, Some(5)]).is_err());
    }

    #[test]
    fn non_canonical_labels_are_fine() {
        let f = frame(&[Some(2), Some(2), None]);
        assert_eq!(f.root(), 2);
        assert!(f.precedes(2, 0).unwrap());
        assert!(!f.precedes(0, 1).unwrap());
        assert_eq!(f.height(2).unwrap(), 1);
    }

    #[test]
    fn forcing_on_the_two_leaf_model() {
        let m = two_leaves();
        let phi = parse_modal("<>v -> (<>u -> <>(v&u))").unwrap();
        assert!(!forces(&m, 0, &phi).unwrap());
        assert!(forces(&m, 0, &parse_modal("<>v").unwrap()).unwrap());
        for leaf in [1, 2] {
            assert!(forces(&m, leaf, &parse_modal("[]F").unwrap()).unwrap());
        }
        assert!(forces(&m, 9, &phi).is_err());
    }

    #[test]
    fn successor_order() {
        let f = frame(&[None, Some(0), Some(0)]);
        assert_eq!(f.ordered_successors(0).unwrap(), vec![1, 2]);
        assert_eq!(
            TreeFrame::chain(2).ordered_successors(0).unwrap(),
            vec![1]
        );
        // child 1 has height 2 (via 3, 4), child 2 is a leaf
        let f = frame(&[None, Some(0), Some(0), Some(1), Some(3)]);
        assert_eq!(f.ordered_successors(0).unwrap(), vec![2, 1]);
        assert_eq!(f.ordered_successors(2), Err(KripkeError::Leaf(2)));
    }

    #[test]
    fn frame_counts_match_rooted_tree_numbers() {
        // rooted unlabelled trees: 1, 1, 2, 4, 9, 20, 48
        let counts: Vec<usize> = (1..=7).map(|n| frames_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48]);
        assert_eq!(enumerate_models(1, &[]).count(), 1);
        assert_eq!(enumerate_models(2, &[]).count(), 2);
        assert_eq!(enumerate_models(3, &[]).count(), 4);
        let vars = vec!["p".to_string()];
        assert_eq!(enumerate_models(2, &vars).count(), 2 + 4);
    }

    #[test]
    fn canonical_frames_have_parent_below_child() {
        for f in enumerate_frames(6) {
            assert_eq!(f.root(), 0);
            for (i, p) in f.parents().iter().enumerate().skip(1) {
                assert!(p.unwrap() < i);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let m = two_leaves();
        let text = m.to_json();
        assert_eq!(text, r#"{"parents":[null,0,0],"valuation":{"u":[2],"v":[1]}}"#);
        assert_eq!(TreeModel::from_json(&text).unwrap(), m);
        assert!(TreeModel::from_json(r#"{"parents":[0,null],"valuation":{}}"#).is_err());
        assert!(TreeModel::from_json(r#"{"parents":[null],"valuation":{"p":[3]}}"#).is_err());
        assert!(TreeModel::from_json(r#"{"parents":[null],"valuation":{"P":[0]}}"#).is_err());
    }
}
