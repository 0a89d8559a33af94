//! Tree monomials, orientation bookkeeping and formal sums of trees.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use super::family::{Colour, Corolla, Family};
use super::OperadError;
use crate::rational::{format_q, is_odd_integer, parse_q, Q};

/// An input: `Aerial` leaves sit in symmetric slots, `Ground` leaves in
/// planar ones. Labels are 1-based and independent for the two kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    Aerial(u32),
    Ground(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf(Leaf),
    Node(Box<Node>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub gen: Corolla,
    pub sym: Vec<Tree>,
    pub planar: Vec<Tree>,
}

impl Tree {
    /// The single-vertex tree of a generator with leaves in label order.
    pub fn corolla(family: Family, gen: Corolla) -> Result<Tree, OperadError> {
        gen.check(family)?;
        let sym = (1..=gen.sym_arity() as u32)
            .map(|i| Tree::Leaf(Leaf::Aerial(i)))
            .collect();
        let planar = (1..=gen.planar_arity() as u32)
            .map(|i| Tree::Leaf(Leaf::Ground(i)))
            .collect();
        Ok(Tree::Node(Box::new(Node { gen, sym, planar })))
    }

    pub fn node(gen: Corolla, sym: Vec<Tree>, planar: Vec<Tree>) -> Tree {
        Tree::Node(Box::new(Node { gen, sym, planar }))
    }

    /// Vertices in root-first depth-first order.
    pub fn vertices(&self) -> Vec<Corolla> {
        let mut out = Vec::new();
        self.walk(&mut |n| out.push(n.gen));
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Node)) {
        if let Tree::Node(n) = self {
            f(n);
            n.sym.iter().chain(&n.planar).for_each(|c| c.walk(f));
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    pub fn dim(&self, family: Family) -> i64 {
        self.vertices().iter().map(|g| g.dim(family)).sum()
    }

    pub fn degree(&self, family: Family) -> i64 {
        self.vertices().iter().map(|g| g.degree(family)).sum()
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Leaf>) {
        match self {
            Tree::Leaf(l) => out.push(*l),
            Tree::Node(n) => n
                .sym
                .iter()
                .chain(&n.planar)
                .for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Output colour of the root, `None` for a bare leaf.
    pub fn root_colour(&self) -> Option<Colour> {
        match self {
            Tree::Leaf(_) => None,
            Tree::Node(n) => Some(n.gen.output_colour()),
        }
    }

    /// Generator validity, colour matching along every edge, slot kinds of
    /// leaves, and leaf labels forming 1..a and 1..g.
    pub fn validate(&self, family: Family) -> Result<(), OperadError> {
        self.validate_shape(family)?;
        let mut aerial = Vec::new();
        let mut ground = Vec::new();
        for l in self.leaves() {
            match l {
                Leaf::Aerial(k) => aerial.push(k),
                Leaf::Ground(k) => ground.push(k),
            }
        }
        for labels in [&mut aerial, &mut ground] {
            labels.sort_unstable();
            if labels.iter().enumerate().any(|(i, &k)| k != i as u32 + 1) {
                return Err(OperadError::Malformed(format!(
                    "leaf labels {labels:?} are not 1..{}",
                    labels.len()
                )));
            }
        }
        Ok(())
    }

    fn validate_shape(&self, family: Family) -> Result<(), OperadError> {
        let Tree::Node(n) = self else {
            return Err(OperadError::Malformed(
                "a bare leaf is not a tree monomial".into(),
            ));
        };
        n.gen.check(family)?;
        if n.sym.len() != n.gen.sym_arity() || n.planar.len() != n.gen.planar_arity() {
            return Err(OperadError::Malformed(format!(
                "{} has the wrong number of children",
                n.gen.head(family)
            )));
        }
        let (_, sym_colour, planar_colour) = n.gen.colours();
        for (children, colour, aerial) in [
            (&n.sym, sym_colour, true),
            (&n.planar, planar_colour, false),
        ] {
            for c in children {
                match c {
                    Tree::Leaf(Leaf::Aerial(_)) if aerial => {}
                    Tree::Leaf(Leaf::Ground(_)) if !aerial => {}
                    Tree::Leaf(l) => {
                        return Err(OperadError::Malformed(format!(
                            "leaf {l:?} in the wrong slot kind"
                        )))
                    }
                    Tree::Node(child) => {
                        let found = child.gen.output_colour();
                        if found != colour {
                            return Err(OperadError::ColourMismatch {
                                expected: colour,
                                found,
                            });
                        }
                        c.validate_shape(family)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical form and the orientation sign relative to `self`'s own
    /// root-first order.
    pub fn canonical(&self, family: Family) -> (Tree, i32) {
        let mut next = 0;
        let w = WTree::from_tree(self, &mut next);
        let order: Vec<u32> = (0..next).collect();
        w.canonicalize(&order, family)
    }
}

/// A tree whose vertices carry tags, used to track an arbitrary vertex
/// ordering through canonicalization.
#[derive(Clone, Debug)]
pub(crate) enum WTree {
    Leaf(Leaf),
    Node(Box<WNode>),
}

#[derive(Clone, Debug)]
pub(crate) struct WNode {
    pub tag: u32,
    pub gen: Corolla,
    pub sym: Vec<WTree>,
    pub planar: Vec<WTree>,
}

impl WTree {
    /// Tags vertices with consecutive numbers in root-first order.
    pub fn from_tree(t: &Tree, next: &mut u32) -> WTree {
        match t {
            Tree::Leaf(l) => WTree::Leaf(*l),
            Tree::Node(n) => {
                let tag = *next;
                *next += 1;
                let sym = n.sym.iter().map(|c| WTree::from_tree(c, next)).collect();
                let planar = n.planar.iter().map(|c| WTree::from_tree(c, next)).collect();
                WTree::Node(Box::new(WNode {
                    tag,
                    gen: n.gen,
                    sym,
                    planar,
                }))
            }
        }
    }

    /// Canonical tree together with the sign relating the orientation given
    /// by `order` (a list of tags) to the canonical root-first order.
    pub fn canonicalize(self, order: &[u32], family: Family) -> (Tree, i32) {
        let mut skew_sign = 1;
        let (tree, pre) = self.canon(family, &mut skew_sign);
        let mut position = BTreeMap::new();
        for (i, (tag, _)) in pre.iter().enumerate() {
            position.insert(*tag, i);
        }
        let odd: std::collections::BTreeSet<u32> =
            pre.iter().filter(|(_, o)| *o).map(|(t, _)| *t).collect();
        let seq: Vec<usize> = order
            .iter()
            .filter(|t| odd.contains(t))
            .map(|t| position[t])
            .collect();
        let mut inversions = 0usize;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] > seq[j] {
                    inversions += 1;
                }
            }
        }
        let koszul = if inversions.is_multiple_of(2) { 1 } else { -1 };
        (tree, koszul * skew_sign)
    }

    fn canon(self, family: Family, skew_sign: &mut i32) -> (Tree, Vec<(u32, bool)>) {
        match self {
            WTree::Leaf(l) => (Tree::Leaf(l), Vec::new()),
            WTree::Node(n) => {
                let WNode {
                    tag,
                    gen,
                    sym,
                    planar,
                } = *n;
                let mut sym: Vec<(Tree, Vec<(u32, bool)>)> = sym
                    .into_iter()
                    .map(|c| c.canon(family, skew_sign))
                    .collect();
                let planar: Vec<(Tree, Vec<(u32, bool)>)> = planar
                    .into_iter()
                    .map(|c| c.canon(family, skew_sign))
                    .collect();
                if gen.skew(family) {
                    let mut idx: Vec<usize> = (0..sym.len()).collect();
                    idx.sort_by(|&a, &b| sym[a].0.cmp(&sym[b].0));
                    *skew_sign *= crate::graph_core::permutation_sign(&idx) as i32;
                }
                sym.sort_by(|a, b| a.0.cmp(&b.0));
                let mut pre = vec![(tag, gen.dim(family).rem_euclid(2) == 1)];
                let mut sym_t = Vec::with_capacity(sym.len());
                for (t, p) in sym {
                    sym_t.push(t);
                    pre.extend(p);
                }
                let mut planar_t = Vec::with_capacity(planar.len());
                for (t, p) in planar {
                    planar_t.push(t);
                    pre.extend(p);
                }
                (Tree::node(gen, sym_t, planar_t), pre)
            }
        }
    }
}

/// Grafts `inner` into the leaf `slot` of `outer`. Leaves of the same kind
/// as the slot are relabelled so that the inner block takes the slot's
/// position; other inner leaves are appended. The sign compares the
/// orientation (outer vertices, then inner vertices) with the canonical one.
pub fn graft(
    family: Family,
    outer: &Tree,
    slot: Leaf,
    inner: &Tree,
) -> Result<(Tree, i32), OperadError> {
    graft_all(family, outer, &[(slot, inner.clone())])
}

/// Simultaneous grafting into distinct slots, oriented as (outer, inner_1,
/// inner_2, …). Leaves of an inner tree whose kind differs from its slot are
/// appended in the order the grafts are listed.
pub fn graft_all(
    family: Family,
    outer: &Tree,
    grafts: &[(Leaf, Tree)],
) -> Result<(Tree, i32), OperadError> {
    for (i, (slot, inner)) in grafts.iter().enumerate() {
        let slot_colour = find_slot_colour(outer, *slot).ok_or(OperadError::NoSuchSlot(*slot))?;
        if let Some(found) = inner.root_colour() {
            if found != slot_colour {
                return Err(OperadError::ColourMismatch {
                    expected: slot_colour,
                    found,
                });
            }
        }
        if grafts[..i].iter().any(|(s, _)| s == slot) {
            return Err(OperadError::Malformed(format!(
                "slot {slot:?} grafted twice"
            )));
        }
    }
    let outer_leaves = outer.leaves();
    let count = |ls: &[Leaf], aerial: bool| {
        ls.iter()
            .filter(|l| matches!(l, Leaf::Aerial(_)) == aerial)
            .count() as u32
    };
    let kind = |l: Leaf, aerial: bool| {
        if aerial {
            Leaf::Aerial(l_index(l))
        } else {
            Leaf::Ground(l_index(l))
        }
    };
    let mut outer_map: BTreeMap<Leaf, Leaf> = BTreeMap::new();
    let mut inner_maps: Vec<BTreeMap<Leaf, Leaf>> = vec![BTreeMap::new(); grafts.len()];
    for aerial in [true, false] {
        let mut next = 1;
        for j in 1..=count(&outer_leaves, aerial) {
            let leaf = kind(Leaf::Aerial(j), aerial);
            match grafts.iter().position(|(s, _)| *s == leaf) {
                Some(g) => {
                    for l in grafts[g]
                        .1
                        .leaves()
                        .into_iter()
                        .filter(|l| matches!(l, Leaf::Aerial(_)) == aerial)
                    {
                        inner_maps[g].insert(l, kind(Leaf::Aerial(next + l_index(l) - 1), aerial));
                    }
                    next += count(&grafts[g].1.leaves(), aerial);
                }
                None => {
                    outer_map.insert(leaf, kind(Leaf::Aerial(next), aerial));
                    next += 1;
                }
            }
        }
        for (g, (slot, inner)) in grafts.iter().enumerate() {
            if matches!(slot, Leaf::Aerial(_)) == aerial {
                continue;
            }
            let own = count(&inner.leaves(), aerial);
            for l in inner
                .leaves()
                .into_iter()
                .filter(|l| matches!(l, Leaf::Aerial(_)) == aerial)
            {
                inner_maps[g].insert(l, kind(Leaf::Aerial(next + l_index(l) - 1), aerial));
            }
            next += own;
        }
    }
    let mut next = 0;
    let w_outer = WTree::from_tree(outer, &mut next);
    let mut subs: BTreeMap<Leaf, WTree> = BTreeMap::new();
    for (g, (slot, inner)) in grafts.iter().enumerate() {
        let map = &inner_maps[g];
        subs.insert(
            *slot,
            WTree::from_tree(inner, &mut next).map_leaves(&|l| map[&l]),
        );
    }
    let grafted = w_outer.replace_leaves(&|l| match subs.get(&l) {
        Some(w) => w.clone(),
        None => WTree::Leaf(outer_map[&l]),
    });
    let order: Vec<u32> = (0..next).collect();
    Ok(grafted.canonicalize(&order, family))
}

fn l_index(l: Leaf) -> u32 {
    match l {
        Leaf::Aerial(k) | Leaf::Ground(k) => k,
    }
}

fn find_slot_colour(t: &Tree, slot: Leaf) -> Option<Colour> {
    let Tree::Node(n) = t else { return None };
    let (_, sc, pc) = n.gen.colours();
    for c in &n.sym {
        match c {
            Tree::Leaf(l) if *l == slot => return Some(sc),
            Tree::Node(_) => {
                if let Some(col) = find_slot_colour(c, slot) {
                    return Some(col);
                }
            }
            _ => {}
        }
    }
    for c in &n.planar {
        match c {
            Tree::Leaf(l) if *l == slot => return Some(pc),
            Tree::Node(_) => {
                if let Some(col) = find_slot_colour(c, slot) {
                    return Some(col);
                }
            }
            _ => {}
        }
    }
    None
}

impl WTree {
    pub fn map_leaves(self, f: &impl Fn(Leaf) -> Leaf) -> WTree {
        match self {
            WTree::Leaf(l) => WTree::Leaf(f(l)),
            WTree::Node(n) => {
                let WNode {
                    tag,
                    gen,
                    sym,
                    planar,
                } = *n;
                WTree::Node(Box::new(WNode {
                    tag,
                    gen,
                    sym: sym.into_iter().map(|c| c.map_leaves(f)).collect(),
                    planar: planar.into_iter().map(|c| c.map_leaves(f)).collect(),
                }))
            }
        }
    }

    pub fn replace_leaves(self, f: &impl Fn(Leaf) -> WTree) -> WTree {
        match self {
            WTree::Leaf(l) => f(l),
            WTree::Node(n) => {
                let WNode {
                    tag,
                    gen,
                    sym,
                    planar,
                } = *n;
                WTree::Node(Box::new(WNode {
                    tag,
                    gen,
                    sym: sym.into_iter().map(|c| c.replace_leaves(f)).collect(),
                    planar: planar.into_iter().map(|c| c.replace_leaves(f)).collect(),
                }))
            }
        }
    }
}

/// A formal linear combination of canonical trees of one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSum {
    pub family: Family,
    pub terms: BTreeMap<Tree, Q>,
}

impl TreeSum {
    pub fn new(family: Family) -> Self {
        TreeSum {
            family,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff · t`, canonicalizing `t`.
    pub fn add(&mut self, t: &Tree, coeff: Q) {
        let (c, s) = t.canonical(self.family);
        self.add_canonical(c, if s > 0 { coeff } else { -coeff });
    }

    pub(crate) fn add_canonical(&mut self, t: Tree, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(t.clone()).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn add_sum(&mut self, other: &TreeSum, scale: &Q) {
        for (t, c) in &other.terms {
            self.add_canonical(t.clone(), c * scale);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficients reduced mod 2 (all coefficients here are integers).
    pub fn mod2(&self) -> TreeSum {
        let mut out = TreeSum::new(self.family);
        for (t, c) in &self.terms {
            if is_odd_integer(c) || !c.denom().is_one() {
                out.terms.insert(t.clone(), Q::one());
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> Q {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(t, c)| json!({ "coeff": format_q(c), "tree": super::sexpr::print_tree(t, self.family) }))
            .collect();
        json!({ "family": self.family.to_string(), "terms": terms })
    }

    pub fn from_json(family: Family, v: &serde_json::Value) -> Result<TreeSum, OperadError> {
        let bad = |s: &str| OperadError::Malformed(s.to_string());
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| bad("missing terms"))?;
        let mut out = TreeSum::new(family);
        for term in terms {
            let coeff = term
                .get("coeff")
                .and_then(|c| c.as_str())
                .ok_or_else(|| bad("missing coeff"))?;
            let coeff = parse_q(coeff).map_err(|e| bad(&e.to_string()))?;
            let tree = term
                .get("tree")
                .and_then(|c| c.as_str())
                .ok_or_else(|| bad("missing tree"))?;
            let tree = super::sexpr::parse_tree(family, tree).map_err(|e| bad(&e.to_string()))?;
            out.add(&tree, coeff);
        }
        Ok(out)
    }
}

impl fmt::Display for TreeSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({}) {}",
                format_q(c),
                super::sexpr::print_tree(t, self.family)
            )?;
        }
        Ok(())
    }
}
