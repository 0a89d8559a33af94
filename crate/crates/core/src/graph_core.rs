//! Labelled, coloured Feynman graphs with an ordered edge list.
//!
//! The edge order is the orientation: permuting edges by π multiplies the
//! class by sign(π)^{d−1}. For even d two parallel edges with the same
//! direction force the class to vanish.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rational::{format_q, serde_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Aerial,
    Ground,
}

/// Which coloured graph operad a graph lives in: free (𝔊↑↓), down (𝔊↓:
/// edges only into ground vertices) or up (𝔊↑: edges only out of them).
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ArrowMode {
    #[default]
    Free,
    Down,
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: u32,
    pub colour: Colour,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop at vertex {0}")]
    Loop(u32),
    #[error("edge ({0},{1}) violates arrow mode {2:?}")]
    ArrowMode(u32, u32, ArrowMode),
    #[error("edge ({0},{1}) references an unknown vertex")]
    UnknownVertex(u32, u32),
    #[error("vertex ids must be 1..n with aerial vertices first, got {0:?}")]
    BadVertexIds(Vec<u32>),
    #[error("empty vertex set")]
    EmptySet,
    #[error("vertex {0} is not in the graph")]
    NotInGraph(u32),
    #[error("ambient dimension must be at least 1")]
    BadDimension,
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("block/colour mismatch: {0}")]
    Colour(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeynmanGraph {
    pub d: u32,
    #[serde(default)]
    pub arrow_mode: ArrowMode,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<(u32, u32)>,
}

impl FeynmanGraph {
    /// Aerial vertices `1..=n`, free arrow mode.
    pub fn aerial(d: u32, n: u32, edges: &[(u32, u32)]) -> Self {
        Self::mixed(d, n, 0, ArrowMode::Free, edges)
    }

    /// Aerial vertices `1..=n` followed by ground vertices `n+1..=n+m`.
    pub fn mixed(d: u32, n: u32, m: u32, arrow_mode: ArrowMode, edges: &[(u32, u32)]) -> Self {
        let vertices = (1..=n)
            .map(|id| VertexSpec {
                id,
                colour: Colour::Aerial,
            })
            .chain((n + 1..=n + m).map(|id| VertexSpec {
                id,
                colour: Colour::Ground,
            }))
            .collect();
        FeynmanGraph {
            d,
            arrow_mode,
            vertices,
            edges: edges.to_vec(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_aerial(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| v.colour == Colour::Aerial)
            .count()
    }

    pub fn n_ground(&self) -> usize {
        self.n_vertices() - self.n_aerial()
    }

    pub fn is_aerial_only(&self) -> bool {
        self.n_ground() == 0
    }

    pub fn colour(&self, id: u32) -> Option<Colour> {
        self.vertices
            .get(id.checked_sub(1)? as usize)
            .map(|v| v.colour)
    }

    pub fn out_degree(&self, id: u32) -> usize {
        self.edges.iter().filter(|e| e.0 == id).count()
    }

    pub fn in_degree(&self, id: u32) -> usize {
        self.edges.iter().filter(|e| e.1 == id).count()
    }

    /// Structural checks: ids, loops, arrow mode. Edge order is not checked.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.d == 0 {
            return Err(GraphError::BadDimension);
        }
        let ok_ids = self
            .vertices
            .iter()
            .enumerate()
            .all(|(i, v)| v.id == i as u32 + 1)
            && self.vertices.windows(2).all(|w| w[0].colour <= w[1].colour);
        if !ok_ids {
            return Err(GraphError::BadVertexIds(
                self.vertices.iter().map(|v| v.id).collect(),
            ));
        }
        for &(s, t) in &self.edges {
            let (Some(cs), Some(ct)) = (self.colour(s), self.colour(t)) else {
                return Err(GraphError::UnknownVertex(s, t));
            };
            if s == t {
                return Err(GraphError::Loop(s));
            }
            if !edge_allowed(self.arrow_mode, cs, ct) {
                return Err(GraphError::ArrowMode(s, t, self.arrow_mode));
            }
        }
        Ok(())
    }

    /// Sorts edges by (source, target, insertion index) and returns the
    /// canonical graph with sign parity^{d−1}; the sign is 0 when d is even
    /// and two parallel edges point the same way.
    pub fn normalize(&self) -> Result<(FeynmanGraph, i8), GraphError> {
        self.validate()?;
        let mut idx: Vec<usize> = (0..self.edges.len()).collect();
        idx.sort_by_key(|&i| (self.edges[i], i));
        let edges: Vec<(u32, u32)> = idx.iter().map(|&i| self.edges[i]).collect();
        let canonical = FeynmanGraph {
            edges,
            ..self.clone()
        };
        if self.d.is_multiple_of(2) && canonical.edges.windows(2).any(|w| w[0] == w[1]) {
            return Ok((canonical, 0));
        }
        let sign = if self.d % 2 == 1 {
            1
        } else {
            permutation_sign(&idx)
        };
        Ok((canonical, sign))
    }

    /// Γ_A: the vertices of A relabelled 1..#A in increasing order and all
    /// edges with both ends in A, in their original relative order.
    pub fn subgraph(&self, a: &[u32]) -> Result<FeynmanGraph, GraphError> {
        let set = self.check_subset(a)?;
        let relabel: BTreeMap<u32, u32> = set
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32 + 1))
            .collect();
        let vertices = set
            .iter()
            .map(|&v| VertexSpec {
                id: relabel[&v],
                colour: self.vertices[v as usize - 1].colour,
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|(s, t)| set.contains(s) && set.contains(t))
            .map(|(s, t)| (relabel[s], relabel[t]))
            .collect();
        Ok(FeynmanGraph {
            d: self.d,
            arrow_mode: self.arrow_mode,
            vertices,
            edges,
        })
    }

    /// Γ/Γ_A: collapses A to one vertex, deletes the edges inside A and keeps
    /// the order of the remaining ones. Vertices are ordered by their least
    /// original id; the collapsed vertex is ground iff A meets the ground.
    pub fn quotient(&self, a: &[u32]) -> Result<FeynmanGraph, GraphError> {
        let set = self.check_subset(a)?;
        let mut blocks: Vec<Vec<u32>> = vec![set.iter().copied().collect()];
        blocks.extend(
            self.vertices
                .iter()
                .map(|v| v.id)
                .filter(|v| !set.contains(v))
                .map(|v| vec![v]),
        );
        blocks.sort_by_key(|b| b[0]);
        let blocks = self.order_blocks_by_colour(blocks);
        self.quotient_partition(&blocks)
    }

    /// Collapses every block of a partition of V(Γ); block k becomes vertex
    /// k+1. Edges inside a block are deleted.
    pub fn quotient_partition(&self, blocks: &[Vec<u32>]) -> Result<FeynmanGraph, GraphError> {
        let mut owner = vec![u32::MAX; self.n_vertices() + 1];
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(GraphError::EmptySet);
            }
            for &v in b {
                if v == 0 || v as usize > self.n_vertices() {
                    return Err(GraphError::NotInGraph(v));
                }
                if owner[v as usize] != u32::MAX {
                    return Err(GraphError::Arity(format!("vertex {v} in two blocks")));
                }
                owner[v as usize] = k as u32 + 1;
            }
        }
        if owner[1..].contains(&u32::MAX) {
            return Err(GraphError::Arity(
                "blocks do not cover the vertex set".into(),
            ));
        }
        let vertices = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let ground = b
                    .iter()
                    .any(|&v| self.vertices[v as usize - 1].colour == Colour::Ground);
                VertexSpec {
                    id: k as u32 + 1,
                    colour: if ground {
                        Colour::Ground
                    } else {
                        Colour::Aerial
                    },
                }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|&(s, t)| (owner[s as usize], owner[t as usize]))
            .filter(|(s, t)| s != t)
            .collect();
        Ok(FeynmanGraph {
            d: self.d,
            arrow_mode: self.arrow_mode,
            vertices,
            edges,
        })
    }

    fn order_blocks_by_colour(&self, mut blocks: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
        let is_ground = |b: &Vec<u32>| {
            b.iter()
                .any(|&v| self.vertices[v as usize - 1].colour == Colour::Ground)
        };
        blocks.sort_by_key(|b| (is_ground(b), b[0]));
        blocks
    }

    fn check_subset(&self, a: &[u32]) -> Result<BTreeSet<u32>, GraphError> {
        if a.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let set: BTreeSet<u32> = a.iter().copied().collect();
        for &v in &set {
            if v == 0 || v as usize > self.n_vertices() {
                return Err(GraphError::NotInGraph(v));
            }
        }
        Ok(set)
    }

    /// Hex SHA-256 of the canonical JSON form (edges sorted).
    pub fn canonical_hash(&self) -> String {
        let mut g = self.clone();
        g.edges.sort();
        let json = serde_json::to_string(&g).expect("graph serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl fmt::Display for FeynmanGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let na = self.n_aerial();
        write!(f, "G[d={}, {}+{}; ", self.d, na, self.n_ground())?;
        write!(
            f,
            "{}]",
            self.edges.iter().map(|(s, t)| format!("{s}>{t}")).join(" ")
        )
    }
}

pub(crate) fn edge_allowed(mode: ArrowMode, source: Colour, target: Colour) -> bool {
    match mode {
        ArrowMode::Free => true,
        ArrowMode::Down => source == Colour::Aerial,
        ArrowMode::Up => target == Colour::Aerial,
    }
}

/// Sign of the permutation `i ↦ perm[i]`.
pub fn permutation_sign(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// A formal linear combination of canonical graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSum {
    pub terms: BTreeMap<FeynmanGraph, Q>,
}

impl GraphSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coeff · g`, normalizing `g` first.
    pub fn add(&mut self, g: &FeynmanGraph, coeff: Q) -> Result<(), GraphError> {
        let (canonical, sign) = g.normalize()?;
        if sign == 0 || coeff.is_zero() {
            return Ok(());
        }
        let c = if sign > 0 { coeff } else { -coeff };
        let entry = self.terms.entry(canonical.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&canonical);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeynmanGraph, &Q)> {
        self.terms.iter()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<GraphTermJson> = self
            .terms
            .iter()
            .map(|(g, c)| GraphTermJson {
                coeff: c.clone(),
                graph: g.clone(),
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        #[derive(Deserialize)]
        struct Wrapper {
            terms: Vec<GraphTermJson>,
        }
        let w: Wrapper = serde_json::from_value(v.clone())?;
        let mut s = GraphSum::new();
        for t in w.terms {
            s.add(&t.graph, t.coeff).map_err(serde::de::Error::custom)?;
        }
        Ok(s)
    }
}

impl fmt::Display for GraphSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let parts = self
            .terms
            .iter()
            .map(|(g, c)| format!("({}) {}", format_q(c), g));
        write!(f, "{}", parts.format(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphTermJson {
    #[serde(with = "serde_q")]
    coeff: Q,
    graph: FeynmanGraph,
}

/// Operadic composition g0 ∘ (parts) along `partition`: block k (a set of
/// final labels) receives `parts[k]`, whose i-th vertex gets the i-th
/// smallest label. Every edge of g0 picks a source in its source block and a
/// target in its target block; the stored order is g0's edges followed by
/// the parts' edges in block order.
pub fn compose(
    g0: &FeynmanGraph,
    parts: &[FeynmanGraph],
    partition: &[Vec<u32>],
) -> Result<GraphSum, GraphError> {
    g0.validate()?;
    let p = g0.n_vertices();
    if parts.len() != p || partition.len() != p {
        return Err(GraphError::Arity(format!(
            "g0 has {p} vertices, got {} parts and {} blocks",
            parts.len(),
            partition.len()
        )));
    }
    let total: usize = partition.iter().map(Vec::len).sum();
    let mut label_colour = vec![None; total + 1];
    let mut blocks = Vec::with_capacity(p);
    for (k, (part, block)) in parts.iter().zip(partition).enumerate() {
        part.validate()?;
        if part.d != g0.d {
            return Err(GraphError::DimensionMismatch(part.d, g0.d));
        }
        let mut b = block.clone();
        b.sort_unstable();
        if b.len() != part.n_vertices() {
            return Err(GraphError::Arity(format!(
                "block {k} has {} labels, part has {} vertices",
                b.len(),
                part.n_vertices()
            )));
        }
        let host = g0.vertices[k].colour;
        match host {
            Colour::Aerial if !part.is_aerial_only() => {
                return Err(GraphError::Colour(format!(
                    "part {k} has ground vertices but g0 vertex {} is aerial",
                    k + 1
                )))
            }
            Colour::Ground if part.is_aerial_only() => {
                return Err(GraphError::Colour(format!(
                    "part {k} is aerial-only but g0 vertex {} is ground",
                    k + 1
                )))
            }
            Colour::Ground if part.arrow_mode != g0.arrow_mode => {
                return Err(GraphError::Colour(format!(
                    "part {k} arrow mode differs from g0"
                )))
            }
            _ => {}
        }
        for (i, &label) in b.iter().enumerate() {
            let slot = label_colour
                .get_mut(label as usize)
                .ok_or(GraphError::NotInGraph(label))?;
            if label == 0 || slot.is_some() {
                return Err(GraphError::Arity(format!(
                    "label {label} repeated or out of range"
                )));
            }
            *slot = Some(part.vertices[i].colour);
        }
        blocks.push(b);
    }
    let colours: Vec<Colour> = label_colour[1..]
        .iter()
        .map(|c| c.expect("labels cover 1..n"))
        .collect();
    if colours.windows(2).any(|w| w[0] > w[1]) {
        return Err(GraphError::Colour(
            "final labels must list aerial vertices before ground ones".into(),
        ));
    }
    let n_aerial = colours.iter().filter(|&&c| c == Colour::Aerial).count() as u32;
    let n_ground = total as u32 - n_aerial;

    let mut inner_edges = Vec::new();
    for (part, block) in parts.iter().zip(&blocks) {
        for &(s, t) in &part.edges {
            inner_edges.push((block[s as usize - 1], block[t as usize - 1]));
        }
    }
    let choices: Vec<Vec<(u32, u32)>> = g0
        .edges
        .iter()
        .map(|&(s, t)| {
            let sources = &blocks[s as usize - 1];
            let targets = &blocks[t as usize - 1];
            sources
                .iter()
                .flat_map(|&a| targets.iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| {
                    edge_allowed(
                        g0.arrow_mode,
                        colours[a as usize - 1],
                        colours[b as usize - 1],
                    )
                })
                .collect()
        })
        .collect();

    let mut sum = GraphSum::new();
    for outer in edge_choices(&choices) {
        let mut edges = outer;
        edges.extend_from_slice(&inner_edges);
        let g = FeynmanGraph::mixed(g0.d, n_aerial, n_ground, g0.arrow_mode, &edges);
        sum.add(&g, Q::one())?;
    }
    Ok(sum)
}

/// Cartesian product of edge choices; one empty choice list for no edges.
fn edge_choices(choices: &[Vec<(u32, u32)>]) -> Vec<Vec<(u32, u32)>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect()
    })
}

/// All nonzero canonical graphs with `n` aerial and `m` ground vertices and
/// `l` edges, in lexicographic order of their sorted edge lists.
pub fn enumerate(n: u32, m: u32, l: usize, d: u32, mode: ArrowMode) -> Vec<FeynmanGraph> {
    let proto = FeynmanGraph::mixed(d, n, m, mode, &[]);
    let total = n + m;
    let allowed: Vec<(u32, u32)> = (1..=total)
        .flat_map(|s| (1..=total).map(move |t| (s, t)))
        .filter(|&(s, t)| s != t)
        .filter(|&(s, t)| {
            edge_allowed(
                mode,
                proto.vertices[s as usize - 1].colour,
                proto.vertices[t as usize - 1].colour,
            )
        })
        .collect();
    let make = |edges: Vec<(u32, u32)>| FeynmanGraph {
        edges,
        ..proto.clone()
    };
    if d.is_multiple_of(2) {
        allowed.into_iter().combinations(l).map(make).collect()
    } else {
        allowed
            .into_iter()
            .combinations_with_replacement(l)
            .map(make)
            .collect()
    }
}

/// Subsets A with 2 ≤ #A < #V, (d−1) | (d·#A − 2) and
/// #E(Γ_A) = (d·#A − 2)/(d − 1) − 1.
pub fn admissible_subsets(g: &FeynmanGraph) -> Vec<Vec<u32>> {
    let nv = g.n_vertices();
    let d = g.d as i64;
    if d < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for size in 2..nv {
        let top = d * size as i64 - 2;
        if top % (d - 1) != 0 {
            continue;
        }
        let need = (top / (d - 1) - 1) as usize;
        for a in (1..=nv as u32).combinations(size) {
            let inside = g
                .edges
                .iter()
                .filter(|(s, t)| a.contains(s) && a.contains(t))
                .count();
            if inside == need {
                out.push(a);
            }
        }
    }
    out
}
