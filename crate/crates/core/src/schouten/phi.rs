//! Graph operators Φ_Γ = μ ∘ ∏_e Δ^τ_e and the representation identity
//! Φ_{Γ0 ∘ (Γ_1..Γ_p)} = Φ_{Γ0} ∘ (Φ_{Γ_1} ⊗ … ⊗ Φ_{Γ_p}).

use std::sync::Arc;

use num_traits::One;

use super::algebra::{diff_mono, mul_mono, AlgebraSpec, GenKind, GradedPoly, Mono};
use super::bernoulli::DeformedBracket;
use super::SchoutenError;
use crate::graph_core::{compose, ArrowMode, FeynmanGraph, GraphSum};
use crate::rational::Q;

/// Output projection for coloured graphs: `Down` kills monomials containing
/// a ψ, `Up` kills those containing an x, `Free` keeps everything.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Projection {
    #[default]
    Free,
    Down,
    Up,
}

impl Projection {
    pub fn arrow_mode(self) -> ArrowMode {
        match self {
            Projection::Free => ArrowMode::Free,
            Projection::Down => ArrowMode::Down,
            Projection::Up => ArrowMode::Up,
        }
    }

    fn killed(self) -> &'static [GenKind] {
        match self {
            Projection::Free => &[],
            Projection::Down => &[GenKind::Psi],
            Projection::Up => &[GenKind::X],
        }
    }
}

/// Applies the edges (0-based (source, target)) rightmost first to one tensor
/// of monomials, then multiplies in slot order.
fn phi_tensor(
    spec: &AlgebraSpec,
    edges: &[(usize, usize)],
    coeff: Q,
    tensor: Vec<Mono>,
    out: &mut GradedPoly,
) {
    let mut states: Vec<(i128, Vec<Mono>)> = vec![(1, tensor)];
    for &(s, t) in edges.iter().rev() {
        let mut next = Vec::new();
        for (c, ms) in &states {
            for &(p, qg) in &spec.pairing {
                let Some((mq, nq, dq)) = diff_mono(spec, &ms[t], qg, true) else {
                    continue;
                };
                let before_t: i64 = ms[..t].iter().map(|m| m.degree(spec) as i64).sum();
                let mut ms2 = ms.clone();
                ms2[t] = dq;
                let Some((mp, np, dp)) = diff_mono(spec, &ms2[s], p, true) else {
                    continue;
                };
                let before_s: i64 = ms2[..s].iter().map(|m| m.degree(spec) as i64).sum();
                ms2[s] = dp;
                let mut neg = nq ^ np;
                neg ^= (spec.gens[qg].degree as i64 * before_t).rem_euclid(2) == 1;
                neg ^= (spec.gens[p].degree as i64 * before_s).rem_euclid(2) == 1;
                let v = c * mq as i128 * mp as i128;
                next.push((if neg { -v } else { v }, ms2));
            }
        }
        states = next;
    }
    for (c, ms) in states {
        let mut acc = Some((false, Mono::one(spec.n_gens())));
        for m in &ms {
            acc = acc.and_then(|(n0, a)| mul_mono(spec, &a, m).map(|(n1, r)| (n0 ^ n1, r)));
        }
        if let Some((neg, m)) = acc {
            let v = &coeff * Q::from_integer(c.into());
            out.add_term(m, if neg { -v } else { v });
        }
    }
}

/// Unprojected Φ for an edge list on `inputs.len()` vertices.
fn phi_edges(
    spec: &Arc<AlgebraSpec>,
    edges: &[(usize, usize)],
    inputs: &[GradedPoly],
) -> GradedPoly {
    let mut out = GradedPoly::zero(spec);
    let mut stack: Vec<(Q, Vec<Mono>)> = vec![(Q::one(), Vec::new())];
    for f in inputs {
        let mut next = Vec::with_capacity(stack.len() * f.len());
        for (c, ms) in &stack {
            for (m, a) in &f.terms {
                let mut ms2 = ms.clone();
                ms2.push(m.clone());
                next.push((c * a, ms2));
            }
        }
        stack = next;
    }
    for (c, tensor) in stack {
        phi_tensor(spec, edges, c, tensor, &mut out);
    }
    out
}

fn check_inputs(
    g: &FeynmanGraph,
    inputs: &[GradedPoly],
) -> Result<Arc<AlgebraSpec>, SchoutenError> {
    g.validate()?;
    if inputs.len() != g.n_vertices() {
        return Err(SchoutenError::Arity {
            expected: g.n_vertices(),
            got: inputs.len(),
        });
    }
    let spec = inputs[0].spec.clone();
    for f in inputs {
        if *f.spec != *spec {
            return Err(SchoutenError::SpecMismatch);
        }
    }
    Ok(spec)
}

fn zero_based(g: &FeynmanGraph) -> Vec<(usize, usize)> {
    g.edges
        .iter()
        .map(|&(s, t)| (s as usize - 1, t as usize - 1))
        .collect()
}

/// Φ_Γ(f_1, …, f_n) for an aerial graph, inputs in vertex-label order.
pub fn phi_graph(g: &FeynmanGraph, inputs: &[GradedPoly]) -> Result<GradedPoly, SchoutenError> {
    if !g.is_aerial_only() {
        return Err(SchoutenError::Unsupported(
            "phi_graph takes aerial-only graphs; use phi_graph_coloured".into(),
        ));
    }
    let spec = check_inputs(g, inputs)?;
    Ok(phi_edges(&spec, &zero_based(g), inputs))
}

/// π ∘ Φ_Γ(γ_1, …, γ_n; f_1, …, f_m) for a two-coloured graph. Ground inputs
/// must lie in the subalgebra the projection keeps. Down/up graphs need the
/// matching projection; free graphs accept any.
pub fn phi_graph_coloured(
    g: &FeynmanGraph,
    aerial: &[GradedPoly],
    ground: &[GradedPoly],
    projection: Projection,
) -> Result<GradedPoly, SchoutenError> {
    if g.n_aerial() != aerial.len() || g.n_ground() != ground.len() {
        return Err(SchoutenError::Arity {
            expected: g.n_vertices(),
            got: aerial.len() + ground.len(),
        });
    }
    if g.arrow_mode != ArrowMode::Free && g.arrow_mode != projection.arrow_mode() {
        return Err(SchoutenError::Unsupported(format!(
            "graph arrow mode {:?} does not match projection {:?}",
            g.arrow_mode, projection
        )));
    }
    for (i, f) in ground.iter().enumerate() {
        if !f.avoids(projection.killed()) {
            return Err(SchoutenError::Subalgebra(i + 1));
        }
    }
    let inputs: Vec<GradedPoly> = aerial.iter().chain(ground).cloned().collect();
    let spec = check_inputs(g, &inputs)?;
    let out = phi_edges(&spec, &zero_based(g), &inputs);
    let killed = projection.killed();
    Ok(out.filter(|m| killed.iter().all(|&k| m.degree_in(&spec, k) == 0)))
}

fn koszul_reorder_negative(order: &[usize], degrees: &[i32]) -> bool {
    let mut neg = false;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j]
                && degrees[order[i]].rem_euclid(2) == 1
                && degrees[order[j]].rem_euclid(2) == 1
            {
                neg = !neg;
            }
        }
    }
    neg
}

/// LHS − RHS of the representation identity on homogeneous inputs given in
/// final label order; inhomogeneous inputs are split multilinearly.
pub fn representation_check(
    g0: &FeynmanGraph,
    parts: &[FeynmanGraph],
    partition: &[Vec<u32>],
    inputs: &[GradedPoly],
) -> Result<GradedPoly, SchoutenError> {
    let composed = compose(g0, parts, partition)?;
    let total: usize = partition.iter().map(Vec::len).sum();
    if inputs.len() != total {
        return Err(SchoutenError::Arity {
            expected: total,
            got: inputs.len(),
        });
    }
    let spec = inputs
        .first()
        .map(|f| f.spec.clone())
        .ok_or(SchoutenError::Arity {
            expected: 1,
            got: 0,
        })?;
    let blocks: Vec<Vec<usize>> = partition
        .iter()
        .map(|b| {
            let mut b: Vec<usize> = b.iter().map(|&l| l as usize - 1).collect();
            b.sort_unstable();
            b
        })
        .collect();
    let order: Vec<usize> = blocks.iter().flatten().copied().collect();
    let dm1 = spec.d as i64 - 1;

    let comps: Vec<Vec<(i32, GradedPoly)>> = inputs
        .iter()
        .map(|f| f.homogeneous_components().into_iter().collect())
        .collect();
    let mut residual = GradedPoly::zero(&spec);
    for choice in itertools::Itertools::multi_cartesian_product(comps.iter().map(|c| c.iter())) {
        let degrees: Vec<i32> = choice.iter().map(|(d, _)| *d).collect();
        let fs: Vec<GradedPoly> = choice.iter().map(|(_, f)| f.clone()).collect();

        let mut neg = koszul_reorder_negative(&order, &degrees);
        let mut earlier: i64 = 0;
        let mut outer_inputs = Vec::with_capacity(parts.len());
        for (part, block) in parts.iter().zip(&blocks) {
            neg ^= (part.edges.len() as i64 * dm1 * earlier).rem_euclid(2) == 1;
            let block_inputs: Vec<GradedPoly> = block.iter().map(|&i| fs[i].clone()).collect();
            outer_inputs.push(phi_edges(&spec, &zero_based(part), &block_inputs));
            earlier += block.iter().map(|&i| degrees[i] as i64).sum::<i64>();
        }
        let lhs = phi_edges(&spec, &zero_based(g0), &outer_inputs);
        residual = if neg {
            &residual - &lhs
        } else {
            &residual + &lhs
        };

        for (g, c) in composed.iter() {
            let rhs = phi_edges(&spec, &zero_based(g), &fs).scale(c);
            residual = &residual - &rhs;
        }
    }
    Ok(residual)
}

#[derive(Clone, Debug)]
pub enum OperatorKind {
    /// Σ c_Γ Φ_Γ followed by a projection.
    Graphs {
        sum: GraphSum,
        projection: Projection,
    },
    /// A binary bracket given by a generator-level bivector.
    Bracket(DeformedBracket),
}

/// A multilinear operator on a fixed algebra.
#[derive(Clone, Debug)]
pub struct MultiOperator {
    pub arity: usize,
    /// Degree shift, Σ_in |f_i| + degree = |output|.
    pub degree: i32,
    pub kind: OperatorKind,
}

impl MultiOperator {
    /// Σ c_Γ Φ_Γ; all graphs must share a vertex count and edge count.
    pub fn from_graphs(
        sum: GraphSum,
        arity: usize,
        projection: Projection,
    ) -> Result<Self, SchoutenError> {
        let mut degree = None;
        for (g, _) in sum.iter() {
            if g.n_vertices() != arity {
                return Err(SchoutenError::Arity {
                    expected: arity,
                    got: g.n_vertices(),
                });
            }
            let k = -(g.edges.len() as i32) * (g.d as i32 - 1);
            if degree.is_some_and(|d| d != k) {
                return Err(SchoutenError::NotHomogeneous);
            }
            degree = Some(k);
        }
        Ok(MultiOperator {
            arity,
            degree: degree.unwrap_or(0),
            kind: OperatorKind::Graphs { sum, projection },
        })
    }

    pub fn zero(arity: usize) -> Self {
        MultiOperator {
            arity,
            degree: 0,
            kind: OperatorKind::Graphs {
                sum: GraphSum::new(),
                projection: Projection::Free,
            },
        }
    }

    pub fn provenance(&self) -> Option<&GraphSum> {
        match &self.kind {
            OperatorKind::Graphs { sum, .. } => Some(sum),
            OperatorKind::Bracket(_) => None,
        }
    }

    pub fn apply(&self, inputs: &[GradedPoly]) -> Result<GradedPoly, SchoutenError> {
        if inputs.len() != self.arity {
            return Err(SchoutenError::Arity {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        match &self.kind {
            OperatorKind::Bracket(b) => b.apply(&inputs[0], &inputs[1]),
            OperatorKind::Graphs { sum, projection } => {
                let spec = inputs
                    .first()
                    .map(|f| f.spec.clone())
                    .ok_or(SchoutenError::Arity {
                        expected: 1,
                        got: 0,
                    })?;
                let mut out = GradedPoly::zero(&spec);
                for (g, c) in sum.iter() {
                    let n = g.n_aerial();
                    let term = if g.is_aerial_only() {
                        phi_graph(g, inputs)?
                    } else {
                        phi_graph_coloured(g, &inputs[..n], &inputs[n..], *projection)?
                    };
                    out = out.try_add(&term.scale(c))?;
                }
                Ok(out)
            }
        }
    }

    /// Whether the operator vanishes on these inputs.
    pub fn is_zero_on(&self, inputs: &[GradedPoly]) -> Result<bool, SchoutenError> {
        Ok(self.apply(inputs)?.is_zero())
    }
}
