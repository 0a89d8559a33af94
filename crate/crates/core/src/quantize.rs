//! Quantized operations assembled from weights and Φ operators: the induced
//! L∞{d−1} operations μ_n, twisted A∞ operations μ^γ_m and truncated star
//! products.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph_core::{enumerate, ArrowMode, FeynmanGraph, GraphSum};
use crate::rational::{format_q, Q};
use crate::schouten::{
    mc_residual, AlgebraSpec, GenKind, GradedPoly, MultiOperator, Projection, SchoutenError,
};
use crate::weights::{
    relabel_canonical, snap_rational, CacheKey, GaugeSlice, Propagator, WeightCache, WeightError,
    WeightEstimate, WeightOptions,
};

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Schouten(#[from] SchoutenError),
    #[error("n must be at least 2, got {0}")]
    Arity(usize),
    #[error("γ is not Maurer-Cartan: residual {0}")]
    NotMaurerCartan(String),
    #[error("{0}")]
    Unsupported(String),
}

/// Computes, caches and snaps weights. Graphs equal up to relabelling of
/// aerial vertices share one estimate.
pub struct Weigher {
    pub opts: WeightOptions,
    pub max_den: u64,
    cache: Option<WeightCache>,
    memo: BTreeMap<(FeynmanGraph, String), WeightEstimate>,
}

impl Weigher {
    pub fn new(opts: WeightOptions, max_den: u64) -> Self {
        Weigher {
            opts,
            max_den,
            cache: None,
            memo: BTreeMap::new(),
        }
    }

    /// Records every estimate in the JSONL cache under `dir`.
    pub fn with_cache(mut self, dir: Option<&Path>) -> Result<Self, WeightError> {
        self.cache = Some(WeightCache::open(dir)?);
        Ok(self)
    }

    /// Estimate for `g` (signed) plus the key of the canonical estimate it
    /// was derived from.
    pub fn estimate(
        &mut self,
        g: &FeynmanGraph,
        prop: Propagator,
        slice: GaugeSlice,
    ) -> Result<(WeightEstimate, CacheKey, i8), WeightError> {
        let (canon, sign) = relabel_canonical(g)?;
        let key = CacheKey::new(&canon, prop, slice, self.opts.samples, self.opts.seed);
        let memo_key = (canon.clone(), format!("{prop}/{}", slice.name()));
        let est = match self.memo.get(&memo_key) {
            Some(e) => e.clone(),
            None => {
                let e = match &mut self.cache {
                    Some(c) => c.weight(&canon, prop, slice, self.opts)?,
                    None => crate::weights::weight(&canon, prop, slice, self.opts)?,
                };
                self.memo.insert(memo_key, e.clone());
                e
            }
        };
        let mut signed = est;
        signed.mean *= f64::from(sign);
        Ok((signed, key, sign))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightedTerm {
    pub graph: FeynmanGraph,
    /// The snapped rational, or the float estimate converted exactly.
    #[serde(with = "crate::rational::serde_q")]
    pub coeff: Q,
    pub snapped: bool,
    pub estimate: WeightEstimate,
    /// Cache key of the canonical estimate and the relabelling sign applied.
    pub source: CacheKey,
    pub sign: i8,
}

/// Σ c_Γ Φ_Γ with weight lineage. `hbar` is the aerial vertex count in
/// the coloured setting.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedGraphOperator {
    pub d: u32,
    pub prop: String,
    pub arity: usize,
    pub hbar: u32,
    pub terms: Vec<WeightedTerm>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub projection: Projection,
}

impl WeightedGraphOperator {
    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| t.snapped)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn graph_sum(&self) -> GraphSum {
        let mut sum = GraphSum::new();
        for t in &self.terms {
            sum.add(&t.graph, t.coeff.clone())
                .expect("weighted graphs are valid");
        }
        sum
    }

    pub fn operator(&self) -> Result<MultiOperator, SchoutenError> {
        if self.terms.is_empty() {
            return Ok(MultiOperator::zero(self.arity));
        }
        MultiOperator::from_graphs(self.graph_sum(), self.arity, self.projection)
    }

    pub fn apply(&self, inputs: &[GradedPoly]) -> Result<GradedPoly, SchoutenError> {
        self.operator()?.apply(inputs)
    }

    /// Coloured evaluation with the aerial slots filled by `aerial`.
    pub fn apply_coloured(
        &self,
        aerial: &[GradedPoly],
        ground: &[GradedPoly],
    ) -> Result<GradedPoly, SchoutenError> {
        let spec = ground
            .first()
            .or(aerial.first())
            .map(|f| f.spec.clone())
            .ok_or(SchoutenError::Arity {
                expected: self.arity,
                got: 0,
            })?;
        let mut out = GradedPoly::zero(&spec);
        for t in &self.terms {
            let term =
                crate::schouten::phi_graph_coloured(&t.graph, aerial, ground, self.projection)?;
            out = out.try_add(&term.scale(&t.coeff))?;
        }
        Ok(out)
    }

    /// Human-readable listing of graphs and coefficients.
    pub fn describe(&self) -> String {
        self.terms
            .iter()
            .map(|t| {
                format!(
                    "{} · {}{}",
                    format_q(&t.coeff),
                    t.graph,
                    if t.snapped { "" } else { " (float)" }
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[allow(clippy::too_many_arguments)]
fn weigh_graphs(
    weigher: &mut Weigher,
    graphs: Vec<FeynmanGraph>,
    prop: Propagator,
    slice: GaugeSlice,
    d: u32,
    arity: usize,
    hbar: u32,
    projection: Projection,
) -> Result<WeightedGraphOperator, QuantizeError> {
    let mut terms = Vec::new();
    let mut warnings = Vec::new();
    for g in graphs {
        let (est, source, sign) = weigher.estimate(&g, prop, slice)?;
        if est.zero_by_degree {
            continue;
        }
        let (coeff, snapped) = match snap_rational(est.mean, est.stderr, weigher.max_den) {
            Some(r) => (r, true),
            None => {
                warnings.push(format!(
                    "{g}: {} ± {} did not snap; using the float value",
                    est.mean, est.stderr
                ));
                (Q::from_f64(est.mean).unwrap_or_else(Q::zero), false)
            }
        };
        if coeff.is_zero() {
            continue;
        }
        terms.push(WeightedTerm {
            graph: g,
            coeff,
            snapped,
            estimate: est,
            source,
            sign,
        });
    }
    Ok(WeightedGraphOperator {
        d,
        prop: prop.name(),
        arity,
        hbar,
        terms,
        warnings,
        projection,
    })
}

/// μ_n = Σ_{Γ ∈ G_{n, (nd−2)/(d−1)−1}} c_Γ Φ_Γ over C_n(ℝ^d); the zero operator
/// when the edge count is not an integer.
pub fn build_mu(
    d: u32,
    prop: Propagator,
    n: usize,
    weigher: &mut Weigher,
) -> Result<WeightedGraphOperator, QuantizeError> {
    if n < 2 {
        return Err(QuantizeError::Arity(n));
    }
    if prop.dim() != d {
        return Err(WeightError::DimensionMismatch(format!("{prop} in d={d}")).into());
    }
    let top = n as u32 * d - 2;
    let graphs = if top.is_multiple_of(d - 1) {
        enumerate(
            n as u32,
            0,
            (top / (d - 1) - 1) as usize,
            d,
            ArrowMode::Free,
        )
    } else {
        Vec::new()
    };
    weigh_graphs(
        weigher,
        graphs,
        prop,
        GaugeSlice::Rd { n, d },
        d,
        n,
        0,
        Projection::Free,
    )
}

/// Drops graphs whose Φ vanishes on γ-decorated aerial vertices because a
/// vertex receives more ψ- or x-derivatives than any monomial of γ carries.
fn survives(g: &FeynmanGraph, gamma: &GradedPoly) -> bool {
    let spec = &gamma.spec;
    let max_psi = gamma
        .terms
        .keys()
        .map(|m| m.degree_in(spec, GenKind::Psi))
        .max()
        .unwrap_or(0) as usize;
    let max_x = gamma
        .terms
        .keys()
        .map(|m| m.degree_in(spec, GenKind::X))
        .max()
        .unwrap_or(0) as usize;
    (1..=g.n_aerial() as u32).all(|v| {
        let out = g.edges.iter().filter(|e| e.0 == v).count();
        let inc = g.edges.iter().filter(|e| e.1 == v).count();
        out <= max_psi && inc <= max_x
    })
}

fn coloured_terms(
    gamma: &GradedPoly,
    prop: Propagator,
    mode: ArrowMode,
    m: usize,
    order: u32,
    weigher: &mut Weigher,
) -> Result<Vec<WeightedGraphOperator>, QuantizeError> {
    if prop.dim() != 2 || gamma.spec.d != 2 {
        return Err(QuantizeError::Unsupported(
            "coloured quantization is implemented for d = 2".into(),
        ));
    }
    let projection = match mode {
        ArrowMode::Free => Projection::Free,
        ArrowMode::Down => Projection::Down,
        ArrowMode::Up => Projection::Up,
    };
    let mut slices = Vec::new();
    for n in 0..=order as usize {
        let slice = GaugeSlice::Half { n, m };
        if !slice.is_stable() || 2 * n + m < 2 {
            slices.push(WeightedGraphOperator {
                d: 2,
                prop: prop.name(),
                arity: n + m,
                hbar: n as u32,
                terms: Vec::new(),
                warnings: Vec::new(),
                projection,
            });
            continue;
        }
        let graphs: Vec<FeynmanGraph> = enumerate(n as u32, m as u32, 2 * n + m - 2, 2, mode)
            .into_iter()
            .filter(|g| survives(g, gamma))
            .collect();
        slices.push(weigh_graphs(
            weigher,
            graphs,
            prop,
            slice,
            2,
            n + m,
            n as u32,
            projection,
        )?);
    }
    Ok(slices)
}

fn factorial(n: usize) -> Q {
    Q::from_integer(BigInt::from((1..=n as u64).product::<u64>()))
}

/// Σ_n ħ^n/n! Σ_Γ w_Γ Φ_Γ(γ^{⊗n}; inputs) through the given slices.
fn twisted_apply(
    slices: &[WeightedGraphOperator],
    gamma: &GradedPoly,
    inputs: &[GradedPoly],
    order: u32,
) -> Result<GradedPoly, SchoutenError> {
    let spec = &gamma.spec;
    let mut out = GradedPoly::zero(spec);
    for (n, op) in slices.iter().enumerate() {
        if op.terms.is_empty() {
            continue;
        }
        let aerial = vec![gamma.clone(); n];
        let term = op.apply_coloured(&aerial, inputs)?;
        let scale = factorial(n).recip();
        out = out.try_add(
            &term
                .scale(&scale)
                .try_mul(&GradedPoly::hbar_power(spec, n as u32))?,
        )?;
    }
    Ok(out.truncate_hbar(order))
}

#[derive(Clone, Debug, Serialize)]
pub struct StarProduct {
    #[serde(skip)]
    pub gamma: GradedPoly,
    pub prop: String,
    pub order: u32,
    #[serde(skip)]
    pub mode: ArrowMode,
    /// The ħ^n operator on (γ^{⊗n}; f, g), before the 1/n!.
    pub slices: Vec<WeightedGraphOperator>,
}

impl StarProduct {
    pub fn is_exact(&self) -> bool {
        self.slices.iter().all(WeightedGraphOperator::is_exact)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.slices
            .iter()
            .flat_map(|s| s.warnings.iter().cloned())
            .collect()
    }

    /// f ⋆ g truncated at ħ^order; inputs may themselves carry ħ.
    pub fn apply(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly, SchoutenError> {
        twisted_apply(
            &self.slices,
            &self.gamma,
            &[f.clone(), g.clone()],
            self.order,
        )
    }
}

fn mode_for(prop: Propagator) -> ArrowMode {
    match prop {
        Propagator::Kontsevich => ArrowMode::Down,
        Propagator::AntiKontsevich => ArrowMode::Up,
        _ => ArrowMode::Free,
    }
}

/// f ⋆ g = Σ_{n ≤ N} ħ^n/n! Σ_{Γ ∈ G_{n+2,2n}} w_Γ Φ_Γ(γ^{⊗n}; f, g). The
/// Kontsevich propagator acts on functions of x (down mode), its mirror on
/// functions of ψ (up mode) and the angle form on all polyvectors.
pub fn star_product(
    gamma: &GradedPoly,
    prop: Propagator,
    order: u32,
    weigher: &mut Weigher,
) -> Result<StarProduct, QuantizeError> {
    if gamma
        .terms
        .keys()
        .any(|m| m.degree_in(&gamma.spec, GenKind::Psi) != 2 || m.hbar != 0)
    {
        return Err(QuantizeError::Unsupported(
            "γ must be an ħ-free bivector".into(),
        ));
    }
    let mode = mode_for(prop);
    let slices = coloured_terms(gamma, prop, mode, 2, order, weigher)?;
    Ok(StarProduct {
        gamma: gamma.clone(),
        prop: prop.name(),
        order,
        mode,
        slices,
    })
}

/// (f⋆g)⋆h − f⋆(g⋆h), one entry per ħ power 0..=order.
pub fn associativity_residual(
    star: &StarProduct,
    f: &GradedPoly,
    g: &GradedPoly,
    h: &GradedPoly,
) -> Result<Vec<GradedPoly>, SchoutenError> {
    let left = star.apply(&star.apply(f, g)?, h)?;
    let right = star.apply(f, &star.apply(g, h)?)?;
    let diff = &left - &right;
    Ok((0..=star.order).map(|k| diff.hbar_slice(k)).collect())
}

/// The twisted operation μ^γ_m = Σ_n ħ^n/n! μ_{n,m}(γ^{⊗n} ⊗ ·).
#[derive(Clone, Debug, Serialize)]
pub struct TwistedOperation {
    #[serde(skip)]
    pub gamma: GradedPoly,
    pub m: usize,
    pub order: u32,
    pub slices: Vec<WeightedGraphOperator>,
}

impl TwistedOperation {
    pub fn apply(&self, inputs: &[GradedPoly]) -> Result<GradedPoly, SchoutenError> {
        if inputs.len() != self.m {
            return Err(SchoutenError::Arity {
                expected: self.m,
                got: inputs.len(),
            });
        }
        twisted_apply(&self.slices, &self.gamma, inputs, self.order)
    }

    pub fn is_exact(&self) -> bool {
        self.slices.iter().all(WeightedGraphOperator::is_exact)
    }
}

/// Twists the coloured operations by a Maurer-Cartan element γ; for m = 0
/// the result is the curvature.
pub fn ocha_twist(
    gamma: &GradedPoly,
    prop: Propagator,
    m: usize,
    order: u32,
    weigher: &mut Weigher,
) -> Result<TwistedOperation, QuantizeError> {
    let residual = mc_residual(gamma, None)?;
    if !residual.is_zero() {
        return Err(QuantizeError::NotMaurerCartan(residual.to_string()));
    }
    let slices = coloured_terms(gamma, prop, mode_for(prop), m, order, weigher)?;
    Ok(TwistedOperation {
        gamma: gamma.clone(),
        m,
        order,
        slices,
    })
}

/// A polyvector field built from named generators and rational
/// coefficients, e.g. `[("1", &["psi1", "psi2"])]`.
pub fn poly_from_terms(
    spec: &Arc<AlgebraSpec>,
    terms: &[(Q, &[&str])],
) -> Result<GradedPoly, SchoutenError> {
    let mut out = GradedPoly::zero(spec);
    for (c, names) in terms {
        let mut t = GradedPoly::constant(spec, c.clone());
        for name in *names {
            t = t.try_mul(&GradedPoly::generator(spec, spec.position_by_name(name)?))?;
        }
        out = out.try_add(&t)?;
    }
    Ok(out)
}

/// All monomials in x_1..x_dim of total degree ≤ `max`.
pub fn x_monomials(spec: &Arc<AlgebraSpec>, max: u32) -> Vec<GradedPoly> {
    let dim = spec.dim_v;
    let mut out = vec![GradedPoly::one(spec)];
    let mut frontier = vec![GradedPoly::one(spec)];
    for _ in 0..max {
        let mut next = Vec::new();
        for f in &frontier {
            for a in 1..=dim {
                let g = f.try_mul(&GradedPoly::x(spec, a)).expect("same spec");
                if !next.contains(&g) {
                    next.push(g);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
