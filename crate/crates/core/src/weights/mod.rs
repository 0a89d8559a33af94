//! Configuration-space weights c_Γ = ∫ ∧_e π_e^*(ω) by seeded Monte-Carlo
//! over gauge-fixed slices, with degree vanishing, the Stokes boundary
//! identity and rational snapping.

mod cache;
mod geometry;
mod snap;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::graph_core::{admissible_subsets, permutation_sign, FeynmanGraph, GraphError};

pub use cache::{CacheKey, WeightCache};
pub use geometry::{form_value, oriented_frame, sphere_area, GaugeSlice};
pub use snap::snap_rational;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("coincident points")]
    CoincidentPoints,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown propagator `{0}`")]
    UnknownPropagator(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Propagator {
    /// Normalized volume form of S^{d−1} pulled back along (x_i − x_j)/|x_i − x_j|.
    SphereVol(u32),
    /// dArg(z_i − z_j)/2π.
    Angle,
    /// dArg((z_i − z_j)/(z̄_i − z_j))/2π.
    Kontsevich,
    /// The Kontsevich form with source and target exchanged.
    AntiKontsevich,
}

impl Propagator {
    pub fn dim(&self) -> u32 {
        match self {
            Propagator::SphereVol(d) => *d,
            _ => 2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Propagator::SphereVol(d) => format!("sphere(d={d})"),
            Propagator::Angle => "angle".into(),
            Propagator::Kontsevich => "kontsevich".into(),
            Propagator::AntiKontsevich => "anti_kontsevich".into(),
        }
    }

    /// Parses `angle`, `kontsevich`, `anti_kontsevich`, `sphere` (with `d`
    /// supplied separately) or `sphere(d=3)`.
    pub fn parse(s: &str, d: u32) -> Result<Self, WeightError> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "angle" => Ok(Propagator::Angle),
            "kontsevich" => Ok(Propagator::Kontsevich),
            "anti_kontsevich" | "anti-kontsevich" => Ok(Propagator::AntiKontsevich),
            "sphere" | "sphere_vol" => Ok(Propagator::SphereVol(d)),
            _ => t
                .strip_prefix("sphere(d=")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.parse().ok())
                .filter(|&d: &u32| d >= 2)
                .map(Propagator::SphereVol)
                .ok_or_else(|| WeightError::UnknownPropagator(s.to_string())),
        }
    }

    /// The default slice: ℝ^d for aerial-only graphs with sphere/angle forms,
    /// the upper half-plane otherwise.
    pub fn default_slice(&self, g: &FeynmanGraph) -> GaugeSlice {
        match self {
            Propagator::SphereVol(d) if g.is_aerial_only() => GaugeSlice::Rd {
                n: g.n_vertices(),
                d: *d,
            },
            Propagator::Angle if g.is_aerial_only() => GaugeSlice::Rd {
                n: g.n_vertices(),
                d: 2,
            },
            _ => GaugeSlice::Half {
                n: g.n_aerial(),
                m: g.n_ground(),
            },
        }
    }
}

impl fmt::Display for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Propagator {
    type Err = WeightError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Propagator::parse(s, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub zero_by_degree: bool,
    /// Set when the value is known without sampling.
    #[serde(default)]
    pub exact: bool,
    /// Samples dropped for near-collisions (pairwise distance < 1e−12).
    #[serde(default)]
    pub rejected: u64,
}

impl WeightEstimate {
    fn exact(value: f64, seed: u64) -> Self {
        WeightEstimate {
            mean: value,
            stderr: 0.0,
            n_samples: 0,
            seed,
            zero_by_degree: false,
            exact: true,
            rejected: 0,
        }
    }

    fn zero(seed: u64) -> Self {
        WeightEstimate {
            mean: 0.0,
            stderr: 0.0,
            n_samples: 0,
            seed,
            zero_by_degree: true,
            exact: true,
            rejected: 0,
        }
    }
}

pub const BATCHES: u64 = 64;

#[derive(Clone, Copy, Debug)]
pub struct WeightOptions {
    pub samples: u64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for WeightOptions {
    fn default() -> Self {
        WeightOptions {
            samples: 100_000,
            seed: 42,
            exec: Exec::default(),
        }
    }
}

fn check_compatible(
    g: &FeynmanGraph,
    prop: Propagator,
    slice: GaugeSlice,
) -> Result<(), WeightError> {
    g.validate()?;
    match slice {
        GaugeSlice::Rd { n, d } => {
            if !g.is_aerial_only() || n != g.n_vertices() {
                return Err(WeightError::DimensionMismatch(format!(
                    "{} needs an aerial graph on {n} vertices",
                    slice.name()
                )));
            }
            if !matches!(prop, Propagator::SphereVol(_) | Propagator::Angle) || prop.dim() != d {
                return Err(WeightError::DimensionMismatch(format!(
                    "{prop} cannot be integrated over {}",
                    slice.name()
                )));
            }
        }
        GaugeSlice::Half { n, m } => {
            if n != g.n_aerial() || m != g.n_ground() {
                return Err(WeightError::DimensionMismatch(format!(
                    "{} does not match the graph colours",
                    slice.name()
                )));
            }
            if prop.dim() != 2 {
                return Err(WeightError::DimensionMismatch(format!(
                    "{prop} has no half-space slice"
                )));
            }
        }
    }
    if !slice.is_stable() {
        return Err(WeightError::DimensionMismatch(format!(
            "{} is not a stable configuration space",
            slice.name()
        )));
    }
    Ok(())
}

/// Whether (d−1)·#E(Γ) differs from the slice dimension, so c_Γ = 0.
pub fn zero_by_degree(g: &FeynmanGraph, prop: Propagator, slice: GaugeSlice) -> bool {
    (prop.dim() as usize - 1) * g.edges.len() != slice.dim()
}

/// c_Γ over `slice`. Deterministic in (seed, samples); the 64 batches use
/// ChaCha8 streams 0..64 of the seed and are reduced in order.
pub fn weight(
    g: &FeynmanGraph,
    prop: Propagator,
    slice: GaugeSlice,
    opts: WeightOptions,
) -> Result<WeightEstimate, WeightError> {
    check_compatible(g, prop, slice)?;
    if zero_by_degree(g, prop, slice) {
        return Ok(WeightEstimate::zero(opts.seed));
    }
    let edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|&(s, t)| (s as usize - 1, t as usize - 1))
        .collect();
    if slice.dim() == 0 {
        return Ok(WeightEstimate::exact(1.0, opts.seed));
    }
    if let (GaugeSlice::Rd { n: 2, d }, [(s, _)]) = (slice, edges.as_slice()) {
        // C_2(ℝ^d) = S^{d−1}: the edge map is the identity or the antipode.
        let v = if *s == 1 || d % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(WeightEstimate::exact(v, opts.seed));
    }
    let dim = slice.dim();
    let per = opts.samples / BATCHES;
    let extra = opts.samples % BATCHES;
    let batches: Vec<Result<(f64, u64, u64), WeightError>> =
        opts.exec.map_range(BATCHES as usize, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let count = per + u64::from((b as u64) < extra);
            let mut sum = 0.0;
            let mut rejected = 0;
            for _ in 0..count {
                let s = geometry::sample(slice, &mut rng);
                if geometry::min_distance(&s.points) < 1e-12
                    || !s.density.is_finite()
                    || s.density <= 0.0
                {
                    rejected += 1;
                    continue;
                }
                sum += geometry::integrand(prop, &edges, &s, dim)? / s.density;
            }
            Ok((sum, count, rejected))
        });
    let mut sums = Vec::with_capacity(batches.len());
    let mut total = 0.0;
    let mut rejected = 0;
    for b in batches {
        let (sum, count, rej) = b?;
        total += sum;
        rejected += rej;
        if count > 0 {
            sums.push(sum / count as f64);
        }
    }
    let n = opts.samples.max(1) as f64;
    let mean = total / n;
    let k = sums.len() as f64;
    let stderr = if k > 1.0 {
        let m = sums.iter().sum::<f64>() / k;
        (sums.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k * (k - 1.0))).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(WeightEstimate {
        mean,
        stderr,
        n_samples: opts.samples,
        seed: opts.seed,
        zero_by_degree: false,
        exact: false,
        rejected,
    })
}

/// Canonical representative under relabelling of the aerial vertices and
/// edge reordering, with the sign sign(edge perm)^{d−1} · sign(vertex perm)^d
/// relating the two weights. Ground vertices keep their order.
pub fn relabel_canonical(g: &FeynmanGraph) -> Result<(FeynmanGraph, i8), WeightError> {
    g.validate()?;
    let na = g.n_aerial();
    let n = g.n_vertices();
    let mut best: Option<(FeynmanGraph, i8)> = None;
    for head in itertools::Itertools::permutations(0..na, na) {
        let perm: Vec<usize> = head.into_iter().chain(na..n).collect();
        let edges: Vec<(u32, u32)> = g
            .edges
            .iter()
            .map(|&(s, t)| {
                (
                    perm[s as usize - 1] as u32 + 1,
                    perm[t as usize - 1] as u32 + 1,
                )
            })
            .collect();
        let h = FeynmanGraph { edges, ..g.clone() };
        let (c, es) = h.normalize()?;
        let vs = if g.d % 2 == 1 {
            permutation_sign(&perm)
        } else {
            1
        };
        let sign = es * vs;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, sign));
        }
    }
    Ok(best.expect("at least one permutation"))
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesTerm {
    pub subset: Vec<u32>,
    pub sign: i8,
    pub inner: WeightEstimate,
    pub outer: WeightEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    pub residual: f64,
    pub stderr: f64,
    pub terms: Vec<StokesTerm>,
    /// Subsets whose canonical (Γ_A, Γ/Γ_A) pairs cancelled exactly.
    pub cancelled: usize,
}

impl StokesReport {
    pub fn within(&self, sigmas: f64) -> bool {
        self.residual.abs() <= sigmas * self.stderr || self.residual == 0.0
    }
}

/// Σ_A (−1)^{σ_A} c(Γ_A) c(Γ/Γ_A) over admissible A, where σ_A is the
/// parity of moving Γ_A's edges in front of the others (weighted by d−1)
/// plus, weighted by d, the vertex shuffle putting A first and the move of
/// the collapsed vertex to the front of the quotient.
/// Terms are merged on canonical pairs before any sampling.
pub fn stokes_residual(
    g: &FeynmanGraph,
    prop: Propagator,
    opts: WeightOptions,
) -> Result<StokesReport, WeightError> {
    g.validate()?;
    if !g.is_aerial_only() {
        return Err(WeightError::DimensionMismatch(
            "Stokes residual is over C_n(R^d)".into(),
        ));
    }
    let d = g.d;
    if prop.dim() != d {
        return Err(WeightError::DimensionMismatch(format!(
            "{prop} on a d={d} graph"
        )));
    }
    let mut merged: std::collections::BTreeMap<(FeynmanGraph, FeynmanGraph), (i64, Vec<u32>)> =
        Default::default();
    let subsets = admissible_subsets(g);
    for a in &subsets {
        let inside: Vec<usize> = (0..g.edges.len())
            .filter(|&i| a.contains(&g.edges[i].0) && a.contains(&g.edges[i].1))
            .collect();
        let outside: Vec<usize> = (0..g.edges.len()).filter(|i| !inside.contains(i)).collect();
        let order: Vec<usize> = inside.iter().chain(&outside).copied().collect();
        let sigma = if d.is_multiple_of(2) {
            permutation_sign(&order)
        } else {
            1
        };
        // The face is C_#A × C_{n−#A+1} with A's vertices first and the
        // collapsed vertex leading the quotient; vertex moves weigh d.
        let shuffle: Vec<usize> = a
            .iter()
            .map(|&v| v as usize - 1)
            .chain((0..g.n_vertices()).filter(|v| !a.contains(&(*v as u32 + 1))))
            .collect();
        let before = (1..a[0]).filter(|v| !a.contains(v)).count();
        let vsign = if d % 2 == 1 {
            permutation_sign(&shuffle) * if before % 2 == 1 { -1 } else { 1 }
        } else {
            1
        };
        let sigma = sigma * vsign;
        let (inner, si) = relabel_canonical(&g.subgraph(a)?)?;
        let (outer, so) = relabel_canonical(&g.quotient(a)?)?;
        let sign = (sigma * si * so) as i64;
        let entry = merged.entry((inner, outer)).or_insert((0, a.clone()));
        entry.0 += sign;
    }
    let live: Vec<_> = merged.into_iter().filter(|(_, (c, _))| *c != 0).collect();
    let cancelled = subsets.len()
        - live
            .iter()
            .map(|(_, (c, _))| c.unsigned_abs() as usize)
            .sum::<usize>();
    let mut residual = 0.0;
    let mut var = 0.0;
    let mut terms = Vec::new();
    for (k, ((inner, outer), (coeff, subset))) in live.into_iter().enumerate() {
        let sub = WeightOptions {
            seed: opts
                .seed
                .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)),
            ..opts
        };
        let wi = weight(&inner, prop, prop.default_slice(&inner), sub)?;
        let wo = weight(
            &outer,
            prop,
            prop.default_slice(&outer),
            WeightOptions {
                seed: sub.seed ^ 0x5bd1_e995,
                ..sub
            },
        )?;
        let c = coeff as f64;
        residual += c * wi.mean * wo.mean;
        var += c
            * c
            * (wi.mean.powi(2) * wo.stderr.powi(2)
                + wo.mean.powi(2) * wi.stderr.powi(2)
                + wi.stderr.powi(2) * wo.stderr.powi(2));
        terms.push(StokesTerm {
            subset,
            sign: coeff.signum() as i8,
            inner: wi,
            outer: wo,
        });
    }
    Ok(StokesReport {
        residual,
        stderr: var.sqrt(),
        terms,
        cancelled,
    })
}
