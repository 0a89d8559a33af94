//! Lie coalgebra structure constants, the Bernoulli series Ĉ(x), the
//! Maurer-Cartan element γ^Δ and the ħ-deformed Schouten bracket.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::algebra::{AlgebraSpec, GenKind, GradedPoly};
use super::SchoutenError;
use crate::rational::{format_q, parse_q, q, Q};

/// B_0..=B_n from Σ_{j≤k} C(k+1, j) B_j = 0, so B_1 = −1/2.
pub fn bernoulli_numbers(n: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![Q::one()];
    for k in 1..=n {
        let mut s = Q::zero();
        let mut binom = Q::one();
        for (j, bj) in b.iter().enumerate() {
            s += &binom * bj;
            binom = binom * q((k + 1 - j) as i64) / q((j + 1) as i64);
        }
        b.push(-s / q(k as i64 + 1));
    }
    b
}

fn factorial(n: usize) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * q(k))
}

/// Structure constants C^δ_{αβ} of Δ(x^δ) = Σ C^δ_{αβ} x^α x^β, stored
/// 0-based as `c[δ][α][β]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    pub dim: usize,
    c: Vec<Vec<Vec<Q>>>,
}

impl StructureConstants {
    pub fn zero(dim: usize) -> Self {
        StructureConstants {
            dim,
            c: vec![vec![vec![Q::zero(); dim]; dim]; dim],
        }
    }

    /// Sets C^δ_{αβ} = v and C^δ_{βα} = −v (1-based indices).
    pub fn set(&mut self, delta: usize, a: usize, b: usize, v: Q) {
        self.c[delta - 1][b - 1][a - 1] = -v.clone();
        self.c[delta - 1][a - 1][b - 1] = v;
    }

    /// Sets a single entry without enforcing antisymmetry.
    pub fn set_raw(&mut self, delta: usize, a: usize, b: usize, v: Q) {
        self.c[delta - 1][a - 1][b - 1] = v;
    }

    /// C^δ_{αβ}, 0-based.
    pub fn get(&self, delta: usize, a: usize, b: usize) -> &Q {
        &self.c[delta][a][b]
    }

    /// The 2-dim solvable coalgebra C^2_{12} = 1.
    pub fn solvable_2d() -> Self {
        let mut c = Self::zero(2);
        c.set(2, 1, 2, Q::one());
        c
    }

    /// The dual of so(3): C^γ_{αβ} = ε_{αβγ}.
    pub fn so3() -> Self {
        let mut c = Self::zero(3);
        c.set(3, 1, 2, Q::one());
        c.set(1, 2, 3, Q::one());
        c.set(2, 3, 1, Q::one());
        c
    }

    /// The dual of the Heisenberg algebra: C^3_{12} = 1.
    pub fn heisenberg() -> Self {
        let mut c = Self::zero(3);
        c.set(3, 1, 2, Q::one());
        c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().flatten().all(Zero::is_zero)
    }

    pub fn check_antisymmetric(&self) -> Result<(), SchoutenError> {
        for d in 0..self.dim {
            for a in 0..self.dim {
                for b in a..self.dim {
                    if self.c[d][a][b] != -self.c[d][b][a].clone() {
                        return Err(SchoutenError::NotAntisymmetric(a + 1, b + 1, d + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// Σ_ξ C^δ_{αξ}C^ξ_{βγ} + C^δ_{γξ}C^ξ_{αβ} + C^δ_{βξ}C^ξ_{γα} = 0.
    pub fn check_co_jacobi(&self) -> Result<(), SchoutenError> {
        let n = self.dim;
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    for d in 0..n {
                        let mut s = Q::zero();
                        for x in 0..n {
                            s += &self.c[d][a][x] * &self.c[x][b][g];
                            s += &self.c[d][g][x] * &self.c[x][a][b];
                            s += &self.c[d][b][x] * &self.c[x][g][a];
                        }
                        if !s.is_zero() {
                            return Err(SchoutenError::CoJacobi(a + 1, b + 1, g + 1, d + 1));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SchoutenError> {
        self.check_antisymmetric()?;
        self.check_co_jacobi()
    }

    /// `{"dimV": n, "entries": [{"upper": δ, "lower": [α, β], "coeff": "p/q"}]}`,
    /// antisymmetric partners implied.
    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for d in 0..self.dim {
            for a in 0..self.dim {
                for b in a + 1..self.dim {
                    let v = &self.c[d][a][b];
                    if !v.is_zero() {
                        entries.push(json!({ "upper": d + 1, "lower": [a + 1, b + 1], "coeff": format_q(v) }));
                    }
                }
            }
        }
        json!({ "dimV": self.dim, "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self, SchoutenError> {
        let bad = |s: &str| SchoutenError::Json(s.to_string());
        let dim = v
            .get("dimV")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing dimV"))? as usize;
        let mut c = Self::zero(dim);
        for e in v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing entries"))?
        {
            let upper = e
                .get("upper")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("missing upper"))? as usize;
            let lower = e
                .get("lower")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing lower"))?;
            let idx: Vec<usize> = lower
                .iter()
                .filter_map(Value::as_u64)
                .map(|x| x as usize)
                .collect();
            let coeff = e
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing coeff"))?;
            let coeff = parse_q(coeff).map_err(|e| bad(&e.to_string()))?;
            if idx.len() != 2 || [upper, idx[0], idx[1]].iter().any(|&i| i == 0 || i > dim) {
                return Err(bad("index out of range"));
            }
            c.set(upper, idx[0], idx[1], coeff);
        }
        Ok(c)
    }

    /// A_α^ζ = Σ_ξ C^ζ_{αξ} x^ξ over the x-generators of `spec`.
    fn a_matrix(&self, spec: &Arc<AlgebraSpec>) -> Vec<Vec<GradedPoly>> {
        let n = self.dim;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|z| {
                        let mut e = GradedPoly::zero(spec);
                        for x in 0..n {
                            e = &e + &GradedPoly::x(spec, x + 1).scale(&self.c[z][a][x]);
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    }
}

fn mat_mul(
    a: &[Vec<GradedPoly>],
    b: &[Vec<GradedPoly>],
    spec: &Arc<AlgebraSpec>,
) -> Vec<Vec<GradedPoly>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(GradedPoly::zero(spec), |acc, k| {
                        &acc + &(&a[i][k] * &b[k][j])
                    })
                })
                .collect()
        })
        .collect()
}

fn check_dim(c: &StructureConstants, spec: &AlgebraSpec) -> Result<(), SchoutenError> {
    if c.dim != spec.dim_v {
        return Err(SchoutenError::Shape(format!(
            "constants have dimV={}, algebra has dimV={}",
            c.dim, spec.dim_v
        )));
    }
    Ok(())
}

/// Ĉ_α^β(x) = δ_α^β + Σ_{k=1}^{n} (B_k/k!)(A^k)_α^β as `hat[α][β]`
/// (0-based), optionally weighting the x-degree k term by ħ^k.
fn hat_series(
    c: &StructureConstants,
    spec: &Arc<AlgebraSpec>,
    n: usize,
    with_hbar: bool,
) -> Vec<Vec<GradedPoly>> {
    let dim = c.dim;
    let b = bernoulli_numbers(n);
    let a = c.a_matrix(spec);
    let mut hat: Vec<Vec<GradedPoly>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        GradedPoly::one(spec)
                    } else {
                        GradedPoly::zero(spec)
                    }
                })
                .collect()
        })
        .collect();
    let mut power = a.clone();
    for k in 1..=n {
        let coeff = &b[k] / factorial(k);
        let weight = if with_hbar {
            GradedPoly::hbar_power(spec, k as u32)
        } else {
            GradedPoly::one(spec)
        };
        if !coeff.is_zero() {
            for i in 0..dim {
                for j in 0..dim {
                    hat[i][j] = &hat[i][j] + &(&power[i][j] * &weight).scale(&coeff);
                }
            }
        }
        if k < n {
            power = mat_mul(&power, &a, spec);
        }
    }
    hat
}

/// Ĉ truncated at x-degree `n`, over the x-generators of `spec`.
pub fn hat_c(
    c: &StructureConstants,
    spec: &Arc<AlgebraSpec>,
    n: usize,
) -> Result<Vec<Vec<GradedPoly>>, SchoutenError> {
    c.check_antisymmetric()?;
    check_dim(c, spec)?;
    if n == 0 {
        return Err(SchoutenError::Shape(
            "truncation order must be at least 1".into(),
        ));
    }
    Ok(hat_series(c, spec, n, false))
}

/// Residual entries keyed by 1-based (α, β, δ).
pub type HatResidual = Vec<((usize, usize, usize), GradedPoly)>;

/// Nonzero entries of C^γ_{αβ}Ĉ_γ^δ − Ĉ_α^γ ∂_γ Ĉ_β^δ + Ĉ_β^γ ∂_γ Ĉ_α^δ,
/// keyed 1-based by (α, β, δ), with x-degree above `max_degree` dropped.
pub fn hat_c_residual(
    c: &StructureConstants,
    hat: &[Vec<GradedPoly>],
    max_degree: u32,
) -> Result<HatResidual, SchoutenError> {
    let n = c.dim;
    let spec = hat
        .first()
        .and_then(|r| r.first())
        .map(|p| p.spec.clone())
        .ok_or(SchoutenError::Shape("empty matrix".into()))?;
    let xs: Vec<usize> = (1..=n)
        .map(|i| spec.position(GenKind::X, i))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let mut r = GradedPoly::zero(&spec);
                for g in 0..n {
                    r = &r + &hat[g][d].scale(c.get(g, a, b));
                    r = &r - &(&hat[a][g] * &hat[b][d].left_derivative(xs[g]));
                    r = &r + &(&hat[b][g] * &hat[a][d].left_derivative(xs[g]));
                }
                let r = r.truncate_kind_degree(GenKind::X, max_degree);
                if !r.is_zero() {
                    out.push(((a + 1, b + 1, d + 1), r));
                }
            }
        }
    }
    Ok(out)
}

/// γ^Δ in the bialgebra algebra on dimV = `c.dim`, with the series truncated
/// at x-degree `n`:
/// −½ Σ C^δ_{αβ} η^α η^β ψ_δ + Σ (Ĉ_α^β(x) − δ_α^β) η^α y_β.
pub fn gamma_delta(c: &StructureConstants, n: usize) -> Result<GradedPoly, SchoutenError> {
    c.validate()?;
    let spec = AlgebraSpec::bialgebra(c.dim);
    let hat = hat_c(c, &spec, n.max(1))?;
    Ok(assemble_gamma(c, &spec, &hat))
}

fn assemble_gamma(
    c: &StructureConstants,
    spec: &Arc<AlgebraSpec>,
    hat: &[Vec<GradedPoly>],
) -> GradedPoly {
    let dim = c.dim;
    let mut g = GradedPoly::zero(spec);
    let half = Q::new(1.into(), 2.into());
    for d in 0..dim {
        for a in 0..dim {
            for b in 0..dim {
                let v = c.get(d, a, b);
                if v.is_zero() {
                    continue;
                }
                let t = &(&GradedPoly::eta(spec, a + 1) * &GradedPoly::eta(spec, b + 1))
                    * &GradedPoly::psi(spec, d + 1);
                g = &g - &t.scale(&(v * &half));
            }
        }
    }
    for a in 0..dim {
        for b in 0..dim {
            let mut entry = hat[a][b].clone();
            if a == b {
                entry = &entry - &GradedPoly::one(spec);
            }
            if entry.is_zero() {
                continue;
            }
            let t = &entry * &(&GradedPoly::eta(spec, a + 1) * &GradedPoly::y(spec, b + 1));
            g = &g + &t;
        }
    }
    g
}

/// The ħ-deformed Schouten bracket on g_2(V):
/// {f • g} = Σ_{a,b} (f←∂a) P^{ab} (→∂b g) with P^{ψ_α x^β} = Ĉ_α^β(ħx),
/// P^{x^β ψ_α} = −P^{ψ_α x^β}, P^{ψ_α ψ_β} = ħ C^γ_{αβ} ψ_γ, truncated at ħ^order.
#[derive(Clone, Debug)]
pub struct DeformedBracket {
    pub spec: Arc<AlgebraSpec>,
    pub order: u32,
    pub entries: Vec<(usize, usize, GradedPoly)>,
}

impl DeformedBracket {
    pub fn apply(&self, f: &GradedPoly, g: &GradedPoly) -> Result<GradedPoly, SchoutenError> {
        f.check_spec(g)?;
        if *f.spec != *self.spec {
            return Err(SchoutenError::SpecMismatch);
        }
        let mut out = GradedPoly::zero(&self.spec);
        for (a, b, p) in &self.entries {
            let l = f.right_derivative(*a);
            if l.is_zero() {
                continue;
            }
            let r = g.left_derivative(*b);
            if r.is_zero() {
                continue;
            }
            out = &out + &(&(&l * p) * &r).truncate_hbar(self.order);
        }
        Ok(out.truncate_hbar(self.order))
    }

    /// The value on a pair of generators, i.e. P^{ab}.
    pub fn on_generators(&self, a: usize, b: usize) -> GradedPoly {
        self.entries
            .iter()
            .find(|(i, j, _)| *i == a && *j == b)
            .map(|(_, _, p)| p.clone())
            .unwrap_or_else(|| GradedPoly::zero(&self.spec))
    }
}

pub fn deformed_bracket(
    c: &StructureConstants,
    order: u32,
) -> Result<DeformedBracket, SchoutenError> {
    c.validate()?;
    let spec = AlgebraSpec::poisson_schouten(2, c.dim);
    let dim = c.dim;
    let hat = hat_series(c, &spec, (order as usize).max(1), true);
    let mut entries = Vec::new();
    for a in 0..dim {
        let psi_a = spec.position(GenKind::Psi, a + 1)?;
        for b in 0..dim {
            let x_b = spec.position(GenKind::X, b + 1)?;
            let p = hat[a][b].truncate_hbar(order);
            if !p.is_zero() {
                entries.push((x_b, psi_a, -&p));
                entries.push((psi_a, x_b, p));
            }
            let psi_b = spec.position(GenKind::Psi, b + 1)?;
            let mut pp = GradedPoly::zero(&spec);
            if order >= 1 {
                for g in 0..dim {
                    pp = &pp + &GradedPoly::psi(&spec, g + 1).scale(c.get(g, a, b));
                }
                pp = &pp * &GradedPoly::hbar_power(&spec, 1);
            }
            if !pp.is_zero() {
                entries.push((psi_a, psi_b, pp));
            }
        }
    }
    Ok(DeformedBracket {
        spec,
        order,
        entries,
    })
}
