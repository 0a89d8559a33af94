//! Free graded-commutative algebras on finitely many generators and their
//! elements.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::SchoutenError;
use crate::rational::{format_q, parse_q, q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    X,
    Psi,
    Eta,
    Y,
}

impl GenKind {
    fn prefix(self) -> &'static str {
        match self {
            GenKind::X => "x",
            GenKind::Psi => "psi",
            GenKind::Eta => "eta",
            GenKind::Y => "y",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub kind: GenKind,
    /// 1-based basis index α.
    pub index: usize,
    pub degree: i32,
}

impl Generator {
    pub fn name(&self) -> String {
        format!("{}{}", self.kind.prefix(), self.index)
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    /// g_d(V): x^α of degree d−2 and ψ_α of degree 1, paired as (ψ_α, x^α).
    PoissonSchouten,
    /// g_3(V*[1] ⊕ V): x (0), ψ (1), η (1), y (2), paired as (y_α, x^α) and
    /// (η^α, ψ_α).
    Bialgebra,
}

/// Generators in their fixed global order plus the pairing that defines
/// Δ^τ = Σ ∂/∂p ⊗ ∂/∂q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub d: u32,
    pub dim_v: usize,
    pub kind: AlgebraKind,
    pub gens: Vec<Generator>,
    pub pairing: Vec<(usize, usize)>,
}

impl AlgebraSpec {
    pub fn poisson_schouten(d: u32, dim_v: usize) -> Arc<AlgebraSpec> {
        let mut gens = Vec::new();
        for a in 1..=dim_v {
            gens.push(Generator {
                kind: GenKind::X,
                index: a,
                degree: d as i32 - 2,
            });
        }
        for a in 1..=dim_v {
            gens.push(Generator {
                kind: GenKind::Psi,
                index: a,
                degree: 1,
            });
        }
        let pairing = (0..dim_v).map(|a| (dim_v + a, a)).collect();
        Arc::new(AlgebraSpec {
            d,
            dim_v,
            kind: AlgebraKind::PoissonSchouten,
            gens,
            pairing,
        })
    }

    pub fn bialgebra(dim_v: usize) -> Arc<AlgebraSpec> {
        let mut gens = Vec::new();
        for (kind, degree) in [
            (GenKind::X, 0),
            (GenKind::Psi, 1),
            (GenKind::Eta, 1),
            (GenKind::Y, 2),
        ] {
            for a in 1..=dim_v {
                gens.push(Generator {
                    kind,
                    index: a,
                    degree,
                });
            }
        }
        let n = dim_v;
        let mut pairing: Vec<(usize, usize)> = (0..n).map(|a| (3 * n + a, a)).collect();
        pairing.extend((0..n).map(|a| (2 * n + a, n + a)));
        Arc::new(AlgebraSpec {
            d: 3,
            dim_v,
            kind: AlgebraKind::Bialgebra,
            gens,
            pairing,
        })
    }

    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn position(&self, kind: GenKind, index: usize) -> Result<usize, SchoutenError> {
        self.gens
            .iter()
            .position(|g| g.kind == kind && g.index == index)
            .ok_or_else(|| SchoutenError::UnknownGenerator(format!("{}{}", kind.prefix(), index)))
    }

    pub fn position_by_name(&self, name: &str) -> Result<usize, SchoutenError> {
        self.gens
            .iter()
            .position(|g| g.name() == name)
            .ok_or_else(|| SchoutenError::UnknownGenerator(name.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let kind = match self.kind {
            AlgebraKind::PoissonSchouten => "poisson_schouten",
            AlgebraKind::Bialgebra => "bialgebra",
        };
        let pairing: Vec<Value> = self
            .pairing
            .iter()
            .map(|&(p, q)| json!([self.gens[p].name(), self.gens[q].name()]))
            .collect();
        json!({ "kind": kind, "d": self.d, "dimV": self.dim_v, "pairing": pairing })
    }

    pub fn from_json(v: &Value) -> Result<Arc<AlgebraSpec>, SchoutenError> {
        let bad = |s: &str| SchoutenError::Json(s.to_string());
        let dim = v
            .get("dimV")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing dimV"))? as usize;
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing d"))? as u32;
        match v
            .get("kind")
            .and_then(Value::as_str)
            .unwrap_or("poisson_schouten")
        {
            "poisson_schouten" => Ok(AlgebraSpec::poisson_schouten(d, dim)),
            "bialgebra" if d == 3 => Ok(AlgebraSpec::bialgebra(dim)),
            other => Err(bad(&format!("unsupported algebra kind {other} with d={d}"))),
        }
    }
}

/// A monomial: ħ power and generator exponents in the global order (0/1
/// for odd generators).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub hbar: u32,
    pub exps: Vec<u32>,
}

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono {
            hbar: 0,
            exps: vec![0; n],
        }
    }

    pub fn degree(&self, spec: &AlgebraSpec) -> i32 {
        self.exps
            .iter()
            .zip(&spec.gens)
            .map(|(&e, g)| e as i32 * g.degree)
            .sum()
    }

    /// Total polynomial degree (sum of exponents).
    pub fn poly_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn degree_in(&self, spec: &AlgebraSpec, kind: GenKind) -> u32 {
        self.exps
            .iter()
            .zip(&spec.gens)
            .filter(|(_, g)| g.kind == kind)
            .map(|(&e, _)| e)
            .sum()
    }
}

/// Koszul product of monomials; `None` when an odd generator squares.
pub fn mul_mono(spec: &AlgebraSpec, a: &Mono, b: &Mono) -> Option<(bool, Mono)> {
    let mut exps = Vec::with_capacity(a.exps.len());
    let mut odd_b_before = 0u32;
    let mut negative = false;
    for (i, g) in spec.gens.iter().enumerate() {
        let e = a.exps[i] + b.exps[i];
        if g.is_odd() {
            if e > 1 {
                return None;
            }
            // Each odd factor of a at i passes the odd factors of b before i.
            if a.exps[i] == 1 && odd_b_before % 2 == 1 {
                negative = !negative;
            }
            odd_b_before += b.exps[i];
        }
        exps.push(e);
    }
    Some((
        negative,
        Mono {
            hbar: a.hbar + b.hbar,
            exps,
        },
    ))
}

/// Left (`left = true`) or right derivative of a monomial by generator `k`:
/// (multiplicity, sign negative?, result).
pub fn diff_mono(spec: &AlgebraSpec, m: &Mono, k: usize, left: bool) -> Option<(u32, bool, Mono)> {
    let e = m.exps[k];
    if e == 0 {
        return None;
    }
    let mut negative = false;
    if spec.gens[k].is_odd() {
        let range: Box<dyn Iterator<Item = usize>> = if left {
            Box::new(0..k)
        } else {
            Box::new(k + 1..m.exps.len())
        };
        let passed: i64 = range
            .map(|i| m.exps[i] as i64 * spec.gens[i].degree as i64)
            .sum();
        negative = passed.rem_euclid(2) == 1;
    }
    let mut out = m.clone();
    out.exps[k] -= 1;
    Some((e, negative, out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPoly {
    pub spec: Arc<AlgebraSpec>,
    pub terms: BTreeMap<Mono, Q>,
}

impl GradedPoly {
    pub fn zero(spec: &Arc<AlgebraSpec>) -> Self {
        GradedPoly {
            spec: spec.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(spec: &Arc<AlgebraSpec>, c: Q) -> Self {
        let mut p = Self::zero(spec);
        p.add_term(Mono::one(spec.n_gens()), c);
        p
    }

    pub fn one(spec: &Arc<AlgebraSpec>) -> Self {
        Self::constant(spec, Q::one())
    }

    pub fn generator(spec: &Arc<AlgebraSpec>, k: usize) -> Self {
        let mut m = Mono::one(spec.n_gens());
        m.exps[k] = 1;
        let mut p = Self::zero(spec);
        p.add_term(m, Q::one());
        p
    }

    fn named(spec: &Arc<AlgebraSpec>, kind: GenKind, index: usize) -> Self {
        let k = spec
            .position(kind, index)
            .expect("generator index within dimV");
        Self::generator(spec, k)
    }

    pub fn x(spec: &Arc<AlgebraSpec>, a: usize) -> Self {
        Self::named(spec, GenKind::X, a)
    }

    pub fn psi(spec: &Arc<AlgebraSpec>, a: usize) -> Self {
        Self::named(spec, GenKind::Psi, a)
    }

    pub fn eta(spec: &Arc<AlgebraSpec>, a: usize) -> Self {
        Self::named(spec, GenKind::Eta, a)
    }

    pub fn y(spec: &Arc<AlgebraSpec>, a: usize) -> Self {
        Self::named(spec, GenKind::Y, a)
    }

    /// ħ^k as an element.
    pub fn hbar_power(spec: &Arc<AlgebraSpec>, k: u32) -> Self {
        let mut m = Mono::one(spec.n_gens());
        m.hbar = k;
        let mut p = Self::zero(spec);
        p.add_term(m, Q::one());
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
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

    pub fn check_spec(&self, other: &GradedPoly) -> Result<(), SchoutenError> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(SchoutenError::SpecMismatch)
        }
    }

    pub fn scale(&self, c: &Q) -> GradedPoly {
        let mut out = GradedPoly::zero(&self.spec);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn try_add(&self, other: &GradedPoly) -> Result<GradedPoly, SchoutenError> {
        self.check_spec(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &GradedPoly) -> Result<GradedPoly, SchoutenError> {
        self.check_spec(other)?;
        let mut out = GradedPoly::zero(&self.spec);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some((neg, m)) = mul_mono(&self.spec, a, b) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// The degree if all terms share one.
    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(|m| m.degree(&self.spec));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn homogeneous_components(&self) -> BTreeMap<i32, GradedPoly> {
        let mut out: BTreeMap<i32, GradedPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree(&self.spec))
                .or_insert_with(|| GradedPoly::zero(&self.spec))
                .add_term(m.clone(), c.clone());
        }
        out
    }

    fn derivative(&self, k: usize, left: bool) -> GradedPoly {
        let mut out = GradedPoly::zero(&self.spec);
        for (m, c) in &self.terms {
            if let Some((mult, neg, dm)) = diff_mono(&self.spec, m, k, left) {
                let v = c * q(mult as i64);
                out.add_term(dm, if neg { -v } else { v });
            }
        }
        out
    }

    /// →∂/∂g_k.
    pub fn left_derivative(&self, k: usize) -> GradedPoly {
        self.derivative(k, true)
    }

    /// ←∂/∂g_k.
    pub fn right_derivative(&self, k: usize) -> GradedPoly {
        self.derivative(k, false)
    }

    pub fn filter(&self, keep: impl Fn(&Mono) -> bool) -> GradedPoly {
        GradedPoly {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops ħ powers above `max`.
    pub fn truncate_hbar(&self, max: u32) -> GradedPoly {
        self.filter(|m| m.hbar <= max)
    }

    /// Drops monomials of total polynomial degree above `max`.
    pub fn truncate_degree(&self, max: u32) -> GradedPoly {
        self.filter(|m| m.poly_degree() <= max)
    }

    /// Drops monomials whose degree in generators of `kind` exceeds `max`.
    pub fn truncate_kind_degree(&self, kind: GenKind, max: u32) -> GradedPoly {
        let spec = self.spec.clone();
        self.filter(|m| m.degree_in(&spec, kind) <= max)
    }

    /// The coefficient of ħ^k, as an ħ-free element.
    pub fn hbar_slice(&self, k: u32) -> GradedPoly {
        let mut out = GradedPoly::zero(&self.spec);
        for (m, c) in &self.terms {
            if m.hbar == k {
                out.add_term(
                    Mono {
                        hbar: 0,
                        exps: m.exps.clone(),
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    pub fn max_hbar(&self) -> u32 {
        self.terms.keys().map(|m| m.hbar).max().unwrap_or(0)
    }

    /// Whether every monomial avoids the given generator kinds.
    pub fn avoids(&self, kinds: &[GenKind]) -> bool {
        self.terms
            .keys()
            .all(|m| kinds.iter().all(|&k| m.degree_in(&self.spec, k) == 0))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: serde_json::Map<String, Value> = m
                    .exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (self.spec.gens[i].name(), json!(e)))
                    .collect();
                json!({ "hbar": m.hbar, "coeff": format_q(c), "mono": mono })
            })
            .collect();
        Value::Array(terms)
    }

    pub fn from_json(spec: &Arc<AlgebraSpec>, v: &Value) -> Result<GradedPoly, SchoutenError> {
        let bad = |s: String| SchoutenError::Json(s);
        let terms = v
            .as_array()
            .ok_or_else(|| bad("polynomial must be a term array".into()))?;
        let mut out = GradedPoly::zero(spec);
        for t in terms {
            let hbar = t.get("hbar").and_then(Value::as_u64).unwrap_or(0) as u32;
            let coeff = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing coeff".into()))?;
            let coeff = parse_q(coeff).map_err(|e| bad(e.to_string()))?;
            let mut m = Mono::one(spec.n_gens());
            m.hbar = hbar;
            if let Some(mono) = t.get("mono").and_then(Value::as_object) {
                for (name, e) in mono {
                    let k = spec.position_by_name(name)?;
                    let e = e
                        .as_u64()
                        .ok_or_else(|| bad(format!("bad exponent for {name}")))?
                        as u32;
                    m.exps[k] += e;
                }
            }
            if m.exps
                .iter()
                .zip(&spec.gens)
                .any(|(&e, g)| g.is_odd() && e > 1)
            {
                continue;
            }
            out.add_term(m, coeff);
        }
        Ok(out)
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", format_q(c))?;
            if m.hbar > 0 {
                write!(f, "*h^{}", m.hbar)?;
            }
            for (k, &e) in m.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", self.spec.gens[k].name())?,
                    _ => write!(f, "*{}^{}", self.spec.gens[k].name(), e)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        self.try_add(rhs).expect("operands over the same algebra")
    }
}

impl Sub for &GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        self.try_add(&-rhs).expect("operands over the same algebra")
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        self.scale(&-Q::one())
    }
}

impl Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        self.try_mul(rhs).expect("operands over the same algebra")
    }
}
