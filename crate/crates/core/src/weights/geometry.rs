//! Propagator forms and gauge-fixed slices of configuration spaces with an
//! importance-sampling law.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Propagator, WeightError};

/// Volume of the unit sphere S^{k−1} ⊂ ℝ^k.
pub fn sphere_area(k: u32) -> f64 {
    match k {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 2.0) * sphere_area(k - 2),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// An orthonormal basis (e_1..e_{d−1}) of u^⊥ with det[u, e_1, …] = +1.
pub fn oriented_frame(u: &[f64]) -> Vec<Vec<f64>> {
    let d = u.len();
    if d == 2 {
        return vec![vec![-u[1], u[0]]];
    }
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let n = norm(&v);
        if n > 1e-6 {
            basis.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    let m = nalgebra::DMatrix::from_fn(d, d, |r, c| basis[c][r]);
    if m.determinant() < 0.0 {
        basis[1].iter_mut().for_each(|a| *a = -*a);
    }
    basis.split_off(1)
}

/// Components of the propagator on edge (i → j) at points `zi`, `zj` of
/// the ambient space: d−1 rows over the 2d coordinates (zi, zj).
pub fn form_value(prop: Propagator, zi: &[f64], zj: &[f64]) -> Result<Vec<Vec<f64>>, WeightError> {
    let d = prop.dim() as usize;
    if zi.len() != d || zj.len() != d {
        return Err(WeightError::DimensionMismatch(format!(
            "points must live in R^{d}"
        )));
    }
    let w: Vec<f64> = zi.iter().zip(zj).map(|(a, b)| a - b).collect();
    let rho = norm(&w);
    if rho < 1e-300 {
        return Err(WeightError::CoincidentPoints);
    }
    match prop {
        Propagator::SphereVol(_) | Propagator::Angle => {
            let u: Vec<f64> = w.iter().map(|a| a / rho).collect();
            let scale = 1.0 / (rho * sphere_area(d as u32));
            Ok(oriented_frame(&u)
                .into_iter()
                .map(|e| {
                    e.iter()
                        .map(|a| a * scale)
                        .chain(e.iter().map(|a| -a * scale))
                        .collect()
                })
                .collect())
        }
        Propagator::Kontsevich => kontsevich_row(zi, zj).map(|r| vec![r.to_vec()]),
        Propagator::AntiKontsevich => {
            let r = kontsevich_row(zj, zi)?;
            Ok(vec![vec![r[2], r[3], r[0], r[1]]])
        }
    }
}

/// dArg(w)/2π as a covector in (w_x, w_y).
fn darg(wx: f64, wy: f64) -> (f64, f64) {
    let r2 = wx * wx + wy * wy;
    (-wy / (r2 * 2.0 * PI), wx / (r2 * 2.0 * PI))
}

/// [dArg(z_i − z_j) − dArg(z̄_i − z_j)]/2π over (x_i, y_i, x_j, y_j).
fn kontsevich_row(zi: &[f64], zj: &[f64]) -> Result<[f64; 4], WeightError> {
    let (ax, ay) = darg(zi[0] - zj[0], zi[1] - zj[1]);
    let (bx, by) = (zi[0] - zj[0], -zi[1] - zj[1]);
    if bx * bx + by * by < 1e-300 {
        return Err(WeightError::CoincidentPoints);
    }
    let (cx, cy) = darg(bx, by);
    // w = z_i − z_j: dw = (dx_i − dx_j, dy_i − dy_j); w' = z̄_i − z_j: (dx_i − dx_j, −dy_i − dy_j).
    Ok([ax - cx, ay + cy, -ax + cx, -ay + cy])
}

/// Which configuration space a weight integrates over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GaugeSlice {
    /// C_n(ℝ^d): x_1 = 0, x_2 on the unit sphere.
    Rd { n: usize, d: u32 },
    /// C_{n,m}(H): z_1 = i when n ≥ 1, else q_1 = 0, q_2 = 1; ground points
    /// ordered q_1 < … < q_m.
    Half { n: usize, m: usize },
}

impl GaugeSlice {
    pub fn dim(&self) -> usize {
        match *self {
            GaugeSlice::Rd { n, d } => (d as usize * n).saturating_sub(d as usize + 1),
            GaugeSlice::Half { n, m } => (2 * n + m).saturating_sub(2),
        }
    }

    pub fn ambient(&self) -> usize {
        match *self {
            GaugeSlice::Rd { d, .. } => d as usize,
            GaugeSlice::Half { .. } => 2,
        }
    }

    pub fn n_points(&self) -> usize {
        match *self {
            GaugeSlice::Rd { n, .. } => n,
            GaugeSlice::Half { n, m } => n + m,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            GaugeSlice::Rd { n, d } => format!("Rd(n={n},d={d})"),
            GaugeSlice::Half { n, m } => format!("Half(n={n},m={m})"),
        }
    }

    /// Whether the slice is a valid quotient (enough points to fix the gauge).
    pub fn is_stable(&self) -> bool {
        match *self {
            GaugeSlice::Rd { n, .. } => n >= 2,
            GaugeSlice::Half { n, m } => n >= 1 || m >= 2,
        }
    }
}

/// One sampled configuration: positions, their derivatives along the slice
/// coordinates, and the sampling density.
pub(crate) struct Sample {
    pub points: Vec<Vec<f64>>,
    /// For each point, (slice coordinate, ∂point/∂coordinate).
    pub tangents: Vec<Vec<(usize, Vec<f64>)>>,
    pub density: f64,
}

fn radial_law(r: f64) -> f64 {
    1.0 / ((1.0 + r) * (1.0 + r))
}

/// Uniform mixture over `centers` of the radial kernel
/// h(r)/(|S^{k−1}| r^{k−1}), h(r) = 1/(1+r)²: heavy tails and a singular
/// core matching the 1/r^{k−1} blow-up of propagators at collisions.
fn mixture_density(z: &[f64], centers: &[Vec<f64>]) -> f64 {
    let k = z.len() as u32;
    let area = sphere_area(k);
    let total: f64 = centers
        .iter()
        .map(|c| {
            let r = z
                .iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            radial_law(r) / (area * r.powi(k as i32 - 1))
        })
        .sum();
    total / centers.len() as f64
}

fn unit_vector<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

fn sample_mixture<R: Rng>(rng: &mut R, centers: &[Vec<f64>]) -> Vec<f64> {
    let c = &centers[rng.gen_range(0..centers.len())];
    let u: f64 = rng.gen_range(0.0..1.0);
    let r = u / (1.0 - u);
    let dir = unit_vector(rng, c.len());
    c.iter().zip(&dir).map(|(a, b)| a + r * b).collect()
}

fn basis(k: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[i] = 1.0;
    v
}

fn cauchy_density(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn sample<R: Rng>(slice: GaugeSlice, rng: &mut R) -> Sample {
    match slice {
        GaugeSlice::Rd { n, d } => {
            let d = d as usize;
            let mut points = vec![vec![0.0; d]];
            let mut tangents = vec![Vec::new()];
            let u = unit_vector(rng, d);
            tangents.push(oriented_frame(&u).into_iter().enumerate().collect());
            points.push(u);
            let mut density = 1.0 / sphere_area(d as u32);
            let mut coord = d - 1;
            for _ in 2..n {
                let z = sample_mixture(rng, &points);
                density *= mixture_density(&z, &points);
                tangents.push((0..d).map(|c| (coord + c, basis(d, c))).collect());
                coord += d;
                points.push(z);
            }
            Sample {
                points,
                tangents,
                density,
            }
        }
        GaugeSlice::Half { n, m } => {
            let mut density = 1.0;
            let mut ground: Vec<f64>;
            let ground_offset;
            if n == 0 {
                ground = vec![0.0, 1.0];
                for _ in 2..m {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    let t = u / (1.0 - u);
                    density *= radial_law(t);
                    ground.push(1.0 + t);
                }
                ground[2..].sort_by(f64::total_cmp);
                density *= factorial(m.saturating_sub(2));
                ground_offset = 0;
            } else {
                ground = (0..m)
                    .map(|_| {
                        let u: f64 = rng.gen_range(0.0..1.0);
                        (PI * (u - 0.5)).tan()
                    })
                    .collect();
                density *=
                    ground.iter().map(|&q| cauchy_density(q)).product::<f64>() * factorial(m);
                ground.sort_by(f64::total_cmp);
                ground_offset = 2 * (n - 1);
            }
            let ground_points: Vec<Vec<f64>> = ground.iter().map(|&q| vec![q, 0.0]).collect();
            let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + m);
            let mut tangents = Vec::with_capacity(n + m);
            if n >= 1 {
                points.push(vec![0.0, 1.0]);
                tangents.push(Vec::new());
            }
            for k in 1..n {
                let mut centers = points.clone();
                centers.extend(ground_points.iter().cloned());
                let mut z = sample_mixture(rng, &centers);
                z[1] = z[1].abs();
                let mirror = vec![z[0], -z[1]];
                density *= mixture_density(&z, &centers) + mixture_density(&mirror, &centers);
                let c = 2 * (k - 1);
                tangents.push(vec![(c, basis(2, 0)), (c + 1, basis(2, 1))]);
                points.push(z);
            }
            for (j, p) in ground_points.into_iter().enumerate() {
                let free = if n == 0 { j >= 2 } else { true };
                let t = if free {
                    let c = if n == 0 { j - 2 } else { ground_offset + j };
                    vec![(c, basis(2, 0))]
                } else {
                    Vec::new()
                };
                tangents.push(t);
                points.push(p);
            }
            Sample {
                points,
                tangents,
                density,
            }
        }
    }
}

/// Minimum pairwise distance of a configuration (reflections included for
/// the half-plane, where z̄_i = z_j signals a boundary collision).
pub(crate) fn min_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let r = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.min(r);
        }
    }
    best
}

/// det of the pulled-back edge forms against the slice coordinates.
pub(crate) fn integrand(
    prop: Propagator,
    edges: &[(usize, usize)],
    s: &Sample,
    dim: usize,
) -> Result<f64, WeightError> {
    let rows_per_edge = prop.dim() as usize - 1;
    let amb = prop.dim() as usize;
    let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut row = 0;
    for &(i, j) in edges {
        let f = form_value(prop, &s.points[i], &s.points[j])?;
        for fr in f.iter().take(rows_per_edge) {
            for (coord, v) in &s.tangents[i] {
                m[(row, *coord)] += fr[..amb].iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            }
            for (coord, v) in &s.tangents[j] {
                m[(row, *coord)] += fr[amb..].iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            }
            row += 1;
        }
    }
    Ok(m.determinant())
}
