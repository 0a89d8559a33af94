//! Verification suites run by `opk verify` and the acceptance test. Each
//! check reports pass/fail, a one-line detail and its wall time; errors
//! inside a check become failures rather than aborting the suite.

use std::error::Error;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain_operads::{d_squared, D2Options, Family};
use crate::exec::Exec;
use crate::graph_core::{compose, enumerate, ArrowMode, FeynmanGraph};
use crate::quantize::{
    associativity_residual, build_mu, poly_from_terms, star_product, x_monomials, Weigher,
};
use crate::rational::{format_q, q, Q};
use crate::schouten::{
    bracket_symmetry_sign, deformed_bracket, gamma_delta, hat_c, hat_c_residual, mc_residual,
    phi_graph, representation_check, schouten_bracket, AlgebraSpec, GenKind, GradedPoly, Mono,
    StructureConstants,
};
use crate::weights::{
    snap_rational, stokes_residual, weight, zero_by_degree, GaugeSlice, Propagator, WeightOptions,
};

type Res<T> = Result<T, Box<dyn Error + Send + Sync>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    D2,
    Graphs,
    Schouten,
    Bernoulli,
    Weights,
    Star,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::D2 => "d2",
            Suite::Graphs => "graphs",
            Suite::Schouten => "schouten",
            Suite::Bernoulli => "bernoulli",
            Suite::Weights => "weights",
            Suite::Star => "star",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub samples: u64,
    pub seed: u64,
    pub snap_denominator: u64,
    pub exec: Exec,
    pub cache: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 100_000,
            seed: 42,
            snap_denominator: 16,
            exec: Exec::default(),
            cache: None,
        }
    }
}

impl VerifyConfig {
    fn weight_options(&self) -> WeightOptions {
        WeightOptions {
            samples: self.samples,
            seed: self.seed,
            exec: self.exec,
        }
    }

    fn weigher(&self) -> Res<Weigher> {
        let w = Weigher::new(self.weight_options(), self.snap_denominator);
        Ok(match &self.cache {
            Some(dir) => w.with_cache(Some(dir))?,
            None => w,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn run(name: &str, f: impl FnOnce() -> Res<(bool, String)>) -> Check {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        Check {
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} ({:.2}s): {}",
            self.name, self.seconds, self.detail
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let checks = match suite {
        Suite::D2 => vec![d2_rational(cfg), d2_mod2(cfg)],
        Suite::Graphs => vec![composition_example(), representation_sweep(cfg)],
        Suite::Schouten => vec![schouten_identities(cfg)],
        Suite::Bernoulli => vec![bernoulli_suite()],
        Suite::Weights => vec![
            edge_weights(cfg),
            degree_vanishing(cfg),
            angle_vanishing(cfg),
            stokes_families(cfg),
            wedge_snap(cfg),
        ],
        Suite::Star => vec![moyal_star(cfg), homogeneous_recovery(cfg)],
    };
    SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

// ---- chain operads ----

pub fn d2_rational(cfg: &VerifyConfig) -> Check {
    Check::run(
        "d2 over Q: A-inf n<=6, Mor(A-inf) n<=5, L-inf{1} n<=6",
        || {
            let mut parts = Vec::new();
            let mut ok = true;
            for (f, bound) in [
                (Family::AssInf, 6),
                (Family::MorAssInf, 5),
                (Family::LieInf(2), 6),
            ] {
                let r = d_squared(
                    f,
                    D2Options {
                        bound,
                        exec: cfg.exec,
                    },
                )?;
                ok &= r.zero_over_q;
                parts.push(format!(
                    "{f}: {} generators, zero={}",
                    r.rows.len(),
                    r.zero_over_q
                ));
            }
            Ok((ok, parts.join("; ")))
        },
    )
}

pub fn d2_mod2(cfg: &VerifyConfig) -> Check {
    Check::run(
        "d2 over F2: OCHA 2n+m<=8, Mor(L-inf) n<=5, Mor(OCHA) 2n+m<=6",
        || {
            let mut parts = Vec::new();
            let mut ok = true;
            for (f, bound) in [
                (Family::Ocha(2), 8),
                (Family::MorLieInf, 5),
                (Family::MorOcha, 6),
            ] {
                let r = d_squared(
                    f,
                    D2Options {
                        bound,
                        exec: cfg.exec,
                    },
                )?;
                ok &= r.zero_over_f2;
                parts.push(format!(
                    "{f}: {} generators, F2 zero={}, Q zero={}",
                    r.rows.len(),
                    r.zero_over_f2,
                    r.zero_over_q
                ));
            }
            Ok((ok, parts.join("; ")))
        },
    )
}

// ---- graphs ----

pub fn composition_example() -> Check {
    Check::run("2-cycle with an edge substituted into vertex 1", || {
        let g0 = FeynmanGraph::aerial(2, 2, &[(1, 2), (2, 1)]);
        let parts = [
            FeynmanGraph::aerial(2, 2, &[(1, 2)]),
            FeynmanGraph::aerial(2, 1, &[]),
        ];
        let s = compose(&g0, &parts, &[vec![1, 2], vec![3]])?;
        let ok = s.len() == 4 && s.iter().all(|(_, c)| *c == q(1));
        Ok((ok, s.to_string()))
    })
}

/// Ordered set partitions of 1..=n into blocks of the given sizes.
fn ordered_partitions(sizes: &[usize]) -> Vec<Vec<Vec<u32>>> {
    fn go(rest: &[u32], sizes: &[usize], acc: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        let Some((&k, tail)) = sizes.split_first() else {
            out.push(acc.clone());
            return;
        };
        for block in rest.iter().copied().combinations(k) {
            let left: Vec<u32> = rest
                .iter()
                .copied()
                .filter(|v| !block.contains(v))
                .collect();
            acc.push(block);
            go(&left, tail, acc, out);
            acc.pop();
        }
    }
    let n: usize = sizes.iter().sum();
    let all: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::new();
    go(&all, sizes, &mut Vec::new(), &mut out);
    out
}

/// Compositions of at most `max` into `p` positive parts.
fn block_sizes(p: usize, max: usize) -> Vec<Vec<usize>> {
    (0..p)
        .map(|_| 1..=max)
        .multi_cartesian_product()
        .filter(|s| s.iter().sum::<usize>() <= max)
        .collect()
}

fn graphs_up_to(n: usize, max_edges: usize, d: u32) -> Vec<FeynmanGraph> {
    (0..=max_edges)
        .flat_map(|l| enumerate(n as u32, 0, l, d, ArrowMode::Free))
        .collect()
}

struct RepCase {
    g0: FeynmanGraph,
    parts: Vec<FeynmanGraph>,
    partition: Vec<Vec<u32>>,
}

fn representation_cases(d: u32) -> Vec<RepCase> {
    let mut cases = Vec::new();
    for p in 1..=4usize {
        for g0 in graphs_up_to(p, 3, d) {
            let budget = 3 - g0.edges.len();
            for sizes in block_sizes(p, 4) {
                let options: Vec<Vec<FeynmanGraph>> =
                    sizes.iter().map(|&k| graphs_up_to(k, budget, d)).collect();
                let partitions = ordered_partitions(&sizes);
                for parts in options.iter().map(|o| o.iter()).multi_cartesian_product() {
                    if parts.iter().map(|g| g.edges.len()).sum::<usize>() > budget {
                        continue;
                    }
                    let parts: Vec<FeynmanGraph> = parts.into_iter().cloned().collect();
                    for partition in &partitions {
                        cases.push(RepCase {
                            g0: g0.clone(),
                            parts: parts.clone(),
                            partition: partition.clone(),
                        });
                    }
                }
            }
        }
    }
    cases
}

/// A random polynomial with up to three terms of degree ≤ 2 in all generators.
fn random_poly(spec: &Arc<AlgebraSpec>, rng: &mut ChaCha8Rng) -> GradedPoly {
    let mut out = GradedPoly::zero(spec);
    for _ in 0..rng.gen_range(1..=3) {
        let mut t = GradedPoly::constant(
            spec,
            q(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 }),
        );
        for _ in 0..rng.gen_range(0..=2) {
            t = &t * &GradedPoly::generator(spec, rng.gen_range(0..spec.n_gens()));
        }
        out = &out + &t;
    }
    out
}

pub fn representation_sweep(cfg: &VerifyConfig) -> Check {
    Check::run(
        "representation identity on all compositions with <=4 vertices, <=3 edges, d in {2,3}",
        || {
            let mut total = 0;
            let mut failures = Vec::new();
            for d in [2u32, 3] {
                let spec = AlgebraSpec::poisson_schouten(d, 2);
                let cases = representation_cases(d);
                total += cases.len();
                let results = cfg.exec.map_range(cases.len(), |i| {
                    let c = &cases[i];
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream((u64::from(d) << 32) + i as u64);
                    let n: usize = c.partition.iter().map(Vec::len).sum();
                    let inputs: Vec<GradedPoly> =
                        (0..n).map(|_| random_poly(&spec, &mut rng)).collect();
                    representation_check(&c.g0, &c.parts, &c.partition, &inputs)
                        .map(|r| r.is_zero())
                });
                for (i, r) in results.into_iter().enumerate() {
                    match r {
                        Ok(true) => {}
                        Ok(false) => failures.push(format!(
                            "d={d} g0={} parts={:?}",
                            cases[i].g0, cases[i].partition
                        )),
                        Err(e) => failures.push(format!("d={d} case {i}: {e}")),
                    }
                }
            }
            let detail = if failures.is_empty() {
                format!("{total} cases, all residuals zero")
            } else {
                format!(
                    "{} of {total} nonzero, first: {}",
                    failures.len(),
                    failures[0]
                )
            };
            Ok((failures.is_empty(), detail))
        },
    )
}

// ---- Schouten algebra ----

fn homogeneous_random(spec: &Arc<AlgebraSpec>, rng: &mut ChaCha8Rng) -> GradedPoly {
    loop {
        let p = random_poly(spec, rng);
        if let Some(c) = p
            .homogeneous_components()
            .into_values()
            .max_by_key(GradedPoly::len)
        {
            if !c.is_zero() {
                return c;
            }
        }
    }
}

fn deg(p: &GradedPoly) -> i32 {
    p.degree().unwrap_or(0)
}

/// {f,{g,h}} − {{f,g},h} ∓ {g,{f,h}} for a bracket of degree 1 − d.
fn jacobi_residual(
    b: &dyn Fn(&GradedPoly, &GradedPoly) -> Res<GradedPoly>,
    d: u32,
    f: &GradedPoly,
    g: &GradedPoly,
    h: &GradedPoly,
) -> Res<GradedPoly> {
    let k = d as i32 - 1;
    let lhs = b(f, &b(g, h)?)?;
    let r1 = b(&b(f, g)?, h)?;
    let r2 = b(g, &b(f, h)?)?;
    let rhs = if ((deg(f) + k) * (deg(g) + k)).rem_euclid(2) == 0 {
        &r1 + &r2
    } else {
        &r1 - &r2
    };
    Ok(&lhs - &rhs)
}

pub fn schouten_identities(cfg: &VerifyConfig) -> Check {
    Check::run(
        "Schouten bracket symmetry, Jacobi, one-edge graphs and generator table",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut bad = Vec::new();
            for d in [2u32, 3] {
                let spec = AlgebraSpec::poisson_schouten(d, 2);
                let e12 = FeynmanGraph::aerial(d, 2, &[(1, 2)]);
                let e21 = FeynmanGraph::aerial(d, 2, &[(2, 1)]);
                let b = |f: &GradedPoly, g: &GradedPoly| -> Res<GradedPoly> {
                    Ok(schouten_bracket(f, g)?)
                };
                for i in 0..100 {
                    let (f, g, h) = (
                        homogeneous_random(&spec, &mut rng),
                        homogeneous_random(&spec, &mut rng),
                        homogeneous_random(&spec, &mut rng),
                    );
                    let fg = b(&f, &g)?;
                    if fg != b(&g, &f)?.scale(&q(bracket_symmetry_sign(d, deg(&f), deg(&g)))) {
                        bad.push(format!("d={d} triple {i}: symmetry"));
                    }
                    if !jacobi_residual(&b, d, &f, &g, &h)?.is_zero() {
                        bad.push(format!("d={d} triple {i}: Jacobi"));
                    }
                    let p12 = phi_graph(&e12, &[f.clone(), g.clone()])?;
                    let p21 = phi_graph(&e21, &[f.clone(), g.clone()])?;
                    let expect = if d % 2 == 0 {
                        (&p12 + &p21).scale(&q(if (deg(&f) + 1) % 2 == 0 { 1 } else { -1 }))
                    } else {
                        &p21 - &p12
                    };
                    if fg != expect {
                        bad.push(format!("d={d} triple {i}: one-edge graphs"));
                    }
                }
            }
            // {ψ_α • x^β} = δ_α^β, both for the standard bracket and the ħ⁰
            // part of the deformed one.
            for cc in [StructureConstants::solvable_2d(), StructureConstants::so3()] {
                let br = deformed_bracket(&cc, 2)?;
                let s = br.spec.clone();
                for a in 1..=cc.dim {
                    for b in 1..=cc.dim {
                        let want = GradedPoly::constant(&s, q(i64::from(a == b)));
                        let plain =
                            schouten_bracket(&GradedPoly::psi(&s, a), &GradedPoly::x(&s, b))?;
                        let deformed = br
                            .apply(&GradedPoly::psi(&s, a), &GradedPoly::x(&s, b))?
                            .hbar_slice(0);
                        if plain != want || deformed != want {
                            bad.push(format!("dim {}: psi{a} x{b}", cc.dim));
                        }
                    }
                }
            }
            let detail = if bad.is_empty() {
                "200 triples and both generator tables exact".to_string()
            } else {
                bad.join("; ")
            };
            Ok((bad.is_empty(), detail))
        },
    )
}

fn sample_polys(s: &Arc<AlgebraSpec>) -> Res<Vec<GradedPoly>> {
    let n = s.dim_v;
    let xs = |i: usize| format!("x{i}");
    let ps = |i: usize| format!("psi{i}");
    let specs: [Vec<(i64, Vec<String>)>; 4] = [
        vec![(1, vec![xs(1), xs(2)]), (2, vec![xs(2), xs(2)])],
        vec![(1, vec![ps(n)]), (-1, vec![xs(1), ps(n - 1)])],
        vec![(1, vec![xs(1), ps(n), ps(n - 1)])],
        vec![(2, vec![xs(2), ps(n)]), (1, vec![xs(1), xs(1), ps(n)])],
    ];
    specs
        .iter()
        .map(|terms| {
            let owned: Vec<(Q, Vec<&str>)> = terms
                .iter()
                .map(|(c, v)| (q(*c), v.iter().map(String::as_str).collect()))
                .collect();
            let borrowed: Vec<(Q, &[&str])> = owned
                .iter()
                .map(|(c, v)| (c.clone(), v.as_slice()))
                .collect();
            Ok(poly_from_terms(s, &borrowed)?)
        })
        .collect()
}

pub fn bernoulli_suite() -> Check {
    Check::run(
        "Bernoulli series, gamma^Delta and the deformed bracket through degree 5 / hbar^4",
        || {
            let mut bad = Vec::new();
            for (name, cc) in [
                ("solvable 2-dim", StructureConstants::solvable_2d()),
                ("so(3)", StructureConstants::so3()),
            ] {
                let spec = AlgebraSpec::poisson_schouten(2, cc.dim);
                let hat = hat_c(&cc, &spec, 6)?;
                let r = hat_c_residual(&cc, &hat, 5)?;
                if !r.is_empty() {
                    bad.push(format!("{name}: C-hat residual at {:?}", r[0].0));
                }
                let g = gamma_delta(&cc, 6)?;
                if !mc_residual(&g, None)?
                    .truncate_kind_degree(GenKind::X, 5)
                    .is_zero()
                {
                    bad.push(format!("{name}: gamma^Delta is not Maurer-Cartan"));
                }
                let br = deformed_bracket(&cc, 4)?;
                let b = |f: &GradedPoly, g: &GradedPoly| -> Res<GradedPoly> { Ok(br.apply(f, g)?) };
                let samples = sample_polys(&br.spec)?;
                for f in &samples {
                    for g in &samples {
                        for h in &samples {
                            if !jacobi_residual(&b, 2, f, g, h)?.is_zero() {
                                bad.push(format!("{name}: Jacobi"));
                            }
                            let lhs = b(f, &(g * h))?;
                            let koszul = if ((deg(f) + 1) * deg(g)).rem_euclid(2) == 0 {
                                1
                            } else {
                                -1
                            };
                            let rhs = (&(&b(f, g)? * h) + &(g * &b(f, h)?).scale(&q(koszul)))
                                .truncate_hbar(4);
                            if lhs != rhs {
                                bad.push(format!("{name}: biderivation"));
                            }
                        }
                    }
                }
            }
            bad.dedup();
            let detail = if bad.is_empty() {
                "solvable 2-dim and so(3): all residuals zero".to_string()
            } else {
                bad.join("; ")
            };
            Ok((bad.is_empty(), detail))
        },
    )
}

// ---- weights ----

pub fn edge_weights(cfg: &VerifyConfig) -> Check {
    Check::run("two-vertex edge weight", || {
        let mut ok = true;
        for d in 2..=6 {
            let g = FeynmanGraph::aerial(d, 2, &[(2, 1)]);
            let p = Propagator::SphereVol(d);
            let e = weight(&g, p, p.default_slice(&g), cfg.weight_options())?;
            ok &= e.mean == 1.0 && e.exact;
        }
        let g = FeynmanGraph::aerial(2, 2, &[(1, 2)]);
        let e = weight(
            &g,
            Propagator::Angle,
            Propagator::Angle.default_slice(&g),
            cfg.weight_options(),
        )?;
        ok &= e.mean == 1.0;
        Ok((
            ok,
            "edge 2->1 for d=2..6 and both angle orientations: 1".into(),
        ))
    })
}

pub fn degree_vanishing(cfg: &VerifyConfig) -> Check {
    Check::run("degree vanishing on mismatched graphs", || {
        let mut fired = 0;
        let mut ok = true;
        for d in 2..=5u32 {
            for n in 2..=5u32 {
                let pairs: Vec<(u32, u32)> = (1..=n)
                    .flat_map(|s| (1..=n).filter(move |&t| t != s).map(move |t| (s, t)))
                    .collect();
                for e in 0..=pairs.len().min(7) {
                    let g = FeynmanGraph::aerial(d, n, &pairs[..e]);
                    let slice = GaugeSlice::Rd { n: n as usize, d };
                    if (d as usize - 1) * e == (d * n - d - 1) as usize {
                        continue;
                    }
                    let p = Propagator::SphereVol(d);
                    let est = weight(&g, p, slice, cfg.weight_options())?;
                    ok &= zero_by_degree(&g, p, slice)
                        && est.zero_by_degree
                        && est.mean == 0.0
                        && est.n_samples == 0;
                    fired += 1;
                }
            }
        }
        Ok((
            ok && fired >= 50,
            format!("{fired} mismatched graphs short-circuited to 0"),
        ))
    })
}

pub fn angle_vanishing(cfg: &VerifyConfig) -> Check {
    Check::run("angle-propagator triangles vanish", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for edges in [
            [(1, 2), (2, 3), (3, 1)],
            [(1, 2), (2, 3), (1, 3)],
            [(2, 1), (3, 1), (2, 3)],
        ] {
            let g = FeynmanGraph::aerial(2, 3, &edges);
            let e = weight(
                &g,
                Propagator::Angle,
                Propagator::Angle.default_slice(&g),
                cfg.weight_options(),
            )?;
            ok &= e.stderr <= 0.02 && e.mean.abs() < 3.0 * e.stderr;
            parts.push(format!("{:.1e}±{:.1e}", e.mean, e.stderr));
        }
        Ok((ok, format!("{} samples: {}", cfg.samples, parts.join(", "))))
    })
}

pub fn stokes_families(cfg: &VerifyConfig) -> Check {
    Check::run(
        "Stokes identity on 4-cycles and triangles with a pendant edge (d=2)",
        || {
            type Family = (&'static str, [[(u32, u32); 4]; 2]);
            let families: [Family; 2] = [
                (
                    "4-cycle",
                    [
                        [(1, 2), (2, 3), (3, 4), (4, 1)],
                        [(1, 2), (2, 3), (3, 4), (1, 4)],
                    ],
                ),
                (
                    "triangle+pendant",
                    [
                        [(1, 2), (2, 3), (3, 1), (3, 4)],
                        [(1, 2), (2, 3), (3, 1), (4, 3)],
                    ],
                ),
            ];
            let mut ok = true;
            let mut parts = Vec::new();
            for (name, graphs) in families {
                for edges in graphs {
                    let g = FeynmanGraph::aerial(2, 4, &edges);
                    let r = stokes_residual(&g, Propagator::SphereVol(2), cfg.weight_options())?;
                    ok &= r.within(3.0);
                    parts.push(format!("{name} {:.1e}±{:.1e}", r.residual, r.stderr));
                }
            }
            Ok((ok, parts.join(", ")))
        },
    )
}

/// ∫_H dθ_0 ∧ dθ_1 / π² with ground points 0 and 1, by the midpoint rule in
/// (atan x, atan y).
pub fn wedge_by_quadrature(n: usize) -> f64 {
    let grad = |x: f64, y: f64, p: f64| {
        let r2 = (x - p).powi(2) + y * y;
        (-y / r2, (x - p) / r2)
    };
    let (ha, hb) = (PI / n as f64, PI / 2.0 / n as f64);
    let mut total = 0.0;
    for i in 0..n {
        let a = -PI / 2.0 + (i as f64 + 0.5) * ha;
        for j in 0..n {
            let b = (j as f64 + 0.5) * hb;
            let (g0, g1) = (grad(a.tan(), b.tan(), 0.0), grad(a.tan(), b.tan(), 1.0));
            total += (g0.0 * g1.1 - g0.1 * g1.0) / (a.cos().powi(2) * b.cos().powi(2)) * ha * hb;
        }
    }
    total / (PI * PI)
}

pub fn wedge_snap(cfg: &VerifyConfig) -> Check {
    Check::run("wedge weight snaps to 1/2", || {
        let g = FeynmanGraph::mixed(2, 1, 2, ArrowMode::Down, &[(1, 2), (1, 3)]);
        let p = Propagator::Kontsevich;
        let e = weight(&g, p, p.default_slice(&g), cfg.weight_options())?;
        let snapped = snap_rational(e.mean, e.stderr, 16);
        let quad = wedge_by_quadrature(1500);
        let ok = snapped == Some(crate::rational::qr(1, 2))
            && e.stderr < 1e-3
            && (quad - e.mean).abs() < 3.0 * e.stderr + 2e-3;
        let shown = snapped.as_ref().map_or("none".into(), format_q);
        Ok((
            ok,
            format!(
                "MC {:.6}±{:.1e}, quadrature {quad:.6}, snapped {shown}",
                e.mean, e.stderr
            ),
        ))
    })
}

// ---- quantization ----

/// γ^{ij} = ∂_{ψ_i}∂_{ψ_j}γ for a constant bivector.
fn bivector_matrix(gamma: &GradedPoly) -> Res<Vec<Vec<Q>>> {
    let spec = &gamma.spec;
    let n = spec.dim_v;
    let one = Mono::one(spec.n_gens());
    let mut out = vec![vec![q(0); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            let c = gamma
                .left_derivative(spec.position(GenKind::Psi, j)?)
                .left_derivative(spec.position(GenKind::Psi, i)?);
            out[i - 1][j - 1] = c.terms.get(&one).cloned().unwrap_or_else(|| q(0));
        }
    }
    Ok(out)
}

pub fn moyal_star(cfg: &VerifyConfig) -> Check {
    Check::run("star product for constant gamma on R^2 to order 2", || {
        let spec = AlgebraSpec::poisson_schouten(2, 2);
        let gamma = poly_from_terms(&spec, &[(q(1), &["psi1", "psi2"])])?;
        let mut w = cfg.weigher()?;
        let star = star_product(&gamma, Propagator::Kontsevich, 2, &mut w)?;
        if !star.is_exact() {
            return Ok((false, format!("unsnapped weights: {:?}", star.warnings())));
        }
        let mons = x_monomials(&spec, 3);
        let mut nonzero = 0;
        for f in &mons {
            for g in &mons {
                for h in &mons {
                    if !associativity_residual(&star, f, g, h)?
                        .iter()
                        .all(GradedPoly::is_zero)
                    {
                        nonzero += 1;
                    }
                }
            }
        }
        // Commutator against 2·w_wedge·γ^{ij}∂_if∂_jg with an independently
        // snapped wedge weight.
        let wedge = FeynmanGraph::mixed(2, 1, 2, ArrowMode::Down, &[(1, 2), (1, 3)]);
        let (est, _, _) = w.estimate(
            &wedge,
            Propagator::Kontsevich,
            Propagator::Kontsevich.default_slice(&wedge),
        )?;
        let ww = snap_rational(est.mean, est.stderr, cfg.snap_denominator)
            .ok_or("wedge weight did not snap")?;
        let theta = bivector_matrix(&gamma)?;
        let dx = |f: &GradedPoly, a: usize| -> Res<GradedPoly> {
            Ok(f.left_derivative(spec.position(GenKind::X, a)?))
        };
        let mut comm_bad = 0;
        for f in &mons {
            for g in &mons {
                let comm = &star.apply(f, g)? - &star.apply(g, f)?;
                let mut expect = GradedPoly::zero(&spec);
                for (i, row) in theta.iter().enumerate() {
                    for (j, t) in row.iter().enumerate() {
                        expect = &expect + &dx(f, i + 1)?.try_mul(&dx(g, j + 1)?)?.scale(t);
                    }
                }
                if comm.hbar_slice(1) != expect.scale(&(q(2) * &ww)) {
                    comm_bad += 1;
                }
            }
        }
        let n = mons.len();
        let detail = format!(
            "{} triples, {nonzero} nonzero associators; commutator = 2*{}*gamma^ij d_i f d_j g on {} pairs, {comm_bad} mismatches",
            n * n * n,
            format_q(&ww),
            n * n
        );
        Ok((nonzero == 0 && comm_bad == 0, detail))
    })
}

pub fn homogeneous_recovery(cfg: &VerifyConfig) -> Check {
    Check::run(
        "homogeneous propagator: mu_2 is the bracket, mu_3 vanishes (d=2)",
        || {
            let mut w = cfg.weigher()?;
            let p = Propagator::SphereVol(2);
            let mu2 = build_mu(2, p, 2, &mut w)?;
            let mu3 = build_mu(2, p, 3, &mut w)?;
            let spec = AlgebraSpec::poisson_schouten(2, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut mismatches = 0;
            for _ in 0..50 {
                let (f, g) = (
                    homogeneous_random(&spec, &mut rng),
                    homogeneous_random(&spec, &mut rng),
                );
                // μ_2 is the bracket transported to the shifted grading.
                let sign = if deg(&f) % 2 == 0 { -1 } else { 1 };
                if mu2.apply(&[f.clone(), g.clone()])? != schouten_bracket(&f, &g)?.scale(&q(sign))
                {
                    mismatches += 1;
                }
            }
            let ok = mu2.is_exact() && mismatches == 0 && mu3.is_exact() && mu3.is_zero();
            Ok((
                ok,
                format!(
                    "mu_2: {} | {mismatches} mismatches on 50 pairs; mu_3 zero={}",
                    mu2.describe().replace('\n', "; "),
                    mu3.is_zero()
                ),
            ))
        },
    )
}
