#![allow(clippy::needless_range_loop)]

use std::sync::{Arc, OnceLock};

use opk::exec::Exec;
use opk::graph_core::FeynmanGraph;
use opk::quantize::*;
use opk::rational::{q, qr, Q};
use opk::schouten::*;
use opk::weights::{Propagator, WeightCache, WeightOptions};
use proptest::prelude::*;

fn weigher(samples: u64) -> Weigher {
    Weigher::new(
        WeightOptions {
            samples,
            seed: 42,
            exec: Exec::default(),
        },
        16,
    )
}

/// μ_2 and μ_3 for d = 2, computed once for the whole file.
fn mu_d2() -> &'static (WeightedGraphOperator, WeightedGraphOperator) {
    static MU: OnceLock<(WeightedGraphOperator, WeightedGraphOperator)> = OnceLock::new();
    MU.get_or_init(|| {
        let mut w = weigher(100_000);
        let mu2 = build_mu(2, Propagator::SphereVol(2), 2, &mut w).unwrap();
        let mu3 = build_mu(2, Propagator::SphereVol(2), 3, &mut w).unwrap();
        (mu2, mu3)
    })
}

fn moyal_star() -> &'static StarProduct {
    static STAR: OnceLock<StarProduct> = OnceLock::new();
    STAR.get_or_init(|| {
        let spec = AlgebraSpec::poisson_schouten(2, 2);
        let gamma = poly_from_terms(&spec, &[(q(1), &["psi1", "psi2"])]).unwrap();
        star_product(&gamma, Propagator::Kontsevich, 2, &mut weigher(100_000)).unwrap()
    })
}

fn poly(spec: &Arc<AlgebraSpec>, terms: &[(i64, Vec<usize>)]) -> GradedPoly {
    let mut p = GradedPoly::zero(spec);
    for (k, gens) in terms {
        let mut m = GradedPoly::constant(spec, q(*k));
        for &g in gens {
            m = &m * &GradedPoly::generator(spec, g);
        }
        p = &p + &m;
    }
    p
}

#[test]
fn build_mu_two_is_the_shifted_bracket() {
    let (mu2, _) = mu_d2();
    assert!(mu2.is_exact());
    assert_eq!(mu2.terms.len(), 2);
    assert!(mu2.terms.iter().all(|t| t.coeff == q(1)));
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let f = poly(&spec, &[(2, vec![0, 2]), (-1, vec![1, 1, 3])]);
    let g = poly(&spec, &[(1, vec![0, 0, 3]), (3, vec![1])]);
    for (a, b) in [(&f, &g), (&g, &f), (&f, &f)] {
        for ca in a.homogeneous_components().values() {
            for cb in b.homogeneous_components().values() {
                let sign = if ca.degree().unwrap() % 2 == 0 { -1 } else { 1 };
                let expect = schouten_bracket(ca, cb).unwrap().scale(&q(sign));
                assert_eq!(mu2.apply(&[ca.clone(), cb.clone()]).unwrap(), expect);
            }
        }
    }
}

#[test]
fn build_mu_three_vanishes() {
    let (_, mu3) = mu_d2();
    assert!(mu3.is_exact(), "{:?}", mu3.warnings);
    assert!(mu3.is_zero());
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let f = poly(&spec, &[(1, vec![0, 0, 2, 3])]);
    assert!(mu3.apply(&[f.clone(), f.clone(), f]).unwrap().is_zero());
}

#[test]
fn build_mu_in_three_dimensions() {
    let mut w = weigher(1000);
    let mu2 = build_mu(3, Propagator::SphereVol(3), 2, &mut w).unwrap();
    let spec = AlgebraSpec::poisson_schouten(3, 2);
    let f = poly(&spec, &[(1, vec![0, 3]), (2, vec![1, 2])]);
    let g = poly(&spec, &[(1, vec![0, 1, 2, 3]), (-1, vec![0])]);
    for ca in f.homogeneous_components().values() {
        for cb in g.homogeneous_components().values() {
            assert_eq!(
                mu2.apply(&[ca.clone(), cb.clone()]).unwrap(),
                schouten_bracket(ca, cb).unwrap()
            );
        }
    }
    // 3·3 − 2 = 7 is odd, so no graph has the top degree.
    assert!(build_mu(3, Propagator::SphereVol(3), 3, &mut w)
        .unwrap()
        .is_zero());
    assert!(matches!(
        build_mu(2, Propagator::SphereVol(2), 1, &mut w),
        Err(QuantizeError::Arity(1))
    ));
    assert!(build_mu(3, Propagator::SphereVol(2), 2, &mut w).is_err());
}

#[test]
fn star_order_zero_is_the_product() {
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(&spec, &[(q(1), &["x1", "psi1", "psi2"])]).unwrap();
    let star = star_product(&gamma, Propagator::Kontsevich, 0, &mut weigher(1000)).unwrap();
    for f in x_monomials(&spec, 2) {
        for g in x_monomials(&spec, 2) {
            assert_eq!(star.apply(&f, &g).unwrap(), f.try_mul(&g).unwrap());
            assert!(associativity_residual(&star, &f, &g, &f)
                .unwrap()
                .iter()
                .all(GradedPoly::is_zero));
        }
    }
}

/// γ^{ij} = ∂_{ψ_i} ∂_{ψ_j} γ as a constant.
fn gamma_matrix(gamma: &GradedPoly) -> Vec<Vec<Q>> {
    let spec = &gamma.spec;
    let n = spec.dim_v;
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let pi = spec.position(GenKind::Psi, i).unwrap();
                    let pj = spec.position(GenKind::Psi, j).unwrap();
                    let c = gamma.left_derivative(pj).left_derivative(pi);
                    c.terms
                        .get(&Mono::one(spec.n_gens()))
                        .cloned()
                        .unwrap_or_else(|| q(0))
                })
                .collect()
        })
        .collect()
}

fn dx(f: &GradedPoly, a: usize) -> GradedPoly {
    f.left_derivative(f.spec.position(GenKind::X, a).unwrap())
}

/// Σ ħ^n/n! κ^n θ^{i1j1}…θ^{injn} ∂_{i1…in} f ∂_{j1…jn} g for constant θ.
fn moyal(theta: &[Vec<Q>], kappa: &Q, f: &GradedPoly, g: &GradedPoly, order: u32) -> GradedPoly {
    let spec = f.spec.clone();
    let dim = theta.len();
    let mut out = GradedPoly::zero(&spec);
    let mut pairs: Vec<(Q, GradedPoly, GradedPoly)> = vec![(q(1), f.clone(), g.clone())];
    let mut fact = q(1);
    for n in 0..=order {
        if n > 0 {
            fact *= q(n as i64);
            let mut next = Vec::new();
            for (c, a, b) in &pairs {
                for i in 0..dim {
                    for j in 0..dim {
                        if theta[i][j] != q(0) {
                            next.push((c * &theta[i][j], dx(a, i + 1), dx(b, j + 1)));
                        }
                    }
                }
            }
            pairs = next;
        }
        let mut slice = GradedPoly::zero(&spec);
        for (c, a, b) in &pairs {
            slice = &slice + &a.try_mul(b).unwrap().scale(c);
        }
        let k = num_traits::pow(kappa.clone(), n as usize) / &fact;
        out = &out + &(&slice.scale(&k) * &GradedPoly::hbar_power(&spec, n));
    }
    out
}

#[test]
fn constant_gamma_star_is_moyal() {
    let star = moyal_star();
    assert!(star.is_exact());
    assert_eq!(star.slices[1].terms[0].coeff, qr(1, 2));
    let theta = gamma_matrix(&star.gamma);
    let mons = x_monomials(&star.gamma.spec, 3);
    for f in &mons {
        for g in &mons {
            assert_eq!(
                star.apply(f, g).unwrap(),
                moyal(&theta, &qr(1, 2), f, g, 2),
                "{f} ⋆ {g}"
            );
        }
    }
}

#[test]
fn constant_gamma_star_is_associative() {
    let star = moyal_star();
    let mons = x_monomials(&star.gamma.spec, 3);
    for f in &mons {
        for g in &mons {
            for h in &mons {
                let r = associativity_residual(star, f, g, h).unwrap();
                assert!(r.iter().all(GradedPoly::is_zero), "{f}, {g}, {h}");
            }
        }
    }
    let spec = &star.gamma.spec;
    let (x1, x2) = (GradedPoly::x(spec, 1), GradedPoly::x(spec, 2));
    assert!(associativity_residual(star, &x1, &x2, &(&x1 * &x2))
        .unwrap()
        .iter()
        .all(GradedPoly::is_zero));
}

#[test]
fn commutator_is_twice_the_wedge_weight() {
    let star = moyal_star();
    let wedge = star.slices[1].terms[0].coeff.clone();
    let theta = gamma_matrix(&star.gamma);
    let mons = x_monomials(&star.gamma.spec, 3);
    for f in &mons {
        for g in &mons {
            let comm = &star.apply(f, g).unwrap() - &star.apply(g, f).unwrap();
            let mut expect = GradedPoly::zero(&star.gamma.spec);
            for (i, row) in theta.iter().enumerate() {
                for (j, t) in row.iter().enumerate() {
                    expect = &expect + &dx(f, i + 1).try_mul(&dx(g, j + 1)).unwrap().scale(t);
                }
            }
            assert_eq!(comm.hbar_slice(1), expect.scale(&(q(2) * &wedge)));
        }
    }
}

#[test]
fn linear_gamma_first_order_and_grading() {
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(&spec, &[(q(1), &["x1", "psi1", "psi2"])]).unwrap();
    let star = star_product(&gamma, Propagator::Kontsevich, 2, &mut weigher(200_000)).unwrap();
    for (n, s) in star.slices.iter().enumerate() {
        for t in &s.terms {
            assert_eq!(t.graph.n_aerial(), n);
            assert_eq!(t.graph.edges.len(), 2 * n);
        }
    }
    let mons = x_monomials(&spec, 2);
    for f in &mons {
        for g in &mons {
            for h in &mons {
                assert!(associativity_residual(&star, f, g, h).unwrap()[1].is_zero());
            }
        }
    }
}

#[test]
fn linear_gamma_second_order_with_larger_denominators() {
    // The second-order Kontsevich weights include ±1/24.
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(
        &spec,
        &[
            (q(1), &["x1", "psi1", "psi2"]),
            (q(2), &["x2", "psi1", "psi2"]),
        ],
    )
    .unwrap();
    let mut w = Weigher::new(
        WeightOptions {
            samples: 1_000_000,
            seed: 9,
            exec: Exec::default(),
        },
        24,
    );
    let star = star_product(&gamma, Propagator::Kontsevich, 2, &mut w).unwrap();
    assert!(star.is_exact(), "{:?}", star.warnings());
    assert!(star.slices[2]
        .terms
        .iter()
        .any(|t| t.coeff == qr(-1, 24) || t.coeff == qr(1, 24)));
    let mons = x_monomials(&spec, 2);
    for f in &mons {
        for g in &mons {
            for h in &mons {
                let r = associativity_residual(&star, f, g, h).unwrap();
                assert!(r.iter().all(GradedPoly::is_zero), "{f}, {g}, {h}: {r:?}");
            }
        }
    }
}

#[test]
fn twisting_examples() {
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(&spec, &[(q(1), &["x1", "psi1", "psi2"])]).unwrap();
    let mut w = weigher(100_000);
    // Curvature: the edgeless one-vertex graph, weight 1.
    let mu0 = ocha_twist(&gamma, Propagator::Angle, 0, 2, &mut w).unwrap();
    assert!(mu0.is_exact());
    let curv = mu0.apply(&[]).unwrap();
    assert_eq!(curv, &gamma * &GradedPoly::hbar_power(&spec, 1));
    let mu1 = ocha_twist(&gamma, Propagator::Angle, 1, 2, &mut w).unwrap();
    assert!(mu1.apply(&[curv]).unwrap().is_zero());
    // Parity: the n = 2 slice of μ_1 has no surviving weights.
    assert!(mu1.slices[2].is_zero());

    // γ = 0 leaves the untwisted operations: the product for m = 2, zero otherwise.
    let zero = GradedPoly::zero(&spec);
    let f = poly(&spec, &[(1, vec![0, 2]), (2, vec![1])]);
    let g = poly(&spec, &[(1, vec![3]), (1, vec![0, 0])]);
    let p = ocha_twist(&zero, Propagator::Angle, 2, 2, &mut w).unwrap();
    assert_eq!(
        p.apply(&[f.clone(), g.clone()]).unwrap(),
        f.try_mul(&g).unwrap()
    );
    for m in [0, 1, 3] {
        let op = ocha_twist(&zero, Propagator::Angle, m, 2, &mut w).unwrap();
        let inputs = vec![f.clone(); m];
        assert!(op.apply(&inputs).unwrap().is_zero());
    }
}

#[test]
fn twisting_rejects_non_maurer_cartan() {
    let spec = AlgebraSpec::poisson_schouten(2, 3);
    let gamma = poly_from_terms(
        &spec,
        &[
            (q(1), &["x1", "psi2", "psi3"]),
            (q(1), &["x2", "psi1", "psi2"]),
        ],
    )
    .unwrap();
    assert!(!mc_residual(&gamma, None).unwrap().is_zero());
    assert!(matches!(
        ocha_twist(&gamma, Propagator::Angle, 1, 1, &mut weigher(10)),
        Err(QuantizeError::NotMaurerCartan(_))
    ));
}

#[test]
fn coefficients_trace_to_cached_estimates() {
    let dir = std::env::temp_dir().join(format!("opk-quantize-audit-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(&spec, &[(q(1), &["x1", "psi1", "psi2"])]).unwrap();
    let mut w = weigher(20_000).with_cache(Some(&dir)).unwrap();
    let star = star_product(&gamma, Propagator::Kontsevich, 2, &mut w).unwrap();
    let cache = WeightCache::open(Some(&dir)).unwrap();
    for s in &star.slices {
        for t in &s.terms {
            let (sorted, _) =
                FeynmanGraph::normalize(&opk::weights::relabel_canonical(&t.graph).unwrap().0)
                    .unwrap();
            assert_eq!(t.source.graph, sorted.canonical_hash());
            let cached = cache.get(&t.source).expect("estimate cached");
            assert_eq!(cached.mean * f64::from(t.sign), t.estimate.mean);
            assert_eq!((t.source.seed, t.source.samples), (42, 20_000));
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

fn poly_strategy(n_gens: usize) -> impl Strategy<Value = Vec<(i64, Vec<usize>)>> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0..n_gens, 0..=3)), 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mu2_satisfies_the_shifted_jacobi_identity(a in poly_strategy(4), b in poly_strategy(4), c in poly_strategy(4)) {
        let spec = AlgebraSpec::poisson_schouten(2, 2);
        let (mu2, _) = mu_d2();
        let pick = |t: &[(i64, Vec<usize>)]| {
            let p = poly(&spec, t);
            p.homogeneous_components().into_values().next().unwrap_or(p)
        };
        let (f, g, h) = (pick(&a), pick(&b), pick(&c));
        let m = |x: &GradedPoly, y: &GradedPoly| mu2.apply(&[x.clone(), y.clone()]).unwrap();
        // μ_2 is graded symmetric of degree −1; the quadratic relation is the
        // sum over (2,1)-unshuffles with Koszul signs.
        let dg = |x: &GradedPoly| x.degree().unwrap_or(0);
        let sign = |e: i32| if e.rem_euclid(2) == 0 { q(1) } else { q(-1) };
        prop_assert_eq!(m(&f, &g), m(&g, &f).scale(&sign(dg(&f) * dg(&g))));
        let t1 = m(&m(&f, &g), &h);
        let t2 = m(&m(&f, &h), &g).scale(&sign(dg(&g) * dg(&h)));
        let t3 = m(&m(&g, &h), &f).scale(&sign(dg(&f) * (dg(&g) + dg(&h))));
        prop_assert!((&(&t1 + &t2) + &t3).is_zero());
    }
}

#[test]
fn weigher_memoizes_relabelled_graphs() {
    let mut w = weigher(5000);
    let spec = AlgebraSpec::poisson_schouten(2, 2);
    let gamma = poly_from_terms(&spec, &[(q(1), &["x1", "psi1", "psi2"])]).unwrap();
    let star = star_product(&gamma, Propagator::Kontsevich, 2, &mut w).unwrap();
    let keys: std::collections::BTreeSet<String> = star.slices[2]
        .terms
        .iter()
        .map(|t| t.source.graph.clone())
        .collect();
    assert!(keys.len() < star.slices[2].terms.len());
}
