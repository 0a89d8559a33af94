use std::sync::Arc;

use num_traits::Zero;
use opk::graph_core::{permutation_sign, ArrowMode, FeynmanGraph};
use opk::rational::{q, qr, Q};
use opk::schouten::*;
use proptest::prelude::*;

fn x(s: &Arc<AlgebraSpec>, a: usize) -> GradedPoly {
    GradedPoly::x(s, a)
}
fn psi(s: &Arc<AlgebraSpec>, a: usize) -> GradedPoly {
    GradedPoly::psi(s, a)
}
fn c(s: &Arc<AlgebraSpec>, v: i64) -> GradedPoly {
    GradedPoly::constant(s, q(v))
}

/// Builds Σ coeff · ∏ generators, multiplied left to right.
fn poly(spec: &Arc<AlgebraSpec>, terms: &[(i64, Vec<usize>)]) -> GradedPoly {
    let mut p = GradedPoly::zero(spec);
    for (k, gens) in terms {
        let mut m = c(spec, *k);
        for &g in gens {
            m = &m * &GradedPoly::generator(spec, g);
        }
        p = &p + &m;
    }
    p
}

fn largest_component(p: &GradedPoly) -> GradedPoly {
    p.homogeneous_components()
        .into_values()
        .max_by_key(GradedPoly::len)
        .unwrap_or_else(|| p.clone())
}

fn deg(p: &GradedPoly) -> i32 {
    p.degree().unwrap_or(0)
}

fn jacobi_residual(
    b: impl Fn(&GradedPoly, &GradedPoly) -> GradedPoly,
    d: u32,
    f: &GradedPoly,
    g: &GradedPoly,
    h: &GradedPoly,
) -> GradedPoly {
    let k = d as i32 - 1;
    let lhs = b(f, &b(g, h));
    let r1 = b(&b(f, g), h);
    let r2 = b(g, &b(f, h));
    let rhs = if ((deg(f) + k) * (deg(g) + k)).rem_euclid(2) == 0 {
        &r1 + &r2
    } else {
        &r1 - &r2
    };
    &lhs - &rhs
}

#[test]
fn multiplication_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    assert!((&psi(&s, 1) * &psi(&s, 1)).is_zero());
    let a = &psi(&s, 1) * &psi(&s, 2);
    let b = &psi(&s, 2) * &psi(&s, 1);
    assert_eq!(a, -&b);
    let xx = &x(&s, 1) * &x(&s, 1);
    assert_eq!(xx.len(), 1);
    assert_eq!(xx.terms.keys().next().unwrap().exps, vec![2, 0, 0, 0]);
    let other = AlgebraSpec::poisson_schouten(3, 2);
    assert_eq!(
        x(&s, 1).try_mul(&x(&other, 1)),
        Err(SchoutenError::SpecMismatch)
    );
}

#[test]
fn derivative_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    let x1 = s.position(GenKind::X, 1).unwrap();
    let p2 = s.position(GenKind::Psi, 2).unwrap();
    assert_eq!(
        (&x(&s, 1) * &x(&s, 1)).left_derivative(x1),
        x(&s, 1).scale(&q(2))
    );
    let pp = &psi(&s, 1) * &psi(&s, 2);
    assert_eq!(pp.left_derivative(p2), -&psi(&s, 1));
    assert_eq!(pp.right_derivative(p2), psi(&s, 1));
    assert!(psi(&s, 1).left_derivative(x1).is_zero());
    assert!(matches!(
        s.position_by_name("z1"),
        Err(SchoutenError::UnknownGenerator(_))
    ));
}

#[test]
fn bracket_examples_d2() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    for a in 1..=2 {
        for b in 1..=2 {
            let v = schouten_bracket(&psi(&s, a), &x(&s, b)).unwrap();
            assert_eq!(v, c(&s, i64::from(a == b)));
            assert!(schouten_bracket(&x(&s, a), &x(&s, b)).unwrap().is_zero());
        }
    }
    let gamma = &psi(&s, 1) * &psi(&s, 2);
    assert!(schouten_bracket(&gamma, &gamma).unwrap().is_zero());
}

#[test]
fn bracket_matches_one_edge_graphs() {
    for d in [2u32, 3] {
        let s = AlgebraSpec::poisson_schouten(d, 2);
        let e12 = FeynmanGraph::aerial(d, 2, &[(1, 2)]);
        let e21 = FeynmanGraph::aerial(d, 2, &[(2, 1)]);
        let samples = [
            poly(&s, &[(2, vec![0, 0, 2]), (-1, vec![1, 3])]),
            poly(&s, &[(1, vec![2, 3]), (3, vec![0, 2, 3])]),
            poly(&s, &[(1, vec![0, 1]), (-2, vec![1])]),
            poly(&s, &[(1, vec![3, 1, 1])]),
        ];
        for f in &samples {
            for g in &samples {
                for fh in f.homogeneous_components().values() {
                    let b = schouten_bracket(fh, g).unwrap();
                    let p12 = phi_graph(&e12, &[fh.clone(), g.clone()]).unwrap();
                    let p21 = phi_graph(&e21, &[fh.clone(), g.clone()]).unwrap();
                    let expected = if d == 2 {
                        (&p12 + &p21).scale(&q(if (deg(fh) + 1) % 2 == 0 { 1 } else { -1 }))
                    } else {
                        &p21 - &p12
                    };
                    assert_eq!(b, expected, "d={d} f={fh} g={g}");
                }
            }
        }
    }
}

#[test]
fn phi_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 1);
    let edgeless = FeynmanGraph::aerial(2, 2, &[]);
    let f = &x(&s, 1) + &psi(&s, 1);
    let g = &x(&s, 1) * &x(&s, 1);
    assert_eq!(
        phi_graph(&edgeless, &[f.clone(), g.clone()]).unwrap(),
        &f * &g
    );
    let e = FeynmanGraph::aerial(2, 2, &[(1, 2)]);
    assert_eq!(phi_graph(&e, &[psi(&s, 1), x(&s, 1)]).unwrap(), c(&s, 1));
    assert_eq!(
        phi_graph(&e, &[psi(&s, 1), g.clone()]).unwrap(),
        x(&s, 1).scale(&q(2))
    );
    assert!(phi_graph(&e, &[x(&s, 1), x(&s, 1)]).unwrap().is_zero());
    assert_eq!(
        phi_graph(&e, &[x(&s, 1)]),
        Err(SchoutenError::Arity {
            expected: 2,
            got: 1
        })
    );
}

#[test]
fn coloured_phi_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    let lone = FeynmanGraph::mixed(2, 0, 1, ArrowMode::Down, &[]);
    let f = poly(&s, &[(3, vec![0, 1]), (1, vec![0])]);
    assert_eq!(
        phi_graph_coloured(&lone, &[], std::slice::from_ref(&f), Projection::Down).unwrap(),
        f
    );

    // γ = 5 ψ_1ψ_2, i.e. γ^{12} = 5 = −γ^{21}; f = (x^1)²x^2, g = x^1 (x^2)³.
    // ∂_1f = 2x^1x^2, ∂_2f = (x^1)², ∂_1g = (x^2)³, ∂_2g = 3x^1(x^2)²;
    // −Σ γ^{ab}∂_af∂_bg = −5(6(x^1)²(x^2)³ − (x^1)²(x^2)³) = −25 (x^1)²(x^2)³.
    let gamma = (&psi(&s, 1) * &psi(&s, 2)).scale(&q(5));
    let f = poly(&s, &[(1, vec![0, 0, 1])]);
    let g = poly(&s, &[(1, vec![0, 1, 1, 1])]);
    let wedge = FeynmanGraph::mixed(2, 1, 2, ArrowMode::Down, &[(1, 2), (1, 3)]);
    let v = phi_graph_coloured(
        &wedge,
        std::slice::from_ref(&gamma),
        &[f.clone(), g.clone()],
        Projection::Down,
    )
    .unwrap();
    assert_eq!(v, poly(&s, &[(-25, vec![0, 0, 1, 1, 1])]));

    assert!(FeynmanGraph::mixed(2, 1, 2, ArrowMode::Down, &[(2, 3)])
        .validate()
        .is_err());
    let ground_edge = FeynmanGraph::mixed(2, 1, 2, ArrowMode::Free, &[(2, 3)]);
    assert!(phi_graph_coloured(
        &ground_edge,
        std::slice::from_ref(&gamma),
        &[f.clone(), g.clone()],
        Projection::Down
    )
    .unwrap()
    .is_zero());

    assert_eq!(
        phi_graph_coloured(
            &wedge,
            std::slice::from_ref(&gamma),
            &[psi(&s, 1), g.clone()],
            Projection::Down
        ),
        Err(SchoutenError::Subalgebra(1))
    );
    let up = FeynmanGraph::mixed(2, 1, 2, ArrowMode::Up, &[(2, 1)]);
    assert_eq!(
        phi_graph_coloured(
            &up,
            std::slice::from_ref(&gamma),
            &[psi(&s, 1), psi(&s, 2)],
            Projection::Up
        )
        .unwrap(),
        GradedPoly::zero(&s)
    );
    assert!(phi_graph_coloured(&up, &[gamma], &[x(&s, 1), psi(&s, 2)], Projection::Up).is_err());
}

#[test]
fn representation_examples() {
    for d in [2u32, 3] {
        let s = AlgebraSpec::poisson_schouten(d, 2);
        let inputs = [
            poly(&s, &[(1, vec![0, 2]), (2, vec![1])]),
            poly(&s, &[(3, vec![0, 1]), (-1, vec![3])]),
            poly(&s, &[(1, vec![2, 3]), (1, vec![0, 0])]),
        ];
        let v = |n| FeynmanGraph::aerial(d, n, &[]);
        let g0 = FeynmanGraph::aerial(d, 3, &[(1, 2), (3, 1)]);
        let r = representation_check(
            &g0,
            &[v(1), v(1), v(1)],
            &[vec![1], vec![2], vec![3]],
            &inputs,
        )
        .unwrap();
        assert!(r.is_zero());
        let two_cycle = FeynmanGraph::aerial(d, 2, &[(1, 2), (2, 1)]);
        let edge = FeynmanGraph::aerial(d, 2, &[(1, 2)]);
        for partition in [
            vec![vec![1, 3], vec![2]],
            vec![vec![2, 3], vec![1]],
            vec![vec![1, 2], vec![3]],
        ] {
            let r = representation_check(&two_cycle, &[edge.clone(), v(1)], &partition, &inputs)
                .unwrap();
            assert!(r.is_zero(), "d={d} {partition:?}: {r}");
            let r = representation_check(&edge, &[v(2), v(1)], &partition, &inputs).unwrap();
            assert!(r.is_zero(), "d={d} {partition:?}: {r}");
        }
    }
}

#[test]
fn mc_residual_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    assert!(mc_residual(&GradedPoly::zero(&s), None).unwrap().is_zero());
    let bivector = poly(&s, &[(1, vec![0, 0, 1, 2, 3]), (-2, vec![1, 2, 3])]);
    assert!(mc_residual(&bivector, None).unwrap().is_zero());
    assert_eq!(
        mc_residual(&x(&s, 1), None),
        Err(SchoutenError::WrongDegree {
            expected: 2,
            got: 0
        })
    );

    // {γ • γ} = 2 Σ_a (γ←∂ψ_a)(∂_a γ) = 2(−x^2ψ_3)(x^3ψ_1ψ_2) = −2 x^2x^3 ψ_1ψ_2ψ_3.
    let s3 = AlgebraSpec::poisson_schouten(2, 3);
    let gamma = poly(&s3, &[(1, vec![1, 3, 5]), (1, vec![0, 2, 3, 4])]);
    let r = mc_residual(&gamma, None).unwrap();
    assert_eq!(r, poly(&s3, &[(-2, vec![1, 2, 3, 4, 5])]));
}

#[test]
fn bernoulli_table() {
    let b = bernoulli_numbers(8);
    assert_eq!(b[1], qr(-1, 2));
    assert_eq!(b[2], qr(1, 6));
    assert_eq!(b[3], Q::zero());
    assert_eq!(b[4], qr(-1, 30));
    assert_eq!(b[6], qr(1, 42));
    assert_eq!(b[8], qr(-1, 30));
}

#[test]
fn hat_c_examples() {
    let s = AlgebraSpec::poisson_schouten(2, 2);
    let zero = StructureConstants::zero(2);
    let hat = hat_c(&zero, &s, 4).unwrap();
    for (i, row) in hat.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert_eq!(*e, c(&s, i64::from(i == j)));
        }
    }
    let sol = StructureConstants::solvable_2d();
    let hat = hat_c(&sol, &s, 4).unwrap();
    assert!(hat_c_residual(&sol, &hat, 3).unwrap().is_empty());
    // A = [[0, x^2], [0, −x^1]], so (A^k)_1^2 = x^2(−x^1)^{k−1} and
    // (A^k)_2^2 = (−x^1)^k: Ĉ_1^2 = −x^2/2 − x^1x^2/12 + (x^1)³x^2/720.
    let x1x2 = &x(&s, 1) * &x(&s, 2);
    let x1_3x2 = &(&x1x2 * &x(&s, 1)) * &x(&s, 1);
    let expected =
        &(&x(&s, 2).scale(&qr(-1, 2)) - &x1x2.scale(&qr(1, 12))) + &x1_3x2.scale(&qr(1, 720));
    assert_eq!(hat[0][1], expected);
    assert_eq!(hat[0][0], c(&s, 1));
    assert!(hat[1][0].is_zero());
    let x1_2 = &x(&s, 1) * &x(&s, 1);
    let expected = &(&(&c(&s, 1) + &x(&s, 1).scale(&qr(1, 2))) + &x1_2.scale(&qr(1, 12)))
        - &(&x1_2 * &x1_2).scale(&qr(1, 720));
    assert_eq!(hat[1][1], expected);
    // Without the Bernoulli weights the identity fails already in degree 0.
    let mut wrong = hat.clone();
    wrong[0][1] = x(&s, 2).scale(&qr(1, 2));
    assert!(!hat_c_residual(&sol, &wrong, 3).unwrap().is_empty());

    for cc in [StructureConstants::so3(), StructureConstants::heisenberg()] {
        let s3 = AlgebraSpec::poisson_schouten(2, 3);
        let hat = hat_c(&cc, &s3, 6).unwrap();
        assert!(hat_c_residual(&cc, &hat, 5).unwrap().is_empty());
    }
    let mut bad = StructureConstants::zero(2);
    bad.set_raw(1, 1, 2, q(1));
    assert_eq!(
        hat_c(&bad, &s, 3).map(|_| ()),
        Err(SchoutenError::NotAntisymmetric(1, 2, 1))
    );
}

#[test]
fn gamma_delta_examples() {
    assert!(gamma_delta(&StructureConstants::zero(2), 4)
        .unwrap()
        .is_zero());
    for (cc, n) in [
        (StructureConstants::solvable_2d(), 6),
        (StructureConstants::so3(), 6),
        (StructureConstants::heisenberg(), 6),
    ] {
        let g = gamma_delta(&cc, n).unwrap();
        assert_eq!(g.degree(), Some(3));
        let r = mc_residual(&g, None)
            .unwrap()
            .truncate_kind_degree(GenKind::X, n as u32 - 1);
        assert!(r.is_zero(), "{r}");
    }
}

#[test]
fn co_jacobi_detection() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0;
    for _ in 0..40 {
        let mut cc = StructureConstants::zero(3);
        for d in 1..=3 {
            for (a, b) in [(1, 2), (1, 3), (2, 3)] {
                if rng.gen_bool(0.3) {
                    cc.set(d, a, b, q(rng.gen_range(-2..=2)));
                }
            }
        }
        let mut violation = None;
        'outer: for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    for d in 0..3 {
                        let s: Q = (0..3)
                            .map(|x| {
                                cc.get(d, a, x) * cc.get(x, b, g)
                                    + cc.get(d, g, x) * cc.get(x, a, b)
                                    + cc.get(d, b, x) * cc.get(x, g, a)
                            })
                            .sum();
                        if !s.is_zero() {
                            violation = Some((a + 1, b + 1, g + 1, d + 1));
                            break 'outer;
                        }
                    }
                }
            }
        }
        match violation {
            Some((a, b, g, d)) => {
                failures += 1;
                assert_eq!(
                    gamma_delta(&cc, 3),
                    Err(SchoutenError::CoJacobi(a, b, g, d))
                );
            }
            None => assert!(gamma_delta(&cc, 3).is_ok()),
        }
    }
    assert!(failures > 0);
}

#[test]
fn deformed_bracket_examples() {
    let cc = StructureConstants::solvable_2d();
    let br = deformed_bracket(&cc, 4).unwrap();
    let s = br.spec.clone();
    let standard = AlgebraSpec::poisson_schouten(2, 2);
    let samples = [
        poly(&s, &[(1, vec![0, 1, 2]), (2, vec![3])]),
        poly(&s, &[(1, vec![0, 0]), (-1, vec![1, 2, 3])]),
        poly(&s, &[(3, vec![1, 3]), (1, vec![2])]),
    ];
    for f in &samples {
        for g in &samples {
            let h0 = br.apply(f, g).unwrap().hbar_slice(0);
            assert_eq!(h0, schouten_bracket(f, g).unwrap());
            assert_eq!(h0.spec, standard);
        }
    }
    // {ψ_1 • ψ_2} = ħ C^γ_{12} ψ_γ = ħψ_2.
    let v = br.apply(&psi(&s, 1), &psi(&s, 2)).unwrap();
    assert_eq!(v.hbar_slice(1), psi(&s, 2));
    assert_eq!(v.max_hbar(), 1);
    // {ψ_1 • x^2} = Ĉ_1^2(ħx) = −ħx^2/2 − ħ²x^1x^2/12 + …
    let v = br.apply(&psi(&s, 1), &x(&s, 2)).unwrap();
    assert_eq!(v.hbar_slice(0), GradedPoly::zero(&s));
    assert_eq!(v.hbar_slice(1), x(&s, 2).scale(&qr(-1, 2)));
    assert_eq!(v.hbar_slice(2), (&x(&s, 1) * &x(&s, 2)).scale(&qr(-1, 12)));
    assert_eq!(
        br.apply(&psi(&s, 2), &x(&s, 2)).unwrap().hbar_slice(0),
        c(&s, 1)
    );
    assert!(br.apply(&x(&s, 1), &x(&s, 2)).unwrap().is_zero());
}

#[test]
fn deformed_bracket_axioms_through_hbar4() {
    for cc in [StructureConstants::solvable_2d(), StructureConstants::so3()] {
        let br = deformed_bracket(&cc, 4).unwrap();
        let s = br.spec.clone();
        let n = s.n_gens();
        let b = |f: &GradedPoly, g: &GradedPoly| br.apply(f, g).unwrap();
        let samples: Vec<GradedPoly> = vec![
            poly(&s, &[(1, vec![0, 1]), (2, vec![1, 1])]),
            poly(&s, &[(1, vec![n - 1]), (-1, vec![0, n - 2])]),
            poly(&s, &[(1, vec![0, n - 1, n - 2])]),
            poly(&s, &[(2, vec![1, n - 1]), (1, vec![0, 0, n - 1])]),
        ];
        for f in &samples {
            for g in &samples {
                let sign = bracket_symmetry_sign(2, deg(f), deg(g));
                assert_eq!(b(f, g), b(g, f).scale(&q(sign)));
                for h in &samples {
                    assert!(jacobi_residual(b, 2, f, g, h).is_zero());
                    let lhs = b(f, &(g * h));
                    let koszul = if ((deg(f) + 1) * deg(g)).rem_euclid(2) == 0 {
                        1
                    } else {
                        -1
                    };
                    let rhs =
                        (&(&b(f, g) * h) + &(g * &b(f, h)).scale(&q(koszul))).truncate_hbar(4);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn json_round_trips() {
    let s = AlgebraSpec::bialgebra(2);
    let p = &poly(&s, &[(3, vec![0, 0, 2, 7]), (-1, vec![4, 5])]) * &GradedPoly::hbar_power(&s, 2);
    let p = p.scale(&qr(-1, 2));
    let back = GradedPoly::from_json(&s, &p.to_json()).unwrap();
    assert_eq!(back, p);
    let sp = AlgebraSpec::from_json(&s.to_json()).unwrap();
    assert_eq!(*sp, *s);
    let literal: serde_json::Value =
        serde_json::from_str(r#"[{"hbar":0,"coeff":"−1/2","mono":{"x1":2,"psi2":1}}]"#).unwrap();
    let g2 = AlgebraSpec::poisson_schouten(2, 2);
    let v = GradedPoly::from_json(&g2, &literal).unwrap();
    assert_eq!(v, poly(&g2, &[(1, vec![0, 0, 3])]).scale(&qr(-1, 2)));
    let cc = StructureConstants::so3();
    assert_eq!(StructureConstants::from_json(&cc.to_json()).unwrap(), cc);
}

fn poly_strategy(
    n_gens: usize,
    max_terms: usize,
    max_len: usize,
) -> impl Strategy<Value = Vec<(i64, Vec<usize>)>> {
    prop::collection::vec(
        (-3i64..=3, prop::collection::vec(0..n_gens, 0..=max_len)),
        1..=max_terms,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_symmetry_and_jacobi(
        d in 2u32..=3,
        a in poly_strategy(4, 3, 2),
        b in poly_strategy(4, 3, 2),
        c3 in poly_strategy(4, 2, 2),
    ) {
        let s = AlgebraSpec::poisson_schouten(d, 2);
        let (f, g, h) = (poly(&s, &a), poly(&s, &b), poly(&s, &c3));
        let (f, g, h) = (largest_component(&f), largest_component(&g), largest_component(&h));
        let fg = schouten_bracket(&f, &g).unwrap();
        let gf = schouten_bracket(&g, &f).unwrap();
        prop_assert_eq!(fg, gf.scale(&q(bracket_symmetry_sign(d, deg(&f), deg(&g)))));
        let r = jacobi_residual(|u, v| schouten_bracket(u, v).unwrap(), d, &f, &g, &h);
        prop_assert!(r.is_zero());
    }

    #[test]
    fn phi_edge_permutation_covariance(
        d in 2u32..=3,
        edges in prop::collection::vec((1u32..=3, 1u32..=3), 0..=3),
        seed in any::<u64>(),
        a in poly_strategy(4, 2, 2),
        b in poly_strategy(4, 2, 2),
        c3 in poly_strategy(4, 2, 2),
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let edges: Vec<(u32, u32)> = edges.into_iter().filter(|(s, t)| s != t).collect();
        let g = FeynmanGraph::aerial(d, 3, &edges);
        let mut perm: Vec<usize> = (0..edges.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let permuted = FeynmanGraph::aerial(d, 3, &perm.iter().map(|&i| edges[i]).collect::<Vec<_>>());
        let s = AlgebraSpec::poisson_schouten(d, 2);
        let inputs = [poly(&s, &a), poly(&s, &b), poly(&s, &c3)];
        let lhs = phi_graph(&permuted, &inputs).unwrap();
        let sign = if d % 2 == 0 { permutation_sign(&perm) as i64 } else { 1 };
        prop_assert_eq!(lhs, phi_graph(&g, &inputs).unwrap().scale(&q(sign)));
    }

    #[test]
    fn standard_bracket_is_biderivation(
        d in 2u32..=3,
        a in poly_strategy(4, 2, 2),
        b in poly_strategy(4, 2, 2),
        c3 in poly_strategy(4, 2, 2),
    ) {
        let s = AlgebraSpec::poisson_schouten(d, 2);
        let (f, g, h) = (largest_component(&poly(&s, &a)), largest_component(&poly(&s, &b)), poly(&s, &c3));
        let lhs = schouten_bracket(&f, &(&g * &h)).unwrap();
        let k = d as i32 - 1;
        let sign = if ((deg(&f) + k) * deg(&g)).rem_euclid(2) == 0 { 1 } else { -1 };
        let rhs = &(&schouten_bracket(&f, &g).unwrap() * &h) + &(&g * &schouten_bracket(&f, &h).unwrap()).scale(&q(sign));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn polynomial_json_round_trip(a in poly_strategy(8, 4, 3), hb in 0u32..3) {
        let s = AlgebraSpec::bialgebra(2);
        let p = &poly(&s, &a) * &GradedPoly::hbar_power(&s, hb);
        prop_assert_eq!(GradedPoly::from_json(&s, &p.to_json()).unwrap(), p);
    }
}
