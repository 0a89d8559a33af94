use num_traits::Zero;
use opk::chain_operads::*;
use opk::exec::Exec;
use opk::rational::{q, Q};
use proptest::prelude::*;

fn tree(f: Family, s: &str) -> Tree {
    parse_tree(f, s).unwrap()
}

fn sum(f: Family, terms: &[(i64, &str)]) -> TreeSum {
    let mut out = TreeSum::new(f);
    for (c, s) in terms {
        out.add(&tree(f, s), q(*c));
    }
    out
}

#[test]
fn corolla_degrees() {
    let ass2 = Corolla::new(Glyph::Ass, 2, 0);
    assert_eq!(ass2.degree(Family::AssInf), 0);
    assert_eq!(Corolla::new(Glyph::Lie, 3, 0).degree(Family::LieInf(2)), -3);
    assert_eq!(Corolla::new(Glyph::Tri, 1, 1).degree(Family::Ocha(2)), -1);
    assert_eq!(
        Corolla::new(Glyph::LBlack, 3, 0).degree(Family::MorLieInf),
        -4
    );
    assert_eq!(Corolla::new(Glyph::Diamond, 1, 2).dim(Family::MorOcha), 3);
}

#[test]
fn corolla_below_arity_minimum_is_rejected() {
    assert!(matches!(
        Tree::corolla(Family::AssInf, Corolla::new(Glyph::Ass, 1, 0)),
        Err(OperadError::Arity { .. })
    ));
    assert!(Tree::corolla(Family::LieInf(2), Corolla::new(Glyph::Lie, 1, 0)).is_err());
    assert!(Tree::corolla(Family::Ocha(2), Corolla::new(Glyph::Tri, 0, 1)).is_err());
    assert!(Tree::corolla(Family::MorOcha, Corolla::new(Glyph::Diamond, 0, 1)).is_ok());
    assert!(Tree::corolla(Family::MorAssInf, Corolla::new(Glyph::ABlack, 1, 0)).is_ok());
    assert!(matches!(
        Tree::corolla(Family::AssInf, Corolla::new(Glyph::Lie, 2, 0)),
        Err(OperadError::WrongFamily(..))
    ));
}

#[test]
fn ass3_differential() {
    let f = Family::AssInf;
    let d = generator_differential(f, Corolla::new(Glyph::Ass, 3, 0)).unwrap();
    let want = sum(
        f,
        &[
            (-1, "(ass2 (ass2 (leaf 1) (leaf 2)) (leaf 3))"),
            (1, "(ass2 (leaf 1) (ass2 (leaf 2) (leaf 3)))"),
        ],
    );
    assert_eq!(d, want);
}

#[test]
fn black2_differential() {
    let f = Family::MorAssInf;
    let d = generator_differential(f, Corolla::new(Glyph::ABlack, 2, 0)).unwrap();
    let want = sum(
        f,
        &[
            (-1, "(b1 (w2 (leaf 1) (leaf 2)))"),
            (1, "(dw2 (b1 (leaf 1)) (b1 (leaf 2)))"),
        ],
    );
    assert_eq!(d, want);
}

#[test]
fn black3_differential() {
    let f = Family::MorAssInf;
    let d = generator_differential(f, Corolla::new(Glyph::ABlack, 3, 0)).unwrap();
    let want = sum(
        f,
        &[
            (-1, "(b1 (w3 (leaf 1) (leaf 2) (leaf 3)))"),
            (-1, "(b2 (w2 (leaf 1) (leaf 2)) (leaf 3))"),
            (1, "(b2 (leaf 1) (w2 (leaf 2) (leaf 3)))"),
            (1, "(dw3 (b1 (leaf 1)) (b1 (leaf 2)) (b1 (leaf 3)))"),
            (-1, "(dw2 (b2 (leaf 1) (leaf 2)) (b1 (leaf 3)))"),
            (1, "(dw2 (b1 (leaf 1)) (b2 (leaf 2) (leaf 3)))"),
        ],
    );
    assert_eq!(d, want);
    let minus = d.terms.values().filter(|c| **c < Q::zero()).count();
    assert_eq!((d.len(), minus), (6, 3));
}

#[test]
fn black_morocha_n1_m0() {
    let f = Family::MorOcha;
    let d = generator_differential(f, Corolla::new(Glyph::Diamond, 1, 0)).unwrap();
    let want = sum(
        f,
        &[
            (-1, "(dia0.1 (it1.0 (leaf 1)))"),
            (1, "(ot1.0 (b1 (leaf 1)))"),
        ],
    );
    assert_eq!(d, want);
}

#[test]
fn term_counts() {
    for n in 3..=7u32 {
        let expect: u32 = (2..n).map(|l| n - l + 1).sum();
        assert_eq!(
            term_count(Family::AssInf, Corolla::new(Glyph::Ass, n, 0)).unwrap(),
            expect as usize
        );
    }
    assert_eq!(
        term_count(Family::LieInf(2), Corolla::new(Glyph::Lie, 3, 0)).unwrap(),
        3
    );
    assert_eq!(
        term_count(Family::LieInf(2), Corolla::new(Glyph::Lie, 4, 0)).unwrap(),
        10
    );
    assert_eq!(
        term_count(Family::MorLieInf, Corolla::new(Glyph::LBlack, 2, 0)).unwrap(),
        2
    );
    // Every proper subset of size ≥ 2 for n = 5: 2^5 − 1 − 5 − 1.
    assert_eq!(
        term_count(Family::LieInf(2), Corolla::new(Glyph::Lie, 5, 0)).unwrap(),
        25
    );
}

#[test]
fn lie3_terms_are_the_three_pairs() {
    let f = Family::LieInf(2);
    let d = generator_differential(f, Corolla::new(Glyph::Lie, 3, 0)).unwrap();
    let want = sum(
        f,
        &[
            (1, "(lie2 (lie2 (leaf 1) (leaf 2)) (leaf 3))"),
            (1, "(lie2 (lie2 (leaf 1) (leaf 3)) (leaf 2))"),
            (1, "(lie2 (lie2 (leaf 2) (leaf 3)) (leaf 1))"),
        ],
    );
    assert_eq!(d, want);
}

#[test]
fn d_squared_examples() {
    assert!(
        d_squared_generator(Family::AssInf, Corolla::new(Glyph::Ass, 4, 0))
            .unwrap()
            .is_zero()
    );
    assert!(
        d_squared_generator(Family::LieInf(2), Corolla::new(Glyph::Lie, 5, 0))
            .unwrap()
            .is_zero()
    );
    assert!(
        d_squared_generator(Family::Ocha(2), Corolla::new(Glyph::Tri, 2, 2))
            .unwrap()
            .mod2()
            .is_zero()
    );
}

#[test]
fn d_squared_sweeps() {
    let exec = Exec::default();
    for (f, bound) in [
        (Family::AssInf, 6),
        (Family::MorAssInf, 5),
        (Family::LieInf(2), 6),
        (Family::LieInf(3), 6),
    ] {
        let r = d_squared(f, D2Options { bound, exec }).unwrap();
        assert!(r.zero_over_q, "{f}: {:?}", r.rows);
        assert!(r.passes(f));
    }
    for (f, bound) in [
        (Family::Ocha(2), 8),
        (Family::MorLieInf, 5),
        (Family::MorOcha, 6),
    ] {
        let r = d_squared(f, D2Options { bound, exec }).unwrap();
        assert!(r.zero_over_f2, "{f}: {:?}", r.rows);
        assert!(r.zero_over_q, "{f}: {:?}", r.rows);
    }
}

#[test]
fn ocha_in_higher_dimension_is_unsupported() {
    let err = generator_differential(Family::Ocha(3), Corolla::new(Glyph::Tri, 1, 1)).unwrap_err();
    assert!(matches!(err, OperadError::Unsupported(_)));
}

#[test]
fn sweep_is_the_same_sequentially() {
    let a = d_squared(
        Family::MorOcha,
        D2Options {
            bound: 4,
            exec: Exec::Sequential,
        },
    )
    .unwrap();
    let b = d_squared(
        Family::MorOcha,
        D2Options {
            bound: 4,
            exec: Exec::Parallel,
        },
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn differential_lowers_dimension_by_one() {
    for f in [
        Family::AssInf,
        Family::MorAssInf,
        Family::LieInf(2),
        Family::Ocha(2),
        Family::MorLieInf,
        Family::MorOcha,
    ] {
        for g in generators_within(f, 5) {
            let t = Tree::corolla(f, g).unwrap();
            for term in generator_differential(f, g).unwrap().terms.keys() {
                assert_eq!(term.dim(f), t.dim(f) - 1, "{f} {}", g.head(f));
                let grows_by_one =
                    matches!(f, Family::AssInf | Family::LieInf(_) | Family::Ocha(_));
                if grows_by_one {
                    assert_eq!(term.vertex_count(), 2);
                } else {
                    assert!(term.vertex_count() >= 2);
                }
            }
        }
    }
}

#[test]
fn graft_examples() {
    let f = Family::LieInf(2);
    let lie2 = tree(f, "(lie2 (leaf 1) (leaf 2))");
    // An even corolla commutes with anything.
    let ass = Family::AssInf;
    let (_, s) = graft(
        ass,
        &tree(ass, "(ass2 (leaf 1) (leaf 2))"),
        Leaf::Ground(1),
        &tree(ass, "(ass3 (leaf 1) (leaf 2) (leaf 3))"),
    )
    .unwrap();
    assert_eq!(s, 1);
    // Last slot of a corolla: nothing is passed over.
    let (t, s) = graft(
        f,
        &tree(f, "(lie3 (leaf 1) (leaf 2) (leaf 3))"),
        Leaf::Aerial(3),
        &lie2,
    )
    .unwrap();
    assert_eq!(s, 1);
    assert_eq!(
        t,
        tree(f, "(lie3 (leaf 1) (leaf 2) (lie2 (leaf 3) (leaf 4)))")
            .canonical(f)
            .0
    );
    // The new odd vertex lands before an existing odd vertex.
    let outer = tree(f, "(lie2 (lie2 (leaf 2) (leaf 3)) (leaf 1))");
    let (t, s) = graft(f, &outer, Leaf::Aerial(1), &lie2).unwrap();
    assert_eq!(
        t,
        tree(
            f,
            "(lie2 (lie2 (leaf 1) (leaf 2)) (lie2 (leaf 3) (leaf 4)))"
        )
    );
    assert_eq!(s, -1);
}

#[test]
fn graft_colour_mismatch() {
    let f = Family::MorAssInf;
    let white = tree(f, "(w2 (leaf 1) (leaf 2))");
    let dashed = tree(f, "(dw2 (leaf 1) (leaf 2))");
    let err = graft(f, &white, Leaf::Ground(1), &dashed).unwrap_err();
    assert!(matches!(err, OperadError::ColourMismatch { .. }));
    assert!(matches!(
        graft(f, &white, Leaf::Ground(5), &white),
        Err(OperadError::NoSuchSlot(_))
    ));
}

#[test]
fn sexpr_round_trip_and_errors() {
    let f = Family::MorOcha;
    let s = "(ot1.1 (b2 (leaf 1) (leaf 3)) (dia1.2 (leaf 2) (leaf 1) (leaf 2)))";
    let t = tree(f, s);
    assert_eq!(print(&t, f), s);
    assert!(parse_tree(f, "(ot1.1 (b2 (leaf 1) (leaf 3)))").is_err());
    assert!(parse_tree(f, "(foo2 (leaf 1) (leaf 2))").is_err());
    assert!(parse_tree(Family::AssInf, "(ass2 (leaf 1) (leaf 1))").is_err());
    assert!(parse_tree(Family::MorAssInf, "(w2 (dw2 (leaf 1) (leaf 2)) (leaf 3))").is_err());
}

fn print(t: &Tree, f: Family) -> String {
    let mut s = TreeSum::new(f);
    s.add(t, q(1));
    s.to_json()["terms"][0]["tree"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn tree_sum_json_round_trip() {
    let f = Family::Ocha(2);
    let d = generator_differential(f, Corolla::new(Glyph::Tri, 2, 1)).unwrap();
    let back = TreeSum::from_json(f, &d.to_json()).unwrap();
    assert_eq!(back, d);
}

/// Random trees built by grafting corollas into random leaves.
fn random_tree(f: Family, steps: &[(u32, usize)]) -> Tree {
    let gen = |n: u32| match f {
        Family::AssInf => Corolla::new(Glyph::Ass, n, 0),
        _ => Corolla::new(Glyph::Lie, n, 0),
    };
    let mut t = Tree::corolla(f, gen(steps[0].0)).unwrap();
    for &(n, pick) in &steps[1..] {
        let leaves = t.leaves();
        let slot = leaves[pick % leaves.len()];
        t = graft(f, &t, slot, &Tree::corolla(f, gen(n)).unwrap())
            .unwrap()
            .0;
    }
    t
}

fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::AssInf),
        Just(Family::LieInf(2)),
        Just(Family::LieInf(3))
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_is_idempotent(f in family_strategy(), steps in prop::collection::vec((2u32..4, 0usize..8), 1..5)) {
        let t = random_tree(f, &steps);
        let (c, s) = t.canonical(f);
        prop_assert_eq!(s, 1);
        prop_assert_eq!(&c, &t);
        let printed = print(&t, f);
        prop_assert_eq!(parse_tree(f, &printed).unwrap(), t);
    }

    #[test]
    fn d_squared_vanishes_on_trees(f in family_strategy(), steps in prop::collection::vec((2u32..4, 0usize..8), 1..4)) {
        let t = random_tree(f, &steps);
        let d = differential(f, &t).unwrap();
        let mut d2 = TreeSum::new(f);
        for (term, c) in &d.terms {
            d2.add_sum(&differential(f, term).unwrap(), c);
        }
        prop_assert!(d2.is_zero());
    }

    #[test]
    fn graft_signs_compose(
        f in family_strategy(),
        outer in prop::collection::vec((2u32..4, 0usize..8), 1..3),
        a in prop::collection::vec((2u32..4, 0usize..8), 1..3),
        b in prop::collection::vec((2u32..4, 0usize..8), 1..3),
        picks in (0usize..16, 0usize..16),
    ) {
        let (outer, a, b) = (random_tree(f, &outer), random_tree(f, &a), random_tree(f, &b));
        let leaves = outer.leaves();
        let i = picks.0 % leaves.len();
        let j = picks.1 % leaves.len();
        prop_assume!(i != j);
        let (s1, s2) = if leaves[i] < leaves[j] { (leaves[i], leaves[j]) } else { (leaves[j], leaves[i]) };
        let (single, sigma) = graft_all(f, &outer, &[(s1, a.clone()), (s2, b.clone())]).unwrap();
        // Later slot first: no relabelling of the earlier slot.
        let (t1, x1) = graft(f, &outer, s2, &b).unwrap();
        let (t2, x2) = graft(f, &t1, s1, &a).unwrap();
        prop_assert_eq!(&t2, &single);
        let koszul = if (a.dim(f) * b.dim(f)) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(x1 * x2, sigma * koszul);
        // Earlier slot first: the later slot shifts by the inputs added.
        let width = a.leaves().len() as u32;
        let shifted = match s2 { Leaf::Aerial(k) => Leaf::Aerial(k + width - 1), Leaf::Ground(k) => Leaf::Ground(k + width - 1) };
        let (u1, y1) = graft(f, &outer, s1, &a).unwrap();
        let (u2, y2) = graft(f, &u1, shifted, &b).unwrap();
        prop_assert_eq!(&u2, &single);
        prop_assert_eq!(y1 * y2, sigma);
    }
}
