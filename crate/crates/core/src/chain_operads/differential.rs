//! Boundary differentials on generators, their Leibniz extension to trees
//! and the ∂² sweeps.

use serde::Serialize;

use super::family::{Corolla, Family, Glyph};
use super::tree::{Leaf, Tree, TreeSum, WNode, WTree};
use super::OperadError;
use crate::exec::Exec;
use crate::rational::Q;

/// A term of ∂ on one generator. Leaves are slot references (`Aerial(k)` is
/// the k-th symmetric child of the collapsed vertex, `Ground(k)` the k-th
/// planar child) and tags give the orientation.
type Template = (i64, WTree);

fn slot_s(k: u32) -> WTree {
    WTree::Leaf(Leaf::Aerial(k))
}

fn slot_p(k: u32) -> WTree {
    WTree::Leaf(Leaf::Ground(k))
}

fn wnode(tag: u32, gen: Corolla, sym: Vec<WTree>, planar: Vec<WTree>) -> WTree {
    WTree::Node(Box::new(WNode {
        tag,
        gen,
        sym,
        planar,
    }))
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn members(mask: u32, n: u32) -> Vec<u32> {
    (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect()
}

/// Set partitions of `items`, blocks ordered by their minima.
fn set_partitions(items: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let mut out = vec![Vec::new()];
    for &x in items {
        let mut next = Vec::new();
        for p in &out {
            for b in 0..p.len() {
                let mut q: Vec<Vec<u32>> = p.clone();
                q[b].push(x);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![x]);
            next.push(q);
        }
        out = next;
    }
    out
}

/// Compositions of `total` into `parts` parts, each at least `min`.
fn compositions(total: u32, parts: u32, min: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    let mut first = min;
    while first + min * (parts - 1) <= total {
        for mut rest in compositions(total - first, parts - 1, min) {
            rest.insert(0, first);
            out.push(rest);
        }
        first += 1;
    }
    out
}

/// Planar corollas: `coeff` · Σ (−1)^{k+l(n−k−l)+1} G_{n−l+1} ∘_{k+1} G_l.
fn planar_templates(glyph: Glyph, n: u32, coeff: i64) -> Vec<Template> {
    let mut out = Vec::new();
    for l in 2..n {
        for k in 0..=n - l {
            let inner = wnode(
                1,
                Corolla::new(glyph, l, 0),
                vec![],
                (k + 1..=k + l).map(slot_p).collect(),
            );
            let mut ch: Vec<WTree> = (1..=k).map(slot_p).collect();
            ch.push(inner);
            ch.extend((k + l + 1..=n).map(slot_p));
            let s = coeff * sign((k + l * (n - k - l) + 1) as i64);
            out.push((s, wnode(0, Corolla::new(glyph, n - l + 1, 0), vec![], ch)));
        }
    }
    out
}

fn black_ass_templates(n: u32) -> Vec<Template> {
    let mut out = Vec::new();
    for l in 2..=n {
        for k in 0..=n - l {
            let inner = wnode(
                1,
                Corolla::new(Glyph::AWhite, l, 0),
                vec![],
                (k + 1..=k + l).map(slot_p).collect(),
            );
            let mut ch: Vec<WTree> = (1..=k).map(slot_p).collect();
            ch.push(inner);
            ch.extend((k + l + 1..=n).map(slot_p));
            let s = -sign((k + l + l * (n - k)) as i64);
            out.push((
                s,
                wnode(0, Corolla::new(Glyph::ABlack, n - l + 1, 0), vec![], ch),
            ));
        }
    }
    for k in 2..=n {
        for comp in compositions(n, k, 1) {
            let mut start = 1;
            let mut blacks = Vec::new();
            let mut e = 0i64;
            for (i, &ni) in comp.iter().enumerate() {
                blacks.push(wnode(
                    i as u32 + 1,
                    Corolla::new(Glyph::ABlack, ni, 0),
                    vec![],
                    (start..start + ni).map(slot_p).collect(),
                ));
                start += ni;
                e += (k as i64 - (i as i64 + 1)) * (ni as i64 - 1);
            }
            out.push((
                sign(e),
                wnode(0, Corolla::new(Glyph::ADashed, k, 0), vec![], blacks),
            ));
        }
    }
    out
}

/// Symmetric corollas: Σ over A ⊆ [n], #A ≥ 2 (A = [n] iff `full`) of the
/// outer corolla with the inner one `inner(A)` substituted, keeping the
/// planar slots of the outer vertex.
fn collapse_templates(
    outer: Glyph,
    inner: Glyph,
    n: u32,
    m: u32,
    full: bool,
    skew: bool,
    coeff: i64,
) -> Vec<Template> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let a = members(mask, n);
        if a.len() < 2 || (!full && a.len() == n as usize) {
            continue;
        }
        let rest: Vec<u32> = (1..=n).filter(|i| !a.contains(i)).collect();
        let inner_t = wnode(
            1,
            Corolla::new(inner, a.len() as u32, 0),
            a.iter().map(|&i| slot_s(i)).collect(),
            vec![],
        );
        let mut sym = vec![inner_t];
        sym.extend(rest.iter().map(|&i| slot_s(i)));
        let mut s = coeff;
        if matches!(
            outer,
            Glyph::Tri | Glyph::InTri | Glyph::OutTri | Glyph::Diamond
        ) {
            // Passing the collapsed block over the m ground legs.
            s *= sign(m as i64 + 1);
        }
        if skew {
            // Shuffle sign of the inputs listed as (rest, A), with the inner
            // corolla stored first.
            let order: Vec<usize> = rest.iter().chain(&a).map(|&i| i as usize - 1).collect();
            s *= crate::graph_core::permutation_sign(&order) as i64;
        }
        let outer_t = wnode(
            0,
            Corolla::new(outer, rest.len() as u32 + 1, m),
            sym,
            (1..=m).map(slot_p).collect(),
        );
        out.push((s, outer_t));
    }
    out
}

/// Σ (−1)^{k+l(m−k−l)} outer(I1; m−l+1) ∘_{k+1} inner(I2; l) over
/// I1 ⊔ I2 = [n]; `valid` filters the corolla arities.
fn boundary_templates(outer: Glyph, inner: Glyph, n: u32, m: u32, coeff: i64) -> Vec<Template> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let i2 = members(mask, n);
        let i1: Vec<u32> = (1..=n).filter(|i| !i2.contains(i)).collect();
        for l in 0..=m {
            let oc = Corolla::new(outer, i1.len() as u32, m - l + 1);
            let ic = Corolla::new(inner, i2.len() as u32, l);
            if !oc.is_valid() || !ic.is_valid() {
                continue;
            }
            for k in 0..=m - l {
                let inner_t = wnode(
                    1,
                    ic,
                    i2.iter().map(|&i| slot_s(i)).collect(),
                    (k + 1..=k + l).map(slot_p).collect(),
                );
                let mut planar: Vec<WTree> = (1..=k).map(slot_p).collect();
                planar.push(inner_t);
                planar.extend((k + l + 1..=m).map(slot_p));
                let s = coeff * sign((k + l * (m - k - l)) as i64);
                out.push((
                    s,
                    wnode(0, oc, i1.iter().map(|&i| slot_s(i)).collect(), planar),
                ));
            }
        }
    }
    out
}

/// −Σ black(rest, white(A)) + Σ over set partitions into ≥ 2 blocks of
/// broken(black(B_1), …, black(B_k)).
fn black_lie_templates(black: Glyph, white: Glyph, broken: Glyph, n: u32) -> Vec<Template> {
    let mut out = collapse_templates(black, white, n, 0, true, false, -1);
    let items: Vec<u32> = (1..=n).collect();
    for p in set_partitions(&items) {
        if p.len() < 2 {
            continue;
        }
        let blacks = p
            .iter()
            .enumerate()
            .map(|(i, b)| {
                wnode(
                    i as u32 + 1,
                    Corolla::new(black, b.len() as u32, 0),
                    b.iter().map(|&x| slot_s(x)).collect(),
                    vec![],
                )
            })
            .collect();
        out.push((
            1,
            wnode(0, Corolla::new(broken, p.len() as u32, 0), blacks, vec![]),
        ));
    }
    out
}

fn diamond_templates(n: u32, m: u32) -> Vec<Template> {
    let mut out = collapse_templates(Glyph::Diamond, Glyph::InWhite, n, m, true, false, -1);
    out.extend(boundary_templates(Glyph::Diamond, Glyph::InTri, n, m, -1));
    // OutTri_{k,l}(black(I_1..I_k); dia(J_1, m_1) … dia(J_l, m_l)).
    for smask in 0u32..(1 << n) {
        let s = members(smask, n);
        let rest: Vec<u32> = (1..=n).filter(|i| !s.contains(i)).collect();
        for blocks in set_partitions(&s) {
            let k = blocks.len() as u32;
            for l in 0..=(rest.len() as u32 + m) {
                if 2 * k + l < 2 {
                    continue;
                }
                let assignments = (l as usize).pow(rest.len() as u32);
                if l == 0 && !rest.is_empty() {
                    continue;
                }
                for code in 0..assignments.max(1) {
                    let mut js: Vec<Vec<u32>> = vec![Vec::new(); l as usize];
                    let mut c = code;
                    for &x in &rest {
                        js[c % l as usize].push(x);
                        c /= l as usize;
                    }
                    for ms in compositions(m, l, 0) {
                        if js.iter().zip(&ms).any(|(j, &mi)| j.is_empty() && mi == 0) {
                            continue;
                        }
                        let mut tag = 1;
                        let mut blacks = Vec::new();
                        for b in &blocks {
                            blacks.push(wnode(
                                tag,
                                Corolla::new(Glyph::Black, b.len() as u32, 0),
                                b.iter().map(|&x| slot_s(x)).collect(),
                                vec![],
                            ));
                            tag += 1;
                        }
                        let mut diamonds = Vec::new();
                        let mut start = 1;
                        let mut e = 0i64;
                        for (i, (j, &mi)) in js.iter().zip(&ms).enumerate() {
                            diamonds.push(wnode(
                                tag,
                                Corolla::new(Glyph::Diamond, j.len() as u32, mi),
                                j.iter().map(|&x| slot_s(x)).collect(),
                                (start..start + mi).map(slot_p).collect(),
                            ));
                            tag += 1;
                            start += mi;
                            e += (l as i64 - (i as i64 + 1)) * (mi as i64 - 1);
                        }
                        out.push((
                            sign(e),
                            wnode(0, Corolla::new(Glyph::OutTri, k, l), blacks, diamonds),
                        ));
                    }
                }
            }
        }
    }
    out
}

fn templates(family: Family, gen: Corolla) -> Result<Vec<Template>, OperadError> {
    gen.check(family)?;
    use Glyph::*;
    let (n, m) = (gen.n, gen.m);
    let skew = gen.skew(family);
    Ok(match gen.glyph {
        Ass => planar_templates(Ass, n, 1),
        // Inside Mor(A∞) the printed black-corolla signs force the opposite
        // overall sign on the white and dashed A∞ corollas.
        AWhite | ADashed => planar_templates(gen.glyph, n, -1),
        ABlack => black_ass_templates(n),
        Lie | LWhite | LBroken | InWhite | OutWhite => {
            collapse_templates(gen.glyph, gen.glyph, n, 0, false, skew, 1)
        }
        Tri => {
            if family.dimension() != 2 {
                return Err(OperadError::Unsupported(gen.head(family).to_string()));
            }
            let mut t = collapse_templates(Tri, Lie, n, m, true, false, 1);
            t.extend(boundary_templates(Tri, Tri, n, m, 1));
            t
        }
        InTri | OutTri => {
            let white = if gen.glyph == InTri {
                InWhite
            } else {
                OutWhite
            };
            let mut t = collapse_templates(gen.glyph, white, n, m, true, false, 1);
            t.extend(boundary_templates(gen.glyph, gen.glyph, n, m, 1));
            t
        }
        LBlack => black_lie_templates(LBlack, LWhite, LBroken, n),
        Black => black_lie_templates(Black, InWhite, OutWhite, n),
        Diamond => diamond_templates(n, m),
    })
}

/// Replaces slot references by the collapsed vertex's children and shifts
/// template tags by `base`.
fn instantiate(t: &WTree, base: u32, sym: &[WTree], planar: &[WTree]) -> WTree {
    match t {
        WTree::Leaf(Leaf::Aerial(k)) => sym[*k as usize - 1].clone(),
        WTree::Leaf(Leaf::Ground(k)) => planar[*k as usize - 1].clone(),
        WTree::Node(n) => wnode(
            base + n.tag,
            n.gen,
            n.sym
                .iter()
                .map(|c| instantiate(c, base, sym, planar))
                .collect(),
            n.planar
                .iter()
                .map(|c| instantiate(c, base, sym, planar))
                .collect(),
        ),
    }
}

fn template_size(t: &WTree) -> u32 {
    match t {
        WTree::Leaf(_) => 0,
        WTree::Node(n) => {
            1 + n
                .sym
                .iter()
                .chain(&n.planar)
                .map(template_size)
                .sum::<u32>()
        }
    }
}

/// Rebuilds `w` with the vertex tagged `target` replaced.
fn replace_vertex(w: &WTree, target: u32, f: &dyn Fn(&WNode) -> WTree) -> WTree {
    match w {
        WTree::Leaf(l) => WTree::Leaf(*l),
        WTree::Node(n) if n.tag == target => f(n),
        WTree::Node(n) => wnode(
            n.tag,
            n.gen,
            n.sym.iter().map(|c| replace_vertex(c, target, f)).collect(),
            n.planar
                .iter()
                .map(|c| replace_vertex(c, target, f))
                .collect(),
        ),
    }
}

/// ∂ on a tree monomial: the sum over vertices v of (−1)^{Σ dims before v}
/// times the tree with v replaced by ∂v, new vertices inserted right after v.
pub fn differential(family: Family, t: &Tree) -> Result<TreeSum, OperadError> {
    t.validate(family)?;
    let mut next = 0;
    let w = WTree::from_tree(t, &mut next);
    let verts = t.vertices();
    let mut out = TreeSum::new(family);
    let mut prefix = 0i64;
    for (i, gen) in verts.iter().enumerate() {
        let i = i as u32;
        for (coeff, tpl) in templates(family, *gen)? {
            let size = template_size(&tpl);
            let replaced = replace_vertex(&w, i, &|node: &WNode| {
                instantiate(&tpl, next, &node.sym, &node.planar)
            });
            let order: Vec<u32> = (0..i).chain(next..next + size).chain(i + 1..next).collect();
            let (canon, s) = replaced.canonicalize(&order, family);
            out.add_canonical(
                canon,
                Q::from_integer((coeff * sign(prefix) * s as i64).into()),
            );
        }
        prefix += gen.dim(family);
    }
    Ok(out)
}

pub fn differential_sum(s: &TreeSum) -> Result<TreeSum, OperadError> {
    let mut out = TreeSum::new(s.family);
    for (t, c) in &s.terms {
        out.add_sum(&differential(s.family, t)?, c);
    }
    Ok(out)
}

/// ∂ of the corolla of `gen`.
pub fn generator_differential(family: Family, gen: Corolla) -> Result<TreeSum, OperadError> {
    differential(family, &Tree::corolla(family, gen)?)
}

pub fn term_count(family: Family, gen: Corolla) -> Result<usize, OperadError> {
    Ok(generator_differential(family, gen)?.len())
}

pub fn d_squared_generator(family: Family, gen: Corolla) -> Result<TreeSum, OperadError> {
    differential_sum(&generator_differential(family, gen)?)
}

/// All valid generators of `family` whose size is at most `bound`.
pub fn generators_within(family: Family, bound: u32) -> Vec<Corolla> {
    let mut out = Vec::new();
    for &glyph in family.glyphs() {
        for n in 0..=bound {
            for m in 0..=bound {
                let c = Corolla::new(glyph, n, m);
                if c.check(family).is_ok() && c.size(family) <= bound && c.size(family) >= 1 {
                    out.push(c);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct D2Options {
    pub bound: u32,
    pub exec: Exec,
}

#[derive(Clone, Debug, Serialize)]
pub struct D2Row {
    pub generator: String,
    pub d_terms: usize,
    pub d2_terms_q: usize,
    pub d2_terms_f2: usize,
    pub max_coeff_q: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct D2Report {
    pub family: String,
    pub bound: u32,
    pub rows: Vec<D2Row>,
    pub zero_over_q: bool,
    pub zero_over_f2: bool,
}

impl D2Report {
    /// The contract: ℚ for the A∞, Mor(A∞) and L∞ families, 𝔽₂ otherwise.
    pub fn passes(&self, family: Family) -> bool {
        match family {
            Family::AssInf | Family::MorAssInf | Family::LieInf(_) => self.zero_over_q,
            _ => self.zero_over_f2,
        }
    }
}

/// ∂² on every generator within the bound.
pub fn d_squared(family: Family, opts: D2Options) -> Result<D2Report, OperadError> {
    let gens = generators_within(family, opts.bound);
    let rows: Vec<Result<D2Row, OperadError>> = opts.exec.map(&gens, |g| {
        let d = generator_differential(family, *g)?;
        let d2 = differential_sum(&d)?;
        Ok(D2Row {
            generator: g.head(family),
            d_terms: d.len(),
            d2_terms_q: d2.len(),
            d2_terms_f2: d2.mod2().len(),
            max_coeff_q: crate::rational::format_q(&d2.max_abs_coeff()),
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let zero_over_q = rows.iter().all(|r| r.d2_terms_q == 0);
    let zero_over_f2 = rows.iter().all(|r| r.d2_terms_f2 == 0);
    Ok(D2Report {
        family: family.to_string(),
        bound: opts.bound,
        rows,
        zero_over_q,
        zero_over_f2,
    })
}
