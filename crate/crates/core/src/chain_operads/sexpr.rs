//! S-expression round trip, e.g. `(ass3 (leaf 1) (ass2 (leaf 2) (leaf 3)))`.
//! Children list symmetric slots first, then planar slots; a leaf's kind
//! follows from the slot it sits in.

use thiserror::Error;

use super::family::{Corolla, Family};
use super::tree::{Leaf, Tree};
use super::OperadError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected token `{0}` at byte {1}")]
    Unexpected(String, usize),
    #[error("unknown corolla head `{0}` at byte {1}")]
    UnknownHead(String, usize),
    #[error("bad leaf label `{0}` at byte {1}")]
    BadLabel(String, usize),
    #[error(transparent)]
    Invalid(#[from] OperadError),
}

pub fn print_tree(t: &Tree, family: Family) -> String {
    match t {
        Tree::Leaf(Leaf::Aerial(k)) | Tree::Leaf(Leaf::Ground(k)) => format!("(leaf {k})"),
        Tree::Node(n) => {
            let mut s = format!("({}", n.gen.head(family));
            for c in n.sym.iter().chain(&n.planar) {
                s.push(' ');
                s.push_str(&print_tree(c, family));
            }
            s.push(')');
            s
        }
    }
}

/// Parses and validates a tree of `family`.
pub fn parse_tree(family: Family, src: &str) -> Result<Tree, ParseError> {
    let tokens = tokenize(src);
    let mut pos = 0;
    let t = parse_node(family, &tokens, &mut pos, None)?;
    if let Some((tok, at)) = tokens.get(pos) {
        return Err(ParseError::Unexpected(tok.to_string(), *at));
    }
    t.validate(family)?;
    Ok(t)
}

/// Tokens with their byte offsets.
fn tokenize(src: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in src.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((&src[s..i], s));
            }
            if !c.is_whitespace() {
                out.push((&src[i..i + 1], i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((&src[s..], s));
    }
    out
}

fn next<'a>(tokens: &[(&'a str, usize)], pos: &mut usize) -> Result<(&'a str, usize), ParseError> {
    let t = *tokens.get(*pos).ok_or(ParseError::Eof)?;
    *pos += 1;
    Ok(t)
}

fn expect(tokens: &[(&str, usize)], pos: &mut usize, want: &str) -> Result<(), ParseError> {
    let (t, at) = next(tokens, pos)?;
    if t == want {
        Ok(())
    } else {
        Err(ParseError::Unexpected(t.to_string(), at))
    }
}

/// `aerial` says which leaf kind a `(leaf k)` at this position denotes.
fn parse_node(
    family: Family,
    tokens: &[(&str, usize)],
    pos: &mut usize,
    aerial: Option<bool>,
) -> Result<Tree, ParseError> {
    expect(tokens, pos, "(")?;
    let (head, head_at) = next(tokens, pos)?;
    if head == "leaf" {
        let (label, at) = next(tokens, pos)?;
        let k: u32 = label
            .parse()
            .map_err(|_| ParseError::BadLabel(label.to_string(), at))?;
        if k == 0 {
            return Err(ParseError::BadLabel(label.to_string(), at));
        }
        expect(tokens, pos, ")")?;
        return match aerial {
            Some(true) => Ok(Tree::Leaf(Leaf::Aerial(k))),
            Some(false) => Ok(Tree::Leaf(Leaf::Ground(k))),
            None => Err(ParseError::Unexpected("leaf".into(), head_at)),
        };
    }
    let gen = Corolla::from_head(family, head)
        .ok_or_else(|| ParseError::UnknownHead(head.to_string(), head_at))?;
    let (ns, np) = (gen.sym_arity(), gen.planar_arity());
    let mut sym = Vec::with_capacity(ns);
    let mut planar = Vec::with_capacity(np);
    for i in 0..ns + np {
        let child = parse_node(family, tokens, pos, Some(i < ns))?;
        if i < ns {
            sym.push(child);
        } else {
            planar.push(child);
        }
    }
    expect(tokens, pos, ")")?;
    Ok(Tree::node(gen, sym, planar))
}
