//! Free coloured operads on corolla generators for the face complexes of
//! associahedra, multiplihedra and the configuration-space operads, with
//! their boundary differentials.
//!
//! A tree monomial is oriented by an ordering of its vertices; reordering by
//! π costs the Koszul sign of π with respect to vertex dimensions. The stored
//! canonical form sorts symmetric children and uses root-first depth-first
//! order (symmetric children before planar ones).

mod differential;
mod family;
mod sexpr;
mod tree;

pub use differential::{
    d_squared, d_squared_generator, differential, differential_sum, generator_differential,
    generators_within, term_count, D2Options, D2Report, D2Row,
};
pub use family::{Colour, Corolla, Family, Glyph};
pub use sexpr::{parse_tree, print_tree, ParseError};
pub use tree::{graft, graft_all, Leaf, Tree, TreeSum};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("{glyph:?} with n={n}, m={m} is below the arity minimum of {family}")]
    Arity {
        family: String,
        glyph: Glyph,
        n: u32,
        m: u32,
    },
    #[error("glyph {0:?} does not belong to family {1}")]
    WrongFamily(Glyph, String),
    #[error("colour mismatch: slot expects {expected:?}, got {found:?}")]
    ColourMismatch { expected: Colour, found: Colour },
    #[error("no leaf {0:?} in the outer tree")]
    NoSuchSlot(Leaf),
    #[error("the differential of {0} is only implemented for d = 2")]
    Unsupported(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
}
