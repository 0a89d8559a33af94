//! Operads of Feynman graphs, chain operads of compactified configuration
//! spaces, their representations on Poisson-Schouten algebras, and the
//! propagator to weight to star product pipeline.
//!
//! Module map:
//!
//! * [`graph_core`]: labelled Feynman graphs with ordered edges, operadic
//!   composition, subgraphs and quotients.
//! * [`chain_operads`]: free coloured operads on corolla generators for the
//!   A∞, Mor(A∞), L∞, OCHA, Mor(L∞) and Mor(OCHA) face complexes.
//! * [`schouten`]: graded polynomials, brackets, graph operators Φ_Γ and
//!   Maurer-Cartan elements.
//! * [`weights`]: Monte-Carlo configuration-space integrals.
//! * [`quantize`]: induced brackets, twisted operations and star products.
//! * [`verify`]: the numerical and symbolic check suites.
//! * [`cli`]: configuration, serialization and command dispatch.

// Index loops follow the tensor notation of the formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod chain_operads;
pub mod cli;
pub mod exec;
pub mod graph_core;
pub mod quantize;
pub mod rational;
pub mod schouten;
pub mod verify;
pub mod weights;
