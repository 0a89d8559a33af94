//! Exact graded-commutative polynomial algebras with pairing-induced
//! bidifferential operators: Poisson-Schouten brackets, graph operators Φ_Γ,
//! Maurer-Cartan residuals and the Bernoulli deformation of the Schouten
//! bracket.

mod algebra;
mod bernoulli;
mod bracket;
mod phi;

use thiserror::Error;

use crate::graph_core::GraphError;

pub use algebra::{
    diff_mono, mul_mono, AlgebraKind, AlgebraSpec, GenKind, Generator, GradedPoly, Mono,
};
pub use bernoulli::{
    bernoulli_numbers, deformed_bracket, gamma_delta, hat_c, hat_c_residual, DeformedBracket,
    HatResidual, StructureConstants,
};
pub use bracket::{bracket_symmetry_sign, delta_element, mc_residual, schouten_bracket};
pub use phi::{
    phi_graph, phi_graph_coloured, representation_check, MultiOperator, OperatorKind, Projection,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchoutenError {
    #[error("operands live over different algebras")]
    SpecMismatch,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("arity mismatch: expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("element has degree {got}, expected {expected}")]
    WrongDegree { expected: i32, got: i32 },
    #[error("input {0} lies outside the required subalgebra")]
    Subalgebra(usize),
    #[error("co-Jacobi identity fails for (α, β, γ; δ) = ({0}, {1}, {2}; {3})")]
    CoJacobi(usize, usize, usize, usize),
    #[error("structure constants are not antisymmetric at (α, β; δ) = ({0}, {1}; {2})")]
    NotAntisymmetric(usize, usize, usize),
    #[error("structure constants have the wrong shape: {0}")]
    Shape(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("bad JSON: {0}")]
    Json(String),
}
