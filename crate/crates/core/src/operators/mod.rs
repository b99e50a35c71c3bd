//! Equivariant band-operator families over a hull, their finite sections,
//! window seminorms and limit-operator probes.

mod limits;
mod scheme;
mod section;

pub use limits::{
    approximate_limit_operator, operator_spectrum_sample, pattern_sequences, recurrence_sequence, window_seminorm,
    LimitOperatorProbe,
};
pub use scheme::{
    by_name, feinberg_zee, fibonacci_jacobi, free_laplacian, heisenberg_adjacency, identity, jacobi, period_q_jacobi,
    potential, CoeffFn, CoefficientScheme, NAMES,
};
pub use section::{read_fsec, section, Boundary, FiniteSection, MAX_SECTION_DIM};
