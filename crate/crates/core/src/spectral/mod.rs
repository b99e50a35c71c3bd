//! Eigenvalues, singular values and pseudospectra of finite sections, the
//! periodic Floquet oracle, and spectral comparison reports.

mod band;
mod constancy;
mod dense;
mod floquet;
mod grid;
mod hausdorff;
mod sample;

pub use band::{
    bandwidths, reverse_cuthill_mckee, smallest_singular_value, BandLu, BandMatrix, SigmaMinSolver, DENSE_CUTOFF,
    LANCZOS_TOL,
};
pub use constancy::{
    constancy_report, enlarge, inclusion_check, persistent_spectrum, window_for_size, CertifySpec, ConstancyOutcome,
    ConstancyParams, ConstancyReport, ConstancyTolerances, GridCheck, Hypothesis, InclusionParams, InclusionReport,
    PairDistances, PairGrid, PersistenceSpec, ProbeInclusion, TREND_SLACK,
};
pub use dense::{eigenvalues as matrix_eigenvalues, sigma_max, singular_values, smallest_singular_value_dense, sort_complex, MAX_EIGEN_DIM};
pub use floquet::{floquet_oracle, floquet_symbol};
pub use grid::{pseudospectrum_grid, section_grid, GridSpec, PseudospectrumGrid, Rectangle, GRID_WORK_BUDGET, RESOLVENT_CLAMP};
pub use hausdorff::{directed_hausdorff, distance_to_set, hausdorff_distance};
pub use sample::{eigenvalue_residual, eigenvalues, SpectrumSample, BACKWARD_ERROR_CONSTANT};
