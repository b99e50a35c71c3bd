//! Subshifts over finite alphabets, the shift action, limit sets and
//! finite-level minimality and pseudoergodicity checks.

mod alphabet;
pub mod catalog;
mod certify;
mod configuration;
mod limit_set;
mod metric;
mod subshift;
mod substitution;

pub use alphabet::{Alphabet, Letter};
pub use certify::{
    certify_minimal, certify_pseudoergodic, recurrence_radius, MinimalityReport, Occurrence, PseudoergodicReport,
    RecurrenceWitness, Verdict,
};
pub use configuration::{Configuration, Pattern, Rule};
pub use limit_set::{sample_limit_set, LimitProbe, LimitSetSample, DEFAULT_STABLE_RUN};
pub use metric::{lattice_shell_size, lattice_tail_sum, metric_distance, MetricValue};
pub use subshift::{ForbiddenPattern, HullKind, SubshiftSpec, PATTERN_BUDGET, SAMPLE_RADIUS};
pub use substitution::{FixedPoint, PrimitivityWitness, Substitution};
