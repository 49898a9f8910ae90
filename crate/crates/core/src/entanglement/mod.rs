//! Residual (genuine tripartite) contangle of pure and channel-degraded states.

pub mod bisymmetric;
pub mod oracle;
pub mod pure;
pub mod symmetric;

pub use bisymmetric::{gte_mixed_bisymmetric, gte_mixed_bisymmetric_with, scan_feasible_region, BisymOptions, FeasibleScan};
pub use oracle::{gte_mixed_oracle, gte_mixed_oracle_with, OracleOptions, OracleStats};
pub use pure::{
    contangle_pure_one_vs_rest, gte_pure, gte_pure_values, q_function, relative_gte_loss, Diagnostics, GteReport,
    MBranch, MTerms, Minimizer, PairTerm, QIntermediates,
};
pub use symmetric::{gte_mixed_symmetric, gte_symmetric_pure};
