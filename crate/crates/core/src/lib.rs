//! Genuine tripartite entanglement of three-mode Gaussian states and its loss
//! under the uniform-acceleration channel.
//!
//! Covariance matrices use the (q1,p1,q2,p2,q3,p3) ordering with the vacuum
//! normalized to the identity.

// `!(x >= lo)` is used on purpose: NaN has to fail those guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod par;
pub mod states;
pub mod sweep;

pub use channel::{alpha_from_acceleration, apply_channel, transform_eigenvalue, AccelTable, ChannelSpec, GaussianChannel};
pub use error::{Error, ErrorClass, Result};
pub use gaussian::{
    global_purity, is_psd_difference, local_mixednesses, ordinary_eigenvalues, symplectic_eigenvalues, validate, CovMat3,
    LocalMixedness, SymplecticForm,
};
pub use par::Exec;
pub use states::{
    bisymmetric_eigenvalues, bisymmetric_state, epsilon_pm, pure_standard_form, symmetric_eigenvalues, symmetric_state,
    verify_parametrization_equivalence, EigenSpectrumBisym, EigenSpectrumSym, SqueezingBisym, SqueezingSym,
};
