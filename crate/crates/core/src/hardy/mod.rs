//! Analytic side of the construction: `H_n`, `F_n`, boundary values, the
//! surrogate distribution and moment probes.

pub mod boundary;
pub mod herglotz;
pub mod moments;
pub mod surrogate;
pub mod taylor;

pub use herglotz::{herglotz_eval, stage_f, StageAnalytic, Strategy};
pub use taylor::{stage_for, taylor_coeff, StageTaylor, TaylorRequest};
pub use boundary::{fhat, BoundaryQuadrature, ConjugateField, QuadOptions, SupportIntegrals};
pub use surrogate::{largest_gap, shat, shat_window, support_pairing, ShatConfig, ShatWindow};
pub use moments::{growth_fit, moment_probe, GrowthReport, MomentConfig, MomentProbe};
