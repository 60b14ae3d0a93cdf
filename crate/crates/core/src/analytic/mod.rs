//! Zeta and Dirichlet polynomial evaluation, mollified moments, and
//! large-value scans.

mod dirichlet;
mod moments;
mod mollifier;
mod scan;
mod zeta;

pub use dirichlet::{resonator_eval, DirichletPoly, Evaluator, Target};
pub use moments::{
    bump_moments, gaussian_moments, gaussian_tail_mass, gaussian_window_mass, log_spaced, moments,
    tail_integral_check, MomentOptions, MomentReport, TailCheckReport, TailSample,
};
pub use mollifier::{bump_psi, phi, psi_hat0, Mollifier};
pub use scan::{
    append_run_log, certificate_interval, certify_lower_bound, scan_max, Certificate, ScanResult,
    Strategy, WITNESS_SLACK,
};
pub use zeta::{partial_sum, zeta_approx, zeta_oracle, ORACLE_T_MAX, POLE_GUARD};
