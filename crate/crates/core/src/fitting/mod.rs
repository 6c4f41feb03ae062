//! Least-squares models for echo decays, relaxation rates, inversion
//! recovery, resonance lines and baselines, plus Rabi spectrum peaks.

mod fit;
mod lm;
mod models;
mod rabi;

pub use fit::{
    fit_echo_decay, fit_echo_decay_data, fit_exp_recovery, fit_gaussian_lines, fit_linear_baseline,
    fit_t1_temperature, subtract_linear_baseline, EchoFitOptions, FitParam, FitResult, ECHO_N_STARTS,
    INFINITE_T2_RATE,
};
pub use lm::{levenberg_marquardt, numeric_jacobian, standard_errors, LmConfig, LmReport, Problem};
pub use models::{EchoDecay, ExpRecovery, GaussianLines, Line, LineShape, Model, RamanOrbach};
pub use rabi::{rabi_peak, RABI_PADDING};
