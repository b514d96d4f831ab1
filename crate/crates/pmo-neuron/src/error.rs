//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be finite and positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("domain error in {op}: {what} = {value}")]
    Domain {
        op: &'static str,
        what: &'static str,
        value: f64,
    },

    #[error("integration step underflow at t = {time} s (substep below {floor} s without meeting the dT cap)")]
    StepUnderflow { time: f64, floor: f64 },

    #[error("root search failed to converge: {0}")]
    NoConvergence(&'static str),

    #[error("operating-point bracket failure: residual not monotone for v_in = {v_in} V")]
    BracketFailure { v_in: f64 },

    #[error("refractory branch never fires: v_refractory = {v_refractory} V is sub-threshold")]
    NeverFires { v_refractory: f64 },

    #[error("stimulus undefined at t = {time} s (domain ends at {t_end} s)")]
    StimulusOutOfRange { time: f64, t_end: f64 },

    #[error("too few spikes to classify: got {got}, need at least {need}")]
    TooFewSpikes { got: usize, need: usize },

    #[error("calibration infeasible: observation at v = {v} V never reaches compliance for any start")]
    Infeasible { v: f64 },

    #[error("calibration needs at least {need} observations for {free} free parameters, got {got}")]
    TooFewObservations { need: usize, free: usize, got: usize },
}
