use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("domain [{x_lo}, {x_hi}] is not commensurate with h = {h}: (x_hi - x_lo)/h = {ratio} is not an integer")]
    NonCommensurateDomain {
        x_lo: f64,
        x_hi: f64,
        h: f64,
        ratio: f64,
    },

    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),

    #[error("mesh width h = {h} exceeds kernel radius eps = {eps}: kernel is unresolvable")]
    KernelUnresolvable { h: f64, eps: f64 },

    #[error("ghost width {n_ghost} is insufficient for convolution stencil (need at least {needed})")]
    InsufficientGhosts { n_ghost: usize, needed: usize },

    #[error("scheme/problem mismatch: {0}")]
    SchemeMismatch(String),

    #[error("non-finite value detected at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("solution blew up at step {step} (t = {time}): max |rho| = {max_abs}")]
    BlowUp { step: usize, time: f64, max_abs: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
