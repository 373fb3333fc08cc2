use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dipole selection rule violated: l = {l1} and l' = {l2} differ by {}", .l1.abs_diff(*.l2))]
    SelectionRule { l1: u32, l2: u32 },

    #[error("frequency {omega:e} Eh hits the pole of virtual state {state} (gap {gap:e} Eh)")]
    Resonance { omega: f64, gap: f64, state: String },

    #[error("eigensolver failed for channel l = {l}, size = {size}, scale = {scale}: {reason}")]
    Eigensolver {
        l: u32,
        size: usize,
        scale: f64,
        reason: String,
    },

    #[error(
        "quadrature did not converge after {levels} refinements \
         ({nodes} nodes, last relative change {last_delta:e}, tolerance {tolerance:e})"
    )]
    Quadrature {
        levels: usize,
        nodes: usize,
        last_delta: f64,
        tolerance: f64,
    },

    #[error("unsupported pair: {0}")]
    UnsupportedPair(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("spectral cache: {0}")]
    Cache(String),

    #[error("no crossover in bracket [{lo:e}, {hi:e}] a0")]
    NoCrossover { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
