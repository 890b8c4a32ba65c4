use thiserror::Error;

/// Failure modes shared by every computational stage of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectral parameter z = {z_abs} lies outside the closed unit disk")]
    OutsideDisk { z_abs: f64 },

    #[error("successive approximations did not converge after {iterations} iterations (last update {last_update:e})")]
    NonConvergence { iterations: usize, last_update: f64 },

    #[error("band-edge evaluation needs q in l1_{needed}, the potential is certified only up to l1_{certified}")]
    MomentCertificate { needed: u32, certified: u32 },

    #[error(
        "Fourier cutoff M = {cutoff} too small: tail bound {tail:e} exceeds tolerance {tol:e}"
    )]
    CutoffTooSmall { cutoff: usize, tail: f64, tol: f64 },

    #[error("bound-state root at z = {z} is within {tol:e} of the band edge")]
    EdgeAmbiguity { z: f64, tol: f64 },

    #[error("spectral parameter {omega} lies on or within {tol:e} of the spectrum")]
    OnSpectrum { omega: String, tol: f64 },

    #[error("the potential is resonant at the band edge(s); {0}")]
    Resonant(String),

    #[error("oscillatory quadrature failed: {0}")]
    Quadrature(String),

    #[error("phase derivative of order {order} drops to {found:e} below the required lower bound {bound:e}")]
    DerivativeBound {
        order: usize,
        found: f64,
        bound: f64,
    },

    #[error("lattice half-width {n} violates the causality margin (need at least {required})")]
    CausalityMargin { n: usize, required: usize },

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the name of the experiment stage that produced it.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
