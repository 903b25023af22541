use thiserror::Error;

/// Errors raised across the synthesis, verification and simulation pipeline.
///
/// Most variants flag a symbol pair (or load set) that the chosen topology or
/// element ordering cannot realize; callers typically record them per row.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate topology: pivot entry {pivot:.3e} below threshold")]
    DegenerateTopology { pivot: f64 },
    #[error("invalid antenna matrix: {0}")]
    InvalidAntenna(String),
    #[error("invalid basis: 1 - J0(b)^2 = {0:.3e} is not positive")]
    InvalidBasis(f64),
    #[error("non-positive power normalization radicand {0:.3e}")]
    NonPositivePower(f64),
    #[error("current ratio undefined: |eta| = {0:.3e}")]
    EtaUndefined(f64),
    #[error("non-positive input power factor delta1- + omega22 = {0:.3e}")]
    NegativeInputPower(f64),
    #[error("singular omega22 = {0:.3e}")]
    SingularOmega(f64),
    #[error("singular delta1- = {0:.3e}")]
    SingularDelta(f64),
    #[error("theta near pole: cos(theta) = {0:.3e} with nonzero free parameter")]
    ThetaNearPole(f64),
    #[error("zero current in branch 1: |I1| = {0:.3e}")]
    ZeroCurrentBranch(f64),
    #[error("negative radicand {0:.3e} in the b2 quadratic; free b1 too large")]
    Radicand(f64),
    #[error("degenerate excitation: {0}")]
    Degenerate(&'static str),
    #[error("singular network: determinant {0:.3e}")]
    SingularNetwork(f64),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
