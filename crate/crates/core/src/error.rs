use thiserror::Error;

/// Errors surfaced by model construction, samplers and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ring size must be at least 3, got {0}")]
    RingTooSmall(usize),
    #[error("swap rate {rate} for pair ({left},{right}) is not strictly positive; require |E_a - E_b| < 2 N^gamma")]
    NonPositiveRate {
        left: char,
        right: char,
        rate: f64,
    },
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
    #[error("invalid densities (rho_a={rho_a}, rho_b={rho_b}): need rho_a, rho_b >= 0 and rho_a + rho_b <= 1")]
    BadDensities { rho_a: f64, rho_b: f64 },
    #[error("species counts ({0}, {1}, {2}) do not sum to ring size {3}")]
    CountMismatch(usize, usize, usize, usize),
    #[error("parameters are inconsistent with case {case}: {reason}")]
    CaseMismatch { case: &'static str, reason: String },
    #[error("non-hyperbolic point: current Jacobian has complex eigenvalues (discriminant {0})")]
    NonHyperbolic(f64),
    #[error("coefficients are only defined for gamma >= 1/2 (out of proven regime), got {0}")]
    OutOfProvenRegime(f64),
    #[error("block width {width} exceeds ring size {n}")]
    BlockTooWide { width: usize, n: usize },
    #[error("kernel width eps*N = {0} is below one lattice site")]
    EmptyKernel(f64),
    #[error("estimator input invalid: {0}")]
    BadEstimatorInput(String),
    #[error("time step {dt} violates stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },
    #[error("solver produced a non-finite value at step {0}")]
    NonFinite(u64),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot: {0}")]
    BadSnapshot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
