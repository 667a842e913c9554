use thiserror::Error;

/// Errors produced by spectral evaluation, contour construction, quadrature,
/// and the solvers built on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation point within {dist:.3e} of a branch point (threshold {threshold:.3e})")]
    BranchPointHit { dist: f64, threshold: f64 },

    #[error("l = 0 is outside the domain of the sheet maps")]
    ZeroArgument,

    #[error("root search failed to converge for candidate near {re:.6}{im:+.6}i")]
    RootSearchIncomplete { re: f64, im: f64 },

    #[error("contour certificate violated: excluded point {re:.6}{im:+.6}i within clearance of the path")]
    CertificateViolation { re: f64, im: f64 },

    #[error("quadrature tolerance not met: estimated error {estimate:.3e} > requested {requested:.3e}")]
    ToleranceNotMet { estimate: f64, requested: f64 },

    #[error("|Delta_{which}| = {value:.3e} below threshold; contour too close to a determinant zero")]
    DeterminantNearZero { which: u8, value: f64 },

    #[error("sampled data transform requested at Im l = {im_l} > 0; defined only for Im l <= 0")]
    DomainError { im_l: f64 },

    #[error("sampled grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("Volterra step failed to converge at t = {t}")]
    StepUnstable { t: f64 },

    #[error("Laplace evaluation at p within {0:.3e} of a Rayleigh pole")]
    RayleighPole(f64),

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("domain too small: wavefront radius {r_max:.3} exceeds usable half-width {usable:.3}")]
    DomainTooSmall { r_max: f64, usable: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
