use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error(
        "quadrature did not reach tolerance: best estimate {estimate} with error bound {abs_err} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        estimate: f64,
        abs_err: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("I_{order}({x}) overflows f64; use the exponentially scaled variant")]
    BesselOverflow { order: usize, x: f64 },
    #[error("order {order} outside the supported range 0..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error(
        "beam-wandering parameters are numerically degenerate at W/a = {ratio}; \
         the Bessel arguments leave the range where the scaled evaluation is accurate"
    )]
    DegenerateGeometry { ratio: f64 },
    #[error("atomic transmittance law has no density")]
    AtomicLaw,
    #[error("moment E[T^{p}] diverges; truncate the transmittance law at some T_min > 0")]
    DivergentMoment { p: f64 },
    #[error("state has no pointwise P function")]
    SingularP,
    #[error("noisy P function is not regular: deconvolution exceeds the Gaussian width at T = {t}")]
    NonRegular { t: f64 },
    #[error("truncation at T_min = {t_min} leaves an empty support")]
    EmptySupport { t_min: f64 },
    #[error("truncation acceptance probability {acceptance} is below 1e-6")]
    PathologicalTruncation { acceptance: f64 },
    #[error("conditional channel is undefined at T = 0")]
    ZeroTransmittance,
    #[error("operation not supported for this input state: {0}")]
    UnsupportedState(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
