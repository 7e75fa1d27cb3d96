use thiserror::Error;

/// Errors raised by the model, geometry, dynamics and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("too close to the exceptional point (1 - beta^2 = {one_minus_beta_sq:.3e})")]
    EpProximity { one_minus_beta_sq: f64 },

    #[error("PT symmetry is broken (gamma = {gamma:.6e} >= J = {j:.6e})")]
    BrokenRegime { gamma: f64, j: f64 },

    #[error("vector is self-orthogonal under the CPT metric (|<v|v>| = {value:.3e})")]
    SelfOrthogonal { value: f64 },

    #[error("time {t:.6e} s lies outside the protocol window [0, {t_total:.6e}] s")]
    OutOfWindow { t: f64, t_total: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("Zeeman coefficient must be non-zero")]
    ZeroCoefficient,

    #[error("zeta must be non-zero")]
    ZeroZeta,

    #[error("state has zero norm")]
    ZeroState,

    #[error("finite-difference step {h:.3e} too large: eigenframe jumps between stencil points")]
    StepTooLarge { h: f64 },

    #[error("step size underflow at t = {t:.6e} s (step {step:.3e} s below floor)")]
    StepUnderflow { t: f64, step: f64 },

    #[error("grid needs at least 3 points, got {len}")]
    GridTooSmall { len: usize },

    #[error("grid is not strictly increasing at index {index}")]
    UnsortedGrid { index: usize },

    #[error("detuning grid cannot be paired symmetrically about zero")]
    AsymmetricGrid,

    #[error("{failures} sweep point(s) failed at beta_p = {beta_p}")]
    SweepFailed { beta_p: f64, failures: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::OutOfWindow { .. }
                | Error::DegenerateInput(_)
                | Error::ZeroCoefficient
                | Error::ZeroZeta
                | Error::ZeroState
                | Error::GridTooSmall { .. }
                | Error::UnsortedGrid { .. }
                | Error::AsymmetricGrid
                | Error::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
