use thiserror::Error;

/// Failures raised by the numerical engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolaronError {
    #[error("correlation trace has not decayed: |g(end)|/max|g| = {ratio:.3e}")]
    NonDecayingTrace { ratio: f64 },
    #[error("frequency or time grid is empty")]
    EmptyGrid,
    #[error("kernel still above tolerance at the {limit_ps} ps cutoff limit")]
    SlowDecay { limit_ps: f64 },
    #[error("ODE state became non-finite at t = {t_ps} ps")]
    NonFiniteState { t_ps: f64 },
    #[error("negative frequency {omega} rad/ps passed to a one-sided spectral density")]
    NegativeFrequency { omega: f64 },
    #[error("mode discretization needs at least 10 modes, got {n}")]
    InsufficientModes { n: usize },
    #[error("total zero-phonon linewidth is zero")]
    ZeroLinewidth,
    #[error("spectral denominator vanishes near omega = {omega} rad/ps")]
    SingularDenominator { omega: f64 },
    #[error("adaptive quadrature did not converge (error estimate {error:.3e})")]
    QuadratureFailure { error: f64 },
    #[error("no steady state reached: residual {residual:.3e} after {t_ps} ps")]
    NoSteadyState { residual: f64, t_ps: f64 },
    #[error("engine {engine} only handles a single-mode cavity")]
    UnsupportedReservoir { engine: &'static str },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

impl PolaronError {
    /// True for failures caused by an iteration that ran out of budget
    /// rather than by invalid numerics.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            PolaronError::NoSteadyState { .. }
                | PolaronError::SlowDecay { .. }
                | PolaronError::QuadratureFailure { .. }
                | PolaronError::NonDecayingTrace { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, PolaronError>;
