//! Error types shared by all modules.

use thiserror::Error;

/// Everything that can go wrong when driving the atom model.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter set violates its invariants (negative rate, non-finite
    /// entry, both Rabi frequencies zero where a drive is required, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The Bloch generator has a null space of dimension > 1, so the steady
    /// state is not unique (e.g. both lasers off). Detected through the
    /// second-smallest singular value of `M`.
    #[error(
        "steady state is not unique (second singular value {second_sv:.3e} \
         below {threshold:.3e}); the configuration is physically degenerate"
    )]
    NonUniqueSteadyState { second_sv: f64, threshold: f64 },

    /// A propagated correlation grew past any physical bound, which means the
    /// generator acquired an eigenvalue with positive real part upstream.
    #[error("correlation propagation diverged at tau = {tau}: |g| = {norm:.3e}")]
    PropagationDiverged { tau: f64, norm: f64 },

    /// The mean quadrature amplitude `alpha_phi` vanishes, so the normalised
    /// amplitude-intensity correlation is undefined for this LO phase.
    #[error("degenerate quadrature: |alpha_phi| = {alpha_phi_abs:.3e} < 1e-12")]
    DegenerateQuadrature { alpha_phi_abs: f64 },

    /// The excited state is unpopulated (exact coherent population trapping);
    /// intensity-normalised quantities are undefined there.
    #[error("vanishing excitation: alpha_ee = {alpha_ee:.3e} < 1e-12 (exact trapping point)")]
    VanishingExcitation { alpha_ee: f64 },

    /// The deflated resolvent solve left a residual above tolerance.
    #[error("singular resolvent at omega = {omega}: residual {residual:.3e} > {bound:.3e}")]
    SingularResolvent { omega: f64, residual: f64, bound: f64 },

    /// Trace drift of the RK4 master-equation integration exceeded 1e-8.
    #[error("integration step too large: trace drift {drift:.3e} after t = {t}")]
    StepTooLarge { t: f64, drift: f64 },

    /// A quadrature transform was asked to integrate a correlation whose tail
    /// has not decayed below 1e-6.
    #[error("correlation tail {tail:.3e} > 1e-6 at tau_max; transform would be truncated")]
    TruncationWarning { tail: f64 },
}
