//! Conditional-homodyne amplitude-intensity correlation `h_phi(tau)`.
//!
//! The detected quadrature is `sigma_phi = (sigma_ea e^{-i phi}
//! + sigma_ae e^{i phi}) / 2` with LO phase `phi`, and the normalised
//! correlation between a photon detection and a delayed quadrature
//! measurement splits, for `tau >= 0`, into
//!
//! ```text
//! h_phi(tau) = 1 + h2(tau) + h3(tau)
//! ```
//!
//! with `h2` second order and `h3` third order in the dipole fluctuations.
//! For `tau <= 0` (intensity measured after the quadrature) only a
//! second-order term survives, read off the `sigma_ee` component instead of
//! the quadrature. The mismatch between the two branches is the
//! time-asymmetry of the fluctuations; `h3` is the non-Gaussian part.
//!
//! `h_phi(0) = 0` identically, the conditional analogue of antibunching.

use crate::error::Error;
use crate::model::{BlochGenerator, LambdaParams, Level, OperatorIndex, SteadyState};
use crate::regression::{
    propagate, second_order_initial, third_order_initial, CorrelationTrace, InitialConditionKind,
    TauGrid,
};
use crate::{C64, Result, Vec9};

/// Excited-state population below which intensity normalisation is refused.
pub const EXCITATION_EPS: f64 = 1e-12;
/// Quadrature amplitude below which the LO phase is degenerate.
pub const QUADRATURE_EPS: f64 = 1e-12;
/// Tolerance band before a classical bound counts as crossed.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Local-oscillator phase, canonicalised to `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePhase {
    phi: f64,
}

impl QuadraturePhase {
    pub fn new(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidParams(format!("LO phase {phi} must be finite")));
        }
        Ok(QuadraturePhase { phi: phi.rem_euclid(std::f64::consts::TAU) })
    }

    pub fn radians(self) -> f64 {
        self.phi
    }

    /// `e^{-i phi}`.
    pub fn conj_rotation(self) -> C64 {
        C64::new(0.0, -self.phi).exp()
    }
}

/// A real-valued signal on a delay grid.
#[derive(Debug, Clone)]
pub struct RealTrace {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
}

/// Mean quadrature amplitude `alpha_phi = Re[e^{-i phi} alpha_ea]`.
pub fn quadrature_amplitude(ss: &SteadyState, phi: QuadraturePhase) -> f64 {
    (phi.conj_rotation() * ss.alpha(OperatorIndex::Ea)).re
}

/// Steady-state context shared by the correlation assemblers.
struct ChdContext {
    gen: BlochGenerator,
    ss: SteadyState,
    phi: QuadraturePhase,
    alpha_ee: f64,
    alpha_phi: f64,
}

impl ChdContext {
    fn new(params: &LambdaParams, phi: QuadraturePhase) -> Result<Self> {
        let gen = BlochGenerator::new(*params)?;
        let ss = SteadyState::solve(&gen)?;
        let alpha_ee = ss.population(Level::E);
        if alpha_ee < EXCITATION_EPS {
            return Err(Error::VanishingExcitation { alpha_ee });
        }
        let alpha_phi = quadrature_amplitude(&ss, phi);
        if alpha_phi.abs() < QUADRATURE_EPS {
            return Err(Error::DegenerateQuadrature { alpha_phi_abs: alpha_phi.abs() });
        }
        Ok(ChdContext { gen, ss, phi, alpha_ee, alpha_phi })
    }

    fn norm(&self) -> f64 {
        self.alpha_ee * self.alpha_phi
    }

    /// `Re[e^{-i phi} v_ea + e^{+i phi} v_ae] / 2`, the quadrature projection.
    fn quad_project(&self, v: &Vec9) -> f64 {
        let em = self.phi.conj_rotation();
        let ep = em.conj();
        0.5 * (em * v[OperatorIndex::Ea.index()] + ep * v[OperatorIndex::Ae.index()]).re
    }

    fn h2_at(&self, g2: &Vec9) -> f64 {
        let em = self.phi.conj_rotation();
        let ep = em.conj();
        let a_ae = self.ss.alpha(OperatorIndex::Ae);
        (a_ae * (em * g2[OperatorIndex::Ea.index()] + ep * g2[OperatorIndex::Ae.index()])).re
            / self.norm()
    }

    fn h3_at(&self, g3: &Vec9) -> f64 {
        self.quad_project(g3) / self.norm()
    }

    fn h_neg_at(&self, g2: &Vec9) -> f64 {
        1.0 + (self.phi.conj_rotation() * g2[OperatorIndex::Ee.index()]).re / self.norm()
    }

    /// Propagate the second- and third-order seeds on one shared grid.
    fn traces(&self, grid: TauGrid) -> Result<(CorrelationTrace, CorrelationTrace)> {
        let mut t2 = propagate(
            &self.gen,
            second_order_initial(&self.ss),
            grid,
            InitialConditionKind::SecondOrder,
        )?;
        let mut t3 = propagate(
            &self.gen,
            third_order_initial(&self.ss),
            grid,
            InitialConditionKind::ThirdOrder,
        )?;
        // Auto-sized grids can stop at different lengths; align on the longer.
        if t2.len() != t3.len() {
            let steps = t2.len().max(t3.len()) - 1;
            let fixed = TauGrid::fixed(grid.dt, steps);
            t2 = propagate(
                &self.gen,
                second_order_initial(&self.ss),
                fixed,
                InitialConditionKind::SecondOrder,
            )?;
            t3 = propagate(
                &self.gen,
                third_order_initial(&self.ss),
                fixed,
                InitialConditionKind::ThirdOrder,
            )?;
        }
        Ok((t2, t3))
    }
}

/// `h_phi(tau >= 0)`, assembled as `1 + h2 + h3`.
pub fn h_positive(params: &LambdaParams, phi: QuadraturePhase, grid: TauGrid) -> Result<RealTrace> {
    let ctx = ChdContext::new(params, phi)?;
    let (t2, t3) = ctx.traces(grid)?;
    let values = t2
        .values()
        .iter()
        .zip(t3.values())
        .map(|(g2, g3)| 1.0 + ctx.h2_at(g2) + ctx.h3_at(g3))
        .collect();
    Ok(RealTrace { tau: t2.tau().to_vec(), values })
}

/// `h_phi(tau <= 0)`: the second-order intensity branch.
///
/// Returned on an ascending grid from `-tau_max` to `0`; the shared `tau = 0`
/// point carries the positive-branch value, to which it is equal.
pub fn h_negative(params: &LambdaParams, phi: QuadraturePhase, grid: TauGrid) -> Result<RealTrace> {
    let ctx = ChdContext::new(params, phi)?;
    let t2 = propagate(
        &ctx.gen,
        second_order_initial(&ctx.ss),
        grid,
        InitialConditionKind::IntensityBranch,
    )?;
    let n = t2.len();
    let mut tau = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in (0..n).rev() {
        tau.push(-t2.tau()[i]);
        values.push(ctx.h_neg_at(&t2.values()[i]));
    }
    // Branch continuity: 1 + h2(0) + h3(0) and the sigma_ee projection agree
    // analytically at tau = 0; report the positive-branch form.
    let h0 = 1.0
        + ctx.h2_at(&second_order_initial(&ctx.ss))
        + ctx.h3_at(&third_order_initial(&ctx.ss));
    *values.last_mut().unwrap() = h0;
    Ok(RealTrace { tau, values })
}

/// The second- and third-order components of `h_phi(tau >= 0)`.
pub fn h_split(
    params: &LambdaParams,
    phi: QuadraturePhase,
    grid: TauGrid,
) -> Result<(RealTrace, RealTrace)> {
    let ctx = ChdContext::new(params, phi)?;
    let (t2, t3) = ctx.traces(grid)?;
    let h2 = t2.values().iter().map(|g| ctx.h2_at(g)).collect();
    let h3 = t3.values().iter().map(|g| ctx.h3_at(g)).collect();
    Ok((
        RealTrace { tau: t2.tau().to_vec(), values: h2 },
        RealTrace { tau: t3.tau().to_vec(), values: h3 },
    ))
}

/// The full amplitude-intensity signal on a symmetric delay grid.
#[derive(Debug, Clone)]
pub struct ChdSignal {
    /// Symmetric grid from `-tau_max` to `+tau_max`.
    pub tau: Vec<f64>,
    /// `h_phi` over the full grid.
    pub h: Vec<f64>,
    /// Non-negative half of the grid.
    pub tau_pos: Vec<f64>,
    /// Second-order component on `tau_pos`.
    pub h2: Vec<f64>,
    /// Third-order component on `tau_pos`.
    pub h3: Vec<f64>,
    pub phi: QuadraturePhase,
    pub params: LambdaParams,
}

impl ChdSignal {
    /// Compute both branches and the split on one shared grid.
    pub fn compute(params: &LambdaParams, phi: QuadraturePhase, grid: TauGrid) -> Result<Self> {
        let ctx = ChdContext::new(params, phi)?;
        let (t2, t3) = ctx.traces(grid)?;
        let n = t2.len();

        let h2: Vec<f64> = t2.values().iter().map(|g| ctx.h2_at(g)).collect();
        let h3: Vec<f64> = t3.values().iter().map(|g| ctx.h3_at(g)).collect();

        let mut tau = Vec::with_capacity(2 * n - 1);
        let mut h = Vec::with_capacity(2 * n - 1);
        for i in (1..n).rev() {
            tau.push(-t2.tau()[i]);
            h.push(ctx.h_neg_at(&t2.values()[i]));
        }
        for i in 0..n {
            tau.push(t2.tau()[i]);
            h.push(1.0 + h2[i] + h3[i]);
        }

        Ok(ChdSignal { tau, h, tau_pos: t2.tau().to_vec(), h2, h3, phi, params: *params })
    }
}

/// Unnormalised positive-branch numerator `<sigma_ea(0) sigma_phi(tau)
/// sigma_ae(0)>_ss`.
///
/// Well defined at the exact trapping point, where the normalised `h` is not:
/// the seed `sigma_ae rho sigma_ea = alpha_ee |a><a|` is propagated as the
/// basis vector `alpha_ee e_aa`.
pub fn h_numerator_positive(
    params: &LambdaParams,
    phi: QuadraturePhase,
    grid: TauGrid,
) -> Result<RealTrace> {
    let gen = BlochGenerator::new(*params)?;
    let ss = SteadyState::solve(&gen)?;
    let mut seed = Vec9::zeros();
    seed[OperatorIndex::Aa.index()] = ss.alpha(OperatorIndex::Ee);
    let trace = propagate(&gen, seed, grid, InitialConditionKind::ThirdOrder)?;
    let em = phi.conj_rotation();
    let values = trace
        .values()
        .iter()
        .map(|v| {
            0.5 * (em * v[OperatorIndex::Ea.index()] + em.conj() * v[OperatorIndex::Ae.index()]).re
        })
        .collect();
    Ok(RealTrace { tau: trace.tau().to_vec(), values })
}

/// Unnormalised negative-branch numerator
/// `Re[e^{-i phi} <sigma_ea(0) sigma_ee(|tau|)>_ss]` on the ascending grid
/// from `-tau_max` to `0`.
pub fn h_numerator_negative(
    params: &LambdaParams,
    phi: QuadraturePhase,
    grid: TauGrid,
) -> Result<RealTrace> {
    let gen = BlochGenerator::new(*params)?;
    let ss = SteadyState::solve(&gen)?;
    // Seed rho sigma_ea projects onto the j = a row of the basis.
    let mut seed = Vec9::zeros();
    seed[OperatorIndex::Ae.index()] = ss.alpha(OperatorIndex::Ee);
    seed[OperatorIndex::Aa.index()] = ss.alpha(OperatorIndex::Ea);
    seed[OperatorIndex::Ab.index()] = ss.alpha(OperatorIndex::Eb);
    let trace = propagate(&gen, seed, grid, InitialConditionKind::IntensityBranch)?;
    let em = phi.conj_rotation();
    let n = trace.len();
    let mut tau = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in (0..n).rev() {
        tau.push(-trace.tau()[i]);
        values.push((em * trace.values()[i][OperatorIndex::Ee.index()]).re);
    }
    Ok(RealTrace { tau, values })
}

/// A grid point at which a classical bound is crossed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    pub tau: f64,
    pub value: f64,
}

/// Locations where the signal leaves the classically allowed regions.
///
/// The three bounds are `0 <= h - 1 <= 1` (classical intensity band),
/// `|h2(tau)| <= |h2(0)| <= 1` (Gaussian second-order envelope) and
/// `-1 <= h <= 1` (coherent-state band). Any entry marks non-classical
/// light; crossings smaller than [`VIOLATION_TOL`] are ignored.
#[derive(Debug, Clone, Default)]
pub struct ViolationReport {
    /// Bound `0 <= h(tau) - 1 <= 1` over the full grid.
    pub intensity_band: Vec<BoundViolation>,
    /// Points with `|h2(tau)| > |h2(0)|`.
    pub gaussian_envelope: Vec<BoundViolation>,
    /// Set when `|h2(0)| > 1`.
    pub gaussian_scale: Option<f64>,
    /// Bound `-1 <= h(tau) <= 1` over the full grid.
    pub coherent_band: Vec<BoundViolation>,
}

impl ViolationReport {
    pub fn any(&self) -> bool {
        !self.intensity_band.is_empty()
            || !self.gaussian_envelope.is_empty()
            || self.gaussian_scale.is_some()
            || !self.coherent_band.is_empty()
    }
}

/// Scan a signal for violations of the classical inequalities.
pub fn classify_nonclassical(signal: &ChdSignal) -> ViolationReport {
    let mut report = ViolationReport::default();

    for (&tau, &h) in signal.tau.iter().zip(&signal.h) {
        let centred = h - 1.0;
        if centred < -VIOLATION_TOL || centred > 1.0 + VIOLATION_TOL {
            report.intensity_band.push(BoundViolation { tau, value: h });
        }
        if h < -1.0 - VIOLATION_TOL || h > 1.0 + VIOLATION_TOL {
            report.coherent_band.push(BoundViolation { tau, value: h });
        }
    }

    if let Some(&h2_0) = signal.h2.first() {
        let envelope = h2_0.abs();
        if envelope > 1.0 + VIOLATION_TOL {
            report.gaussian_scale = Some(envelope);
        }
        for (&tau, &v) in signal.tau_pos.iter().zip(&signal.h2) {
            if v.abs() > envelope + VIOLATION_TOL {
                report.gaussian_envelope.push(BoundViolation { tau, value: v });
            }
        }
    }

    report
}
