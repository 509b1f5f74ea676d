//! Frequency-domain quantities as resolvent solves.
//!
//! One-sided Fourier transforms of propagated correlations never require
//! time integration here: with `g(tau) = exp(M tau) g(0)` decaying,
//!
//! ```text
//! int_0^inf e^{-i w tau} g(tau) dtau = (i w 1 - M)^{-1} g(0)
//! ```
//!
//! and cosine transforms use the symmetric combination
//! `[(i w 1 - M)^{-1} - (i w 1 + M)^{-1}] / 2`. At `w = 0` the system is
//! singular along the stationary direction, but every fluctuation seed is
//! trace-free and lies in the range of `M`; replacing the `sigma_ee` row
//! with the trace row (zero right-hand side) picks the decaying solution
//! exactly, with no artificial broadening.
//!
//! Spectra are defined by their time-domain integrals and evaluated through
//! the resolvent; the two routes are held together by the quadrature checks
//! in the test suite.

use crate::chd::{quadrature_amplitude, QuadraturePhase, EXCITATION_EPS, QUADRATURE_EPS};
use crate::error::Error;
use crate::model::{trace_row, BlochGenerator, LambdaParams, Level, OperatorIndex, SteadyState};
use crate::regression::second_order_initial;
use crate::{C64, Result, Vec9};

/// Relative residual bound of the deflated resolvent solve.
pub const RESOLVENT_RESIDUAL_RTOL: f64 = 1e-8;
/// Frequencies below this magnitude are treated as the singular point.
pub const OMEGA_DEFLATION_EPS: f64 = 1e-12;

/// Default display grid: 2001 points spanning `[-8, +8]` in units of
/// `gamma_a`, covering the generalised Rabi sidebands at the parameters of
/// interest.
pub const DEFAULT_OMEGA_MAX: f64 = 8.0;
pub const DEFAULT_OMEGA_POINTS: usize = 2001;

/// Default integration grid for the sum rules. The spectra fall off as
/// `1/omega^2`, so the window must reach far past the display range; the
/// remaining tail is added analytically from the leading asymptotics.
pub const SUMRULE_OMEGA_MAX: f64 = 600.0;
pub const SUMRULE_STEP: f64 = 0.025;

/// Inclusive uniform grid over `[-omega_max, +omega_max]`, built mirror-
/// symmetric so that paired points are exact negations of each other.
pub fn omega_grid(omega_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "frequency grid needs at least two points");
    let step = 2.0 * omega_max / (points - 1) as f64;
    let mut grid = vec![0.0; points];
    for i in 0..points / 2 {
        let w = omega_max - i as f64 * step;
        grid[i] = -w;
        grid[points - 1 - i] = w;
    }
    grid
}

/// The default display grid.
pub fn default_omega_grid() -> Vec<f64> {
    omega_grid(DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_POINTS)
}

/// What a [`Spectrum`] contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Incoherent part of the emission spectrum (unit integral split off to
    /// the coherent delta weight).
    Incoherent,
    /// Conditional-homodyne spectrum of the positive-delay branch.
    ChdPositive,
    /// Conditional-homodyne spectrum of the negative-delay branch.
    ChdNegative,
    /// Second-order constituent of the positive branch.
    ChdSecond,
    /// Third-order constituent of the positive branch.
    ChdThird,
    /// Squeezing spectrum (normally ordered quadrature noise).
    Squeezing,
}

/// Which delay branch a conditional-homodyne spectrum transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

/// Combined collection/detection efficiency in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency(f64);

impl Efficiency {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!("efficiency {eta} outside [0, 1]")));
        }
        Ok(Efficiency(eta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A real-valued spectral density on a frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// LO phase, where one applies.
    pub phi: Option<QuadraturePhase>,
    /// Weight `|alpha_ea|^2 / (pi alpha_ee)` of the elastic delta line,
    /// carried alongside the incoherent spectrum and never binned.
    pub coherent_weight: Option<f64>,
}

impl Spectrum {
    /// Plain trapezoid integral over the carried grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.omega, &self.values)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len().saturating_sub(1) {
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    acc
}

/// Solve `(i omega 1 - M) x = v` for each `v`, factorising once.
///
/// At `|omega| < OMEGA_DEFLATION_EPS` the trace-deflated system is solved
/// instead, which requires every `v` to be trace-free. Residuals above
/// `RESOLVENT_RESIDUAL_RTOL * |v|` fail with [`Error::SingularResolvent`].
pub fn resolvent_solve_many(gen: &BlochGenerator, omega: f64, vs: &[Vec9]) -> Result<Vec<Vec9>> {
    let m = gen.matrix();
    let deflate = omega.abs() < OMEGA_DEFLATION_EPS;

    let mut system = -m;
    if deflate {
        let u = trace_row();
        for c in 0..9 {
            system[(OperatorIndex::Ee.index(), c)] = u[c];
        }
    } else {
        for d in 0..9 {
            system[(d, d)] += C64::new(0.0, omega);
        }
    }
    let lu = system.lu();

    vs.iter()
        .map(|v| {
            let norm_v = v.norm();
            if norm_v == 0.0 {
                return Ok(Vec9::zeros());
            }
            let mut rhs = *v;
            if deflate {
                rhs[OperatorIndex::Ee.index()] = C64::new(0.0, 0.0);
            }
            let x = lu.solve(&rhs).ok_or(Error::SingularResolvent {
                omega,
                residual: f64::INFINITY,
                bound: RESOLVENT_RESIDUAL_RTOL * norm_v,
            })?;
            // Residual of the original (undeflated) system.
            let mut residual_vec = -(m * x) - v;
            for d in 0..9 {
                residual_vec[d] += C64::new(0.0, omega) * x[d];
            }
            let residual = residual_vec.norm();
            let bound = RESOLVENT_RESIDUAL_RTOL * norm_v;
            if residual > bound {
                return Err(Error::SingularResolvent { omega, residual, bound });
            }
            Ok(x)
        })
        .collect()
}

/// Solve `(i omega 1 - M) x = v`.
pub fn resolvent_solve(gen: &BlochGenerator, omega: f64, v: &Vec9) -> Result<Vec9> {
    Ok(resolvent_solve_many(gen, omega, std::slice::from_ref(v))?.remove(0))
}

/// Cosine-transform operator applied to each seed:
/// `int_0^inf cos(omega tau) g(tau) dtau = (x(+omega) + x(-omega)) / 2`.
fn cosine_resolvent_many(gen: &BlochGenerator, omega: f64, vs: &[Vec9]) -> Result<Vec<Vec9>> {
    let plus = resolvent_solve_many(gen, omega, vs)?;
    if omega.abs() < OMEGA_DEFLATION_EPS {
        return Ok(plus);
    }
    let minus = resolvent_solve_many(gen, -omega, vs)?;
    Ok(plus.into_iter().zip(minus).map(|(p, q)| (p + q) * C64::new(0.5, 0.0)).collect())
}

struct SpectraContext {
    gen: BlochGenerator,
    ss: SteadyState,
    alpha_ee: f64,
}

impl SpectraContext {
    fn new(params: &LambdaParams) -> Result<Self> {
        let gen = BlochGenerator::new(*params)?;
        let ss = SteadyState::solve(&gen)?;
        let alpha_ee = ss.population(Level::E);
        if alpha_ee < EXCITATION_EPS {
            return Err(Error::VanishingExcitation { alpha_ee });
        }
        Ok(SpectraContext { gen, ss, alpha_ee })
    }

    fn quadrature(&self, phi: QuadraturePhase) -> Result<f64> {
        let alpha_phi = quadrature_amplitude(&self.ss, phi);
        if alpha_phi.abs() < QUADRATURE_EPS {
            return Err(Error::DegenerateQuadrature { alpha_phi_abs: alpha_phi.abs() });
        }
        Ok(alpha_phi)
    }
}

/// Incoherent emission spectrum of the probe transition,
/// `S_inc(w) = Re{(i w 1 - M)^{-1} <Ds_ea Ds>}_ae / (pi alpha_ee)`,
/// with the elastic line reported separately as `coherent_weight`.
pub fn incoherent_spectrum(params: &LambdaParams, omega: &[f64]) -> Result<Spectrum> {
    let ctx = SpectraContext::new(params)?;
    let g0 = second_order_initial(&ctx.ss);
    let norm = std::f64::consts::PI * ctx.alpha_ee;

    let mut values = Vec::with_capacity(omega.len());
    for &w in omega {
        let x = resolvent_solve(&ctx.gen, w, &g0)?;
        values.push(x[OperatorIndex::Ae.index()].re / norm);
    }

    let coherent_weight = ctx.ss.alpha(OperatorIndex::Ea).norm_sqr() / norm;
    Ok(Spectrum {
        omega: omega.to_vec(),
        values,
        kind: SpectrumKind::Incoherent,
        phi: None,
        coherent_weight: Some(coherent_weight),
    })
}

/// Shared worker for every cosine-transform spectrum: builds the per-omega
/// projection of the transformed second/third-order seeds.
fn cosine_spectrum(
    params: &LambdaParams,
    phi: QuadraturePhase,
    omega: &[f64],
    kind: SpectrumKind,
    eta: Option<Efficiency>,
) -> Result<Spectrum> {
    let ctx = SpectraContext::new(params)?;
    let alpha_phi = ctx.quadrature(phi)?;
    let gamma_a = params.gamma_a;

    let em = phi.conj_rotation();
    let ep = em.conj();
    let a_ae = ctx.ss.alpha(OperatorIndex::Ae);
    let ea = OperatorIndex::Ea.index();
    let ae = OperatorIndex::Ae.index();
    let ee = OperatorIndex::Ee.index();

    let g2 = second_order_initial(&ctx.ss);
    let g3 = crate::regression::third_order_initial(&ctx.ss);
    let needs_g3 = matches!(kind, SpectrumKind::ChdThird | SpectrumKind::ChdPositive);
    let seeds: Vec<Vec9> = if needs_g3 { vec![g2, g3] } else { vec![g2] };

    let project = |kind: SpectrumKind, xs: &[Vec9]| -> f64 {
        match kind {
            SpectrumKind::ChdSecond => {
                (4.0 * gamma_a / alpha_phi) * (a_ae * (em * xs[0][ea] + ep * xs[0][ae])).re
            }
            SpectrumKind::ChdThird => {
                (4.0 * gamma_a / alpha_phi) * (0.5 * (em * xs[1][ea] + ep * xs[1][ae])).re
            }
            SpectrumKind::ChdPositive => {
                (4.0 * gamma_a / alpha_phi)
                    * ((a_ae * (em * xs[0][ea] + ep * xs[0][ae])).re
                        + (0.5 * (em * xs[1][ea] + ep * xs[1][ae])).re)
            }
            SpectrumKind::ChdNegative => {
                (4.0 * gamma_a / alpha_phi) * (em * xs[0][ee]).re
            }
            SpectrumKind::Squeezing => {
                let eta = eta.map(Efficiency::value).unwrap_or(1.0);
                2.0 * gamma_a * eta * (em * em * xs[0][ea] + xs[0][ae]).re
            }
            SpectrumKind::Incoherent => unreachable!("not a cosine-transform spectrum"),
        }
    };

    let mut values = Vec::with_capacity(omega.len());
    for &w in omega {
        let xs = cosine_resolvent_many(&ctx.gen, w, &seeds)?;
        values.push(project(kind, &xs));
    }

    Ok(Spectrum { omega: omega.to_vec(), values, kind, phi: Some(phi), coherent_weight: None })
}

/// Conditional-homodyne quadrature spectrum of one delay branch:
/// `S = 4 gamma_a alpha_ee int cos(w tau) [h(tau) - 1] dtau` over the branch.
pub fn chd_spectrum(
    params: &LambdaParams,
    phi: QuadraturePhase,
    branch: Branch,
    omega: &[f64],
) -> Result<Spectrum> {
    let kind = match branch {
        Branch::Positive => SpectrumKind::ChdPositive,
        Branch::Negative => SpectrumKind::ChdNegative,
    };
    cosine_spectrum(params, phi, omega, kind, None)
}

/// The second- and third-order constituents of the positive-branch
/// spectrum; their pointwise sum is the positive-branch spectrum itself.
pub fn chd_spectrum_split(
    params: &LambdaParams,
    phi: QuadraturePhase,
    omega: &[f64],
) -> Result<(Spectrum, Spectrum)> {
    let s2 = cosine_spectrum(params, phi, omega, SpectrumKind::ChdSecond, None)?;
    let s3 = cosine_spectrum(params, phi, omega, SpectrumKind::ChdThird, None)?;
    Ok((s2, s3))
}

/// Spectrum of squeezing,
/// `S_phi(w) = 4 gamma_a eta int_0^inf cos(w tau)
/// Re[e^{-i phi} <Ds_ea(0) Ds_phi(tau)>] dtau`,
/// normalised so that its integral equals `4 pi gamma_a eta V_phi`.
pub fn squeezing_spectrum(
    params: &LambdaParams,
    phi: QuadraturePhase,
    eta: Efficiency,
    omega: &[f64],
) -> Result<Spectrum> {
    cosine_spectrum(params, phi, omega, SpectrumKind::Squeezing, Some(eta))
}

/// Normally ordered quadrature variance
/// `V_phi = Re[e^{-i phi} <Ds_ea Ds_phi>_ss]`; negative values mark a
/// squeezed quadrature.
pub fn variance(params: &LambdaParams, phi: QuadraturePhase) -> Result<f64> {
    let gen = BlochGenerator::new(*params)?;
    let ss = SteadyState::solve(&gen)?;
    let g2 = second_order_initial(&ss);
    let em = phi.conj_rotation();
    let ep = em.conj();
    let inner =
        0.5 * (em * g2[OperatorIndex::Ea.index()] + ep * g2[OperatorIndex::Ae.index()]);
    Ok((em * inner).re)
}

/// Result of a sum-rule evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SumRuleCheck {
    /// Numerical integral over the wide default grid, tail-corrected.
    pub integral: f64,
    /// Closed-form value the integral must reproduce.
    pub expected: f64,
}

impl SumRuleCheck {
    pub fn relative_error(&self) -> f64 {
        if self.expected == 0.0 {
            self.integral.abs()
        } else {
            ((self.integral - self.expected) / self.expected).abs()
        }
    }
}

/// Integrate a spectral density over the wide sum-rule grid, adding the
/// analytic `1/omega^2` tail beyond the window:
/// `int_{|w|>W} c/w^2 dw ~= W (S(W) + S(-W))`.
fn integrate_with_tail(mut eval: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let n = (2.0 * SUMRULE_OMEGA_MAX / SUMRULE_STEP).round() as usize;
    let mut prev = eval(-SUMRULE_OMEGA_MAX)?;
    let first = prev;
    let mut acc = 0.0;
    for i in 1..=n {
        let w = -SUMRULE_OMEGA_MAX + i as f64 * SUMRULE_STEP;
        let cur = eval(w)?;
        acc += 0.5 * (prev + cur) * SUMRULE_STEP;
        prev = cur;
    }
    let tail = SUMRULE_OMEGA_MAX * (first + prev);
    Ok(acc + tail)
}

/// `int S_inc dw = 1 - |alpha_ea|^2 / alpha_ee`: total incoherent fraction.
pub fn incoherent_sum_rule(params: &LambdaParams) -> Result<SumRuleCheck> {
    let ctx = SpectraContext::new(params)?;
    let g0 = second_order_initial(&ctx.ss);
    let norm = std::f64::consts::PI * ctx.alpha_ee;
    let ae = OperatorIndex::Ae.index();

    let integral = integrate_with_tail(|w| {
        let x = resolvent_solve(&ctx.gen, w, &g0)?;
        Ok(x[ae].re / norm)
    })?;
    let expected = 1.0 - ctx.ss.alpha(OperatorIndex::Ea).norm_sqr() / ctx.alpha_ee;
    Ok(SumRuleCheck { integral, expected })
}

/// `int S_phi dw = 4 pi gamma_a eta V_phi`: the squeezing spectrum
/// integrates to the variance.
pub fn squeezing_sum_rule(
    params: &LambdaParams,
    phi: QuadraturePhase,
    eta: Efficiency,
) -> Result<SumRuleCheck> {
    let ctx = SpectraContext::new(params)?;
    ctx.quadrature(phi)?;
    let g2 = second_order_initial(&ctx.ss);
    let em = phi.conj_rotation();
    let ea = OperatorIndex::Ea.index();
    let ae = OperatorIndex::Ae.index();
    let gamma_a = params.gamma_a;

    let integral = integrate_with_tail(|w| {
        let xs = cosine_resolvent_many(&ctx.gen, w, std::slice::from_ref(&g2))?;
        Ok(2.0 * gamma_a * eta.value() * (em * em * xs[0][ea] + xs[0][ae]).re)
    })?;
    let expected = 4.0 * std::f64::consts::PI
        * gamma_a
        * eta.value()
        * variance(params, phi)?;
    Ok(SumRuleCheck { integral, expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Transition;
    use crate::oracle::{quadrature_transform, Kernel};
    use crate::regression::{propagate_initial, InitialConditionKind, TauGrid};
    use crate::Mat9;
    use approx::assert_abs_diff_eq;

    fn paper_point() -> LambdaParams {
        LambdaParams::new(1.12, 2.15, 3.4, 2.38, 5.4 / 14.7).unwrap()
    }

    fn phi(x: f64) -> QuadraturePhase {
        QuadraturePhase::new(x).unwrap()
    }

    #[test]
    fn resolvent_zero_seed_and_scalar_block() {
        let gen = BlochGenerator::new(paper_point()).unwrap();
        let x = resolvent_solve(&gen, 1.3, &Vec9::zeros()).unwrap();
        assert_eq!(x.norm(), 0.0);

        // M = -1 on every diagonal entry: (i w + 1) x = e_1.
        let doctored = BlochGenerator::from_matrix(-Mat9::identity(), paper_point());
        let mut e1 = Vec9::zeros();
        e1[0] = C64::new(1.0, 0.0);
        let x = resolvent_solve(&doctored, 1.0, &e1).unwrap();
        let expected = C64::new(1.0, 0.0) / C64::new(1.0, 1.0);
        assert!((x[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn resolvent_matches_quadrature_of_propagated_trace() {
        let p = paper_point();
        let gen = BlochGenerator::new(p).unwrap();
        let ss = SteadyState::solve(&gen).unwrap();
        let g0 = second_order_initial(&ss);
        let w = 2.0;
        let x = resolvent_solve(&gen, w, &g0).unwrap();

        let trace =
            propagate_initial(&gen, &ss, TauGrid::auto_with_dt(0.0025), InitialConditionKind::SecondOrder)
                .unwrap();
        for op in OperatorIndex::ALL {
            let f = trace.component(op);
            let q = quadrature_transform(trace.tau(), &f, &[w], Kernel::Complex).unwrap()[0];
            assert!(
                (x[op.index()] - q).norm() < 1e-6,
                "component {:?}: resolvent {} vs quadrature {}",
                op,
                x[op.index()],
                q
            );
        }
    }

    #[test]
    fn deflated_solve_at_zero_frequency() {
        let p = paper_point();
        let gen = BlochGenerator::new(p).unwrap();
        let ss = SteadyState::solve(&gen).unwrap();
        let g0 = second_order_initial(&ss);
        let x = resolvent_solve(&gen, 0.0, &g0).unwrap();
        // -M x = g0 and zero trace projection.
        assert!((-(gen.matrix() * x) - g0).norm() < 1e-10);
        let u = trace_row();
        let tr: C64 = (0..9).map(|k| u[k] * x[k]).sum();
        assert!(tr.norm() < 1e-10);

        // A seed with a trace component cannot be resolved at w = 0.
        let mut bad = g0;
        bad[OperatorIndex::Aa.index()] += C64::new(0.3, 0.0);
        assert!(matches!(
            resolvent_solve(&gen, 0.0, &bad),
            Err(Error::SingularResolvent { .. })
        ));
    }

    #[test]
    fn incoherent_spectrum_has_sidebands_above_saturation() {
        // Drive well above saturation: Rabi sidebands away from line centre.
        let p = LambdaParams::new(4.5, 2.15, 3.4, 2.38, 0.367).unwrap();
        assert!(saturation_above_one(&p));
        let s = incoherent_spectrum(&p, &default_omega_grid()).unwrap();
        assert!(s.values.iter().all(|v| *v > -1e-9), "power spectrum went negative");
        let peaks = local_maxima(&s.omega, &s.values);
        assert!(
            peaks.iter().any(|&w| w > 0.5) && peaks.iter().any(|&w| w < -0.5),
            "no sidebands found in {peaks:?}"
        );
    }

    fn saturation_above_one(p: &LambdaParams) -> bool {
        crate::model::saturation_parameter(p, Transition::Probe) > 1.0
    }

    fn local_maxima(omega: &[f64], values: &[f64]) -> Vec<f64> {
        let mut peaks = Vec::new();
        for i in 1..values.len() - 1 {
            if values[i] > values[i - 1] && values[i] > values[i + 1] && values[i] > 1e-4 {
                peaks.push(omega[i]);
            }
        }
        peaks
    }

    #[test]
    fn incoherent_spectrum_guards_the_trapping_point() {
        let p = LambdaParams::new(1.12, 2.15, 2.38, 2.38, 0.367).unwrap();
        assert!(matches!(
            incoherent_spectrum(&p, &default_omega_grid()),
            Err(Error::VanishingExcitation { .. })
        ));
    }

    #[test]
    fn split_adds_up_to_positive_branch() {
        let p = paper_point();
        let grid = default_omega_grid();
        let total = chd_spectrum(&p, phi(0.0), Branch::Positive, &grid).unwrap();
        let (s2, s3) = chd_spectrum_split(&p, phi(0.0), &grid).unwrap();
        for i in 0..grid.len() {
            assert_abs_diff_eq!(total.values[i], s2.values[i] + s3.values[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn cosine_spectra_are_even_in_frequency() {
        let p = paper_point();
        let grid = omega_grid(6.0, 241);
        let n = grid.len();
        for s in [
            chd_spectrum(&p, phi(0.8), Branch::Positive, &grid).unwrap(),
            chd_spectrum(&p, phi(0.8), Branch::Negative, &grid).unwrap(),
            squeezing_spectrum(&p, phi(0.8), Efficiency::new(1.0).unwrap(), &grid).unwrap(),
        ] {
            for i in 0..n {
                assert_eq!(s.values[i], s.values[n - 1 - i], "asymmetric at {}", grid[i]);
            }
        }
    }

    #[test]
    fn spectra_vanish_far_from_resonance() {
        let p = paper_point();
        let far = [50.0];
        let s = chd_spectrum(&p, phi(0.0), Branch::Positive, &far).unwrap();
        assert!(s.values[0].abs() < 1e-4);
        let s = chd_spectrum(&p, phi(0.0), Branch::Negative, &far).unwrap();
        assert!(s.values[0].abs() < 1e-4);
    }

    #[test]
    fn out_of_phase_positive_spectrum_goes_negative() {
        let p = paper_point();
        let s = chd_spectrum(&p, phi(std::f64::consts::FRAC_PI_2), Branch::Positive, &default_omega_grid())
            .unwrap();
        assert!(s.values.iter().any(|v| *v < 0.0));
    }

    #[test]
    fn zero_efficiency_kills_the_squeezing_spectrum() {
        let p = paper_point();
        let s = squeezing_spectrum(&p, phi(0.0), Efficiency::new(0.0).unwrap(), &omega_grid(4.0, 81))
            .unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
        assert!(Efficiency::new(1.2).is_err());
        assert!(Efficiency::new(-0.1).is_err());
    }

    #[test]
    fn variance_limits_and_periodicity() {
        let undriven = LambdaParams::new(0.0, 1.5, 0.2, 0.1, 0.4).unwrap();
        assert_abs_diff_eq!(variance(&undriven, phi(0.3)).unwrap(), 0.0, epsilon = 1e-14);

        let p = paper_point();
        for x in [0.0, 0.7, 1.9] {
            let v0 = variance(&p, phi(x)).unwrap();
            let v_pi = variance(&p, phi(x + std::f64::consts::PI)).unwrap();
            assert_abs_diff_eq!(v0, v_pi, epsilon = 1e-12);
        }

        // Closed form against the moments.
        let ss = SteadyState::solve(&BlochGenerator::new(p).unwrap()).unwrap();
        let a_ee = ss.population(Level::E);
        let a_ea = ss.alpha(OperatorIndex::Ea);
        let ph = 0.9_f64;
        let expected = 0.5
            * (a_ee - a_ea.norm_sqr()
                - (C64::new(0.0, -2.0 * ph).exp() * a_ea * a_ea).re);
        assert_abs_diff_eq!(variance(&p, phi(ph)).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn sum_rules_hold_at_the_working_point() {
        let p = paper_point();
        let inc = incoherent_sum_rule(&p).unwrap();
        assert!(
            inc.relative_error() < 1e-3,
            "incoherent sum rule off by {:.3e} ({} vs {})",
            inc.relative_error(),
            inc.integral,
            inc.expected
        );

        let sq = squeezing_sum_rule(&p, phi(std::f64::consts::FRAC_PI_2), Efficiency::new(0.7).unwrap())
            .unwrap();
        assert!(
            sq.relative_error() < 1e-3,
            "squeezing sum rule off by {:.3e} ({} vs {})",
            sq.relative_error(),
            sq.integral,
            sq.expected
        );
    }
}
