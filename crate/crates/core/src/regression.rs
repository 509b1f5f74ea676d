//! Equal-time fluctuation moments and their propagation in the delay.
//!
//! Two-time correlations of the atomic fluctuation operators obey the same
//! linear equations of motion as the one-time averages, so a correlation
//! vector `g(tau)` evolves as `g(tau) = exp(M tau) g(0)`. This module builds
//! the closed-form initial vectors
//!
//! - second order: `g(0)_k = <Delta sigma_ea Delta s_k>_ss`,
//! - third order:  `g(0)_k = <Delta sigma_ea Delta s_k Delta sigma_ae>_ss`,
//!
//! and iterates a single precomputed step propagator `P = exp(M dt)` over a
//! uniform grid. `P` is evaluated by scaling-and-squaring with a Pade core,
//! which stays reliable when the generator is non-normal and its eigenvalues
//! cluster at zero near the trapping condition.

use crate::error::Error;
use crate::model::{BlochGenerator, LambdaParams, OperatorIndex, SteadyState};
use crate::{C64, Result, Vec9};

/// Default grid step in units of `1/gamma_a`; resolves the total decay rate
/// and the Rabi sidebands at the parameters of interest.
pub const DEFAULT_DT: f64 = 0.01;
/// Auto-sized grids stop once `|g(tau)| < DECAY_EPS`.
pub const DECAY_EPS: f64 = 1e-8;
/// Hard cap for auto-sized grids, in units of `1/gamma_a`.
pub const TAU_CAP: f64 = 200.0;
/// Norm growth beyond `DIVERGENCE_FACTOR * |g(0)|` aborts the propagation.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Which equal-time construction seeds a propagated correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialConditionKind {
    /// `g(0) = <Delta sigma_ea Delta s>_ss`.
    SecondOrder,
    /// `g(0) = <Delta sigma_ea Delta s Delta sigma_ae>_ss`.
    ThirdOrder,
    /// Alias of [`InitialConditionKind::SecondOrder`] used by the negative-
    /// delay branch of the amplitude-intensity correlation, where only the
    /// `sigma_ee` component is read out.
    IntensityBranch,
}

impl InitialConditionKind {
    /// The construction rule backing this kind.
    pub fn construction(self) -> InitialConditionKind {
        match self {
            InitialConditionKind::ThirdOrder => InitialConditionKind::ThirdOrder,
            _ => InitialConditionKind::SecondOrder,
        }
    }
}

/// Uniform delay grid specification.
#[derive(Debug, Clone, Copy)]
pub struct TauGrid {
    /// Grid step.
    pub dt: f64,
    /// Number of steps, or `None` to auto-size until decay.
    pub steps: Option<usize>,
}

impl TauGrid {
    /// Fixed grid of `steps` intervals (`steps + 1` points).
    pub fn fixed(dt: f64, steps: usize) -> Self {
        TauGrid { dt, steps: Some(steps) }
    }

    /// Auto-sized grid with the default step.
    pub fn auto() -> Self {
        TauGrid { dt: DEFAULT_DT, steps: None }
    }

    /// Auto-sized grid with an explicit step.
    pub fn auto_with_dt(dt: f64) -> Self {
        TauGrid { dt, steps: None }
    }

    fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidParams(format!("tau grid step {} must be > 0", self.dt)));
        }
        Ok(())
    }
}

/// A propagated correlation vector on a uniform delay grid.
#[derive(Debug, Clone)]
pub struct CorrelationTrace {
    tau: Vec<f64>,
    values: Vec<Vec9>,
    kind: InitialConditionKind,
    params: LambdaParams,
}

impl CorrelationTrace {
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn values(&self) -> &[Vec9] {
        &self.values
    }

    pub fn kind(&self) -> InitialConditionKind {
        self.kind
    }

    pub fn params(&self) -> &LambdaParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.tau.len() > 1 { self.tau[1] - self.tau[0] } else { 0.0 }
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau.last().unwrap_or(&0.0)
    }

    /// One component of `g(tau)` over the whole grid.
    pub fn component(&self, op: OperatorIndex) -> Vec<C64> {
        self.values.iter().map(|v| v[op.index()]).collect()
    }
}

/// Second-order initial vector `<Delta sigma_ea Delta s_k>_ss`.
///
/// Explicitly, in basis order:
/// `{ -a_ea a_ee, a_ee - a_ea a_ae, -a_ea a_be, -a_ea^2, a_ea (1 - a_aa),
///    -a_ea a_ba, -a_ea a_eb, a_eb - a_ea a_ab, -a_ea a_bb }`.
pub fn second_order_initial(ss: &SteadyState) -> Vec9 {
    use OperatorIndex::*;
    let a = |op: OperatorIndex| ss.alpha(op);
    let one = C64::new(1.0, 0.0);

    let mut g = Vec9::zeros();
    g[Ee.index()] = -a(Ea) * a(Ee);
    g[Ae.index()] = a(Ee) - a(Ea) * a(Ae);
    g[Be.index()] = -a(Ea) * a(Be);
    g[Ea.index()] = -a(Ea) * a(Ea);
    g[Aa.index()] = a(Ea) * (one - a(Aa));
    g[Ba.index()] = -a(Ea) * a(Ba);
    g[Eb.index()] = -a(Ea) * a(Eb);
    g[Ab.index()] = a(Eb) - a(Ea) * a(Ab);
    g[Bb.index()] = -a(Ea) * a(Bb);
    g
}

/// Third-order initial vector `<Delta sigma_ea Delta s_k Delta sigma_ae>_ss`.
///
/// The nine entries are the explicit closed forms; most carry the common
/// factor `2 |a_ea|^2 - a_ee`.
pub fn third_order_initial(ss: &SteadyState) -> Vec9 {
    use OperatorIndex::*;
    let a = |op: OperatorIndex| ss.alpha(op);
    let one = C64::new(1.0, 0.0);
    let two = C64::new(2.0, 0.0);

    let abs2_ea = C64::new(a(Ea).norm_sqr(), 0.0);
    let common = two * abs2_ea - a(Ee);

    let mut g = Vec9::zeros();
    g[Ee.index()] = a(Ee) * common;
    g[Ae.index()] = -two * a(Ae) * (a(Ee) - abs2_ea);
    g[Be.index()] = a(Be) * common;
    g[Ea.index()] = two * a(Ea) * (abs2_ea - a(Ee));
    g[Aa.index()] = common * (a(Aa) - one);
    g[Ba.index()] = a(Ba) * common - a(Ea) * a(Be);
    g[Eb.index()] = a(Eb) * common;
    g[Ab.index()] = a(Ab) * common - a(Eb) * a(Ae);
    g[Bb.index()] = a(Bb) * common;
    g
}

/// Initial vector for a given construction kind.
pub fn initial_vector(ss: &SteadyState, kind: InitialConditionKind) -> Vec9 {
    match kind.construction() {
        InitialConditionKind::ThirdOrder => third_order_initial(ss),
        _ => second_order_initial(ss),
    }
}

/// Propagate `g(0)` over a uniform grid: `g(tau_i) = exp(M tau_i) g(0)`.
///
/// The first grid point carries `g0` unchanged. Auto-sized grids stop when
/// the vector norm falls below [`DECAY_EPS`] (capped at [`TAU_CAP`]).
pub fn propagate(
    gen: &BlochGenerator,
    g0: Vec9,
    grid: TauGrid,
    kind: InitialConditionKind,
) -> Result<CorrelationTrace> {
    grid.validate()?;
    if g0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidParams("initial correlation vector must be finite".into()));
    }

    let step = (gen.matrix() * C64::new(grid.dt, 0.0)).exp();
    let g0_norm = g0.norm();
    let diverged_at = DIVERGENCE_FACTOR * g0_norm;

    let max_steps = match grid.steps {
        Some(n) => n,
        None => (TAU_CAP / grid.dt).round() as usize,
    };

    let mut tau = Vec::with_capacity(max_steps + 1);
    let mut values = Vec::with_capacity(max_steps + 1);
    tau.push(0.0);
    values.push(g0);

    let mut g = g0;
    for i in 1..=max_steps {
        g = step * g;
        let t = i as f64 * grid.dt;
        let norm = g.norm();
        if g0_norm > 0.0 && norm > diverged_at {
            return Err(Error::PropagationDiverged { tau: t, norm });
        }
        tau.push(t);
        values.push(g);
        if grid.steps.is_none() && norm < DECAY_EPS {
            break;
        }
    }

    Ok(CorrelationTrace { tau, values, kind, params: *gen.params() })
}

/// Propagate the seed selected by `kind` from the steady state.
pub fn propagate_initial(
    gen: &BlochGenerator,
    ss: &SteadyState,
    grid: TauGrid,
    kind: InitialConditionKind,
) -> Result<CorrelationTrace> {
    propagate(gen, initial_vector(ss, kind), grid, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{trace_row, BlochGenerator, LambdaParams, SteadyState};
    use crate::Mat9;
    use approx::assert_abs_diff_eq;

    fn paper_point() -> LambdaParams {
        LambdaParams::new(1.12, 2.15, 3.4, 2.38, 5.4 / 14.7).unwrap()
    }

    fn paper_steady() -> (BlochGenerator, SteadyState) {
        let gen = BlochGenerator::new(paper_point()).unwrap();
        let ss = SteadyState::solve(&gen).unwrap();
        (gen, ss)
    }

    #[test]
    fn undriven_initial_vectors_vanish() {
        let p = LambdaParams::new(0.0, 1.9, 0.0, 0.0, 0.4).unwrap();
        let ss = SteadyState::solve(&BlochGenerator::new(p).unwrap()).unwrap();
        assert!(second_order_initial(&ss).norm() < 1e-14);
        assert!(third_order_initial(&ss).norm() < 1e-14);
    }

    #[test]
    fn second_order_ae_entry_is_population_minus_dipole() {
        let (_, ss) = paper_steady();
        let g = second_order_initial(&ss);
        let expected =
            ss.alpha(OperatorIndex::Ee) - ss.alpha(OperatorIndex::Ea) * ss.alpha(OperatorIndex::Ae);
        assert_abs_diff_eq!((g[OperatorIndex::Ae.index()] - expected).norm(), 0.0);
    }

    #[test]
    fn third_order_matches_general_index_formula() {
        // The explicit column must agree with the general expression
        // <Ds_ig Ds_jk Ds_gi> = 2|a_ig|^2 a_jk + a_ii (d_gj d_kg - a_jk)
        //                       - a_ik a_gi d_gj - a_ig a_ji d_kg
        // read with i = e, g = a.
        use crate::model::Level;
        let (_, ss) = paper_steady();
        let g = third_order_initial(&ss);
        let a = |j: Level, k: Level| ss.alpha(OperatorIndex::from_levels(j, k));
        let d = |x: Level, y: Level| if x == y { 1.0 } else { 0.0 };
        for op in OperatorIndex::ALL {
            let (j, k) = op.levels();
            let expected = C64::new(2.0 * a(Level::E, Level::A).norm_sqr(), 0.0) * a(j, k)
                + a(Level::E, Level::E)
                    * (C64::new(d(Level::A, j) * d(k, Level::A), 0.0) - a(j, k))
                - a(Level::E, k) * a(Level::A, Level::E) * C64::new(d(Level::A, j), 0.0)
                - a(Level::E, Level::A) * a(j, Level::E) * C64::new(d(k, Level::A), 0.0);
            assert!(
                (g[op.index()] - expected).norm() < 1e-14,
                "mismatch at {:?}: {} vs {}",
                op,
                g[op.index()],
                expected
            );
        }
    }

    #[test]
    fn initial_vectors_are_trace_free_and_adjoint_symmetric() {
        let (_, ss) = paper_steady();
        let u = trace_row();
        for g in [second_order_initial(&ss), third_order_initial(&ss)] {
            let tr: C64 = (0..9).map(|k| u[k] * g[k]).sum();
            assert!(tr.norm() < 1e-14);
        }
        // Only the third-order vector pairs with its own adjoint.
        let g3 = third_order_initial(&ss);
        for op in OperatorIndex::ALL {
            let diff = (g3[op.adjoint().index()] - g3[op.index()].conj()).norm();
            assert!(diff < 1e-14, "adjoint pairing broken at {:?}", op);
        }
    }

    #[test]
    fn zero_seed_propagates_to_zero() {
        let (gen, _) = paper_steady();
        let trace = propagate(
            &gen,
            Vec9::zeros(),
            TauGrid::fixed(0.01, 50),
            InitialConditionKind::SecondOrder,
        )
        .unwrap();
        assert_eq!(trace.len(), 51);
        assert!(trace.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn diagonal_generator_gives_decoupled_exponentials() {
        let mut m = Mat9::zeros();
        for k in 0..9 {
            m[(k, k)] = C64::new(-((k + 1) as f64), 0.0);
        }
        let doctored = BlochGenerator::from_matrix(m, paper_point());
        let ones = Vec9::from_element(C64::new(1.0, 0.0));
        let trace =
            propagate(&doctored, ones, TauGrid::fixed(0.05, 40), InitialConditionKind::SecondOrder)
                .unwrap();
        for (i, t) in trace.tau().iter().enumerate() {
            for k in 0..9 {
                let expected = (-((k + 1) as f64) * t).exp();
                assert_abs_diff_eq!(trace.values()[i][k].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(trace.values()[i][k].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn propagation_preserves_zero_trace_and_decays() {
        let (gen, ss) = paper_steady();
        let u = trace_row();
        for kind in [InitialConditionKind::SecondOrder, InitialConditionKind::ThirdOrder] {
            let trace = propagate_initial(&gen, &ss, TauGrid::auto(), kind).unwrap();
            assert!(trace.values().last().unwrap().norm() < DECAY_EPS);
            assert!(trace.tau_max() <= TAU_CAP + 1e-9);
            for v in trace.values() {
                let tr: C64 = (0..9).map(|k| u[k] * v[k]).sum();
                assert!(tr.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let (gen, ss) = paper_steady();
        let g0 = second_order_initial(&ss);
        // One grid at dt and one at 3 dt must agree on shared points.
        let fine =
            propagate(&gen, g0, TauGrid::fixed(0.02, 90), InitialConditionKind::SecondOrder)
                .unwrap();
        let coarse =
            propagate(&gen, g0, TauGrid::fixed(0.06, 30), InitialConditionKind::SecondOrder)
                .unwrap();
        for (i, v) in coarse.values().iter().enumerate() {
            let diff = (v - fine.values()[3 * i]).norm();
            assert!(diff < 1e-10, "semigroup violated at step {i}: {diff:e}");
        }
    }

    #[test]
    fn values_start_exactly_at_seed() {
        let (gen, ss) = paper_steady();
        let g0 = third_order_initial(&ss);
        let trace =
            propagate(&gen, g0, TauGrid::fixed(0.01, 5), InitialConditionKind::ThirdOrder).unwrap();
        assert_eq!(trace.values()[0], g0);
        assert_eq!(trace.tau()[0], 0.0);
    }
}
