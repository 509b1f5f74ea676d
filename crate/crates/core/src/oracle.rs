//! Brute-force validators, independent of the matrix-flow machinery.
//!
//! Nothing here touches the 9x9 generator or its exponential: states and
//! operator seeds are evolved with fixed-step RK4 directly under the 3x3
//! master equation, equal-time moments are evaluated by explicit matrix
//! products, and transforms are done by trapezoid quadrature. The test suite
//! uses these routines to pin reference values and to cross-check every main
//! code path; they are deliberately simple and slow.

use crate::error::Error;
use crate::model::{LambdaParams, Level, OperatorIndex};
use crate::{C64, Mat3, Result, Vec3, Vec9};

/// Accepted trace drift of the RK4 master-equation integration.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;
/// Residual norm of the flow below which a state counts as stationary.
pub const STATIONARY_EPS: f64 = 1e-12;

/// A physical 3x3 state over `{|e>, |a>, |b>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Mat3,
}

impl DensityMatrix {
    /// Wrap a matrix, checking hermiticity (1e-12), unit trace (1e-12) and
    /// spectrum above -1e-10.
    pub fn new(m: Mat3) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > 1e-12 {
            return Err(Error::InvalidParams(format!("density matrix not hermitian: {herm:e}")));
        }
        let trace = m.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidParams(format!("density matrix trace {} != 1", trace)));
        }
        let eig = m.symmetric_eigenvalues();
        if eig.iter().any(|l| *l < -1e-10) {
            return Err(Error::InvalidParams("density matrix has a negative eigenvalue".into()));
        }
        Ok(DensityMatrix { m })
    }

    /// Projector onto a pure state.
    pub fn from_pure(v: &Vec3) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidParams("cannot project the zero vector".into()));
        }
        let v = v / C64::new(n, 0.0);
        Ok(DensityMatrix { m: v * v.adjoint() })
    }

    /// Projector onto a bare level.
    pub fn level(level: Level) -> Self {
        let mut m = Mat3::zeros();
        m[(level.index(), level.index())] = C64::new(1.0, 0.0);
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// `<sigma_jk> = Tr[rho sigma_jk]`.
    pub fn expectation(&self, op: OperatorIndex) -> C64 {
        (self.m * op.matrix()).trace()
    }

    /// All nine stationary moments in basis order.
    pub fn moment_vector(&self) -> Vec9 {
        let mut v = Vec9::zeros();
        for op in OperatorIndex::ALL {
            v[op.index()] = self.expectation(op);
        }
        v
    }
}

/// Atom-laser Hamiltonian in the rotating frame, over `{|e>, |a>, |b>}`.
pub fn hamiltonian(params: &LambdaParams) -> Mat3 {
    let mut h = Mat3::zeros();
    let e = Level::E.index();
    let a = Level::A.index();
    let b = Level::B.index();
    h[(a, a)] = C64::new(-params.delta_a, 0.0);
    h[(b, b)] = C64::new(-params.delta_b, 0.0);
    h[(e, a)] = C64::new(params.omega_a / 2.0, 0.0);
    h[(a, e)] = C64::new(params.omega_a / 2.0, 0.0);
    h[(e, b)] = C64::new(params.omega_b / 2.0, 0.0);
    h[(b, e)] = C64::new(params.omega_b / 2.0, 0.0);
    h
}

/// Right-hand side of the master equation applied to an arbitrary operator:
/// `-i[H, x] + sum_j gamma_j x_ee sigma_jj - (gamma/2)(sigma_ee x + x sigma_ee)`.
pub fn liouvillian(params: &LambdaParams, x: &Mat3) -> Mat3 {
    let h = hamiltonian(params);
    let i = C64::new(0.0, 1.0);
    let e = Level::E.index();
    let a = Level::A.index();
    let b = Level::B.index();

    let mut out = (h * x - x * h) * (-i);
    let x_ee = x[(e, e)];
    out[(a, a)] += C64::new(params.gamma_a, 0.0) * x_ee;
    out[(b, b)] += C64::new(params.gamma_b, 0.0) * x_ee;

    let half_g = params.gamma() / 2.0;
    for k in 0..3 {
        out[(e, k)] -= C64::new(half_g, 0.0) * x[(e, k)];
        out[(k, e)] -= C64::new(half_g, 0.0) * x[(k, e)];
    }
    // Both loops hit the (e, e) entry, as they must: sigma_ee x + x sigma_ee
    // counts it twice.
    out
}

/// Largest RK4 step honouring `dt <= 0.01 / max(gamma, omega_a, omega_b,
/// |delta_a|, |delta_b|)`.
pub fn max_rk4_step(params: &LambdaParams) -> f64 {
    let scale = params
        .gamma()
        .max(params.omega_a)
        .max(params.omega_b)
        .max(params.delta_a.abs())
        .max(params.delta_b.abs())
        .max(1.0);
    0.01 / scale
}

fn rk4_step(params: &LambdaParams, x: &Mat3, dt: f64) -> Mat3 {
    let h = C64::new(dt, 0.0);
    let half = C64::new(dt / 2.0, 0.0);
    let k1 = liouvillian(params, x);
    let k2 = liouvillian(params, &(x + k1 * half));
    let k3 = liouvillian(params, &(x + k2 * half));
    let k4 = liouvillian(params, &(x + k3 * h));
    x + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

/// Classic fixed-step RK4 integration of the master equation.
///
/// Fails with [`Error::StepTooLarge`] if the trace drifts by more than
/// [`TRACE_DRIFT_TOL`].
pub fn evolve_master_equation(
    params: &LambdaParams,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if !(dt > 0.0) || !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidParams(format!("bad integration window t={t_final}, dt={dt}")));
    }
    let steps = (t_final / dt).round().max(0.0) as usize;
    let mut x = *rho0.matrix();
    let mut t = 0.0;
    for _ in 0..steps {
        x = rk4_step(params, &x, dt);
        t += dt;
        let drift = (x.trace() - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::StepTooLarge { t, drift });
        }
    }
    DensityMatrix::new(x)
}

/// Evolve from the bare `|a>` state until `||d rho/dt|| < STATIONARY_EPS`.
///
/// Returns the stationary state and the time at which it was reached.
pub fn steady_state_by_evolution(params: &LambdaParams, dt: f64) -> Result<(DensityMatrix, f64)> {
    let mut x = *DensityMatrix::level(Level::A).matrix();
    let mut t = 0.0;
    let t_cap = 5000.0;
    let check_every = (1.0 / dt).ceil() as usize;
    while t < t_cap {
        for _ in 0..check_every {
            x = rk4_step(params, &x, dt);
            t += dt;
        }
        let drift = (x.trace() - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::StepTooLarge { t, drift });
        }
        if liouvillian(params, &x).norm() < STATIONARY_EPS {
            return Ok((DensityMatrix::new(x)?, t));
        }
    }
    Err(Error::InvalidParams(format!(
        "no stationary state within t = {t_cap}; flow residual {:.3e}",
        liouvillian(params, &x).norm()
    )))
}

/// One factor of an equal-time operator product.
#[derive(Debug, Clone, Copy)]
pub enum Factor {
    /// The bare operator `sigma_jk`.
    Bare(OperatorIndex),
    /// The fluctuation `Delta sigma_jk = sigma_jk - <sigma_jk>`.
    Fluct(OperatorIndex),
}

impl Factor {
    fn matrix(self, rho: &DensityMatrix) -> Mat3 {
        match self {
            Factor::Bare(op) => op.matrix(),
            Factor::Fluct(op) => op.matrix() - Mat3::identity() * rho.expectation(op),
        }
    }
}

/// Evaluate `<F_1 F_2 ... F_n>` by explicit 3x3 products and a trace.
pub fn direct_moment(rho: &DensityMatrix, factors: &[Factor]) -> C64 {
    let mut prod = Mat3::identity();
    for f in factors {
        prod *= f.matrix(rho);
    }
    (rho.matrix() * prod).trace()
}

/// Evolve an operator seed under the master-equation flow and record the raw
/// projections `Tr[sigma_k Lambda(tau)]` on a uniform grid of `n_points`
/// spaced by `dt_grid`, taking `substeps` RK4 steps per grid interval.
///
/// The trace of the seed is conserved by the flow, so fluctuation
/// correlations follow by subtracting `alpha_k Tr Lambda(0)` outside.
pub fn evolve_two_time(
    params: &LambdaParams,
    seed: &Mat3,
    dt_grid: f64,
    n_points: usize,
    substeps: usize,
) -> Vec<Vec9> {
    let dt = dt_grid / substeps as f64;
    let mut x = *seed;
    let project = |x: &Mat3| {
        let mut v = Vec9::zeros();
        for op in OperatorIndex::ALL {
            v[op.index()] = (x * op.matrix()).trace();
        }
        v
    };
    let mut out = Vec::with_capacity(n_points);
    out.push(project(&x));
    for _ in 1..n_points {
        for _ in 0..substeps {
            x = rk4_step(params, &x, dt);
        }
        out.push(project(&x));
    }
    out
}

/// Integration kernel of [`quadrature_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `cos(omega tau)`.
    Cosine,
    /// `exp(-i omega tau)`.
    Complex,
}

/// Trapezoid-rule transform `int_0^tau_max kernel(omega tau) f(tau) dtau`
/// for every frequency in `omega`.
///
/// Fails with [`Error::TruncationWarning`] when the tail of `f` has not
/// decayed below 1e-6.
pub fn quadrature_transform(
    tau: &[f64],
    f: &[C64],
    omega: &[f64],
    kernel: Kernel,
) -> Result<Vec<C64>> {
    assert_eq!(tau.len(), f.len(), "grid and samples must have equal length");
    if tau.len() < 2 {
        return Err(Error::InvalidParams("quadrature needs at least two samples".into()));
    }
    let tail = f.last().unwrap().norm();
    if tail > 1e-6 {
        return Err(Error::TruncationWarning { tail });
    }
    let out = omega
        .iter()
        .map(|&w| {
            let weight = |t: f64| match kernel {
                Kernel::Cosine => C64::new((w * t).cos(), 0.0),
                Kernel::Complex => C64::new(0.0, -w * t).exp(),
            };
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..tau.len() - 1 {
                let h = tau[i + 1] - tau[i];
                acc += (weight(tau[i]) * f[i] + weight(tau[i + 1]) * f[i + 1])
                    * C64::new(h / 2.0, 0.0);
            }
            acc
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlochGenerator, SteadyState};
    use approx::assert_abs_diff_eq;

    fn paper_point() -> LambdaParams {
        LambdaParams::new(1.12, 2.15, 3.4, 2.38, 5.4 / 14.7).unwrap()
    }

    #[test]
    fn free_evolution_is_identity() {
        // No drive, no decay: the integrator must hold the state still.
        let p = LambdaParams {
            omega_a: 0.0,
            omega_b: 0.0,
            delta_a: 0.0,
            delta_b: 0.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
        };
        let rho0 = DensityMatrix::level(Level::E);
        let rho = evolve_master_equation(&p, &rho0, 3.0, 0.001).unwrap();
        assert!((rho.matrix() - rho0.matrix()).norm() < 1e-14);
    }

    #[test]
    fn excited_state_decays_at_total_rate() {
        let p = LambdaParams::new(0.0, 0.0, 0.0, 0.0, 0.4).unwrap();
        let rho0 = DensityMatrix::level(Level::E);
        let t = 2.5;
        let rho = evolve_master_equation(&p, &rho0, t, 0.0005).unwrap();
        let expected = (-p.gamma() * t).exp();
        assert_abs_diff_eq!(rho.expectation(OperatorIndex::Ee).re, expected, epsilon = 1e-10);
        // Branching into the two ground states follows the partial rates.
        let fed_a = p.gamma_a / p.gamma() * (1.0 - expected);
        assert_abs_diff_eq!(rho.expectation(OperatorIndex::Aa).re, fed_a, epsilon = 1e-10);
    }

    #[test]
    fn rk4_steady_state_matches_linear_solve() {
        let p = paper_point();
        let (rho, _) = steady_state_by_evolution(&p, max_rk4_step(&p)).unwrap();
        let ss = SteadyState::solve(&BlochGenerator::new(p).unwrap()).unwrap();
        let diff = (rho.moment_vector() - ss.vector()).norm();
        assert!(diff < 1e-8, "RK4 vs linear solve differ by {diff:e}");
    }

    #[test]
    fn direct_moment_two_term_expansion() {
        let p = paper_point();
        let ss = SteadyState::solve(&BlochGenerator::new(p).unwrap()).unwrap();
        let rho = DensityMatrix::new(ss.density_matrix()).unwrap();
        let m = direct_moment(
            &rho,
            &[Factor::Fluct(OperatorIndex::Ea), Factor::Fluct(OperatorIndex::Ae)],
        );
        let a_ee = rho.expectation(OperatorIndex::Ee);
        let a_ea = rho.expectation(OperatorIndex::Ea);
        let expected = a_ee - C64::new(a_ea.norm_sqr(), 0.0);
        assert!((m - expected).norm() < 1e-13);
    }

    #[test]
    fn fluctuations_of_identity_vanish() {
        let p = paper_point();
        let ss = SteadyState::solve(&BlochGenerator::new(p).unwrap()).unwrap();
        let rho = DensityMatrix::new(ss.density_matrix()).unwrap();
        let total: C64 = [OperatorIndex::Ee, OperatorIndex::Aa, OperatorIndex::Bb]
            .into_iter()
            .map(|mid| {
                direct_moment(
                    &rho,
                    &[
                        Factor::Fluct(OperatorIndex::Ea),
                        Factor::Fluct(mid),
                        Factor::Fluct(OperatorIndex::Ae),
                    ],
                )
            })
            .sum();
        assert!(total.norm() < 1e-15);
    }

    #[test]
    fn quadrature_reproduces_lorentzian_values() {
        let dt = 0.001;
        let n = 40_000;
        let tau: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let f: Vec<C64> = tau.iter().map(|&t| C64::new((-t).exp(), 0.0)).collect();
        let vals = quadrature_transform(&tau, &f, &[0.0, 1.0], Kernel::Cosine).unwrap();
        assert_abs_diff_eq!(vals[0].re, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(vals[1].re, 0.5, epsilon = 1e-6);

        let undecayed: Vec<C64> = tau.iter().map(|_| C64::new(1.0, 0.0)).collect();
        assert!(matches!(
            quadrature_transform(&tau, &undecayed, &[0.0], Kernel::Cosine),
            Err(Error::TruncationWarning { .. })
        ));
    }
}
