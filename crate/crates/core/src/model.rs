//! System parameters, the Bloch generator `M`, and steady-state quantities.
//!
//! The dynamical variables are expectation values of the nine atomic
//! operators `sigma_jk = |j><k|` over the states `{|e>, |a>, |b>}`, collected
//! in the fixed order
//!
//! ```text
//! s = { sigma_ee, sigma_ae, sigma_be, sigma_ea, sigma_aa,
//!       sigma_ba, sigma_eb, sigma_ab, sigma_bb }
//! ```
//!
//! so that the optical Bloch equations take the closed linear form
//! `ds/dt = M s` with `M` a 9x9 complex matrix linear in the drive and decay
//! parameters.

use crate::error::Error;
use crate::{C64, Mat3, Mat9, Result, Vec3, Vec9};

/// Atomic levels of the lambda system.
///
/// `E` is the single excited state; `A` and `B` are the two lower states of
/// the probe and control transitions respectively. `B -> A` decay is
/// dipole-forbidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    E,
    A,
    B,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::E, Level::A, Level::B];

    /// Position of the level in the 3x3 state basis.
    pub fn index(self) -> usize {
        match self {
            Level::E => 0,
            Level::A => 1,
            Level::B => 2,
        }
    }
}

/// The two driven transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// `|a> <-> |e>`, driven by the probe laser (`omega_a`, `delta_a`, `gamma_a`).
    Probe,
    /// `|b> <-> |e>`, driven by the control laser (`omega_b`, `delta_b`, `gamma_b`).
    Control,
}

/// Index into the nine-operator vector `s`, in the fixed basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum OperatorIndex {
    Ee = 0,
    Ae = 1,
    Be = 2,
    Ea = 3,
    Aa = 4,
    Ba = 5,
    Eb = 6,
    Ab = 7,
    Bb = 8,
}

impl OperatorIndex {
    pub const ALL: [OperatorIndex; 9] = [
        OperatorIndex::Ee,
        OperatorIndex::Ae,
        OperatorIndex::Be,
        OperatorIndex::Ea,
        OperatorIndex::Aa,
        OperatorIndex::Ba,
        OperatorIndex::Eb,
        OperatorIndex::Ab,
        OperatorIndex::Bb,
    ];

    /// Position in the vector `s`.
    pub fn index(self) -> usize {
        self as usize
    }

    /// The `(j, k)` labels of `sigma_jk`.
    pub fn levels(self) -> (Level, Level) {
        use Level::*;
        use OperatorIndex::*;
        match self {
            Ee => (E, E),
            Ae => (A, E),
            Be => (B, E),
            Ea => (E, A),
            Aa => (A, A),
            Ba => (B, A),
            Eb => (E, B),
            Ab => (A, B),
            Bb => (B, B),
        }
    }

    /// Inverse of [`OperatorIndex::levels`].
    pub fn from_levels(j: Level, k: Level) -> Self {
        use Level::*;
        use OperatorIndex::*;
        match (j, k) {
            (E, E) => Ee,
            (A, E) => Ae,
            (B, E) => Be,
            (E, A) => Ea,
            (A, A) => Aa,
            (B, A) => Ba,
            (E, B) => Eb,
            (A, B) => Ab,
            (B, B) => Bb,
        }
    }

    /// Index of the conjugate operator: `sigma_jk <-> sigma_kj`.
    /// Populations are self-paired.
    pub fn adjoint(self) -> Self {
        let (j, k) = self.levels();
        Self::from_levels(k, j)
    }

    /// True for the population operators `sigma_ee`, `sigma_aa`, `sigma_bb`.
    pub fn is_population(self) -> bool {
        let (j, k) = self.levels();
        j == k
    }

    /// The operator as a 3x3 matrix `|j><k|` in the `{e, a, b}` basis.
    pub fn matrix(self) -> Mat3 {
        let (j, k) = self.levels();
        let mut m = Mat3::zeros();
        m[(j.index(), k.index())] = C64::new(1.0, 0.0);
        m
    }
}

/// Drive and decay parameters of the laser-driven lambda atom.
///
/// All quantities are angular frequencies in units of the probe decay rate
/// `gamma_a`; in internal units `gamma_a = 1`. Rabi frequencies are real and
/// non-negative (laser phases are absorbed into the LO phase convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    /// Rabi frequency of the probe laser on `|a> <-> |e>`.
    pub omega_a: f64,
    /// Rabi frequency of the control laser on `|b> <-> |e>`.
    pub omega_b: f64,
    /// Probe detuning `delta_a = omega_ea - nu_a`.
    pub delta_a: f64,
    /// Control detuning `delta_b = omega_eb - nu_b`.
    pub delta_b: f64,
    /// Decay rate `|e> -> |a>`.
    pub gamma_a: f64,
    /// Decay rate `|e> -> |b>`.
    pub gamma_b: f64,
}

impl LambdaParams {
    /// Parameters in scaled units (`gamma_a = 1`).
    pub fn new(omega_a: f64, omega_b: f64, delta_a: f64, delta_b: f64, gamma_b: f64) -> Result<Self> {
        Self::with_rates(omega_a, omega_b, delta_a, delta_b, 1.0, gamma_b)
    }

    /// Parameters with an explicit `gamma_a` (e.g. values in MHz).
    pub fn with_rates(
        omega_a: f64,
        omega_b: f64,
        delta_a: f64,
        delta_b: f64,
        gamma_a: f64,
        gamma_b: f64,
    ) -> Result<Self> {
        let p = LambdaParams { omega_a, omega_b, delta_a, delta_b, gamma_a, gamma_b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_a,
            self.omega_b,
            self.delta_a,
            self.delta_b,
            self.gamma_a,
            self.gamma_b,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.gamma_a <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma_a = {} must be > 0", self.gamma_a)));
        }
        if self.gamma_b < 0.0 {
            return Err(Error::InvalidParams(format!("gamma_b = {} must be >= 0", self.gamma_b)));
        }
        if self.omega_a < 0.0 || self.omega_b < 0.0 {
            return Err(Error::InvalidParams(
                "Rabi frequencies must be non-negative (phases live in the LO phase)".into(),
            ));
        }
        Ok(())
    }

    /// Total decay rate of the excited state, `gamma = gamma_a + gamma_b`.
    pub fn gamma(&self) -> f64 {
        self.gamma_a + self.gamma_b
    }

    /// The same point expressed in units of `gamma_a`.
    pub fn scaled_to_gamma_a(&self) -> Self {
        let g = self.gamma_a;
        LambdaParams {
            omega_a: self.omega_a / g,
            omega_b: self.omega_b / g,
            delta_a: self.delta_a / g,
            delta_b: self.delta_b / g,
            gamma_a: 1.0,
            gamma_b: self.gamma_b / g,
        }
    }
}

/// Saturation parameter `omega_j^2 / (gamma_j^2 + delta_j^2)` of a transition.
pub fn saturation_parameter(params: &LambdaParams, transition: Transition) -> f64 {
    let (omega, gamma, delta) = match transition {
        Transition::Probe => (params.omega_a, params.gamma_a, params.delta_a),
        Transition::Control => (params.omega_b, params.gamma_b, params.delta_b),
    };
    omega * omega / (gamma * gamma + delta * delta)
}

/// The laser-decoupled superposition `(omega_b |a> - omega_a |b>) / sqrt(omega_a^2 + omega_b^2)`.
///
/// Requires at least one non-zero Rabi frequency.
pub fn dark_state(params: &LambdaParams) -> Result<Vec3> {
    params.validate()?;
    let n2 = params.omega_a * params.omega_a + params.omega_b * params.omega_b;
    if n2 <= 0.0 {
        return Err(Error::InvalidParams(
            "dark state undefined: both Rabi frequencies are zero".into(),
        ));
    }
    let n = n2.sqrt();
    Ok(Vec3::new(
        C64::new(0.0, 0.0),
        C64::new(params.omega_b / n, 0.0),
        C64::new(-params.omega_a / n, 0.0),
    ))
}

/// The 9x9 generator of the optical Bloch equations, `ds/dt = M s`.
#[derive(Debug, Clone)]
pub struct BlochGenerator {
    m: Mat9,
    params: LambdaParams,
}

/// Row vector that contracts `s` to the trace `sigma_ee + sigma_aa + sigma_bb`.
pub fn trace_row() -> Vec9 {
    let mut u = Vec9::zeros();
    u[OperatorIndex::Ee.index()] = C64::new(1.0, 0.0);
    u[OperatorIndex::Aa.index()] = C64::new(1.0, 0.0);
    u[OperatorIndex::Bb.index()] = C64::new(1.0, 0.0);
    u
}

impl BlochGenerator {
    /// Build `M` from the drive and decay parameters.
    ///
    /// Every non-zero entry is one of `{+-i omega/2, gamma_a, gamma_b,
    /// -(gamma/2 +- i delta), +-i(delta_a - delta_b), -gamma}` read directly
    /// off the equations of motion; no entry is derived numerically.
    pub fn new(params: LambdaParams) -> Result<Self> {
        params.validate()?;

        use OperatorIndex::*;
        const fn r(op: OperatorIndex) -> usize {
            op as usize
        }

        let ga = params.gamma_a;
        let gb = params.gamma_b;
        let g = params.gamma();
        let da = params.delta_a;
        let db = params.delta_b;
        let ioa = C64::new(0.0, params.omega_a / 2.0); // i omega_a / 2
        let iob = C64::new(0.0, params.omega_b / 2.0); // i omega_b / 2

        let mut m = Mat9::zeros();

        // d<sigma_ee> = i oa/2 (<ae> - <ea>) + i ob/2 (<be> - <eb>) - gamma <ee>
        m[(r(Ee), r(Ee))] = C64::new(-g, 0.0);
        m[(r(Ee), r(Ae))] = ioa;
        m[(r(Ee), r(Ea))] = -ioa;
        m[(r(Ee), r(Be))] = iob;
        m[(r(Ee), r(Eb))] = -iob;

        // d<sigma_ae> = i oa/2 (<ee> - <aa>) - i ob/2 <ab> - (gamma/2 + i da) <ae>
        m[(r(Ae), r(Ee))] = ioa;
        m[(r(Ae), r(Aa))] = -ioa;
        m[(r(Ae), r(Ab))] = -iob;
        m[(r(Ae), r(Ae))] = C64::new(-g / 2.0, -da);

        // d<sigma_be> = -i oa/2 <ba> + i ob/2 (<ee> - <bb>) - (gamma/2 + i db) <be>
        m[(r(Be), r(Ba))] = -ioa;
        m[(r(Be), r(Ee))] = iob;
        m[(r(Be), r(Bb))] = -iob;
        m[(r(Be), r(Be))] = C64::new(-g / 2.0, -db);

        // d<sigma_ea> = conjugate of the sigma_ae equation
        m[(r(Ea), r(Ee))] = -ioa;
        m[(r(Ea), r(Aa))] = ioa;
        m[(r(Ea), r(Ba))] = iob;
        m[(r(Ea), r(Ea))] = C64::new(-g / 2.0, da);

        // d<sigma_aa> = -i oa/2 (<ae> - <ea>) + gamma_a <ee>
        m[(r(Aa), r(Ee))] = C64::new(ga, 0.0);
        m[(r(Aa), r(Ae))] = -ioa;
        m[(r(Aa), r(Ea))] = ioa;

        // d<sigma_ba> = -i oa/2 <be> + i ob/2 <ea> + i (da - db) <ba>
        m[(r(Ba), r(Be))] = -ioa;
        m[(r(Ba), r(Ea))] = iob;
        m[(r(Ba), r(Ba))] = C64::new(0.0, da - db);

        // d<sigma_eb> = conjugate of the sigma_be equation
        m[(r(Eb), r(Ab))] = ioa;
        m[(r(Eb), r(Ee))] = -iob;
        m[(r(Eb), r(Bb))] = iob;
        m[(r(Eb), r(Eb))] = C64::new(-g / 2.0, db);

        // d<sigma_ab> = i oa/2 <eb> - i ob/2 <ae> - i (da - db) <ab>
        m[(r(Ab), r(Eb))] = ioa;
        m[(r(Ab), r(Ae))] = -iob;
        m[(r(Ab), r(Ab))] = C64::new(0.0, -(da - db));

        // d<sigma_bb> = -i ob/2 (<be> - <eb>) + gamma_b <ee>
        m[(r(Bb), r(Ee))] = C64::new(gb, 0.0);
        m[(r(Bb), r(Be))] = -iob;
        m[(r(Bb), r(Eb))] = iob;

        Ok(BlochGenerator { m, params })
    }

    pub fn matrix(&self) -> &Mat9 {
        &self.m
    }

    pub fn params(&self) -> &LambdaParams {
        &self.params
    }

    /// Wrap an arbitrary matrix; test seam for doctored generators.
    #[cfg(test)]
    pub(crate) fn from_matrix(m: Mat9, params: LambdaParams) -> Self {
        BlochGenerator { m, params }
    }
}

/// Stationary expectation values `alpha_jk` of the nine operators.
#[derive(Debug, Clone)]
pub struct SteadyState {
    alpha: Vec9,
    params: LambdaParams,
}

/// Second-smallest singular value below `DEGENERACY_RTOL * ||M||_2` marks a
/// non-unique steady state.
pub const DEGENERACY_RTOL: f64 = 1e-10;
/// Accepted residual `||M alpha||` of the trace-replaced linear solve.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

impl SteadyState {
    /// Solve `M alpha = 0` with the trace normalisation `alpha_ee + alpha_aa
    /// + alpha_bb = 1`.
    ///
    /// The `sigma_ee` row of `M` is replaced by the trace row and the
    /// resulting non-singular system is solved directly; afterwards the
    /// residual of the original system and the dimension of the numerical
    /// null space are checked.
    pub fn solve(gen: &BlochGenerator) -> Result<Self> {
        let m = gen.matrix();

        // Degeneracy check on the untouched generator.
        let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let norm = sv[0];
        let second_smallest = sv[sv.len() - 2];
        let threshold = DEGENERACY_RTOL * norm;
        if second_smallest < threshold {
            return Err(Error::NonUniqueSteadyState { second_sv: second_smallest, threshold });
        }

        let mut system = *m;
        let u = trace_row();
        for c in 0..9 {
            system[(OperatorIndex::Ee.index(), c)] = u[c];
        }
        let mut rhs = Vec9::zeros();
        rhs[OperatorIndex::Ee.index()] = C64::new(1.0, 0.0);

        let alpha = system.lu().solve(&rhs).ok_or(Error::NonUniqueSteadyState {
            second_sv: second_smallest,
            threshold,
        })?;

        let residual = (m * alpha).norm();
        if residual > STEADY_RESIDUAL_TOL {
            return Err(Error::NonUniqueSteadyState { second_sv: residual, threshold: STEADY_RESIDUAL_TOL });
        }

        Ok(SteadyState { alpha, params: *gen.params() })
    }

    /// The stationary moment `alpha_jk = <sigma_jk>_ss`.
    pub fn alpha(&self, op: OperatorIndex) -> C64 {
        self.alpha[op.index()]
    }

    /// The full moment vector in basis order.
    pub fn vector(&self) -> &Vec9 {
        &self.alpha
    }

    pub fn params(&self) -> &LambdaParams {
        &self.params
    }

    /// Stationary population of a level.
    pub fn population(&self, level: Level) -> f64 {
        self.alpha(OperatorIndex::from_levels(level, level)).re
    }

    /// Density matrix reconstructed from the moments: `rho_kj = alpha_jk`.
    pub fn density_matrix(&self) -> Mat3 {
        let mut rho = Mat3::zeros();
        for op in OperatorIndex::ALL {
            let (j, k) = op.levels();
            rho[(k.index(), j.index())] = self.alpha(op);
        }
        rho
    }
}
