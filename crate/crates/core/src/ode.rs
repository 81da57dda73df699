//! The fourth-order Euler-Lagrange system of the quotient minimization
//! problem, adaptive integration with running quadrature accumulators, and
//! location of the first positive critical point of a half-wave launch.

use crate::rk;
use thiserror::Error;

/// Smallest abscissa at which a critical point is accepted; the launch
/// itself always has `u' = 0` at `x = 0` and must not count.
const EVENT_X_MIN: f64 = 1e-8;

/// Width to which a located critical point is bisected in `x`.
const EVENT_X_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error("initial state or parameter is not finite")]
    NonFinite,
    #[error("shooting parameter must be positive and finite, got a = {a}")]
    NonPositiveShootParameter { a: f64 },
    #[error("initial position {x} is not below the horizon {x_max}")]
    StartBeyondHorizon { x: f64, x_max: f64 },
}

/// Pointwise state of the scalar profile: position and derivatives up to
/// third order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub d3u: f64,
}

impl PhaseState {
    pub fn new(x: f64, u: f64, du: f64, d2u: f64, d3u: f64) -> Self {
        Self { x, u, du, d2u, d3u }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.u.is_finite()
            && self.du.is_finite()
            && self.d2u.is_finite()
            && self.d3u.is_finite()
    }
}

/// Phase state together with the four running integrals accumulated from
/// the start of the trajectory:
/// `acc_a = int u''^2`, `acc_b = int u'' u^2`, `acc_c = int u^4`,
/// `acc_d = int u u'^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub phase: PhaseState,
    pub acc_a: f64,
    pub acc_b: f64,
    pub acc_c: f64,
    pub acc_d: f64,
}

impl AugmentedState {
    fn from_raw(x: f64, y: &[f64; 8]) -> Self {
        Self {
            phase: PhaseState::new(x, y[0], y[1], y[2], y[3]),
            acc_a: y[4],
            acc_b: y[5],
            acc_c: y[6],
            acc_d: y[7],
        }
    }
}

/// Controls for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Relative local-error tolerance.
    pub rel_tol: f64,
    /// Absolute local-error tolerance.
    pub abs_tol: f64,
    /// Largest permitted step size.
    pub max_step: f64,
    /// Integration horizon (largest abscissa).
    pub x_max: f64,
    /// Integration halts once `|u|` exceeds this value.
    pub blowup_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            x_max: 50.0,
            blowup_threshold: 1e8,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(OdeError::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos(self.rel_tol, "rel_tol")?;
        pos(self.abs_tol, "abs_tol")?;
        pos(self.max_step, "max_step")?;
        pos(self.x_max, "x_max")?;
        pos(self.blowup_threshold, "blowup_threshold")?;
        Ok(())
    }

    fn rk_options(&self) -> rk::Options {
        rk::Options {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            h_max: self.max_step,
            x_end: self.x_max,
        }
    }
}

/// Why a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Reached the configured horizon.
    Horizon,
    /// `|u|` crossed the blow-up threshold.
    Blowup,
    /// Truncated at a located critical point of `u`.
    CriticalPoint,
    /// The step-size controller underflowed.
    StepSizeUnderflow,
    /// The internal step budget was exhausted.
    MaxSteps,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::Blowup => "blowup",
            Termination::CriticalPoint => "critical-point",
            Termination::StepSizeUnderflow => "step-size-underflow",
            Termination::MaxSteps => "max-steps",
        }
    }
}

/// Step statistics of a finished trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMeta {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub termination: Termination,
}

/// A dense-output trajectory of the augmented system. The solution can be
/// sampled anywhere between `x_lo` and `x_hi`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lambda: f64,
    raw: rk::RawTrajectory<8>,
    x_end: f64,
    meta: TrajectoryMeta,
}

impl Trajectory {
    fn new(lambda: f64, raw: rk::RawTrajectory<8>, x_end: f64, termination: Termination) -> Self {
        let meta = TrajectoryMeta {
            accepted: raw.accepted,
            rejected: raw.rejected,
            min_step: raw.min_step,
            max_step: raw.max_step,
            termination,
        };
        Self {
            lambda,
            raw,
            x_end,
            meta,
        }
    }

    pub fn x_lo(&self) -> f64 {
        self.raw.x0
    }

    pub fn x_hi(&self) -> f64 {
        self.x_end
    }

    pub fn termination(&self) -> Termination {
        self.meta.termination
    }

    pub fn meta(&self) -> TrajectoryMeta {
        self.meta
    }

    /// Interpolate the augmented state at `x` in `[x_lo, x_hi]`.
    pub fn sample(&self, x: f64) -> AugmentedState {
        assert!(
            x >= self.x_lo() - 1e-12 && x <= self.x_hi() + 1e-12,
            "sample abscissa {x} outside [{}, {}]",
            self.x_lo(),
            self.x_hi()
        );
        let x = x.clamp(self.x_lo(), self.x_hi());
        AugmentedState::from_raw(x, &self.raw.eval(x))
    }

    pub fn final_state(&self) -> AugmentedState {
        self.sample(self.x_hi())
    }

    /// The augmented state at every accepted step boundary up to `x_hi`,
    /// starting with the initial state and ending exactly at `x_hi`.
    pub fn states(&self) -> Vec<AugmentedState> {
        let mut out = vec![AugmentedState::from_raw(self.raw.x0, &self.raw.y0)];
        for step in &self.raw.steps {
            if step.x1() <= self.x_end {
                out.push(AugmentedState::from_raw(step.x1(), &step.y1));
            }
        }
        if out.last().unwrap().phase.x < self.x_end {
            out.push(self.final_state());
        }
        out
    }
}

/// Right-hand side of the first-order form of
/// `u'''' = 2 u u'' + u'^2 - 2 lambda u^3`
/// augmented with the four quadrature accumulators.
///
/// Layout: `[u', u'', u''', u'''', u''^2, u'' u^2, u^4, u u'^2]`.
pub fn el_rhs(s: &PhaseState, lambda: f64) -> [f64; 8] {
    let (u, du, d2u, d3u) = (s.u, s.du, s.d2u, s.d3u);
    let d4u = 2.0 * u * d2u + du * du - 2.0 * lambda * u * u * u;
    [
        du,
        d2u,
        d3u,
        d4u,
        d2u * d2u,
        d2u * u * u,
        u * u * u * u,
        u * du * du,
    ]
}

fn rhs_fn(lambda: f64) -> impl Fn(f64, &[f64; 8]) -> [f64; 8] {
    move |x, y| el_rhs(&PhaseState::new(x, y[0], y[1], y[2], y[3]), lambda)
}

fn map_raw_termination(t: rk::RawTermination, halted_means: Termination) -> Termination {
    match t {
        rk::RawTermination::Horizon => Termination::Horizon,
        rk::RawTermination::Halted => halted_means,
        rk::RawTermination::StepSizeUnderflow => Termination::StepSizeUnderflow,
        rk::RawTermination::MaxSteps => Termination::MaxSteps,
    }
}

/// Integrate the augmented system from `init` (accumulators starting at
/// zero) until the horizon, blow-up, step-size underflow, or the step
/// budget, whichever comes first.
pub fn integrate(
    init: &PhaseState,
    lambda: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    cfg.validate()?;
    if !init.is_finite() || !lambda.is_finite() {
        return Err(OdeError::NonFinite);
    }
    if init.x >= cfg.x_max {
        return Err(OdeError::StartBeyondHorizon {
            x: init.x,
            x_max: cfg.x_max,
        });
    }
    let y0 = [init.u, init.du, init.d2u, init.d3u, 0.0, 0.0, 0.0, 0.0];
    let threshold = cfg.blowup_threshold;
    let raw = rk::integrate_raw(rhs_fn(lambda), init.x, y0, &cfg.rk_options(), |step| {
        step.y1[0].abs() > threshold
    });
    let termination = map_raw_termination(raw.termination, Termination::Blowup);
    let x_end = raw.x_last();
    Ok(Trajectory::new(lambda, raw, x_end, termination))
}

/// Outcome of a search for the first positive critical point.
#[derive(Debug, Clone)]
pub enum FirstCritical {
    /// A critical point was found at `t`; the trajectory is truncated there.
    Found { t: f64, trajectory: Trajectory },
    /// No critical point before the trajectory ended; the trajectory's
    /// termination reason says why.
    NotFound { trajectory: Trajectory },
}

/// Launch `u(0) = 1, u'(0) = 0, u''(0) = -a, u'''(0) = 0` and locate the
/// first `x > 0` with `u'(x) = 0`. A critical point is detected as a sign
/// change of `u'` across an accepted step and then bisected on the dense
/// interpolant.
pub fn first_critical_point(
    a: f64,
    lambda: f64,
    cfg: &IntegratorConfig,
) -> Result<FirstCritical, OdeError> {
    cfg.validate()?;
    if !a.is_finite() || a <= 0.0 {
        return Err(OdeError::NonPositiveShootParameter { a });
    }
    if !lambda.is_finite() {
        return Err(OdeError::NonFinite);
    }

    let y0 = [1.0, 0.0, -a, 0.0, 0.0, 0.0, 0.0, 0.0];
    let threshold = cfg.blowup_threshold;
    let mut event = false;
    let raw = rk::integrate_raw(rhs_fn(lambda), 0.0, y0, &cfg.rk_options(), |step| {
        if step.y1[1] >= 0.0 && step.x1() > EVENT_X_MIN {
            event = true;
            return true;
        }
        step.y1[0].abs() > threshold
    });

    if event {
        let step = raw.steps.last().expect("event implies an accepted step");
        let xa = step.x0.max(EVENT_X_MIN);
        let t = rk::bisect_component_zero(step, 1, xa, step.x1(), EVENT_X_TOL);
        let trajectory = Trajectory::new(lambda, raw, t, Termination::CriticalPoint);
        Ok(FirstCritical::Found { t, trajectory })
    } else {
        let termination = map_raw_termination(raw.termination, Termination::Blowup);
        let x_end = raw.x_last();
        let trajectory = Trajectory::new(lambda, raw, x_end, termination);
        Ok(FirstCritical::NotFound { trajectory })
    }
}
