//! The two shooting schemes for the quotient minimization, the root solve
//! that pins the sharp constant, and dense sampling of the converged
//! minimizer over one full period.
//!
//! Scheme one minimizes the quotient over the launch curvature `a` at fixed
//! multiplier `lambda` by a scan plus golden-section refinement. Scheme two
//! fixes `a = sqrt(lambda)`, which balances the conserved first integral to
//! zero; the sharp constant is the root of `g(lambda) = Q(lambda) + lambda`
//! under that scheme, solved by bisection with regula-falsi acceleration
//! once the bracket is small.

use crate::functionals::{breakdown_from_trajectory, FunctionalBreakdown, SampledFunction};
use crate::ode::{first_critical_point, FirstCritical, IntegratorConfig, Termination, Trajectory};
use crate::oracles::first_integral_residual;
use crate::{FunctionalError, OdeError};
use serde::Serialize;
use thiserror::Error;

/// Scan grid for the launch-curvature minimization: this many
/// logarithmically spaced points on `[SCAN_LO, SCAN_HI]`.
const SCAN_POINTS: usize = 30;
const SCAN_LO: f64 = 0.05;
const SCAN_HI: f64 = 1.5;

/// Width to which the golden-section bracket on `a` is reduced.
const GOLDEN_TOL: f64 = 1e-8;

/// Bracket width below which the root solve switches from plain bisection
/// to alternating regula-falsi steps.
const FALSI_WIDTH: f64 = 1e-2;

/// How far a failing bracket endpoint is pulled inward before one retry.
const RETRACT: f64 = 1e-3;

/// Iteration cap for the root solve.
const MAX_ROOT_ITERS: usize = 60;

/// Agreement required between the two schemes at the root, as a multiple
/// of the root tolerance.
const CROSS_CHECK_FACTOR: f64 = 10.0;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error)]
pub enum ShootError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("no launch curvature in the scan range yields a critical point at lambda = {lambda}")]
    NoAdmissibleShot { lambda: f64 },
    #[error("bracket invalid: g({lo}) = {g_lo} and g({hi}) = {g_hi} do not change sign")]
    BracketInvalid {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("shot failed during the root solve at lambda = {lambda} with status {status:?}")]
    InnerShotFailure { lambda: f64, status: ShotStatus },
    #[error("the two schemes disagree at the root: |J - J~| = {gap} exceeds {limit}")]
    MethodDisagreement { gap: f64, limit: f64 },
    #[error("operation requires a successful shot, got status {status:?}")]
    ShotNotFound { status: ShotStatus },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

/// How a single shot ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotStatus {
    /// A first critical point was found.
    Found,
    /// The trajectory reached the horizon (or ran out of steps) without a
    /// critical point.
    NoCriticalPoint,
    /// The trajectory blew up before any critical point.
    Blowup,
}

impl ShotStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShotStatus::Found => "found",
            ShotStatus::NoCriticalPoint => "no-critical-point",
            ShotStatus::Blowup => "blowup",
        }
    }
}

/// One shot of the launch family: parameters, outcome, the quotient
/// breakdown over the half period when found, and the trajectory itself.
#[derive(Debug, Clone)]
pub struct ShotResult {
    pub a: f64,
    pub lambda: f64,
    /// Half period: abscissa of the first critical point, when found.
    pub t: Option<f64>,
    pub breakdown: Option<FunctionalBreakdown>,
    pub status: ShotStatus,
    pub trajectory: Trajectory,
}

impl ShotResult {
    pub fn is_found(&self) -> bool {
        self.status == ShotStatus::Found
    }

    /// The quotient over the half period, when found.
    pub fn q(&self) -> Option<f64> {
        self.breakdown.map(|b| b.q)
    }
}

/// Launch with curvature `a` at multiplier `lambda` and evaluate the
/// quotient up to the first critical point.
pub fn shoot(a: f64, lambda: f64, cfg: &IntegratorConfig) -> Result<ShotResult, ShootError> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda >= 0.25 {
        return Err(ShootError::ParameterDomain(format!(
            "lambda must lie in (0, 1/4), got {lambda}"
        )));
    }
    match first_critical_point(a, lambda, cfg)? {
        FirstCritical::Found { t, trajectory } => {
            let breakdown = breakdown_from_trajectory(&trajectory, t)?;
            Ok(ShotResult {
                a,
                lambda,
                t: Some(t),
                breakdown: Some(breakdown),
                status: ShotStatus::Found,
                trajectory,
            })
        }
        FirstCritical::NotFound { trajectory } => {
            let status = match trajectory.termination() {
                Termination::Blowup => ShotStatus::Blowup,
                _ => ShotStatus::NoCriticalPoint,
            };
            Ok(ShotResult {
                a,
                lambda,
                t: None,
                breakdown: None,
                status,
                trajectory,
            })
        }
    }
}

/// Golden-section minimization on `[lo, hi]`; ties move the bracket left,
/// so of equally good minima the smaller abscissa wins.
fn golden_min(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut b = hi - INV_PHI * (hi - lo);
    let mut c = lo + INV_PHI * (hi - lo);
    let mut fb = f(b);
    let mut fc = f(c);
    while hi - lo > tol {
        if fb <= fc {
            hi = c;
            c = b;
            fc = fb;
            b = hi - INV_PHI * (hi - lo);
            fb = f(b);
        } else {
            lo = b;
            b = c;
            fb = fc;
            c = lo + INV_PHI * (hi - lo);
            fc = f(c);
        }
    }
    0.5 * (lo + hi)
}

/// Scheme one: minimize the half-period quotient over the launch curvature
/// at fixed `lambda` in `(9/64, 1/4)`. Returns the minimizing curvature and
/// its shot. Deterministic: fixed scan grid, then golden section.
pub fn j_of_lambda(lambda: f64, cfg: &IntegratorConfig) -> Result<(f64, ShotResult), ShootError> {
    if !lambda.is_finite() || lambda <= 9.0 / 64.0 || lambda >= 0.25 {
        return Err(ShootError::ParameterDomain(format!(
            "lambda must lie in (9/64, 1/4) for the curvature minimization, got {lambda}"
        )));
    }
    cfg.validate()?;
    let q_of = |a: f64| match shoot(a, lambda, cfg) {
        Ok(s) if s.is_found() => s.q().unwrap(),
        _ => f64::INFINITY,
    };
    let ratio = SCAN_HI / SCAN_LO;
    let scan: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| SCAN_LO * ratio.powf(i as f64 / (SCAN_POINTS as f64 - 1.0)))
        .collect();
    let qs: Vec<f64> = scan.iter().map(|&a| q_of(a)).collect();
    let k = qs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap();
    if !qs[k].is_finite() {
        return Err(ShootError::NoAdmissibleShot { lambda });
    }
    let lo = if k > 0 && qs[k - 1].is_finite() {
        scan[k - 1]
    } else {
        scan[k] * 0.5
    };
    let hi = if k + 1 < scan.len() && qs[k + 1].is_finite() {
        scan[k + 1]
    } else {
        scan[k] * 2.0
    };
    let a_star = golden_min(lo, hi, GOLDEN_TOL, q_of);
    let shot = shoot(a_star, lambda, cfg)?;
    if !shot.is_found() {
        return Err(ShootError::NoAdmissibleShot { lambda });
    }
    Ok((a_star, shot))
}

/// Scheme two: the balanced launch `a = sqrt(lambda)`, for `lambda` in
/// `(0, 1/4)`, which makes the conserved first integral vanish.
pub fn j_tilde(lambda: f64, cfg: &IntegratorConfig) -> Result<ShotResult, ShootError> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda >= 0.25 {
        return Err(ShootError::ParameterDomain(format!(
            "lambda must lie in (0, 1/4), got {lambda}"
        )));
    }
    shoot(lambda.sqrt(), lambda, cfg)
}

/// Result of the root solve for the sharp constant.
#[derive(Debug, Clone)]
pub struct InfimumResult {
    /// The sharp constant, `-lambda_root`.
    pub i_value: f64,
    /// Multiplier at which the balanced scheme closes.
    pub lambda_root: f64,
    /// The balanced shot at the root.
    pub shot: ShotResult,
    /// Minimizing launch curvature from scheme one at the root.
    pub a_star: f64,
    /// Scheme-one quotient at the root.
    pub j_value: f64,
    /// `|J - J~|` at the root.
    pub method_gap: f64,
}

/// Solve `g(lambda) = Q~(lambda) + lambda = 0` on `bracket` to width
/// `root_tol` and cross-validate the two schemes at the root.
///
/// A failing bracket endpoint is retracted inward by `1e-3` and retried
/// once. Bisection runs until the bracket is below `1e-2`, after which
/// regula-falsi steps alternate with bisection steps.
pub fn find_infimum(
    cfg: &IntegratorConfig,
    bracket: (f64, f64),
    root_tol: f64,
) -> Result<InfimumResult, ShootError> {
    cfg.validate()?;
    if !root_tol.is_finite() || root_tol <= 0.0 {
        return Err(ShootError::ParameterDomain(format!(
            "root tolerance must be positive, got {root_tol}"
        )));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi && hi < 0.25) {
        return Err(ShootError::ParameterDomain(format!(
            "bracket must satisfy 0 < lo < hi < 1/4, got ({lo}, {hi})"
        )));
    }

    let g_at = |lambda: f64| -> Result<f64, ShootError> {
        let s = j_tilde(lambda, cfg)?;
        match s.q() {
            Some(q) => Ok(q + lambda),
            None => Err(ShootError::InnerShotFailure {
                lambda,
                status: s.status,
            }),
        }
    };

    let mut g_lo = match g_at(lo) {
        Ok(v) => v,
        Err(_) => {
            lo += RETRACT;
            g_at(lo)?
        }
    };
    let mut g_hi = match g_at(hi) {
        Ok(v) => v,
        Err(_) => {
            hi -= RETRACT;
            g_at(hi)?
        }
    };
    if lo >= hi || g_lo * g_hi > 0.0 {
        return Err(ShootError::BracketInvalid { lo, hi, g_lo, g_hi });
    }

    let mut iters = 0;
    while hi - lo > root_tol && iters < MAX_ROOT_ITERS {
        iters += 1;
        let width = hi - lo;
        let xm = if width < FALSI_WIDTH && iters % 2 == 1 && g_hi != g_lo {
            let x = hi - g_hi * width / (g_hi - g_lo);
            x.clamp(lo + 0.05 * width, hi - 0.05 * width)
        } else {
            0.5 * (lo + hi)
        };
        let gm = g_at(xm)?;
        if gm == 0.0 {
            lo = xm;
            hi = xm;
            break;
        }
        if (gm < 0.0) == (g_lo < 0.0) {
            lo = xm;
            g_lo = gm;
        } else {
            hi = xm;
            g_hi = gm;
        }
    }

    let lambda_root = 0.5 * (lo + hi);
    let shot = j_tilde(lambda_root, cfg)?;
    if !shot.is_found() {
        return Err(ShootError::InnerShotFailure {
            lambda: lambda_root,
            status: shot.status,
        });
    }

    let (a_star, m1) = j_of_lambda(lambda_root, cfg)?;
    let j_value = m1.q().unwrap();
    let method_gap = (j_value - shot.q().unwrap()).abs();
    let limit = CROSS_CHECK_FACTOR * root_tol;
    if method_gap > limit {
        return Err(ShootError::MethodDisagreement {
            gap: method_gap,
            limit,
        });
    }

    Ok(InfimumResult {
        i_value: -lambda_root,
        lambda_root,
        shot,
        a_star,
        j_value,
        method_gap,
    })
}

/// One sample of the minimizer over a full period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub d3u: f64,
    /// Value of the conserved first integral at this sample, evaluated with
    /// the profile's own constant.
    pub h_residual: f64,
}

/// The minimizer sampled uniformly over one full period `[-T, T]`.
#[derive(Debug, Clone)]
pub struct MinimizerProfile {
    pub i_value: f64,
    pub t: f64,
    pub a: f64,
    pub rows: Vec<ProfileRow>,
}

impl MinimizerProfile {
    /// The profile as a sampled function carrying its second derivative.
    pub fn to_sampled(&self) -> SampledFunction {
        SampledFunction::new(
            self.rows.iter().map(|r| r.x).collect(),
            self.rows.iter().map(|r| r.u).collect(),
            Some(self.rows.iter().map(|r| r.d2u).collect()),
        )
        .expect("profile grid is strictly increasing")
    }

    pub fn max_h_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.h_residual.abs())
            .fold(0.0, f64::max)
    }
}

/// Sample a found shot over the full period `[-T, T]` by even reflection of
/// `u` and `u''` (odd reflection of `u'` and `u'''`) about the launch.
pub fn minimizer_profile(
    shot: &ShotResult,
    n_samples: usize,
) -> Result<MinimizerProfile, ShootError> {
    if !shot.is_found() {
        return Err(ShootError::ShotNotFound {
            status: shot.status,
        });
    }
    if n_samples < 2 {
        return Err(ShootError::ParameterDomain(format!(
            "need at least 2 profile samples, got {n_samples}"
        )));
    }
    let t = shot.t.expect("found shot has a half period");
    let lambda = shot.lambda;
    let i_value = -lambda;
    let h = 2.0 * t / (n_samples as f64 - 1.0);
    let rows = (0..n_samples)
        .map(|k| {
            let x = (-t + k as f64 * h).clamp(-t, t);
            let s = shot.trajectory.sample(x.abs());
            let sign = if x < 0.0 { -1.0 } else { 1.0 };
            let mut phase = s.phase;
            phase.x = x;
            phase.du *= sign;
            phase.d3u *= sign;
            ProfileRow {
                x,
                u: phase.u,
                du: phase.du,
                d2u: phase.d2u,
                d3u: phase.d3u,
                h_residual: first_integral_residual(&phase, i_value),
            }
        })
        .collect();
    Ok(MinimizerProfile {
        i_value,
        t,
        a: shot.a,
        rows,
    })
}

/// One row of the two-scheme comparison table at a fixed multiplier.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// Scheme-one minimizing curvature.
    pub a_star: Option<f64>,
    /// Scheme-one half period.
    pub t1: Option<f64>,
    /// Scheme-one quotient.
    pub j: Option<f64>,
    /// Balanced-scheme half period.
    pub t2: Option<f64>,
    /// Balanced-scheme quotient.
    pub j_tilde: Option<f64>,
    /// `J~ + lambda`, the root-solve objective.
    pub g: Option<f64>,
    /// `"ok"` when both schemes produced a shot, otherwise the first
    /// failure.
    pub status: String,
}

/// Evaluate both schemes at one multiplier. Failures never abort the row;
/// they are recorded in its status.
pub fn sweep_row(lambda: f64, cfg: &IntegratorConfig) -> SweepRow {
    let mut row = SweepRow {
        lambda,
        a_star: None,
        t1: None,
        j: None,
        t2: None,
        j_tilde: None,
        g: None,
        status: String::from("ok"),
    };
    let mut failure: Option<String> = None;
    match j_of_lambda(lambda, cfg) {
        Ok((a_star, shot)) => {
            row.a_star = Some(a_star);
            row.t1 = shot.t;
            row.j = shot.q();
        }
        Err(e) => failure = Some(e.to_string()),
    }
    match j_tilde(lambda, cfg) {
        Ok(shot) if shot.is_found() => {
            row.t2 = shot.t;
            row.j_tilde = shot.q();
            row.g = shot.q().map(|q| q + lambda);
        }
        Ok(shot) => {
            failure.get_or_insert_with(|| format!("balanced shot: {}", shot.status.as_str()));
        }
        Err(e) => {
            failure.get_or_insert_with(|| e.to_string());
        }
    }
    if let Some(f) = failure {
        row.status = f;
    }
    row
}
