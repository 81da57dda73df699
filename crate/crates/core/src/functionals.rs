//! Evaluation of the Rayleigh quotient `Q = (A - B) / C` with
//! `A = int u''^2`, `B = int u'' u^2`, `C = int u^4`, both from integrator
//! accumulators and from sampled functions, plus the scaling and Nehari
//! normalizations and an integration-by-parts self-check.
//!
//! Sampled-function quadrature uses composite Simpson (with a 3/8-rule tail
//! when the interval count is odd) over a uniform grid, and five-point
//! finite-difference stencils when derivatives are not supplied. The
//! combination converges at least at second order in the grid spacing; on
//! smooth data the observed order is fourth.

use crate::ode::Trajectory;
use thiserror::Error;

/// Relative deviation from the mean spacing above which a grid is rejected
/// as non-uniform.
const UNIFORMITY_REL_TOL: f64 = 1e-8;

/// Minimum number of samples for the five-point stencils.
const MIN_SAMPLES: usize = 5;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("need at least {min} samples, got {got}")]
    GridTooShort { got: usize, min: usize },
    #[error("grid is not strictly increasing at index {index}")]
    GridNotIncreasing { index: usize },
    #[error("grid spacing is not uniform at index {index}")]
    NonUniformGrid { index: usize },
    #[error("grid and values have different lengths ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("undefined quotient: the quartic integral vanishes")]
    UndefinedQuotient,
    #[error("Nehari normalization undefined: requires A > 0 and B > 0, got A = {a}, B = {b}")]
    NehariUndefined { a: f64, b: f64 },
    #[error("scaling factor must be positive and finite, got {sigma}")]
    InvalidSigma { sigma: f64 },
    #[error("evaluation abscissa {x} outside trajectory range [{lo}, {hi}]")]
    XOutOfRange { x: f64, lo: f64, hi: f64 },
}

/// The three integrals of the quotient over an interval, and the quotient
/// itself. `q` is always derived from the stored integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalBreakdown {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q: f64,
    pub interval: (f64, f64),
}

impl FunctionalBreakdown {
    pub fn new(a: f64, b: f64, c: f64, interval: (f64, f64)) -> Result<Self, FunctionalError> {
        if !(c > 0.0) {
            return Err(FunctionalError::UndefinedQuotient);
        }
        Ok(Self {
            a,
            b,
            c,
            q: (a - b) / c,
            interval,
        })
    }
}

/// A function sampled on a strictly increasing grid, optionally with its
/// second derivative at the same points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    derivs: Option<Vec<f64>>,
}

impl SampledFunction {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        derivs: Option<Vec<f64>>,
    ) -> Result<Self, FunctionalError> {
        if grid.len() != values.len() {
            return Err(FunctionalError::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        if let Some(d) = &derivs {
            if d.len() != grid.len() {
                return Err(FunctionalError::LengthMismatch {
                    grid: grid.len(),
                    values: d.len(),
                });
            }
        }
        if grid.len() < 2 {
            return Err(FunctionalError::GridTooShort {
                got: grid.len(),
                min: 2,
            });
        }
        for i in 1..grid.len() {
            if !(grid[i] > grid[i - 1]) {
                return Err(FunctionalError::GridNotIncreasing { index: i });
            }
        }
        Ok(Self {
            grid,
            values,
            derivs,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> Option<&[f64]> {
        self.derivs.as_deref()
    }
}

/// Mean spacing of a uniform grid; rejects grids whose spacing deviates by
/// more than a relative `1e-8`.
pub(crate) fn uniform_spacing(grid: &[f64]) -> Result<f64, FunctionalError> {
    let n = grid.len();
    let h = (grid[n - 1] - grid[0]) / (n as f64 - 1.0);
    for i in 1..n {
        let hi = grid[i] - grid[i - 1];
        if !(hi > 0.0) {
            return Err(FunctionalError::GridNotIncreasing { index: i });
        }
        if (hi - h).abs() > UNIFORMITY_REL_TOL * h {
            return Err(FunctionalError::NonUniformGrid { index: i });
        }
    }
    Ok(h)
}

/// Composite Simpson rule on a uniform grid, closing an odd interval count
/// with the 3/8 rule on the final three intervals.
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 4 || (n - 1) % 2 == 0);
    let mut total = 0.0;
    let mut m = n;
    if (n - 1) % 2 == 1 {
        total += 0.375 * h * (values[n - 4] + 3.0 * values[n - 3] + 3.0 * values[n - 2] + values[n - 1]);
        m = n - 3;
    }
    let mut k = 0;
    while k + 2 < m {
        total += h / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
        k += 2;
    }
    total
}

fn dot5(w: &[f64; 5], v: &[f64]) -> f64 {
    w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3] + w[4] * v[4]
}

/// Five-point first derivative on a uniform grid. With `periodic` the first
/// and last samples are taken to represent the same periodic point and the
/// stencil wraps; otherwise one-sided stencils cover the boundary.
pub(crate) fn fd_first(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let d = 12.0 * h;
    if periodic {
        let m = n - 1;
        for i in 0..m {
            let v = |k: isize| values[(i as isize + k).rem_euclid(m as isize) as usize];
            out[i] = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / d;
        }
        out[m] = out[0];
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = if i >= 2 && i + 2 < n {
                (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / d
            } else if i == 0 {
                dot5(&[-25.0, 48.0, -36.0, 16.0, -3.0], &values[..5]) / d
            } else if i == 1 {
                dot5(&[-3.0, -10.0, 18.0, -6.0, 1.0], &values[..5]) / d
            } else if i == n - 2 {
                dot5(&[-1.0, 6.0, -18.0, 10.0, 3.0], &values[n - 5..]) / d
            } else {
                dot5(&[3.0, -16.0, 36.0, -48.0, 25.0], &values[n - 5..]) / d
            };
        }
    }
    out
}

/// Five-point second derivative on a uniform grid; boundary handling as in
/// `fd_first`.
pub(crate) fn fd_second(values: &[f64], h: f64, periodic: bool) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let d = 12.0 * h * h;
    if periodic {
        let m = n - 1;
        for i in 0..m {
            let v = |k: isize| values[(i as isize + k).rem_euclid(m as isize) as usize];
            out[i] = (-v(-2) + 16.0 * v(-1) - 30.0 * v(0) + 16.0 * v(1) - v(2)) / d;
        }
        out[m] = out[0];
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = if i >= 2 && i + 2 < n {
                (-values[i - 2] + 16.0 * values[i - 1] - 30.0 * values[i] + 16.0 * values[i + 1]
                    - values[i + 2])
                    / d
            } else if i == 0 {
                dot5(&[35.0, -104.0, 114.0, -56.0, 11.0], &values[..5]) / d
            } else if i == 1 {
                dot5(&[11.0, -20.0, 6.0, 4.0, -1.0], &values[..5]) / d
            } else if i == n - 2 {
                dot5(&[-1.0, 4.0, 6.0, -20.0, 11.0], &values[n - 5..]) / d
            } else {
                dot5(&[11.0, -56.0, 114.0, -104.0, 35.0], &values[n - 5..]) / d
            };
        }
    }
    out
}

/// Read the breakdown off a trajectory's running accumulators at `x_hi`.
pub fn breakdown_from_trajectory(
    traj: &Trajectory,
    x_hi: f64,
) -> Result<FunctionalBreakdown, FunctionalError> {
    if !(x_hi >= traj.x_lo() && x_hi <= traj.x_hi()) {
        return Err(FunctionalError::XOutOfRange {
            x: x_hi,
            lo: traj.x_lo(),
            hi: traj.x_hi(),
        });
    }
    let s = traj.sample(x_hi);
    FunctionalBreakdown::new(s.acc_a, s.acc_b, s.acc_c, (traj.x_lo(), x_hi))
}

/// Evaluate the quotient integrals of a sampled function. Supplied second
/// derivatives are used when present; otherwise they are estimated by the
/// five-point stencils. Needs at least five samples on a uniform grid.
pub fn q_of_sampled(
    f: &SampledFunction,
    periodic: bool,
) -> Result<FunctionalBreakdown, FunctionalError> {
    let n = f.len();
    if n < MIN_SAMPLES {
        return Err(FunctionalError::GridTooShort {
            got: n,
            min: MIN_SAMPLES,
        });
    }
    let h = uniform_spacing(&f.grid)?;
    let owned;
    let d2: &[f64] = match &f.derivs {
        Some(d) => d,
        None => {
            owned = fd_second(&f.values, h, periodic);
            &owned
        }
    };
    let u = &f.values;
    let a: Vec<f64> = d2.iter().map(|v| v * v).collect();
    let b: Vec<f64> = d2.iter().zip(u).map(|(v, w)| v * w * w).collect();
    let c: Vec<f64> = u.iter().map(|w| w * w * w * w).collect();
    FunctionalBreakdown::new(
        simpson(&a, h),
        simpson(&b, h),
        simpson(&c, h),
        (f.grid[0], f.grid[n - 1]),
    )
}

/// The quotient-invariant rescaling `u_sigma(x) = sigma^2 u(sigma x)`:
/// grid divides by `sigma`, values scale by `sigma^2`, second derivatives
/// by `sigma^4`.
pub fn rescale(f: &SampledFunction, sigma: f64) -> Result<SampledFunction, FunctionalError> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(FunctionalError::InvalidSigma { sigma });
    }
    let s2 = sigma * sigma;
    let s4 = s2 * s2;
    SampledFunction::new(
        f.grid.iter().map(|x| x / sigma).collect(),
        f.values.iter().map(|v| s2 * v).collect(),
        f.derivs
            .as_ref()
            .map(|d| d.iter().map(|v| s4 * v).collect()),
    )
}

/// The amplitude-and-dilation rescaling `u_mu(x) = mu^{1/4} u(mu x)` used by
/// the Nehari normalization: grid divides by `mu`, values scale by
/// `mu^{1/4}`, second derivatives by `mu^{9/4}`.
pub fn nehari_rescale(f: &SampledFunction, mu: f64) -> Result<SampledFunction, FunctionalError> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(FunctionalError::InvalidSigma { sigma: mu });
    }
    let amp = mu.powf(0.25);
    let damp = mu.powf(2.25);
    SampledFunction::new(
        f.grid.iter().map(|x| x / mu).collect(),
        f.values.iter().map(|v| amp * v).collect(),
        f.derivs
            .as_ref()
            .map(|d| d.iter().map(|v| damp * v).collect()),
    )
}

/// The dilation at which the rescaled function satisfies the Nehari
/// balance `B = 2A`: `mu = (B / (2A))^{4/7}`. Requires `A > 0` and `B > 0`.
pub fn nehari_optimal_mu(b: &FunctionalBreakdown) -> Result<f64, FunctionalError> {
    if !(b.a > 0.0) || !(b.b > 0.0) {
        return Err(FunctionalError::NehariUndefined { a: b.a, b: b.b });
    }
    Ok((b.b / (2.0 * b.a)).powf(4.0 / 7.0))
}

/// Residual of the integration-by-parts identity
/// `int u'' u^2 = -2 int u u'^2` for functions whose boundary terms vanish
/// (periodic or compactly supported samples). `u'` is always estimated by
/// finite differences; `u''` uses supplied derivatives when present.
/// Returns `|B + 2 int u u'^2|`.
pub fn parts_identity_residual(
    f: &SampledFunction,
    periodic: bool,
) -> Result<f64, FunctionalError> {
    let n = f.len();
    if n < MIN_SAMPLES {
        return Err(FunctionalError::GridTooShort {
            got: n,
            min: MIN_SAMPLES,
        });
    }
    let h = uniform_spacing(&f.grid)?;
    let d1 = fd_first(&f.values, h, periodic);
    let owned;
    let d2: &[f64] = match &f.derivs {
        Some(d) => d,
        None => {
            owned = fd_second(&f.values, h, periodic);
            &owned
        }
    };
    let u = &f.values;
    let b: Vec<f64> = d2.iter().zip(u).map(|(v, w)| v * w * w).collect();
    let e: Vec<f64> = d1.iter().zip(u).map(|(v, w)| w * v * v).collect();
    Ok((simpson(&b, h) + 2.0 * simpson(&e, h)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IntegratorConfig, PhaseState};
    use std::f64::consts::PI;

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n as f64 - 1.0))
            .collect()
    }

    fn sampled(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> SampledFunction {
        let grid = linspace(lo, hi, n);
        let values = grid.iter().map(|&x| f(x)).collect();
        SampledFunction::new(grid, values, None).unwrap()
    }

    #[test]
    fn stencils_are_exact_on_quartics() {
        let grid = linspace(-1.0, 2.0, 61);
        let h = grid[1] - grid[0];
        let values: Vec<f64> = grid.iter().map(|&x| x.powi(4) - 2.0 * x.powi(3)).collect();
        let d1 = fd_first(&values, h, false);
        let d2 = fd_second(&values, h, false);
        for (i, &x) in grid.iter().enumerate() {
            let e1 = 4.0 * x.powi(3) - 6.0 * x * x;
            let e2 = 12.0 * x * x - 12.0 * x;
            assert!((d1[i] - e1).abs() < 1e-10, "d1 at x={x}: {} vs {e1}", d1[i]);
            assert!((d2[i] - e2).abs() < 1e-8, "d2 at x={x}: {} vs {e2}", d2[i]);
        }
    }

    #[test]
    fn periodic_stencils_match_cosine_derivatives() {
        let n = 513;
        let grid = linspace(0.0, 2.0 * PI, n);
        let h = grid[1] - grid[0];
        let values: Vec<f64> = grid.iter().map(|&x| x.cos()).collect();
        let d1 = fd_first(&values, h, true);
        let d2 = fd_second(&values, h, true);
        for (i, &x) in grid.iter().enumerate() {
            assert!((d1[i] + x.sin()).abs() < 1e-7);
            assert!((d2[i] + x.cos()).abs() < 1e-6);
        }
        assert_eq!(d1[0], d1[n - 1]);
        assert_eq!(d2[0], d2[n - 1]);
    }

    #[test]
    fn simpson_integrates_cubics_exactly_with_any_parity() {
        for n in [5usize, 6, 101, 102] {
            let grid = linspace(0.0, 2.0, n);
            let h = grid[1] - grid[0];
            let values: Vec<f64> = grid.iter().map(|&x| x * x * x - x).collect();
            let exact = 2.0;
            assert!((simpson(&values, h) - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn cosine_quotient_matches_closed_form() {
        let f = sampled(0.0, 2.0 * PI, 2048, f64::cos);
        let bd = q_of_sampled(&f, true).unwrap();
        assert!((bd.a - PI).abs() <= 1e-8, "A={}", bd.a);
        assert!(bd.b.abs() <= 1e-8, "B={}", bd.b);
        assert!((bd.c - 0.75 * PI).abs() <= 1e-8, "C={}", bd.c);
        assert!((bd.q - 4.0 / 3.0).abs() <= 1e-6, "Q={}", bd.q);
    }

    #[test]
    fn quadrature_error_decays_at_least_quadratically() {
        let err = |n: usize| {
            let f = sampled(0.0, 2.0 * PI, n, f64::cos);
            (q_of_sampled(&f, true).unwrap().q - 4.0 / 3.0).abs()
        };
        let e1 = err(65);
        let e2 = err(129);
        assert!(e1 < 1e-3, "e1={e1}");
        assert!(e2 <= e1 / 4.0, "e1={e1} e2={e2}");
    }

    #[test]
    fn constant_function_has_zero_quotient() {
        let f = sampled(0.0, 1.0, 101, |_| 2.0);
        let bd = q_of_sampled(&f, true).unwrap();
        assert_eq!(bd.a, 0.0);
        assert_eq!(bd.b, 0.0);
        assert!((bd.c - 16.0).abs() < 1e-12);
        assert_eq!(bd.q, 0.0);
    }

    #[test]
    fn quotient_is_derived_from_the_stored_integrals() {
        let f = sampled(0.0, 2.0 * PI, 512, f64::cos);
        let bd = q_of_sampled(&f, true).unwrap();
        assert!((bd.q * bd.c - (bd.a - bd.b)).abs() <= 1e-14 * (bd.a.abs() + bd.b.abs() + 1.0));
    }

    #[test]
    fn rest_trajectory_has_undefined_quotient() {
        let cfg = IntegratorConfig {
            x_max: 5.0,
            ..Default::default()
        };
        let traj = integrate(&PhaseState::new(0.0, 0.0, 0.0, 0.0, 0.0), 0.2, &cfg).unwrap();
        assert!(matches!(
            breakdown_from_trajectory(&traj, 5.0),
            Err(FunctionalError::UndefinedQuotient)
        ));
    }

    #[test]
    fn sampled_input_validation_rejects_bad_grids() {
        assert!(matches!(
            SampledFunction::new(vec![0.0, 1.0, 1.0], vec![0.0; 3], None),
            Err(FunctionalError::GridNotIncreasing { index: 2 })
        ));
        assert!(matches!(
            SampledFunction::new(vec![0.0, 1.0], vec![0.0; 3], None),
            Err(FunctionalError::LengthMismatch { .. })
        ));
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0, 3.5], vec![1.0; 4], None).unwrap();
        assert!(matches!(
            q_of_sampled(&f, false),
            Err(FunctionalError::GridTooShort { .. })
        ));
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0, 3.5, 4.0], vec![1.0; 5], None).unwrap();
        assert!(matches!(
            q_of_sampled(&f, false),
            Err(FunctionalError::NonUniformGrid { .. })
        ));
    }

    #[test]
    fn rescale_preserves_the_quotient_and_scales_the_interval() {
        let f = sampled(0.0, 2.0 * PI, 4096, f64::cos);
        let q0 = q_of_sampled(&f, true).unwrap().q;
        for sigma in [0.5, 2.0, 3.0] {
            let g = rescale(&f, sigma).unwrap();
            let bd = q_of_sampled(&g, true).unwrap();
            assert!((bd.q - q0).abs() <= 1e-6, "sigma={sigma} dq={}", bd.q - q0);
            let span = bd.interval.1 - bd.interval.0;
            assert!((span - 2.0 * PI / sigma).abs() < 1e-9);
        }
        assert!(matches!(
            rescale(&f, 0.0),
            Err(FunctionalError::InvalidSigma { .. })
        ));
        let same = rescale(&f, 1.0).unwrap();
        assert_eq!(same, f);
    }

    #[test]
    fn nehari_mu_handles_balance_and_degeneracy() {
        let bd = FunctionalBreakdown::new(2.0, 4.0, 1.0, (0.0, 1.0)).unwrap();
        assert_eq!(nehari_optimal_mu(&bd).unwrap(), 1.0);
        let bd = FunctionalBreakdown::new(1.0, 4.0, 1.0, (0.0, 1.0)).unwrap();
        assert!((nehari_optimal_mu(&bd).unwrap() - 2.0f64.powf(4.0 / 7.0)).abs() < 1e-15);
        let bd = FunctionalBreakdown::new(0.0, 4.0, 1.0, (0.0, 1.0)).unwrap();
        assert!(matches!(
            nehari_optimal_mu(&bd),
            Err(FunctionalError::NehariUndefined { .. })
        ));
        let bd = FunctionalBreakdown::new(1.0, -4.0, 1.0, (0.0, 1.0)).unwrap();
        assert!(nehari_optimal_mu(&bd).is_err());
    }

    #[test]
    fn parts_identity_holds_for_periodic_and_fails_at_boundaries() {
        let f = sampled(0.0, 2.0 * PI, 2048, f64::cos);
        assert!(parts_identity_residual(&f, true).unwrap() <= 1e-6);

        let zero = sampled(0.0, 1.0, 64, |_| 0.0);
        assert_eq!(parts_identity_residual(&zero, false).unwrap(), 0.0);

        let g = sampled(0.0, 0.5 * PI, 2048, |x| 1.0 + x.sin());
        let r = parts_identity_residual(&g, false).unwrap();
        assert!(r >= 0.5, "boundary control residual r={r}");
    }
}
