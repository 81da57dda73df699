//! Embedded Dormand-Prince 5(4) integrator with fourth-order dense output
//! and proportional-integral step-size control.
//!
//! The engine is generic over the state dimension and knows nothing about
//! the systems built on top of it. A halt callback inspects each accepted
//! step and may stop the integration; the dense interpolant of the final
//! step then supports event localization by bisection.

/// Hard cap on total (accepted plus rejected) steps.
const MAX_STEPS: usize = 5_000_000;

/// Below this fraction of the local scale the step size is considered
/// degenerate and the integration stops.
const UNDERFLOW_FACTOR: f64 = 1e-14;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
/// Largest factor by which a step may shrink (reciprocal form).
const FACC1: f64 = 5.0;
/// Largest factor by which a step may grow (reciprocal form).
const FACC2: f64 = 0.1;

const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Reason an integration loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawTermination {
    /// Reached the end of the integration interval.
    Horizon,
    /// The halt callback fired after an accepted step.
    Halted,
    /// The controller drove the step size below machine resolution.
    StepSizeUnderflow,
    /// Exceeded the internal step budget.
    MaxSteps,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub x_end: f64,
}

/// One accepted step together with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub x0: f64,
    pub h: f64,
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }

    /// Evaluate the interpolant at `x` in `[x0, x0 + h]`.
    pub fn eval(&self, x: f64) -> [f64; N] {
        let theta = (x - self.x0) / self.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + th1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + th1 * self.cont[4][i])));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RawTrajectory<const N: usize> {
    pub x0: f64,
    pub y0: [f64; N],
    pub steps: Vec<DenseStep<N>>,
    pub termination: RawTermination,
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl<const N: usize> RawTrajectory<N> {
    pub fn x_last(&self) -> f64 {
        self.steps.last().map_or(self.x0, |s| s.x1())
    }

    /// Interpolate the solution at `x` in `[x0, x_last]`.
    pub fn eval(&self, x: f64) -> [f64; N] {
        if self.steps.is_empty() || x <= self.x0 {
            return self.y0;
        }
        let idx = self
            .steps
            .partition_point(|s| s.x1() < x)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(x)
    }
}

/// Locate a sign change of component `comp` inside one accepted step by
/// bisection on the dense interpolant, down to an interval of width `x_tol`.
pub fn bisect_component_zero<const N: usize>(
    step: &DenseStep<N>,
    comp: usize,
    mut xa: f64,
    mut xb: f64,
    x_tol: f64,
) -> f64 {
    let g = |x: f64| step.eval(x)[comp];
    let mut ga = g(xa);
    if ga == 0.0 {
        return xa;
    }
    if g(xb) == 0.0 {
        return xb;
    }
    while xb - xa > x_tol {
        let xm = 0.5 * (xa + xb);
        let gm = g(xm);
        if gm == 0.0 {
            return xm;
        }
        if (gm < 0.0) == (ga < 0.0) {
            xa = xm;
            ga = gm;
        } else {
            xb = xm;
        }
    }
    0.5 * (xa + xb)
}

fn initial_step<const N: usize, F>(f: &F, x0: f64, y0: &[f64; N], f0: &[f64; N], opts: &Options) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sc = |i: usize| opts.abs_tol + opts.rel_tol * y0[i].abs();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        d0 += (y0[i] / sc(i)).powi(2);
        d1 += (f0[i] / sc(i)).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(opts.h_max);

    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * f0[i];
    }
    let f1 = f(x0 + h0, &y1);
    let mut d2 = 0.0;
    for i in 0..N {
        d2 += ((f1[i] - f0[i]) / sc(i)).powi(2);
    }
    let d2 = (d2 / N as f64).sqrt() / h0;

    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.h_max)
}

/// Integrate `y' = f(x, y)` from `(x0, y0)` until the horizon `opts.x_end`,
/// the halt callback fires, the step size underflows, or the step budget is
/// exhausted. Every accepted step is retained with its dense output.
pub fn integrate_raw<const N: usize, F, H>(
    f: F,
    x0: f64,
    y0: [f64; N],
    opts: &Options,
    mut halt: H,
) -> RawTrajectory<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    H: FnMut(&DenseStep<N>) -> bool,
{
    let mut traj = RawTrajectory {
        x0,
        y0,
        steps: Vec::new(),
        termination: RawTermination::Horizon,
        accepted: 0,
        rejected: 0,
        min_step: f64::INFINITY,
        max_step: 0.0,
    };
    if x0 >= opts.x_end {
        return traj;
    }

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = initial_step(&f, x, &y, &k1, opts);
    let mut facold: f64 = 1e-4;

    traj.termination = loop {
        if traj.accepted + traj.rejected >= MAX_STEPS {
            break RawTermination::MaxSteps;
        }
        let mut last = false;
        if x + 1.01 * h >= opts.x_end {
            h = opts.x_end - x;
            last = true;
        }
        if h < UNDERFLOW_FACTOR * x.abs().max(1.0) {
            break RawTermination::StepSizeUnderflow;
        }

        let mut yt = [0.0; N];
        for i in 0..N {
            yt[i] = y[i] + h * (A21 * k1[i]);
        }
        let k2 = f(x + C2 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(x + C3 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(x + C4 * h, &yt);
        for i in 0..N {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(x + C5 * h, &yt);
        for i in 0..N {
            yt[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(x + h, &yt);

        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(x + h, &y1);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            traj.rejected += 1;
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let step = DenseStep { x0: x, h, y1, cont };
            traj.accepted += 1;
            traj.min_step = traj.min_step.min(h);
            traj.max_step = traj.max_step.max(h);
            x = if last { opts.x_end } else { x + h };
            y = y1;
            k1 = k7;
            traj.steps.push(step);
            if halt(traj.steps.last().unwrap()) {
                break RawTermination::Halted;
            }
            if last {
                break RawTermination::Horizon;
            }
            let fac11 = err.powf(EXPO1);
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = err.max(1e-4);
            h = (h / fac).min(opts.h_max);
        } else {
            traj.rejected += 1;
            let fac11 = err.powf(EXPO1);
            h /= (fac11 / SAFE).min(FACC1);
        }
    };
    traj
}
