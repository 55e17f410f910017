//! Complex trajectories `dz/dt = v(z,t)` together with the volume-element
//! ratio `r = dz(t)/dz_start`, which obeys `dr/dt = v'(z,t) r`.
//!
//! For stationary fields `r` must equal `v(z)/v(z_start)`; that identity is
//! not used anywhere in the integration, so it serves as an independent
//! check of the joint ODE.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, DenseSegment, OdeOptions, OdeStop, State};
use crate::systems::StationarySystem;

/// A (possibly time-dependent) complex velocity field with its z-derivative.
pub trait VelocityField: Send + Sync {
    fn velocity(&self, z: Complex64, t: f64) -> Complex64;
    fn velocity_deriv(&self, z: Complex64, t: f64) -> Complex64;

    /// Poles of the field (nodes of the guiding wavefunction).
    fn poles(&self) -> Vec<Complex64> {
        Vec::new()
    }
}

impl VelocityField for StationarySystem {
    fn velocity(&self, z: Complex64, _t: f64) -> Complex64 {
        self.v(z)
    }

    fn velocity_deriv(&self, z: Complex64, _t: f64) -> Complex64 {
        self.dv(z)
    }

    fn poles(&self) -> Vec<Complex64> {
        self.nodes.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Abort once `|v|` exceeds this.
    pub v_max: f64,
    /// Abort once the trajectory comes this close to a pole.
    pub node_guard: f64,
    /// Stop with `Escaped` once `|z|` exceeds this.
    pub escape_radius: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-13,
            h_max: 0.25,
            v_max: 1e8,
            node_guard: 1e-6,
            escape_radius: None,
            max_steps: 2_000_000,
        }
    }
}

impl IntegrationOptions {
    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            h_min: self.h_min,
            h_max: self.h_max,
            max_steps: self.max_steps,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.h_min > 0.0 && self.h_max > 0.0) {
            return Err(Error::InvalidInput(
                "tolerances and step bounds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Return-detection settings used by [`measure_period`] and portrait sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    /// Returns earlier than this are ignored.
    pub t_min: f64,
    pub t_max: f64,
    /// A local minimum of `|z(t) - z_start|` below this counts as closure.
    pub closure_tol: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            t_min: 0.1,
            t_max: 100.0,
            closure_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrajectoryStatus {
    Completed,
    ClosedOrbit,
    PoleAbort,
    StepUnderflow,
    Escaped,
}

impl TrajectoryStatus {
    pub fn is_failure(self) -> bool {
        matches!(
            self,
            TrajectoryStatus::PoleAbort | TrajectoryStatus::StepUnderflow
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingDirection {
    UpToDown,
    DownToUp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub t_cross: f64,
    pub x_cross: f64,
    pub v_cross: Complex64,
    pub r_cross: Complex64,
    pub direction: CrossingDirection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: Complex64,
    pub r: Complex64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Ordered along the direction of integration; `r = 1` at the first sample.
    pub samples: Vec<Sample>,
    pub segments: Vec<DenseSegment>,
    pub z_start: Complex64,
    pub t_span: (f64, f64),
    pub status: TrajectoryStatus,
    pub crossings: Vec<CrossingEvent>,
    /// Return time, set when the orbit closed.
    pub period: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least its start sample")
    }

    pub fn elapsed(&self) -> f64 {
        self.last().t - self.samples[0].t
    }

    /// Dense-output state `(z, r)` at time `t`, if `t` is covered.
    pub fn state_at(&self, t: f64) -> Option<(Complex64, Complex64)> {
        if self.segments.is_empty() {
            return (t == self.samples[0].t).then(|| (self.samples[0].z, self.samples[0].r));
        }
        let forward = self.t_span.1 >= self.t_span.0;
        let idx = self
            .segments
            .partition_point(|s| if forward { s.t1 < t } else { s.t1 > t });
        let seg = self.segments.get(idx)?;
        seg.contains(t).then(|| {
            let y = seg.eval(t);
            (y[0], y[1])
        })
    }

    /// Converts a failure status into an error.
    pub fn ensure_ok(&self) -> Result<&Self> {
        if self.status.is_failure() {
            return Err(Error::Propagation {
                status: format!("{:?}", self.status),
                t: self.last().t,
            });
        }
        Ok(self)
    }
}

/// Stop conditions layered on top of the pole/escape guards.
#[derive(Debug, Clone, Copy, Default)]
struct StopRule {
    closure: Option<PeriodOptions>,
    max_crossings: Option<usize>,
}

fn check_start<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
) -> Result<()> {
    if !(t_span.0.is_finite() && t_span.1.is_finite()) {
        return Err(Error::InvalidInput("time span must be finite".into()));
    }
    if !(z_start.re.is_finite() && z_start.im.is_finite()) {
        return Err(Error::InvalidInput("start point must be finite".into()));
    }
    opts.validate()?;
    if field
        .poles()
        .iter()
        .any(|p| (z_start - p).norm() < opts.node_guard.max(1e-8))
    {
        return Err(Error::Singularity(z_start));
    }
    Ok(())
}

fn integrate_with<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
    rule: StopRule,
) -> Result<Trajectory> {
    check_start(field, z_start, t_span, opts)?;
    let poles = field.poles();
    let rhs = |t: f64, y: &State| -> State {
        [
            field.velocity(y[0], t),
            field.velocity_deriv(y[0], t) * y[1],
        ]
    };
    let one = Complex64::new(1.0, 0.0);
    let mut traj = Trajectory {
        samples: vec![Sample {
            t: t_span.0,
            z: z_start,
            r: one,
        }],
        segments: Vec::new(),
        z_start,
        t_span,
        status: TrajectoryStatus::Completed,
        crossings: Vec::new(),
        period: None,
    };
    let mut status = TrajectoryStatus::Completed;
    let mut period = None;
    let mut crossings = Vec::new();
    let dist_rate = |z: Complex64, t: f64| ((z - z_start).conj() * field.velocity(z, t)).re;

    let outcome = ode::integrate(
        rhs,
        t_span.0,
        [z_start, one],
        t_span.1,
        &opts.ode_options(),
        |seg| {
            let end = seg.end();
            traj.segments.push(*seg);
            traj.samples.push(Sample {
                t: seg.t1,
                z: end[0],
                r: end[1],
            });

            if let Some(ev) = crossing_in_segment(field, seg) {
                crossings.push(ev);
                if rule.max_crossings.is_some_and(|n| crossings.len() >= n) {
                    return ControlFlow::Break(());
                }
            }

            if let Some(p) = rule.closure {
                if seg.t1 - t_span.0 > p.t_min {
                    let g0 = dist_rate(seg.start()[0], seg.t0);
                    let g1 = dist_rate(end[0], seg.t1);
                    if g0 < 0.0 && g1 >= 0.0 {
                        let t_star =
                            refine_root(|t| dist_rate(seg.eval(t)[0], t), seg.t0, seg.t1, g0, g1);
                        let d = (seg.eval(t_star)[0] - z_start).norm();
                        if d < p.closure_tol && t_star - t_span.0 > p.t_min {
                            period = Some(t_star - t_span.0);
                            status = TrajectoryStatus::ClosedOrbit;
                            return ControlFlow::Break(());
                        }
                    }
                }
            }

            let z = end[0];
            if field.velocity(z, seg.t1).norm() > opts.v_max
                || poles.iter().any(|p| (z - p).norm() < opts.node_guard)
            {
                status = TrajectoryStatus::PoleAbort;
                return ControlFlow::Break(());
            }
            if opts.escape_radius.is_some_and(|rad| z.norm() > rad) {
                status = TrajectoryStatus::Escaped;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        },
    );

    match outcome.stop {
        OdeStop::Finished | OdeStop::Interrupted => {}
        OdeStop::StepUnderflow { .. } | OdeStop::MaxSteps { .. } => {
            if status == TrajectoryStatus::Completed {
                status = if poles.is_empty() {
                    TrajectoryStatus::StepUnderflow
                } else {
                    let z = outcome.y[0];
                    let near_pole = poles.iter().any(|p| (z - p).norm() < 1e-3);
                    if near_pole {
                        TrajectoryStatus::PoleAbort
                    } else {
                        TrajectoryStatus::StepUnderflow
                    }
                };
            }
        }
        OdeStop::NonFinite { .. } => status = TrajectoryStatus::PoleAbort,
    }
    traj.status = status;
    traj.period = period;
    traj.crossings = crossings;
    Ok(traj)
}

/// Integrate `z` and `r` jointly over `t_span` (forward or backward).
pub fn integrate<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    t_span: (f64, f64),
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate_with(field, z_start, t_span, opts, StopRule::default())
}

/// Integrate until the `n`-th real-axis crossing or `t_end`, whichever first.
pub fn integrate_to_crossing<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    t_span: (f64, f64),
    n: usize,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate_with(
        field,
        z_start,
        t_span,
        opts,
        StopRule {
            closure: None,
            max_crossings: Some(n.max(1)),
        },
    )
}

/// Integrate forward until the orbit returns to its start, or `t_max`.
pub fn integrate_until_return<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    period_opts: &PeriodOptions,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate_with(
        field,
        z_start,
        (0.0, period_opts.t_max),
        opts,
        StopRule {
            closure: Some(*period_opts),
            max_crossings: None,
        },
    )
}

/// Illinois false position for a sign change of `f` on `[a, b]`.
fn refine_root<G: Fn(f64) -> f64>(f: G, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && (c - a) * (c - b) <= 0.0 {
            c
        } else {
            0.5 * (a + b)
        };
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < 4.0 * f64::EPSILON * (1.0 + c.abs()) {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

fn crossing_in_segment<F: VelocityField + ?Sized>(
    field: &F,
    seg: &DenseSegment,
) -> Option<CrossingEvent> {
    let y0 = seg.start()[0].im;
    let y1 = seg.end()[0].im;
    // A start exactly on the axis was counted when the previous step landed
    // there (or is the launch point itself).
    if y0 == 0.0 || !(y0 * y1 < 0.0 || y1 == 0.0) {
        return None;
    }
    let t = refine_root(|t| seg.eval(t)[0].im, seg.t0, seg.t1, y0, y1);
    let state = seg.eval(t);
    let direction = if y0 > 0.0 {
        CrossingDirection::UpToDown
    } else {
        CrossingDirection::DownToUp
    };
    Some(CrossingEvent {
        t_cross: t,
        x_cross: state[0].re,
        v_cross: field.velocity(state[0], t),
        r_cross: state[1],
        direction,
    })
}

/// Every sign change of `Im z` along the trajectory, refined on the dense
/// output and ordered by time.
pub fn find_crossings<F: VelocityField + ?Sized>(
    field: &F,
    traj: &Trajectory,
) -> Vec<CrossingEvent> {
    traj.segments
        .iter()
        .filter_map(|seg| crossing_in_segment(field, seg))
        .collect()
}

/// Time for the orbit through `z_start` to return to it, or `None` if it
/// does not return within `t_max`.
pub fn measure_period<F: VelocityField + ?Sized>(
    field: &F,
    z_start: Complex64,
    period_opts: &PeriodOptions,
    opts: &IntegrationOptions,
) -> Result<Option<f64>> {
    let traj = integrate_until_return(field, z_start, period_opts, opts)?;
    traj.ensure_ok()?;
    Ok(traj.period)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StationaryKind {
    Center,
    Attractor,
    Repeller,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPointInfo {
    pub z0: Complex64,
    /// Linearization coefficient `v'(z0)`, in inverse time.
    pub a1: Complex64,
    pub kind: StationaryKind,
    /// `2π/|A1|` for centers.
    pub period: Option<f64>,
}

impl StationaryPointInfo {
    pub fn classify(z0: Complex64, a1: Complex64) -> Self {
        let kind = if a1.re.abs() < 1e-10 {
            StationaryKind::Center
        } else if a1.re < 0.0 {
            StationaryKind::Attractor
        } else {
            StationaryKind::Repeller
        };
        let period = (kind == StationaryKind::Center).then(|| 2.0 * PI / a1.norm());
        StationaryPointInfo {
            z0,
            a1,
            kind,
            period,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StationarySearch {
    pub points: Vec<StationaryPointInfo>,
    /// Seeds that failed, with the reason.
    pub failures: Vec<(Complex64, Error)>,
}

const NEWTON_MAX_ITER: usize = 100;

/// Damped Newton iteration on `v` from a single seed.
pub fn newton_stationary_point(sys: &StationarySystem, seed: Complex64) -> Result<Complex64> {
    if sys.node_distance(seed) < 1e-8 {
        return Err(Error::Singularity(seed));
    }
    let mut z = seed;
    let mut fz = sys.v(z);
    for _ in 0..NEWTON_MAX_ITER {
        if fz.norm() == 0.0 {
            return Ok(z);
        }
        let d = sys.dv(z);
        if d.norm() == 0.0 || !d.re.is_finite() {
            break;
        }
        let step = fz / d;
        let mut lambda = 1.0;
        let (mut zn, mut fn_) = (z - step, sys.v(z - step));
        while fn_.norm().partial_cmp(&fz.norm()) != Some(std::cmp::Ordering::Less) && lambda > 1e-6
        {
            lambda *= 0.5;
            zn = z - lambda * step;
            fn_ = sys.v(zn);
        }
        let moved = (zn - z).norm();
        z = zn;
        fz = fn_;
        if moved <= 1e-15 * (1.0 + z.norm()) || (lambda == 1.0 && moved <= 1e-13 * (1.0 + z.norm()))
        {
            // One more plain step polishes the last bits.
            let polished = z - sys.v(z) / sys.dv(z);
            if sys.v(polished).norm() <= fz.norm() {
                z = polished;
                fz = sys.v(z);
            }
            if fz.norm() < 1e-12 {
                return Ok(z);
            }
            break;
        }
    }
    Err(Error::NonConvergence {
        seed,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Newton from each seed; converged points are deduplicated and classified.
pub fn find_stationary_points(sys: &StationarySystem, seeds: &[Complex64]) -> StationarySearch {
    let mut out = StationarySearch::default();
    for &seed in seeds {
        match newton_stationary_point(sys, seed) {
            Ok(z0) => {
                if !out.points.iter().any(|p| (p.z0 - z0).norm() < 1e-8) {
                    out.points
                        .push(StationaryPointInfo::classify(z0, sys.dv(z0)));
                }
            }
            Err(e) => out.failures.push((seed, e)),
        }
    }
    out
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `∫ dz / v(z)` along the straight chord from `a` to `b`.
fn chord_inverse_velocity(sys: &StationarySystem, a: Complex64, b: Complex64) -> Result<Complex64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        let z = mid + *x * half;
        let v = sys.v(z);
        if !v.re.is_finite() || !v.im.is_finite() || v.norm() <= 1e-300 {
            return Err(Error::Quadrature(z));
        }
        acc += *w / v;
    }
    Ok(acc * half)
}

/// `∫ dz / v(z)` along the polyline through `points`, closed back to the
/// first point when `closed` is set.
pub fn path_inverse_velocity(
    sys: &StationarySystem,
    points: &[Complex64],
    closed: bool,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for pair in points.windows(2) {
        total += chord_inverse_velocity(sys, pair[0], pair[1])?;
    }
    if closed && points.len() > 1 {
        total += chord_inverse_velocity(sys, points[points.len() - 1], points[0])?;
    }
    Ok(total)
}

/// `|∫ dz/v - Δt|` along the trajectory samples.
///
/// The integral uses only the sample positions, not their times, so this
/// checks that the path actually follows `dz = v dt`.
pub fn w_invariant(sys: &StationarySystem, traj: &Trajectory) -> Result<f64> {
    let points: Vec<Complex64> = traj.samples.iter().map(|s| s.z).collect();
    let q = path_inverse_velocity(sys, &points, false)?;
    Ok((q - traj.elapsed()).norm())
}
