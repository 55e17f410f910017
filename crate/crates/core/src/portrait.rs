//! Grid sweeps that sort trajectories into orbit families.
//!
//! Separatrices are never computed; they show up as the boundaries between
//! classes in a sweep.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    self, IntegrationOptions, PeriodOptions, StationaryKind, StationaryPointInfo, TrajectoryStatus,
};
use crate::error::{Error, Result};
use crate::export::complex_obj;
use crate::systems::StationarySystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub n_re: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub n_im: usize,
}

impl GridSpec {
    /// Parses `re_min:re_max:n_re,im_min:im_max:n_im`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad grid `{s}`; expected a:b:n,c:d:m"));
        let axes: Vec<&str> = s.split(',').collect();
        if axes.len() != 2 {
            return Err(bad());
        }
        let axis = |a: &str| -> Result<(f64, f64, usize)> {
            let p: Vec<&str> = a.split(':').map(str::trim).collect();
            if p.len() != 3 {
                return Err(bad());
            }
            let lo = p[0].parse::<f64>().map_err(|_| bad())?;
            let hi = p[1].parse::<f64>().map_err(|_| bad())?;
            let n = p[2].parse::<usize>().map_err(|_| bad())?;
            Ok((lo, hi, n))
        };
        let (re_min, re_max, n_re) = axis(axes[0])?;
        let (im_min, im_max, n_im) = axis(axes[1])?;
        let g = GridSpec {
            re_min,
            re_max,
            n_re,
            im_min,
            im_max,
            n_im,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.n_re == 0 || self.n_im == 0 {
            return Err(Error::InvalidInput(
                "grid bounds must be finite and counts at least 1".into(),
            ));
        }
        Ok(())
    }

    fn axis_value(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Grid points, rows of constant imaginary part from the bottom up.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for j in 0..self.n_im {
            let y = Self::axis_value(self.im_min, self.im_max, self.n_im, j);
            for i in 0..self.n_re {
                let x = Self::axis_value(self.re_min, self.re_max, self.n_re, i);
                out.push(Complex64::new(x, y));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitOptions {
    pub integration: IntegrationOptions,
    pub period: PeriodOptions,
    pub escape_radius: f64,
    /// Number of trailing samples inspected for a monotone spiral trend.
    pub spiral_window: usize,
    /// Worker threads; `None` uses all processors.
    pub jobs: Option<usize>,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            integration: IntegrationOptions::default(),
            period: PeriodOptions::default(),
            escape_radius: 50.0,
            spiral_window: 20,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OrbitClass {
    Closed,
    SpiralIn,
    SpiralOut,
    Escaped,
    PoleAbort,
    StepUnderflow,
    /// Started on a stationary point.
    Fixed,
    /// None of the above within the time budget.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitRecord {
    pub index: usize,
    #[serde(with = "complex_obj")]
    pub z_start: Complex64,
    pub class: OrbitClass,
    pub period: Option<f64>,
    pub crossings: usize,
    /// Indices into the system's stationary points enclosed by a closed orbit.
    pub encloses: Vec<usize>,
    /// Stationary point approached or left by a spiral.
    pub spiral_center: Option<usize>,
    pub t_end: f64,
    #[serde(with = "complex_obj")]
    pub z_end: Complex64,
}

/// Winding number of the closed polygon `points` about `p`.
pub fn winding_number(points: &[Complex64], p: Complex64) -> i64 {
    if points.len() < 3 {
        return 0;
    }
    let mut total = 0.0;
    for k in 0..points.len() {
        let a = points[k] - p;
        let b = points[(k + 1) % points.len()] - p;
        total += (b / a).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

fn stationary_infos(sys: &StationarySystem) -> Vec<StationaryPointInfo> {
    sys.stationary_points
        .iter()
        .map(|z0| StationaryPointInfo::classify(*z0, sys.dv(*z0)))
        .collect()
}

/// Classify the orbit through one starting point.
pub fn classify_start(
    sys: &StationarySystem,
    index: usize,
    z: Complex64,
    opts: &PortraitOptions,
) -> PortraitRecord {
    let infos = stationary_infos(sys);
    let mut rec = PortraitRecord {
        index,
        z_start: z,
        class: OrbitClass::Open,
        period: None,
        crossings: 0,
        encloses: Vec::new(),
        spiral_center: None,
        t_end: 0.0,
        z_end: z,
    };
    if sys.node_distance(z) < opts.integration.node_guard.max(1e-8) {
        rec.class = OrbitClass::PoleAbort;
        return rec;
    }
    if sys.v(z).norm() < 1e-12 {
        rec.class = OrbitClass::Fixed;
        return rec;
    }
    let mut iopts = opts.integration;
    iopts.escape_radius = Some(opts.escape_radius);
    let traj = match dynamics::integrate_until_return(sys, z, &opts.period, &iopts) {
        Ok(t) => t,
        Err(_) => {
            rec.class = OrbitClass::PoleAbort;
            return rec;
        }
    };
    rec.crossings = traj.crossings.len();
    rec.t_end = traj.last().t;
    rec.z_end = traj.last().z;
    rec.class = match traj.status {
        TrajectoryStatus::ClosedOrbit => {
            let polygon: Vec<Complex64> = traj.samples.iter().map(|s| s.z).collect();
            rec.period = traj.period;
            rec.encloses = infos
                .iter()
                .enumerate()
                .filter(|(_, info)| winding_number(&polygon, info.z0) != 0)
                .map(|(k, _)| k)
                .collect();
            OrbitClass::Closed
        }
        TrajectoryStatus::Escaped => OrbitClass::Escaped,
        TrajectoryStatus::PoleAbort => OrbitClass::PoleAbort,
        TrajectoryStatus::StepUnderflow => OrbitClass::StepUnderflow,
        TrajectoryStatus::Completed => {
            let window = opts.spiral_window.max(2).min(traj.samples.len());
            let tail = &traj.samples[traj.samples.len() - window..];
            spiral_trend(
                &infos,
                tail.iter().map(|s| s.z).collect::<Vec<_>>().as_slice(),
            )
            .map(|(class, k)| {
                rec.spiral_center = Some(k);
                class
            })
            .unwrap_or(OrbitClass::Open)
        }
    };
    rec
}

/// Detects a monotone approach to an attractor or departure from a repeller.
fn spiral_trend(infos: &[StationaryPointInfo], tail: &[Complex64]) -> Option<(OrbitClass, usize)> {
    let last = *tail.last()?;
    let (k, info) = infos
        .iter()
        .enumerate()
        .filter(|(_, i)| i.kind != StationaryKind::Center)
        .min_by(|a, b| {
            (a.1.z0 - last)
                .norm()
                .partial_cmp(&(b.1.z0 - last).norm())
                .unwrap()
        })?;
    let dist: Vec<f64> = tail.iter().map(|z| (z - info.z0).norm()).collect();
    let converged = dist.last().copied().unwrap_or(f64::INFINITY) < 1e-6 * (1.0 + info.z0.norm());
    let decreasing = dist.windows(2).all(|w| w[1] < w[0]);
    let increasing = dist.windows(2).all(|w| w[1] > w[0]);
    match info.kind {
        StationaryKind::Attractor if converged || decreasing => Some((OrbitClass::SpiralIn, k)),
        StationaryKind::Repeller if increasing => Some((OrbitClass::SpiralOut, k)),
        _ => None,
    }
}

/// Classify every grid point; records come back in grid order.
pub fn sweep(
    sys: &StationarySystem,
    grid: &GridSpec,
    opts: &PortraitOptions,
) -> Result<Vec<PortraitRecord>> {
    grid.validate()?;
    let points = grid.points();
    let run = || {
        points
            .par_iter()
            .enumerate()
            .map(|(k, z)| classify_start(sys, k, *z, opts))
            .collect::<Vec<_>>()
    };
    match opts.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

/// One orbit family in a sweep: class, period and enclosed stationary points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub class: OrbitClass,
    pub period: Option<f64>,
    pub encloses: Vec<usize>,
    pub spiral_center: Option<usize>,
    pub count: usize,
}

/// Group records into families. Closed orbits with periods equal to within
/// `period_tol` (relative) and the same enclosed points share a family.
pub fn families(records: &[PortraitRecord], period_tol: f64) -> Vec<FamilySummary> {
    let mut out: Vec<FamilySummary> = Vec::new();
    for r in records {
        let same = |f: &FamilySummary| {
            f.class == r.class
                && f.encloses == r.encloses
                && f.spiral_center == r.spiral_center
                && match (f.period, r.period) {
                    (Some(a), Some(b)) => ((a - b) / a).abs() < period_tol,
                    (None, None) => true,
                    _ => false,
                }
        };
        match out.iter_mut().find(|f| same(f)) {
            Some(f) => f.count += 1,
            None => out.push(FamilySummary {
                class: r.class,
                period: r.period,
                encloses: r.encloses.clone(),
                spiral_center: r.spiral_center,
                count: 1,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{catalog, SystemId};
    use std::f64::consts::PI;

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("-2:2:21,-1.5:1.5:15").unwrap();
        assert_eq!(g.points().len(), 315);
        assert_eq!(g.points()[0], Complex64::new(-2.0, -1.5));
        assert_eq!(g.points()[20], Complex64::new(2.0, -1.5));
        assert!(GridSpec::parse("0:1:0,0:1:3").is_err());
        assert!(GridSpec::parse("0:1:3").is_err());
        let one = GridSpec::parse("0:1:1,2:2:1").unwrap();
        assert_eq!(one.points(), vec![Complex64::new(0.5, 2.0)]);
    }

    #[test]
    fn winding() {
        let square = [
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, -1.0),
        ];
        assert_eq!(winding_number(&square, Complex64::new(0.0, 0.0)), 1);
        assert_eq!(winding_number(&square, Complex64::new(3.0, 0.0)), 0);
    }

    #[test]
    fn system_i_sweep_all_closed() {
        let sys = catalog(SystemId::I);
        let grid = GridSpec::parse("-1.5:1.5:4,-1.5:1.5:4").unwrap();
        let recs = sweep(&sys, &grid, &PortraitOptions::default()).unwrap();
        assert_eq!(recs.len(), 16);
        for (k, r) in recs.iter().enumerate() {
            assert_eq!(r.index, k);
            assert_eq!(r.class, OrbitClass::Closed);
            assert!((r.period.unwrap() - 2.0 * PI).abs() < 1e-6);
            assert_eq!(r.encloses, vec![0]);
        }
    }

    #[test]
    fn fixed_and_node_starts() {
        let s2 = catalog(SystemId::II);
        let o = PortraitOptions::default();
        assert_eq!(
            classify_start(&s2, 0, Complex64::new(0.0, 0.0), &o).class,
            OrbitClass::PoleAbort
        );
        assert_eq!(
            classify_start(&s2, 0, Complex64::new(1.0, 0.0), &o).class,
            OrbitClass::Fixed
        );
    }
}
