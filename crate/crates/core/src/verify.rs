//! Self-checks of the catalog, dynamics and conservation laws, reported
//! as flat records.
//!
//! Some checks are *expected* to fail: the weak relation `ρ dx` is not
//! conserved for most orbits. Such a check carries `expect_pass: false` and
//! the report is healthy when every outcome matches its expectation.

use num_complex::Complex64;
use serde::Serialize;

use crate::conservation::{
    self, continuity_residual, continuity_scale, density_td, weak_ratio, DerivativeMode,
    WeakRatioOptions,
};
use crate::dynamics::{
    self, find_stationary_points, IntegrationOptions, PeriodOptions, StationaryKind,
    StationaryPointInfo,
};
use crate::systems::{
    catalog, eigen_residual, eigen_residual_scale, qhj_residual, tdse_residual, StationarySystem,
    SystemId, TimeDependentState, WaveFunction,
};

pub const GAUSSIAN: &str = "gaussian";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub system: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub expect_pass: bool,
}

impl CheckRecord {
    fn new(check: &str, system: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = value.is_finite() && (value - expected).abs() <= tolerance;
        CheckRecord {
            check: check.into(),
            system: system.into(),
            value,
            expected,
            tolerance,
            pass,
            expect_pass: true,
        }
    }

    /// A quantity that must stay below `tolerance`.
    fn bound(check: &str, system: &str, value: f64, tolerance: f64) -> Self {
        let mut r = Self::new(check, system, value, 0.0, tolerance);
        r.pass = value.is_finite() && value < tolerance;
        r
    }

    fn failed(check: &str, system: &str, expected: f64, tolerance: f64) -> Self {
        let mut r = Self::new(check, system, f64::NAN, expected, tolerance);
        r.pass = false;
        r
    }

    fn expecting_failure(mut self) -> Self {
        self.expect_pass = false;
        self
    }

    pub fn as_expected(&self) -> bool {
        self.pass == self.expect_pass
    }
}

/// Which part of the suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    All,
    System(SystemId),
    Gaussian,
}

impl std::str::FromStr for Selector {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(Selector::All),
            GAUSSIAN => Ok(Selector::Gaussian),
            other => other.parse().map(Selector::System),
        }
    }
}

pub fn run(selector: Selector, opts: &IntegrationOptions) -> Vec<CheckRecord> {
    match selector {
        Selector::All => {
            let mut out: Vec<CheckRecord> = SystemId::ALL
                .iter()
                .flat_map(|id| verify_system(&catalog(*id), opts))
                .collect();
            out.extend(verify_gaussian(opts));
            out
        }
        Selector::System(id) => verify_system(&catalog(id), opts),
        Selector::Gaussian => verify_gaussian(opts),
    }
}

/// True when every check came out the way it was expected to.
pub fn all_as_expected(records: &[CheckRecord]) -> bool {
    records.iter().all(CheckRecord::as_expected)
}

/// Square grid over `[-half, half]²` skipping points within `gap` of a node.
pub fn node_avoiding_grid(sys: &StationarySystem, half: f64, n: usize, gap: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            let y = -half + 2.0 * half * j as f64 / (n - 1) as f64;
            let z = Complex64::new(x, y);
            if sys.node_distance(z) > gap {
                out.push(z);
            }
        }
    }
    out
}

/// Starting points used for the `r` closed-form check.
pub fn r_check_starts(sys: &StationarySystem) -> Vec<Complex64> {
    let mut starts: Vec<Complex64> = sys
        .expected_periods
        .iter()
        .map(|p| p.sample_start)
        .collect();
    let base = match sys.id {
        SystemId::IV => sys.stationary_points[1],
        _ => Complex64::new(0.0, 0.0),
    };
    starts.push(base + Complex64::new(0.3, 0.2));
    starts.push(base + Complex64::new(-0.4, 0.3));
    starts
}

/// Largest `|r - v(z)/v(z_start)| / |r|` over a trajectory.
pub fn r_closed_form_error(
    sys: &StationarySystem,
    z_start: Complex64,
    t_end: f64,
    opts: &IntegrationOptions,
) -> crate::Result<f64> {
    let traj = dynamics::integrate(sys, z_start, (0.0, t_end), opts)?;
    traj.ensure_ok()?;
    let v0 = sys.v(z_start);
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.r - sys.v(s.z) / v0).norm() / s.r.norm())
        .fold(0.0, f64::max))
}

/// Real starting points used by the weak-conservation checks, with whether
/// `|ρ dx|` is expected to be conserved there.
pub fn weak_check_starts(id: SystemId) -> &'static [(f64, bool)] {
    match id {
        SystemId::I => &[(0.8, true), (1.5, true)],
        SystemId::II => &[(0.5, false), (2.5, true)],
        SystemId::III => &[(0.1, true), (1.05, false)],
        SystemId::IV => &[(0.5, false)],
        SystemId::V => &[(0.1, false)],
    }
}

pub fn verify_system(sys: &StationarySystem, opts: &IntegrationOptions) -> Vec<CheckRecord> {
    let id = sys.id.to_string();
    let name = id.as_str();
    let mut out = Vec::new();

    let grid = node_avoiding_grid(sys, 2.0, 11, 1e-3);
    let mut eig: f64 = 0.0;
    let mut qhj: f64 = 0.0;
    for z in &grid {
        if let (Ok(e), Ok(q), Ok(s)) = (
            eigen_residual(sys, *z),
            qhj_residual(sys, *z),
            eigen_residual_scale(sys, *z),
        ) {
            eig = eig.max(e.norm() / s.max(1.0));
            qhj = qhj.max(q.norm() / s.max(1.0));
        }
    }
    out.push(CheckRecord::bound("eigen_residual", name, eig, 1e-9));
    out.push(CheckRecord::bound("qhj_residual", name, qhj, 1e-9));

    let mut continuity: f64 = 0.0;
    for z in &grid {
        let res = continuity_residual(sys, *z, 0.0, DerivativeMode::Analytic).norm();
        continuity = continuity.max(res / continuity_scale(sys, *z, 0.0).max(1.0));
    }
    out.push(CheckRecord::bound("continuity", name, continuity, 1e-10));

    let r_err = r_check_starts(sys)
        .iter()
        .map(|z| r_closed_form_error(sys, *z, 5.0, opts).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    out.push(CheckRecord::bound("r_closed_form", name, r_err, 1e-7));

    for fam in &sys.expected_periods {
        let check = format!("period:{}", fam.label);
        let tol = 1e-6 * fam.period;
        match dynamics::measure_period(sys, fam.sample_start, &PeriodOptions::default(), opts) {
            Ok(Some(p)) => out.push(CheckRecord::new(&check, name, p, fam.period, tol)),
            _ => out.push(CheckRecord::failed(&check, name, fam.period, tol)),
        }
    }

    let seeds: Vec<Complex64> = sys
        .stationary_points
        .iter()
        .map(|z| z + Complex64::new(0.05, 0.03))
        .collect();
    let found = find_stationary_points(sys, &seeds);
    for (k, exact) in sys.stationary_points.iter().enumerate() {
        let err = found
            .points
            .iter()
            .map(|p| (p.z0 - exact).norm())
            .fold(f64::INFINITY, f64::min);
        out.push(CheckRecord::bound(
            &format!("stationary_point:{k}"),
            name,
            err,
            1e-10,
        ));
    }
    if sys.id == SystemId::V {
        for (k, want) in [
            (1, StationaryKind::Repeller),
            (2, StationaryKind::Attractor),
        ] {
            let z0 = sys.stationary_points[k];
            let info = StationaryPointInfo::classify(z0, sys.dv(z0));
            let ok = if info.kind == want { 1.0 } else { 0.0 };
            out.push(CheckRecord::new(
                &format!("stationary_kind:{k}:{want:?}"),
                name,
                ok,
                1.0,
                0.0,
            ));
        }
    }

    for &(x_i, conserved) in weak_check_starts(sys.id) {
        match weak_ratio(sys, x_i, &WeakRatioOptions::default(), opts) {
            Ok(v) => {
                out.push(CheckRecord::new(
                    &format!("newweak_ratio:x={x_i}"),
                    name,
                    v.newweak_ratio.norm(),
                    1.0,
                    1e-6,
                ));
                let rec = CheckRecord::new(
                    &format!("pconweak:x={x_i}"),
                    name,
                    v.pcon_ratio.norm(),
                    1.0,
                    1e-6,
                );
                out.push(if conserved {
                    rec
                } else {
                    rec.expecting_failure()
                });
            }
            Err(_) => {
                out.push(CheckRecord::failed(
                    &format!("newweak_ratio:x={x_i}"),
                    name,
                    1.0,
                    1e-6,
                ));
            }
        }
    }

    if let Some(fam) = sys.expected_periods.first() {
        let traj = dynamics::integrate_until_return(
            sys,
            fam.sample_start,
            &PeriodOptions::default(),
            opts,
        );
        match traj
            .as_ref()
            .map(|t| (dynamics::w_invariant(sys, t), t.period))
        {
            Ok((Ok(w), Some(p))) => {
                out.push(CheckRecord::bound("w_invariant", name, w, 1e-8));
                let pts: Vec<Complex64> = traj.unwrap().samples.iter().map(|s| s.z).collect();
                match dynamics::path_inverse_velocity(sys, &pts, true) {
                    Ok(q) => out.push(CheckRecord::new("orbit_integral", name, q.re, p, 1e-6 * p)),
                    Err(_) => out.push(CheckRecord::failed("orbit_integral", name, p, 1e-6 * p)),
                }
            }
            _ => out.push(CheckRecord::failed("w_invariant", name, 0.0, 1e-8)),
        }
    }
    out
}

/// `∫ρ(x,t) dx` over `[-half, half]` by composite Simpson with `n` panels.
pub fn real_axis_norm<W: WaveFunction + ?Sized>(state: &W, t: f64, half: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = 2.0 * half / n as f64;
    let mut sum = 0.0;
    for k in 0..=n {
        let x = -half + k as f64 * h;
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * density_td(state, Complex64::new(x, 0.0), t).re;
    }
    sum * h / 3.0
}

/// Deterministic low-discrepancy samples in `[-1.5,1.5]² × [-2,2]`.
fn gaussian_samples(n: usize) -> Vec<(Complex64, f64)> {
    let frac = |x: f64| x - x.floor();
    (0..n)
        .map(|k| {
            let k = k as f64 + 1.0;
            let a = frac(k * 0.754_877_666_246_692_7);
            let b = frac(k * 0.569_840_290_998_053_3);
            let c = frac(k * 0.618_033_988_749_894_9);
            (Complex64::new(3.0 * a - 1.5, 3.0 * b - 1.5), 4.0 * c - 2.0)
        })
        .collect()
}

pub fn verify_gaussian(opts: &IntegrationOptions) -> Vec<CheckRecord> {
    let g = TimeDependentState::free_gaussian();
    let mut out = Vec::new();
    let samples = gaussian_samples(100);

    let tdse = samples
        .iter()
        .map(|(z, t)| tdse_residual(&g, *z, *t).norm())
        .fold(0.0, f64::max);
    out.push(CheckRecord::bound("tdse_residual", GAUSSIAN, tdse, 1e-9));

    let cont = samples
        .iter()
        .map(|(z, t)| continuity_residual(&g, *z, *t, DerivativeMode::Analytic).norm())
        .fold(0.0, f64::max);
    out.push(CheckRecord::bound("continuity", GAUSSIAN, cont, 1e-9));

    let fd = continuity_residual(
        &g,
        Complex64::new(0.4, 0.3),
        0.7,
        DerivativeMode::FiniteDifference { dt: 1e-6, dz: 1e-6 },
    )
    .norm();
    out.push(CheckRecord::bound("continuity_fd", GAUSSIAN, fd, 1e-5));

    let norm_dev = [-1.5, -0.5, 0.0, 0.5, 1.0, 1.5]
        .iter()
        .map(|t| (real_axis_norm(&g, *t, 8.0, 4000) - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(CheckRecord::bound(
        "total_probability",
        GAUSSIAN,
        norm_dev,
        1e-8,
    ));

    let starts = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-0.7, 0.0),
        Complex64::new(1.0, 0.5),
        Complex64::new(-0.5, -0.8),
    ];
    let mut rev: f64 = 0.0;
    let mut crossed = false;
    for z in starts {
        match conservation::conservation_trace(
            &g,
            conservation::VelocityPart::RealPart,
            z,
            (0.0, 2.0),
            opts,
        ) {
            Ok(tr) => {
                rev = rev.max(tr.max_deviation);
                crossed |= tr.crossed_real_axis;
            }
            Err(_) => rev = f64::INFINITY,
        }
    }
    out.push(CheckRecord::bound("rev_conservation", GAUSSIAN, rev, 1e-7));
    out.push(CheckRecord::new(
        "rev_crosses_axis",
        GAUSSIAN,
        crossed as u8 as f64,
        0.0,
        0.0,
    ));

    let full = conservation::conservation_trace(
        &g,
        conservation::VelocityPart::Full,
        Complex64::new(0.5, 0.0),
        (0.0, 1.0),
        opts,
    )
    .map(|t| t.max_deviation)
    .unwrap_or(f64::NAN);
    out.push(CheckRecord::bound("full_v_conservation", GAUSSIAN, full, 1e-2).expecting_failure());

    let z0 = Complex64::new(0.6, 0.4);
    let field = conservation::GuidanceField::new(&g, conservation::VelocityPart::Full);
    let flow = dynamics::integrate(&field, z0, (0.0, 2.0), opts)
        .map(|t| (t.last().z - z0 * Complex64::new(1.0, 2.0)).norm())
        .unwrap_or(f64::NAN);
    out.push(CheckRecord::bound("flow_map", GAUSSIAN, flow, 1e-8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn selector_parsing() {
        assert_eq!("all".parse::<Selector>().unwrap(), Selector::All);
        assert_eq!("Gaussian".parse::<Selector>().unwrap(), Selector::Gaussian);
        assert_eq!(
            "iv".parse::<Selector>().unwrap(),
            Selector::System(SystemId::IV)
        );
        assert!("vi".parse::<Selector>().is_err());
    }

    #[test]
    fn full_suite_matches_expectations() {
        let recs = run(Selector::All, &IntegrationOptions::default());
        for r in &recs {
            assert!(r.as_expected(), "{r:?}");
        }
        let iv_period = recs
            .iter()
            .find(|r| r.system == "IV" && r.check.starts_with("period"))
            .unwrap();
        assert!((iv_period.value - 18.0 * PI / 5.0).abs() < 1e-5);
        assert!(recs
            .iter()
            .any(|r| r.system == "II" && r.check.starts_with("pconweak") && !r.pass));
    }

    #[test]
    fn simpson_norm() {
        let g = TimeDependentState::free_gaussian();
        assert!((real_axis_norm(&g, 0.0, 8.0, 2000) - 1.0).abs() < 1e-10);
    }
}
