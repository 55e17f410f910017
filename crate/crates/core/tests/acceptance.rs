//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use cbohm::complexfn::{conj_bar, cr_residual, fd_step, reim_parts, AnalyticScalarField, Parity};
use cbohm::conservation::{
    conservation_trace, continuity_residual, continuity_scale, rev_conservation_check, weak_ratio,
    ConservationVerdict, DerivativeMode, VelocityPart, WeakRatioOptions,
};
use cbohm::dynamics::{
    self, find_stationary_points, IntegrationOptions, PeriodOptions, StationaryKind,
    StationaryPointInfo,
};
use cbohm::portrait::{self, GridSpec, OrbitClass, PortraitOptions, PortraitRecord};
use cbohm::systems::{
    catalog, eigen_residual, eigen_residual_scale, qhj_residual, tdse_residual, StationarySystem,
    SystemId, TimeDependentState,
};
use cbohm::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;
type Verdicts = Vec<(f64, Result<ConservationVerdict, Error>)>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn opts() -> IntegrationOptions {
    IntegrationOptions::default()
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed_cb0e);
    r.set_stream(stream);
    r
}

fn morse_point(k: i64) -> C {
    c(
        3.0 * (6.0f64 / 5.0).ln() / SQRT_2,
        k as f64 * 3.0 * SQRT_2 * PI,
    )
}

/// Extra starting points for each closed family, beyond the catalog ones.
fn period_cases() -> Vec<(SystemId, C, f64)> {
    let z0 = morse_point(0);
    vec![
        (SystemId::I, c(0.8, 0.0), 2.0 * PI),
        (SystemId::I, c(0.3, 0.2), 2.0 * PI),
        (SystemId::I, c(-1.7, 0.4), 2.0 * PI),
        (SystemId::II, c(0.5, 0.0), PI),
        (SystemId::II, c(0.8, 0.1), PI),
        (SystemId::II, c(-0.5, 0.0), PI),
        (SystemId::II, c(-1.3, -0.2), PI),
        (SystemId::II, c(2.5, 0.0), 2.0 * PI),
        (SystemId::II, c(0.1, 1.5), 2.0 * PI),
        (SystemId::III, c(0.1, 0.0), PI),
        (SystemId::III, c(0.0, 0.3), PI),
        (SystemId::III, c(1.05, 0.0), PI / 2.0),
        (SystemId::III, c(1.2, 0.1), PI / 2.0),
        (SystemId::III, c(-1.05, 0.0), PI / 2.0),
        (SystemId::III, c(-0.9, -0.1), PI / 2.0),
        (SystemId::IV, z0 + c(0.5, 0.0), 18.0 * PI / 5.0),
        (SystemId::IV, z0 + c(0.0, 0.3), 18.0 * PI / 5.0),
        (SystemId::IV, morse_point(1) + c(0.4, 0.0), 18.0 * PI / 5.0),
        (SystemId::V, c(0.1, 0.0), 2.0 * PI),
        (SystemId::V, c(0.05, 0.05), 2.0 * PI),
        (SystemId::V, c(0.0, -0.08), 2.0 * PI),
    ]
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let popts = PeriodOptions::default();
    let mut cases = period_cases();
    for id in SystemId::ALL {
        for fam in &catalog(id).expected_periods {
            cases.push((id, fam.sample_start, fam.period));
        }
    }
    for (id, z, want) in &cases {
        let sys = catalog(*id);
        match dynamics::measure_period(&sys, *z, &popts, &opts()) {
            Ok(Some(p)) => {
                let rel = (p - want).abs() / want;
                worst = worst.max(rel);
                if rel >= 1e-6 {
                    failures.push(format!("{id} {z}: {p}"));
                }
            }
            other => failures.push(format!("{id} {z}: {other:?}")),
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} orbits, worst relative error {worst:.2e} {failures:?}",
            cases.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let expected: Vec<(SystemId, Vec<C>)> = vec![
        (SystemId::II, vec![c(1.0, 0.0), c(-1.0, 0.0)]),
        (SystemId::III, vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]),
        (
            SystemId::IV,
            vec![morse_point(-1), morse_point(0), morse_point(1)],
        ),
        (
            SystemId::V,
            vec![
                c(0.0, 0.0),
                c(-0.375, 7f64.sqrt() / 8.0),
                c(-0.375, -(7f64.sqrt()) / 8.0),
            ],
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (id, points) in &expected {
        let sys = catalog(*id);
        let seeds: Vec<C> = points.iter().map(|p| p + c(0.07, -0.04)).collect();
        let found = find_stationary_points(&sys, &seeds);
        ok &= found.failures.is_empty();
        for p in points {
            let err = found
                .points
                .iter()
                .map(|f| (f.z0 - p).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(err);
        }
    }
    ok &= worst < 1e-10;
    let s5 = catalog(SystemId::V);
    let upper = StationaryPointInfo::classify(
        c(-0.375, 7f64.sqrt() / 8.0),
        s5.dv(c(-0.375, 7f64.sqrt() / 8.0)),
    );
    let lower = StationaryPointInfo::classify(
        c(-0.375, -(7f64.sqrt()) / 8.0),
        s5.dv(c(-0.375, -(7f64.sqrt()) / 8.0)),
    );
    ok &= upper.kind == StationaryKind::Repeller && lower.kind == StationaryKind::Attractor;
    Outcome::new(
        ok,
        format!(
            "worst error {worst:.2e}; V upper {:?}, lower {:?}",
            upper.kind, lower.kind
        ),
    )
}

/// Random starting box for each system.
fn start_box(id: SystemId) -> (C, f64) {
    match id {
        SystemId::IV => (morse_point(0), 1.0),
        _ => (c(0.0, 0.0), 1.5),
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut counts = Vec::new();
    let mut ok = true;
    for id in SystemId::ALL {
        let sys = catalog(id);
        let (centre, half) = start_box(id);
        let mut done = 0;
        let mut attempts = 0;
        while done < 20 && attempts < 200 {
            attempts += 1;
            let z = centre + c(r.gen_range(-half..half), r.gen_range(-half..half));
            if sys.node_distance(z) < 0.1 || sys.v(z).norm() < 1e-6 {
                continue;
            }
            let Ok(traj) = dynamics::integrate(&sys, z, (0.0, 3.0), &opts()) else {
                continue;
            };
            if traj.status.is_failure() {
                continue;
            }
            let v0 = sys.v(z);
            let err = traj
                .samples
                .iter()
                .map(|s| (s.r - sys.v(s.z) / v0).norm() / s.r.norm())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            done += 1;
        }
        ok &= done >= 20;
        counts.push(format!("{id}:{done}"));
    }
    ok &= worst < 1e-7;
    Outcome::new(
        ok,
        format!("trajectories {}; worst {worst:.2e}", counts.join(" ")),
    )
}

fn recross_starts(id: SystemId) -> Vec<f64> {
    match id {
        SystemId::I => vec![0.1, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, -0.4, -1.2, -2.5],
        SystemId::II => vec![0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0, 2.5, -0.5, -2.0],
        SystemId::III => vec![0.1, 0.3, 0.5, -0.3, 0.6, 0.8, 1.2, 1.5, -1.05, -1.3],
        SystemId::IV => vec![-0.3, -0.1, 0.1, 0.2, 0.3, 0.5, 0.6, 0.8, 1.0, 1.2, 1.5],
        SystemId::V => vec![-0.1, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0],
    }
}

fn verdicts(id: SystemId) -> Verdicts {
    let sys = catalog(id);
    recross_starts(id)
        .into_iter()
        .map(|x| {
            (
                x,
                weak_ratio(&sys, x, &WeakRatioOptions::default(), &opts()),
            )
        })
        .collect()
}

fn criterion_4(all: &[(SystemId, Verdicts)]) -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut counts = Vec::new();
    for (id, vs) in all {
        let good: Vec<&ConservationVerdict> =
            vs.iter().filter_map(|(_, v)| v.as_ref().ok()).collect();
        for v in &good {
            worst = worst.max((v.newweak_ratio - 1.0).norm());
        }
        ok &= good.len() >= 10;
        counts.push(format!("{id}:{}", good.len()));
    }
    ok &= worst < 1e-6;
    Outcome::new(
        ok,
        format!(
            "recrossing starts {}; worst |newweak-1| {worst:.2e}",
            counts.join(" ")
        ),
    )
}

fn criterion_5(all: &[(SystemId, Verdicts)]) -> Outcome {
    let dev = |v: &ConservationVerdict| (v.pcon_ratio.norm() - 1.0).abs();
    let of = |id: SystemId| {
        all.iter()
            .find(|(s, _)| *s == id)
            .map(|(_, vs)| {
                vs.iter()
                    .filter_map(|(x, v)| v.as_ref().ok().map(|v| (*x, v)))
                    .collect::<Vec<_>>()
            })
            .unwrap_or_default()
    };
    let i_max = of(SystemId::I)
        .iter()
        .map(|(_, v)| dev(v))
        .fold(0.0, f64::max);
    let iii = of(SystemId::III);
    let central_max = iii
        .iter()
        .filter(|(x, _)| x.abs() <= 0.5)
        .map(|(_, v)| dev(v))
        .fold(0.0, f64::max);
    let off_center = iii
        .iter()
        .filter(|(x, _)| x.abs() > 0.75)
        .map(|(_, v)| dev(v))
        .fold(0.0, f64::max);
    let max_dev = |id| of(id).iter().map(|(_, v)| dev(v)).fold(0.0, f64::max);
    let (ii, iv, v) = (
        max_dev(SystemId::II),
        max_dev(SystemId::IV),
        max_dev(SystemId::V),
    );
    let ok = i_max < 1e-6
        && central_max < 1e-6
        && ii > 0.01
        && iv > 0.01
        && v > 0.01
        && off_center > 0.01;
    Outcome::new(
        ok,
        format!(
            "I {i_max:.1e}, III central {central_max:.1e}; deviations II {ii:.3}, IV {iv:.3}, V {v:.3}, III off-center {off_center:.3}"
        ),
    )
}

fn grid(half: f64, n: usize) -> Vec<C> {
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let t = |k: usize| -half + 2.0 * half * k as f64 / (n - 1) as f64;
            out.push(c(t(i), t(j)));
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut stationary: f64 = 0.0;
    for id in SystemId::ALL {
        let sys = catalog(id);
        let (centre, _) = start_box(id);
        for z in grid(2.0, 20) {
            let z = z + centre;
            if sys.node_distance(z) < 1e-3 {
                continue;
            }
            let res = continuity_residual(&sys, z, 0.3, DerivativeMode::Analytic).norm();
            stationary = stationary.max(res / continuity_scale(&sys, z, 0.3).max(1.0));
        }
    }
    let g = TimeDependentState::free_gaussian();
    let mut r = rng(6);
    let mut gauss: f64 = 0.0;
    for _ in 0..100 {
        let z = c(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
        let t = r.gen_range(-2.0..2.0);
        gauss = gauss.max(continuity_residual(&g, z, t, DerivativeMode::Analytic).norm());
    }
    Outcome::new(
        stationary < 1e-10 && gauss < 1e-9,
        format!("stationary relative {stationary:.2e}; gaussian {gauss:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut eig: f64 = 0.0;
    let mut qhj: f64 = 0.0;
    for id in SystemId::ALL {
        let sys = catalog(id);
        let (centre, _) = start_box(id);
        for z in grid(2.0, 21) {
            let z = z + centre;
            if sys.node_distance(z) < 1e-3 {
                continue;
            }
            let scale = eigen_residual_scale(&sys, z).unwrap().max(1.0);
            eig = eig.max(eigen_residual(&sys, z).unwrap().norm() / scale);
            qhj = qhj.max(qhj_residual(&sys, z).unwrap().norm() / scale);
        }
    }
    let g = TimeDependentState::free_gaussian();
    let tdse = grid(1.5, 11)
        .into_iter()
        .map(|z| tdse_residual(&g, z, 0.7).norm())
        .fold(0.0, f64::max);
    Outcome::new(
        eig < 1e-9 && qhj < 1e-9 && tdse < 1e-9,
        format!("eigen {eig:.2e}, qhj {qhj:.2e}, free tdse {tdse:.2e}"),
    )
}

fn random_poly(r: &mut ChaCha8Rng, parity: Option<Parity>) -> AnalyticScalarField {
    let coeffs: Vec<C> = (0..5)
        .map(|_| {
            let a = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            match parity {
                Some(Parity::Real) => c(a.re, 0.0),
                Some(Parity::Imag) => c(0.0, a.im),
                _ => a,
            }
        })
        .collect();
    AnalyticScalarField::polynomial(coeffs)
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut samples = 0;
    let mut worst_alg: f64 = 0.0;
    let mut worst_cr: f64 = 0.0;
    let mut parity_ok = true;
    let systems: Vec<StationarySystem> = SystemId::ALL.iter().map(|id| catalog(*id)).collect();
    for _ in 0..250 {
        let f = random_poly(&mut r, None);
        let g = random_poly(&mut r, None);
        let re = random_poly(&mut r, Some(Parity::Real));
        let im = random_poly(&mut r, Some(Parity::Imag));
        let a = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let b = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let z = c(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
        let scale = 1.0 + f.eval(z).norm() + g.eval(z).norm();

        // Involution.
        let twice = f.bar().bar().eval(z);
        worst_alg = worst_alg.max((twice - f.eval(z)).norm() / scale);
        // Conjugate linearity.
        let lin = f.scale(a).add(&g.scale(b));
        let lhs = conj_bar(&lin, z).unwrap();
        let rhs = a.conj() * conj_bar(&f, z).unwrap() + b.conj() * conj_bar(&g, z).unwrap();
        worst_alg = worst_alg.max((lhs - rhs).norm() / (scale * (1.0 + a.norm() + b.norm())));
        // Decomposition into REAL and IMAG parts.
        let (p, q) = reim_parts(&f, z).unwrap();
        worst_alg = worst_alg.max((p + q - f.eval(z)).norm() / scale);
        worst_alg = worst_alg.max(f.real_part().parity_defect(z) / scale);
        worst_alg = worst_alg.max(f.imag_part().parity_defect(z) / scale);
        // Parity products, checked numerically rather than from the tags.
        let products = [
            (re.mul(&re), Parity::Real),
            (im.mul(&im), Parity::Real),
            (re.mul(&im), Parity::Imag),
        ];
        for (h, want) in &products {
            parity_ok &= h.parity() == *want;
            let (hr, hi) = reim_parts(h, z).unwrap();
            let stray = if *want == Parity::Real { hi } else { hr };
            worst_alg = worst_alg.max(stray.norm() / (1.0 + h.eval(z).norm()));
        }
        // Analyticity of the derived fields.
        let h = fd_step(z);
        for field in [f.bar(), f.real_part(), f.imag_part()] {
            worst_cr = worst_cr.max(cr_residual(&field, z, h) / (1.0 + field.deriv1(z).norm()));
        }
        samples += 1;

        // Catalog fields: ψ is REAL, v is IMAG.
        let sys = &systems[samples % systems.len()];
        let (centre, _) = start_box(sys.id);
        let w = centre + z;
        if sys.node_distance(w) > 1e-2 {
            worst_alg = worst_alg.max(sys.psi.parity_defect(w) / (1.0 + sys.psi(w).norm()));
            worst_alg = worst_alg.max(sys.velocity.parity_defect(w) / (1.0 + sys.v(w).norm()));
            worst_cr = worst_cr
                .max(cr_residual(&sys.psi.bar(), w, fd_step(w)) / (1.0 + sys.dpsi(w).norm()));
        }
        samples += 3;
    }
    let ok = samples >= 1000 && worst_alg < 1e-12 && worst_cr < 1e-6 && parity_ok;
    Outcome::new(
        ok,
        format!("{samples} samples; algebra {worst_alg:.2e}, Cauchy-Riemann {worst_cr:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let g = TimeDependentState::free_gaussian();
    let starts = [
        c(1.0, 0.0),
        c(-0.6, 0.0),
        c(0.3, 0.0),
        c(1.8, 0.0),
        c(1.0, 0.5),
        c(-0.4, 0.7),
        c(0.2, -0.3),
        c(-1.2, -0.9),
        c(0.8, 1.2),
        c(-1.5, 0.25),
        c(0.05, -1.4),
    ];
    let mut worst: f64 = 0.0;
    let mut crossed = 0;
    let mut full_min = f64::INFINITY;
    for z in starts {
        match conservation_trace(&g, VelocityPart::RealPart, z, (0.0, 2.0), &opts()) {
            Ok(tr) => {
                worst = worst.max(tr.max_deviation);
                if z.im != 0.0 && tr.crossed_real_axis {
                    crossed += 1;
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
        let full = conservation_trace(&g, VelocityPart::Full, z, (0.0, 1.0), &opts())
            .map(|t| t.max_deviation)
            .unwrap_or(f64::NAN);
        full_min = full_min.min(full);
    }
    let stationary =
        rev_conservation_check(&catalog(SystemId::I), c(0.7, 0.2), (0.0, 3.0), &opts())
            .unwrap_or(f64::NAN);
    let ok = worst < 1e-7 && crossed == 0 && full_min > 1e-2 && stationary < 1e-12;
    Outcome::new(
        ok,
        format!(
            "{} starts; RE v deviation {worst:.2e}, off-axis crossings {crossed}; full v minimum deviation {full_min:.3}; System I {stationary:.1e}",
            starts.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let s1 = catalog(SystemId::I);
    let mut r = rng(10);
    let mut flow: f64 = 0.0;
    for _ in 0..25 {
        let z = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let dt = r.gen_range(-8.0..8.0);
        let traj = dynamics::integrate(&s1, z, (0.0, dt), &opts()).unwrap();
        let want = C::from_polar(1.0, dt) * z;
        flow = flow.max((traj.last().z - want).norm());
    }
    let mut w_max: f64 = 0.0;
    let mut loop_err: f64 = 0.0;
    let mut ok = true;
    for (id, z, _) in period_cases() {
        let sys = catalog(id);
        let traj =
            dynamics::integrate_until_return(&sys, z, &PeriodOptions::default(), &opts()).unwrap();
        let Some(p) = traj.period else {
            ok = false;
            continue;
        };
        w_max = w_max.max(dynamics::w_invariant(&sys, &traj).unwrap_or(f64::INFINITY));
        let pts: Vec<C> = traj.samples.iter().map(|s| s.z).collect();
        let q = dynamics::path_inverse_velocity(&sys, &pts, true).unwrap_or(c(f64::NAN, 0.0));
        loop_err = loop_err.max((q - p).norm() / p);
    }
    ok &= flow < 1e-8 && w_max < 1e-8 && loop_err < 1e-6;
    Outcome::new(
        ok,
        format!(
            "flow map {flow:.2e}; w invariant {w_max:.2e}; loop integral vs period {loop_err:.2e}"
        ),
    )
}

fn closed_families(recs: &[PortraitRecord]) -> Vec<(f64, Vec<usize>, usize)> {
    portrait::families(recs, 1e-4)
        .into_iter()
        .filter(|f| f.class == OrbitClass::Closed)
        .map(|f| (f.period.unwrap(), f.encloses, f.count))
        .collect()
}

fn count(recs: &[PortraitRecord], class: OrbitClass) -> usize {
    recs.iter().filter(|r| r.class == class).count()
}

fn criterion_11() -> Outcome {
    let o = PortraitOptions::default();
    let sweep = |id: SystemId, g: &str| {
        portrait::sweep(&catalog(id), &GridSpec::parse(g).unwrap(), &o).unwrap()
    };
    let near = |a: f64, b: f64| (a - b).abs() < 1e-6 * b;
    let mut notes = Vec::new();
    let mut ok = true;

    let ii = sweep(SystemId::II, "-2:2:21,-1.5:1.5:15");
    let fam = closed_families(&ii);
    let ii_ok = fam.len() == 3
        && fam.iter().any(|(p, e, _)| near(*p, PI) && e == &vec![0])
        && fam.iter().any(|(p, e, _)| near(*p, PI) && e == &vec![1])
        && fam
            .iter()
            .any(|(p, e, _)| near(*p, 2.0 * PI) && e == &vec![0, 1])
        && count(&ii, OrbitClass::PoleAbort) >= 1
        && ii
            .iter()
            .filter(|r| r.class == OrbitClass::PoleAbort)
            .all(|r| r.z_start.norm() < 0.25);
    ok &= ii_ok;
    notes.push(format!(
        "II {} closed families, {} pole aborts",
        fam.len(),
        count(&ii, OrbitClass::PoleAbort)
    ));

    let iii = sweep(SystemId::III, "-2:2:21,-1.5:1.5:15");
    let fam = closed_families(&iii);
    let iii_ok = fam.len() == 3
        && fam
            .iter()
            .filter(|(p, e, _)| near(*p, PI / 2.0) && e.len() == 1)
            .count()
            == 2
        && fam.iter().any(|(p, e, _)| near(*p, PI) && e == &vec![0]);
    ok &= iii_ok;
    notes.push(format!("III {} closed families", fam.len()));

    let iv = sweep(SystemId::IV, "-2:4:13,-14:14:29");
    let fam = closed_families(&iv);
    let replicas: Vec<usize> = fam
        .iter()
        .filter(|(p, e, _)| near(*p, 18.0 * PI / 5.0) && e.len() == 1)
        .map(|(_, e, _)| e[0])
        .collect();
    let open = count(&iv, OrbitClass::Escaped) + count(&iv, OrbitClass::Open);
    let iv_ok = fam.len() == replicas.len() && replicas.len() == 3 && open > 0;
    ok &= iv_ok;
    notes.push(format!(
        "IV {} librational replicas, {open} open",
        replicas.len()
    ));

    let v = sweep(SystemId::V, "-1.5:1.5:21,-1.5:1.5:21");
    let fam = closed_families(&v);
    let spiral_in = count(&v, OrbitClass::SpiralIn);
    let s5 = catalog(SystemId::V);
    let single = dynamics::integrate(&s5, c(-0.375, 0.33), (0.0, 40.0), &opts()).unwrap();
    let v_ok = fam.len() == 1
        && near(fam[0].0, 2.0 * PI)
        && fam[0].1 == vec![0]
        && spiral_in > 0
        && v.iter()
            .filter(|r| r.class == OrbitClass::SpiralIn)
            .all(|r| r.spiral_center == Some(2))
        && single.crossings.len() == 1
        && single.period.is_none();
    ok &= v_ok;
    notes.push(format!(
        "V {} closed family, {spiral_in} spiral-in, reference spiral {} crossing",
        fam.len(),
        single.crossings.len()
    ));
    Outcome::new(ok, notes.join("; "))
}

fn main() {
    let started = Instant::now();
    let all_verdicts: Vec<_> = SystemId::ALL
        .iter()
        .map(|id| (*id, verdicts(*id)))
        .collect();
    let criteria: Vec<Criterion> = vec![
        ("periods", Box::new(criterion_1)),
        ("stationary points", Box::new(criterion_2)),
        ("r-factor oracle", Box::new(criterion_3)),
        (
            "modified conservation",
            Box::new(|| criterion_4(&all_verdicts)),
        ),
        (
            "weak conservation verdicts",
            Box::new(|| criterion_5(&all_verdicts)),
        ),
        ("continuity", Box::new(criterion_6)),
        ("eigen/QHJ residuals", Box::new(criterion_7)),
        ("conjugation algebra", Box::new(criterion_8)),
        ("RE v conservation", Box::new(criterion_9)),
        ("flow map", Box::new(criterion_10)),
        ("portrait families", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} ({name}): {}", k + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
