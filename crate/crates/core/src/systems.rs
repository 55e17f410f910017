//! Catalog of one-dimensional stationary states and a free Gaussian packet.
//!
//! Units are atomic (`m = ħ = 1`). Every stationary entry carries its
//! wavefunction with closed-form first and second derivatives, the closed
//! form of the guidance velocity `v = -i ψ'/ψ`, the potential and the energy.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::complexfn::{AnalyticScalarField, Parity};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SystemId {
    I,
    II,
    III,
    IV,
    V,
}

impl SystemId {
    pub const ALL: [SystemId; 5] = [
        SystemId::I,
        SystemId::II,
        SystemId::III,
        SystemId::IV,
        SystemId::V,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::I => "harmonic oscillator ground state",
            SystemId::II => "harmonic oscillator first excited state",
            SystemId::III => "symmetric double-peaked ground state",
            SystemId::IV => "Morse oscillator ground state",
            SystemId::V => "asymmetric single-peaked ground state",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemId::I => "I",
            SystemId::II => "II",
            SystemId::III => "III",
            SystemId::IV => "IV",
            SystemId::V => "V",
        };
        f.write_str(s)
    }
}

impl FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(SystemId::I),
            "II" | "2" => Ok(SystemId::II),
            "III" | "3" => Ok(SystemId::III),
            "IV" | "4" => Ok(SystemId::IV),
            "V" | "5" => Ok(SystemId::V),
            _ => Err(Error::UnknownSystem(s.to_string())),
        }
    }
}

/// How the potential of an entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialConvention {
    /// Closed-form potential with its physical eigenvalue.
    Physical,
    /// `V(z) = E + ψ''(z) / (2 ψ(z))` for a chosen energy `E`.
    FromWavefunction,
}

/// A closed orbit family with its period and a representative start.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedPeriod {
    pub label: &'static str,
    /// Stationary points enclosed by the orbits of this family.
    #[serde(with = "crate::export::complex_obj::vec")]
    pub encloses: Vec<Complex64>,
    pub period: f64,
    /// A starting point on one orbit of the family.
    #[serde(with = "crate::export::complex_obj")]
    pub sample_start: Complex64,
}

/// Closed-form formulas for display in the catalog listing.
#[derive(Debug, Clone, Serialize)]
pub struct Formulas {
    pub psi: &'static str,
    pub velocity: &'static str,
    pub potential: &'static str,
}

#[derive(Debug, Clone)]
pub struct StationarySystem {
    pub id: SystemId,
    /// `ψ(z)` with analytic `ψ'` and `ψ''`.
    pub psi: AnalyticScalarField,
    /// Closed-form velocity `v(z)` with `v'` and `v''`.
    pub velocity: AnalyticScalarField,
    pub potential: AnalyticScalarField,
    pub energy: f64,
    pub convention: PotentialConvention,
    pub nodes: Vec<Complex64>,
    pub stationary_points: Vec<Complex64>,
    pub expected_periods: Vec<ExpectedPeriod>,
    pub formulas: Formulas,
}

impl StationarySystem {
    #[inline]
    pub fn psi(&self, z: Complex64) -> Complex64 {
        self.psi.eval(z)
    }

    #[inline]
    pub fn dpsi(&self, z: Complex64) -> Complex64 {
        self.psi.deriv1(z)
    }

    #[inline]
    pub fn d2psi(&self, z: Complex64) -> Complex64 {
        self.psi.deriv2(z).expect("catalog wavefunctions carry ψ''")
    }

    #[inline]
    pub fn v(&self, z: Complex64) -> Complex64 {
        self.velocity.eval(z)
    }

    #[inline]
    pub fn dv(&self, z: Complex64) -> Complex64 {
        self.velocity.deriv1(z)
    }

    #[inline]
    pub fn potential(&self, z: Complex64) -> Complex64 {
        self.potential.eval(z)
    }

    /// Distance from `z` to the nearest node, or infinity without nodes.
    pub fn node_distance(&self, z: Complex64) -> f64 {
        self.nodes
            .iter()
            .map(|n| (z - n).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn nonzero_psi(&self, z: Complex64) -> Result<Complex64> {
        let psi = self.psi(z);
        if psi == Complex64::new(0.0, 0.0) || self.node_distance(z) < 1e-14 {
            return Err(Error::Singularity(z));
        }
        Ok(psi)
    }

    /// Same wavefunction, energy reset to `energy`.
    ///
    /// Only entries whose potential is defined from the wavefunction can be
    /// re-gauged; the potential shifts together with the energy.
    pub fn with_energy(&self, energy: f64) -> Result<StationarySystem> {
        if self.convention != PotentialConvention::FromWavefunction {
            return Err(Error::InvalidInput(format!(
                "system {} has a physical potential; its energy is fixed",
                self.id
            )));
        }
        let mut out = self.clone();
        let shift = energy - self.energy;
        out.energy = energy;
        out.potential = self
            .potential
            .add(&AnalyticScalarField::polynomial(vec![c(shift, 0.0)]))
            .with_parity(Parity::Real);
        Ok(out)
    }

    /// Closed-form stationary point of the `k`-th imaginary replica (System IV).
    pub fn morse_stationary_point(k: i64) -> Complex64 {
        c(
            3.0 * (6.0f64 / 5.0).ln() / SQRT_2,
            k as f64 * 3.0 * SQRT_2 * PI,
        )
    }
}

/// `[-ψ''/2 + (V - E) ψ] / ψ`.
pub fn eigen_residual(sys: &StationarySystem, z: Complex64) -> Result<Complex64> {
    let psi = sys.nonzero_psi(z)?;
    let e = c(sys.energy, 0.0);
    Ok((-0.5 * sys.d2psi(z) + (sys.potential(z) - e) * psi) / psi)
}

/// Magnitude scale of the terms in [`eigen_residual`], for relative checks.
pub fn eigen_residual_scale(sys: &StationarySystem, z: Complex64) -> Result<f64> {
    let psi = sys.nonzero_psi(z)?;
    Ok((0.5 * sys.d2psi(z) / psi).norm() + sys.potential(z).norm() + sys.energy.abs())
}

/// `E - [S'²/2 + V - (i/2) S'']` with `S' = -i ψ'/ψ`.
pub fn qhj_residual(sys: &StationarySystem, z: Complex64) -> Result<Complex64> {
    let psi = sys.nonzero_psi(z)?;
    let log_d = sys.dpsi(z) / psi;
    let s1 = -I * log_d;
    let s2 = -I * (sys.d2psi(z) / psi - log_d * log_d);
    Ok(c(sys.energy, 0.0) - (0.5 * s1 * s1 + sys.potential(z) - 0.5 * I * s2))
}

/// Look up a catalog entry.
pub fn catalog(id: SystemId) -> StationarySystem {
    match id {
        SystemId::I => system_i(),
        SystemId::II => system_ii(),
        SystemId::III => system_iii(),
        SystemId::IV => system_iv(),
        SystemId::V => system_v(),
    }
}

/// Look up a catalog entry by its textual id.
pub fn catalog_by_name(name: &str) -> Result<StationarySystem> {
    Ok(catalog(name.parse()?))
}

pub fn all_systems() -> Vec<StationarySystem> {
    SystemId::ALL.iter().map(|id| catalog(*id)).collect()
}

fn harmonic_potential() -> AnalyticScalarField {
    AnalyticScalarField::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
}

fn system_i() -> StationarySystem {
    let psi = AnalyticScalarField::new(
        |z: Complex64| (-0.5 * z * z).exp(),
        |z: Complex64| -z * (-0.5 * z * z).exp(),
    )
    .with_deriv2(|z: Complex64| (z * z - 1.0) * (-0.5 * z * z).exp())
    .with_parity(Parity::Real);
    let velocity = AnalyticScalarField::polynomial(vec![c(0.0, 0.0), I]);
    StationarySystem {
        id: SystemId::I,
        psi,
        velocity,
        potential: harmonic_potential(),
        energy: 0.5,
        convention: PotentialConvention::Physical,
        nodes: vec![],
        stationary_points: vec![c(0.0, 0.0)],
        expected_periods: vec![ExpectedPeriod {
            label: "circles about 0",
            encloses: vec![c(0.0, 0.0)],
            period: 2.0 * PI,
            sample_start: c(0.8, 0.0),
        }],
        formulas: Formulas {
            psi: "exp(-z^2/2)",
            velocity: "i z",
            potential: "z^2/2",
        },
    }
}

fn system_ii() -> StationarySystem {
    let g = |z: Complex64| (-0.5 * z * z).exp();
    let psi = AnalyticScalarField::new(move |z| z * g(z), move |z| (1.0 - z * z) * g(z))
        .with_deriv2(move |z| (z * z * z - 3.0 * z) * g(z))
        .with_parity(Parity::Real);
    let velocity = AnalyticScalarField::new(
        |z: Complex64| I * (z * z - 1.0) / z,
        |z: Complex64| I * (1.0 + (z * z).inv()),
    )
    .with_deriv2(|z: Complex64| -2.0 * I / (z * z * z))
    .with_parity(Parity::Imag)
    .with_poles(vec![c(0.0, 0.0)]);
    StationarySystem {
        id: SystemId::II,
        psi,
        velocity,
        potential: harmonic_potential(),
        energy: 1.5,
        convention: PotentialConvention::Physical,
        nodes: vec![c(0.0, 0.0)],
        stationary_points: vec![c(1.0, 0.0), c(-1.0, 0.0)],
        expected_periods: vec![
            ExpectedPeriod {
                label: "inner orbits about +1",
                encloses: vec![c(1.0, 0.0)],
                period: PI,
                sample_start: c(0.5, 0.0),
            },
            ExpectedPeriod {
                label: "inner orbits about -1",
                encloses: vec![c(-1.0, 0.0)],
                period: PI,
                sample_start: c(-0.5, 0.0),
            },
            ExpectedPeriod {
                label: "outer orbits about both",
                encloses: vec![c(1.0, 0.0), c(-1.0, 0.0)],
                period: 2.0 * PI,
                sample_start: c(2.5, 0.0),
            },
        ],
        formulas: Formulas {
            psi: "z exp(-z^2/2)",
            velocity: "i (z^2 - 1) / z",
            potential: "z^2/2",
        },
    }
}

/// Potential `E + ψ''/(2ψ)` from the log-derivative `L = ψ'/ψ`:
/// `ψ''/ψ = L' + L²`, so `V' = (L'' + 2 L L')/2`.
fn potential_from_log_derivative<L, L1, L2>(
    energy: f64,
    l: L,
    l1: L1,
    l2: L2,
) -> AnalyticScalarField
where
    L: Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static,
    L1: Fn(Complex64) -> Complex64 + Send + Sync + Clone + 'static,
    L2: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
{
    let (la, l1a) = (l.clone(), l1.clone());
    AnalyticScalarField::new(
        move |z| energy + 0.5 * (l1a(z) + la(z) * la(z)),
        move |z| 0.5 * (l2(z) + 2.0 * l(z) * l1(z)),
    )
    .with_parity(Parity::Real)
}

fn system_iii() -> StationarySystem {
    let g = |z: Complex64| (-0.5 * z.powi(4) + z * z).exp();
    let l = |z: Complex64| 2.0 * z - 2.0 * z * z * z;
    let l1 = |z: Complex64| 2.0 - 6.0 * z * z;
    let psi = AnalyticScalarField::new(g, move |z| l(z) * g(z))
        .with_deriv2(move |z| (l1(z) + l(z) * l(z)) * g(z))
        .with_parity(Parity::Real);
    let velocity = AnalyticScalarField::new(
        |z: Complex64| 2.0 * I * z * (z * z - 1.0),
        |z: Complex64| 2.0 * I * (3.0 * z * z - 1.0),
    )
    .with_deriv2(|z: Complex64| 12.0 * I * z)
    .with_parity(Parity::Imag);
    StationarySystem {
        id: SystemId::III,
        psi,
        velocity,
        potential: potential_from_log_derivative(0.0, l, l1, |z| -12.0 * z),
        energy: 0.0,
        convention: PotentialConvention::FromWavefunction,
        nodes: vec![],
        stationary_points: vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
        expected_periods: vec![
            ExpectedPeriod {
                label: "central orbits about 0",
                encloses: vec![c(0.0, 0.0)],
                period: PI,
                sample_start: c(0.1, 0.0),
            },
            ExpectedPeriod {
                label: "orbits about +1",
                encloses: vec![c(1.0, 0.0)],
                period: PI / 2.0,
                sample_start: c(1.05, 0.0),
            },
            ExpectedPeriod {
                label: "orbits about -1",
                encloses: vec![c(-1.0, 0.0)],
                period: PI / 2.0,
                sample_start: c(-1.05, 0.0),
            },
        ],
        formulas: Formulas {
            psi: "exp(-z^4/2 + z^2)",
            velocity: "2 i z (z^2 - 1)",
            potential: "E + psi''/(2 psi), E = 0",
        },
    }
}

/// Morse range parameter `a = √2/3`.
const MORSE_A: f64 = SQRT_2 / 3.0;

fn system_iv() -> StationarySystem {
    let a = MORSE_A;
    let norm = 6.0 * 18f64.powf(0.25);
    let g = move |z: Complex64| norm * (-3.0 * (-a * z).exp() - 5.0 * SQRT_2 * z / 6.0).exp();
    let l = move |z: Complex64| SQRT_2 * (-a * z).exp() - 5.0 * SQRT_2 / 6.0;
    let l1 = move |z: Complex64| -(2.0 / 3.0) * (-a * z).exp();
    let psi = AnalyticScalarField::new(g, move |z| l(z) * g(z))
        .with_deriv2(move |z| (l1(z) + l(z) * l(z)) * g(z))
        .with_parity(Parity::Real);
    let velocity = AnalyticScalarField::new(
        move |z: Complex64| I * (5.0 - 6.0 * (-a * z).exp()) / (3.0 * SQRT_2),
        move |z: Complex64| I * (2.0 / 3.0) * (-a * z).exp(),
    )
    .with_deriv2(move |z: Complex64| -I * (2.0 / 3.0) * a * (-a * z).exp())
    .with_parity(Parity::Imag);
    let potential = AnalyticScalarField::new(
        move |z: Complex64| (-2.0 * a * z).exp() - 2.0 * (-a * z).exp(),
        move |z: Complex64| -2.0 * a * (-2.0 * a * z).exp() + 2.0 * a * (-a * z).exp(),
    )
    .with_parity(Parity::Real);
    let z0 = StationarySystem::morse_stationary_point(0);
    StationarySystem {
        id: SystemId::IV,
        psi,
        velocity,
        potential,
        energy: -25.0 / 36.0,
        convention: PotentialConvention::Physical,
        nodes: vec![],
        stationary_points: (-1..=1)
            .map(StationarySystem::morse_stationary_point)
            .collect(),
        expected_periods: vec![ExpectedPeriod {
            label: "librational orbits about z0",
            encloses: vec![z0],
            period: 18.0 * PI / 5.0,
            sample_start: c(z0.re + 0.5, 0.0),
        }],
        formulas: Formulas {
            psi: "6 18^(1/4) exp(-3 exp(-sqrt(2) z/3) - 5 sqrt(2) z/6)",
            velocity: "i (5 - 6 exp(-sqrt(2) z/3)) / (3 sqrt(2))",
            potential: "exp(-2 sqrt(2) z/3) - 2 exp(-sqrt(2) z/3)",
        },
    }
}

fn system_v() -> StationarySystem {
    let g = |z: Complex64| (-z.powi(4) - 0.5 * z * z - z * z * z).exp();
    let l = |z: Complex64| -4.0 * z * z * z - 3.0 * z * z - z;
    let l1 = |z: Complex64| -12.0 * z * z - 6.0 * z - 1.0;
    let psi = AnalyticScalarField::new(g, move |z| l(z) * g(z))
        .with_deriv2(move |z| (l1(z) + l(z) * l(z)) * g(z))
        .with_parity(Parity::Real);
    let velocity = AnalyticScalarField::polynomial(vec![c(0.0, 0.0), I, 3.0 * I, 4.0 * I]);
    let s7 = 7f64.sqrt() / 8.0;
    StationarySystem {
        id: SystemId::V,
        psi,
        velocity,
        potential: potential_from_log_derivative(0.0, l, l1, |z| -24.0 * z - 6.0),
        energy: 0.0,
        convention: PotentialConvention::FromWavefunction,
        nodes: vec![],
        stationary_points: vec![c(0.0, 0.0), c(-0.375, s7), c(-0.375, -s7)],
        expected_periods: vec![ExpectedPeriod {
            label: "orbits about 0",
            encloses: vec![c(0.0, 0.0)],
            period: 2.0 * PI,
            sample_start: c(0.1, 0.0),
        }],
        formulas: Formulas {
            psi: "exp(-z^4 - z^2/2 - z^3)",
            velocity: "i (z + 3 z^2 + 4 z^3)",
            potential: "E + psi''/(2 psi), E = 0",
        },
    }
}

/// A wavefunction of the complexified coordinate and real time.
///
/// Stationary entries are evolved with the phase `exp(-i E t)`.
pub trait WaveFunction: Send + Sync {
    fn psi(&self, z: Complex64, t: f64) -> Complex64;
    fn psi_z(&self, z: Complex64, t: f64) -> Complex64;
    fn psi_zz(&self, z: Complex64, t: f64) -> Complex64;
    fn psi_t(&self, z: Complex64, t: f64) -> Complex64;

    fn nodes(&self) -> Vec<Complex64> {
        Vec::new()
    }

    /// `Ψ̄(z,t) = [Ψ(z*, t)]*`; time is not reversed.
    fn psi_bar(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi(z.conj(), t).conj()
    }

    fn psi_bar_z(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi_z(z.conj(), t).conj()
    }

    fn psi_bar_zz(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi_zz(z.conj(), t).conj()
    }

    fn psi_bar_t(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi_t(z.conj(), t).conj()
    }
}

impl WaveFunction for StationarySystem {
    fn psi(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi.eval(z) * phase(self.energy, t)
    }

    fn psi_z(&self, z: Complex64, t: f64) -> Complex64 {
        self.psi.deriv1(z) * phase(self.energy, t)
    }

    fn psi_zz(&self, z: Complex64, t: f64) -> Complex64 {
        self.d2psi(z) * phase(self.energy, t)
    }

    fn psi_t(&self, z: Complex64, t: f64) -> Complex64 {
        -I * self.energy * WaveFunction::psi(self, z, t)
    }

    fn nodes(&self) -> Vec<Complex64> {
        self.nodes.clone()
    }
}

fn phase(energy: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -energy * t)
}

/// Free Gaussian `Ψ(z,t) = π^(-1/4) (1+it)^(-1/2) exp(-z²/(2(1+it)))`.
///
/// This state is not part of the stationary catalog; it exists so that the
/// continuity relation is exercised on a state with a nontrivial time
/// dependence.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeDependentState;

impl TimeDependentState {
    pub fn free_gaussian() -> Self {
        TimeDependentState
    }

    pub fn description(&self) -> &'static str {
        "free Gaussian: pi^(-1/4) (1+it)^(-1/2) exp(-z^2/(2(1+it)))"
    }

    /// Guidance velocity `-i Ψ_z/Ψ = i z/(1+it)`.
    pub fn velocity(&self, z: Complex64, t: f64) -> Complex64 {
        I * z / c(1.0, t)
    }
}

impl WaveFunction for TimeDependentState {
    fn psi(&self, z: Complex64, t: f64) -> Complex64 {
        let w = c(1.0, t);
        PI.powf(-0.25) * w.sqrt().inv() * (-z * z / (2.0 * w)).exp()
    }

    fn psi_z(&self, z: Complex64, t: f64) -> Complex64 {
        -z / c(1.0, t) * self.psi(z, t)
    }

    fn psi_zz(&self, z: Complex64, t: f64) -> Complex64 {
        let w = c(1.0, t);
        (z * z / (w * w) - w.inv()) * self.psi(z, t)
    }

    fn psi_t(&self, z: Complex64, t: f64) -> Complex64 {
        let w = c(1.0, t);
        (-I / (2.0 * w) + I * z * z / (2.0 * w * w)) * self.psi(z, t)
    }
}

/// `[i ∂Ψ/∂t + ½ ∂²Ψ/∂z²] / Ψ` for a free (V = 0) state.
pub fn tdse_residual(state: &TimeDependentState, z: Complex64, t: f64) -> Complex64 {
    (I * state.psi_t(z, t) + 0.5 * state.psi_zz(z, t)) / state.psi(z, t)
}
