//! Complex scalar fields with the reflection-conjugation `f ↦ f*(z*)`.
//!
//! The ordinary complex conjugate `[f(z)]*` is not analytic off the real
//! axis. The map implemented here, `bar(f)(z) = [f(z*)]*`, conjugates the
//! Taylor coefficients instead and so preserves analyticity. A field equal
//! to its own bar is REAL (real-valued on the real axis); one equal to
//! minus its bar is IMAG. Every analytic field splits uniquely as
//! `f = RE f + IM f` with `RE f = (f + bar f)/2` and `IM f = (f - bar f)/2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) type ComplexMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Distance below which a point counts as sitting on a declared pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Parity {
    /// `f*(z*) = f(z)`.
    Real,
    /// `f*(z*) = -f(z)`.
    Imag,
    General,
}

impl Parity {
    /// Parity of a product of two tagged fields.
    pub fn product(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Real, Parity::Real) | (Parity::Imag, Parity::Imag) => Parity::Real,
            (Parity::Real, Parity::Imag) | (Parity::Imag, Parity::Real) => Parity::Imag,
            _ => Parity::General,
        }
    }

    pub fn sum(self, other: Parity) -> Parity {
        if self == other {
            self
        } else {
            Parity::General
        }
    }

    /// Parity after multiplying by the constant `a`.
    pub fn scaled(self, a: Complex64) -> Parity {
        if a == Complex64::new(0.0, 0.0) {
            return Parity::Real;
        }
        let flip = |p: Parity| match p {
            Parity::Real => Parity::Imag,
            Parity::Imag => Parity::Real,
            Parity::General => Parity::General,
        };
        if a.im == 0.0 {
            self
        } else if a.re == 0.0 {
            flip(self)
        } else {
            Parity::General
        }
    }
}

/// An analytic (or meromorphic) complex scalar field with hand-coded
/// derivatives.
#[derive(Clone)]
pub struct AnalyticScalarField {
    eval: ComplexMap,
    deriv1: ComplexMap,
    deriv2: Option<ComplexMap>,
    parity: Parity,
    poles: Vec<Complex64>,
    domain_note: String,
}

impl fmt::Debug for AnalyticScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticScalarField")
            .field("parity", &self.parity)
            .field("poles", &self.poles)
            .field("has_deriv2", &self.deriv2.is_some())
            .field("domain_note", &self.domain_note)
            .finish()
    }
}

impl AnalyticScalarField {
    pub fn new<F, D>(eval: F, deriv1: D) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        D: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        AnalyticScalarField {
            eval: Arc::new(eval),
            deriv1: Arc::new(deriv1),
            deriv2: None,
            parity: Parity::General,
            poles: Vec::new(),
            domain_note: "entire".to_string(),
        }
    }

    pub fn with_deriv2<D>(mut self, deriv2: D) -> Self
    where
        D: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.deriv2 = Some(Arc::new(deriv2));
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_poles(mut self, poles: Vec<Complex64>) -> Self {
        if !poles.is_empty() && self.domain_note == "entire" {
            self.domain_note = format!("simple poles at {:?}", poles);
        }
        self.poles = poles;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.domain_note = note.into();
        self
    }

    /// Polynomial with the given coefficients, lowest order first.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        let parity = if coeffs.iter().all(|c| c.im == 0.0) {
            Parity::Real
        } else if coeffs.iter().all(|c| c.re == 0.0) {
            Parity::Imag
        } else {
            Parity::General
        };
        let d1: Vec<Complex64> = derivative_coeffs(&coeffs);
        let d2: Vec<Complex64> = derivative_coeffs(&d1);
        AnalyticScalarField::new(move |z| horner(&coeffs, z), move |z| horner(&d1, z))
            .with_deriv2(move |z| horner(&d2, z))
            .with_parity(parity)
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    #[inline]
    pub fn deriv1(&self, z: Complex64) -> Complex64 {
        (self.deriv1)(z)
    }

    pub fn deriv2(&self, z: Complex64) -> Option<Complex64> {
        self.deriv2.as_ref().map(|d| d(z))
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn domain_note(&self) -> &str {
        &self.domain_note
    }

    /// Fails if `z` sits on a declared pole.
    pub fn check_domain(&self, z: Complex64) -> Result<()> {
        match self
            .poles
            .iter()
            .find(|p| (z - **p).norm() < POLE_TOLERANCE)
        {
            Some(_) => Err(Error::Singularity(z)),
            None => Ok(()),
        }
    }

    /// The field `z ↦ [f(z*)]*`, with derivatives conjugated the same way.
    pub fn bar(&self) -> AnalyticScalarField {
        let f = self.eval.clone();
        let d1 = self.deriv1.clone();
        let d2 = self.deriv2.clone();
        AnalyticScalarField {
            eval: Arc::new(move |z: Complex64| f(z.conj()).conj()),
            deriv1: Arc::new(move |z: Complex64| d1(z.conj()).conj()),
            deriv2: d2.map(|d| Arc::new(move |z: Complex64| d(z.conj()).conj()) as ComplexMap),
            parity: self.parity,
            poles: self.poles.iter().map(|p| p.conj()).collect(),
            domain_note: self.domain_note.clone(),
        }
    }

    /// `(f + bar f) / 2`, always REAL.
    pub fn real_part(&self) -> AnalyticScalarField {
        self.add(&self.bar())
            .scale(Complex64::new(0.5, 0.0))
            .with_parity(Parity::Real)
    }

    /// `(f - bar f) / 2`, always IMAG.
    pub fn imag_part(&self) -> AnalyticScalarField {
        self.add(&self.bar().scale(Complex64::new(-1.0, 0.0)))
            .scale(Complex64::new(0.5, 0.0))
            .with_parity(Parity::Imag)
    }

    pub fn add(&self, other: &AnalyticScalarField) -> AnalyticScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let (df, dg) = (self.deriv1.clone(), other.deriv1.clone());
        let d2 = match (&self.deriv2, &other.deriv2) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |z: Complex64| a(z) + b(z)) as ComplexMap)
            }
            _ => None,
        };
        AnalyticScalarField {
            eval: Arc::new(move |z| f(z) + g(z)),
            deriv1: Arc::new(move |z| df(z) + dg(z)),
            deriv2: d2,
            parity: self.parity.sum(other.parity),
            poles: merged_poles(&self.poles, &other.poles),
            domain_note: self.domain_note.clone(),
        }
    }

    pub fn scale(&self, a: Complex64) -> AnalyticScalarField {
        let f = self.eval.clone();
        let d1 = self.deriv1.clone();
        let d2 = self.deriv2.clone();
        AnalyticScalarField {
            eval: Arc::new(move |z| a * f(z)),
            deriv1: Arc::new(move |z| a * d1(z)),
            deriv2: d2.map(|d| Arc::new(move |z: Complex64| a * d(z)) as ComplexMap),
            parity: self.parity.scaled(a),
            poles: self.poles.clone(),
            domain_note: self.domain_note.clone(),
        }
    }

    /// Pointwise product; derivatives by the Leibniz rule.
    pub fn mul(&self, other: &AnalyticScalarField) -> AnalyticScalarField {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let (df, dg) = (self.deriv1.clone(), other.deriv1.clone());
        let d2 = match (&self.deriv2, &other.deriv2) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                let (f, g, df, dg) = (f.clone(), g.clone(), df.clone(), dg.clone());
                Some(
                    Arc::new(move |z: Complex64| a(z) * g(z) + 2.0 * df(z) * dg(z) + f(z) * b(z))
                        as ComplexMap,
                )
            }
            _ => None,
        };
        let (f2, g2) = (f.clone(), g.clone());
        AnalyticScalarField {
            eval: Arc::new(move |z| f(z) * g(z)),
            deriv1: Arc::new(move |z| df(z) * g2(z) + f2(z) * dg(z)),
            deriv2: d2,
            parity: self.parity.product(other.parity),
            poles: merged_poles(&self.poles, &other.poles),
            domain_note: self.domain_note.clone(),
        }
    }

    /// The derivative as a field of its own; needs `deriv2`.
    ///
    /// Differentiation preserves REAL/IMAG parity.
    pub fn derivative(&self) -> Option<AnalyticScalarField> {
        let d2 = self.deriv2.clone()?;
        Some(AnalyticScalarField {
            eval: self.deriv1.clone(),
            deriv1: d2,
            deriv2: None,
            parity: self.parity,
            poles: self.poles.clone(),
            domain_note: self.domain_note.clone(),
        })
    }

    /// How far the field is from its declared parity at `z`.
    ///
    /// Returns `|bar f(z) - f(z)|` for REAL, `|bar f(z) + f(z)|` for IMAG and
    /// zero for GENERAL.
    pub fn parity_defect(&self, z: Complex64) -> f64 {
        let f = self.eval(z);
        let g = self.eval(z.conj()).conj();
        match self.parity {
            Parity::Real => (g - f).norm(),
            Parity::Imag => (g + f).norm(),
            Parity::General => 0.0,
        }
    }
}

fn merged_poles(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = a.to_vec();
    for p in b {
        if !out.iter().any(|q| (p - q).norm() < POLE_TOLERANCE) {
            out.push(*p);
        }
    }
    out
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn derivative_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// `f*(z*)`, the generalized conjugate of `f` evaluated at `z`.
pub fn conj_bar(f: &AnalyticScalarField, z: Complex64) -> Result<Complex64> {
    f.check_domain(z.conj())?;
    Ok(f.eval(z.conj()).conj())
}

/// `(RE f(z), IM f(z))`; the two parts sum to `f(z)`.
pub fn reim_parts(f: &AnalyticScalarField, z: Complex64) -> Result<(Complex64, Complex64)> {
    f.check_domain(z)?;
    let fz = f.eval(z);
    let gz = conj_bar(f, z)?;
    Ok(((fz + gz) * 0.5, (fz - gz) * 0.5))
}

/// Central difference of `f` at `z` along the complex direction `dir`
/// (a unit complex number), divided by `dir`.
pub fn directional_derivative<F>(f: F, z: Complex64, h: f64, dir: Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let step = dir * h;
    (f(z + step) - f(z - step)) / (2.0 * step)
}

/// Standard finite-difference step, `1e-6 (1 + |z|)`.
pub fn fd_step(z: Complex64) -> f64 {
    1e-6 * (1.0 + z.norm())
}

/// Cauchy-Riemann residual `|D_x f - D_iy f|`; vanishes for analytic `f`.
pub fn cr_residual(f: &AnalyticScalarField, z: Complex64, h: f64) -> f64 {
    cr_residual_of(|w| f.eval(w), z, h)
}

/// [`cr_residual`] for an arbitrary evaluator.
pub fn cr_residual_of<F>(f: F, z: Complex64, h: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let dx = directional_derivative(&f, z, h, Complex64::new(1.0, 0.0));
    let dy = directional_derivative(&f, z, h, Complex64::new(0.0, 1.0));
    (dx - dy).norm()
}
