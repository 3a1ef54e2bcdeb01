//! Stencil calculus on complex fields of `(τ, z)`.
//!
//! Derivatives along the real direction `x^μ` and the imaginary direction
//! `y^μ` are taken with second-order central differences. For an analytic
//! field the two routes give the same complex derivative,
//! `∂_z J = ∂_x J_R + i ∂_x J_I = ∂_y J_I − i ∂_y J_R`, which is what the
//! Cauchy–Riemann and consistency residuals measure.
//!
//! User fields must be safe to evaluate concurrently (`Send + Sync`).

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::probes::DomainBox;
use crate::spacetime::{ComplexFourVector, IndexPosition, C64};

pub type FieldFn = dyn Fn(f64, &ComplexFourVector) -> C64 + Send + Sync;

/// A complex scalar field `J(τ, z)` on a domain box.
#[derive(Clone)]
pub struct ScalarField {
    func: Arc<FieldFn>,
    domain: DomainBox,
    step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", &self.domain)
            .field("step", &self.step)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(domain: DomainBox, f: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector) -> C64 + Send + Sync + 'static,
    {
        ScalarField {
            func: Arc::new(f),
            domain,
            step: default_step(1.0),
        }
    }

    pub fn unbounded<F>(f: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector) -> C64 + Send + Sync + 'static,
    {
        Self::new(DomainBox::unbounded(), f)
    }

    /// Recommended stencil step.
    pub fn with_step(mut self, h: f64) -> Self {
        self.step = h;
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    #[inline]
    pub fn eval(&self, tau: f64, z: &ComplexFourVector) -> C64 {
        (self.func)(tau, z)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Pointwise image `g(J)`, on the same domain.
    pub fn map<G>(&self, g: G) -> ScalarField
    where
        G: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        let inner = self.func.clone();
        ScalarField {
            func: Arc::new(move |t, z| g(inner(t, z))),
            domain: self.domain,
            step: self.step,
        }
    }

    /// `J_R` as a complex field with zero imaginary part.
    pub fn real_part(&self) -> ScalarField {
        self.map(|c| C64::new(c.re, 0.0))
    }

    /// `J_I` as a complex field with zero imaginary part.
    pub fn imag_part(&self) -> ScalarField {
        self.map(|c| C64::new(c.im, 0.0))
    }

    /// Pull the field back through `transform`: `J'(τ, z) = J(τ, transform(z))`.
    pub fn pullback<T>(&self, domain: DomainBox, transform: T) -> ScalarField
    where
        T: Fn(&ComplexFourVector) -> ComplexFourVector + Send + Sync + 'static,
    {
        let inner = self.func.clone();
        ScalarField {
            func: Arc::new(move |t, z| inner(t, &transform(z))),
            domain,
            step: self.step,
        }
    }
}

/// `ε^{1/3} · scale`, the usual optimum for central first differences.
pub fn default_step(scale: f64) -> f64 {
    f64::EPSILON.cbrt() * scale
}

#[inline]
pub(crate) fn shifted(z: &ComplexFourVector, mu: usize, dx: f64, dy: f64) -> ComplexFourVector {
    let mut out = *z;
    out.components[mu] += C64::new(dx, dy);
    out
}

pub(crate) fn require_interior(
    domain: &DomainBox,
    tau: f64,
    z: &ComplexFourVector,
    tau_margin: f64,
    margin: f64,
) -> Result<()> {
    if domain.contains_with_margin(tau, z, tau_margin, margin) {
        return Ok(());
    }
    let axis = (0..4)
        .find(|&mu| {
            let probe = |v: f64, (lo, hi): (f64, f64)| v - margin >= lo && v + margin <= hi;
            !(probe(z[mu].re, domain.re[mu]) && probe(z[mu].im, domain.im[mu]))
        })
        .unwrap_or(0);
    Err(Error::StencilOutOfDomain { tau, axis })
}

// Raw stencils; callers are responsible for the domain margin.

#[inline]
pub(crate) fn d_x(f: &ScalarField, tau: f64, z: &ComplexFourVector, mu: usize, h: f64) -> C64 {
    (f.eval(tau, &shifted(z, mu, h, 0.0)) - f.eval(tau, &shifted(z, mu, -h, 0.0))) / (2.0 * h)
}

#[inline]
pub(crate) fn d_y(f: &ScalarField, tau: f64, z: &ComplexFourVector, mu: usize, h: f64) -> C64 {
    (f.eval(tau, &shifted(z, mu, 0.0, h)) - f.eval(tau, &shifted(z, mu, 0.0, -h))) / (2.0 * h)
}

#[inline]
pub(crate) fn d_tau(f: &ScalarField, tau: f64, z: &ComplexFourVector, h: f64) -> C64 {
    (f.eval(tau + h, z) - f.eval(tau - h, z)) / (2.0 * h)
}

#[inline]
pub(crate) fn d_xx(f: &ScalarField, tau: f64, z: &ComplexFourVector, mu: usize, h: f64) -> C64 {
    let c = f.eval(tau, z);
    (f.eval(tau, &shifted(z, mu, h, 0.0)) - c * 2.0 + f.eval(tau, &shifted(z, mu, -h, 0.0)))
        / (h * h)
}

#[inline]
pub(crate) fn d_yy(f: &ScalarField, tau: f64, z: &ComplexFourVector, mu: usize, h: f64) -> C64 {
    let c = f.eval(tau, z);
    (f.eval(tau, &shifted(z, mu, 0.0, h)) - c * 2.0 + f.eval(tau, &shifted(z, mu, 0.0, -h)))
        / (h * h)
}

#[inline]
pub(crate) fn d_xy(f: &ScalarField, tau: f64, z: &ComplexFourVector, mu: usize, h: f64) -> C64 {
    let pp = f.eval(tau, &shifted(z, mu, h, h));
    let pm = f.eval(tau, &shifted(z, mu, h, -h));
    let mp = f.eval(tau, &shifted(z, mu, -h, h));
    let mm = f.eval(tau, &shifted(z, mu, -h, -h));
    (pp - pm - mp + mm) / (4.0 * h * h)
}

/// Central difference in `τ`, checked against the domain.
pub fn partial_tau(f: &ScalarField, tau: f64, z: &ComplexFourVector, h: f64) -> Result<C64> {
    require_interior(f.domain(), tau, z, h, 0.0)?;
    Ok(d_tau(f, tau, z, h))
}

/// First derivatives at a probe along both coordinate directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeReport {
    /// `∂_{x^μ} J = ∂_x J_R + i ∂_x J_I`.
    pub d_x: [C64; 4],
    /// `∂_{y^μ} J = ∂_y J_R + i ∂_y J_I`.
    pub d_y: [C64; 4],
    /// Complex derivative `∂_{z^μ} J`, taken from the x-route.
    pub d_z: [C64; 4],
    /// `|∂_x J_R − ∂_y J_I| + |∂_x J_I + ∂_y J_R|`.
    pub cr_residuals: [f64; 4],
    /// `|x-route − y-route|` with the y-route `∂_y J_I − i ∂_y J_R`.
    pub consistency_residuals: [f64; 4],
}

impl DerivativeReport {
    pub fn gradient(&self) -> ComplexFourVector {
        ComplexFourVector::lower(self.d_z)
    }

    pub fn worst(&self) -> f64 {
        self.cr_residuals
            .iter()
            .chain(self.consistency_residuals.iter())
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn complex_derivative(
    f: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<DerivativeReport> {
    require_interior(f.domain(), tau, z, 0.0, 2.0 * h)?;
    Ok(complex_derivative_unchecked(f, tau, z, h))
}

pub(crate) fn complex_derivative_unchecked(
    f: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> DerivativeReport {
    let mut dx = [C64::new(0.0, 0.0); 4];
    let mut dy = [C64::new(0.0, 0.0); 4];
    let mut cr = [0.0; 4];
    let mut cons = [0.0; 4];
    for mu in 0..4 {
        dx[mu] = d_x(f, tau, z, mu, h);
        dy[mu] = d_y(f, tau, z, mu, h);
        cr[mu] = (dx[mu].re - dy[mu].im).abs() + (dx[mu].im + dy[mu].re).abs();
        let y_route = C64::new(dy[mu].im, -dy[mu].re);
        cons[mu] = (dx[mu] - y_route).norm();
    }
    DerivativeReport {
        d_x: dx,
        d_y: dy,
        d_z: dx,
        cr_residuals: cr,
        consistency_residuals: cons,
    }
}

/// Three stencil routes to `∂_{z^μ}∂_{z^μ} J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondDerivativeReport {
    /// `∂²_{x^μ} (J_R + i J_I)`
    pub xx: [C64; 4],
    /// `−∂²_{y^μ} (J_R + i J_I)`
    pub yy: [C64; 4],
    /// `∂_{x^μ}∂_{y^μ} (J_I − i J_R)`
    pub xy: [C64; 4],
    /// Largest pairwise difference of the three routes per axis.
    pub discrepancy: [f64; 4],
}

impl SecondDerivativeReport {
    pub fn value(&self) -> [C64; 4] {
        self.xx
    }
}

pub fn second_complex_derivative(
    f: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<SecondDerivativeReport> {
    require_interior(f.domain(), tau, z, 0.0, 3.0 * h)?;
    Ok(second_complex_derivative_unchecked(f, tau, z, h))
}

pub(crate) fn second_complex_derivative_unchecked(
    f: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> SecondDerivativeReport {
    let mut xx = [C64::new(0.0, 0.0); 4];
    let mut yy = xx;
    let mut xy = xx;
    let mut disc = [0.0; 4];
    for mu in 0..4 {
        xx[mu] = d_xx(f, tau, z, mu, h);
        yy[mu] = -d_yy(f, tau, z, mu, h);
        let m = d_xy(f, tau, z, mu, h);
        // J_I − i J_R = −i J
        xy[mu] = m * C64::new(0.0, -1.0);
        disc[mu] = (xx[mu] - yy[mu])
            .norm()
            .max((xx[mu] - xy[mu]).norm())
            .max((yy[mu] - xy[mu]).norm());
    }
    SecondDerivativeReport {
        xx,
        yy,
        xy,
        discrepancy: disc,
    }
}

/// Gradient `∂_{z^μ} J` as a lower-index vector.
pub fn gradient(
    f: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<ComplexFourVector> {
    Ok(complex_derivative(f, tau, z, h)?.gradient())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanReport {
    pub passed: bool,
    pub worst_residual: f64,
    pub worst_probe: usize,
    pub probes: usize,
}

/// Cauchy–Riemann and route-consistency residuals over a probe set.
pub fn analyticity_scan(
    f: &ScalarField,
    probes: &[(f64, ComplexFourVector)],
    h: f64,
    tol: f64,
) -> Result<ScanReport> {
    if probes.is_empty() {
        return Err(crate::error::domain(
            "analyticity scan needs at least one probe",
        ));
    }
    let mut worst = 0.0;
    let mut worst_probe = 0;
    for (k, (tau, z)) in probes.iter().enumerate() {
        let r = complex_derivative(f, *tau, z, h)?.worst();
        if r > worst || r.is_nan() {
            worst = if r.is_nan() { f64::INFINITY } else { r };
            worst_probe = k;
        }
    }
    Ok(ScanReport {
        passed: worst < tol,
        worst_residual: worst,
        worst_probe,
        probes: probes.len(),
    })
}

/// `Z = Re(Z) − i Re(iZ)` assembled from the two real parts.
#[inline]
pub fn from_real_parts(re_z: f64, re_iz: f64) -> C64 {
    C64::new(re_z, -re_iz)
}

/// `Z = Im(iZ) + i Im(Z)` assembled from the two imaginary parts.
#[inline]
pub fn from_imag_parts(im_iz: f64, im_z: f64) -> C64 {
    C64::new(im_iz, im_z)
}

/// Convenience: a probe list from plain points at a fixed `τ`.
pub fn probes_at(tau: f64, points: &[[C64; 4]]) -> Vec<(f64, ComplexFourVector)> {
    points
        .iter()
        .map(|p| (tau, ComplexFourVector::new(*p, IndexPosition::Upper)))
        .collect()
}
