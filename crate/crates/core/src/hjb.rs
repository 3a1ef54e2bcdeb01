//! Residuals of the real-part, imaginary-part and complex HJB equations.
//!
//! With `w*` the stationary control,
//!
//! ```text
//! HJB_Z:  −∂_τ J − [L(τ, z, w*) + Σ w*^μ ∂_μ J] − ½ Σ σ^μσ^μ ∂_μ∂_μ J
//! HJB_R:  −∂_τ J_R − [L_R + Σ (v ∂_x J_R + u ∂_y J_R)]
//!         − ½ Σ (σ_x² ∂²_xx J_R + σ_y² ∂²_yy J_R + 2 ε η σ_x σ_y ∂_x∂_y J_R)
//! ```
//!
//! and `HJB_I` like `HJB_R` with `L_I`, `J_I`. For analytic `J` the complex
//! residual is `HJB_R + i HJB_I`.

use alloc::format;
use alloc::vec::Vec;

use crate::ccalc::{self, require_interior, ScalarField};
use crate::control::{solve_optimal_control, StationarityResult};
use crate::error::Result;
use crate::lagrangian::{EMFieldConfig, Lagrangian};
use crate::probes::DomainBox;
use crate::spacetime::{contract, Boost, ComplexFourVector, IndexPosition, Metric, C64};
use crate::wiener::DiffusionSpec;

/// Everything needed to evaluate HJB residuals.
#[derive(Clone, Debug)]
pub struct HJBProblem {
    pub lagrangian: Lagrangian,
    pub spec: DiffusionSpec,
    pub tau_f: f64,
    pub domain: DomainBox,
    /// Starting point for the stationarity solve.
    pub guess: ComplexFourVector,
    pub newton_tol: f64,
}

impl HJBProblem {
    pub fn new(
        lagrangian: Lagrangian,
        spec: DiffusionSpec,
        tau_f: f64,
        domain: DomainBox,
    ) -> Result<Self> {
        if !tau_f.is_finite() {
            return Err(crate::error::domain("tau_f must be finite"));
        }
        if spec
            .complex_sigma_squared()
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(crate::error::domain(
                "complex diffusion coefficient is not finite",
            ));
        }
        Ok(HJBProblem {
            lagrangian,
            spec,
            tau_f,
            domain,
            guess: ComplexFourVector::zero(IndexPosition::Upper),
            newton_tol: 1e-12,
        })
    }

    pub fn with_guess(mut self, guess: ComplexFourVector) -> Self {
        self.guess = guess;
        self
    }

    pub fn metric(&self) -> Metric {
        self.spec.metric
    }

    /// Stationary control for a given gradient `∂_μ J`.
    pub fn optimal_control(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        dj: &ComplexFourVector,
    ) -> Result<StationarityResult> {
        solve_optimal_control(&self.lagrangian, tau, z, dj, &self.guess, self.newton_tol)
    }
}

/// Residual at one probe, with the control used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HjbPoint {
    pub tau: f64,
    pub z: ComplexFourVector,
    pub residual: C64,
    pub w_star: ComplexFourVector,
}

/// `½ Σ σ^μσ^μ ∂_μ∂_μ J` at a point.
pub fn second_order_term(
    spec: &DiffusionSpec,
    j: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<C64> {
    let d2 = ccalc::second_complex_derivative(j, tau, z, h)?.value();
    let s = spec.complex_sigma_squared();
    Ok((0..4)
        .map(|mu| s[mu] * d2[mu])
        .fold(C64::new(0.0, 0.0), |a, b| a + b)
        * 0.5)
}

pub fn hjb_residual_complex(
    p: &HJBProblem,
    j: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<HjbPoint> {
    require_interior(j.domain(), tau, z, h, 3.0 * h)?;
    let d = ccalc::complex_derivative(j, tau, z, h)?;
    let dj = d.gradient();
    let ctrl = p.optimal_control(tau, z, &dj)?;
    let w = ctrl.w_star;
    let d_tau = ccalc::partial_tau(j, tau, z, h)?;
    let running = p.lagrangian.value(tau, z, &w) + contract(&w, &dj, &p.metric());
    let diffusion = second_order_term(&p.spec, j, tau, z, h)?;
    Ok(HjbPoint {
        tau,
        z: *z,
        residual: -d_tau - running - diffusion,
        w_star: w,
    })
}

/// Real-pair residuals `(HJB_R, HJB_I)` for real-valued fields `J_R`, `J_I`
/// (only the real part of each field's value is used).
pub fn hjb_residual_pair(
    p: &HJBProblem,
    j_r: &ScalarField,
    j_i: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<(f64, f64, ComplexFourVector)> {
    require_interior(j_r.domain(), tau, z, h, 3.0 * h)?;
    require_interior(j_i.domain(), tau, z, h, 3.0 * h)?;
    let mut dj = ComplexFourVector::zero(IndexPosition::Lower);
    for mu in 0..4 {
        dj[mu] = C64::new(
            ccalc::d_x(j_r, tau, z, mu, h).re,
            ccalc::d_x(j_i, tau, z, mu, h).re,
        );
    }
    let w = p.optimal_control(tau, z, &dj)?.w_star;
    let l = p.lagrangian.value(tau, z, &w);
    let spec = &p.spec;
    let part = |f: &ScalarField, l_part: f64| {
        let mut first = 0.0;
        let mut second = 0.0;
        for mu in 0..4 {
            let (sx, sy) = (spec.sigma_x[mu], spec.sigma_y[mu]);
            first += w[mu].re * ccalc::d_x(f, tau, z, mu, h).re
                + w[mu].im * ccalc::d_y(f, tau, z, mu, h).re;
            second += sx * sx * ccalc::d_xx(f, tau, z, mu, h).re
                + sy * sy * ccalc::d_yy(f, tau, z, mu, h).re
                + 2.0 * spec.sign_rule(mu) * sx * sy * ccalc::d_xy(f, tau, z, mu, h).re;
        }
        -ccalc::d_tau(f, tau, z, h).re - (l_part + first) - 0.5 * second
    };
    Ok((part(j_r, l.re), part(j_i, l.im), w))
}

/// `|Σ_μ (σ_x² ∂²_xx + σ_y² ∂²_yy) J_R|` and the same for `J_I`, the
/// non-mixed second-order contributions.
pub fn nonmixed_terms(
    spec: &DiffusionSpec,
    j: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<(f64, f64)> {
    require_interior(j.domain(), tau, z, 0.0, 3.0 * h)?;
    let mut acc = C64::new(0.0, 0.0);
    for mu in 0..4 {
        let (sx, sy) = (spec.sigma_x[mu], spec.sigma_y[mu]);
        acc +=
            ccalc::d_xx(j, tau, z, mu, h) * (sx * sx) + ccalc::d_yy(j, tau, z, mu, h) * (sy * sy);
    }
    Ok((acc.re.abs(), acc.im.abs()))
}

/// Pair and complex residuals side by side with a stencil error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairConsistency {
    pub complex: C64,
    pub pair: C64,
    pub difference: f64,
    /// Richardson-style estimate `|R(h) − R(2h)|` plus a round-off bound.
    pub stencil_error: f64,
}

impl PairConsistency {
    pub fn within(&self, factor: f64) -> bool {
        self.difference <= factor * self.stencil_error
    }
}

pub fn pair_complex_consistency(
    p: &HJBProblem,
    j: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<PairConsistency> {
    let (jr, ji) = (j.real_part(), j.imag_part());
    let eval = |h: f64| -> Result<(C64, C64)> {
        let c = hjb_residual_complex(p, j, tau, z, h)?.residual;
        let (r, i, _) = hjb_residual_pair(p, &jr, &ji, tau, z, h)?;
        Ok((c, C64::new(r, i)))
    };
    let (c1, p1) = eval(h)?;
    let (c2, p2) = eval(2.0 * h)?;
    let scale = j
        .eval(tau, z)
        .norm()
        .max(p.lagrangian.value(tau, z, &p.guess).norm())
        .max(1.0);
    let roundoff = 16.0 * f64::EPSILON * scale / (h * h);
    Ok(PairConsistency {
        complex: c1,
        pair: p1,
        difference: (c1 - p1).norm(),
        stencil_error: (c1 - c2).norm().max((p1 - p2).norm()) + roundoff,
    })
}

/// `max |J(τ_f, z)|` over the probes.
pub fn boundary_check(j: &ScalarField, tau_f: f64, probes: &[(f64, ComplexFourVector)]) -> f64 {
    probes
        .iter()
        .map(|(_, z)| j.eval(tau_f, z).norm())
        .fold(0.0, f64::max)
}

/// `J = Σ p_μ z^μ + a (τ_f − τ)` with `a = σ̃mc²/2 − Σ η P_μP_μ / (2m)`,
/// `P = p + qA`, which solves the HJB equation of the quadratic EM
/// Lagrangian for constant `A`. With `p = 0` it also satisfies `J(τ_f, ·) = 0`.
pub fn free_particle_field(
    cfg: &EMFieldConfig,
    p: [C64; 4],
    tau_f: f64,
    domain: DomainBox,
) -> Result<ScalarField> {
    let a_field = cfg.potential.constant_value().ok_or_else(|| {
        crate::error::domain(format!(
            "potential `{}` is not constant",
            cfg.potential.name()
        ))
    })?;
    let g = cfg.metric;
    let big_p = ComplexFourVector::lower(core::array::from_fn(|mu| p[mu] + a_field[mu] * cfg.q));
    let a = C64::new(0.5 * g.sigma_tilde() * cfg.m * cfg.c * cfg.c, 0.0)
        - contract(&big_p, &big_p, &g) / (2.0 * cfg.m);
    let pv = ComplexFourVector::lower(p);
    Ok(ScalarField::new(domain, move |tau, z| {
        contract(&pv, z, &g) + a * (tau_f - tau)
    }))
}

/// d'Alembertian `Σ η^{μμ} ∂_μ∂_μ J` at `z`.
pub fn dalembertian(
    g: &Metric,
    j: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<C64> {
    let d2 = ccalc::second_complex_derivative(j, tau, z, h)?.value();
    Ok((0..4)
        .map(|mu| d2[mu] * g.eta(mu))
        .fold(C64::new(0.0, 0.0), |a, b| a + b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceReport {
    pub original: C64,
    pub boosted: C64,
    pub discrepancy: f64,
}

/// d'Alembertian of `J` at `z` against that of `J' = J ∘ Λ⁻¹` at `Λz`.
pub fn covariance_check(
    g: &Metric,
    j: &ScalarField,
    boost: &Boost,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<CovarianceReport> {
    let original = dalembertian(g, j, tau, z, h)?;
    let inv = boost.inverse();
    let boosted_field = j.pullback(DomainBox::unbounded(), move |zp| inv.apply(zp));
    let zp = boost.apply(z);
    let boosted = dalembertian(g, &boosted_field, tau, &zp, h)?;
    Ok(CovarianceReport {
        original,
        boosted,
        discrepancy: (original - boosted).norm(),
    })
}

/// Residuals over a probe set.
pub fn residual_scan(
    p: &HJBProblem,
    j: &ScalarField,
    probes: &[(f64, ComplexFourVector)],
    h: f64,
) -> Result<Vec<HjbPoint>> {
    probes
        .iter()
        .map(|(t, z)| hjb_residual_complex(p, j, *t, z, h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::em_lagrangian_weak;
    use crate::spacetime::{Sign, Signature};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn point() -> ComplexFourVector {
        ComplexFourVector::upper([c(0.1, 0.2), c(-0.3, 0.1), c(0.2, -0.2), c(0.05, 0.3)])
    }

    fn zero_field() -> ScalarField {
        ScalarField::unbounded(|_, _| c(0.0, 0.0))
    }

    #[test]
    fn trivial_residuals() {
        let g = Metric::default();
        let p = HJBProblem::new(
            Lagrangian::zero(),
            DiffusionSpec::isotropic(1.0, g).unwrap(),
            1.0,
            DomainBox::unbounded(),
        )
        .unwrap();
        let r = hjb_residual_complex(&p, &zero_field(), 0.5, &point(), 1e-3).unwrap();
        assert_eq!(r.residual, c(0.0, 0.0));
        let (a, b, _) =
            hjb_residual_pair(&p, &zero_field(), &zero_field(), 0.5, &point(), 1e-3).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn free_particle_solves_and_meets_boundary() {
        let g = Metric::default();
        let cfg = EMFieldConfig::free(1.0, 1.0, g).unwrap();
        let bx = DomainBox::cube((0.0, 1.0), 1.0);
        let j = free_particle_field(&cfg, [c(0.0, 0.0); 4], 1.0, bx).unwrap();
        for spec in [
            DiffusionSpec::deterministic(g),
            DiffusionSpec::quantum(1.0, 1.0, g).unwrap(),
        ] {
            let p = HJBProblem::new(em_lagrangian_weak(&cfg), spec, 1.0, bx).unwrap();
            let r = hjb_residual_complex(&p, &j, 0.5, &point(), 1e-3).unwrap();
            assert!(r.residual.norm() < 1e-6, "{r:?}");
        }
        let probes = crate::probes::halton_probes(&bx, 16, 0).unwrap();
        assert!(boundary_check(&j, 1.0, &probes) < 1e-12);
    }

    #[test]
    fn purely_imaginary_second_order_term() {
        let g = Metric::new(Signature::TimeNegative, Sign::Minus);
        let spec = DiffusionSpec::quantum(0.7, 1.3, g).unwrap();
        let j = ScalarField::unbounded(|_, z| z[0] * z[1] + z[2] * z[2] * c(0.5, 0.2) + z[3].exp());
        let term = second_order_term(&spec, &j, 0.0, &point(), 1e-3).unwrap();
        let box_ = dalembertian(&g, &j, 0.0, &point(), 1e-3).unwrap();
        let expected = c(0.0, g.epsilon() * 0.7 / 1.3) * box_;
        assert!((term - expected).norm() < 1e-12);
    }

    #[test]
    fn nonmixed_terms_cancel_for_analytic_fields() {
        let g = Metric::default();
        let spec = DiffusionSpec::isotropic(1.0, g).unwrap();
        let j = ScalarField::unbounded(|_, z| z[0] * z[0] * c(1.0, 0.5) + z[1] * z[2]);
        let (r, i) = nonmixed_terms(&spec, &j, 0.0, &point(), 1e-3).unwrap();
        assert!(r < 1e-6 && i < 1e-6);
    }

    #[test]
    fn covariance_of_quadratic_forms() {
        let g = Metric::default();
        let q = ScalarField::unbounded(move |_, z| contract(z, z, &g));
        let b = Boost::new(1, 0.3).unwrap();
        let r = covariance_check(&g, &q, &b, 0.0, &point(), 1e-3).unwrap();
        assert!((r.original - c(8.0, 0.0)).norm() < 1e-6);
        assert!(r.discrepancy < 1e-8);
        let q2 = ScalarField::unbounded(|_, z| z[0] * z[0] + z[1] * z[1]);
        assert!(
            covariance_check(&g, &q2, &b, 0.0, &point(), 1e-3)
                .unwrap()
                .discrepancy
                < 1e-6
        );
        let lin = ScalarField::unbounded(|_, z| z[0] * 3.0 - z[2]);
        let r = covariance_check(&g, &lin, &b, 0.0, &point(), 1e-3).unwrap();
        assert!(r.original.norm() < 1e-9 && r.boosted.norm() < 1e-9);
    }

    #[test]
    fn non_constant_potential_has_no_closed_form() {
        let cfg = EMFieldConfig::new(
            1.0,
            1.0,
            1.0,
            crate::lagrangian::VectorPotential::linear_electric(1.0),
            Metric::default(),
        )
        .unwrap();
        assert!(free_particle_field(&cfg, [c(0.0, 0.0); 4], 1.0, DomainBox::unbounded()).is_err());
    }
}
