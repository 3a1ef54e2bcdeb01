//! Gamma matrices, the Hopf–Cole identity and the linearized HJB equation.
//!
//! Writing each spinor component as `φ_r = exp(J̃_r)` with
//! `J^{(r)} = −iε_r ħ J̃_r` turns the componentwise EM HJB equation, with the
//! square root replaced by `m c γ^μ w_μ`, into the linear equation
//!
//! ```text
//! iκ_r ħ m ∂_τ φ_r = m c Σ γ^μ_{rs} (iκ_r ħ ∂_μ φ_s − e A_μ φ_s)
//!                    + ħ² ∂^μ∂_μ φ_r + 2e iκ_r ħ A^μ ∂_μ φ_r − e² A^μ A_μ φ_r
//! ```
//!
//! where `κ_r` is `1` in [`SignConvention::AsPrinted`] and `ε_r` in
//! [`SignConvention::BranchSigned`].

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Matrix4, Vector4};

use crate::ccalc::{self, require_interior, ScalarField};
use crate::error::{domain, Error, Result};
use crate::lagrangian::EMFieldConfig;
use crate::probes::DomainBox;
use crate::spacetime::{ComplexFourVector, IndexPosition, Metric, Signature, C64};

pub type Mat4 = Matrix4<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `γ⁰..γ³` for one metric signature.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    pub gamma: [Mat4; 4],
    pub metric: Metric,
    pub representation: &'static str,
}

/// Dirac representation for `(+,−,−,−)`; every matrix multiplied by `i` for
/// `(−,+,+,+)`.
pub fn build_gammas(g: &Metric) -> GammaSet {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let g0 = Mat4::from_row_slice(&[l, o, o, o, o, l, o, o, o, o, -l, o, o, o, o, -l]);
    // [[0, σ_k], [−σ_k, 0]]
    let block = |s: [C64; 4]| {
        Mat4::from_row_slice(&[
            o, o, s[0], s[1], //
            o, o, s[2], s[3], //
            -s[0], -s[1], o, o, //
            -s[2], -s[3], o, o,
        ])
    };
    let g1 = block([o, l, l, o]);
    let g2 = block([o, -i, i, o]);
    let g3 = block([l, o, o, -l]);
    let mut gamma = [g0, g1, g2, g3];
    let representation = match g.signature {
        Signature::TimePositive => "dirac",
        Signature::TimeNegative => {
            for m in &mut gamma {
                *m *= i;
            }
            "dirac-times-i"
        }
    };
    GammaSet {
        gamma,
        metric: *g,
        representation,
    }
}

impl GammaSet {
    pub fn anticommutator(&self, mu: usize, nu: usize) -> Mat4 {
        self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu]
    }

    /// Entrywise error of `{γ^μ, γ^ν} = 2η^{μν} I` for one pair.
    pub fn clifford_error(&self, mu: usize, nu: usize) -> f64 {
        let eta = if mu == nu { self.metric.eta(mu) } else { 0.0 };
        let target = Mat4::identity() * c(2.0 * eta, 0.0);
        max_entry(&(self.anticommutator(mu, nu) - target))
    }

    /// Worst Clifford error over all 16 ordered pairs.
    pub fn clifford_max_error(&self) -> f64 {
        (0..16)
            .map(|k| self.clifford_error(k / 4, k % 4))
            .fold(0.0, f64::max)
    }

    /// `Σ γ^μ a_μ` for a lower-index `a`.
    pub fn slash(&self, a: &[C64; 4]) -> Mat4 {
        (0..4).fold(Mat4::zeros(), |acc, mu| acc + self.gamma[mu] * a[mu])
    }

    /// Entrywise error of `(γ·a)² = (Σ η a_μ a_μ) I`.
    pub fn linearization_error(&self, a: &[C64; 4]) -> f64 {
        let s = self.slash(a);
        let norm = (0..4).fold(c(0.0, 0.0), |acc, mu| {
            acc + a[mu] * a[mu] * self.metric.eta(mu)
        });
        max_entry(&(s * s - Mat4::identity() * norm))
    }

    /// Row-major `[re, im]` pairs, one 4×4 block per matrix.
    pub fn to_pairs(&self) -> [[[[f64; 2]; 4]; 4]; 4] {
        core::array::from_fn(|mu| {
            core::array::from_fn(|r| {
                core::array::from_fn(|s| {
                    let v = self.gamma[mu][(r, s)];
                    [v.re, v.im]
                })
            })
        })
    }
}

fn max_entry(m: &Mat4) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub type SpinorFn = dyn Fn(f64, &ComplexFourVector) -> [C64; 4] + Send + Sync;

/// Four-component complex field `φ(τ, z)`.
#[derive(Clone)]
pub struct SpinorField {
    func: Arc<SpinorFn>,
    domain: DomainBox,
}

impl fmt::Debug for SpinorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorField")
            .field("domain", &self.domain)
            .finish()
    }
}

impl SpinorField {
    pub fn new<F>(domain: DomainBox, f: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector) -> [C64; 4] + Send + Sync + 'static,
    {
        SpinorField {
            func: Arc::new(f),
            domain,
        }
    }

    /// `χ exp(i Σ k_μ z^μ − iλτ)`.
    pub fn plane_wave(chi: [C64; 4], k: [C64; 4], lambda: C64, domain: DomainBox) -> Self {
        Self::new(domain, move |tau, z| {
            let phase = (0..4).fold(c(0.0, 0.0), |acc, mu| acc + k[mu] * z[mu]);
            let e = (c(0.0, 1.0) * phase - c(0.0, 1.0) * lambda * tau).exp();
            chi.map(|x| x * e)
        })
    }

    #[inline]
    pub fn eval(&self, tau: f64, z: &ComplexFourVector) -> [C64; 4] {
        (self.func)(tau, z)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn component(&self, r: usize) -> ScalarField {
        let f = self.func.clone();
        ScalarField::new(self.domain, move |t, z| f(t, z)[r])
    }
}

/// Sign factor in front of `iħ` in row `r` of the linear equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    /// `κ_r = 1` for every row.
    AsPrinted,
    /// `κ_r = ε_r`: `+1` for rows 0, 1 and `−1` for rows 2, 3.
    BranchSigned,
}

/// `ε_r` for a zero-based row index.
#[inline]
pub fn branch_sign(r: usize) -> f64 {
    if r < 2 {
        1.0
    } else {
        -1.0
    }
}

impl SignConvention {
    #[inline]
    pub fn kappa(self, r: usize) -> f64 {
        match self {
            SignConvention::AsPrinted => 1.0,
            SignConvention::BranchSigned => branch_sign(r),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignConvention::AsPrinted => "as-printed",
            SignConvention::BranchSigned => "branch-signed",
        }
    }
}

/// Parameters of the linearized equation; the charge `e` is `cfg.q`.
#[derive(Clone, Debug)]
pub struct LinearizedProblem {
    pub cfg: EMFieldConfig,
    pub hbar: f64,
    pub gammas: GammaSet,
    pub convention: SignConvention,
}

impl LinearizedProblem {
    pub fn new(cfg: EMFieldConfig, hbar: f64, convention: SignConvention) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(domain("hbar must be positive"));
        }
        let gammas = build_gammas(&cfg.metric);
        Ok(LinearizedProblem {
            cfg,
            hbar,
            gammas,
            convention,
        })
    }
}

fn eta_sum(g: &Metric, f: impl Fn(usize) -> C64) -> C64 {
    (0..4).fold(c(0.0, 0.0), |acc, mu| acc + f(mu) * g.eta(mu))
}

/// `Σ η^{μμ} (∂_μ J̃)² + Σ η^{μμ} ∂²_μ J̃` against `Σ η^{μμ} ∂²_μ φ / φ`, `φ = exp J̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopfColeReport {
    pub lhs: C64,
    pub rhs: C64,
    pub discrepancy: f64,
}

pub fn hopf_cole_check(
    g: &Metric,
    jt: &ScalarField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<HopfColeReport> {
    require_interior(jt.domain(), tau, z, 0.0, 3.0 * h)?;
    let phi = jt.map(|v| v.exp());
    let centre = phi.eval(tau, z);
    if centre.norm() < 1e-12 {
        return Err(Error::Precondition(
            "φ = exp(J̃) vanishes at the probe".into(),
        ));
    }
    let d = ccalc::complex_derivative(jt, tau, z, h)?;
    let lhs = eta_sum(g, |mu| {
        d.d_z[mu] * d.d_z[mu] + ccalc::d_xx(jt, tau, z, mu, h)
    });
    let rhs = eta_sum(g, |mu| ccalc::d_xx(&phi, tau, z, mu, h)) / centre;
    Ok(HopfColeReport {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).norm(),
    })
}

/// Componentwise residual of the linear equation at `(τ, z)`.
pub fn linearized_residual(
    p: &LinearizedProblem,
    phi: &SpinorField,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<[C64; 4]> {
    require_interior(phi.domain(), tau, z, h, 2.0 * h)?;
    let g = p.cfg.metric;
    let (m, cc, e, hbar) = (p.cfg.m, p.cfg.c, p.cfg.q, p.hbar);
    let a = p.cfg.potential.at(tau, z);
    let comps: Vec<ScalarField> = (0..4).map(|r| phi.component(r)).collect();
    let val = phi.eval(tau, z);
    let dphi: [[C64; 4]; 4] =
        core::array::from_fn(|s| core::array::from_fn(|mu| ccalc::d_x(&comps[s], tau, z, mu, h)));
    let i = c(0.0, 1.0);
    let aa = eta_sum(&g, |mu| a[mu] * a[mu]);
    Ok(core::array::from_fn(|r| {
        let kappa = p.convention.kappa(r);
        let dt = ccalc::d_tau(&comps[r], tau, z, h);
        let mut gamma_term = c(0.0, 0.0);
        for mu in 0..4 {
            for s in 0..4 {
                let gm = p.gammas.gamma[mu][(r, s)];
                gamma_term += gm * (i * kappa * hbar * dphi[s][mu] - a[mu] * e * val[s]);
            }
        }
        let box_ = eta_sum(&g, |mu| ccalc::d_xx(&comps[r], tau, z, mu, h));
        let a_grad = eta_sum(&g, |mu| a[mu] * dphi[r][mu]);
        i * kappa * hbar * m * dt
            - (gamma_term * (m * cc) + box_ * (hbar * hbar) + i * (2.0 * e * kappa * hbar) * a_grad
                - aa * (e * e) * val[r])
    }))
}

/// Both routes at one component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouteComparison {
    /// `m ×` the expanded HJB residual built from `J^{(r)} = −iε_r ħ log φ_r`.
    pub nonlinear: C64,
    /// Linear residual of row `r` divided by `φ_r`.
    pub linear: C64,
    pub discrepancy: f64,
}

/// `J^{(s)} = −iε_s ħ log φ_s`, with the logarithm continued from the value at
/// the probe so that stencils never cross a branch cut.
fn log_field(
    phi: &SpinorField,
    s: usize,
    hbar: f64,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<(ScalarField, C64)> {
    let centre = phi.eval(tau, z)[s];
    if !(centre.norm() >= 1e-12) {
        return Err(Error::Branch { component: s });
    }
    // every stencil point must stay within a quarter turn of the centre phase
    let mut pts = Vec::with_capacity(34);
    for mu in 0..4 {
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            pts.push((tau, ccalc::shifted(z, mu, 3.0 * h * dx, 3.0 * h * dy)));
        }
    }
    pts.push((tau + h, *z));
    pts.push((tau - h, *z));
    for (t, q) in &pts {
        let ratio = phi.eval(*t, q)[s] / centre;
        if !(ratio.norm() >= 1e-12) || ratio.arg().abs() > core::f64::consts::FRAC_PI_2 {
            return Err(Error::Branch { component: s });
        }
    }
    let f = phi.func.clone();
    let log_centre = centre.ln();
    let factor = c(0.0, -branch_sign(s) * hbar);
    let field = ScalarField::new(phi.domain, move |t, q| {
        factor * (log_centre + (f(t, q)[s] / centre).ln())
    });
    Ok((field, factor * log_centre))
}

/// Compare the expanded nonlinear HJB residual for component `r` with the
/// linear residual of row `r` divided by `φ_r`.
///
/// With `κ_r = ε_r` the two agree identically; the printed convention
/// `κ_r = 1` leaves a mismatch in rows 2 and 3 unless the field is trivial.
pub fn nonlinear_linear_consistency(
    p: &LinearizedProblem,
    phi: &SpinorField,
    r: usize,
    tau: f64,
    z: &ComplexFourVector,
    h: f64,
) -> Result<RouteComparison> {
    if r > 3 {
        return Err(domain("spinor component index must be 0..=3"));
    }
    require_interior(phi.domain(), tau, z, h, 3.0 * h)?;
    let g = p.cfg.metric;
    let (m, cc, q, hbar) = (p.cfg.m, p.cfg.c, p.cfg.q, p.hbar);
    let a = p.cfg.potential.at(tau, z);
    let mut fields = Vec::with_capacity(4);
    let mut values = [c(0.0, 0.0); 4];
    for s in 0..4 {
        let (f, v) = log_field(phi, s, hbar, tau, z, h)?;
        fields.push(f);
        values[s] = v;
    }
    let i = c(0.0, 1.0);
    let eps_r = branch_sign(r);
    // J̃_s = iε_s J^{(s)} / ħ
    let jt: [C64; 4] = core::array::from_fn(|s| i * branch_sign(s) * values[s] / hbar);
    let grads: [[C64; 4]; 4] =
        core::array::from_fn(|s| core::array::from_fn(|mu| ccalc::d_x(&fields[s], tau, z, mu, h)));
    let mut gterm = c(0.0, 0.0);
    for mu in 0..4 {
        for s in 0..4 {
            let rho = (jt[s] - jt[r]).exp();
            gterm += p.gammas.gamma[mu][(r, s)]
                * (grads[s][mu] * branch_sign(s) + a[mu] * (eps_r * q))
                * rho;
        }
    }
    let jr = &fields[r];
    let box_ = eta_sum(&g, |mu| ccalc::d_xx(jr, tau, z, mu, h));
    let sq = eta_sum(&g, |mu| grads[r][mu] * grads[r][mu]);
    let cross = eta_sum(&g, |mu| grads[r][mu] * a[mu]);
    let aa = eta_sum(&g, |mu| a[mu] * a[mu]);
    let dt = ccalc::d_tau(jr, tau, z, h);
    let bracket = -gterm * (eps_r * cc) + i * (eps_r * hbar / m) * box_
        - sq / m
        - cross * (2.0 * q / m)
        - aa * (q * q / m);
    let nonlinear = (-dt - bracket) * m;
    let lin = linearized_residual(p, phi, tau, z, h)?;
    let linear = lin[r] / phi.eval(tau, z)[r];
    Ok(RouteComparison {
        nonlinear,
        linear,
        discrepancy: (nonlinear - linear).norm(),
    })
}

/// `K` with `λ χ = K χ` for plane waves `χ exp(i k·z − iλτ)` under a
/// constant potential.
pub fn plane_wave_operator(p: &LinearizedProblem, k: &[C64; 4]) -> Result<Mat4> {
    let a = p
        .cfg
        .potential
        .constant_value()
        .ok_or_else(|| domain("plane waves need a constant potential"))?;
    let g = p.cfg.metric;
    let (m, cc, e, hbar) = (p.cfg.m, p.cfg.c, p.cfg.q, p.hbar);
    let gk = p.gammas.slash(k);
    let ga = p.gammas.slash(&a);
    let kk = eta_sum(&g, |mu| k[mu] * k[mu]);
    let ak = eta_sum(&g, |mu| a[mu] * k[mu]);
    let aa = eta_sum(&g, |mu| a[mu] * a[mu]);
    Ok(Mat4::from_fn(|r, s| {
        let kappa = p.convention.kappa(r);
        let mut v = (-gk[(r, s)] * (kappa * hbar) - ga[(r, s)] * e) * (m * cc);
        if r == s {
            v += -kk * (hbar * hbar) - ak * (2.0 * e * kappa * hbar) - aa * (e * e);
        }
        v * (kappa / (hbar * m))
    }))
}

/// An eigenpair of the plane-wave operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWaveMode {
    pub lambda: C64,
    pub chi: [C64; 4],
    /// `‖(K − λ) χ‖∞` with `‖χ‖₂ = 1`.
    pub residual: f64,
}

/// Eigenvalues from the complex Schur form, eigenvectors as the
/// smallest-singular-value direction of `K − λ I`.
pub fn plane_wave_modes(p: &LinearizedProblem, k: &[C64; 4]) -> Result<Vec<PlaneWaveMode>> {
    let kmat = plane_wave_operator(p, k)?;
    let eig = nalgebra::linalg::Schur::new(kmat)
        .eigenvalues()
        .ok_or_else(|| Error::Singular("Schur decomposition failed".into()))?;
    let mut out = Vec::with_capacity(4);
    for lambda in eig.iter() {
        let shifted = kmat - Mat4::identity() * *lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Singular("SVD failed".into()))?;
        let (idx, _) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (i, s)| if *s < best.1 { (i, *s) } else { best },
                );
        let chi: Vector4<C64> = v_t.row(idx).transpose().map(|x| x.conj());
        let residual = (kmat * chi - chi * *lambda)
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        out.push(PlaneWaveMode {
            lambda: *lambda,
            chi: [chi[0], chi[1], chi[2], chi[3]],
            residual,
        });
    }
    out.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    Ok(out)
}

/// Free-particle dispersion for the printed convention:
/// `λ = (−m c ħ s − ħ² k·k) / (ħ m)` with `s = ±√(k·k)`.
pub fn free_dispersion(p: &LinearizedProblem, k: &[C64; 4]) -> [C64; 2] {
    let g = p.cfg.metric;
    let (m, cc, hbar) = (p.cfg.m, p.cfg.c, p.hbar);
    let kk = eta_sum(&g, |mu| k[mu] * k[mu]);
    let s = kk.sqrt();
    [
        (-s * (m * cc * hbar) - kk * (hbar * hbar)) / (hbar * m),
        (s * (m * cc * hbar) - kk * (hbar * hbar)) / (hbar * m),
    ]
}

/// Lower-index wave vector as a four-vector.
pub fn wave_vector(k: [C64; 4]) -> ComplexFourVector {
    ComplexFourVector::new(k, IndexPosition::Lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::VectorPotential;
    use crate::spacetime::Sign;

    fn metrics() -> [Metric; 2] {
        [
            Metric::new(Signature::TimeNegative, Sign::Plus),
            Metric::new(Signature::TimePositive, Sign::Plus),
        ]
    }

    #[test]
    fn clifford_relations() {
        for g in metrics() {
            let gs = build_gammas(&g);
            assert!(gs.clifford_max_error() < 1e-14);
            assert_eq!(max_entry(&gs.anticommutator(0, 1)), 0.0);
        }
        let gs = build_gammas(&Metric::default());
        assert_eq!(gs.gamma[0] * gs.gamma[0], -Mat4::identity());
        let a = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let s = gs.slash(&a);
        assert_eq!(s * s, Mat4::identity() * c(-1.0, 0.0));
        assert!(
            gs.linearization_error(&[c(0.3, 0.1), c(-1.0, 0.2), c(0.5, 0.0), c(0.0, -0.7)]) < 1e-12
        );
    }

    #[test]
    fn hopf_cole_examples() {
        let g = Metric::default();
        let zero = ScalarField::unbounded(|_, _| c(0.0, 0.0));
        let z = ComplexFourVector::upper([c(0.1, 0.0), c(0.2, 0.1), c(0.0, 0.0), c(-0.1, 0.2)]);
        let r = hopf_cole_check(&g, &zero, 0.0, &z, 1e-3).unwrap();
        assert_eq!(r.discrepancy, 0.0);
        let k = [c(0.3, 0.1), c(-0.2, 0.0), c(0.1, 0.2), c(0.4, 0.0)];
        let lin =
            ScalarField::unbounded(move |_, z| (0..4).fold(c(0.0, 0.0), |a, mu| a + k[mu] * z[mu]));
        let r = hopf_cole_check(&g, &lin, 0.0, &z, 1e-3).unwrap();
        let expect = eta_sum(&g, |mu| k[mu] * k[mu]);
        assert!((r.lhs - expect).norm() < 1e-8);
        assert!(r.discrepancy < 1e-8);
    }

    fn problem(conv: SignConvention, a: [C64; 4]) -> LinearizedProblem {
        let cfg = EMFieldConfig::new(
            0.8,
            1.0,
            1.0,
            VectorPotential::constant(a),
            Metric::default(),
        )
        .unwrap();
        LinearizedProblem::new(cfg, 1.0, conv).unwrap()
    }

    fn generic_k() -> [C64; 4] {
        [c(0.35, 0.0), c(0.2, 0.05), c(-0.15, 0.0), c(0.1, -0.05)]
    }

    fn probe() -> ComplexFourVector {
        ComplexFourVector::upper([c(0.1, 0.05), c(-0.2, 0.1), c(0.05, 0.0), c(0.15, -0.1)])
    }

    #[test]
    fn zero_spinor_has_zero_residual() {
        let p = problem(SignConvention::AsPrinted, [c(0.1, 0.0); 4]);
        let zero = SpinorField::new(DomainBox::unbounded(), |_, _| [c(0.0, 0.0); 4]);
        let r = linearized_residual(&p, &zero, 0.0, &probe(), 1e-3).unwrap();
        assert!(r.iter().all(|x| *x == c(0.0, 0.0)));
    }

    #[test]
    fn plane_waves_solve_the_linear_equation() {
        for conv in [SignConvention::AsPrinted, SignConvention::BranchSigned] {
            for a in [
                [c(0.0, 0.0); 4],
                [c(0.2, 0.0), c(-0.1, 0.0), c(0.05, 0.0), c(0.1, 0.0)],
            ] {
                let p = problem(conv, a);
                let modes = plane_wave_modes(&p, &generic_k()).unwrap();
                assert_eq!(modes.len(), 4);
                for mode in modes {
                    assert!(mode.residual < 1e-10);
                    let phi = SpinorField::plane_wave(
                        mode.chi,
                        generic_k(),
                        mode.lambda,
                        DomainBox::unbounded(),
                    );
                    let r = linearized_residual(&p, &phi, 0.3, &probe(), 1e-3).unwrap();
                    let worst = r.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    assert!(worst < 1e-6, "{conv:?} {worst}");
                }
            }
        }
    }

    #[test]
    fn free_dispersion_matches_eigenvalues() {
        let p = problem(SignConvention::AsPrinted, [c(0.0, 0.0); 4]);
        let k = generic_k();
        let modes = plane_wave_modes(&p, &k).unwrap();
        let closed = free_dispersion(&p, &k);
        for mode in modes {
            let d = closed
                .iter()
                .map(|l| (l - mode.lambda).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-10, "{:?}", mode.lambda);
        }
    }

    #[test]
    fn minimal_substitution_shifts_the_spectrum() {
        let a = [c(0.2, 0.0), c(-0.1, 0.0), c(0.05, 0.0), c(0.1, 0.0)];
        let with_a = problem(SignConvention::AsPrinted, a);
        let free = problem(SignConvention::AsPrinted, [c(0.0, 0.0); 4]);
        let k = generic_k();
        let shifted: [C64; 4] =
            core::array::from_fn(|mu| k[mu] + a[mu] * (with_a.cfg.q / with_a.hbar));
        let l1 = plane_wave_modes(&with_a, &k).unwrap();
        let l2 = plane_wave_modes(&free, &shifted).unwrap();
        for (x, y) in l1.iter().zip(&l2) {
            assert!((x.lambda - y.lambda).norm() < 1e-10);
        }
    }

    #[test]
    fn routes_agree_with_branch_signs() {
        let a = [c(0.2, 0.0), c(-0.1, 0.0), c(0.05, 0.0), c(0.1, 0.0)];
        let k = generic_k();
        let p = problem(SignConvention::BranchSigned, a);
        let chi = [c(1.0, 0.2), c(0.5, -0.3), c(-0.4, 0.1), c(0.3, 0.6)];
        let phi = SpinorField::plane_wave(chi, k, c(0.7, 0.0), DomainBox::unbounded());
        for r in 0..4 {
            let cmp = nonlinear_linear_consistency(&p, &phi, r, 0.2, &probe(), 1e-3).unwrap();
            assert!(cmp.discrepancy < 1e-6, "row {r}: {cmp:?}");
        }
        let printed = problem(SignConvention::AsPrinted, a);
        let cmp = nonlinear_linear_consistency(&printed, &phi, 2, 0.2, &probe(), 1e-3).unwrap();
        assert!(cmp.discrepancy > 1e-3);
    }

    #[test]
    fn vanishing_component_is_a_branch_error() {
        let p = problem(SignConvention::BranchSigned, [c(0.0, 0.0); 4]);
        let phi = SpinorField::new(DomainBox::unbounded(), |_, _| {
            [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]
        });
        assert!(matches!(
            nonlinear_linear_consistency(&p, &phi, 0, 0.0, &probe(), 1e-3),
            Err(Error::Branch { component: 1 })
        ));
    }
}
