//! Lagrangians `L(τ, z, w)` and the analytically continued electromagnetic one.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ccalc::ScalarField;
use crate::error::{domain, Error, Result};
use crate::probes::DomainBox;
use crate::spacetime::{contract, ComplexFourVector, IndexPosition, Metric, C64};

pub type ValueFn = dyn Fn(f64, &ComplexFourVector, &ComplexFourVector) -> C64 + Send + Sync;
pub type GradientFn =
    dyn Fn(f64, &ComplexFourVector, &ComplexFourVector) -> Result<ComplexFourVector> + Send + Sync;
pub type SingularFn = dyn Fn(&ComplexFourVector) -> bool + Send + Sync;

/// A complex Lagrangian with optional analytic velocity gradient.
#[derive(Clone)]
pub struct Lagrangian {
    name: String,
    params: Vec<(String, f64)>,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
    singular: Option<Arc<SingularFn>>,
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lagrangian")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Lagrangian {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector, &ComplexFourVector) -> C64 + Send + Sync + 'static,
    {
        Lagrangian {
            name: name.into(),
            params: Vec::new(),
            value: Arc::new(value),
            gradient: None,
            singular: None,
        }
    }

    /// Attach a closed-form `∂L/∂w^μ` (lower index).
    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(f64, &ComplexFourVector, &ComplexFourVector) -> Result<ComplexFourVector>
            + Send
            + Sync
            + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Velocities where the underlying Lagrangian has no derivative.
    pub fn with_singular_set<S>(mut self, s: S) -> Self
    where
        S: Fn(&ComplexFourVector) -> bool + Send + Sync + 'static,
    {
        self.singular = Some(Arc::new(s));
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.push((key.to_string(), value));
        self
    }

    /// `L ≡ 0`.
    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn constant(value: C64) -> Self {
        Lagrangian::new("constant", move |_, _, _| value)
            .with_gradient(|_, _, _| Ok(ComplexFourVector::zero(IndexPosition::Lower)))
            .with_param("re", value.re)
            .with_param("im", value.im)
    }

    /// `L = Σ w^μ w_μ`.
    pub fn contraction(g: Metric) -> Self {
        Lagrangian::new("contraction", move |_, _, w| contract(w, w, &g))
            .with_gradient(move |_, _, w| Ok(w.lowered(&g) * 2.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    #[inline]
    pub fn value(&self, tau: f64, z: &ComplexFourVector, w: &ComplexFourVector) -> C64 {
        (self.value)(tau, z, w)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// `∂L/∂w^μ`, closed form when attached, otherwise finite differences.
    pub fn gradient(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        w: &ComplexFourVector,
    ) -> Result<ComplexFourVector> {
        match &self.gradient {
            Some(g) => g(tau, z, w),
            None => Ok(self.fd_gradient(tau, z, w)),
        }
    }

    /// Five-point differences of the value along the real part of each `w^μ`.
    pub fn fd_gradient(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        w: &ComplexFourVector,
    ) -> ComplexFourVector {
        let mut out = ComplexFourVector::zero(IndexPosition::Lower);
        for mu in 0..4 {
            out[mu] = self.fd_partial(tau, z, w, mu, C64::new(1.0, 0.0));
        }
        out
    }

    /// Five-point derivative of the value along `direction` in the `w^μ` plane;
    /// `direction = 1` gives `∂/∂v^μ`, `direction = i` gives `∂/∂u^μ`.
    pub fn fd_partial(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        w: &ComplexFourVector,
        mu: usize,
        direction: C64,
    ) -> C64 {
        let h = 1e-3 * w[mu].norm().max(1.0);
        let at = |k: f64| {
            let mut p = *w;
            p[mu] += direction * (k * h);
            self.value(tau, z, &p)
        };
        (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h)
    }

    /// Whether `w` lies on the recorded singular set.
    pub fn is_singular(&self, w: &ComplexFourVector) -> bool {
        self.singular.as_ref().is_some_and(|s| s(w))
    }

    /// Max relative deviation between the attached gradient and finite differences.
    pub fn gradient_fd_mismatch(
        &self,
        tau: f64,
        z: &ComplexFourVector,
        w: &ComplexFourVector,
    ) -> Result<f64> {
        let a = self.gradient(tau, z, w)?;
        let b = self.fd_gradient(tau, z, w);
        Ok((0..4)
            .map(|mu| (a[mu] - b[mu]).norm() / a[mu].norm().max(1.0))
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PotentialKind {
    Zero,
    Constant([C64; 4]),
    LinearElectric(f64),
    Custom,
}

/// Vector potential `A_μ(τ, z)` (lower index).
#[derive(Clone)]
pub struct VectorPotential {
    kind: PotentialKind,
    name: String,
    func: Arc<dyn Fn(f64, &ComplexFourVector) -> ComplexFourVector + Send + Sync>,
}

impl fmt::Debug for VectorPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl PartialEq for VectorPotential {
    fn eq(&self, other: &Self) -> bool {
        self.kind != PotentialKind::Custom && self.kind == other.kind
    }
}

impl VectorPotential {
    pub fn zero() -> Self {
        VectorPotential {
            kind: PotentialKind::Zero,
            name: "zero".to_string(),
            func: Arc::new(|_, _| ComplexFourVector::zero(IndexPosition::Lower)),
        }
    }

    pub fn constant(a: [C64; 4]) -> Self {
        VectorPotential {
            kind: PotentialKind::Constant(a),
            name: format!(
                "constant({},{},{},{})",
                fmt_c(a[0]),
                fmt_c(a[1]),
                fmt_c(a[2]),
                fmt_c(a[3])
            ),
            func: Arc::new(move |_, _| ComplexFourVector::lower(a)),
        }
    }

    /// `A = (−E z¹, 0, 0, 0)`, a uniform electric field along axis 1.
    pub fn linear_electric(e: f64) -> Self {
        VectorPotential {
            kind: PotentialKind::LinearElectric(e),
            name: format!("linear-electric({e})"),
            func: Arc::new(move |_, z| {
                let mut a = ComplexFourVector::zero(IndexPosition::Lower);
                a[0] = -z[1] * e;
                a
            }),
        }
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector) -> ComplexFourVector + Send + Sync + 'static,
    {
        VectorPotential {
            kind: PotentialKind::Custom,
            name: name.into(),
            func: Arc::new(f),
        }
    }

    #[inline]
    pub fn at(&self, tau: f64, z: &ComplexFourVector) -> ComplexFourVector {
        (self.func)(tau, z)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The constant value, if the potential is known to be constant.
    pub fn constant_value(&self) -> Option<[C64; 4]> {
        match self.kind {
            PotentialKind::Zero => Some([C64::new(0.0, 0.0); 4]),
            PotentialKind::Constant(a) => Some(a),
            _ => None,
        }
    }

    /// Component `μ` as a scalar field, for analyticity scans.
    pub fn component_field(&self, mu: usize, domain: DomainBox) -> ScalarField {
        let f = self.func.clone();
        ScalarField::new(domain, move |t, z| f(t, z)[mu])
    }
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

impl core::str::FromStr for VectorPotential {
    type Err = Error;

    /// Presets: `zero`, `constant(a0,a1,a2,a3)`, `linear-electric(E)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Self::zero());
        }
        let args = |prefix: &str| -> Option<Result<Vec<f64>>> {
            let inner = s
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            Some(
                inner
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| domain(format!("bad number `{t}` in `{s}`")))
                    })
                    .collect(),
            )
        };
        if let Some(v) = args("constant") {
            let v = v?;
            if v.len() != 4 {
                return Err(domain(format!(
                    "constant potential needs 4 components, got {}",
                    v.len()
                )));
            }
            return Ok(Self::constant(
                [v[0], v[1], v[2], v[3]].map(|x| C64::new(x, 0.0)),
            ));
        }
        if let Some(v) = args("linear-electric") {
            let v = v?;
            if v.len() != 1 {
                return Err(domain("linear-electric takes one field strength"));
            }
            return Ok(Self::linear_electric(v[0]));
        }
        Err(domain(format!("unknown vector potential `{s}`")))
    }
}

/// Charge, mass, light speed, potential and metric of the EM problem.
#[derive(Clone, Debug)]
pub struct EMFieldConfig {
    pub q: f64,
    pub m: f64,
    pub c: f64,
    pub potential: VectorPotential,
    pub metric: Metric,
}

impl EMFieldConfig {
    pub fn new(q: f64, m: f64, c: f64, potential: VectorPotential, metric: Metric) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(domain(format!("mass must be positive, got {m}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("c must be positive, got {c}")));
        }
        if !q.is_finite() {
            return Err(domain("charge must be finite"));
        }
        Ok(EMFieldConfig {
            q,
            m,
            c,
            potential,
            metric,
        })
    }

    /// Free particle with `q = 0`.
    pub fn free(m: f64, c: f64, metric: Metric) -> Result<Self> {
        Self::new(0.0, m, c, VectorPotential::zero(), metric)
    }

    /// Cauchy–Riemann scan of every potential component.
    pub fn check_potential_analytic(
        &self,
        probes: &[(f64, ComplexFourVector)],
        h: f64,
        tol: f64,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for mu in 0..4 {
            let f = self.potential.component_field(mu, DomainBox::unbounded());
            let r = crate::ccalc::analyticity_scan(&f, probes, h, tol)?;
            worst = worst.max(r.worst_residual);
        }
        if worst < tol {
            Ok(worst)
        } else {
            Err(Error::NotAnalytic { worst })
        }
    }

    /// `q A_μ(τ, z)`.
    pub fn coupling(&self, tau: f64, z: &ComplexFourVector) -> ComplexFourVector {
        self.potential.at(tau, z) * self.q
    }
}

/// `σ̃ Σ w^μ w_μ` below this (relative to `c²`) counts as the branch point.
const BRANCH_TOL: f64 = 1e-14;

fn at_branch_point(g: &Metric, c: f64, w: &ComplexFourVector) -> bool {
    contract(w, w, g).norm() <= BRANCH_TOL * c * c
}

/// `σ̃ m c √(σ̃ Σ w^μ w_μ) + q Σ A_μ w^μ`, principal branch.
///
/// The gradient is `m c w_μ / √(σ̃ Σ ww) + q A_μ`, which reduces to
/// `m w_μ + q A_μ` on the shell `Σ ww = σ̃ c²`.
pub fn em_lagrangian(cfg: &EMFieldConfig) -> Lagrangian {
    let (q, m, c, g) = (cfg.q, cfg.m, cfg.c, cfg.metric);
    let st = g.sigma_tilde();
    let pot = cfg.potential.clone();
    let pot2 = cfg.potential.clone();
    Lagrangian::new("em", move |tau, z, w| {
        let a = pot.at(tau, z);
        (contract(w, w, &g) * st).sqrt() * (st * m * c) + contract(&a, w, &g) * q
    })
    .with_gradient(move |tau, z, w| {
        if at_branch_point(&g, c, w) {
            return Err(Error::Singular(
                "square-root branch point Σ w^μ w_μ = 0".to_string(),
            ));
        }
        let root = (contract(w, w, &g) * st).sqrt();
        let coupling = pot2.at(tau, z) * q;
        Ok(w.lowered(&g).scale(C64::new(m * c, 0.0) / root) + coupling)
    })
    .with_singular_set(move |w| at_branch_point(&g, c, w))
    .with_param("q", q)
    .with_param("m", m)
    .with_param("c", c)
    .with_param("sigma_tilde", st)
}

/// Quadratic form of the EM Lagrangian,
/// `(m/2)(Σ w^μ w_μ + σ̃ c²) + q Σ A_μ w^μ`.
///
/// It coincides with [`em_lagrangian`] in value and gradient on the shell
/// `Σ ww = σ̃ c²` and its gradient `m w_μ + q A_μ` holds everywhere, so the
/// stationarity condition has the unique root `w*_μ = −(∂_μ J + q A_μ)/m`.
/// The branch point of the square-root form is kept as the singular set.
pub fn em_lagrangian_weak(cfg: &EMFieldConfig) -> Lagrangian {
    let (q, m, c, g) = (cfg.q, cfg.m, cfg.c, cfg.metric);
    let st = g.sigma_tilde();
    let pot = cfg.potential.clone();
    let pot2 = cfg.potential.clone();
    Lagrangian::new("em-weak", move |tau, z, w| {
        let a = pot.at(tau, z);
        (contract(w, w, &g) + st * c * c) * (0.5 * m) + contract(&a, w, &g) * q
    })
    .with_gradient(move |tau, z, w| Ok(w.lowered(&g) * m + pot2.at(tau, z) * q))
    .with_singular_set(move |w| at_branch_point(&g, c, w))
    .with_param("q", q)
    .with_param("m", m)
    .with_param("c", c)
    .with_param("sigma_tilde", st)
}

/// `m w_μ + q A_μ(τ, z)`.
pub fn shell_gradient(
    cfg: &EMFieldConfig,
    tau: f64,
    z: &ComplexFourVector,
    w: &ComplexFourVector,
) -> ComplexFourVector {
    w.lowered(&cfg.metric) * cfg.m + cfg.coupling(tau, z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakGradientCheck {
    pub passed: bool,
    /// Max over μ of `|FD gradient − (m w_μ + q A_μ)|`.
    pub max_error: f64,
}

/// Compare the finite-difference gradient of the square-root Lagrangian with
/// `m w_μ + q A_μ` at a shell point.
pub fn check_weak_gradient(
    cfg: &EMFieldConfig,
    tau: f64,
    z: &ComplexFourVector,
    w: &ComplexFourVector,
    tol: f64,
) -> Result<WeakGradientCheck> {
    let shell = crate::spacetime::weak_equation_residual(w, &cfg.metric, cfg.c);
    if shell.norm() > tol {
        return Err(Error::Precondition(format!(
            "w is off the shell: |Σww − σ̃c²| = {:e}",
            shell.norm()
        )));
    }
    let fd = em_lagrangian(cfg).fd_gradient(tau, z, w);
    let exact = shell_gradient(cfg, tau, z, w);
    let max_error = fd.max_abs_diff(&exact);
    Ok(WeakGradientCheck {
        passed: max_error < tol,
        max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn origin() -> ComplexFourVector {
        ComplexFourVector::zero(IndexPosition::Upper)
    }

    fn time_unit() -> ComplexFourVector {
        ComplexFourVector::from_real([1.0, 0.0, 0.0, 0.0], IndexPosition::Upper)
    }

    fn free() -> EMFieldConfig {
        EMFieldConfig::free(1.0, 1.0, Metric::default()).unwrap()
    }

    #[test]
    fn free_value_and_gradient() {
        let l = em_lagrangian(&free());
        assert!((l.value(0.0, &origin(), &time_unit()) - c(-1.0, 0.0)).norm() < 1e-15);
        let g = l.gradient(0.0, &origin(), &time_unit()).unwrap();
        assert!(
            g.max_abs_diff(&ComplexFourVector::from_real(
                [-1.0, 0.0, 0.0, 0.0],
                IndexPosition::Lower
            )) < 1e-15
        );
    }

    #[test]
    fn linear_coupling() {
        let a = VectorPotential::constant([c(0.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let cfg = EMFieldConfig::new(2.0, 1.0, 1.0, a, Metric::default()).unwrap();
        let l = em_lagrangian(&cfg);
        assert!((l.value(0.0, &origin(), &time_unit()) - c(-0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn branch_point_gradient_is_singular() {
        let l = em_lagrangian(&free());
        let null = ComplexFourVector::from_real([1.0, 1.0, 0.0, 0.0], IndexPosition::Upper);
        assert!(matches!(
            l.gradient(0.0, &origin(), &null),
            Err(Error::Singular(_))
        ));
        assert!(l.is_singular(&origin()));
        assert!(!l.is_singular(&time_unit()));
    }

    #[test]
    fn weak_gradient_on_shell() {
        let cfg = free();
        let z = origin();
        for w in [
            time_unit(),
            ComplexFourVector::from_real(
                [0.5f64.cosh(), 0.5f64.sinh(), 0.0, 0.0],
                IndexPosition::Upper,
            ),
            ComplexFourVector::upper([
                c(0.2, 0.1).cosh(),
                c(0.2, 0.1).sinh(),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ]),
        ] {
            let r = check_weak_gradient(&cfg, 0.0, &z, &w, 1e-6).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let off = ComplexFourVector::from_real([2.0, 0.0, 0.0, 0.0], IndexPosition::Upper);
        assert!(matches!(
            check_weak_gradient(&cfg, 0.0, &z, &off, 1e-6),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn weak_form_agrees_on_shell() {
        let a = VectorPotential::constant([c(0.1, 0.05), c(-0.2, 0.0), c(0.0, 0.3), c(0.4, 0.0)]);
        let cfg = EMFieldConfig::new(1.5, 2.0, 1.3, a, Metric::default()).unwrap();
        let w = ComplexFourVector::upper([
            c(0.3, 0.2).cosh() * 1.3,
            c(0.3, 0.2).sinh() * 1.3,
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]);
        let (s, q) = (em_lagrangian(&cfg), em_lagrangian_weak(&cfg));
        let z = origin();
        assert!((s.value(0.0, &z, &w) - q.value(0.0, &z, &w)).norm() < 1e-12);
        let (gs, gq) = (
            s.gradient(0.0, &z, &w).unwrap(),
            q.gradient(0.0, &z, &w).unwrap(),
        );
        assert!(gs.max_abs_diff(&gq) < 1e-12);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let cfg = EMFieldConfig::new(
            0.7,
            1.2,
            0.9,
            VectorPotential::linear_electric(0.4),
            Metric::default(),
        )
        .unwrap();
        let z = ComplexFourVector::upper([c(0.1, 0.0), c(0.3, -0.2), c(0.0, 0.1), c(0.2, 0.0)]);
        let w = ComplexFourVector::upper([c(1.4, 0.1), c(0.2, 0.3), c(-0.1, 0.0), c(0.3, -0.2)]);
        for l in [
            em_lagrangian(&cfg),
            em_lagrangian_weak(&cfg),
            Lagrangian::contraction(cfg.metric),
        ] {
            assert!(
                l.gradient_fd_mismatch(0.0, &z, &w).unwrap() < 1e-6,
                "{}",
                l.name()
            );
        }
    }

    #[test]
    fn boost_invariance_without_charge() {
        let cfg = free();
        let l = em_lagrangian(&cfg);
        let w = ComplexFourVector::upper([c(1.2, 0.1), c(0.3, -0.1), c(0.1, 0.0), c(0.0, 0.2)]);
        let b = crate::spacetime::Boost::new(2, 0.4).unwrap();
        let z = origin();
        assert!((l.value(0.0, &z, &w) - l.value(0.0, &z, &b.apply(&w))).norm() < 1e-10);
    }

    #[test]
    fn potential_presets() {
        let p: VectorPotential = "constant(0.1, 0, 0, 0.5)".parse().unwrap();
        assert_eq!(p.constant_value().unwrap()[3], c(0.5, 0.0));
        let e: VectorPotential = "linear-electric(2)".parse().unwrap();
        let z = ComplexFourVector::upper([c(0.0, 0.0), c(1.0, 0.5), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(e.at(0.0, &z)[0], c(-2.0, -1.0));
        assert!("zero"
            .parse::<VectorPotential>()
            .unwrap()
            .constant_value()
            .is_some());
        assert!("constant(1,2)".parse::<VectorPotential>().is_err());
        assert!("magnetic".parse::<VectorPotential>().is_err());
        assert!(
            EMFieldConfig::new(1.0, 0.0, 1.0, VectorPotential::zero(), Metric::default()).is_err()
        );
    }
}
