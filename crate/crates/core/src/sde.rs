//! Euler–Maruyama integration of the paired real/imaginary equations of motion
//!
//! ```text
//! dx^μ = v^μ dτ + σ_x^μ dW_x^μ,    dy^μ = u^μ dτ + σ_y^μ dW_y^μ,
//! ```
//!
//! with `w = v + i u` given by a feedback policy and `dW_y^μ = ε η^{μμ} dW_x^μ`.
//! Coordinates are accumulated with compensated sums; the recurrence is the
//! plain Euler–Maruyama one.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ccalc::ScalarField;
use crate::error::{domain, Result};
use crate::lagrangian::Lagrangian;
use crate::spacetime::{ComplexFourVector, IndexPosition, C64};
use crate::stats::{CompensatedSum, ComplexMean};
use crate::wiener::{draw_increment, path_rng, DiffusionSpec};

/// Fraction of excluded paths above which an estimate is flagged invalid.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

pub type PolicyFn = dyn Fn(f64, &ComplexFourVector) -> ComplexFourVector + Send + Sync;

/// Markov feedback control `w(τ, z)` (upper index).
#[derive(Clone)]
pub struct ControlPolicy {
    func: Arc<PolicyFn>,
}

impl fmt::Debug for ControlPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ControlPolicy")
    }
}

impl ControlPolicy {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, &ComplexFourVector) -> ComplexFourVector + Send + Sync + 'static,
    {
        ControlPolicy { func: Arc::new(f) }
    }

    pub fn constant(w: ComplexFourVector) -> Self {
        Self::new(move |_, _| w)
    }

    pub fn zero() -> Self {
        Self::constant(ComplexFourVector::zero(IndexPosition::Upper))
    }

    /// `w^μ = Σ_ν a[μ][ν] z^ν`.
    pub fn linear(a: [[C64; 4]; 4]) -> Self {
        Self::new(move |_, z| {
            let mut w = ComplexFourVector::zero(IndexPosition::Upper);
            for mu in 0..4 {
                for nu in 0..4 {
                    w[mu] += a[mu][nu] * z[nu];
                }
            }
            w
        })
    }

    /// The same policy with every output multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.func.clone();
        Self::new(move |t, z| inner(t, z) * s)
    }

    #[inline]
    pub fn eval(&self, tau: f64, z: &ComplexFourVector) -> ComplexFourVector {
        (self.func)(tau, z)
    }
}

/// Proper-time grid `τ_k = τ_0 + k dτ`, `k = 0..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub tau0: f64,
    pub d_tau: f64,
    pub n_steps: usize,
}

impl Schedule {
    pub fn new(tau0: f64, d_tau: f64, n_steps: usize) -> Result<Self> {
        if !(d_tau.is_finite() && d_tau > 0.0) {
            return Err(domain(format!("d_tau must be positive, got {d_tau}")));
        }
        if n_steps == 0 {
            return Err(domain("n_steps must be at least 1"));
        }
        if !tau0.is_finite() {
            return Err(domain("tau0 must be finite"));
        }
        Ok(Schedule {
            tau0,
            d_tau,
            n_steps,
        })
    }

    #[inline]
    pub fn tau(&self, k: usize) -> f64 {
        self.tau0 + k as f64 * self.d_tau
    }

    pub fn tau_final(&self) -> f64 {
        self.tau(self.n_steps)
    }
}

/// `(x⁰..x³, y⁰..y³)`.
pub type State = [f64; 8];

pub fn state_of(z: &ComplexFourVector) -> State {
    let (re, im) = (z.re(), z.im());
    [re[0], re[1], re[2], re[3], im[0], im[1], im[2], im[3]]
}

pub fn point_of(s: &State) -> ComplexFourVector {
    ComplexFourVector::from_parts(
        [s[0], s[1], s[2], s[3]],
        [s[4], s[5], s[6], s[7]],
        IndexPosition::Upper,
    )
}

/// A path that produced a non-finite state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Blowup {
    pub step: usize,
}

/// One path driven by caller-supplied `dW_x` increments; `visit` sees
/// `(k, τ_k, z_k, w_k)` before each update.
pub fn run_path<I, V>(
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    mut next_dwx: I,
    mut visit: V,
) -> core::result::Result<State, Blowup>
where
    I: FnMut() -> [f64; 4],
    V: FnMut(usize, f64, &ComplexFourVector, &ComplexFourVector),
{
    let mut acc = [CompensatedSum::new(); 8];
    for (slot, v) in acc.iter_mut().zip(state_of(z0)) {
        slot.add(v);
    }
    let mut z = *z0;
    for k in 0..sched.n_steps {
        let tau = sched.tau(k);
        let w = policy.eval(tau, &z);
        if !w.is_finite() {
            return Err(Blowup { step: k });
        }
        visit(k, tau, &z, &w);
        let dwx = next_dwx();
        let dwy = spec.imaginary_increment(&dwx);
        for mu in 0..4 {
            acc[mu].add(w[mu].re * sched.d_tau + spec.sigma_x[mu] * dwx[mu]);
            acc[mu + 4].add(w[mu].im * sched.d_tau + spec.sigma_y[mu] * dwy[mu]);
        }
        let s: State = acc.map(|a| a.value());
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Blowup { step: k + 1 });
        }
        z = point_of(&s);
    }
    Ok(state_of(&z))
}

/// Path `index` of an ensemble, with its increments drawn from substream `index`.
pub fn simulate_path<V>(
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    seed: u64,
    index: u64,
    visit: V,
) -> core::result::Result<State, Blowup>
where
    V: FnMut(usize, f64, &ComplexFourVector, &ComplexFourVector),
{
    let mut rng = path_rng(seed, index);
    let sq = sched.d_tau.sqrt();
    run_path(
        policy,
        spec,
        z0,
        sched,
        || draw_increment(&mut rng, sq),
        visit,
    )
}

/// One path driven by an explicit increment sequence; returns all states.
pub fn integrate_with_increments(
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    dwx: &[[f64; 4]],
) -> Result<Vec<State>> {
    if dwx.len() != sched.n_steps {
        return Err(domain(format!(
            "expected {} increments, got {}",
            sched.n_steps,
            dwx.len()
        )));
    }
    let mut states = Vec::with_capacity(sched.n_steps + 1);
    let mut it = dwx.iter();
    let last = run_path(
        policy,
        spec,
        z0,
        sched,
        || *it.next().expect("length checked"),
        |_, _, z, _| states.push(state_of(z)),
    )
    .map_err(|b| domain(format!("path blew up at step {}", b.step)))?;
    states.push(last);
    Ok(states)
}

fn check_sizes(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(domain("n_paths must be at least 1"));
    }
    Ok(())
}

/// Full state history of every path.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    pub n_paths: usize,
    pub sched: Schedule,
    pub seed: u64,
    /// Row-major `n_paths × (n_steps + 1)`; aborted paths are NaN after the blow-up.
    pub states: Vec<State>,
    pub excluded: Vec<usize>,
}

impl TrajectoryEnsemble {
    pub fn state(&self, path: usize, step: usize) -> &State {
        &self.states[path * (self.sched.n_steps + 1) + step]
    }

    pub fn path(&self, path: usize) -> &[State] {
        let n = self.sched.n_steps + 1;
        &self.states[path * n..(path + 1) * n]
    }

    pub fn is_valid(&self) -> bool {
        self.excluded.len() as f64 <= MAX_EXCLUDED_FRACTION * self.n_paths as f64
    }
}

pub fn integrate(
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    n_paths: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    check_sizes(n_paths)?;
    let per = sched.n_steps + 1;
    let mut states = Vec::with_capacity(n_paths * per);
    let mut excluded = Vec::new();
    for p in 0..n_paths {
        let start = states.len();
        match simulate_path(policy, spec, z0, sched, seed, p as u64, |_, _, z, _| {
            states.push(state_of(z))
        }) {
            Ok(last) => states.push(last),
            Err(_) => {
                excluded.push(p);
                states.resize(start + per, [f64::NAN; 8]);
            }
        }
    }
    Ok(TrajectoryEnsemble {
        n_paths,
        sched: *sched,
        seed,
        states,
        excluded,
    })
}

/// Final states only, for ensembles too large to store.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointEnsemble {
    pub n_paths: usize,
    pub sched: Schedule,
    pub seed: u64,
    /// One entry per surviving path, in path order.
    pub finals: Vec<State>,
    pub excluded: Vec<usize>,
}

impl EndpointEnsemble {
    pub fn is_valid(&self) -> bool {
        self.excluded.len() as f64 <= MAX_EXCLUDED_FRACTION * self.n_paths as f64
    }
}

pub fn integrate_endpoints(
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    n_paths: usize,
    seed: u64,
) -> Result<EndpointEnsemble> {
    check_sizes(n_paths)?;
    let mut finals = Vec::with_capacity(n_paths);
    let mut excluded = Vec::new();
    for p in 0..n_paths {
        match simulate_path(policy, spec, z0, sched, seed, p as u64, |_, _, _, _| {}) {
            Ok(s) => finals.push(s),
            Err(_) => excluded.push(p),
        }
    }
    Ok(EndpointEnsemble {
        n_paths,
        sched: *sched,
        seed,
        finals,
        excluded,
    })
}

/// Left-point action `Σ_k L(τ_k, z_k, w_k) dτ` of path `index`.
pub fn path_action(
    l: &Lagrangian,
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    seed: u64,
    index: u64,
) -> core::result::Result<C64, Blowup> {
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    simulate_path(policy, spec, z0, sched, seed, index, |_, tau, z, w| {
        let v = l.value(tau, z, w) * sched.d_tau;
        re.add(v.re);
        im.add(v.im);
    })?;
    let a = C64::new(re.value(), im.value());
    if a.re.is_finite() && a.im.is_finite() {
        Ok(a)
    } else {
        Err(Blowup {
            step: sched.n_steps,
        })
    }
}

/// Monte Carlo mean of a per-path complex sample with the exclusion rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub mean: ComplexMean,
    pub excluded: Vec<usize>,
    pub n_paths: usize,
    pub valid: bool,
}

impl Estimate {
    /// Builds the estimate from per-path outcomes given in path order.
    pub fn from_outcomes(outcomes: Vec<core::result::Result<C64, Blowup>>) -> Estimate {
        let n_paths = outcomes.len();
        let mut samples = Vec::with_capacity(n_paths);
        let mut excluded = Vec::new();
        for (p, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(v) => samples.push(v),
                Err(_) => excluded.push(p),
            }
        }
        let valid =
            excluded.len() as f64 <= MAX_EXCLUDED_FRACTION * n_paths as f64 && !samples.is_empty();
        Estimate {
            mean: ComplexMean::from_samples(&samples),
            excluded,
            n_paths,
            valid,
        }
    }
}

/// `⟨∫ L ds⟩` over the ensemble, real and imaginary parts with separate errors.
pub fn estimate_action(
    l: &Lagrangian,
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    z0: &ComplexFourVector,
    sched: &Schedule,
    n_paths: usize,
    seed: u64,
) -> Result<Estimate> {
    check_sizes(n_paths)?;
    let outcomes = (0..n_paths)
        .map(|p| path_action(l, policy, spec, z0, sched, seed, p as u64))
        .collect();
    Ok(Estimate::from_outcomes(outcomes))
}

/// One-step Bellman sample `L(τ, z, w) dτ + J(τ + dτ, z + dz)` for path `index`.
pub fn bellman_sample(
    j: &ScalarField,
    l: &Lagrangian,
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    tau: f64,
    z: &ComplexFourVector,
    d_tau: f64,
    seed: u64,
    index: u64,
) -> core::result::Result<C64, Blowup> {
    let sched = Schedule {
        tau0: tau,
        d_tau,
        n_steps: 1,
    };
    let mut running = C64::new(0.0, 0.0);
    let end = simulate_path(policy, spec, z, &sched, seed, index, |_, t, z, w| {
        running = l.value(t, z, w) * d_tau
    })?;
    let v = running + j.eval(tau + d_tau, &point_of(&end));
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Blowup { step: 1 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellmanResidual {
    /// `J(τ, z) − ⟨L dτ + J(τ + dτ, z + dz)⟩`.
    pub residual: C64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub estimate: Estimate,
}

pub fn bellman_from_estimate(j_here: C64, estimate: Estimate) -> BellmanResidual {
    BellmanResidual {
        residual: j_here - estimate.mean.mean,
        std_error_re: estimate.mean.std_error_re,
        std_error_im: estimate.mean.std_error_im,
        estimate,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn bellman_consistency(
    j: &ScalarField,
    l: &Lagrangian,
    policy: &ControlPolicy,
    spec: &DiffusionSpec,
    tau: f64,
    z: &ComplexFourVector,
    d_tau: f64,
    n_paths: usize,
    seed: u64,
) -> Result<BellmanResidual> {
    check_sizes(n_paths)?;
    Schedule::new(tau, d_tau, 1)?;
    let outcomes = (0..n_paths)
        .map(|p| bellman_sample(j, l, policy, spec, tau, z, d_tau, seed, p as u64))
        .collect();
    Ok(bellman_from_estimate(
        j.eval(tau, z),
        Estimate::from_outcomes(outcomes),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::{em_lagrangian, EMFieldConfig};
    use crate::spacetime::Metric;

    fn t_unit() -> ComplexFourVector {
        ComplexFourVector::from_real([1.0, 0.0, 0.0, 0.0], IndexPosition::Upper)
    }

    fn origin() -> ComplexFourVector {
        ComplexFourVector::zero(IndexPosition::Upper)
    }

    #[test]
    fn deterministic_limit_is_exact() {
        let spec = DiffusionSpec::deterministic(Metric::default());
        let sched = Schedule::new(0.0, 0.01, 100).unwrap();
        let e = integrate(
            &ControlPolicy::constant(t_unit()),
            &spec,
            &origin(),
            &sched,
            3,
            1,
        )
        .unwrap();
        for p in 0..3 {
            assert_eq!(e.state(p, 100)[0], 1.0);
            assert_eq!(*e.state(p, 0), [0.0; 8]);
        }
    }

    #[test]
    fn shared_increments_per_step() {
        let g = Metric::default();
        let spec = DiffusionSpec::isotropic(1.0, g).unwrap();
        let sched = Schedule::new(0.0, 0.01, 50).unwrap();
        let e = integrate(&ControlPolicy::zero(), &spec, &origin(), &sched, 20, 9).unwrap();
        for p in 0..20 {
            for s in e.path(p) {
                assert_eq!(s[5], s[1]);
                assert_eq!(s[6], s[2]);
                assert_eq!(s[4], -s[0]);
            }
        }
        // away from the origin the identity holds up to the rounding of z0 + Δz
        let z0 = ComplexFourVector::from_parts(
            [0.1, 0.2, 0.3, 0.4],
            [0.5, -0.5, 0.0, 1.0],
            IndexPosition::Upper,
        );
        let e = integrate(&ControlPolicy::zero(), &spec, &z0, &sched, 20, 9).unwrap();
        let s0 = state_of(&z0);
        for p in 0..20 {
            for s in e.path(p) {
                assert!(((s[5] - s0[5]) - (s[1] - s0[1])).abs() < 1e-15);
                assert!(((s[4] - s0[4]) + (s[0] - s0[0])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn blowups_are_excluded() {
        let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
        let bad = ControlPolicy::new(|_, z| {
            if z[1].re > 0.0 {
                ComplexFourVector::from_real([f64::NAN; 4], IndexPosition::Upper)
            } else {
                ComplexFourVector::zero(IndexPosition::Upper)
            }
        });
        let sched = Schedule::new(0.0, 0.01, 10).unwrap();
        let e = integrate(&bad, &spec, &origin(), &sched, 50, 2).unwrap();
        assert!(!e.excluded.is_empty());
        assert!(!e.is_valid());
        assert!(e.state(e.excluded[0], 10)[0].is_nan());
        assert!(integrate(&bad, &spec, &origin(), &sched, 0, 2).is_err());
        assert!(Schedule::new(0.0, 0.0, 10).is_err());
    }

    #[test]
    fn constant_action() {
        let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
        let sched = Schedule::new(0.0, 0.01, 200).unwrap();
        let l = Lagrangian::constant(C64::new(1.0, 0.0));
        let a =
            estimate_action(&l, &ControlPolicy::zero(), &spec, &origin(), &sched, 10, 4).unwrap();
        assert_eq!(a.mean.mean, C64::new(2.0, 0.0));
        assert_eq!(a.mean.std_error_re, 0.0);
        assert!(a.valid);
    }

    #[test]
    fn contraction_and_em_actions() {
        let g = Metric::default();
        let spec = DiffusionSpec::deterministic(g);
        let sched = Schedule::new(0.0, 0.01, 100).unwrap();
        let pol = ControlPolicy::constant(t_unit());
        let a = estimate_action(
            &Lagrangian::contraction(g),
            &pol,
            &spec,
            &origin(),
            &sched,
            2,
            0,
        )
        .unwrap();
        assert!((a.mean.mean - C64::new(-1.0, 0.0)).norm() < 1e-14);
        let l = em_lagrangian(&EMFieldConfig::free(1.0, 1.0, g).unwrap());
        let a = estimate_action(&l, &pol, &spec, &origin(), &sched, 2, 0).unwrap();
        assert!((a.mean.mean - C64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn trivial_bellman() {
        let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
        let zero = ScalarField::unbounded(|_, _| C64::new(0.0, 0.0));
        let r = bellman_consistency(
            &zero,
            &Lagrangian::zero(),
            &ControlPolicy::zero(),
            &spec,
            0.0,
            &origin(),
            1e-3,
            100,
            1,
        )
        .unwrap();
        assert_eq!(r.residual, C64::new(0.0, 0.0));
    }

    #[test]
    fn explicit_increments_match_seeded_paths() {
        let spec = DiffusionSpec::isotropic(0.7, Metric::default()).unwrap();
        let sched = Schedule::new(0.0, 0.02, 25).unwrap();
        let pol = ControlPolicy::constant(t_unit());
        let mut rng = path_rng(11, 3);
        let dw: Vec<[f64; 4]> = (0..25)
            .map(|_| draw_increment(&mut rng, 0.02f64.sqrt()))
            .collect();
        let a = integrate_with_increments(&pol, &spec, &origin(), &sched, &dw).unwrap();
        let e = integrate(&pol, &spec, &origin(), &sched, 4, 11).unwrap();
        assert_eq!(a.as_slice(), e.path(3));
    }
}
