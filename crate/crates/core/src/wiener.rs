//! Perfectly (anti-)correlated real/imaginary Wiener increments.
//!
//! One Gaussian stream drives both coordinates: `dW_y^μ = ε η^{μμ} dW_x^μ`.
//! Every path (or batch row) owns a ChaCha20 substream selected by its index,
//! so ensembles are reproducible however they are scheduled.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::spacetime::{Metric, C64};
use crate::stats::RunningMoments;

/// Name of the generator recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.3) seeded by seed_from_u64(seed), stream = path index; N(0,1) by rand_distr 0.4 StandardNormal";

/// Generator for path `index` of an ensemble seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Four independent `N(0, d_tau)` draws, one per spacetime axis.
#[inline]
pub fn draw_increment<R: Rng + ?Sized>(rng: &mut R, sqrt_d_tau: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for slot in &mut out {
        let n: f64 = rng.sample(StandardNormal);
        *slot = n * sqrt_d_tau;
    }
    out
}

/// Real diffusion coefficients per axis and the correlation structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionSpec {
    pub sigma_x: [f64; 4],
    pub sigma_y: [f64; 4],
    pub metric: Metric,
}

impl DiffusionSpec {
    pub fn new(sigma_x: [f64; 4], sigma_y: [f64; 4], metric: Metric) -> Result<Self> {
        for s in sigma_x.iter().chain(sigma_y.iter()) {
            if !(s.is_finite() && *s >= 0.0) {
                return Err(domain(format!(
                    "diffusion coefficients must be finite and nonnegative, got {s}"
                )));
            }
        }
        Ok(DiffusionSpec {
            sigma_x,
            sigma_y,
            metric,
        })
    }

    pub fn isotropic(sigma: f64, metric: Metric) -> Result<Self> {
        Self::new([sigma; 4], [sigma; 4], metric)
    }

    /// `σ_x² = σ_y² = ħ/m` on every axis.
    pub fn quantum(hbar: f64, mass: f64, metric: Metric) -> Result<Self> {
        if !(hbar > 0.0 && mass > 0.0) {
            return Err(domain("hbar and mass must be positive"));
        }
        Self::isotropic((hbar / mass).sqrt(), metric)
    }

    pub fn deterministic(metric: Metric) -> Self {
        DiffusionSpec {
            sigma_x: [0.0; 4],
            sigma_y: [0.0; 4],
            metric,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.metric.epsilon()
    }

    /// `ε η^{μμ}`, the factor mapping `dW_x^μ` onto `dW_y^μ`.
    #[inline]
    pub fn sign_rule(&self, mu: usize) -> f64 {
        self.metric.epsilon() * self.metric.eta(mu)
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma_x
            .iter()
            .chain(self.sigma_y.iter())
            .all(|&s| s == 0.0)
    }

    /// `σ^μσ^μ = σ_x² − σ_y² + 2iεη^{μμ}σ_xσ_y`.
    pub fn complex_sigma_squared(&self) -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (mu, slot) in out.iter_mut().enumerate() {
            let (sx, sy) = (self.sigma_x[mu], self.sigma_y[mu]);
            *slot = C64::new(sx * sx - sy * sy, 2.0 * self.sign_rule(mu) * sx * sy);
        }
        out
    }

    /// `dW_y` for a given `dW_x`; the map is multiplication by `±1`, so it is exact.
    #[inline]
    pub fn imaginary_increment(&self, dwx: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for mu in 0..4 {
            out[mu] = self.sign_rule(mu) * dwx[mu];
        }
        out
    }
}

/// `n` rows of increments with the signed copy for the imaginary process.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementBatch {
    pub d_tau: f64,
    pub dwx: Vec<[f64; 4]>,
    pub dwy: Vec<[f64; 4]>,
    pub seed: u64,
}

impl IncrementBatch {
    pub fn len(&self) -> usize {
        self.dwx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dwx.is_empty()
    }

    pub fn column_x(&self, mu: usize) -> Vec<f64> {
        self.dwx.iter().map(|r| r[mu]).collect()
    }

    pub fn column_y(&self, mu: usize) -> Vec<f64> {
        self.dwy.iter().map(|r| r[mu]).collect()
    }
}

fn check_step(d_tau: f64, n: usize) -> Result<()> {
    if !(d_tau.is_finite() && d_tau > 0.0) {
        return Err(domain(format!("d_tau must be positive, got {d_tau}")));
    }
    if n == 0 {
        return Err(domain("sample count must be at least 1"));
    }
    Ok(())
}

/// Row `i` is drawn from substream `i`, so it coincides with the first step
/// of path `i` in [`crate::sde::integrate`].
pub fn sample_increments(
    spec: &DiffusionSpec,
    d_tau: f64,
    n: usize,
    seed: u64,
) -> Result<IncrementBatch> {
    check_step(d_tau, n)?;
    let sq = d_tau.sqrt();
    let mut dwx = Vec::with_capacity(n);
    let mut dwy = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = path_rng(seed, i as u64);
        let x = draw_increment(&mut rng, sq);
        dwy.push(spec.imaginary_increment(&x));
        dwx.push(x);
    }
    Ok(IncrementBatch {
        d_tau,
        dwx,
        dwy,
        seed,
    })
}

/// Which increment moment an estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentKind {
    /// `⟨dx^μ⟩`
    MeanX,
    /// `⟨dy^μ⟩`
    MeanY,
    /// `⟨dx^μ dx^ν⟩`
    XX,
    /// `⟨dy^μ dy^ν⟩`
    YY,
    /// `⟨dx^μ dy^ν⟩`
    XY,
}

impl MomentKind {
    pub fn label(self) -> &'static str {
        match self {
            MomentKind::MeanX => "dx",
            MomentKind::MeanY => "dy",
            MomentKind::XX => "dx dx",
            MomentKind::YY => "dy dy",
            MomentKind::XY => "dx dy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub kind: MomentKind,
    pub mu: usize,
    /// Second index; equal to `mu` for first moments.
    pub nu: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// Exact expectation, including the `O(dτ²)` drift product.
    pub target: f64,
    /// First-order expectation as used in the Itô expansion.
    pub leading_order_target: f64,
    pub z_score: f64,
}

/// Sample moments of one Euler–Maruyama step against their expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub d_tau: f64,
    pub seed: u64,
    pub estimates: Vec<MomentEstimate>,
    /// Estimates further than this many standard errors from target are flagged.
    pub threshold: f64,
}

impl MomentReport {
    pub fn max_z(&self) -> f64 {
        self.estimates.iter().map(|e| e.z_score).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &MomentEstimate> {
        self.estimates
            .iter()
            .filter(move |e| e.z_score > self.threshold)
    }

    pub fn passed(&self) -> bool {
        self.flagged().next().is_none()
    }

    pub fn get(&self, kind: MomentKind, mu: usize, nu: usize) -> Option<&MomentEstimate> {
        self.estimates
            .iter()
            .find(|e| e.kind == kind && e.mu == mu && e.nu == nu)
    }
}

fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let diff = (estimate - target).abs();
    if se > 0.0 {
        diff / se
    } else if diff <= 1e-15 * (1.0 + target.abs()) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Monte Carlo check of the increment moments for drift `(v, u)`.
///
/// Streams `n` single steps (row `i` from substream `i`) without storing them.
pub fn moment_check(
    spec: &DiffusionSpec,
    v: [f64; 4],
    u: [f64; 4],
    d_tau: f64,
    n: usize,
    seed: u64,
) -> Result<MomentReport> {
    check_step(d_tau, n)?;
    if n < 10_000 {
        return Err(domain(format!(
            "moment check needs at least 10^4 samples, got {n}"
        )));
    }
    let sq = d_tau.sqrt();
    let mut mean_x = [RunningMoments::new(); 4];
    let mut mean_y = [RunningMoments::new(); 4];
    let mut xx = [[RunningMoments::new(); 4]; 4];
    let mut yy = [[RunningMoments::new(); 4]; 4];
    let mut xy = [[RunningMoments::new(); 4]; 4];

    for i in 0..n {
        let mut rng = path_rng(seed, i as u64);
        let dwx = draw_increment(&mut rng, sq);
        let dwy = spec.imaginary_increment(&dwx);
        let mut dx = [0.0; 4];
        let mut dy = [0.0; 4];
        for mu in 0..4 {
            dx[mu] = v[mu] * d_tau + spec.sigma_x[mu] * dwx[mu];
            dy[mu] = u[mu] * d_tau + spec.sigma_y[mu] * dwy[mu];
        }
        for mu in 0..4 {
            mean_x[mu].push(dx[mu]);
            mean_y[mu].push(dy[mu]);
            for nu in 0..4 {
                xx[mu][nu].push(dx[mu] * dx[nu]);
                yy[mu][nu].push(dy[mu] * dy[nu]);
                xy[mu][nu].push(dx[mu] * dy[nu]);
            }
        }
    }

    let g = spec.metric;
    let mut estimates = Vec::with_capacity(56);
    let mut push = |kind, mu, nu, acc: &RunningMoments, leading: f64, exact: f64| {
        let se = acc.std_error();
        estimates.push(MomentEstimate {
            kind,
            mu,
            nu,
            estimate: acc.mean(),
            std_error: se,
            target: exact,
            leading_order_target: leading,
            z_score: z_score(acc.mean(), exact, se),
        });
    };
    for mu in 0..4 {
        push(
            MomentKind::MeanX,
            mu,
            mu,
            &mean_x[mu],
            v[mu] * d_tau,
            v[mu] * d_tau,
        );
        push(
            MomentKind::MeanY,
            mu,
            mu,
            &mean_y[mu],
            u[mu] * d_tau,
            u[mu] * d_tau,
        );
    }
    let dt2 = d_tau * d_tau;
    for mu in 0..4 {
        for nu in 0..4 {
            let diag = if mu == nu { 1.0 } else { 0.0 };
            let lx = diag * spec.sigma_x[mu] * spec.sigma_x[mu] * d_tau;
            push(
                MomentKind::XX,
                mu,
                nu,
                &xx[mu][nu],
                lx,
                lx + v[mu] * v[nu] * dt2,
            );
            let ly = diag * spec.sigma_y[mu] * spec.sigma_y[mu] * d_tau;
            push(
                MomentKind::YY,
                mu,
                nu,
                &yy[mu][nu],
                ly,
                ly + u[mu] * u[nu] * dt2,
            );
            let lxy = diag * g.epsilon() * g.eta(mu) * spec.sigma_x[mu] * spec.sigma_y[nu] * d_tau;
            push(
                MomentKind::XY,
                mu,
                nu,
                &xy[mu][nu],
                lxy,
                lxy + v[mu] * u[nu] * dt2,
            );
        }
    }
    Ok(MomentReport {
        n,
        d_tau,
        seed,
        estimates,
        threshold: 5.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{Sign, Signature};

    fn unit(metric: Metric) -> DiffusionSpec {
        DiffusionSpec::isotropic(1.0, metric).unwrap()
    }

    #[test]
    fn complex_sigma_examples() {
        let g = Metric::default();
        let s = unit(g).complex_sigma_squared();
        assert_eq!(
            s,
            [
                C64::new(0.0, -2.0),
                C64::new(0.0, 2.0),
                C64::new(0.0, 2.0),
                C64::new(0.0, 2.0)
            ]
        );

        let real_only = DiffusionSpec::new([1.0; 4], [0.0; 4], g).unwrap();
        assert_eq!(real_only.complex_sigma_squared(), [C64::new(1.0, 0.0); 4]);

        let anti = unit(Metric::new(Signature::TimeNegative, Sign::Minus)).complex_sigma_squared();
        assert_eq!(
            anti,
            [
                C64::new(0.0, 2.0),
                C64::new(0.0, -2.0),
                C64::new(0.0, -2.0),
                C64::new(0.0, -2.0)
            ]
        );
    }

    #[test]
    fn single_row_sign_rule() {
        let batch = sample_increments(&unit(Metric::default()), 0.01, 1, 99).unwrap();
        assert_eq!(batch.dwy[0][1], batch.dwx[0][1]);
        assert_eq!(batch.dwy[0][0], -batch.dwx[0][0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = unit(Metric::default());
        assert!(matches!(
            sample_increments(&spec, 0.0, 10, 1),
            Err(crate::Error::Domain(_))
        ));
        assert!(sample_increments(&spec, -1.0, 10, 1).is_err());
        assert!(sample_increments(&spec, 0.1, 0, 1).is_err());
        assert!(moment_check(&spec, [0.0; 4], [0.0; 4], 0.01, 100, 1).is_err());
        assert!(DiffusionSpec::new([-1.0; 4], [0.0; 4], Metric::default()).is_err());
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let spec = unit(Metric::default());
        let a = sample_increments(&spec, 0.01, 64, 5).unwrap();
        let b = sample_increments(&spec, 0.01, 64, 5).unwrap();
        let c = sample_increments(&spec, 0.01, 64, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.dwx, c.dwx);
    }

    #[test]
    fn mixed_moment_target_uses_metric_sign() {
        let spec = unit(Metric::default());
        let report = moment_check(&spec, [0.0; 4], [0.0; 4], 0.01, 20_000, 3).unwrap();
        assert_eq!(report.get(MomentKind::XY, 0, 0).unwrap().target, -0.01);
        assert_eq!(report.get(MomentKind::XY, 2, 2).unwrap().target, 0.01);
        assert_eq!(report.get(MomentKind::XY, 1, 2).unwrap().target, 0.0);
        assert_eq!(report.estimates.len(), 8 + 48);
    }
}
