//! The verification scenarios. Each returns an [`Outcome`]; nothing here
//! touches the filesystem.

use clap::ValueEnum;
use csoc_core::ccalc::ScalarField;
use csoc_core::probes::{halton_probes, DomainBox};
use csoc_core::wiener::path_rng;
use csoc_core::{ComplexFourVector, C64};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::RunError;
use crate::output::Outcome;

mod calculus;
mod dirac;
mod hjb;
mod stochastic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum Scenario {
    Moments,
    SdeDemo,
    CrScan,
    OptimalControl,
    EquivalenceAudit,
    HjbResidual,
    Covariance,
    HopfCole,
    Clifford,
    DiracPlanewave,
    All,
}

impl Scenario {
    pub const EACH: [Scenario; 10] = [
        Scenario::Moments,
        Scenario::SdeDemo,
        Scenario::CrScan,
        Scenario::OptimalControl,
        Scenario::EquivalenceAudit,
        Scenario::HjbResidual,
        Scenario::Covariance,
        Scenario::HopfCole,
        Scenario::Clifford,
        Scenario::DiracPlanewave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Moments => "moments",
            Scenario::SdeDemo => "sde-demo",
            Scenario::CrScan => "cr-scan",
            Scenario::OptimalControl => "optimal-control",
            Scenario::EquivalenceAudit => "equivalence-audit",
            Scenario::HjbResidual => "hjb-residual",
            Scenario::Covariance => "covariance",
            Scenario::HopfCole => "hopf-cole",
            Scenario::Clifford => "clifford",
            Scenario::DiracPlanewave => "dirac-planewave",
            Scenario::All => "all",
        }
    }

    /// The scenarios this one expands to.
    pub fn expand(self) -> Vec<Scenario> {
        match self {
            Scenario::All => Scenario::EACH.to_vec(),
            s => vec![s],
        }
    }

    pub fn from_name(name: &str) -> Option<Scenario> {
        Scenario::from_str(name, false).ok()
    }
}

/// Configuration plus the worker pool used for probes and paths.
#[derive(Debug)]
pub struct Context {
    pub cfg: ScenarioConfig,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, RunError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.jobs)
            .build()
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(Context { cfg, pool })
    }

    /// `f(0), …, f(n − 1)` in index order, whatever the thread count.
    pub fn par_map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n).into_par_iter().map(f).collect())
    }

    pub fn seed(&self) -> u64 {
        self.cfg.run.seed
    }

    /// Probe set inside the configured box, kept `margin` away from its faces.
    pub fn probes(&self, margin: f64) -> Result<Vec<(f64, ComplexFourVector)>, RunError> {
        let bx = self.cfg.domain_box().shrunk(margin, margin);
        Ok(halton_probes(&bx, self.cfg.run.probes, 0)?)
    }

    /// Independent generator for a named piece of a scenario.
    pub fn rng(&self, stream: u64) -> ChaCha20Rng {
        path_rng(self.seed(), stream)
    }
}

pub fn run(s: Scenario, ctx: &Context) -> Result<Outcome, RunError> {
    match s {
        Scenario::Moments => stochastic::moments(ctx),
        Scenario::SdeDemo => stochastic::sde_demo(ctx),
        Scenario::CrScan => calculus::cr_scan(ctx),
        Scenario::OptimalControl => calculus::optimal_control(ctx),
        Scenario::EquivalenceAudit => calculus::equivalence_audit(ctx),
        Scenario::HjbResidual => hjb::hjb_residual(ctx),
        Scenario::Covariance => hjb::covariance(ctx),
        Scenario::HopfCole => dirac::hopf_cole(ctx),
        Scenario::Clifford => dirac::clifford(ctx),
        Scenario::DiracPlanewave => dirac::dirac_planewave(ctx),
        Scenario::All => Err(RunError::Config("`all` must be expanded first".into())),
    }
}

fn rand_c<R: Rng>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn rand4<R: Rng>(rng: &mut R, scale: f64) -> [C64; 4] {
    core::array::from_fn(|_| rand_c(rng, scale))
}

/// `J = Σ (b_μ (z^μ)² / 2 + p_μ z^μ) + t_coeff τ`.
fn diagonal_quadratic(b: [C64; 4], p: [C64; 4], t_coeff: f64, domain: DomainBox) -> ScalarField {
    ScalarField::new(domain, move |tau, z| {
        (0..4).fold(C64::new(t_coeff * tau, 0.0), |acc, mu| {
            acc + b[mu] * z[mu] * z[mu] * 0.5 + p[mu] * z[mu]
        })
    })
}

/// `J = Σ B_{μν} z^μ z^ν` with symmetric `B`.
fn quadratic_form(b: [[C64; 4]; 4], domain: DomainBox) -> ScalarField {
    ScalarField::new(domain, move |_, z| {
        let mut acc = C64::new(0.0, 0.0);
        for mu in 0..4 {
            for nu in 0..4 {
                acc += b[mu][nu] * z[mu] * z[nu];
            }
        }
        acc
    })
}

fn random_symmetric<R: Rng>(rng: &mut R, scale: f64) -> [[C64; 4]; 4] {
    let mut b = [[C64::new(0.0, 0.0); 4]; 4];
    for mu in 0..4 {
        for nu in mu..4 {
            let v = rand_c(rng, scale);
            b[mu][nu] = v;
            b[nu][mu] = v;
        }
    }
    b
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a: f64, b: f64| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}
