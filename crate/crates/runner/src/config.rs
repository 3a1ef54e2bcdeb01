//! Scenario configuration, loaded from TOML and overridden by CLI flags.

use std::path::Path;

use csoc_core::lagrangian::{EMFieldConfig, VectorPotential};
use csoc_core::probes::DomainBox;
use csoc_core::wiener::DiffusionSpec;
use csoc_core::{Metric, Sign, Signature, C64};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub run: RunSection,
    pub physics: PhysicsSection,
    pub metric: MetricSection,
    pub diffusion: DiffusionSection,
    pub domain: DomainSection,
    pub moments: MomentsSection,
    pub sde_demo: SdeDemoSection,
    pub audit: AuditSection,
    pub hjb: HjbSection,
    pub dirac: DiracSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub scenario: String,
    pub seed: u64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub d_tau: f64,
    pub probes: usize,
    pub jobs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            scenario: "all".into(),
            seed: 42,
            n_paths: 100_000,
            n_steps: 100,
            d_tau: 0.01,
            probes: 64,
            jobs: 1,
            out_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub hbar: f64,
    pub mass: f64,
    pub c: f64,
    pub charge: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            hbar: 1.0,
            mass: 1.0,
            c: 1.0,
            charge: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureName {
    /// diag(−1, 1, 1, 1)
    TimeNegative,
    /// diag(1, −1, −1, −1)
    TimePositive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub signature: SignatureName,
    /// Correlation sign, `1` or `-1`.
    pub epsilon: i64,
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            signature: SignatureName::TimeNegative,
            epsilon: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionMode {
    /// `σ_x = σ_y = √(ħ/m)` on every axis.
    Quantum,
    /// Use `sigma_x` and `sigma_y` as given.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionSection {
    pub mode: DiffusionMode,
    pub sigma_x: [f64; 4],
    pub sigma_y: [f64; 4],
}

impl Default for DiffusionSection {
    fn default() -> Self {
        DiffusionSection {
            mode: DiffusionMode::Quantum,
            sigma_x: [1.0; 4],
            sigma_y: [1.0; 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub tau: [f64; 2],
    /// Half-width of the box in every real and imaginary coordinate.
    pub half_width: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            tau: [0.0, 1.0],
            half_width: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsSection {
    /// Drift `v = Re w`.
    pub drift_re: [f64; 4],
    /// Drift `u = Im w`.
    pub drift_im: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeDemoSection {
    pub momentum_re: [f64; 4],
    pub momentum_im: [f64; 4],
    pub start_re: [f64; 4],
    pub start_im: [f64; 4],
    /// Paths written to the trajectory table.
    pub saved_paths: usize,
    /// Step of the one-step Bellman estimate.
    pub bellman_d_tau: f64,
}

impl Default for SdeDemoSection {
    fn default() -> Self {
        SdeDemoSection {
            momentum_re: [0.8, 0.3, 0.0, 0.1],
            momentum_im: [0.1, 0.0, -0.2, 0.0],
            start_re: [0.0; 4],
            start_im: [0.0; 4],
            saved_paths: 8,
            bellman_d_tau: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    /// Random analytic `(J, A)` instances.
    pub instances: usize,
    /// Probes per instance.
    pub probes: usize,
    pub h: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            instances: 20,
            probes: 4,
            h: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HjbSection {
    pub tau_final: f64,
    pub momentum_re: [f64; 4],
    pub momentum_im: [f64; 4],
    /// `zero`, `constant(a0,a1,a2,a3)` or `linear-electric(E)`.
    pub potential: String,
    pub h: f64,
}

impl Default for HjbSection {
    fn default() -> Self {
        HjbSection {
            tau_final: 1.0,
            momentum_re: [0.5, -0.2, 0.1, 0.3],
            momentum_im: [0.1, 0.2, 0.0, -0.1],
            potential: "constant(0.2,-0.1,0.05,0.1)".into(),
            h: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracSection {
    pub k_re: [f64; 4],
    pub k_im: [f64; 4],
    pub potential: String,
    pub h: f64,
}

impl Default for DiracSection {
    fn default() -> Self {
        DiracSection {
            k_re: [0.35, 0.2, -0.15, 0.1],
            k_im: [0.0, 0.05, 0.0, -0.05],
            potential: "constant(0.2,-0.1,0.05,0.1)".into(),
            h: 1e-3,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            run: RunSection::default(),
            physics: PhysicsSection::default(),
            metric: MetricSection::default(),
            diffusion: DiffusionSection::default(),
            domain: DomainSection::default(),
            moments: MomentsSection::default(),
            sde_demo: SdeDemoSection::default(),
            audit: AuditSection::default(),
            hjb: HjbSection::default(),
            dirac: DiracSection::default(),
        }
    }
}

pub fn complex4(re: [f64; 4], im: [f64; 4]) -> [C64; 4] {
    core::array::from_fn(|mu| C64::new(re[mu], im[mu]))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, RunError> {
        toml::to_string(self).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        let r = &self.run;
        if r.seed > i64::MAX as u64 {
            return bad(format!(
                "seed {} does not fit in a signed 64-bit integer",
                r.seed
            ));
        }
        if r.n_paths == 0 || r.n_steps == 0 || r.probes == 0 || r.jobs == 0 {
            return bad("n_paths, n_steps, probes and jobs must be positive".into());
        }
        if !(r.d_tau > 0.0 && r.d_tau.is_finite()) {
            return bad(format!("d_tau must be positive, got {}", r.d_tau));
        }
        let p = &self.physics;
        for (name, v) in [("hbar", p.hbar), ("mass", p.mass), ("c", p.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !p.charge.is_finite() {
            return bad("charge must be finite".into());
        }
        if Sign::from_value(self.metric.epsilon).is_none() {
            return bad(format!(
                "epsilon must be 1 or -1, got {}",
                self.metric.epsilon
            ));
        }
        let d = &self.domain;
        if !(d.tau[0] < d.tau[1] && d.half_width > 0.0 && d.half_width.is_finite()) {
            return bad("domain must have tau[0] < tau[1] and a positive half_width".into());
        }
        if self.sde_demo.saved_paths > r.n_paths {
            return bad("sde_demo.saved_paths exceeds n_paths".into());
        }
        for (name, v) in [
            ("audit.h", self.audit.h),
            ("hjb.h", self.hjb.h),
            ("dirac.h", self.dirac.h),
            ("sde_demo.bellman_d_tau", self.sde_demo.bellman_d_tau),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.audit.instances == 0 || self.audit.probes == 0 {
            return bad("audit.instances and audit.probes must be positive".into());
        }
        self.potential(&self.hjb.potential)?;
        self.potential(&self.dirac.potential)?;
        Ok(())
    }

    pub fn metric(&self) -> Metric {
        let signature = match self.metric.signature {
            SignatureName::TimeNegative => Signature::TimeNegative,
            SignatureName::TimePositive => Signature::TimePositive,
        };
        Metric::new(
            signature,
            Sign::from_value(self.metric.epsilon).unwrap_or(Sign::Plus),
        )
    }

    pub fn diffusion(&self) -> Result<DiffusionSpec, RunError> {
        let g = self.metric();
        let spec = match self.diffusion.mode {
            DiffusionMode::Quantum => {
                DiffusionSpec::quantum(self.physics.hbar, self.physics.mass, g)
            }
            DiffusionMode::Explicit => {
                DiffusionSpec::new(self.diffusion.sigma_x, self.diffusion.sigma_y, g)
            }
        };
        spec.map_err(RunError::Domain)
    }

    pub fn potential(&self, text: &str) -> Result<VectorPotential, RunError> {
        text.parse::<VectorPotential>()
            .map_err(|e| RunError::Config(format!("potential `{text}`: {e}")))
    }

    pub fn em_config(&self, potential: &str) -> Result<EMFieldConfig, RunError> {
        let p = &self.physics;
        EMFieldConfig::new(
            p.charge,
            p.mass,
            p.c,
            self.potential(potential)?,
            self.metric(),
        )
        .map_err(RunError::Domain)
    }

    pub fn domain_box(&self) -> DomainBox {
        let d = &self.domain;
        DomainBox::cube((d.tau[0], d.tau[1]), d.half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ScenarioConfig::default();
        cfg.run.seed = 7;
        cfg.run.out_dir = Some("results".into());
        cfg.run.d_tau = 0.1 + 0.2;
        cfg.metric.signature = SignatureName::TimePositive;
        cfg.metric.epsilon = -1;
        cfg.diffusion.sigma_x = [1.0 / 3.0, 0.1, 2.5e-7, 1.0];
        let text = cfg.to_toml().unwrap();
        assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = ScenarioConfig::from_toml("[run]\nseed = 3\n").unwrap();
        assert_eq!(cfg.run.seed, 3);
        assert_eq!(cfg.physics, PhysicsSection::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(
            ScenarioConfig::from_toml("[metric]\nepsilon = 2\n"),
            Err(RunError::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_toml("[run]\nunknown = 1\n"),
            Err(RunError::Config(_))
        ));
    }
}
