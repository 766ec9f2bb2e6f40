//! Configuration types. Everything is JSON-serializable; every default is
//! overridable from a config file or the CLI.

use serde::{Deserialize, Serialize};

use crate::env::{EnergyCosts, Geometry, Harvester, HarvestMode, PuChain, SensingModel};
use crate::error::{Result, SimError};

/// PU activity chain parameters (`pu` section).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PuSection {
    /// Probability of transitioning inactive -> active.
    pub p_ia: f64,
    /// Probability of transitioning active -> inactive.
    pub p_ai: f64,
}

impl Default for PuSection {
    fn default() -> Self {
        Self { p_ia: 0.4, p_ai: 0.3 }
    }
}

/// Spectrum sensing parameters (`sensing` section).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSection {
    pub p_f: f64,
    pub p_d: f64,
    /// Noise floor in dBm.
    pub n0_dbm: f64,
    /// Underlay/silent threshold in dBm.
    pub n_th_dbm: f64,
}

impl Default for SensingSection {
    fn default() -> Self {
        Self {
            p_f: 0.1,
            p_d: 0.9,
            n0_dbm: -80.0,
            n_th_dbm: -60.0,
        }
    }
}

/// Energy harvesting and battery parameters (`energy` section).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    /// Harvest distribution: "poisson" or "normal".
    pub mode: HarvestMode,
    /// Mean harvested energy per slot.
    pub mean: f64,
    /// Standard deviation (normal mode only).
    pub std: f64,
    /// Battery capacity in energy units.
    pub b_max: f64,
    /// Initial battery level as a fraction of capacity.
    pub b0_frac: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            mode: HarvestMode::Poisson,
            mean: 3.0,
            std: 0.5,
            b_max: 10.0,
            b0_frac: 0.5,
        }
    }
}

/// Propagation and placement parameters (`geometry` section).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    /// PU transmitter position (m).
    pub pu_pos: [f64; 2],
    /// SU position (m). Used as-is when `annulus_m` is `None`.
    pub su_pos: [f64; 2],
    /// When set, the SU position is redrawn uniformly (by area) in this
    /// annulus around the PU at every episode reset.
    pub annulus_m: Option<[f64; 2]>,
    /// Path-loss reference distance (m).
    pub d0_m: f64,
    /// Path-loss exponent.
    pub omega: f64,
    /// Shadowing variance (dB^2); redrawn per slot.
    pub shadow_var_db2: f64,
    /// Carrier frequency (Hz).
    pub freq_hz: f64,
    /// PU transmit power (dBm).
    pub p_pu_dbm: f64,
    /// SU full transmit power (dBm).
    pub p_full_dbm: f64,
    /// Rayleigh scale of the SU's own channel gain.
    pub rayleigh_scale: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            pu_pos: [0.0, 0.0],
            su_pos: [50.0, 0.0],
            annulus_m: Some([2.0, 300.0]),
            d0_m: 1.0,
            omega: 3.0,
            shadow_var_db2: 6.0,
            freq_hz: 2.4e9,
            p_pu_dbm: 10.0,
            p_full_dbm: 20.0,
            rayleigh_scale: 1.0,
        }
    }
}

/// Per-action energy costs (`costs` section).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostsSection {
    /// Sensing cost.
    pub alpha: f64,
    /// Location-report cost.
    pub delta: f64,
}

impl Default for CostsSection {
    fn default() -> Self {
        Self { alpha: 3.0, delta: 1.0 }
    }
}

/// Reward shaping parameters (`reward` section).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    /// Rate weight ξ in r = ξ·R − a.
    pub xi: f64,
    /// AoI saturation value.
    pub a_max: u32,
}

impl Default for RewardSection {
    fn default() -> Self {
        Self { xi: 1.0, a_max: 100 }
    }
}

/// Full environment configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub pu: PuSection,
    pub sensing: SensingSection,
    pub energy: EnergySection,
    pub geometry: GeometrySection,
    pub costs: CostsSection,
    pub reward: RewardSection,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.pu_chain().validate()?;
        self.sensing_model().validate()?;
        self.harvester().validate()?;
        self.energy_costs().validate()?;
        self.fixed_geometry().validate()?;
        if let Some([lo, hi]) = self.geometry.annulus_m {
            if !(lo > 0.0 && hi >= lo) {
                return Err(SimError::InvalidConfig(format!(
                    "annulus [{lo}, {hi}] must satisfy 0 < lo <= hi"
                )));
            }
        }
        if !(self.energy.b_max > 0.0) {
            return Err(SimError::InvalidConfig("b_max must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.energy.b0_frac) {
            return Err(SimError::InvalidConfig("b0_frac must be in [0, 1]".into()));
        }
        if self.reward.a_max < 1 {
            return Err(SimError::InvalidConfig("a_max must be >= 1".into()));
        }
        if !(self.geometry.rayleigh_scale > 0.0) {
            return Err(SimError::InvalidConfig(
                "rayleigh_scale must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn pu_chain(&self) -> PuChain {
        PuChain {
            p_ia: self.pu.p_ia,
            p_ai: self.pu.p_ai,
        }
    }

    pub fn sensing_model(&self) -> SensingModel {
        SensingModel {
            p_f: self.sensing.p_f,
            p_d: self.sensing.p_d,
            n0_dbm: self.sensing.n0_dbm,
            n_th_dbm: self.sensing.n_th_dbm,
        }
    }

    pub fn harvester(&self) -> Harvester {
        Harvester {
            mode: self.energy.mode,
            mean: self.energy.mean,
            std: self.energy.std,
        }
    }

    pub fn energy_costs(&self) -> EnergyCosts {
        EnergyCosts {
            alpha: self.costs.alpha,
            delta: self.costs.delta,
        }
    }

    /// Geometry with the configured (non-annulus) SU position.
    pub fn fixed_geometry(&self) -> Geometry {
        Geometry {
            pu_pos: self.geometry.pu_pos,
            su_pos: self.geometry.su_pos,
            d0_m: self.geometry.d0_m,
            omega: self.geometry.omega,
            shadow_var_db2: self.geometry.shadow_var_db2,
            freq_hz: self.geometry.freq_hz,
            p_pu_dbm: self.geometry.p_pu_dbm,
            p_full_dbm: self.geometry.p_full_dbm,
        }
    }
}

/// Learner hyper-parameters (`agent` section).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    /// Discount factor γ.
    pub gamma: f64,
    /// Adam learning rate β.
    pub lr: f64,
    /// Mini-batch size B.
    pub batch: usize,
    /// Target network sync period N (in gradient steps).
    pub target_sync: usize,
    /// Replay memory capacity D.
    pub memory: usize,
    /// Replay size required before gradient steps start.
    pub warmup: usize,
    /// ε-greedy schedule.
    pub eps_start: f64,
    pub eps_decay: f64,
    pub eps_floor: f64,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Training episodes.
    pub episodes: usize,
    /// Slots per episode T.
    pub horizon: usize,
    /// Treat end-of-horizon transitions as terminal for bootstrapping.
    pub done_at_horizon: bool,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            lr: 0.01,
            batch: 32,
            target_sync: 35,
            memory: 2000,
            warmup: 2000,
            eps_start: 1.0,
            eps_decay: 0.99986,
            eps_floor: 0.001,
            hidden: vec![64, 64],
            episodes: 200,
            horizon: 300,
            done_at_horizon: false,
        }
    }
}

impl AgentSection {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SimError::InvalidConfig("gamma must be in (0, 1)".into()));
        }
        if !(self.lr > 0.0) {
            return Err(SimError::InvalidConfig("lr must be positive".into()));
        }
        if self.batch == 0 || self.memory == 0 || self.horizon == 0 {
            return Err(SimError::InvalidConfig(
                "batch, memory and horizon must be positive".into(),
            ));
        }
        if self.warmup < self.batch {
            return Err(SimError::InvalidConfig(
                "warmup must be at least the batch size".into(),
            ));
        }
        if self.target_sync == 0 {
            return Err(SimError::InvalidConfig("target_sync must be positive".into()));
        }
        Ok(())
    }
}

/// Sweep axis for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BMax,
    PPu,
}

impl std::str::FromStr for SweepAxis {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b_max" | "bmax" => Ok(SweepAxis::BMax),
            "p_pu" | "ppu" => Ok(SweepAxis::PPu),
            other => Err(SimError::InvalidSweepAxis(other.to_string())),
        }
    }
}

/// Experiment protocol (`experiment` section).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Seeds; one full train/eval run per seed.
    pub seeds: Vec<u64>,
    /// Greedy evaluation episodes per seed.
    pub eval_episodes: usize,
    /// Sweep axis.
    pub sweep_axis: SweepAxis,
    /// Sweep values (must be sorted ascending).
    pub sweep_values: Vec<f64>,
    /// Schemes to run.
    pub schemes: Vec<String>,
    /// Trailing window (episodes) for reward smoothing and final-reward stats.
    pub smooth_window: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3, 4, 5],
            eval_episodes: 50,
            sweep_axis: SweepAxis::PPu,
            sweep_values: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            schemes: vec!["baseline".into(), "dqn".into(), "d3qn".into()],
            smooth_window: 20,
        }
    }
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub agent: AgentSection,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.agent.validate()?;
        if self.experiment.seeds.is_empty() {
            return Err(SimError::InvalidConfig("need at least one seed".into()));
        }
        if self.experiment.sweep_values.is_empty() {
            return Err(SimError::InvalidConfig("need at least one sweep value".into()));
        }
        let mut sorted = self.experiment.sweep_values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted != self.experiment.sweep_values
            || self.experiment.sweep_values.iter().any(|v| !v.is_finite())
        {
            return Err(SimError::InvalidConfig(
                "sweep values must be finite and sorted ascending".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Apply the sweep axis to a copy of the environment config.
    pub fn env_at(&self, value: f64) -> EnvConfig {
        let mut env = self.env.clone();
        match self.experiment.sweep_axis {
            SweepAxis::BMax => env.energy.b_max = value,
            SweepAxis::PPu => env.geometry.p_pu_dbm = value,
        }
        env
    }

    /// SHA-256 of the canonical JSON encoding, for run manifests.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let js = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(js.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn json_roundtrip_with_overrides() {
        let js = r#"{
            "env": { "pu": { "p_ia": 0.2 }, "energy": { "b_max": 5.0 } },
            "experiment": { "seeds": [7], "sweep_axis": "b_max", "sweep_values": [5.0, 10.0] }
        }"#;
        let cfg = ExperimentConfig::from_json(js).unwrap();
        assert_eq!(cfg.env.pu.p_ia, 0.2);
        assert_eq!(cfg.env.energy.b_max, 5.0);
        assert_eq!(cfg.experiment.seeds, vec![7]);
        assert!(matches!(cfg.experiment.sweep_axis, SweepAxis::BMax));
        // untouched defaults survive
        assert_eq!(cfg.env.costs.alpha, 3.0);
    }

    #[test]
    fn unsorted_sweep_rejected() {
        let js = r#"{ "experiment": { "sweep_values": [10.0, 5.0] } }"#;
        assert!(ExperimentConfig::from_json(js).is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        assert_eq!(a.digest(), b.digest());
        b.env.reward.xi = 0.5;
        assert_ne!(a.digest(), b.digest());
    }
}
