//! Domain types for the spectrum-sharing environment.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Two-state PU activity chain. `p_ia` is the probability of moving from
/// inactive to active, `p_ai` from active to inactive; the diagonal entries
/// are the complements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PuChain {
    pub p_ia: f64,
    pub p_ai: f64,
}

impl PuChain {
    pub fn p_ii(&self) -> f64 {
        1.0 - self.p_ia
    }

    pub fn p_aa(&self) -> f64 {
        1.0 - self.p_ai
    }

    /// Stationary probability of the active state.
    pub fn stationary_active(&self) -> f64 {
        if self.p_ia + self.p_ai == 0.0 {
            0.0
        } else {
            self.p_ia / (self.p_ia + self.p_ai)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p_ia, self.p_ai] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidConfig(format!(
                    "PU transition probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Imperfect sensing: false-alarm and detection probabilities plus the noise
/// floor and the underlay threshold that splits detected-active observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingModel {
    pub p_f: f64,
    pub p_d: f64,
    pub n0_dbm: f64,
    pub n_th_dbm: f64,
}

impl SensingModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.p_f && self.p_f < self.p_d && self.p_d <= 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "need 0 <= p_f < p_d <= 1, got p_f={} p_d={}",
                self.p_f, self.p_d
            )));
        }
        if !(self.n0_dbm < self.n_th_dbm) {
            return Err(SimError::InvalidConfig(format!(
                "need n0 < n_th, got {} >= {}",
                self.n0_dbm, self.n_th_dbm
            )));
        }
        Ok(())
    }
}

/// Energy harvest distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarvestMode {
    Poisson,
    /// Normal distribution truncated at zero.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harvester {
    pub mode: HarvestMode,
    pub mean: f64,
    /// Standard deviation; used in normal mode only.
    pub std: f64,
}

impl Harvester {
    /// Standard deviation of the configured distribution.
    pub fn std_dev(&self) -> f64 {
        match self.mode {
            HarvestMode::Poisson => self.mean.sqrt(),
            HarvestMode::Normal => self.std,
        }
    }

    /// Scale used when normalizing harvested energy for network input.
    pub fn normalization_scale(&self) -> f64 {
        self.mean + 4.0 * self.std_dev()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean > 0.0) {
            return Err(SimError::InvalidConfig("harvest mean must be positive".into()));
        }
        if self.mode == HarvestMode::Normal {
            if !(self.std > 0.0) {
                return Err(SimError::InvalidConfig("harvest std must be positive".into()));
            }
            if self.mean < 4.0 * self.std {
                return Err(SimError::InvalidConfig(format!(
                    "normal harvest needs mean >= 4*std, got mean={} std={}",
                    self.mean, self.std
                )));
            }
        }
        Ok(())
    }
}

/// Per-action energy costs: α for sensing, δ for the location report. The
/// update cost is channel inversion, 1/h, clamped by the caller's battery
/// capacity (anything above it is unaffordable anyway).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCosts {
    pub alpha: f64,
    pub delta: f64,
}

impl EnergyCosts {
    /// Update (status transmission) cost for channel gain `h`, clamped at `cap`.
    pub fn update_cost(&self, h: f64, cap: f64) -> f64 {
        (1.0 / h).min(cap)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.delta > 0.0) {
            return Err(SimError::InvalidConfig(
                "energy costs alpha and delta must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Battery with hard bounds [0, capacity].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Battery {
    pub level: f64,
    pub capacity: f64,
}

impl Battery {
    pub fn new(level: f64, capacity: f64) -> Self {
        Self { level, capacity }
    }
}

/// Propagation geometry and transmit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub pu_pos: [f64; 2],
    pub su_pos: [f64; 2],
    pub d0_m: f64,
    pub omega: f64,
    pub shadow_var_db2: f64,
    pub freq_hz: f64,
    pub p_pu_dbm: f64,
    pub p_full_dbm: f64,
}

impl Geometry {
    pub fn distance(&self) -> f64 {
        let dx = self.pu_pos[0] - self.su_pos[0];
        let dy = self.pu_pos[1] - self.su_pos[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn wavelength(&self) -> f64 {
        299_792_458.0 / self.freq_hz
    }

    /// Constant path-loss factor k in dB: 20·log10(λ / (4π·d0)).
    pub fn k_db(&self) -> f64 {
        20.0 * (self.wavelength() / (4.0 * std::f64::consts::PI * self.d0_m)).log10()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0_m > 0.0) {
            return Err(SimError::InvalidConfig("d0 must be positive".into()));
        }
        if !(self.omega >= 2.0) {
            return Err(SimError::InvalidConfig("omega must be >= 2".into()));
        }
        let finite = self
            .pu_pos
            .iter()
            .chain(self.su_pos.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(SimError::InvalidConfig("positions must be finite".into()));
        }
        if self.distance() <= 0.0 {
            return Err(SimError::DegenerateGeometry);
        }
        if !(self.freq_hz > 0.0) {
            return Err(SimError::InvalidConfig("frequency must be positive".into()));
        }
        if !(self.shadow_var_db2 >= 0.0) {
            return Err(SimError::InvalidConfig("shadow variance must be >= 0".into()));
        }
        Ok(())
    }
}

/// The five admissible decision tuples (Z, L, W, U). No other combination is
/// constructible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// (0,0,0,0) — stay idle, harvest only.
    NoSense,
    /// (1,0,0,0) — sense without transmitting.
    Silent,
    /// (1,0,0,1) — sense, transmit at full power if the spectrum looks idle.
    Overlay,
    /// (1,1,1,1) — sense; on a detected-but-tolerable PU, report location,
    /// wait for a power grant and transmit at the granted power.
    Underlay,
    /// (1,1,1,0) — sense and report location but never transmit.
    UnderlayDenied,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::NoSense,
        Action::Silent,
        Action::Overlay,
        Action::Underlay,
        Action::UnderlayDenied,
    ];

    /// The (Z, L, W, U) tuple.
    pub fn tuple(&self) -> (u8, u8, u8, u8) {
        match self {
            Action::NoSense => (0, 0, 0, 0),
            Action::Silent => (1, 0, 0, 0),
            Action::Overlay => (1, 0, 0, 1),
            Action::Underlay => (1, 1, 1, 1),
            Action::UnderlayDenied => (1, 1, 1, 0),
        }
    }

    pub fn senses(&self) -> bool {
        self.tuple().0 == 1
    }

    pub fn reports_location(&self) -> bool {
        self.tuple().1 == 1
    }

    pub fn updates(&self) -> bool {
        self.tuple().3 == 1
    }

    pub fn index(&self) -> usize {
        Action::ALL.iter().position(|a| a == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Action::NoSense => "no_sense",
            Action::Silent => "silent",
            Action::Overlay => "overlay",
            Action::Underlay => "underlay",
            Action::UnderlayDenied => "underlay_denied",
        };
        f.write_str(name)
    }
}

/// Sentinel stored in [`EnvState::p_r_dbm`] when the slot produced no power
/// measurement (not sensed, or sensed idle).
pub const P_R_SENTINEL: f64 = 0.0;

/// The SU-observable state s = (AoI, battery, harvested energy, received power).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    /// Age of information in slots, 1..=a_max.
    pub aoi: u32,
    /// Battery level in energy units.
    pub battery: f64,
    /// Energy harvested in the current slot (credited at slot end).
    pub harvested: f64,
    /// Last measured received power in dBm; [`P_R_SENTINEL`] when none.
    pub p_r_dbm: f64,
}

/// Hidden ground truth the SU never observes directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub pu_active: bool,
    /// |h| of the SU's own link, Rayleigh-distributed per slot.
    pub channel_gain: f64,
    /// Shadowing draw ψ in dB for this slot.
    pub shadow_db: f64,
}

/// Sensing outcome as seen by the SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    /// Did not sense this slot.
    NotSensed,
    /// Spectrum observed idle (true idle or missed detection).
    Idle,
    /// PU detected with received power below the underlay threshold.
    ActiveBelow,
    /// PU detected above the threshold: transmission forbidden.
    ActiveAbove,
}

/// Everything produced by one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    /// Observation case 1..=8.
    pub case_id: u8,
    /// Realized SU rate in bps/Hz (0 when nothing was delivered).
    pub rate: f64,
    /// True when a transmission overlapped an undetected PU above threshold.
    pub collided: bool,
    /// True when a status update was delivered (cases 2 and 6).
    pub ack: bool,
    /// What the SU actually saw this slot.
    pub observation: Observation,
    /// The decision tuple that was effectively executed after the sensing
    /// cascade (drives energy accounting).
    pub effective_action: Action,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_tuples_match_the_admissible_set() {
        let tuples: Vec<_> = Action::ALL.iter().map(|a| a.tuple()).collect();
        assert_eq!(
            tuples,
            vec![(0, 0, 0, 0), (1, 0, 0, 0), (1, 0, 0, 1), (1, 1, 1, 1), (1, 1, 1, 0)]
        );
        for (i, a) in Action::ALL.iter().enumerate() {
            assert_eq!(a.index(), i);
            assert_eq!(Action::from_index(i), Some(*a));
        }
        assert_eq!(Action::from_index(5), None);
    }

    #[test]
    fn k_term_at_2p4_ghz() {
        let g = Geometry {
            pu_pos: [0.0, 0.0],
            su_pos: [1.0, 0.0],
            d0_m: 1.0,
            omega: 3.0,
            shadow_var_db2: 6.0,
            freq_hz: 2.4e9,
            p_pu_dbm: 20.0,
            p_full_dbm: 20.0,
        };
        // λ = 0.125 m, 20·log10(λ/4π) = −40.05 dB
        assert!((g.wavelength() - 0.12491).abs() < 1e-4);
        assert!((g.k_db() - (-40.05)).abs() < 0.01);
    }

    #[test]
    fn chain_row_sums_and_stationary() {
        let c = PuChain { p_ia: 0.4, p_ai: 0.3 };
        assert!((c.p_ii() + c.p_ia - 1.0).abs() < 1e-15);
        assert!((c.p_aa() + c.p_ai - 1.0).abs() < 1e-15);
        assert!((c.stationary_active() - 0.4 / 0.7).abs() < 1e-12);
    }

    #[test]
    fn harvester_invariants() {
        let h = Harvester { mode: HarvestMode::Normal, mean: 3.0, std: 1.0 };
        assert!(h.validate().is_err()); // mean < 4*std
        let h = Harvester { mode: HarvestMode::Normal, mean: 3.0, std: 0.5 };
        h.validate().unwrap();
        assert_eq!(h.std_dev(), 0.5);
        let p = Harvester { mode: HarvestMode::Poisson, mean: 4.0, std: 0.0 };
        p.validate().unwrap();
        assert_eq!(p.std_dev(), 2.0);
    }

    #[test]
    fn update_cost_clamps() {
        let c = EnergyCosts { alpha: 3.0, delta: 1.0 };
        assert_eq!(c.update_cost(2.0, 10.0), 0.5);
        assert_eq!(c.update_cost(1e-9, 10.0), 10.0);
    }
}
