//! The slot-level environment: hidden world dynamics plus the SU-observable
//! state, tied together by [`Env::step`].

mod model;
mod ops;

pub use model::{
    Action, Battery, EnergyCosts, EnvState, Geometry, Harvester, HarvestMode, Observation,
    PuChain, SensingModel, StepOutcome, WorldState, P_R_SENTINEL,
};
pub use ops::{
    action_cost, allocate_power, check_causality, rate, received_power, reward, sample_channel,
    sample_energy, sense, step_pu, update_aoi, update_battery, valid_actions,
};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::EnvConfig;
use crate::error::{Result, SimError};

/// What a resolved slot does on the air.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TxDecision {
    None,
    FullPower,
    Granted,
}

/// Outcome of the sensing cascade: the chosen tuple plus the observation
/// determine which of the eight cases the slot lands in and which tuple is
/// effectively executed (and paid for).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Branch {
    pub(crate) case_id: u8,
    pub(crate) effective: Action,
    pub(crate) tx: TxDecision,
}

/// Pure case resolution. `grant_positive` is only meaningful when the
/// observation is [`Observation::ActiveBelow`] and the action reports its
/// location; `collides` only when a full-power transmission happens while the
/// PU is actually active above threshold.
pub(crate) fn resolve_branch(
    action: Action,
    obs: Observation,
    grant_positive: bool,
    collides: bool,
) -> Branch {
    use Action::*;
    use Observation::*;
    match (action, obs) {
        (NoSense, _) => Branch { case_id: 1, effective: NoSense, tx: TxDecision::None },
        // Spectrum looks idle: update-carrying tuples transmit at full power.
        (Overlay | Underlay, Idle) => {
            if collides {
                Branch { case_id: 3, effective: Overlay, tx: TxDecision::FullPower }
            } else {
                Branch { case_id: 2, effective: Overlay, tx: TxDecision::FullPower }
            }
        }
        (Silent | UnderlayDenied, Idle) => {
            Branch { case_id: 4, effective: Silent, tx: TxDecision::None }
        }
        // Detected PU above threshold: forced silence for everyone.
        (_, ActiveAbove) => Branch { case_id: 5, effective: Silent, tx: TxDecision::None },
        // Detected PU below threshold: only location-reporting tuples engage
        // the central entity.
        (Underlay, ActiveBelow) => {
            if grant_positive {
                Branch { case_id: 6, effective: Underlay, tx: TxDecision::Granted }
            } else {
                Branch { case_id: 8, effective: UnderlayDenied, tx: TxDecision::None }
            }
        }
        (UnderlayDenied, ActiveBelow) => {
            let case_id = if grant_positive { 7 } else { 8 };
            Branch { case_id, effective: UnderlayDenied, tx: TxDecision::None }
        }
        (Overlay | Silent, ActiveBelow) => {
            Branch { case_id: 7, effective: Silent, tx: TxDecision::None }
        }
        // Z = 1 tuples always produce an observation.
        (Silent | Overlay | Underlay | UnderlayDenied, NotSensed) => {
            unreachable!("sensing actions always observe")
        }
    }
}

/// One episode-scoped environment instance. Single-threaded; independent
/// instances may run on separate threads for parallel seeds.
pub struct Env {
    cfg: EnvConfig,
    geometry: Geometry,
    world: WorldState,
    state: EnvState,
}

impl Env {
    pub fn new<R: Rng + ?Sized>(cfg: EnvConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let mut env = Self {
            geometry: cfg.fixed_geometry(),
            world: WorldState { pu_active: false, channel_gain: 1.0, shadow_db: 0.0 },
            state: EnvState { aoi: 1, battery: 0.0, harvested: 0.0, p_r_dbm: P_R_SENTINEL },
            cfg,
        };
        env.reset(rng);
        Ok(env)
    }

    /// Start a fresh episode: redraw the SU position (when an annulus is
    /// configured), the PU state from its stationary law, and the first
    /// slot's channel, shadowing and harvest.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EnvState {
        self.geometry = self.cfg.fixed_geometry();
        if let Some([lo, hi]) = self.cfg.geometry.annulus_m {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let r = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
            let theta = 2.0 * std::f64::consts::PI * v;
            self.geometry.su_pos = [
                self.geometry.pu_pos[0] + r * theta.cos(),
                self.geometry.pu_pos[1] + r * theta.sin(),
            ];
        }
        let chain = self.cfg.pu_chain();
        let u: f64 = rng.random();
        self.world.pu_active = u < chain.stationary_active();
        self.world.channel_gain = sample_channel(self.cfg.geometry.rayleigh_scale, rng);
        self.world.shadow_db = self.draw_shadow(rng);
        let e0 = sample_energy(&self.cfg.harvester(), rng);
        self.state = EnvState {
            aoi: 1,
            battery: self.cfg.energy.b0_frac * self.cfg.energy.b_max,
            harvested: e0,
            p_r_dbm: P_R_SENTINEL,
        };
        self.state
    }

    fn draw_shadow<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // A unit normal scaled by the configured deviation keeps the draw
        // count identical across shadowing configurations.
        let z: f64 = StandardNormal.sample(rng);
        z * self.cfg.geometry.shadow_var_db2.sqrt()
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    pub fn world(&self) -> WorldState {
        self.world
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Current slot's channel gain (the SU knows its own link for costing).
    pub fn channel_gain(&self) -> f64 {
        self.world.channel_gain
    }

    /// Actions affordable this slot.
    pub fn valid_actions(&self) -> Vec<Action> {
        valid_actions(
            &self.state,
            self.world.channel_gain,
            &self.cfg.energy_costs(),
            self.cfg.energy.b_max,
        )
    }

    /// Execute one slot: sense (when the tuple says so), resolve the
    /// overlay/underlay/silent cascade, settle energy and AoI, then advance
    /// the hidden world for the next slot.
    pub fn step<R: Rng + ?Sized>(&mut self, action: Action, rng: &mut R) -> Result<StepOutcome> {
        let costs = self.cfg.energy_costs();
        let sensing = self.cfg.sensing_model();
        let h = self.world.channel_gain;
        let battery = Battery::new(self.state.battery, self.cfg.energy.b_max);
        if !check_causality(&battery, action, h, &costs) {
            return Err(SimError::CausalityViolated {
                cost: action_cost(action, h, &costs, battery.capacity),
                level: battery.level,
            });
        }

        // The sensing roll is consumed every slot so that trajectories under
        // different policies or swept powers stay aligned draw-for-draw.
        let sense_roll: f64 = rng.random();
        let p_r_true = received_power(&self.geometry, self.world.pu_active, self.world.shadow_db)?;
        let obs = if action.senses() {
            ops::sense_with_roll(self.world.pu_active, p_r_true, &sensing, sense_roll)
        } else {
            Observation::NotSensed
        };

        let grant = if obs == Observation::ActiveBelow && action.reports_location() {
            allocate_power(&self.geometry, &sensing)
        } else {
            None
        };
        let collides = self.world.pu_active && p_r_true > sensing.n_th_dbm;
        let branch = resolve_branch(action, obs, grant.is_some(), collides);

        // A collided transmission delivers nothing: its realized rate is zero.
        let rate_bps = match branch.tx {
            TxDecision::None => 0.0,
            TxDecision::FullPower if branch.case_id == 3 => 0.0,
            TxDecision::FullPower => rate(Some(self.geometry.p_full_dbm), h, sensing.n0_dbm),
            TxDecision::Granted => rate(grant, h, sensing.n0_dbm),
        };
        let ack = matches!(branch.case_id, 2 | 6);
        let r = reward(&self.state, branch.case_id, rate_bps, self.cfg.reward.xi);
        let aoi_next = update_aoi(self.state.aoi, branch.effective, ack, self.cfg.reward.a_max);
        let battery_next =
            update_battery(&battery, self.state.harvested, branch.effective, h, &costs)?;

        // What the detector reports into the next state: the measured power
        // on a detection; the noise floor on a false alarm (there is nothing
        // above the noise to measure); the sentinel otherwise.
        let p_r_state = match obs {
            Observation::ActiveBelow | Observation::ActiveAbove => {
                if p_r_true.is_finite() {
                    p_r_true
                } else {
                    sensing.n0_dbm
                }
            }
            _ => P_R_SENTINEL,
        };

        // Advance the hidden world.
        self.world.pu_active = step_pu(self.world.pu_active, &self.cfg.pu_chain(), rng);
        self.world.channel_gain = sample_channel(self.cfg.geometry.rayleigh_scale, rng);
        self.world.shadow_db = self.draw_shadow(rng);
        let e_next = sample_energy(&self.cfg.harvester(), rng);

        let next_state = EnvState {
            aoi: aoi_next,
            battery: battery_next.level,
            harvested: e_next,
            p_r_dbm: p_r_state,
        };
        self.state = next_state;

        Ok(StepOutcome {
            next_state,
            reward: r,
            case_id: branch.case_id,
            rate: rate_bps,
            collided: branch.case_id == 3,
            ack,
            observation: obs,
            effective_action: branch.effective,
        })
    }
}
