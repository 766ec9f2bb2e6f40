//! Pure per-slot operations: PU chain step, channel/harvest sampling,
//! received power, sensing, energy causality, battery/AoI updates, the
//! central entity's power grant, rate and reward.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Result, SimError};

use super::model::{
    Action, Battery, EnergyCosts, EnvState, Geometry, Harvester, HarvestMode, Observation,
    PuChain, SensingModel,
};

/// Advance the PU activity chain by one slot.
pub fn step_pu<R: Rng + ?Sized>(pu_active: bool, chain: &PuChain, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    if pu_active {
        u >= chain.p_ai
    } else {
        u < chain.p_ia
    }
}

/// Draw |h| from a Rayleigh distribution with the given scale via inverse CDF.
pub fn sample_channel<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    debug_assert!(scale > 0.0);
    // Rejection of u == 0 keeps the support strictly positive.
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    scale * (-2.0 * u.ln()).sqrt()
}

/// Draw the slot's harvested energy.
pub fn sample_energy<R: Rng + ?Sized>(h: &Harvester, rng: &mut R) -> f64 {
    match h.mode {
        HarvestMode::Poisson => {
            let d = Poisson::new(h.mean).expect("validated mean");
            d.sample(rng) as f64
        }
        HarvestMode::Normal => {
            let d = Normal::new(h.mean, h.std).expect("validated params");
            d.sample(rng).max(0.0)
        }
    }
}

/// Received PU power at the SU in dBm, or `-inf` when the PU is idle (the SU
/// would observe noise only).
pub fn received_power(geom: &Geometry, pu_active: bool, shadow_db: f64) -> Result<f64> {
    if !pu_active {
        return Ok(f64::NEG_INFINITY);
    }
    let d = geom.distance();
    if d <= 0.0 {
        return Err(SimError::DegenerateGeometry);
    }
    Ok(geom.p_pu_dbm + geom.k_db() - 10.0 * geom.omega * (d / geom.d0_m).log10() - shadow_db)
}

/// Imperfect sensing. An idle PU raises a false alarm with probability `p_f`;
/// an active PU is missed with probability `1 - p_d`, otherwise the detected
/// power is compared against the underlay threshold.
pub fn sense<R: Rng + ?Sized>(
    pu_active: bool,
    p_r_dbm: f64,
    model: &SensingModel,
    rng: &mut R,
) -> Observation {
    sense_with_roll(pu_active, p_r_dbm, model, rng.random())
}

/// Sensing decision from a pre-drawn uniform roll; lets the environment
/// consume its per-slot randomness unconditionally.
pub(crate) fn sense_with_roll(
    pu_active: bool,
    p_r_dbm: f64,
    model: &SensingModel,
    u: f64,
) -> Observation {
    if pu_active {
        if u < model.p_d {
            if p_r_dbm < model.n_th_dbm {
                Observation::ActiveBelow
            } else {
                Observation::ActiveAbove
            }
        } else {
            Observation::Idle
        }
    } else if u < model.p_f {
        // False alarm: the apparent power is noise-level, i.e. below threshold.
        Observation::ActiveBelow
    } else {
        Observation::Idle
    }
}

/// Total energy committed by a decision tuple: α·Z + φ(h)·U + δ·L.
pub fn action_cost(action: Action, h: f64, costs: &EnergyCosts, cap: f64) -> f64 {
    let (z, l, _w, u) = action.tuple();
    f64::from(z) * costs.alpha
        + f64::from(u) * costs.update_cost(h, cap)
        + f64::from(l) * costs.delta
}

/// Energy causality: can the battery pay for the full decision tuple?
pub fn check_causality(battery: &Battery, action: Action, h: f64, costs: &EnergyCosts) -> bool {
    action_cost(action, h, costs, battery.capacity) <= battery.level
}

/// Battery update: spend against the current level, credit the slot's
/// harvest afterwards, clip at capacity.
pub fn update_battery(
    battery: &Battery,
    e: f64,
    action: Action,
    h: f64,
    costs: &EnergyCosts,
) -> Result<Battery> {
    let spend = action_cost(action, h, costs, battery.capacity);
    if spend > battery.level {
        return Err(SimError::CausalityViolated {
            cost: spend,
            level: battery.level,
        });
    }
    let level = ((battery.level - spend).max(0.0) + e).min(battery.capacity);
    Ok(Battery::new(level, battery.capacity))
}

/// AoI update: resets to 1 only when a status update was acknowledged,
/// otherwise grows by one slot, saturating at `a_max`.
pub fn update_aoi(aoi: u32, action: Action, ack: bool, a_max: u32) -> u32 {
    if ack && matches!(action, Action::Overlay | Action::Underlay) {
        1
    } else {
        (aoi + 1).min(a_max)
    }
}

/// Central-entity power grant for the underlay path. The PU protection
/// radius `d_th` comes from inverting the path-loss model at mean shadowing
/// with the received power pinned to the noise floor; inside it the grant is
/// zero (`None`). Outside, the grant is the largest SU power whose
/// mean-path-loss footprint at the PU stays at or below the noise floor,
/// capped at the SU's full power.
pub fn allocate_power(geom: &Geometry, model: &SensingModel) -> Option<f64> {
    let d = geom.distance();
    let d_th = geom.d0_m * 10f64.powf((geom.p_pu_dbm + geom.k_db() - model.n0_dbm) / (10.0 * geom.omega));
    if d <= d_th {
        return None;
    }
    let p_limited = model.n0_dbm - geom.k_db() + 10.0 * geom.omega * (d / geom.d0_m).log10();
    Some(p_limited.min(geom.p_full_dbm))
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Shannon rate in bps/Hz. `p_tx_dbm = None` is the zero grant: no
/// transmission, zero rate.
pub fn rate(p_tx_dbm: Option<f64>, h: f64, noise_dbm: f64) -> f64 {
    match p_tx_dbm {
        None => 0.0,
        Some(dbm) => {
            let snr = dbm_to_mw(dbm) * h * h / dbm_to_mw(noise_dbm);
            (1.0 + snr).log2()
        }
    }
}

/// Immediate reward r = ξ·R − a for transmission cases, −a otherwise. The
/// realized rate is zero for every non-delivering case, so the single formula
/// covers the whole case list.
pub fn reward(state: &EnvState, case_id: u8, rate: f64, xi: f64) -> f64 {
    let a = f64::from(state.aoi);
    match case_id {
        2 | 3 | 6 => xi * rate - a,
        _ => -a,
    }
}

/// Actions affordable under energy causality. `NoSense` is always included,
/// so the set is never empty.
pub fn valid_actions(state: &EnvState, h: f64, costs: &EnergyCosts, capacity: f64) -> Vec<Action> {
    let battery = Battery::new(state.battery, capacity);
    Action::ALL
        .into_iter()
        .filter(|&a| a == Action::NoSense || check_causality(&battery, a, h, costs))
        .collect()
}
