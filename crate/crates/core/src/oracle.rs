//! Exact finite-MDP oracle. A coarse, fully observed discretization of the
//! environment — state (AoI, battery bin, PU activity) — whose transition
//! tensor is built by enumerating every binned harvest/channel draw and
//! sensing branch. Solved by value iteration and tabular Q-learning; the deep
//! agents are checked against it.

use ndarray::{Array2, Array3};
use rand::Rng;

use crate::config::EnvConfig;
use crate::env::{
    self, action_cost, allocate_power, rate, received_power, Action, Geometry, HarvestMode,
    Observation, SensingModel,
};
use crate::error::{Result, SimError};

/// Bin counts per axis.
#[derive(Debug, Clone, Copy)]
pub struct BinSpec {
    /// AoI values 1..=n_aoi (saturating).
    pub n_aoi: u32,
    /// Battery bins, evenly spaced over [0, b_max].
    pub n_battery: usize,
    /// Harvest bins: pmf mass at 0..n_harvest-2 plus a tail bin.
    pub n_harvest: usize,
    /// Channel bins at Rayleigh quantile midpoints, equal mass.
    pub n_channel: usize,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { n_aoi: 5, n_battery: 4, n_harvest: 8, n_channel: 8 }
    }
}

/// Finite MDP over (aoi, battery bin, pu) with the five decision tuples.
#[derive(Debug, Clone)]
pub struct DiscreteMdp {
    pub n_aoi: u32,
    pub battery_levels: Vec<f64>,
    /// `[S, A, S]` transition probabilities.
    pub transition: Array3<f64>,
    /// `[S, A]` expected immediate reward.
    pub reward: Array2<f64>,
    pub discount: f64,
}

impl DiscreteMdp {
    pub fn n_states(&self) -> usize {
        self.n_aoi as usize * self.battery_levels.len() * 2
    }

    pub fn n_actions(&self) -> usize {
        Action::ALL.len()
    }

    /// Encode (aoi in 1..=n_aoi, battery bin, pu active).
    pub fn state_index(&self, aoi: u32, bin: usize, pu_active: bool) -> usize {
        debug_assert!((1..=self.n_aoi).contains(&aoi));
        debug_assert!(bin < self.battery_levels.len());
        ((aoi as usize - 1) * self.battery_levels.len() + bin) * 2 + usize::from(pu_active)
    }

    pub fn decode(&self, s: usize) -> (u32, usize, bool) {
        let pu = s % 2 == 1;
        let rest = s / 2;
        let bin = rest % self.battery_levels.len();
        let aoi = (rest / self.battery_levels.len()) as u32 + 1;
        (aoi, bin, pu)
    }

    /// Check that every transition row is a probability distribution.
    pub fn validate_stochastic(&self, tol: f64) -> Result<()> {
        for s in 0..self.n_states() {
            for a in 0..self.n_actions() {
                let sum: f64 = self.transition.slice(ndarray::s![s, a, ..]).sum();
                if (sum - 1.0).abs() > tol {
                    return Err(SimError::NonStochasticRow { state: s, action: a, sum });
                }
            }
        }
        Ok(())
    }
}

/// Nearest bin with ties toward the lower bin (conservative energy
/// accounting).
fn nearest_bin(levels: &[f64], value: f64) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, &lv) in levels.iter().enumerate() {
        let d = (value - lv).abs();
        if d < best_d - 1e-12 {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Harvest pmf over the bin values 0, 1, ..., n-1 where the last bin absorbs
/// the upper tail.
fn harvest_pmf(cfg: &EnvConfig, n: usize) -> Vec<f64> {
    let mean = cfg.energy.mean;
    let mut pmf = vec![0.0; n];
    match cfg.energy.mode {
        HarvestMode::Poisson => {
            let mut p = (-mean).exp(); // P(0)
            let mut acc = 0.0;
            for (k, slot) in pmf.iter_mut().enumerate().take(n - 1) {
                *slot = p;
                acc += p;
                p *= mean / (k as f64 + 1.0);
            }
            pmf[n - 1] = (1.0 - acc).max(0.0);
        }
        HarvestMode::Normal => {
            let std = cfg.energy.std;
            let cdf = |x: f64| 0.5 * (1.0 + erf((x - mean) / (std * std::f64::consts::SQRT_2)));
            let mut acc = 0.0;
            for (k, slot) in pmf.iter_mut().enumerate().take(n - 1) {
                let lo = if k == 0 { f64::NEG_INFINITY } else { k as f64 - 0.5 };
                let hi = k as f64 + 0.5;
                let lo_c = if lo.is_finite() { cdf(lo) } else { 0.0 };
                *slot = (cdf(hi) - lo_c).max(0.0);
                acc += *slot;
            }
            pmf[n - 1] = (1.0 - acc).max(0.0);
        }
    }
    pmf
}

/// Error function via Abramowitz–Stegun 7.1.26; |err| < 1.5e-7, plenty for
/// binning tail mass.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}

/// Channel gains at Rayleigh quantile midpoints, each carrying mass 1/n.
fn channel_bins(scale: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let u = (j as f64 + 0.5) / n as f64;
            scale * (-2.0 * (1.0 - u).ln()).sqrt()
        })
        .collect()
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Degrade an intended action to what the battery can pay for under the
/// drawn channel: drop the update first, then the location report, then
/// sensing. Mirrors the narrative that an SU short on energy stays silent.
fn degrade_for_budget(action: Action, level: f64, h: f64, cfg: &EnvConfig) -> Action {
    let costs = cfg.energy_costs();
    let cap = cfg.energy.b_max;
    let mut a = action;
    loop {
        if action_cost(a, h, &costs, cap) <= level {
            return a;
        }
        a = match a {
            Action::Underlay => Action::UnderlayDenied,
            Action::UnderlayDenied | Action::Overlay => Action::Silent,
            Action::Silent => Action::NoSense,
            Action::NoSense => return Action::NoSense,
        };
    }
}

/// Build the exact MDP for a fixed-geometry config. The PU state is observed
/// directly (an upper-bound reference for the partially observed agents);
/// collision probability is folded into the ack distribution of full-power
/// transmissions.
pub fn build_mdp(cfg: &EnvConfig, bins: &BinSpec, discount: f64) -> Result<DiscreteMdp> {
    cfg.validate()?;
    if bins.n_aoi < 2 || bins.n_battery < 2 || bins.n_harvest < 2 || bins.n_channel < 2 {
        return Err(SimError::InvalidConfig("need at least 2 bins per axis".into()));
    }
    if !(0.0..1.0).contains(&discount) {
        return Err(SimError::InvalidConfig("discount must be in [0, 1)".into()));
    }
    if cfg.costs.alpha > cfg.energy.b_max {
        return Err(SimError::DiscretizationTooCoarse(format!(
            "sensing cost {} exceeds the top battery bin {}",
            cfg.costs.alpha, cfg.energy.b_max
        )));
    }

    let geom: Geometry = cfg.fixed_geometry();
    let sensing: SensingModel = cfg.sensing_model();
    let chain = cfg.pu_chain();
    let costs = cfg.energy_costs();
    let cap = cfg.energy.b_max;
    let xi = cfg.reward.xi;

    let battery_levels: Vec<f64> = (0..bins.n_battery)
        .map(|i| i as f64 * cap / (bins.n_battery - 1) as f64)
        .collect();
    let e_pmf = harvest_pmf(cfg, bins.n_harvest);
    let h_bins = channel_bins(cfg.geometry.rayleigh_scale, bins.n_channel);
    let h_mass = 1.0 / bins.n_channel as f64;

    // Mean received power when the PU transmits, and the probability that the
    // per-slot shadowed power exceeds the underlay threshold.
    let p_r_mean = received_power(&geom, true, 0.0)?;
    let shadow_std = cfg.geometry.shadow_var_db2.sqrt();
    let p_above = if shadow_std > 0.0 {
        phi((p_r_mean - sensing.n_th_dbm) / shadow_std)
    } else if p_r_mean > sensing.n_th_dbm {
        1.0
    } else {
        0.0
    };
    let grant = allocate_power(&geom, &sensing);

    let n_aoi = bins.n_aoi;
    let mut mdp = DiscreteMdp {
        n_aoi,
        battery_levels: battery_levels.clone(),
        transition: Array3::zeros((
            n_aoi as usize * bins.n_battery * 2,
            Action::ALL.len(),
            n_aoi as usize * bins.n_battery * 2,
        )),
        reward: Array2::zeros((n_aoi as usize * bins.n_battery * 2, Action::ALL.len())),
        discount,
    };

    for s in 0..mdp.n_states() {
        let (aoi, bin, pu) = mdp.decode(s);
        let level = battery_levels[bin];
        for (ai, &intent) in Action::ALL.iter().enumerate() {
            for &h in &h_bins {
                let chosen = degrade_for_budget(intent, level, h, cfg);
                // Sensing branch distribution given the true PU state.
                // (observation, probability, collides-when-transmitting)
                let mut branches: Vec<(Observation, f64, bool)> = Vec::with_capacity(3);
                if chosen.senses() {
                    if pu {
                        branches.push((Observation::Idle, (1.0 - sensing.p_d) * p_above, true));
                        branches.push((
                            Observation::Idle,
                            (1.0 - sensing.p_d) * (1.0 - p_above),
                            false,
                        ));
                        branches.push((Observation::ActiveAbove, sensing.p_d * p_above, false));
                        branches.push((
                            Observation::ActiveBelow,
                            sensing.p_d * (1.0 - p_above),
                            false,
                        ));
                    } else {
                        branches.push((Observation::Idle, 1.0 - sensing.p_f, false));
                        branches.push((Observation::ActiveBelow, sensing.p_f, false));
                    }
                } else {
                    branches.push((Observation::NotSensed, 1.0, false));
                }

                for (obs, p_branch, collides) in branches {
                    if p_branch == 0.0 {
                        continue;
                    }
                    let b = env::resolve_branch(chosen, obs, grant.is_some(), collides);
                    let slot_rate = match b.tx {
                        env::TxDecision::None => 0.0,
                        env::TxDecision::FullPower if b.case_id == 3 => 0.0,
                        env::TxDecision::FullPower => {
                            rate(Some(geom.p_full_dbm), h, sensing.n0_dbm)
                        }
                        env::TxDecision::Granted => rate(grant, h, sensing.n0_dbm),
                    };
                    let ack = matches!(b.case_id, 2 | 6);
                    let r = if matches!(b.case_id, 2 | 3 | 6) {
                        xi * slot_rate - f64::from(aoi)
                    } else {
                        -f64::from(aoi)
                    };
                    let aoi_next = if ack { 1 } else { (aoi + 1).min(n_aoi) };
                    let spend = action_cost(b.effective, h, &costs, cap);

                    let w = h_mass * p_branch;
                    mdp.reward[(s, ai)] += w * r;
                    for (e_bin, &pe) in e_pmf.iter().enumerate() {
                        if pe == 0.0 {
                            continue;
                        }
                        let b_next =
                            ((level - spend).max(0.0) + e_bin as f64).min(cap);
                        let nb = nearest_bin(&battery_levels, b_next);
                        let base = w * pe;
                        let (p_active, p_idle) = if pu {
                            (chain.p_aa(), chain.p_ai)
                        } else {
                            (chain.p_ia, chain.p_ii())
                        };
                        if p_active > 0.0 {
                            let sn = mdp.state_index(aoi_next, nb, true);
                            mdp.transition[(s, ai, sn)] += base * p_active;
                        }
                        if p_idle > 0.0 {
                            let sn = mdp.state_index(aoi_next, nb, false);
                            mdp.transition[(s, ai, sn)] += base * p_idle;
                        }
                    }
                }
            }
        }
    }

    mdp.validate_stochastic(1e-9)?;
    Ok(mdp)
}

/// Value function, Q table and greedy policy.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub v: Vec<f64>,
    pub q: Array2<f64>,
    pub policy: Vec<usize>,
}

/// One Bellman optimality backup: returns (new v, q).
pub fn bellman_backup(mdp: &DiscreteMdp, v: &[f64]) -> (Vec<f64>, Array2<f64>) {
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    let mut q = Array2::zeros((ns, na));
    let mut v_new = vec![f64::NEG_INFINITY; ns];
    for s in 0..ns {
        for a in 0..na {
            let mut acc = mdp.reward[(s, a)];
            let row = mdp.transition.slice(ndarray::s![s, a, ..]);
            let mut exp_v = 0.0;
            for (sn, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    exp_v += p * v[sn];
                }
            }
            acc += mdp.discount * exp_v;
            q[(s, a)] = acc;
            if acc > v_new[s] {
                v_new[s] = acc;
            }
        }
    }
    (v_new, q)
}

/// Value iteration to a sup-norm Bellman residual below `tol`; greedy policy
/// with ties broken toward the lowest action index.
pub fn value_iteration(mdp: &DiscreteMdp, tol: f64) -> Result<ValueTable> {
    if !(tol > 0.0) {
        return Err(SimError::InvalidConfig("tolerance must be positive".into()));
    }
    mdp.validate_stochastic(1e-9)?;
    let ns = mdp.n_states();
    let mut v = vec![0.0; ns];
    let mut q = Array2::zeros((ns, mdp.n_actions()));
    for _ in 0..1_000_000 {
        let (v_new, q_new) = bellman_backup(mdp, &v);
        let residual = v
            .iter()
            .zip(&v_new)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = v_new;
        q = q_new;
        if residual < tol {
            break;
        }
    }
    let policy = greedy_policy(&q);
    Ok(ValueTable { v, q, policy })
}

/// Row-wise argmax with lowest-index tie-breaking.
pub fn greedy_policy(q: &Array2<f64>) -> Vec<usize> {
    q.outer_iter()
        .map(|row| {
            let mut best = 0usize;
            let mut best_v = row[0];
            for (i, &val) in row.iter().enumerate().skip(1) {
                if val > best_v {
                    best = i;
                    best_v = val;
                }
            }
            best
        })
        .collect()
}

/// Learning-rate schedule for tabular Q-learning.
#[derive(Debug, Clone, Copy)]
pub enum LearningRate {
    Constant(f64),
    /// 1 / (1 + visit count) per state-action pair.
    VisitAverage,
}

#[derive(Debug, Clone, Copy)]
pub struct QlConfig {
    pub steps: u64,
    pub episode_len: usize,
    pub lr: LearningRate,
    pub gamma: f64,
    /// Behavior policy: explore uniformly with this probability.
    pub epsilon: f64,
}

/// Sample-based tabular Q-learning on the MDP. Episodes restart from uniform
/// random states (exploring starts); transitions are drawn from the model.
pub fn tabular_q<R: Rng + ?Sized>(mdp: &DiscreteMdp, cfg: &QlConfig, rng: &mut R) -> ValueTable {
    if let LearningRate::Constant(b) = cfg.lr {
        assert!(b > 0.0 && b <= 1.0, "beta must be in (0, 1]");
    }
    let ns = mdp.n_states();
    let na = mdp.n_actions();
    // Cumulative transition rows for O(log S) sampling.
    let mut cum = vec![0.0f64; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let mut acc = 0.0;
            for sn in 0..ns {
                acc += mdp.transition[(s, a, sn)];
                cum[(s * na + a) * ns + sn] = acc;
            }
        }
    }
    let sample_next = |s: usize, a: usize, u: f64| -> usize {
        let row = &cum[(s * na + a) * ns..(s * na + a + 1) * ns];
        row.partition_point(|&c| c < u).min(ns - 1)
    };

    let mut q = Array2::<f64>::zeros((ns, na));
    let mut visits = vec![0u64; ns * na];
    let mut s = rng.random_range(0..ns);
    let mut t_in_ep = 0usize;
    for _ in 0..cfg.steps {
        if t_in_ep >= cfg.episode_len {
            s = rng.random_range(0..ns);
            t_in_ep = 0;
        }
        let a = if rng.random::<f64>() < cfg.epsilon {
            rng.random_range(0..na)
        } else {
            let row = q.row(s);
            let mut best = 0;
            for i in 1..na {
                if row[i] > row[best] {
                    best = i;
                }
            }
            best
        };
        let sn = sample_next(s, a, rng.random());
        let target = mdp.reward[(s, a)]
            + cfg.gamma * q.row(sn).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        visits[s * na + a] += 1;
        let beta = match cfg.lr {
            LearningRate::Constant(b) => b,
            LearningRate::VisitAverage => 1.0 / visits[s * na + a] as f64,
        };
        q[(s, a)] += beta * (target - q[(s, a)]);
        s = sn;
        t_in_ep += 1;
    }

    let policy = greedy_policy(&q);
    let v = q
        .outer_iter()
        .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    ValueTable { v, q, policy }
}

/// Config for the standard small verification MDP: fixed geometry (no
/// annulus), no shadowing, modest rate weight.
pub fn toy_config() -> EnvConfig {
    let mut cfg = EnvConfig::default();
    cfg.geometry.annulus_m = None;
    cfg.geometry.su_pos = [50.0, 0.0];
    cfg.geometry.shadow_var_db2 = 0.0;
    cfg.reward.xi = 0.05;
    cfg.reward.a_max = 5;
    cfg
}
