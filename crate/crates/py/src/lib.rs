//! Python bindings: the simulator environment, the DQN/D3QN learners, the
//! exact oracle and the gradient checker, exposed as `aoisim_py`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aoisim::agents::{
    normalize_state, run_episode, select_action, Controller, LearnerKind, QLearner,
};
use aoisim::config::ExperimentConfig;
use aoisim::env::{Action, Env};
use aoisim::harness::{self, Scheme};
use aoisim::nn::{gradient_check, DenseNet};
use aoisim::oracle::{build_mdp, value_iteration, BinSpec};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_config(config_json: Option<&str>) -> PyResult<ExperimentConfig> {
    match config_json {
        None => Ok(ExperimentConfig::default()),
        Some(s) => ExperimentConfig::from_json(s).map_err(err),
    }
}

fn parse_action(name: &str) -> PyResult<Action> {
    Action::ALL
        .into_iter()
        .find(|a| a.to_string() == name)
        .ok_or_else(|| {
            PyValueError::new_err(format!(
                "unknown action `{name}`; expected one of {:?}",
                Action::ALL.map(|a| a.to_string())
            ))
        })
}

/// The slot-level simulator with an owned seeded RNG.
#[pyclass]
struct Environment {
    env: Env,
    rng: ChaCha8Rng,
}

#[pymethods]
impl Environment {
    #[new]
    #[pyo3(signature = (config_json=None, seed=0))]
    fn new(config_json: Option<&str>, seed: u64) -> PyResult<Self> {
        let cfg = parse_config(config_json)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = Env::new(cfg.env, &mut rng).map_err(err)?;
        Ok(Self { env, rng })
    }

    /// Start a fresh episode; returns (aoi, battery, harvested, p_r_dbm).
    fn reset(&mut self) -> (u32, f64, f64, f64) {
        let s = self.env.reset(&mut self.rng);
        (s.aoi, s.battery, s.harvested, s.p_r_dbm)
    }

    /// Current observable state.
    fn state(&self) -> (u32, f64, f64, f64) {
        let s = self.env.state();
        (s.aoi, s.battery, s.harvested, s.p_r_dbm)
    }

    /// State normalized the way the agents see it.
    fn normalized_state(&self) -> Vec<f64> {
        normalize_state(&self.env.state(), self.env.config())
    }

    /// Names of the actions affordable this slot.
    fn valid_actions(&self) -> Vec<String> {
        self.env.valid_actions().iter().map(|a| a.to_string()).collect()
    }

    /// Current slot's channel gain |h|.
    fn channel_gain(&self) -> f64 {
        self.env.channel_gain()
    }

    /// PU–SU distance of the current episode (m).
    fn distance(&self) -> f64 {
        self.env.geometry().distance()
    }

    /// Execute one slot; returns a dict with the outcome.
    fn step<'py>(&mut self, py: Python<'py>, action: &str) -> PyResult<Bound<'py, PyDict>> {
        let action = parse_action(action)?;
        let out = self.env.step(action, &mut self.rng).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("aoi", out.next_state.aoi)?;
        d.set_item("battery", out.next_state.battery)?;
        d.set_item("harvested", out.next_state.harvested)?;
        d.set_item("p_r_dbm", out.next_state.p_r_dbm)?;
        d.set_item("reward", out.reward)?;
        d.set_item("case", out.case_id)?;
        d.set_item("rate", out.rate)?;
        d.set_item("ack", out.ack)?;
        d.set_item("collided", out.collided)?;
        d.set_item("effective_action", out.effective_action.to_string())?;
        Ok(d)
    }
}

/// A DQN or D3QN learner bound to a config.
#[pyclass]
struct Agent {
    learner: QLearner,
    cfg: ExperimentConfig,
    scheme: Scheme,
    seed: u64,
}

#[pymethods]
impl Agent {
    #[new]
    #[pyo3(signature = (scheme="dqn", config_json=None, seed=0))]
    fn new(scheme: &str, config_json: Option<&str>, seed: u64) -> PyResult<Self> {
        let cfg = parse_config(config_json)?;
        let scheme: Scheme = scheme.parse().map_err(err)?;
        let kind: LearnerKind = scheme
            .learner_kind()
            .ok_or_else(|| PyValueError::new_err("the baseline is not trainable"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let learner = QLearner::new(kind, 4, 5, &cfg.agent, seed, &mut rng);
        Ok(Self { learner, cfg, scheme, seed })
    }

    /// Train for `episodes` episodes (config default when omitted); returns
    /// the per-episode total rewards.
    #[pyo3(signature = (episodes=None))]
    fn train(&mut self, episodes: Option<usize>) -> PyResult<Vec<f64>> {
        let n = episodes.unwrap_or(self.cfg.agent.episodes);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(0x7261_696e));
        let mut env = Env::new(self.cfg.env.clone(), &mut rng).map_err(err)?;
        let mut curve = Vec::with_capacity(n);
        for _ in 0..n {
            let rec = run_episode(
                &mut env,
                &mut Controller::Learner(&mut self.learner),
                true,
                self.cfg.agent.horizon,
                &mut rng,
            )
            .map_err(err)?;
            curve.push(rec.total_reward);
        }
        Ok(curve)
    }

    /// Greedy evaluation over `episodes`; returns mean AoI, rate, access
    /// fraction and reward.
    #[pyo3(signature = (episodes=20))]
    fn evaluate<'py>(&mut self, py: Python<'py>, episodes: usize) -> PyResult<Bound<'py, PyDict>> {
        let mut cfg = self.cfg.clone();
        cfg.experiment.eval_episodes = episodes;
        let value = match cfg.experiment.sweep_axis {
            aoisim::config::SweepAxis::BMax => cfg.env.energy.b_max,
            aoisim::config::SweepAxis::PPu => cfg.env.geometry.p_pu_dbm,
        };
        let records =
            harness::evaluate(&cfg, Some(&mut self.learner), value, self.seed).map_err(err)?;
        let n = records.len() as f64;
        let d = PyDict::new(py);
        d.set_item(
            "avg_aoi",
            records.iter().map(|r| r.mean_aoi()).sum::<f64>() / n,
        )?;
        d.set_item(
            "avg_rate",
            records.iter().map(|r| r.mean_rate()).sum::<f64>() / n,
        )?;
        d.set_item("access_fraction", harness::access_fraction(&records))?;
        d.set_item(
            "avg_reward",
            records.iter().map(|r| r.total_reward).sum::<f64>() / n,
        )?;
        Ok(d)
    }

    /// Greedy action for a normalized 4-vector state, restricted to the named
    /// valid actions.
    #[pyo3(signature = (state, valid=None))]
    fn act(&self, state: Vec<f64>, valid: Option<Vec<String>>) -> PyResult<String> {
        let mask: Vec<Action> = match valid {
            None => Action::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| parse_action(n))
                .collect::<PyResult<_>>()?,
        };
        if mask.is_empty() {
            return Err(PyValueError::new_err("empty action mask"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = select_action(&self.learner.online, &state, &mask, 0.0, &mut rng).map_err(err)?;
        Ok(a.to_string())
    }

    fn scheme(&self) -> String {
        self.scheme.to_string()
    }

    /// Save the online network to a checkpoint file.
    fn save(&self, path: &str) -> PyResult<()> {
        self.learner.online.save(std::path::Path::new(path)).map_err(err)
    }

    /// Load a checkpoint into both the online and target networks.
    fn load(&mut self, path: &str) -> PyResult<()> {
        let net = DenseNet::load(std::path::Path::new(path)).map_err(err)?;
        self.learner = QLearner::from_net(
            self.learner.kind,
            net,
            &self.cfg.agent,
        );
        Ok(())
    }
}

/// Build the discretized fully observed MDP and solve it by value iteration.
/// Returns {"states": [(aoi, battery_bin, pu), ...], "v": [...], "policy":
/// [action names]}.
#[pyfunction]
#[pyo3(signature = (config_json=None, n_aoi=5, n_battery=4, n_harvest=8, n_channel=8, gamma=0.95))]
fn solve_oracle<'py>(
    py: Python<'py>,
    config_json: Option<&str>,
    n_aoi: u32,
    n_battery: usize,
    n_harvest: usize,
    n_channel: usize,
    gamma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(config_json)?;
    let mut env_cfg = cfg.env;
    env_cfg.geometry.annulus_m = None;
    env_cfg.reward.a_max = n_aoi;
    let bins = BinSpec { n_aoi, n_battery, n_harvest, n_channel };
    let mdp = build_mdp(&env_cfg, &bins, gamma).map_err(err)?;
    let vt = value_iteration(&mdp, 1e-9).map_err(err)?;
    let states: Vec<(u32, usize, bool)> = (0..mdp.n_states()).map(|s| mdp.decode(s)).collect();
    let policy: Vec<String> = vt
        .policy
        .iter()
        .map(|&a| Action::ALL[a].to_string())
        .collect();
    let d = PyDict::new(py);
    d.set_item("states", states)?;
    d.set_item("v", vt.v)?;
    d.set_item("policy", policy)?;
    Ok(d)
}

/// Worst relative error of backprop vs central finite differences over
/// `nets` random 4-64-64-5 networks.
#[pyfunction]
#[pyo3(signature = (nets=5, seed=0))]
fn gradient_check_worst(nets: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..nets {
        let mut net = DenseNet::plain(&[4, 64, 64, 5], seed, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst = worst.max(gradient_check(&mut net, &x, &g, 1e-5));
    }
    worst
}

/// Run one full train+eval cycle for a scheme; returns the aggregate metrics.
#[pyfunction]
#[pyo3(signature = (scheme, config_json=None, seed=1))]
fn run_scheme<'py>(
    py: Python<'py>,
    scheme: &str,
    config_json: Option<&str>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(config_json)?;
    let scheme: Scheme = scheme.parse().map_err(err)?;
    let value = match cfg.experiment.sweep_axis {
        aoisim::config::SweepAxis::BMax => cfg.env.energy.b_max,
        aoisim::config::SweepAxis::PPu => cfg.env.geometry.p_pu_dbm,
    };
    let run = harness::run_single(&cfg, scheme, value, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("scheme", run.scheme.to_string())?;
    d.set_item("seed", run.seed)?;
    d.set_item("avg_aoi", run.eval_aoi)?;
    d.set_item("avg_rate", run.eval_rate)?;
    d.set_item("access_fraction", run.eval_access)?;
    d.set_item("avg_reward", run.eval_reward)?;
    d.set_item("reward_curve", run.reward_curve)?;
    Ok(d)
}

/// The default experiment configuration as JSON.
#[pyfunction]
fn default_config() -> PyResult<String> {
    serde_json::to_string_pretty(&ExperimentConfig::default()).map_err(err)
}

#[pymodule]
fn aoisim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Environment>()?;
    m.add_class::<Agent>()?;
    m.add_function(wrap_pyfunction!(solve_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_check_worst, m)?)?;
    m.add_function(wrap_pyfunction!(run_scheme, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
