//! Command-line experiment harness.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aoisim::agents::QLearner;
use aoisim::config::{ExperimentConfig, SweepAxis};
use aoisim::env::HarvestMode;
use aoisim::harness::{
    self, compare_table, emit_plot_data, run_sweep, Scheme, SweepOutput,
};
use aoisim::nn::{gradient_check, DenseNet};
use aoisim::oracle::{build_mdp, tabular_q, value_iteration, BinSpec, LearningRate, QlConfig};

#[derive(Parser)]
#[command(
    name = "aoisim",
    about = "Spectrum-sharing AoI simulator: baseline / DQN / D3QN experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replace the seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override any config key, e.g. --set env.geometry.p_pu_dbm=15 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Training episodes (overrides agent.episodes).
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// Slots per episode (overrides agent.horizon).
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Replay size required before training starts (overrides agent.warmup).
    #[arg(long, global = true)]
    warmup: Option<usize>,
    /// Greedy evaluation episodes per seed.
    #[arg(long, global = true)]
    eval_episodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one scheme on one seed and save a weight checkpoint.
    Train {
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        common: Common,
    },
    /// Greedy evaluation (loads a checkpoint for learners).
    Eval {
        #[arg(long)]
        scheme: String,
        /// Weight checkpoint (required for dqn/d3qn).
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Train/evaluate every scheme across a sweep axis and write CSVs.
    Sweep {
        /// Sweep axis: b_max or p_pu (defaults to the config's axis).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Build the discretized MDP, solve it exactly and with tabular
    /// Q-learning, and dump values/policy.
    Oracle {
        #[arg(long, default_value_t = 5)]
        aoi: u32,
        #[arg(long, default_value_t = 4)]
        battery_bins: usize,
        #[arg(long, default_value_t = 8)]
        harvest_bins: usize,
        #[arg(long, default_value_t = 8)]
        channel_bins: usize,
        #[arg(long, default_value_t = 0.95)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-9)]
        vi_tol: f64,
        #[arg(long, default_value_t = 2_000_000)]
        ql_steps: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Check backprop against central finite differences on random nets.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        nets: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the data files behind one of the result figures (3..=8).
    Reproduce {
        #[arg(long)]
        figure: u8,
        #[command(flatten)]
        common: Common,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn load_config(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut value: serde_json::Value = match &common.config {
        Some(path) => serde_json::from_str(
            &std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
        )?,
        None => serde_json::to_value(ExperimentConfig::default())?,
    };
    for ov in &common.overrides {
        let (key, raw) = ov
            .split_once('=')
            .with_context(|| format!("override `{ov}` is not KEY=VALUE"))?;
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let mut node = &mut value;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if i + 1 == parts.len() {
                node[part] = parsed.clone();
            } else {
                if node.get(*part).is_none() {
                    node[part] = serde_json::json!({});
                }
                node = node.get_mut(*part).unwrap();
            }
        }
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(value)?;
    if let Some(seed) = common.seed {
        cfg.experiment.seeds = vec![seed];
    }
    if let Some(e) = common.episodes {
        cfg.agent.episodes = e;
    }
    if let Some(h) = common.horizon {
        cfg.agent.horizon = h;
    }
    if let Some(w) = common.warmup {
        cfg.agent.warmup = w;
    }
    if let Some(ee) = common.eval_episodes {
        cfg.experiment.eval_episodes = ee;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The config's current value on the sweep axis (used when a figure needs a
/// single operating point).
fn default_axis_value(cfg: &ExperimentConfig) -> f64 {
    match cfg.experiment.sweep_axis {
        SweepAxis::BMax => cfg.env.energy.b_max,
        SweepAxis::PPu => cfg.env.geometry.p_pu_dbm,
    }
}

fn print_rows(out: &SweepOutput) {
    println!(
        "{:<10} {:>8} {:>10} {:>10} {:>10} {:>12}",
        "scheme", "value", "avg_aoi", "rate", "access", "reward"
    );
    for r in &out.rows {
        println!(
            "{:<10} {:>8.1} {:>10.3} {:>10.3} {:>10.3} {:>12.1}",
            r.scheme.to_string(),
            r.sweep_value,
            r.mean_aoi,
            r.mean_rate,
            r.mean_access,
            r.mean_reward
        );
    }
}

fn write_standard_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &SweepOutput,
) -> anyhow::Result<()> {
    harness::write_metrics_csv(dir, &out.rows)?;
    harness::write_access_csv(dir, &out.runs)?;
    harness::write_reward_curves_csv(dir, &out.runs, cfg.experiment.smooth_window)?;
    harness::write_manifest(dir, cfg)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { scheme, common } => {
            let cfg = load_config(&common)?;
            let scheme: Scheme = scheme.parse()?;
            if scheme.learner_kind().is_none() {
                bail!("the baseline has no trainable parameters");
            }
            std::fs::create_dir_all(&common.out)?;
            let value = default_axis_value(&cfg);
            for &seed in &cfg.experiment.seeds {
                let (learner, curve) = harness::train_learner(&cfg, scheme, value, seed)?
                    .expect("learner scheme");
                let path = common.out.join(format!("{scheme}_seed{seed}.qnet"));
                learner.online.save(&path)?;
                let tail = curve.iter().rev().take(20).sum::<f64>()
                    / curve.len().min(20).max(1) as f64;
                println!(
                    "trained {scheme} seed {seed}: final-20 reward {tail:.1}, weights -> {}",
                    path.display()
                );
            }
            let runs: Vec<harness::RunResult> = cfg
                .experiment
                .seeds
                .iter()
                .map(|&seed| harness::run_single(&cfg, scheme, value, seed))
                .collect::<aoisim::Result<_>>()?;
            harness::write_reward_curves_csv(&common.out, &runs, cfg.experiment.smooth_window)?;
            harness::write_manifest(&common.out, &cfg)?;
            Ok(())
        }
        Command::Eval { scheme, weights, common } => {
            let cfg = load_config(&common)?;
            let scheme: Scheme = scheme.parse()?;
            let value = default_axis_value(&cfg);
            let mut all = Vec::new();
            for &seed in &cfg.experiment.seeds {
                let mut learner = match scheme.learner_kind() {
                    None => None,
                    Some(kind) => {
                        let path = weights
                            .as_ref()
                            .context("--weights is required for learner schemes")?;
                        let net = DenseNet::load(path)?;
                        Some(QLearner::from_net(kind, net, &cfg.agent))
                    }
                };
                let records = harness::evaluate(&cfg, learner.as_mut(), value, seed)?;
                let aoi = records.iter().map(|r| r.mean_aoi()).sum::<f64>() / records.len() as f64;
                let rate =
                    records.iter().map(|r| r.mean_rate()).sum::<f64>() / records.len() as f64;
                let access = harness::access_fraction(&records);
                println!(
                    "{scheme} seed {seed}: avg_aoi {aoi:.3}  avg_rate {rate:.3}  access {access:.3}"
                );
                all.push((seed, aoi, rate, access));
            }
            Ok(())
        }
        Command::Sweep { axis, values, common } => {
            let mut cfg = load_config(&common)?;
            if let Some(axis) = axis {
                cfg.experiment.sweep_axis = axis.parse()?;
            }
            if let Some(values) = values {
                cfg.experiment.sweep_values = values;
            }
            cfg.validate()?;
            let out = run_sweep(&cfg)?;
            print_rows(&out);
            write_standard_outputs(&common.out, &cfg, &out)?;
            let table = compare_table(&out.rows)?;
            harness::write_compare_csv(&common.out, &table)?;
            println!("wrote CSVs to {}", common.out.display());
            Ok(())
        }
        Command::Oracle {
            aoi,
            battery_bins,
            harvest_bins,
            channel_bins,
            gamma,
            vi_tol,
            ql_steps,
            common,
        } => {
            let cfg = load_config(&common)?;
            let mut env_cfg = cfg.env.clone();
            // The oracle needs a fixed geometry; the configured SU position
            // is used directly.
            env_cfg.geometry.annulus_m = None;
            env_cfg.reward.a_max = aoi;
            let bins = BinSpec {
                n_aoi: aoi,
                n_battery: battery_bins,
                n_harvest: harvest_bins,
                n_channel: channel_bins,
            };
            let mdp = build_mdp(&env_cfg, &bins, gamma)?;
            let vi = value_iteration(&mdp, vi_tol)?;
            let seed = cfg.experiment.seeds.first().copied().unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ql = tabular_q(
                &mdp,
                &QlConfig {
                    steps: ql_steps,
                    episode_len: 64,
                    lr: LearningRate::VisitAverage,
                    gamma,
                    epsilon: 1.0,
                },
                &mut rng,
            );
            let sup = vi
                .q
                .iter()
                .zip(ql.q.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let mut optimal = 0usize;
            for s in 0..mdp.n_states() {
                let best = vi.q.row(s).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if vi.q[(s, ql.policy[s])] >= best - 1e-9 {
                    optimal += 1;
                }
            }
            println!(
                "states {}  sup|Q_ql - Q_vi| = {:.4}  tabular-greedy optimal on {}/{} states",
                mdp.n_states(),
                sup,
                optimal,
                mdp.n_states()
            );
            std::fs::create_dir_all(&common.out)?;
            let path = common.out.join("oracle_values.csv");
            let mut body = String::from("aoi,battery_bin,pu_active,v,policy\n");
            for s in 0..mdp.n_states() {
                let (a, b, pu) = mdp.decode(s);
                body.push_str(&format!(
                    "{a},{b},{},{:.6},{}\n",
                    u8::from(pu),
                    vi.v[s],
                    aoisim::env::Action::ALL[vi.policy[s]]
                ));
            }
            std::fs::write(&path, body)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Gradcheck { nets, common } => {
            let cfg = load_config(&common)?;
            let seed = cfg.experiment.seeds.first().copied().unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for i in 0..nets {
                let mut net = DenseNet::plain(&[4, 64, 64, 5], seed, &mut rng);
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let g: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
                let err = gradient_check(&mut net, &x, &g, 1e-5);
                println!("net {i:>2}: max rel err {err:.3e}");
                worst = worst.max(err);
            }
            println!("worst over {nets} nets: {worst:.3e}");
            if worst >= 1e-6 {
                bail!("gradient check failed: {worst:.3e} >= 1e-6");
            }
            Ok(())
        }
        Command::Reproduce { figure, common } => {
            let cfg = load_config(&common)?;
            reproduce(figure, cfg, &common.out)
        }
    }
}

fn reproduce(figure: u8, mut cfg: ExperimentConfig, out_dir: &Path) -> anyhow::Result<()> {
    match figure {
        3 => {
            // Training reward curves per scheme and harvest distribution at
            // the default operating point.
            cfg.experiment.sweep_values = vec![default_axis_value(&cfg)];
            for mode in [HarvestMode::Poisson, HarvestMode::Normal] {
                let mut c = cfg.clone();
                c.env.energy.mode = mode;
                let tag = match mode {
                    HarvestMode::Poisson => "poisson",
                    HarvestMode::Normal => "normal",
                };
                let out = run_sweep(&c)?;
                let dir = out_dir.join(tag);
                write_standard_outputs(&dir, &c, &out)?;
                emit_plot_data(&dir, 3, &out, tag)?;
                println!("harvest mode {tag}:");
                print_rows(&out);
            }
        }
        4 => {
            // Reward curves at both battery capacities.
            cfg.experiment.sweep_axis = SweepAxis::BMax;
            for b_max in [10.0, 5.0] {
                let mut c = cfg.clone();
                c.experiment.sweep_values = vec![b_max];
                let tag = format!("bmax{}", b_max as u32);
                let out = run_sweep(&c)?;
                let dir = out_dir.join(&tag);
                write_standard_outputs(&dir, &c, &out)?;
                emit_plot_data(&dir, 4, &out, &tag)?;
            }
            println!("wrote fig4 curves to {}", out_dir.display());
        }
        5 => {
            cfg.experiment.sweep_axis = SweepAxis::BMax;
            cfg.experiment.sweep_values = vec![5.0, 10.0];
            let out = run_sweep(&cfg)?;
            print_rows(&out);
            write_standard_outputs(out_dir, &cfg, &out)?;
            emit_plot_data(out_dir, 5, &out, "")?;
        }
        6 | 7 => {
            cfg.experiment.sweep_axis = SweepAxis::PPu;
            cfg.experiment.sweep_values = vec![0.0, 5.0, 10.0, 15.0, 20.0];
            let out = run_sweep(&cfg)?;
            print_rows(&out);
            write_standard_outputs(out_dir, &cfg, &out)?;
            emit_plot_data(out_dir, figure, &out, "")?;
            let table = compare_table(&out.rows)?;
            harness::write_compare_csv(out_dir, &table)?;
        }
        8 => {
            cfg.experiment.sweep_values = vec![default_axis_value(&cfg)];
            let out = run_sweep(&cfg)?;
            print_rows(&out);
            write_standard_outputs(out_dir, &cfg, &out)?;
            emit_plot_data(out_dir, 8, &out, "")?;
        }
        other => bail!("unknown figure {other} (expected 3..=8)"),
    }
    println!("wrote figure {figure} data to {}", out_dir.display());
    Ok(())
}
