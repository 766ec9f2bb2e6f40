//! Experiment harness: seeded train/eval runs for {baseline, dqn, d3qn},
//! sweeps over battery capacity or PU power, metric aggregation with 95%
//! confidence intervals, CSV and gnuplot-ready column emission.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agents::{run_episode, Controller, EpisodeRecord, LearnerKind, QLearner};
use crate::config::ExperimentConfig;
use crate::env::Env;
use crate::error::{Result, SimError};

/// The three compared schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Baseline,
    Dqn,
    D3qn,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Baseline, Scheme::Dqn, Scheme::D3qn];

    pub fn learner_kind(&self) -> Option<LearnerKind> {
        match self {
            Scheme::Baseline => None,
            Scheme::Dqn => Some(LearnerKind::Dqn),
            Scheme::D3qn => Some(LearnerKind::D3qn),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Baseline => "baseline",
            Scheme::Dqn => "dqn",
            Scheme::D3qn => "d3qn",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Scheme::Baseline),
            "dqn" => Ok(Scheme::Dqn),
            "d3qn" => Ok(Scheme::D3qn),
            other => Err(SimError::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

/// splitmix64, used to derive independent stream seeds from run coordinates.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x0ddc_0ffe_e915_bada;
    for &p in parts {
        acc = splitmix64(acc ^ p);
    }
    acc
}

const STREAM_TRAIN: u64 = 1;
const STREAM_EVAL: u64 = 2;
const STREAM_INIT: u64 = 3;

/// Output of a single (scheme, sweep value, seed) run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub scheme: Scheme,
    pub sweep_value: f64,
    pub seed: u64,
    /// Total training reward per episode (empty for the baseline).
    pub reward_curve: Vec<f64>,
    /// Greedy-evaluation means over `eval_episodes` episodes.
    pub eval_aoi: f64,
    pub eval_rate: f64,
    pub eval_access: f64,
    pub eval_reward: f64,
}

/// Fraction of slots that carried a delivered status update (cases 2 and 6).
pub fn access_fraction(records: &[EpisodeRecord]) -> f64 {
    assert!(!records.is_empty(), "need at least one episode");
    let (hits, total) = records.iter().fold((0usize, 0usize), |(h, n), r| {
        (
            h + r.slots.iter().filter(|s| matches!(s.case_id, 2 | 6)).count(),
            n + r.slots.len(),
        )
    });
    hits as f64 / total as f64
}

/// Train a fresh learner for one (scheme, sweep value, seed) cell; returns
/// the learner and its per-episode training rewards. `None` for the baseline.
pub fn train_learner(
    exp: &ExperimentConfig,
    scheme: Scheme,
    sweep_value: f64,
    seed: u64,
) -> Result<Option<(QLearner, Vec<f64>)>> {
    let Some(kind) = scheme.learner_kind() else {
        return Ok(None);
    };
    let env_cfg = exp.env_at(sweep_value);
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, STREAM_INIT]));
    let mut learner = QLearner::new(kind, 4, 5, &exp.agent, seed, &mut init_rng);
    // The training stream depends only on the seed: schemes and sweep points
    // train against identical world sequences and exploration draws (the
    // environment consumes its per-slot randomness unconditionally), so
    // comparisons are paired.
    let mut train_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, STREAM_TRAIN]));
    let mut env = Env::new(env_cfg, &mut train_rng)?;
    let mut reward_curve = Vec::with_capacity(exp.agent.episodes);
    for _ in 0..exp.agent.episodes {
        let rec = run_episode(
            &mut env,
            &mut Controller::Learner(&mut learner),
            true,
            exp.agent.horizon,
            &mut train_rng,
        )?;
        reward_curve.push(rec.total_reward);
    }
    Ok(Some((learner, reward_curve)))
}

/// Greedy evaluation of a trained learner (or the baseline when `None`).
///
/// Evaluation episodes draw their randomness from streams derived only from
/// `(seed, episode)` — common random numbers across schemes and sweep values,
/// so paired comparisons are low-variance.
pub fn evaluate(
    exp: &ExperimentConfig,
    learner: Option<&mut QLearner>,
    sweep_value: f64,
    seed: u64,
) -> Result<Vec<EpisodeRecord>> {
    let env_cfg = exp.env_at(sweep_value);
    let mut records = Vec::with_capacity(exp.experiment.eval_episodes);
    let mut learner = learner;
    for ep in 0..exp.experiment.eval_episodes {
        let mut eval_rng =
            ChaCha8Rng::seed_from_u64(derive_seed(&[seed, STREAM_EVAL, ep as u64]));
        let mut env = Env::new(env_cfg.clone(), &mut eval_rng)?;
        let mut ctl = match learner.as_deref_mut() {
            Some(l) => Controller::Learner(l),
            None => Controller::Baseline,
        };
        records.push(run_episode(&mut env, &mut ctl, false, exp.agent.horizon, &mut eval_rng)?);
    }
    Ok(records)
}

/// Train (when the scheme learns) and greedily evaluate one run.
pub fn run_single(
    exp: &ExperimentConfig,
    scheme: Scheme,
    sweep_value: f64,
    seed: u64,
) -> Result<RunResult> {
    let trained = train_learner(exp, scheme, sweep_value, seed)?;
    let (mut learner, reward_curve) = match trained {
        Some((l, curve)) => (Some(l), curve),
        None => (None, Vec::new()),
    };
    let records = evaluate(exp, learner.as_mut(), sweep_value, seed)?;
    let n = records.len() as f64;
    Ok(RunResult {
        scheme,
        sweep_value,
        seed,
        reward_curve,
        eval_aoi: records.iter().map(EpisodeRecord::mean_aoi).sum::<f64>() / n,
        eval_rate: records.iter().map(EpisodeRecord::mean_rate).sum::<f64>() / n,
        eval_access: access_fraction(&records),
        eval_reward: records.iter().map(|r| r.total_reward).sum::<f64>() / n,
    })
}

/// Mean and 95% CI half-width (Student t) of a sample.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, t_quantile_975(n - 1) * (var / n as f64).sqrt())
}

/// Two-sided 97.5% Student t quantiles for small df; 1.96 beyond the table.
fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::INFINITY
    } else if df <= TABLE.len() {
        TABLE[df - 1]
    } else {
        1.96
    }
}

/// Aggregated metrics for one (scheme, sweep value) cell.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub scheme: Scheme,
    pub sweep_value: f64,
    pub mean_aoi: f64,
    pub ci_aoi: f64,
    pub mean_rate: f64,
    pub ci_rate: f64,
    pub mean_access: f64,
    pub ci_access: f64,
    pub mean_reward: f64,
    pub ci_reward: f64,
}

/// Full sweep output: per-run results plus aggregated rows.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<MetricsRow>,
    pub runs: Vec<RunResult>,
}

impl SweepOutput {
    pub fn row(&self, scheme: Scheme, sweep_value: f64) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sweep_value == sweep_value)
    }

    /// Per-seed values of a metric for paired comparisons.
    pub fn seed_values(
        &self,
        scheme: Scheme,
        sweep_value: f64,
        metric: impl Fn(&RunResult) -> f64,
    ) -> Vec<f64> {
        let mut runs: Vec<&RunResult> = self
            .runs
            .iter()
            .filter(|r| r.scheme == scheme && r.sweep_value == sweep_value)
            .collect();
        runs.sort_by_key(|r| r.seed);
        runs.into_iter().map(metric).collect()
    }
}

fn schemes_of(exp: &ExperimentConfig) -> Result<Vec<Scheme>> {
    exp.experiment
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect()
}

/// Run every (scheme, sweep value, seed) combination, in parallel, and
/// aggregate. Results are deterministic: every run owns derived RNG streams
/// and the merge order is fixed.
pub fn run_sweep(exp: &ExperimentConfig) -> Result<SweepOutput> {
    exp.validate()?;
    let schemes = schemes_of(exp)?;
    let mut tasks = Vec::new();
    for &scheme in &schemes {
        for &value in &exp.experiment.sweep_values {
            for &seed in &exp.experiment.seeds {
                tasks.push((scheme, value, seed));
            }
        }
    }
    let mut runs = tasks
        .into_par_iter()
        .map(|(scheme, value, seed)| run_single(exp, scheme, value, seed))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| {
        (a.scheme, a.sweep_value.to_bits(), a.seed)
            .cmp(&(b.scheme, b.sweep_value.to_bits(), b.seed))
    });

    let mut rows = Vec::new();
    for &scheme in &schemes {
        for &value in &exp.experiment.sweep_values {
            let cell: Vec<&RunResult> = runs
                .iter()
                .filter(|r| r.scheme == scheme && r.sweep_value == value)
                .collect();
            let col = |f: &dyn Fn(&RunResult) -> f64| -> Vec<f64> {
                cell.iter().map(|r| f(r)).collect()
            };
            let (mean_aoi, ci_aoi) = mean_ci(&col(&|r| r.eval_aoi));
            let (mean_rate, ci_rate) = mean_ci(&col(&|r| r.eval_rate));
            let (mean_access, ci_access) = mean_ci(&col(&|r| r.eval_access));
            let (mean_reward, ci_reward) = mean_ci(&col(&|r| r.eval_reward));
            rows.push(MetricsRow {
                scheme,
                sweep_value: value,
                mean_aoi,
                ci_aoi,
                mean_rate,
                ci_rate,
                mean_access,
                ci_access,
                mean_reward,
                ci_reward,
            });
        }
    }
    Ok(SweepOutput { rows, runs })
}

/// Percentage deltas of each learning scheme against the baseline.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub sweep_value: f64,
    pub scheme: Scheme,
    /// (scheme − baseline) / baseline · 100; `None` when the baseline is zero.
    pub rate_delta_pct: Option<f64>,
    pub aoi_delta_pct: Option<f64>,
}

/// Build the comparison table (rate and AoI deltas vs the baseline).
pub fn compare_table(rows: &[MetricsRow]) -> Result<Vec<CompareRow>> {
    let mut out = Vec::new();
    let mut values: Vec<f64> = rows.iter().map(|r| r.sweep_value).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    for value in values {
        let base = rows
            .iter()
            .find(|r| r.scheme == Scheme::Baseline && r.sweep_value == value)
            .ok_or_else(|| SimError::MissingScheme(format!("baseline at {value}")))?;
        for row in rows.iter().filter(|r| r.sweep_value == value && r.scheme != Scheme::Baseline) {
            let pct = |now: f64, then: f64| {
                if then == 0.0 {
                    None
                } else {
                    Some((now - then) / then * 100.0)
                }
            };
            out.push(CompareRow {
                sweep_value: value,
                scheme: row.scheme,
                rate_delta_pct: pct(row.mean_rate, base.mean_rate),
                aoi_delta_pct: pct(row.mean_aoi, base.mean_aoi),
            });
        }
    }
    Ok(out)
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// `metrics.csv`: one row per (scheme, sweep value).
pub fn write_metrics_csv(dir: &Path, rows: &[MetricsRow]) -> Result<()> {
    create_out_dir(dir)?;
    let mut f = fs::File::create(dir.join("metrics.csv"))?;
    writeln!(
        f,
        "scheme,sweep_value,mean_aoi,ci_aoi,mean_rate,ci_rate,access_fraction,ci_access,mean_reward,ci_reward"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.scheme,
            r.sweep_value,
            r.mean_aoi,
            r.ci_aoi,
            r.mean_rate,
            r.ci_rate,
            r.mean_access,
            r.ci_access,
            r.mean_reward,
            r.ci_reward
        )?;
    }
    Ok(())
}

/// `reward_curve.csv`: raw and trailing-mean training rewards per episode.
pub fn write_reward_curves_csv(dir: &Path, runs: &[RunResult], window: usize) -> Result<()> {
    create_out_dir(dir)?;
    let mut f = fs::File::create(dir.join("reward_curve.csv"))?;
    writeln!(f, "scheme,sweep_value,seed,episode,reward,smoothed")?;
    for r in runs {
        for (ep, &val) in r.reward_curve.iter().enumerate() {
            let lo = ep.saturating_sub(window.saturating_sub(1));
            let tail = &r.reward_curve[lo..=ep];
            let smoothed = tail.iter().sum::<f64>() / tail.len() as f64;
            writeln!(
                f,
                "{},{:.6},{},{},{:.6},{:.6}",
                r.scheme, r.sweep_value, r.seed, ep, val, smoothed
            )?;
        }
    }
    Ok(())
}

/// `access.csv`: per-run access fractions.
pub fn write_access_csv(dir: &Path, runs: &[RunResult]) -> Result<()> {
    create_out_dir(dir)?;
    let mut f = fs::File::create(dir.join("access.csv"))?;
    writeln!(f, "scheme,sweep_value,seed,access_fraction")?;
    for r in runs {
        writeln!(
            f,
            "{},{:.6},{},{:.6}",
            r.scheme, r.sweep_value, r.seed, r.eval_access
        )?;
    }
    Ok(())
}

/// `compare.csv`: the deltas-vs-baseline table.
pub fn write_compare_csv(dir: &Path, rows: &[CompareRow]) -> Result<()> {
    create_out_dir(dir)?;
    let mut f = fs::File::create(dir.join("compare.csv"))?;
    writeln!(f, "sweep_value,scheme,rate_delta_pct,aoi_delta_pct")?;
    for r in rows {
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.1}"),
            None => "n/a".to_string(),
        };
        writeln!(
            f,
            "{:.6},{},{},{}",
            r.sweep_value,
            r.scheme,
            fmt_opt(r.rate_delta_pct),
            fmt_opt(r.aoi_delta_pct)
        )?;
    }
    Ok(())
}

/// `manifest.json`: the exact config, its digest, and the seeds — everything
/// needed to reproduce any CSV row.
pub fn write_manifest(dir: &Path, exp: &ExperimentConfig) -> Result<()> {
    create_out_dir(dir)?;
    let manifest = serde_json::json!({
        "config_sha256": exp.digest(),
        "seeds": exp.experiment.seeds,
        "config": exp,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Plain-text column files, one per scheme/series, for a given figure id.
///
/// * fig 3/4 — `(episode, reward, smoothed)` per scheme (and per series tag)
/// * fig 5/6 — `(sweep value, mean AoI, ci)` per scheme
/// * fig 7   — `(sweep value, mean rate, ci)` per scheme
/// * fig 8   — `(scheme, access fraction, ci)` rows
pub fn emit_plot_data(dir: &Path, figure: u8, out: &SweepOutput, tag: &str) -> Result<()> {
    create_out_dir(dir)?;
    let schemes: Vec<Scheme> = {
        let mut s: Vec<Scheme> = out.rows.iter().map(|r| r.scheme).collect();
        s.sort();
        s.dedup();
        s
    };
    let need = |wanted: &[Scheme]| -> Result<()> {
        let missing: Vec<String> = wanted
            .iter()
            .filter(|w| !schemes.contains(w))
            .map(|w| w.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(SimError::MissingScheme(missing.join(", ")))
        }
    };
    let suffix = if tag.is_empty() { String::new() } else { format!("_{tag}") };
    match figure {
        3 | 4 => {
            need(&[Scheme::Dqn, Scheme::D3qn])?;
            for r in &out.runs {
                if r.reward_curve.is_empty() {
                    continue;
                }
                let path = dir.join(format!(
                    "fig{figure}_{}{}_seed{}.dat",
                    r.scheme, suffix, r.seed
                ));
                let mut f = fs::File::create(path)?;
                writeln!(f, "# episode reward smoothed")?;
                for (ep, &val) in r.reward_curve.iter().enumerate() {
                    let lo = ep.saturating_sub(19);
                    let tail = &r.reward_curve[lo..=ep];
                    let smoothed = tail.iter().sum::<f64>() / tail.len() as f64;
                    writeln!(f, "{ep} {val:.6} {smoothed:.6}")?;
                }
            }
        }
        5 | 6 | 7 => {
            need(&[Scheme::Baseline, Scheme::Dqn, Scheme::D3qn])?;
            for &scheme in &schemes {
                let path = dir.join(format!("fig{figure}_{scheme}{suffix}.dat"));
                let mut f = fs::File::create(path)?;
                writeln!(f, "# x mean ci")?;
                let mut rows: Vec<&MetricsRow> =
                    out.rows.iter().filter(|r| r.scheme == scheme).collect();
                rows.sort_by(|a, b| a.sweep_value.partial_cmp(&b.sweep_value).unwrap());
                for r in rows {
                    let (m, ci) = if figure == 7 {
                        (r.mean_rate, r.ci_rate)
                    } else {
                        (r.mean_aoi, r.ci_aoi)
                    };
                    writeln!(f, "{:.6} {m:.6} {ci:.6}", r.sweep_value)?;
                }
            }
        }
        8 => {
            need(&[Scheme::Baseline, Scheme::Dqn, Scheme::D3qn])?;
            let path = dir.join(format!("fig8{suffix}.dat"));
            let mut f = fs::File::create(path)?;
            writeln!(f, "# scheme access ci")?;
            for r in &out.rows {
                writeln!(f, "{} {:.6} {:.6}", r.scheme, r.mean_access, r.ci_access)?;
            }
        }
        other => {
            return Err(SimError::InvalidConfig(format!(
                "unknown figure {other} (expected 3..=8)"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_exp() -> ExperimentConfig {
        let mut exp = ExperimentConfig::default();
        exp.agent.episodes = 2;
        exp.agent.horizon = 40;
        exp.agent.warmup = 32;
        exp.experiment.seeds = vec![1, 2];
        exp.experiment.eval_episodes = 3;
        exp.experiment.sweep_values = vec![10.0];
        exp
    }

    #[test]
    fn baseline_run_is_deterministic() {
        let exp = tiny_exp();
        let a = run_single(&exp, Scheme::Baseline, 10.0, 7).unwrap();
        let b = run_single(&exp, Scheme::Baseline, 10.0, 7).unwrap();
        assert_eq!(a.eval_aoi, b.eval_aoi);
        assert_eq!(a.eval_access, b.eval_access);
        assert!(a.reward_curve.is_empty());
    }

    #[test]
    fn sweep_produces_rows_and_csvs() {
        let exp = tiny_exp();
        let out = run_sweep(&exp).unwrap();
        assert_eq!(out.rows.len(), 3);
        assert_eq!(out.runs.len(), 6);
        for r in &out.rows {
            assert!(r.mean_access >= 0.0 && r.mean_access <= 1.0);
            assert!(r.ci_access >= 0.0);
        }
        let dir = std::env::temp_dir().join("aoisim_harness_test");
        write_metrics_csv(&dir, &out.rows).unwrap();
        write_access_csv(&dir, &out.runs).unwrap();
        write_reward_curves_csv(&dir, &out.runs, 20).unwrap();
        write_manifest(&dir, &exp).unwrap();
        let metrics = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
        assert!(metrics.starts_with("scheme,sweep_value,"));
        assert_eq!(metrics.lines().count(), 4);
    }

    #[test]
    fn access_fraction_counts_cases() {
        use crate::agents::SlotRecord;
        use crate::env::Action;
        let mk = |case_id: u8| SlotRecord {
            aoi: 1,
            action: Action::NoSense,
            case_id,
            reward: 0.0,
            rate: 0.0,
            ack: matches!(case_id, 2 | 6),
            collided: false,
        };
        let all_idle = EpisodeRecord { slots: vec![mk(1); 10], total_reward: 0.0 };
        assert_eq!(access_fraction(&[all_idle]), 0.0);
        let all_tx = EpisodeRecord { slots: vec![mk(2); 10], total_reward: 0.0 };
        assert_eq!(access_fraction(&[all_tx.clone()]), 1.0);
        let half = EpisodeRecord {
            slots: (0..10).map(|i| mk(if i % 2 == 0 { 2 } else { 5 })).collect(),
            total_reward: 0.0,
        };
        assert_eq!(access_fraction(&[half]), 0.5);
    }

    #[test]
    fn compare_table_contract() {
        let row = |scheme, value, rate: f64, aoi: f64| MetricsRow {
            scheme,
            sweep_value: value,
            mean_aoi: aoi,
            ci_aoi: 0.0,
            mean_rate: rate,
            ci_rate: 0.0,
            mean_access: 0.0,
            ci_access: 0.0,
            mean_reward: 0.0,
            ci_reward: 0.0,
        };
        let rows = vec![
            row(Scheme::Baseline, 0.0, 1.0, 10.0),
            row(Scheme::Dqn, 0.0, 1.546, 10.0),
            row(Scheme::D3qn, 0.0, 1.0, 6.15),
        ];
        let table = compare_table(&rows).unwrap();
        let dqn = table.iter().find(|r| r.scheme == Scheme::Dqn).unwrap();
        assert!((dqn.rate_delta_pct.unwrap() - 54.6).abs() < 1e-9);
        assert_eq!(dqn.aoi_delta_pct.unwrap(), 0.0);
        let d3qn = table.iter().find(|r| r.scheme == Scheme::D3qn).unwrap();
        assert!((d3qn.aoi_delta_pct.unwrap() - (-38.5)).abs() < 1e-9);
        assert_eq!(d3qn.rate_delta_pct.unwrap(), 0.0);

        // zero baseline rate reports n/a instead of dividing
        let rows = vec![row(Scheme::Baseline, 0.0, 0.0, 10.0), row(Scheme::Dqn, 0.0, 1.0, 5.0)];
        let table = compare_table(&rows).unwrap();
        assert!(table[0].rate_delta_pct.is_none());

        // missing baseline is an error
        let rows = vec![row(Scheme::Dqn, 0.0, 1.0, 5.0)];
        assert!(matches!(compare_table(&rows), Err(SimError::MissingScheme(_))));
    }

    #[test]
    fn plot_emission_requires_all_schemes() {
        let exp = tiny_exp();
        let mut out = run_sweep(&exp).unwrap();
        let dir = std::env::temp_dir().join("aoisim_plot_test");
        emit_plot_data(&dir, 6, &out, "").unwrap();
        assert!(dir.join("fig6_baseline.dat").exists());
        out.rows.retain(|r| r.scheme != Scheme::Baseline);
        assert!(matches!(
            emit_plot_data(&dir, 6, &out, ""),
            Err(SimError::MissingScheme(_))
        ));
        assert!(matches!(
            emit_plot_data(&dir, 9, &out, ""),
            Err(SimError::InvalidConfig(_))
        ));
    }
}
