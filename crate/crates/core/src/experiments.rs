//! Four Rooms experiment presets, single runs, multi-seed comparisons and
//! the artifacts they emit (metrics CSV, residual maps, manifests).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algae::{self, AlgaeConfig, InnerSolver, StepMetrics, TrainOutcome};
use crate::baselines::train_actor_critic;
use crate::dataset::{collect, empirical_distribution, DataSource, ExperienceSet};
use crate::divergence::DivergencePair;
use crate::envs::{residual_map, FourRooms, FourRoomsSpec, InitialCells, ResidualMap};
use crate::error::{AlgaeError, Result};
use crate::mdp::TabularMdp;
use crate::policy::SoftmaxPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Uniform-policy data, 500 trajectories of length 10, `γ = 0.97`.
    Fig1,
    /// GridWalk data, 100 trajectories of length 100, `γ = 0.99`.
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Algae,
    Ac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Online,
    Offline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behavior {
    Uniform,
    Gridwalk,
}

macro_rules! name_enum {
    ($ty:ty, $what:literal, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self {
                    $(Self::$variant => $name,)+
                }
            }
        }

        impl FromStr for $ty {
            type Err = AlgaeError;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(AlgaeError::Parse(format!(concat!("unknown ", $what, " '{}'"), other))),
                }
            }
        }

        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

name_enum!(Preset, "preset", Fig1 => "fig1", Fig2 => "fig2");
name_enum!(Method, "method", Algae => "algae", Ac => "ac");
name_enum!(Mode, "mode", Online => "online", Offline => "offline");
name_enum!(Behavior, "behavior", Uniform => "uniform", Gridwalk => "gridwalk");

/// Layout used by both presets.
pub fn preset_rooms() -> FourRoomsSpec {
    FourRoomsSpec::default()
}

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub mode: Mode,
    pub preset: Preset,
    pub alpha: f64,
    pub divergence: String,
    pub gamma: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub smoothing: f64,
    pub num_trajectories: usize,
    pub trajectory_length: usize,
    pub behavior: Behavior,
    pub behavior_bias: f64,
    pub rooms: FourRoomsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<PathBuf>,
    #[serde(default = "default_inner_solver")]
    pub inner_solver: InnerSolver,
    #[serde(default = "default_inner_tolerance")]
    pub inner_tolerance: f64,
    #[serde(default = "default_inner_max_iters")]
    pub inner_max_iters: usize,
}

fn default_inner_solver() -> InnerSolver {
    AlgaeConfig::default().inner_solver
}

fn default_inner_tolerance() -> f64 {
    AlgaeConfig::default().inner_tolerance
}

fn default_inner_max_iters() -> usize {
    AlgaeConfig::default().inner_max_iters
}

impl RunConfig {
    pub fn preset(preset: Preset, method: Method, mode: Mode, seed: u64) -> Self {
        let (gamma, num_trajectories, trajectory_length, behavior) = match preset {
            Preset::Fig1 => (0.97, 500, 10, Behavior::Uniform),
            Preset::Fig2 => (0.99, 100, 100, Behavior::Gridwalk),
        };
        Self {
            method,
            mode,
            preset,
            alpha: 0.01,
            divergence: "quadratic".into(),
            gamma,
            steps: 2000,
            learning_rate: 1.0,
            seed,
            smoothing: 0.1,
            num_trajectories,
            trajectory_length,
            behavior,
            behavior_bias: 0.2,
            rooms: preset_rooms(),
            dataset_path: None,
            inner_solver: default_inner_solver(),
            inner_tolerance: default_inner_tolerance(),
            inner_max_iters: default_inner_max_iters(),
        }
    }

    pub fn divergence_pair(&self) -> Result<DivergencePair> {
        self.divergence.parse()
    }

    pub fn validate(&self) -> Result<()> {
        self.divergence_pair()?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(AlgaeError::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if self.method == Method::Algae && (self.alpha == 0.0 || !self.alpha.is_finite()) {
            return Err(AlgaeError::Config("training needs a finite nonzero alpha".into()));
        }
        if !self.learning_rate.is_finite() {
            return Err(AlgaeError::Config("learning_rate must be finite".into()));
        }
        if !(self.smoothing >= 0.0) {
            return Err(AlgaeError::Config("smoothing must be nonnegative".into()));
        }
        if self.num_trajectories == 0 || self.trajectory_length == 0 {
            return Err(AlgaeError::Config("trajectory counts must be positive".into()));
        }
        if self.mode == Mode::Online && self.dataset_path.is_some() {
            return Err(AlgaeError::Config("online runs collect their own data; drop dataset_path".into()));
        }
        Ok(())
    }

    pub fn algae_config(&self) -> Result<AlgaeConfig> {
        Ok(AlgaeConfig {
            alpha: self.alpha,
            divergence: self.divergence_pair()?,
            gamma_one_mode: false,
            inner_solver: self.inner_solver,
            inner_tolerance: self.inner_tolerance,
            inner_max_iters: self.inner_max_iters,
        })
    }
}

/// The MDPs and behavior policy a run is built from.
#[derive(Debug, Clone)]
pub struct Environment {
    pub rooms: FourRooms,
    /// Evaluation MDP: episodes start at the start cell.
    pub mdp: TabularMdp,
    /// Collection MDP: trajectories start at a uniformly random open cell.
    pub collection_mdp: TabularMdp,
    pub behavior: SoftmaxPolicy,
}

impl Environment {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let rooms = FourRooms::new(cfg.rooms)?;
        let mdp = rooms.mdp(cfg.gamma, InitialCells::Start)?;
        let collection_mdp = rooms.mdp(cfg.gamma, InitialCells::UniformOpen)?;
        let behavior = match cfg.behavior {
            Behavior::Uniform => SoftmaxPolicy::uniform(rooms.num_states(), 4),
            Behavior::Gridwalk => rooms.gridwalk_behavior(cfg.behavior_bias)?,
        };
        Ok(Self {
            rooms,
            mdp,
            collection_mdp,
            behavior,
        })
    }

    /// The offline dataset: loaded from `dataset_path` or collected with the
    /// behavior policy using the run seed.
    pub fn offline_data(&self, cfg: &RunConfig) -> Result<ExperienceSet> {
        let data = match &cfg.dataset_path {
            Some(path) => ExperienceSet::load(path)?,
            None => collect(
                &self.collection_mdp,
                &self.behavior,
                cfg.num_trajectories,
                cfg.trajectory_length,
                cfg.seed,
            )?,
        };
        if data.num_states != self.mdp.num_states() || data.num_actions != self.mdp.num_actions() {
            return Err(AlgaeError::InvalidInput(format!(
                "dataset is {}x{}, the environment is {}x{}",
                data.num_states,
                data.num_actions,
                self.mdp.num_states(),
                self.mdp.num_actions()
            )));
        }
        Ok(data)
    }

    pub fn data_source(&self, cfg: &RunConfig) -> Result<DataSource> {
        Ok(match cfg.mode {
            Mode::Offline => {
                let data = self.offline_data(cfg)?;
                DataSource::Fixed(empirical_distribution(
                    &data,
                    self.mdp.num_states(),
                    self.mdp.num_actions(),
                    cfg.smoothing,
                )?)
            }
            Mode::Online => DataSource::Online {
                collection_mdp: self.collection_mdp.clone(),
                num_trajectories: cfg.num_trajectories,
                trajectory_length: cfg.trajectory_length,
                smoothing: cfg.smoothing,
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub metrics: Vec<StepMetrics>,
    pub policy: SoftmaxPolicy,
    pub residual_maps: Vec<ResidualMap>,
    /// Average per-step reward of the behavior policy on the evaluation MDP.
    pub behavior_return: f64,
}

impl RunOutput {
    pub fn final_return(&self) -> f64 {
        self.metrics.last().map_or(f64::NAN, |m| m.dual_return)
    }
}

/// Runs one configuration. With `residual_every = Some(k)` an AlgaeDICE run
/// also records a residual map at every `k`-th step and at the last step.
pub fn run(cfg: &RunConfig, residual_every: Option<usize>) -> Result<RunOutput> {
    cfg.validate()?;
    let env = Environment::new(cfg)?;
    let source = env.data_source(cfg)?;
    let behavior_return = env.mdp.dual_return(&env.behavior)?;
    let mut residual_maps = Vec::new();
    let outcome: TrainOutcome = match cfg.method {
        Method::Algae => {
            let acfg = cfg.algae_config()?;
            let initial = SoftmaxPolicy::uniform(env.mdp.num_states(), env.mdp.num_actions());
            let mut map_error = None;
            let out = algae::train_from(
                &env.mdp,
                &source,
                &acfg,
                cfg.steps,
                cfg.learning_rate,
                cfg.seed,
                initial,
                |snap| {
                    let Some(k) = residual_every else { return };
                    if map_error.is_some() || (snap.step % k.max(1) != 0 && snap.step != cfg.steps) {
                        return;
                    }
                    match residual_map(
                        &env.rooms,
                        &env.mdp,
                        snap.policy,
                        &snap.solution.nu,
                        acfg.alpha,
                        &acfg.divergence,
                        snap.step,
                    ) {
                        Ok(map) => residual_maps.push(map),
                        Err(e) => map_error = Some(e),
                    }
                },
            )?;
            if let Some(e) = map_error {
                return Err(e);
            }
            out
        }
        Method::Ac => train_actor_critic(&env.mdp, &source, cfg.steps, cfg.learning_rate, cfg.seed)?,
    };
    Ok(RunOutput {
        config: cfg.clone(),
        metrics: outcome.metrics,
        policy: outcome.policy,
        residual_maps,
        behavior_return,
    })
}

pub const METRICS_HEADER: &str = "step,dual_return,objective,zeta_error,grad_norm,method,mode,seed";

pub fn metrics_csv(metrics: &[StepMetrics], method: Method, mode: Mode, seed: u64) -> String {
    let mut out = String::with_capacity(96 * (metrics.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{},{},{}",
            m.step, m.dual_return, m.objective, m.zeta_error, m.grad_norm, method, mode, seed
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// SHA-256 over the canonical config JSON followed by the dataset bytes.
    pub input_hash: String,
    pub metrics_hash: String,
    pub final_return: f64,
    pub behavior_return: f64,
}

pub fn input_hash(cfg: &RunConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(cfg)?);
    if let Some(path) = &cfg.dataset_path {
        hasher.update(fs::read(path)?);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl Manifest {
    pub fn for_run(output: &RunOutput) -> Result<Self> {
        let cfg = &output.config;
        let csv = metrics_csv(&output.metrics, cfg.method, cfg.mode, cfg.seed);
        Ok(Self {
            tool: "algae".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: cfg.clone(),
            input_hash: input_hash(cfg)?,
            metrics_hash: sha256_hex(csv.as_bytes()),
            final_return: output.final_return(),
            behavior_return: output.behavior_return,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Files written for one run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub metrics_path: PathBuf,
    pub manifest_path: PathBuf,
    pub policy_path: PathBuf,
    pub residuals_path: Option<PathBuf>,
}

pub fn write_run(output: &RunOutput, dir: impl AsRef<Path>) -> Result<RunArtifacts> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let cfg = &output.config;
    let metrics_path = dir.join("metrics.csv");
    fs::write(&metrics_path, metrics_csv(&output.metrics, cfg.method, cfg.mode, cfg.seed))?;
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&Manifest::for_run(output)?)?)?;
    let policy_path = dir.join("policy.json");
    fs::write(&policy_path, serde_json::to_string(&output.policy)?)?;
    let residuals_path = if output.residual_maps.is_empty() {
        None
    } else {
        let p = dir.join("residuals.json");
        fs::write(&p, serde_json::to_string(&output.residual_maps)?)?;
        Some(p)
    };
    Ok(RunArtifacts {
        metrics_path,
        manifest_path,
        policy_path,
        residuals_path,
    })
}

/// Re-runs the configuration stored in a manifest and checks both hashes.
pub fn rerun_manifest(manifest: &Manifest) -> Result<RunOutput> {
    let hash = input_hash(&manifest.config)?;
    if hash != manifest.input_hash {
        return Err(AlgaeError::InvalidInput(format!(
            "input hash {hash} differs from the manifest's {}",
            manifest.input_hash
        )));
    }
    let output = run(&manifest.config, None)?;
    let again = Manifest::for_run(&output)?;
    if again.metrics_hash != manifest.metrics_hash {
        return Err(AlgaeError::Numerical(format!(
            "re-run metrics hash {} differs from the manifest's {}",
            again.metrics_hash, manifest.metrics_hash
        )));
    }
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub method: Method,
    pub mode: Mode,
    pub finals: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// All four (method, mode) combinations over `seeds`, run in parallel.
/// When `out_dir` is given each run writes to `<out_dir>/<method>-<mode>-<seed>/`.
pub fn compare(
    preset: Preset,
    seeds: &[u64],
    adjust: impl Fn(&mut RunConfig) + Sync,
    out_dir: Option<&Path>,
) -> Result<Vec<CompareRow>> {
    let combos = [
        (Method::Algae, Mode::Online),
        (Method::Algae, Mode::Offline),
        (Method::Ac, Mode::Online),
        (Method::Ac, Mode::Offline),
    ];
    let jobs: Vec<(Method, Mode, u64)> = combos
        .iter()
        .flat_map(|&(m, md)| seeds.iter().map(move |&s| (m, md, s)))
        .collect();
    let finals: Vec<f64> = jobs
        .par_iter()
        .map(|&(method, mode, seed)| {
            let mut cfg = RunConfig::preset(preset, method, mode, seed);
            adjust(&mut cfg);
            let out = run(&cfg, None)?;
            if let Some(dir) = out_dir {
                write_run(&out, dir.join(format!("{method}-{mode}-{seed}")))?;
            }
            Ok(out.final_return())
        })
        .collect::<Result<_>>()?;
    Ok(combos
        .iter()
        .enumerate()
        .map(|(i, &(method, mode))| {
            let f = finals[i * seeds.len()..(i + 1) * seeds.len()].to_vec();
            let (mean, std) = mean_std(&f);
            CompareRow {
                method,
                mode,
                finals: f,
                mean,
                std,
            }
        })
        .collect())
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("method,mode,seeds,mean_final_return,std_final_return\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.method, r.mode, r.finals.len(), r.mean, r.std);
    }
    out
}

/// Average ranks, ties sharing the mean rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Per-state values of a residual map, in state order.
pub fn map_values(rooms: &FourRooms, map: &ResidualMap) -> Vec<f64> {
    rooms.cells().iter().map(|&(r, c)| map.grid[r][c]).collect()
}

/// Fraction of a residual map's mass within Manhattan distance `radius` of
/// the start cell.
pub fn mass_near_start(rooms: &FourRooms, map: &ResidualMap, radius: usize) -> f64 {
    let values = map_values(rooms, map);
    let start = rooms.start_state();
    let total: f64 = values.iter().sum();
    let near: f64 = values
        .iter()
        .enumerate()
        .filter(|&(s, _)| rooms.manhattan(s, start) <= radius)
        .map(|(_, v)| v)
        .sum();
    near / total
}
