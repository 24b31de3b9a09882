use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use algae_core::algae::{ope_estimate, AlgaeConfig};
use algae_core::dataset::{collect, empirical_distribution, ExperienceSet};
use algae_core::experiments::{
    compare, compare_csv, mass_near_start, rerun_manifest, run, write_run, Environment, Manifest, Method, Mode,
    Preset, RunConfig,
};
use algae_core::verify::run_checks;
use algae_core::{AlgaeError, Result, SoftmaxPolicy};

#[derive(Parser)]
#[command(name = "algae", version, about = "Tabular AlgaeDICE on Four Rooms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Full run configuration as JSON; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "fig2")]
    preset: Preset,
    #[arg(long, default_value = "algae")]
    method: Method,
    #[arg(long, default_value = "offline")]
    mode: Mode,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// `quadratic` or `polynomial:<p>`.
    #[arg(long)]
    divergence: Option<String>,
    #[arg(long)]
    smoothing: Option<f64>,
    /// Offline dataset written by `algae collect`.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, validate: bool) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => RunConfig::preset(self.preset, self.method, self.mode, 0),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = &self.divergence {
            cfg.divergence = v.clone();
        }
        if let Some(v) = self.smoothing {
            cfg.smoothing = v;
        }
        if let Some(v) = &self.dataset {
            cfg.dataset_path = Some(v.clone());
        }
        if validate {
            cfg.validate()?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Collect an offline dataset with a preset's behavior policy.
    Collect {
        #[arg(long, default_value = "fig2")]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one policy and write metrics.csv, policy.json and manifest.json.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also record residual maps every N steps (AlgaeDICE only).
        #[arg(long)]
        residual_every: Option<usize>,
    },
    /// Estimate a target policy's value from a dataset.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// `uniform`, `gridwalk`, or a policy.json written by `train`.
        #[arg(long, default_value = "uniform")]
        policy: String,
    },
    /// Check solver invariants on random MDPs.
    Verify {
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Random MDPs per seed.
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// Record residual maps during AlgaeDICE training.
    Residuals {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        every: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all method and mode combinations over several seeds.
    Compare {
        #[arg(long, default_value = "fig2")]
        preset: Preset,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a manifest and check that the metrics hash matches.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn load_policy(spec: &str, env: &Environment) -> Result<SoftmaxPolicy> {
    let (ns, na) = (env.mdp.num_states(), env.mdp.num_actions());
    match spec {
        "uniform" => Ok(SoftmaxPolicy::uniform(ns, na)),
        "gridwalk" => Ok(env.behavior.clone()),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| AlgaeError::InvalidInput(format!("cannot read policy '{path}': {e}")))?;
            let p: SoftmaxPolicy = serde_json::from_str(&text)?;
            if p.num_states() != ns || p.num_actions() != na {
                return Err(AlgaeError::InvalidInput(format!(
                    "policy is {}x{}, the environment is {ns}x{na}",
                    p.num_states(),
                    p.num_actions()
                )));
            }
            SoftmaxPolicy::new(ns, na, p.logits().to_vec())
        }
    }
}

fn print_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Collect { preset, seed, out } => {
            let cfg = RunConfig::preset(preset, Method::Algae, Mode::Offline, seed);
            let env = Environment::new(&cfg)?;
            let data = collect(
                &env.collection_mdp,
                &env.behavior,
                cfg.num_trajectories,
                cfg.trajectory_length,
                seed,
            )?;
            data.save(&out)?;
            print_json(json!({
                "out": out,
                "transitions": data.len(),
                "mean_reward": data.mean_reward(),
            }));
        }
        Command::Train { run: args, out, residual_every } => {
            let cfg = args.resolve(true)?;
            let output = run(&cfg, residual_every)?;
            let files = write_run(&output, &out)?;
            print_json(json!({
                "final_return": output.final_return(),
                "behavior_return": output.behavior_return,
                "metrics": files.metrics_path,
                "manifest": files.manifest_path,
                "policy": files.policy_path,
                "residuals": files.residuals_path,
            }));
        }
        Command::Evaluate { run: args, policy } => {
            let cfg = args.resolve(false)?;
            let env = Environment::new(&cfg)?;
            let target = load_policy(&policy, &env)?;
            let data: ExperienceSet = env.offline_data(&cfg)?;
            let d = empirical_distribution(&data, env.mdp.num_states(), env.mdp.num_actions(), cfg.smoothing)?;
            let acfg = AlgaeConfig {
                alpha: cfg.alpha,
                divergence: cfg.divergence_pair()?,
                ..AlgaeConfig::default()
            };
            print_json(json!({
                "estimate": ope_estimate(&env.mdp, &target, &d, &acfg)?,
                "true_return": env.mdp.dual_return(&target)?,
                "alpha": cfg.alpha,
                "transitions": data.len(),
            }));
        }
        Command::Verify { seeds, trials } => {
            let seed_list: Vec<u64> = (0..seeds).collect();
            let report = run_checks(&seed_list, trials)?;
            print!("{}", report.table());
            return Ok(report.all_passed());
        }
        Command::Residuals { run: args, every, out } => {
            let mut cfg = args.resolve(true)?;
            cfg.method = Method::Algae;
            let output = run(&cfg, Some(every))?;
            fs::write(&out, serde_json::to_string(&output.residual_maps)?)?;
            let env = Environment::new(&cfg)?;
            for map in &output.residual_maps {
                println!(
                    "step {:>5}  mass within 3 of start {:.3}",
                    map.step,
                    mass_near_start(&env.rooms, map, 3)
                );
            }
        }
        Command::Compare { preset, seeds, steps, learning_rate, out } => {
            let seed_list: Vec<u64> = (0..seeds).collect();
            let rows = compare(
                preset,
                &seed_list,
                |cfg| {
                    if let Some(s) = steps {
                        cfg.steps = s;
                    }
                    if let Some(lr) = learning_rate {
                        cfg.learning_rate = lr;
                    }
                },
                out.as_deref(),
            )?;
            let csv = compare_csv(&rows);
            if let Some(dir) = &out {
                fs::write(Path::new(dir).join("compare.csv"), &csv)?;
            }
            print!("{csv}");
        }
        Command::Rerun { manifest } => {
            let m = Manifest::load(&manifest)?;
            let output = rerun_manifest(&m)?;
            print_json(json!({
                "reproduced": true,
                "metrics_hash": m.metrics_hash,
                "final_return": output.final_return(),
            }));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("{}", json!({ "error": "usage", "message": e.kind().to_string() }));
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(if e.is_solver_failure() { 2 } else { 1 })
        }
    }
}
