use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hrs_core::dataset::ScenarioConfig;
use hrs_core::mlp::TrainHyper;
use hrs_sim::config::load_config;
use hrs_sim::format::{load_checkpoint, load_dataset, save_checkpoint, save_dataset};
use hrs_sim::pipeline::{evaluate, generate_dataset, scenario_name, thread_pool, train_checkpoint, Evaluation};
use hrs_sim::report::{method_table, write_evaluation, write_sweep};
use hrs_sim::{Result, SimError};

/// Hierarchical rate splitting: dataset generation, classifier training
/// and baseline comparison.
#[derive(Parser, Debug)]
#[command(name = "hrs", version)]
struct Cli {
    /// Overrides the scenario seed (gen-dataset, sweep) or training seed (train).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for generation and evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the total transmit power P.
    #[arg(long, global = true)]
    power: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, balance, augment and split a labeled dataset.
    GenDataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the number of raw samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Train the classifier on a dataset file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate all baselines on the test split and write reports into a directory.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-method rate statistics on the test split.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Run gen-dataset, train and eval for every *.toml file in a directory.
    Sweep {
        #[arg(long)]
        configs: PathBuf,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

fn hyper(seed: Option<u64>, epochs: Option<usize>) -> TrainHyper {
    let mut h = TrainHyper::default();
    if let Some(s) = seed {
        h.seed = s;
    }
    if let Some(e) = epochs {
        h.epochs = e;
    }
    h
}

fn with_power(mut cfg: ScenarioConfig, power: Option<f64>) -> Result<ScenarioConfig> {
    if let Some(p) = power {
        cfg.total_power = p;
        cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn scenario_overrides(cfg: ScenarioConfig, cli: &Cli, samples: Option<usize>) -> Result<ScenarioConfig> {
    let mut cfg = with_power(cfg, cli.power)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = samples {
        cfg.samples = s;
    }
    cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
    Ok(cfg)
}

fn eval_files(data: &Path, model: &Path, power: Option<f64>) -> Result<Evaluation> {
    let data = load_dataset(data)?;
    let checkpoint = load_checkpoint(model)?;
    let cfg = with_power(data.config.clone(), power)?;
    evaluate(&data, &checkpoint, &cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenDataset { config, out, samples } => {
            let cfg = scenario_overrides(load_config(config)?, cli, *samples)?;
            let data = generate_dataset(&cfg)?;
            save_dataset(&data, out)?;
            let s = &data.split;
            eprintln!(
                "{}: {} classes, train {}, validation {}, test {} -> {}",
                scenario_name(&cfg),
                s.num_classes(),
                s.train.len(),
                s.validation.len(),
                s.test.len(),
                out.display()
            );
        }
        Command::Train { data, out, epochs } => {
            let data = load_dataset(data)?;
            let checkpoint = train_checkpoint(&data, &hyper(cli.seed, *epochs))?;
            save_checkpoint(&checkpoint, out)?;
            if let Some(r) = &checkpoint.report {
                eprintln!(
                    "test top-1 {:.4}, top-3 {:.4}, top-5 {:.4} -> {}",
                    r.test_top1,
                    r.test_top3,
                    r.test_top5,
                    out.display()
                );
            }
        }
        Command::Eval { data, model, out } => {
            let ev = eval_files(data, model, cli.power)?;
            write_evaluation(out, &ev)?;
            print!("{}", method_table(&ev));
        }
        Command::Compare { data, model } => {
            let ev = eval_files(data, model, cli.power)?;
            print!("{}", method_table(&ev));
        }
        Command::Sweep { configs, out, samples, epochs } => {
            let mut files: Vec<PathBuf> = fs::read_dir(configs)
                .map_err(|e| SimError::Config(format!("{}: {e}", configs.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(SimError::Config(format!("no .toml files in {}", configs.display())));
            }
            let mut evals = Vec::new();
            for file in &files {
                let cfg = scenario_overrides(load_config(file)?, cli, *samples)?;
                let name = scenario_name(&cfg);
                eprintln!("{name}: generating");
                let data = generate_dataset(&cfg)?;
                save_dataset(&data, &out.join(format!("{name}.hrsdat")))?;
                eprintln!("{name}: training");
                let checkpoint = train_checkpoint(&data, &hyper(cli.seed, *epochs))?;
                save_checkpoint(&checkpoint, &out.join(format!("{name}.hrsmlp")))?;
                let ev = evaluate(&data, &checkpoint, &cfg)?;
                print!("{name}\n{}", method_table(&ev));
                evals.push(ev);
            }
            write_sweep(out, &evals)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match thread_pool(cli.threads) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
