//! Pipeline driver: generate datasets, train models, predict, evaluate
//! and inspect the binary artifacts. All randomness flows from config
//! seeds; commands are idempotent given identical inputs.

use clap::{Args, Parser, Subcommand};
use nodalflow::config::{EvalIc, ExperimentConfig};
use nodalflow::error::{Error, Result};
use nodalflow::grid::NodalState;
use nodalflow::io::{read_dataset, write_dataset};
use nodalflow::model::{load_checkpoint, save_checkpoint};
use nodalflow::rollout::{
    evaluate_against_reference, model_hash, predict, trajectory_to_csv,
};
use nodalflow::solvers::{generate_dataset, make_stepper, solve_trajectory};
use nodalflow::training::{history_to_csv, train};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "nodalflow", version, about = "Learn PDE evolution operators from trajectory snapshots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Override the config's primary seed for this command.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides the config's shard count).
    #[arg(long)]
    threads: Option<usize>,
    /// Validate inputs and exit without writing anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured PDE from sampled initial conditions and write
    /// an NTDF dataset.
    Generate(CommonOpts),
    /// Train the configured network on an NTDF dataset and write an NPMC
    /// checkpoint plus a history CSV.
    Train {
        #[command(flatten)]
        common: CommonOpts,
        /// Input NTDF dataset.
        #[arg(long)]
        data: PathBuf,
    },
    /// Roll a trained model out from an initial condition and write a
    /// trajectory CSV.
    Predict {
        /// NPMC checkpoint.
        #[arg(long)]
        model: PathBuf,
        /// Initial condition: a named preset (exp_sin2 | sin | wave_exp,
        /// needs --config for the grid) or a file with one value per line.
        #[arg(long)]
        ic: String,
        #[arg(long)]
        steps: usize,
        /// Output step size.
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a trained model against the reference solver on the
    /// configured validation ICs; writes a JSON report and CSV slices.
    Evaluate {
        #[command(flatten)]
        common: CommonOpts,
        /// NPMC checkpoint.
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the header of an NTDF or NPMC file as JSON.
    Inspect {
        #[arg(long)]
        path: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let payload = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{payload}");
            1
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(opts) => cmd_generate(opts),
        Command::Train { common, data } => cmd_train(common, &data),
        Command::Predict {
            model,
            ic,
            steps,
            dt,
            out,
            config,
        } => cmd_predict(&model, &ic, steps, dt, &out, config.as_deref()),
        Command::Evaluate { common, model } => cmd_evaluate(common, &model),
        Command::Inspect { path } => cmd_inspect(&path),
    }
}

fn load_config(opts: &CommonOpts) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    if let Some(threads) = opts.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        cfg.training.shards = threads;
    }
    Ok(cfg)
}

fn cmd_generate(opts: CommonOpts) -> Result<()> {
    let mut cfg = load_config(&opts)?;
    if let Some(seed) = opts.seed {
        cfg.dataset.seed = seed;
    }
    if opts.dry_run {
        println!("{}", json!({"dry_run": true, "valid": true}));
        return Ok(());
    }
    let grid = cfg.grid.build()?;
    let dataset = generate_dataset(
        &cfg.pde,
        &cfg.sampler,
        &grid,
        cfg.dataset.m,
        cfg.dataset.n_l,
        cfg.dataset.dt,
        cfg.dataset.seed,
    )?;
    write_dataset(&dataset, &opts.out)?;
    println!(
        "{}",
        json!({
            "written": opts.out,
            "m": dataset.len(),
            "n_l": dataset.n_l(),
            "dt": dataset.dt(),
            "nodes": dataset.grid().len(),
            "components": dataset.components(),
            "oracle_substeps": dataset.meta().substeps,
        })
    );
    Ok(())
}

fn cmd_train(opts: CommonOpts, data: &Path) -> Result<()> {
    let mut cfg = load_config(&opts)?;
    if let Some(seed) = opts.seed {
        cfg.network.init_seed = seed;
    }
    let dataset = read_dataset(data)?;
    if opts.dry_run {
        cfg.training.validate(&dataset)?;
        println!("{}", json!({"dry_run": true, "valid": true}));
        return Ok(());
    }
    let (params, history) = train(
        &dataset,
        cfg.network.dims,
        cfg.network.init_seed,
        &cfg.training,
    )?;
    save_checkpoint(&params, &history, &opts.out)?;
    let csv_path = opts.out.with_extension("history.csv");
    std::fs::write(&csv_path, history_to_csv(&history))?;
    println!(
        "{}",
        json!({
            "written": opts.out,
            "history_csv": csv_path,
            "epochs": history.epoch_losses.len(),
            "final_loss": history.epoch_losses.last(),
            "steps": history.steps,
            "model_hash": model_hash(&params),
        })
    );
    Ok(())
}

fn load_ic(
    spec: &str,
    config: Option<&Path>,
    n: usize,
) -> Result<(NodalState, String)> {
    let preset = match spec {
        "exp_sin2" => Some(EvalIc::ExpSin2),
        "sin" => Some(EvalIc::Sin),
        "wave_exp" => Some(EvalIc::WaveExp),
        _ => None,
    };
    if let Some(ic) = preset {
        let config = config.ok_or_else(|| {
            Error::Config("preset ICs need --config for the grid".into())
        })?;
        let cfg = ExperimentConfig::load(config)?;
        let grid = cfg.grid.build()?;
        return Ok((ic.build(&grid)?, ic.label().to_string()));
    }
    let text = std::fs::read_to_string(spec)?;
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad IC value {t:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "IC file holds {} values, model wants {n}",
            values.len()
        )));
    }
    Ok((NodalState::scalar(values, 0.0)?, format!("file:{spec}")))
}

fn cmd_predict(
    model: &Path,
    ic_spec: &str,
    steps: usize,
    dt: f64,
    out: &Path,
    config: Option<&Path>,
) -> Result<()> {
    let (params, _history) = load_checkpoint(model)?;
    let (ic, label) = load_ic(ic_spec, config, params.dims.n)?;
    let prediction = predict(&params, &ic, steps, dt)?;
    std::fs::write(out, trajectory_to_csv(&prediction.sequence, None))?;
    println!(
        "{}",
        json!({
            "written": out,
            "ic": label,
            "steps": prediction.sequence.steps(),
            "blowup_step": prediction.blowup_step,
        })
    );
    Ok(())
}

fn cmd_evaluate(opts: CommonOpts, model: &Path) -> Result<()> {
    let cfg = load_config(&opts)?;
    let (params, _history) = load_checkpoint(model)?;
    if opts.dry_run {
        println!("{}", json!({"dry_run": true, "valid": true}));
        return Ok(());
    }
    let grid = cfg.grid.build()?;
    let dt = cfg.dataset.dt;
    let steps = (cfg.evaluation.t / dt).round() as usize;
    let stem = opts.out.with_extension("");
    let stem = stem.to_string_lossy().into_owned();

    let mut reports = Vec::new();
    for ic_spec in &cfg.evaluation.ics {
        let ic = ic_spec.build(&grid)?;
        let report = evaluate_against_reference(
            &params,
            &cfg.pde,
            &ic,
            &grid,
            cfg.evaluation.t,
            dt,
            ic_spec.label(),
        )?;

        // Plot-ready slices: prediction and reference trajectories.
        let prediction = predict(&params, &ic, steps, dt)?;
        let stepper = make_stepper(&cfg.pde, &grid, dt)?;
        let reference = solve_trajectory(stepper.as_ref(), &ic, dt, steps)?;
        std::fs::write(
            format!("{stem}_{}_pred.csv", ic_spec.label()),
            trajectory_to_csv(&prediction.sequence, Some(&grid)),
        )?;
        std::fs::write(
            format!("{stem}_{}_ref.csv", ic_spec.label()),
            trajectory_to_csv(&reference, Some(&grid)),
        )?;
        reports.push(report);
    }
    let body = serde_json::to_vec_pretty(&reports)?;
    std::fs::write(&opts.out, body)?;
    let summary: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "ic": r.metadata.ic,
                "final_rel_l2": r.rel_l2.last(),
                "blowup_step": r.blowup_step,
            })
        })
        .collect();
    println!("{}", json!({"written": opts.out, "reports": summary}));
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<()> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::Truncated { context: "header" });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let header = match &bytes[0..4] {
        b"NTDF" => {
            if bytes.len() < 40 {
                return Err(Error::Truncated { context: "NTDF header" });
            }
            json!({
                "format": "ntdf",
                "version": u32_at(4),
                "dim": u32_at(8),
                "nodes": u32_at(12),
                "components": u32_at(16),
                "n_l": u32_at(20),
                "dt": f64::from_le_bytes(bytes[24..32].try_into().unwrap()),
                "m": u64_at(32),
            })
        }
        b"NPMC" => {
            if bytes.len() < 44 {
                return Err(Error::Truncated { context: "NPMC header" });
            }
            json!({
                "format": "npmc",
                "version": u32_at(4),
                "n": u32_at(8),
                "n_w": u32_at(12),
                "n_d": u32_at(16),
                "j": u32_at(20),
                "n_a": u32_at(24),
                "lift": if u32_at(32) == 0 { "identity" } else { "affine" },
                "param_count": u64_at(36),
            })
        }
        _ => return Err(Error::BadMagic { expected: "NTDF or NPMC" }),
    };
    println!("{header}");
    Ok(())
}
