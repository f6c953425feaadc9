//! Recurrent multi-step loss, backprop through time, Adam, and the
//! cyclic learning-rate schedule.

use crate::autodiff::{NodeId, Tape};
use crate::error::{invalid_arg, shape_mismatch, Error, Result};
use crate::grid::{TrajectoryDataset, TrajectorySequence};
use crate::linalg::Tensor;
use crate::model::{
    init_params, model_forward_on_tape, register_params, NetworkDims, NetworkParams, ParamNodes,
};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Learning-rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LrSchedule {
    /// Triangular wave with exponentially decaying amplitude:
    /// lr(s) = lr_min + (lr_max - lr_min) · decay^s · tri(s).
    Cyclic {
        lr_max: f64,
        lr_min: f64,
        decay: f64,
        period_steps: u64,
    },
    Constant { lr: f64 },
}

pub const DEFAULT_CYCLE_PERIOD: u64 = 2000;

impl LrSchedule {
    /// The paper's advection-diffusion schedule: 1e-3 / 1e-4 / 0.99994.
    pub fn paper_cyclic() -> LrSchedule {
        LrSchedule::Cyclic {
            lr_max: 1e-3,
            lr_min: 1e-4,
            decay: 0.99994,
            period_steps: DEFAULT_CYCLE_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LrSchedule::Cyclic {
                lr_max,
                lr_min,
                decay,
                period_steps,
            } => {
                if !(lr_min > 0.0 && lr_min <= lr_max) {
                    return Err(invalid_arg("need 0 < lr_min <= lr_max"));
                }
                if !(decay > 0.0 && decay <= 1.0) {
                    return Err(invalid_arg("decay must lie in (0, 1]"));
                }
                if period_steps < 2 {
                    return Err(invalid_arg("cycle period must be >= 2 steps"));
                }
                Ok(())
            }
            LrSchedule::Constant { lr } => {
                if lr <= 0.0 {
                    return Err(invalid_arg("learning rate must be positive"));
                }
                Ok(())
            }
        }
    }
}

/// Learning rate at a global optimizer step.
pub fn cyclic_lr(step: u64, sched: &LrSchedule) -> f64 {
    match *sched {
        LrSchedule::Constant { lr } => lr,
        LrSchedule::Cyclic {
            lr_max,
            lr_min,
            decay,
            period_steps,
        } => {
            let phase = (step % period_steps) as f64 / period_steps as f64;
            let tri = (1.0 - 2.0 * phase).abs();
            lr_min + (lr_max - lr_min) * decay.powi(step as i32) * tri
        }
    }
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_log_every() -> usize {
    50
}
fn default_shards() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    /// Recurrence length of the loss; must not exceed the dataset's n_L.
    pub n_l: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub schedule: LrSchedule,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub shuffle_seed: u64,
    /// Batches per gradient reduction group; > 1 splits each batch into
    /// fixed-order shards (deterministic regardless of scheduling).
    #[serde(default = "default_shards")]
    pub shards: usize,
    /// Print a loss line every this many epochs (0 disables).
    #[serde(default = "default_log_every")]
    pub log_every: usize,
}

impl TrainingConfig {
    pub fn validate(&self, dataset: &TrajectoryDataset) -> Result<()> {
        self.schedule.validate()?;
        if self.n_l < 1 || self.n_l > dataset.n_l() {
            return Err(invalid_arg(format!(
                "n_l must lie in [1, {}], got {}",
                dataset.n_l(),
                self.n_l
            )));
        }
        if self.batch_size < 1 || self.batch_size > dataset.len() {
            return Err(invalid_arg(format!(
                "batch size must lie in [1, {}], got {}",
                dataset.len(),
                self.batch_size
            )));
        }
        if self.shards < 1 {
            return Err(invalid_arg("shard count must be >= 1"));
        }
        Ok(())
    }
}

/// Adam moment accumulators over the canonical flat parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update, in place on the flat parameters.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    lr: f64,
    cfg: &AdamConfig,
) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(shape_mismatch("Adam state size disagrees with parameters"));
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

/// Per-epoch training record. Wall-clock stays out of the serialized form
/// so checkpoints are byte-reproducible across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainHistory {
    pub epoch_losses: Vec<f64>,
    pub lr_trace: Vec<f64>,
    /// Global optimizer steps taken, so training can resume with the
    /// schedule phase preserved.
    pub steps: u64,
    #[serde(default)]
    pub config_echo: serde_json::Value,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

/// Stack the time-k states of the batch as one dims.n x B matrix.
fn batch_matrix(batch: &[&TrajectorySequence], k: usize, n: usize) -> Result<Tensor> {
    let b = batch.len();
    let mut m = Tensor::zeros(n, b);
    for (c, seq) in batch.iter().enumerate() {
        let vals = seq.state(k).values();
        if vals.len() != n {
            return Err(shape_mismatch(format!(
                "sequence state has {} values, network wants {n}",
                vals.len()
            )));
        }
        for (r, v) in vals.iter().enumerate() {
            m.set(r, c, *v);
        }
    }
    Ok(m)
}

/// Record the recurrent loss on the tape:
/// sum_{n=1..n_l} (1/B) sum_j || N^n(u_j(0)) - u_j(n dt) ||^2.
pub fn recurrent_loss(
    tape: &mut Tape,
    nodes: &ParamNodes,
    dims: &NetworkDims,
    batch: &[&TrajectorySequence],
    n_l: usize,
) -> Result<NodeId> {
    if batch.is_empty() {
        return Err(invalid_arg("empty batch"));
    }
    if n_l < 1 || batch.iter().any(|s| s.steps() < n_l) {
        return Err(invalid_arg("every sequence needs at least n_l + 1 states"));
    }
    let b = batch.len();
    let mut x = tape.input(batch_matrix(batch, 0, dims.n)?);
    let mut total: Option<NodeId> = None;
    for n in 1..=n_l {
        x = model_forward_on_tape(tape, nodes, dims, x)?;
        let neg_target = tape.input(batch_matrix(batch, n, dims.n)?.scaled(-1.0));
        let diff = tape.add(x, neg_target)?;
        let ss = tape.sum_squares(diff);
        let term = tape.scale(ss, 1.0 / b as f64);
        total = Some(match total {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    Ok(total.expect("n_l >= 1"))
}

/// Loss value and flat gradient for one batch (one tape, full BPTT).
pub fn loss_gradient(
    params: &NetworkParams,
    batch: &[&TrajectorySequence],
    n_l: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut tape = Tape::new();
    let nodes = register_params(&mut tape, params);
    let loss_node = recurrent_loss(&mut tape, &nodes, &params.dims, batch, n_l)?;
    let loss = tape.value(loss_node).get(0, 0);
    let grads = tape.backward(loss_node)?;
    let mut flat = Vec::with_capacity(params.dims.param_count());
    for id in nodes.all() {
        flat.extend_from_slice(grads[id].data());
    }
    Ok((loss, flat))
}

/// Train fresh parameters initialized from `init_seed`.
pub fn train(
    dataset: &TrajectoryDataset,
    dims: NetworkDims,
    init_seed: u64,
    config: &TrainingConfig,
) -> Result<(NetworkParams, TrainHistory)> {
    let params = init_params(dims, init_seed)?;
    train_from(params, 0, dataset, config)
}

/// Continue training from existing parameters; `start_step` restores the
/// learning-rate schedule phase when resuming from a checkpoint.
pub fn train_from(
    mut params: NetworkParams,
    start_step: u64,
    dataset: &TrajectoryDataset,
    config: &TrainingConfig,
) -> Result<(NetworkParams, TrainHistory)> {
    config.validate(dataset)?;
    let n = dataset.grid().len() * dataset.components();
    if params.dims.n != n {
        return Err(shape_mismatch(format!(
            "network input size {} vs dataset state size {n}",
            params.dims.n
        )));
    }

    let started = std::time::Instant::now();
    let m = dataset.len();
    let mut flat = params.flatten();
    let mut adam = AdamState::new(flat.len());
    let mut step = start_step;
    let root_rng = Rng::new(config.shuffle_seed);
    let mut history = TrainHistory {
        config_echo: serde_json::to_value(config)?,
        ..TrainHistory::default()
    };

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..m).collect();
        root_rng.substream(epoch as u64).shuffle(&mut order);

        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        history.lr_trace.push(cyclic_lr(step, &config.schedule));

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&TrajectorySequence> =
                chunk.iter().map(|&i| &dataset.sequences()[i]).collect();

            // Shards are reduced in fixed index order, so the result is
            // independent of how they are scheduled.
            let shard_size = batch.len().div_ceil(config.shards);
            let mut loss = 0.0;
            let mut grad = vec![0.0; flat.len()];
            for shard in batch.chunks(shard_size) {
                let (shard_loss, shard_grad) = loss_gradient(&params, shard, config.n_l)?;
                // Each shard computes a mean over its own size; reweight
                // so the reduction equals the whole-batch mean.
                let weight = shard.len() as f64 / batch.len() as f64;
                loss += shard_loss * weight;
                for (g, s) in grad.iter_mut().zip(&shard_grad) {
                    *g += s * weight;
                }
            }

            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "training diverged: non-finite loss at epoch {epoch}, step {step}"
                )));
            }
            let lr = cyclic_lr(step, &config.schedule);
            adam_step(&mut adam, &mut flat, &grad, lr, &config.adam)?;
            params.assign_flat(&flat)?;
            step += 1;
            epoch_loss += loss;
            batches += 1;
        }

        let mean_loss = epoch_loss / batches.max(1) as f64;
        history.epoch_losses.push(mean_loss);
        if config.log_every > 0 && (epoch + 1) % config.log_every == 0 {
            println!(
                "epoch {:>5}  loss {:.6e}  lr {:.3e}",
                epoch + 1,
                mean_loss,
                cyclic_lr(step, &config.schedule)
            );
        }
    }

    history.steps = step;
    history.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok((params, history))
}

/// Export a history as CSV (epoch, loss, lr).
pub fn history_to_csv(history: &TrainHistory) -> String {
    let mut out = String::from("epoch,loss,lr\n");
    for (i, (loss, lr)) in history
        .epoch_losses
        .iter()
        .zip(&history.lr_trace)
        .enumerate()
    {
        out.push_str(&format!("{},{:.17e},{:.17e}\n", i + 1, loss, lr));
    }
    out
}
