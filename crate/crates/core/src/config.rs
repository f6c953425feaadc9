//! Experiment configuration: one JSON document drives generate, train
//! and evaluate. Unknown keys are rejected everywhere (fail-closed).

use crate::error::{invalid_arg, Result};
use crate::grid::{make_uniform_periodic_grid, perturb_and_permute_grid, GridSet, NodalState};
use crate::model::NetworkDims;
use crate::sampling::make_2d_unstructured_grid;
use crate::solvers::{IcSampler, PdeSpec};
use crate::training::TrainingConfig;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    /// N equispaced nodes on [0, 2 pi).
    Uniform1d { n: usize },
    /// Uniform grid with i.i.d. node offsets up to fraction·h, storage
    /// order shuffled.
    Perturbed1d { n: usize, fraction: f64, seed: u64 },
    /// The 236-node scattered grid on [-1, 1]^2.
    Unstructured2d { seed: u64 },
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSet> {
        match *self {
            GridConfig::Uniform1d { n } => make_uniform_periodic_grid(n, 2.0 * PI),
            GridConfig::Perturbed1d { n, fraction, seed } => {
                let base = make_uniform_periodic_grid(n, 2.0 * PI)?;
                perturb_and_permute_grid(&base, fraction, seed)
            }
            GridConfig::Unstructured2d { seed } => {
                let mut rng = crate::rng::Rng::new(seed);
                make_2d_unstructured_grid(&mut rng)
            }
        }
    }
}

/// Named validation initial conditions (out-of-sample by construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvalIc {
    /// u(x, 0) = exp(-sin^2 x) - 1/2.
    ExpSin2,
    /// u(x, 0) = sin x.
    Sin,
    /// (u1, u2)(x, 0) = (exp(sin x), exp(cos x)).
    WaveExp,
}

impl EvalIc {
    pub fn label(&self) -> &'static str {
        match self {
            EvalIc::ExpSin2 => "exp_sin2",
            EvalIc::Sin => "sin",
            EvalIc::WaveExp => "wave_exp",
        }
    }

    pub fn components(&self) -> usize {
        match self {
            EvalIc::WaveExp => 2,
            _ => 1,
        }
    }

    /// Evaluate on a 1D grid's stored node order.
    pub fn build(&self, grid: &GridSet) -> Result<NodalState> {
        if grid.dim() != 1 {
            return Err(invalid_arg("named validation ICs are 1D"));
        }
        let n = grid.len();
        let xs: Vec<f64> = (0..n).map(|i| grid.node(i)[0]).collect();
        match self {
            EvalIc::ExpSin2 => NodalState::scalar(
                xs.iter().map(|x| (-x.sin().powi(2)).exp() - 0.5).collect(),
                0.0,
            ),
            EvalIc::Sin => NodalState::scalar(xs.iter().map(|x| x.sin()).collect(), 0.0),
            EvalIc::WaveExp => {
                let mut values: Vec<f64> = xs.iter().map(|x| x.sin().exp()).collect();
                values.extend(xs.iter().map(|x| x.cos().exp()));
                NodalState::new(values, 0.0, n, 2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Trajectory count M.
    pub m: usize,
    /// Steps per trajectory (each sequence holds n_l + 1 states).
    pub n_l: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub dims: NetworkDims,
    pub init_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub ics: Vec<EvalIc>,
    /// Rollout horizon; must be an integer multiple of dataset dt.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pde: PdeSpec,
    pub grid: GridConfig,
    pub sampler: IcSampler,
    pub dataset: DatasetConfig,
    pub network: NetworkConfig,
    pub training: TrainingConfig,
    pub evaluation: EvaluationConfig,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Cross-section consistency checks, run before any work starts.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.pde.validate(&grid)?;
        self.network.dims.validate()?;
        let state_size = grid.len() * self.pde.components();
        if self.network.dims.n != state_size {
            return Err(invalid_arg(format!(
                "network input size {} disagrees with grid x components = {state_size}",
                self.network.dims.n
            )));
        }
        if self.dataset.m < 1 || self.dataset.n_l < 1 || self.dataset.dt <= 0.0 {
            return Err(invalid_arg("dataset needs m >= 1, n_l >= 1, dt > 0"));
        }
        if self.training.n_l > self.dataset.n_l {
            return Err(invalid_arg(format!(
                "training n_l {} exceeds dataset n_l {}",
                self.training.n_l, self.dataset.n_l
            )));
        }
        self.training.schedule.validate()?;
        if self.evaluation.t <= 0.0 {
            return Err(invalid_arg("evaluation horizon must be positive"));
        }
        let steps = self.evaluation.t / self.dataset.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(invalid_arg(
                "evaluation horizon must be an integer multiple of dataset dt",
            ));
        }
        for ic in &self.evaluation.ics {
            if ic.components() != self.pde.components() {
                return Err(invalid_arg(format!(
                    "validation IC {} has {} components, PDE wants {}",
                    ic.label(),
                    ic.components(),
                    self.pde.components()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_json() -> String {
        r#"{
            "pde": {"kind": "advection_diffusion_1d",
                    "alpha": {"a0": 1.0}, "kappa": {"a0": 0.001}},
            "grid": {"kind": "uniform1d", "n": 32},
            "sampler": {"kind": "fourier", "spec": {
                "a0": {"kind": "uniform", "lo": -0.5, "hi": 0.5},
                "an": {"kind": "uniform_over_mode", "lo": -1.0, "hi": 1.0},
                "bn": {"kind": "uniform_over_mode", "lo": -1.0, "hi": 1.0},
                "order": {"kind": "fixed", "n_c": 5}}},
            "dataset": {"m": 100, "n_l": 5, "dt": 0.02, "seed": 7},
            "network": {"dims": {"n": 32, "n_w": 32, "n_d": 1, "j": 5,
                                 "n_a": 1, "lift": "identity"},
                        "init_seed": 1},
            "training": {"n_l": 5, "epochs": 2, "batch_size": 50,
                         "schedule": {"kind": "cyclic", "lr_max": 0.001,
                                      "lr_min": 0.0001, "decay": 0.99994,
                                      "period_steps": 2000}},
            "evaluation": {"ics": [{"kind": "exp_sin2"}], "t": 2.0}
        }"#
        .to_string()
    }

    #[test]
    fn desk_config_parses_and_validates() {
        let cfg = ExperimentConfig::from_json(&desk_json()).unwrap();
        assert_eq!(cfg.dataset.m, 100);
        assert_eq!(cfg.network.dims.j, 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = desk_json().replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let bad = desk_json().replace("\"n\": 32,", "\"n\": 16,");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn eval_ics_match_closed_forms() {
        let grid = make_uniform_periodic_grid(8, 2.0 * PI).unwrap();
        let s = EvalIc::ExpSin2.build(&grid).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-15); // exp(0) - 1/2
        let w = EvalIc::WaveExp.build(&grid).unwrap();
        assert_eq!(w.components(), 2);
        assert!((w.component(0)[0] - 1.0).abs() < 1e-15);
        assert!((w.component(1)[0] - 1.0f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig::from_json(&desk_json()).unwrap();
        let again =
            ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
