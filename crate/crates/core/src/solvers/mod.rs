//! Reference PDE solvers and dataset generation.
//!
//! These are the "true PDE" oracles: they synthesize training trajectories
//! and validation baselines. The learning modules never call into them.

mod one_d;
mod two_d;
mod weno;

pub use one_d::{
    advdiff1d_step_cn, fourth_order_exact_step, integro_differential_step, viscous_burgers_step,
    wave_system_exact, AdvDiffCnStepper, FourthOrderStepper, IntegroDiffStepper,
    ResampledStepper, ViscousBurgersStepper, WaveSystemStepper,
};
pub use two_d::{AdvDiff2DReference, DEFAULT_FINE_GRID};
pub use weno::{inviscid_burgers_step, InviscidBurgersStepper};

use crate::error::{invalid_arg, Result};
use crate::grid::{
    DatasetMeta, GridSet, NodalState, TrajectoryDataset, TrajectorySequence,
};
use crate::rng::Rng;
use crate::sampling::{
    gaussian_2d_ic, sample_2d_sine_ic, sample_fourier_ic, sample_piecewise_constant_ic,
    FourierCoeffSpec,
};
use crate::spectral::SpectralOperator1D;
use serde::{Deserialize, Serialize};

/// A fixed (deterministic) finite Fourier series, used for the variable
/// PDE coefficients alpha(x) and kappa(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedFourierSeries {
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl FixedFourierSeries {
    pub fn constant(a0: f64) -> Self {
        FixedFourierSeries {
            a0,
            a: vec![],
            b: vec![],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        crate::sampling::evaluate_fourier_series(self.a0, &self.a, &self.b, x)
            .expect("validated series")
    }
}

/// The advection-diffusion coefficients used throughout the 1D experiments.
pub fn table1_advdiff() -> (FixedFourierSeries, FixedFourierSeries) {
    let scale = |v: &[f64], s: f64| v.iter().map(|c| c * s).collect::<Vec<_>>();
    let alpha = FixedFourierSeries {
        a0: 1.0,
        a: scale(&[0.5426, 0.2673, -0.0030, -0.6039, 0.6618], 0.05),
        b: scale(&[-0.9585, 0.4976, -0.5504, 0.5211, -0.8233], 0.05),
    };
    let kappa = FixedFourierSeries {
        a0: 1e-3,
        a: scale(&[0.3707, -0.9921, 0.62524, 0.4435, 0.8355], 5e-5),
        b: scale(&[0.9068, 0.0243, 0.2251, -0.4162, 0.4291], 5e-5),
    };
    (alpha, kappa)
}

/// Which PDE generates the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PdeSpec {
    /// u_t + (alpha u)_x = (kappa u_x)_x on [0, 2 pi).
    #[serde(rename = "advection_diffusion_1d")]
    AdvectionDiffusion1D {
        alpha: FixedFourierSeries,
        kappa: FixedFourierSeries,
    },
    /// u_t + c u_xxxx = 0.
    FourthOrder { c: f64 },
    /// u_t + u u_x = nu u_xx.
    ViscousBurgers { nu: f64 },
    /// u_t + (u^2 / 2)_x = 0.
    InviscidBurgers,
    /// u_t = A u_x with A = [[0,1],[1,0]] (two components).
    WaveSystem,
    /// 2D advection-diffusion, velocity (y, -x), zero Dirichlet boundary.
    #[serde(rename = "advdiff_2d")]
    AdvDiff2D { kappa: f64 },
    /// u_t = nu u_xx + gamma * mean(u); integral-operator demo.
    IntegroDiff { nu: f64, gamma: f64 },
}

impl PdeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PdeSpec::AdvectionDiffusion1D { .. } => "advection_diffusion_1d",
            PdeSpec::FourthOrder { .. } => "fourth_order",
            PdeSpec::ViscousBurgers { .. } => "viscous_burgers",
            PdeSpec::InviscidBurgers => "inviscid_burgers",
            PdeSpec::WaveSystem => "wave_system",
            PdeSpec::AdvDiff2D { .. } => "advdiff_2d",
            PdeSpec::IntegroDiff { .. } => "integro_diff",
        }
    }

    pub fn components(&self) -> usize {
        match self {
            PdeSpec::WaveSystem => 2,
            _ => 1,
        }
    }

    pub fn validate(&self, grid: &GridSet) -> Result<()> {
        match self {
            PdeSpec::AdvectionDiffusion1D { kappa, .. } => {
                for i in 0..grid.len() {
                    let k = kappa.eval(grid.node(i)[0]);
                    if k <= 0.0 {
                        return Err(invalid_arg(format!(
                            "diffusivity must stay positive, kappa(x_{i}) = {k}"
                        )));
                    }
                }
                Ok(())
            }
            PdeSpec::FourthOrder { c } if *c <= 0.0 => {
                Err(invalid_arg("fourth-order coefficient must be positive"))
            }
            PdeSpec::ViscousBurgers { nu } if *nu < 0.0 => {
                Err(invalid_arg("viscosity must be non-negative"))
            }
            PdeSpec::AdvDiff2D { kappa } if *kappa <= 0.0 => {
                Err(invalid_arg("2D diffusivity must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Advances a state by one output step of size dt, possibly via internal
/// sub-steps. Steppers are pure apart from read-only cached factorizations.
pub trait Stepper: Send + Sync {
    fn step(&self, state: &NodalState) -> Result<NodalState>;
    /// Internal sub-steps taken per output step (recorded in metadata).
    fn substeps(&self) -> u32 {
        1
    }
}

/// Spectral derivative of a scalar state on a uniform periodic grid.
pub fn spectral_derivative(state: &NodalState, grid: &GridSet, order: u32) -> Result<NodalState> {
    if !grid.is_uniform_1d() {
        return Err(invalid_arg(
            "spectral derivative requires a uniform periodic 1D grid",
        ));
    }
    let op = SpectralOperator1D::new(grid.len())?;
    let mut out = Vec::with_capacity(state.values().len());
    for c in 0..state.components() {
        out.extend(op.derivative(state.component(c), order));
    }
    state.with_values(out, state.time())
}

/// Build the stepper for a spec over a grid. 1D steppers require the
/// uniform periodic grid the oracles are defined on; 2D uses
/// [`AdvDiff2DReference`] directly.
pub fn make_stepper(spec: &PdeSpec, grid: &GridSet, dt: f64) -> Result<Box<dyn Stepper>> {
    spec.validate(grid)?;
    if dt <= 0.0 {
        return Err(invalid_arg("dt must be positive"));
    }
    // Perturbed / permuted periodic grids: advance on the matching
    // uniform grid and resample band-limited states at the actual nodes.
    if let crate::grid::Domain::Periodic1D { length } = grid.domain() {
        if !grid.is_uniform_1d() {
            let uniform = crate::grid::make_uniform_periodic_grid(grid.len(), length)?;
            let inner = make_stepper(spec, &uniform, dt)?;
            return Ok(Box::new(one_d::ResampledStepper::new(grid, inner)?));
        }
    }
    match spec {
        PdeSpec::AdvectionDiffusion1D { alpha, kappa } => Ok(Box::new(AdvDiffCnStepper::new(
            grid, alpha, kappa, dt,
        )?)),
        PdeSpec::FourthOrder { c } => Ok(Box::new(FourthOrderStepper::new(grid, *c, dt)?)),
        PdeSpec::ViscousBurgers { nu } => {
            Ok(Box::new(ViscousBurgersStepper::new(grid, *nu, dt)?))
        }
        PdeSpec::InviscidBurgers => Ok(Box::new(InviscidBurgersStepper::new(grid, dt)?)),
        PdeSpec::WaveSystem => Ok(Box::new(WaveSystemStepper::new(grid, dt)?)),
        PdeSpec::IntegroDiff { nu, gamma } => {
            Ok(Box::new(IntegroDiffStepper::new(grid, *nu, *gamma, dt)?))
        }
        PdeSpec::AdvDiff2D { .. } => Err(invalid_arg(
            "2D advection-diffusion uses the fine-grid reference solver, not a nodal stepper",
        )),
    }
}

/// Iterate a stepper from an initial condition.
pub fn solve_trajectory(
    stepper: &dyn Stepper,
    ic: &NodalState,
    dt: f64,
    steps: usize,
) -> Result<TrajectorySequence> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(ic.with_time(0.0));
    for k in 0..steps {
        let next = stepper.step(&states[k])?;
        states.push(next.with_time((k + 1) as f64 * dt));
    }
    TrajectorySequence::new(states, dt)
}

/// Randomized initial-condition source for dataset generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcSampler {
    Fourier { spec: FourierCoeffSpec },
    PiecewiseConstant,
    /// Independent Fourier draws for each system component.
    SystemFourier { spec: FourierCoeffSpec, components: usize },
    #[serde(rename = "sine_2d")]
    Sine2D { n_c: usize },
    #[serde(rename = "gaussian_2d")]
    Gaussian2D { c: f64, mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64 },
    /// Weighted mixture; the component is drawn per trajectory.
    Mixture { parts: Vec<MixturePart> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturePart {
    pub weight: f64,
    pub sampler: IcSampler,
}

impl IcSampler {
    pub fn sample(&self, grid: &GridSet, rng: &mut Rng) -> Result<NodalState> {
        match self {
            IcSampler::Fourier { spec } => sample_fourier_ic(spec, grid, rng),
            IcSampler::PiecewiseConstant => sample_piecewise_constant_ic(grid, rng),
            IcSampler::SystemFourier { spec, components } => {
                let parts: Result<Vec<NodalState>> = (0..*components)
                    .map(|_| sample_fourier_ic(spec, grid, rng))
                    .collect();
                crate::grid::concat_components(&parts?)
            }
            IcSampler::Sine2D { n_c } => sample_2d_sine_ic(*n_c, grid, rng),
            IcSampler::Gaussian2D {
                c,
                mu_x,
                mu_y,
                sigma_x,
                sigma_y,
            } => gaussian_2d_ic(*c, *mu_x, *mu_y, *sigma_x, *sigma_y, grid),
            IcSampler::Mixture { parts } => {
                let part = pick_mixture_part(parts, rng)?;
                part.sampler.sample(grid, rng)
            }
        }
    }

    /// Closed-form evaluation of a freshly drawn 2D initial condition. The
    /// fine-grid reference solver needs the IC away from the scattered
    /// nodes, so 2D samplers must be analytic.
    pub fn sample_2d_fn(&self, rng: &mut Rng) -> Result<Box<dyn Fn(f64, f64) -> f64>> {
        use std::f64::consts::PI;
        match self {
            IcSampler::Sine2D { n_c } => {
                let n_c = *n_c;
                // Same draw order as the nodal sampler: k-major, then
                // divided by (k + l).
                let mut coeffs = vec![0.0; n_c * n_c];
                for k in 1..=n_c {
                    for l in 1..=n_c {
                        coeffs[(k - 1) * n_c + (l - 1)] =
                            rng.uniform_in(-1.0, 1.0) / (k + l) as f64;
                    }
                }
                Ok(Box::new(move |x, y| {
                    let mut acc = 0.0;
                    for k in 1..=n_c {
                        let sx = (k as f64 * PI / 2.0 * (x + 1.0)).sin();
                        for l in 1..=n_c {
                            let sy = (l as f64 * PI / 2.0 * (y + 1.0)).sin();
                            acc += coeffs[(k - 1) * n_c + (l - 1)] * sx * sy;
                        }
                    }
                    acc
                }))
            }
            IcSampler::Gaussian2D {
                c,
                mu_x,
                mu_y,
                sigma_x,
                sigma_y,
            } => {
                let (c, mu_x, mu_y, sx, sy) = (*c, *mu_x, *mu_y, *sigma_x, *sigma_y);
                if sx <= 0.0 || sy <= 0.0 {
                    return Err(invalid_arg("Gaussian widths must be positive"));
                }
                let amp = c / (4.0 * PI * PI * sx * sx * sy * sy).sqrt();
                Ok(Box::new(move |x, y| {
                    let dx = (x - mu_x) / sx;
                    let dy = (y - mu_y) / sy;
                    amp * (-0.5 * dx * dx - 0.5 * dy * dy).exp()
                }))
            }
            IcSampler::Mixture { parts } => {
                let part = pick_mixture_part(parts, rng)?;
                part.sampler.sample_2d_fn(rng)
            }
            other => Err(invalid_arg(format!(
                "sampler {other:?} has no closed-form 2D evaluation"
            ))),
        }
    }
}

fn pick_mixture_part<'a>(parts: &'a [MixturePart], rng: &mut Rng) -> Result<&'a MixturePart> {
    let total: f64 = parts.iter().map(|p| p.weight).sum();
    if total <= 0.0 || parts.is_empty() {
        return Err(invalid_arg("mixture weights must sum to a positive value"));
    }
    let mut draw = rng.uniform() * total;
    for part in parts {
        draw -= part.weight;
        if draw < 0.0 {
            return Ok(part);
        }
    }
    Ok(parts.last().unwrap())
}

/// Generate M independent trajectories from seeded per-index substreams.
/// The result is identical no matter how generation is scheduled.
pub fn generate_dataset(
    spec: &PdeSpec,
    sampler: &IcSampler,
    grid: &GridSet,
    m: usize,
    n_l: usize,
    dt: f64,
    seed: u64,
) -> Result<TrajectoryDataset> {
    if m < 1 {
        return Err(invalid_arg("dataset needs at least one trajectory"));
    }
    let root = Rng::new(seed);

    if let PdeSpec::AdvDiff2D { kappa } = spec {
        let reference = AdvDiff2DReference::new(*kappa, two_d::DEFAULT_FINE_GRID, dt, true)?;
        let mut sequences = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = root.substream(i as u64);
            let ic = sampler.sample_2d_fn(&mut rng)?;
            sequences.push(reference.solve_sequence(ic.as_ref(), grid, n_l)?);
        }
        let meta = DatasetMeta {
            pde_name: spec.name().into(),
            sampler_seed: seed,
            substeps: reference.substeps(),
        };
        return TrajectoryDataset::new(grid.clone(), sequences, meta);
    }

    let stepper = make_stepper(spec, grid, dt)?;
    let mut sequences = Vec::with_capacity(m);
    for i in 0..m {
        let mut rng = root.substream(i as u64);
        let ic = sampler.sample(grid, &mut rng)?;
        sequences.push(solve_trajectory(stepper.as_ref(), &ic, dt, n_l)?);
    }
    let meta = DatasetMeta {
        pde_name: spec.name().into(),
        sampler_seed: seed,
        substeps: stepper.substeps(),
    };
    TrajectoryDataset::new(grid.clone(), sequences, meta)
}
