//! Iterating a trained model as a predictive solver and scoring it
//! against reference trajectories.

use crate::error::{invalid_arg, shape_mismatch, Result};
use crate::grid::{GridSet, NodalState, TrajectorySequence};
use crate::model::{model_apply, NetworkParams};
use crate::solvers::{make_stepper, solve_trajectory, PdeSpec};
use serde::{Deserialize, Serialize};

/// Relative-L2 denominators are floored here to keep zero references
/// finite.
pub const L2_FLOOR: f64 = 1e-14;

/// Rollouts whose relative L2 exceeds this are flagged as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e3;

/// A model rollout; the sequence is truncated at the first non-finite
/// state, recorded in `blowup_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sequence: TrajectorySequence,
    pub blowup_step: Option<usize>,
}

/// v0 = ic, v_{k+1} = N(v_k), up to `steps` model applications. Consumes
/// nodal values only — never coordinates.
pub fn predict(
    params: &NetworkParams,
    ic: &NodalState,
    steps: usize,
    dt: f64,
) -> Result<Prediction> {
    if ic.values().len() != params.dims.n {
        return Err(shape_mismatch(format!(
            "initial condition has {} values, network wants {}",
            ic.values().len(),
            params.dims.n
        )));
    }
    let mut states = vec![ic.with_time(0.0)];
    let mut blowup_step = None;
    for k in 0..steps {
        let next = model_apply(params, states[k].values())?;
        if !next.iter().all(|v| v.is_finite()) {
            blowup_step = Some(k + 1);
            break;
        }
        states.push(NodalState::new(
            next,
            (k + 1) as f64 * dt,
            ic.nodes(),
            ic.components(),
        )?);
    }
    Ok(Prediction {
        sequence: TrajectorySequence::new(states, dt)?,
        blowup_step,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReportMeta {
    pub model_hash: String,
    pub pde: String,
    pub ic: String,
}

/// Per-time error series of a prediction against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    /// ||v - u||_2 / max(||u||_2, floor) over the full state.
    pub rel_l2: Vec<f64>,
    pub l_inf: Vec<f64>,
    /// Component-wise relative L2, outer index = component.
    pub per_component_rel_l2: Vec<Vec<f64>>,
    /// First step whose error crossed the blow-up threshold (or where
    /// the rollout went non-finite), if any.
    pub blowup_step: Option<usize>,
    pub metadata: ReportMeta,
}

/// FNV-1a over the parameter bytes; stable content fingerprint.
pub fn model_hash(params: &NetworkParams) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in params.flatten() {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("{h:016x}")
}

fn rel_l2(pred: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = pred
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    num.sqrt() / den.sqrt().max(L2_FLOOR)
}

/// Score a prediction against an aligned reference trajectory.
pub fn compute_error_metrics(
    pred: &TrajectorySequence,
    reference: &TrajectorySequence,
    blowup_hint: Option<usize>,
    metadata: ReportMeta,
) -> Result<ErrorReport> {
    let k = pred.states().len().min(reference.states().len());
    if k == 0 {
        return Err(invalid_arg("empty trajectories"));
    }
    let components = pred.state(0).components();
    if components != reference.state(0).components()
        || pred.state(0).nodes() != reference.state(0).nodes()
    {
        return Err(shape_mismatch("prediction and reference layouts differ"));
    }
    let mut times = Vec::with_capacity(k);
    let mut l2 = Vec::with_capacity(k);
    let mut linf = Vec::with_capacity(k);
    let mut per_component = vec![Vec::with_capacity(k); components];
    let mut blowup_step = blowup_hint;
    for step in 0..k {
        let (p, u) = (pred.state(step), reference.state(step));
        if (p.time() - u.time()).abs() > 1e-9 * (1.0 + u.time().abs()) {
            return Err(invalid_arg("prediction and reference times disagree"));
        }
        times.push(u.time());
        let e2 = rel_l2(p.values(), u.values());
        l2.push(e2);
        linf.push(
            p.values()
                .iter()
                .zip(u.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        for c in 0..components {
            per_component[c].push(rel_l2(p.component(c), u.component(c)));
        }
        if e2 > BLOWUP_THRESHOLD && blowup_step.is_none() {
            blowup_step = Some(step);
        }
    }
    Ok(ErrorReport {
        times,
        rel_l2: l2,
        l_inf: linf,
        per_component_rel_l2: per_component,
        blowup_step,
        metadata,
    })
}

/// Roll the model out for T/dt steps, solve the reference PDE at the same
/// output times, and score. 1D specs only; the 2D experiment evaluates
/// through its fine-grid reference directly.
pub fn evaluate_against_reference(
    params: &NetworkParams,
    spec: &PdeSpec,
    ic: &NodalState,
    grid: &GridSet,
    t_final: f64,
    dt: f64,
    ic_label: &str,
) -> Result<ErrorReport> {
    if dt <= 0.0 || t_final <= 0.0 {
        return Err(invalid_arg("T and dt must be positive"));
    }
    let steps = (t_final / dt).round() as usize;
    if ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final {
        return Err(invalid_arg("T must be an integer multiple of dt"));
    }
    let prediction = predict(params, ic, steps, dt)?;
    let stepper = make_stepper(spec, grid, dt)?;
    let reference = solve_trajectory(stepper.as_ref(), ic, dt, steps)?;
    compute_error_metrics(
        &prediction.sequence,
        &reference,
        prediction.blowup_step,
        ReportMeta {
            model_hash: model_hash(params),
            pde: spec.name().into(),
            ic: ic_label.into(),
        },
    )
}

/// CSV slice of a trajectory: one row per node (x coordinate when the
/// grid is supplied, else the node index), one column per time.
pub fn trajectory_to_csv(seq: &TrajectorySequence, grid: Option<&GridSet>) -> String {
    let mut header = String::from("node");
    for s in seq.states() {
        header.push_str(&format!(",t={}", s.time()));
    }
    header.push('\n');
    let mut out = header;
    let nodes = seq.state(0).nodes();
    let components = seq.state(0).components();
    for c in 0..components {
        for i in 0..nodes {
            match grid {
                Some(g) if g.dim() == 1 => out.push_str(&format!("{:.17e}", g.node(i)[0])),
                Some(g) => out.push_str(&format!("{:.17e};{:.17e}", g.node(i)[0], g.node(i)[1])),
                None => out.push_str(&i.to_string()),
            }
            for s in seq.states() {
                out.push_str(&format!(",{:.17e}", s.component(c)[i]));
            }
            out.push('\n');
        }
    }
    out
}
