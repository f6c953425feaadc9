//! Grids, nodal states, trajectory datasets and permutations.
//!
//! Grids carry coordinates only for data generation and reporting. The
//! learning side never reads them: its inputs are nodal value vectors, so
//! a trained model works on permuted and unstructured node sets unchanged.

use crate::error::{invalid_arg, shape_mismatch, Result};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Problem domain the nodes live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Periodic interval [0, length).
    Periodic1D { length: f64 },
    /// The box [-1, 1]^2 with Dirichlet boundary.
    Box2D,
}

/// A set of N nodes with an explicit storage-to-generation permutation.
/// Carries no connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    dim: usize,
    /// Node coordinates, node-major: node i occupies [i*dim, (i+1)*dim).
    nodes: Vec<f64>,
    /// permutation[storage index] = original generation index.
    permutation: Vec<usize>,
    domain: Domain,
}

impl GridSet {
    pub fn new(dim: usize, nodes: Vec<f64>, permutation: Vec<usize>, domain: Domain) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid_arg(format!("dim must be 1 or 2, got {dim}")));
        }
        if nodes.len() % dim != 0 {
            return Err(shape_mismatch("node coordinate length not a multiple of dim"));
        }
        let n = nodes.len() / dim;
        if n < 2 {
            return Err(invalid_arg("grid needs at least 2 nodes"));
        }
        if !is_permutation(&permutation, n) {
            return Err(invalid_arg("permutation is not a bijection on 0..N"));
        }
        let grid = GridSet {
            dim,
            nodes,
            permutation,
            domain,
        };
        for i in 0..n {
            if !grid.node_in_domain(i) {
                return Err(invalid_arg(format!("node {i} lies outside the domain")));
            }
        }
        Ok(grid)
    }

    fn node_in_domain(&self, i: usize) -> bool {
        let p = self.node(i);
        match self.domain {
            Domain::Periodic1D { length } => p[0] >= 0.0 && p[0] < length,
            Domain::Box2D => p.iter().all(|&c| (-1.0..=1.0).contains(&c)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.nodes
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// True when node i equals i * length / N for every i.
    pub fn is_uniform_1d(&self) -> bool {
        match self.domain {
            Domain::Periodic1D { length } => {
                let n = self.len();
                (0..n).all(|i| self.nodes[i] == i as f64 * length / n as f64)
                    && self.permutation.iter().enumerate().all(|(i, &p)| i == p)
            }
            Domain::Box2D => false,
        }
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// Uniform periodic 1D grid with nodes i * domain_length / N.
pub fn make_uniform_periodic_grid(n: usize, domain_length: f64) -> Result<GridSet> {
    if n < 2 {
        return Err(invalid_arg(format!("grid size must be >= 2, got {n}")));
    }
    let nodes: Vec<f64> = (0..n).map(|i| i as f64 * domain_length / n as f64).collect();
    GridSet::new(
        1,
        nodes,
        (0..n).collect(),
        Domain::Periodic1D {
            length: domain_length,
        },
    )
}

/// Perturb each node of a uniform 1D grid by an i.i.d. offset in
/// [-fraction*h, +fraction*h] and shuffle the storage order. The shuffle is
/// recorded in the permutation field so the original ordering stays
/// recoverable for reporting.
pub fn perturb_and_permute_grid(grid: &GridSet, fraction: f64, seed: u64) -> Result<GridSet> {
    if !(0.0..0.5).contains(&fraction) {
        return Err(invalid_arg(format!(
            "perturbation fraction must be in [0, 0.5), got {fraction}"
        )));
    }
    let length = match grid.domain() {
        Domain::Periodic1D { length } => length,
        Domain::Box2D => return Err(invalid_arg("perturb_and_permute_grid expects a 1D grid")),
    };
    let n = grid.len();
    let h = length / n as f64;
    let mut rng = Rng::new(seed);
    let mut coords: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.nodes[i] + rng.uniform_in(-fraction * h, fraction * h);
            // Keep nodes inside [0, length) under periodic wrap.
            x.rem_euclid(length)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let shuffled: Vec<f64> = order.iter().map(|&i| coords[i]).collect();
    coords = shuffled;
    let permutation: Vec<usize> = order.iter().map(|&i| grid.permutation[i]).collect();
    GridSet::new(1, coords, permutation, grid.domain())
}

/// Solution values over a grid at one time instant. For systems the L
/// components are stored component-major: all of u1, then all of u2, ...
#[derive(Debug, Clone, PartialEq)]
pub struct NodalState {
    values: Vec<f64>,
    time: f64,
    nodes: usize,
    components: usize,
}

impl NodalState {
    pub fn new(values: Vec<f64>, time: f64, nodes: usize, components: usize) -> Result<Self> {
        if values.len() != nodes * components {
            return Err(shape_mismatch(format!(
                "state has {} values, layout wants {}x{}",
                values.len(),
                nodes,
                components
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(crate::error::Error::NonFinite("nodal state".into()));
        }
        if time < 0.0 {
            return Err(invalid_arg("state time must be non-negative"));
        }
        Ok(NodalState {
            values,
            time,
            nodes,
            components,
        })
    }

    pub fn scalar(values: Vec<f64>, time: f64) -> Result<Self> {
        let n = values.len();
        NodalState::new(values, time, n, 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c * self.nodes..(c + 1) * self.nodes]
    }

    pub fn with_time(&self, time: f64) -> NodalState {
        NodalState {
            time,
            ..self.clone()
        }
    }

    pub fn with_values(&self, values: Vec<f64>, time: f64) -> Result<NodalState> {
        NodalState::new(values, time, self.nodes, self.components)
    }
}

/// Reorder a state's nodes: output node i takes input node perm[i], applied
/// within each component block.
pub fn apply_permutation(state: &NodalState, perm: &[usize]) -> Result<NodalState> {
    if perm.len() != state.nodes() {
        return Err(shape_mismatch(format!(
            "permutation length {} vs {} nodes",
            perm.len(),
            state.nodes()
        )));
    }
    if !is_permutation(perm, state.nodes()) {
        return Err(invalid_arg("not a bijection"));
    }
    let n = state.nodes();
    let mut values = Vec::with_capacity(state.values.len());
    for c in 0..state.components() {
        let block = state.component(c);
        values.extend(perm.iter().map(|&p| block[p]));
        let _ = c;
        debug_assert_eq!(values.len() % n, 0);
    }
    NodalState::new(values, state.time(), state.nodes(), state.components())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Concatenate states over the same grid and time into one system state,
/// component-major.
pub fn concat_components(states: &[NodalState]) -> Result<NodalState> {
    let first = states
        .first()
        .ok_or_else(|| invalid_arg("concat_components needs at least one state"))?;
    let n = first.nodes();
    let t = first.time();
    let mut values = Vec::new();
    let mut components = 0;
    for s in states {
        if s.nodes() != n {
            return Err(shape_mismatch("states disagree on node count"));
        }
        if s.time() != t {
            return Err(invalid_arg("states disagree on time"));
        }
        values.extend_from_slice(s.values());
        components += s.components();
    }
    NodalState::new(values, t, n, components)
}

/// Inverse of [`concat_components`]: split back into scalar states.
pub fn split_components(state: &NodalState) -> Vec<NodalState> {
    (0..state.components())
        .map(|c| NodalState::scalar(state.component(c).to_vec(), state.time()).expect("finite block"))
        .collect()
}

/// One trajectory: n_L + 1 snapshots with a fixed step. Times are relative
/// to the sequence start, so state k sits at k * dt.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySequence {
    states: Vec<NodalState>,
    dt: f64,
}

impl TrajectorySequence {
    pub fn new(states: Vec<NodalState>, dt: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(invalid_arg("sequence needs at least one state"));
        }
        if dt <= 0.0 {
            return Err(invalid_arg("dt must be positive"));
        }
        let (n, l) = (states[0].nodes(), states[0].components());
        for (k, s) in states.iter().enumerate() {
            if s.nodes() != n || s.components() != l {
                return Err(shape_mismatch("sequence states disagree on layout"));
            }
            let expected = k as f64 * dt;
            if (s.time() - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(invalid_arg(format!(
                    "state {k} has time {} instead of {expected}",
                    s.time()
                )));
            }
        }
        Ok(TrajectorySequence { states, dt })
    }

    pub fn states(&self) -> &[NodalState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &NodalState {
        &self.states[k]
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// Dataset metadata carried alongside the binary payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DatasetMeta {
    pub pde_name: String,
    pub sampler_seed: u64,
    /// Internal oracle sub-steps taken per output step.
    pub substeps: u32,
}

/// M trajectory sequences over one grid with identical n_L, dt and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    grid: GridSet,
    sequences: Vec<TrajectorySequence>,
    meta: DatasetMeta,
}

impl TrajectoryDataset {
    pub fn new(grid: GridSet, sequences: Vec<TrajectorySequence>, meta: DatasetMeta) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| invalid_arg("dataset needs at least one sequence"))?;
        let (n_l, dt, n, l) = (
            first.steps(),
            first.dt(),
            first.state(0).nodes(),
            first.state(0).components(),
        );
        if n != grid.len() {
            return Err(shape_mismatch("sequence node count disagrees with grid"));
        }
        for s in &sequences {
            if s.steps() != n_l
                || s.dt() != dt
                || s.state(0).nodes() != n
                || s.state(0).components() != l
            {
                return Err(shape_mismatch("sequences disagree on (n_L, dt, layout)"));
            }
        }
        Ok(TrajectoryDataset {
            grid,
            sequences,
            meta,
        })
    }

    pub fn grid(&self) -> &GridSet {
        &self.grid
    }

    pub fn sequences(&self) -> &[TrajectorySequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn n_l(&self) -> usize {
        self.sequences[0].steps()
    }

    pub fn dt(&self) -> f64 {
        self.sequences[0].dt()
    }

    pub fn components(&self) -> usize {
        self.sequences[0].state(0).components()
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_grid_nodes() {
        let g = make_uniform_periodic_grid(4, 2.0 * PI).unwrap();
        let expect = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(g.node(i)[0], *e);
        }
        assert!(g.is_uniform_1d());

        let g50 = make_uniform_periodic_grid(50, 2.0 * PI).unwrap();
        assert_eq!(g50.len(), 50);
        assert!((g50.node(1)[0] - 2.0 * PI / 50.0).abs() < 1e-15);

        let g2 = make_uniform_periodic_grid(2, 2.0 * PI).unwrap();
        assert_eq!(g2.node(0)[0], 0.0);
        assert_eq!(g2.node(1)[0], PI);
    }

    #[test]
    fn uniform_grid_rejects_small_n() {
        assert!(make_uniform_periodic_grid(1, 2.0 * PI).is_err());
    }

    #[test]
    fn perturb_zero_fraction_keeps_coordinates() {
        let g = make_uniform_periodic_grid(16, 2.0 * PI).unwrap();
        let p = perturb_and_permute_grid(&g, 0.0, 11).unwrap();
        // Same coordinate multiset, shuffled order.
        let mut a: Vec<f64> = g.coords().to_vec();
        let mut b: Vec<f64> = p.coords().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        assert_ne!(g.coords(), p.coords());
    }

    #[test]
    fn perturb_respects_fraction_bound() {
        let g = make_uniform_periodic_grid(32, 2.0 * PI).unwrap();
        let h = 2.0 * PI / 32.0;
        let p = perturb_and_permute_grid(&g, 0.25, 3).unwrap();
        let inv = invert_permutation(p.permutation());
        for orig in 0..32 {
            let moved = p.node(inv[orig])[0];
            let base = g.node(orig)[0];
            let mut d = (moved - base).abs();
            d = d.min(2.0 * PI - d); // periodic distance
            assert!(d <= 0.25 * h + 1e-12, "node {orig} moved {d}");
        }
    }

    #[test]
    fn perturb_is_deterministic_and_validates_fraction() {
        let g = make_uniform_periodic_grid(10, 2.0 * PI).unwrap();
        let a = perturb_and_permute_grid(&g, 0.2, 5).unwrap();
        let b = perturb_and_permute_grid(&g, 0.2, 5).unwrap();
        assert_eq!(a, b);
        assert!(perturb_and_permute_grid(&g, 0.5, 5).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let s = NodalState::scalar(vec![1.0, 2.0, 3.0], 0.0).unwrap();
        let rev = [2usize, 1, 0];
        let p = apply_permutation(&s, &rev).unwrap();
        assert_eq!(p.values(), &[3.0, 2.0, 1.0]);
        let back = apply_permutation(&p, &invert_permutation(&rev)).unwrap();
        assert_eq!(back.values(), s.values());

        let id = [0usize, 1, 2];
        assert_eq!(apply_permutation(&s, &id).unwrap().values(), s.values());
    }

    #[test]
    fn permutation_applies_per_component() {
        let s = NodalState::new(vec![1.0, 2.0, 10.0, 20.0], 0.0, 2, 2).unwrap();
        let swapped = apply_permutation(&s, &[1, 0]).unwrap();
        assert_eq!(swapped.values(), &[2.0, 1.0, 20.0, 10.0]);
    }

    #[test]
    fn permutation_length_mismatch() {
        let s = NodalState::scalar(vec![1.0, 2.0, 3.0], 0.0).unwrap();
        assert!(apply_permutation(&s, &[0, 1]).is_err());
    }

    #[test]
    fn concat_and_split_round_trip() {
        let a = NodalState::scalar(vec![1.0; 50], 0.5).unwrap();
        let b = NodalState::scalar(vec![2.0; 50], 0.5).unwrap();
        let u = concat_components(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(u.values().len(), 100);
        assert_eq!(u.components(), 2);
        let parts = split_components(&u);
        assert_eq!(parts[0].values(), a.values());
        assert_eq!(parts[1].values(), b.values());

        let single = concat_components(&[a.clone()]).unwrap();
        assert_eq!(single.values(), a.values());
    }

    #[test]
    fn sequence_checks_times() {
        let dt = 0.1;
        let s0 = NodalState::scalar(vec![0.0; 4], 0.0).unwrap();
        let s1 = NodalState::scalar(vec![0.0; 4], dt).unwrap();
        assert!(TrajectorySequence::new(vec![s0.clone(), s1], dt).is_ok());
        let wrong = NodalState::scalar(vec![0.0; 4], 0.3).unwrap();
        assert!(TrajectorySequence::new(vec![s0, wrong], dt).is_err());
    }
}
