//! The evolution-operator network: J parallel disassembly FNNs, one
//! shared row-wise assembly FNN, an optional lifting map and the ResNet
//! skip connection. Forward passes run over batches stored as N x B
//! matrices; the model never sees node coordinates.

use crate::autodiff::{NodeId, Tape};
use crate::error::{invalid_arg, shape_mismatch, Error, Result};
use crate::linalg::Tensor;
use crate::rng::Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// How the n_w-wide assembly output maps back to the N nodal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lift {
    /// No-op; requires n_w = N.
    Identity,
    /// A plain affine map n_w -> N (model-reduction mode).
    Affine,
}

/// Architecture hyper-parameters. `n` is the full input size (N·L for
/// systems), `j` the thickness, `n_d`/`n_a` the disassembly and assembly
/// depths in affine layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDims {
    pub n: usize,
    pub n_w: usize,
    pub n_d: usize,
    pub j: usize,
    pub n_a: usize,
    pub lift: Lift,
}

impl NetworkDims {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n_w < 1 || self.n_d < 1 || self.j < 1 || self.n_a < 1 {
            return Err(invalid_arg("all network dimensions must be >= 1"));
        }
        if self.lift == Lift::Identity && self.n_w != self.n {
            return Err(invalid_arg(format!(
                "identity lift requires n_w = N, got n_w = {} and N = {}",
                self.n_w, self.n
            )));
        }
        Ok(())
    }

    /// Total scalar parameter count for these dims.
    pub fn param_count(&self) -> usize {
        let (n, n_w, n_d, j, n_a) = (self.n, self.n_w, self.n_d, self.j, self.n_a);
        let disassembly = j * (n * n_w + n_w + (n_d - 1) * (n_w * n_w + n_w));
        let assembly = (n_a - 1) * (j * j + j) + (j + 1);
        let lift = match self.lift {
            Lift::Identity => 0,
            Lift::Affine => n_w * n + n,
        };
        disassembly + assembly + lift
    }
}

/// One affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w: Tensor,
    pub b: Tensor,
}

/// Full parameter set. The canonical flat order — used by the optimizer,
/// the gradient store and the NPMC file — is: disassembly nets in order,
/// each layer's W row-major then b; assembly layers; lift.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub dims: NetworkDims,
    pub disassembly: Vec<Vec<LayerParams>>,
    pub assembly: Vec<LayerParams>,
    pub lift: Option<LayerParams>,
    pub init_seed: u64,
}

/// Down-scaling applied to the Glorot draw for disassembly layers: the
/// learned increment is near-linear in the state, so starting tanh in
/// its linear regime avoids early saturation plateaus.
const DISASSEMBLY_INIT_SCALE: f64 = 0.1;

/// Near-identity initialization: Glorot-uniform weights
/// (±sqrt(6/(fan_in+fan_out))) with zero biases, the disassembly draw
/// scaled by [`DISASSEMBLY_INIT_SCALE`], and the final assembly layer
/// zeroed so the ResNet starts as the exact identity map. Deterministic
/// per seed.
pub fn init_params(dims: NetworkDims, seed: u64) -> Result<NetworkParams> {
    dims.validate()?;
    let mut rng = Rng::new(seed);
    let mut glorot = |rows: usize, cols: usize| {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.uniform_in(-bound, bound))
            .collect();
        LayerParams {
            w: Tensor::from_vec(rows, cols, data),
            b: Tensor::zeros(rows, 1),
        }
    };

    let disassembly = (0..dims.j)
        .map(|_| {
            (0..dims.n_d)
                .map(|l| {
                    let layer = if l == 0 {
                        glorot(dims.n_w, dims.n)
                    } else {
                        glorot(dims.n_w, dims.n_w)
                    };
                    LayerParams {
                        w: layer.w.scaled(DISASSEMBLY_INIT_SCALE),
                        b: layer.b,
                    }
                })
                .collect()
        })
        .collect();
    let assembly = (0..dims.n_a)
        .map(|l| {
            if l + 1 == dims.n_a {
                // Zero output layer: the model starts as the identity.
                LayerParams {
                    w: Tensor::zeros(1, dims.j),
                    b: Tensor::zeros(1, 1),
                }
            } else {
                glorot(dims.j, dims.j)
            }
        })
        .collect();
    let lift = match dims.lift {
        Lift::Identity => None,
        Lift::Affine => Some(glorot(dims.n, dims.n_w)),
    };
    Ok(NetworkParams {
        dims,
        disassembly,
        assembly,
        lift,
        init_seed: seed,
    })
}

impl NetworkParams {
    fn layers(&self) -> impl Iterator<Item = &LayerParams> {
        self.disassembly
            .iter()
            .flatten()
            .chain(self.assembly.iter())
            .chain(self.lift.iter())
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut LayerParams> {
        self.disassembly
            .iter_mut()
            .flatten()
            .chain(self.assembly.iter_mut())
            .chain(self.lift.iter_mut())
    }

    /// Parameters in canonical flat order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dims.param_count());
        for layer in self.layers() {
            out.extend_from_slice(layer.w.data());
            out.extend_from_slice(layer.b.data());
        }
        out
    }

    /// Overwrite every parameter from a canonical flat slice.
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.dims.param_count() {
            return Err(shape_mismatch(format!(
                "flat parameter vector has {} entries, dims want {}",
                flat.len(),
                self.dims.param_count()
            )));
        }
        let mut at = 0;
        for layer in self.layers_mut() {
            let wn = layer.w.data().len();
            layer.w.data_mut().copy_from_slice(&flat[at..at + wn]);
            at += wn;
            let bn = layer.b.data().len();
            layer.b.data_mut().copy_from_slice(&flat[at..at + bn]);
            at += bn;
        }
        debug_assert_eq!(at, flat.len());
        Ok(())
    }

    /// Set every weight and bias to zero (makes the model the identity).
    pub fn zeroed(dims: NetworkDims) -> Result<NetworkParams> {
        let mut p = init_params(dims, 0)?;
        let n = p.dims.param_count();
        p.assign_flat(&vec![0.0; n])?;
        Ok(p)
    }
}

/// Tape node ids of every registered parameter, mirroring NetworkParams.
pub struct ParamNodes {
    pub disassembly: Vec<Vec<(NodeId, NodeId)>>,
    pub assembly: Vec<(NodeId, NodeId)>,
    pub lift: Option<(NodeId, NodeId)>,
}

impl ParamNodes {
    /// Node ids in canonical flat order (w before b per layer).
    pub fn all(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for net in &self.disassembly {
            for &(w, b) in net {
                out.push(w);
                out.push(b);
            }
        }
        for &(w, b) in &self.assembly {
            out.push(w);
            out.push(b);
        }
        if let Some((w, b)) = self.lift {
            out.push(w);
            out.push(b);
        }
        out
    }
}

/// Register every parameter tensor as a tape input.
pub fn register_params(tape: &mut Tape, params: &NetworkParams) -> ParamNodes {
    let mut reg = |layer: &LayerParams| {
        let w = tape.input(layer.w.clone());
        let b = tape.input(layer.b.clone());
        (w, b)
    };
    let disassembly = params
        .disassembly
        .iter()
        .map(|net| net.iter().map(&mut reg).collect())
        .collect();
    let assembly = params.assembly.iter().map(&mut reg).collect();
    let lift = params.lift.as_ref().map(&mut reg);
    ParamNodes {
        disassembly,
        assembly,
        lift,
    }
}

/// Record the full model on the tape: x (N x B) -> x + F[A(N_1(x),...)].
pub fn model_forward_on_tape(
    tape: &mut Tape,
    nodes: &ParamNodes,
    dims: &NetworkDims,
    x: NodeId,
) -> Result<NodeId> {
    let batch = tape.value(x).cols();
    if tape.value(x).rows() != dims.n {
        return Err(shape_mismatch(format!(
            "model input has {} rows, dims want {}",
            tape.value(x).rows(),
            dims.n
        )));
    }

    // Disassembly: J parallel FNNs, each (tanh . affine)^{n_d}.
    let mut columns = Vec::with_capacity(dims.j);
    for net in &nodes.disassembly {
        let mut h = x;
        for &(w, b) in net {
            let a = tape.affine(w, b, h)?;
            h = tape.tanh(a);
        }
        columns.push(h);
    }

    // Restructure: J blocks of n_w x B become a J x (n_w·B) matrix whose
    // column (r, b) carries the J features of row r, batch b.
    let flats: Vec<NodeId> = columns
        .iter()
        .map(|&c| tape.reshape(c, 1, dims.n_w * batch))
        .collect::<Result<_>>()?;
    let mut a = tape.concat_rows(&flats)?;

    // Shared assembly: n_a - 1 hidden tanh layers of width J, then a
    // linear J -> 1 read-out, applied to every (row, batch) column.
    for (l, &(w, b)) in nodes.assembly.iter().enumerate() {
        a = tape.affine(w, b, a)?;
        if l + 1 < nodes.assembly.len() {
            a = tape.tanh(a);
        }
    }
    let assembled = tape.reshape(a, dims.n_w, batch)?;

    let lifted = match (&nodes.lift, dims.lift) {
        (None, Lift::Identity) => assembled,
        (Some((w, b)), Lift::Affine) => tape.affine(*w, *b, assembled)?,
        _ => return Err(invalid_arg("lift parameters disagree with dims")),
    };
    tape.add(x, lifted)
}

/// Plain (tape-free) forward pass over a batch.
pub fn model_forward(params: &NetworkParams, x: &Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let nodes = register_params(&mut tape, params);
    let xin = tape.input(x.clone());
    let out = model_forward_on_tape(&mut tape, &nodes, &params.dims, xin)?;
    Ok(tape.value(out).clone())
}

/// Apply the model to a single state vector.
pub fn model_apply(params: &NetworkParams, w: &[f64]) -> Result<Vec<f64>> {
    let x = Tensor::from_vec(w.len(), 1, w.to_vec());
    Ok(model_forward(params, &x)?.data().to_vec())
}

/// Conjugate the parameters by a node permutation so the model commutes
/// with reordering: model(conj(Θ, p), p·w) = p·model(Θ, w). `perm` uses
/// the dataset convention: output node i reads input node perm[i].
pub fn conjugate_params_by_permutation(
    params: &NetworkParams,
    perm: &[usize],
) -> Result<NetworkParams> {
    let dims = params.dims;
    if dims.lift != Lift::Identity {
        return Err(invalid_arg(
            "conjugation is defined for the identity lift (n_w = N)",
        ));
    }
    if perm.len() != dims.n {
        return Err(shape_mismatch("permutation length disagrees with N"));
    }
    let mut out = params.clone();
    for net in &mut out.disassembly {
        for layer in net {
            // W' = P W P^T, b' = P b.
            let src = &layer.w;
            let mut w = Tensor::zeros(src.rows(), src.cols());
            for i in 0..src.rows() {
                for k in 0..src.cols() {
                    w.set(i, k, src.get(perm[i], perm[k]));
                }
            }
            let mut b = Tensor::zeros(layer.b.rows(), 1);
            for i in 0..b.rows() {
                b.set(i, 0, layer.b.get(perm[i], 0));
            }
            layer.w = w;
            layer.b = b;
        }
    }
    Ok(out)
}

pub const NPMC_MAGIC: &[u8; 4] = b"NPMC";
pub const NPMC_VERSION: u32 = 1;

fn lift_tag(lift: Lift) -> u32 {
    match lift {
        Lift::Identity => 0,
        Lift::Affine => 1,
    }
}

/// Serialize a checkpoint: magic, version, dims record (6 x u32 +
/// lift tag), u64 parameter count, raw parameters in canonical order,
/// then a length-prefixed JSON history trailer.
pub fn checkpoint_to_bytes(
    params: &NetworkParams,
    history: &crate::training::TrainHistory,
) -> Result<Vec<u8>> {
    let dims = params.dims;
    let flat = params.flatten();
    let history_json = serde_json::to_vec(history)?;

    let mut out = Vec::with_capacity(48 + flat.len() * 8 + history_json.len());
    out.extend_from_slice(NPMC_MAGIC);
    out.extend_from_slice(&NPMC_VERSION.to_le_bytes());
    for v in [
        dims.n as u32,
        dims.n_w as u32,
        dims.n_d as u32,
        dims.j as u32,
        dims.n_a as u32,
        0u32, // reserved
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&lift_tag(dims.lift).to_le_bytes());
    out.extend_from_slice(&(flat.len() as u64).to_le_bytes());
    for v in &flat {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(history_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&history_json);
    Ok(out)
}

/// Parse a checkpoint produced by [`checkpoint_to_bytes`].
pub fn checkpoint_from_reader(
    mut r: impl Read,
) -> Result<(NetworkParams, crate::training::TrainHistory)> {
    let trunc = |context: &'static str| Error::Truncated { context };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| trunc("magic"))?;
    if &magic != NPMC_MAGIC {
        return Err(Error::BadMagic { expected: "NPMC" });
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut dyn Read, ctx: &'static str| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|_| trunc(ctx))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r, "version")?;
    if version != NPMC_VERSION {
        return Err(Error::UnsupportedVersion { found: version });
    }
    let n = read_u32(&mut r, "dims")? as usize;
    let n_w = read_u32(&mut r, "dims")? as usize;
    let n_d = read_u32(&mut r, "dims")? as usize;
    let j = read_u32(&mut r, "dims")? as usize;
    let n_a = read_u32(&mut r, "dims")? as usize;
    let _reserved = read_u32(&mut r, "dims")?;
    let lift = match read_u32(&mut r, "lift tag")? {
        0 => Lift::Identity,
        1 => Lift::Affine,
        t => {
            return Err(invalid_arg(format!("unknown lift tag {t}")));
        }
    };
    let dims = NetworkDims {
        n,
        n_w,
        n_d,
        j,
        n_a,
        lift,
    };
    dims.validate()?;

    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf).map_err(|_| trunc("param count"))?;
    let count = u64::from_le_bytes(u64buf) as usize;
    if count != dims.param_count() {
        return Err(shape_mismatch(format!(
            "checkpoint stores {count} parameters, dims want {}",
            dims.param_count()
        )));
    }
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw).map_err(|_| trunc("parameters"))?;
    let flat: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    r.read_exact(&mut u64buf).map_err(|_| trunc("history length"))?;
    let hist_len = u64::from_le_bytes(u64buf) as usize;
    let mut hist_raw = vec![0u8; hist_len];
    r.read_exact(&mut hist_raw).map_err(|_| trunc("history"))?;
    let history = serde_json::from_slice(&hist_raw)?;

    let mut params = NetworkParams::zeroed(dims)?;
    params.assign_flat(&flat)?;
    Ok((params, history))
}

pub fn save_checkpoint(
    params: &NetworkParams,
    history: &crate::training::TrainHistory,
    path: &Path,
) -> Result<()> {
    let bytes = checkpoint_to_bytes(params, history)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(NetworkParams, crate::training::TrainHistory)> {
    checkpoint_from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dims() -> NetworkDims {
        NetworkDims {
            n: 4,
            n_w: 4,
            n_d: 2,
            j: 3,
            n_a: 2,
            lift: Lift::Identity,
        }
    }

    #[test]
    fn param_count_matches_enumeration() {
        let mut rng = Rng::new(17);
        for _ in 0..10 {
            let n = rng.int_in(1, 6) as usize;
            let affine = rng.uniform() < 0.5;
            let dims = NetworkDims {
                n,
                n_w: if affine { rng.int_in(1, 6) as usize } else { n },
                n_d: rng.int_in(1, 3) as usize,
                j: rng.int_in(1, 4) as usize,
                n_a: rng.int_in(1, 3) as usize,
                lift: if affine { Lift::Affine } else { Lift::Identity },
            };
            let p = init_params(dims, 5).unwrap();
            assert_eq!(p.flatten().len(), dims.param_count(), "{dims:?}");
        }
    }

    #[test]
    fn spec_default_dims_parameter_count() {
        // dims (50, 50, 1, 5, 1): 5·(50·50 + 50) + (5 + 1) = 12756.
        let dims = NetworkDims {
            n: 50,
            n_w: 50,
            n_d: 1,
            j: 5,
            n_a: 1,
            lift: Lift::Identity,
        };
        assert_eq!(dims.param_count(), 12756);
    }

    #[test]
    fn init_is_deterministic_and_biases_zero() {
        let a = init_params(small_dims(), 7).unwrap();
        let b = init_params(small_dims(), 7).unwrap();
        assert_eq!(a, b);
        let c = init_params(small_dims(), 8).unwrap();
        assert_ne!(a, c);
        for layer in a.disassembly.iter().flatten().chain(a.assembly.iter()) {
            assert!(layer.b.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn zero_params_give_identity() {
        let p = NetworkParams::zeroed(small_dims()).unwrap();
        let w = vec![0.3, -1.2, 0.0, 2.5];
        let out = model_apply(&p, &w).unwrap();
        assert_eq!(out, w);
    }

    #[test]
    fn assembly_bias_shifts_every_node() {
        let mut p = NetworkParams::zeroed(small_dims()).unwrap();
        // Final assembly layer is linear; its bias lands on every row.
        p.assembly.last_mut().unwrap().b.set(0, 0, 0.25);
        let out = model_apply(&p, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(out, vec![1.25, 2.25, 3.25, 4.25]);
    }

    #[test]
    fn identity_lift_requires_matching_widths() {
        let dims = NetworkDims {
            n: 4,
            n_w: 5,
            n_d: 1,
            j: 1,
            n_a: 1,
            lift: Lift::Identity,
        };
        assert!(dims.validate().is_err());
    }

    #[test]
    fn batch_forward_matches_per_column() {
        let p = init_params(small_dims(), 3).unwrap();
        let cols: Vec<Vec<f64>> = vec![
            vec![0.1, -0.4, 0.8, 0.0],
            vec![1.0, 1.0, -1.0, 0.5],
        ];
        let mut batch = Tensor::zeros(4, 2);
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                batch.set(r, c, *v);
            }
        }
        let out = model_forward(&p, &batch).unwrap();
        for (c, col) in cols.iter().enumerate() {
            let single = model_apply(&p, col).unwrap();
            for r in 0..4 {
                assert!((out.get(r, c) - single[r]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn assembly_rows_are_independent() {
        let p = init_params(small_dims(), 11).unwrap();
        let base = vec![0.2, -0.1, 0.4, 0.7];
        let out0 = model_apply(&p, &base).unwrap();
        // Changing one input entry changes the skip connection everywhere,
        // so probe row independence at the disassembly level instead: a
        // permuted disassembly input permutes the assembly output rows.
        // Covered by the equivariance test; here check shared parameters
        // via two identical rows producing identical outputs.
        let dims = NetworkDims {
            n: 2,
            n_w: 2,
            n_d: 1,
            j: 2,
            n_a: 2,
            lift: Lift::Identity,
        };
        let mut q = init_params(dims, 1).unwrap();
        // Make both disassembly nets treat the two inputs symmetrically.
        for net in &mut q.disassembly {
            for layer in net {
                let d = layer.w.get(0, 0);
                let o = layer.w.get(0, 1);
                layer.w = Tensor::from_vec(2, 2, vec![d, o, o, d]);
                layer.b = Tensor::from_vec(2, 1, vec![0.1, 0.1]);
            }
        }
        let sym = model_apply(&q, &[0.6, 0.6]).unwrap();
        assert!((sym[0] - sym[1]).abs() < 1e-14);
        let _ = out0;
    }

    #[test]
    fn conjugation_equivariance() {
        let mut rng = Rng::new(5);
        let dims = NetworkDims {
            n: 6,
            n_w: 6,
            n_d: 2,
            j: 2,
            n_a: 2,
            lift: Lift::Identity,
        };
        for trial in 0..5 {
            let p = init_params(dims, 100 + trial).unwrap();
            let mut perm: Vec<usize> = (0..6).collect();
            rng.shuffle(&mut perm);
            let w: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let pw: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
            let conj = conjugate_params_by_permutation(&p, &perm).unwrap();
            let lhs = model_apply(&conj, &pw).unwrap();
            let base = model_apply(&p, &w).unwrap();
            let rhs: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn conjugation_round_trip_restores_params() {
        let p = init_params(small_dims(), 21).unwrap();
        let perm = vec![2usize, 0, 3, 1];
        let inv = crate::grid::invert_permutation(&perm);
        let back =
            conjugate_params_by_permutation(&conjugate_params_by_permutation(&p, &perm).unwrap(), &inv)
                .unwrap();
        let (a, b) = (p.flatten(), back.flatten());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let p = init_params(small_dims(), 9).unwrap();
        let history = crate::training::TrainHistory::default();
        let bytes = checkpoint_to_bytes(&p, &history).unwrap();
        let (q, h) = checkpoint_from_reader(&bytes[..]).unwrap();
        assert_eq!(p.dims, q.dims);
        assert_eq!(p.flatten(), q.flatten());
        assert_eq!(history, h);
        assert_eq!(checkpoint_to_bytes(&q, &h).unwrap(), bytes);
    }

    #[test]
    fn checkpoint_rejects_corruption() {
        let p = init_params(small_dims(), 9).unwrap();
        let history = crate::training::TrainHistory::default();
        let good = checkpoint_to_bytes(&p, &history).unwrap();

        let mut magic = good.clone();
        magic[0] = b'Z';
        assert!(matches!(
            checkpoint_from_reader(&magic[..]),
            Err(Error::BadMagic { .. })
        ));

        let mut version = good.clone();
        version[4..8].copy_from_slice(&9u32.to_le_bytes());
        assert!(matches!(
            checkpoint_from_reader(&version[..]),
            Err(Error::UnsupportedVersion { found: 9 })
        ));

        let short = &good[..good.len() - 2];
        assert!(checkpoint_from_reader(short).is_err());
    }
}
