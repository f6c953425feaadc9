//! Tape-based reverse-mode automatic differentiation.
//!
//! Nodes hold dense matrices; batches travel as extra columns. The
//! primitive set is deliberately tiny — affine, tanh, add, scale, row
//! concatenation, reshape and a sum-of-squares reduction — everything the
//! network and the recurrent loss need, with no general broadcasting.

use crate::error::{invalid_arg, shape_mismatch, Result};
use crate::linalg::Tensor;

pub type NodeId = usize;

enum Op {
    /// Leaf: parameter or data. No backward rule.
    Input,
    /// y = W x + b 1^T (bias column broadcast across batch columns).
    Affine { w: NodeId, b: NodeId, x: NodeId },
    Tanh { x: NodeId },
    Add { a: NodeId, b: NodeId },
    Scale { x: NodeId, c: f64 },
    /// Vertical stack of equally-wide blocks.
    ConcatRows { parts: Vec<NodeId> },
    /// Row-major relabeling of the same data.
    Reshape { x: NodeId },
    /// Scalar sum of squared entries.
    SumSquares { x: NodeId },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Append-only record of a forward computation; one backward sweep per
/// recorded composite.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drop every recorded node so the tape can host a fresh forward.
    pub fn reset(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    /// Record a leaf holding data or parameters.
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Input)
    }

    /// y = W x + b 1^T. `b` must be a column matching W's row count.
    pub fn affine(&mut self, w: NodeId, b: NodeId, x: NodeId) -> Result<NodeId> {
        let (wt, bt, xt) = (&self.nodes[w].value, &self.nodes[b].value, &self.nodes[x].value);
        if wt.cols() != xt.rows() || bt.rows() != wt.rows() || bt.cols() != 1 {
            return Err(shape_mismatch(format!(
                "affine: W {}x{}, b {}x{}, x {}x{}",
                wt.rows(),
                wt.cols(),
                bt.rows(),
                bt.cols(),
                xt.rows(),
                xt.cols()
            )));
        }
        let mut y = wt.matmul(xt);
        for r in 0..y.rows() {
            let add = bt.get(r, 0);
            for c in 0..y.cols() {
                y.set(r, c, y.get(r, c) + add);
            }
        }
        Ok(self.push(y, Op::Affine { w, b, x }))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let y = self.nodes[x].value.map(f64::tanh);
        self.push(y, Op::Tanh { x })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (at, bt) = (&self.nodes[a].value, &self.nodes[b].value);
        if at.rows() != bt.rows() || at.cols() != bt.cols() {
            return Err(shape_mismatch("add: operand shapes differ"));
        }
        let y = at.add(bt);
        Ok(self.push(y, Op::Add { a, b }))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let y = self.nodes[x].value.scaled(c);
        self.push(y, Op::Scale { x, c })
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let first = *parts
            .first()
            .ok_or_else(|| invalid_arg("concat_rows needs at least one part"))?;
        let cols = self.nodes[first].value.cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let t = &self.nodes[p].value;
            if t.cols() != cols {
                return Err(shape_mismatch("concat_rows: column counts differ"));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        Ok(self.push(
            Tensor::from_vec(rows, cols, data),
            Op::ConcatRows {
                parts: parts.to_vec(),
            },
        ))
    }

    pub fn reshape(&mut self, x: NodeId, rows: usize, cols: usize) -> Result<NodeId> {
        let t = &self.nodes[x].value;
        if rows * cols != t.rows() * t.cols() {
            return Err(shape_mismatch("reshape: element count changes"));
        }
        let y = Tensor::from_vec(rows, cols, t.data().to_vec());
        Ok(self.push(y, Op::Reshape { x }))
    }

    pub fn sum_squares(&mut self, x: NodeId) -> NodeId {
        let s = self.nodes[x].value.frobenius_sq();
        self.push(Tensor::from_vec(1, 1, vec![s]), Op::SumSquares { x })
    }

    /// Reverse sweep from a scalar root; returns one gradient per node
    /// (zero for nodes the root does not depend on).
    pub fn backward(&self, root: NodeId) -> Result<Vec<Tensor>> {
        let rt = &self.nodes[root].value;
        if rt.rows() != 1 || rt.cols() != 1 {
            return Err(invalid_arg("backward root must be scalar"));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root] = Some(Tensor::from_vec(1, 1, vec![1.0]));

        let accumulate = |slot: &mut Option<Tensor>, add: Tensor| match slot {
            Some(t) => t.add_assign(&add),
            None => *slot = Some(add),
        };

        for id in (0..=root).rev() {
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[id].op {
                Op::Input => {
                    grads[id] = Some(g);
                    continue;
                }
                Op::Affine { w, b, x } => {
                    let wt = &self.nodes[*w].value;
                    let xt = &self.nodes[*x].value;
                    accumulate(&mut grads[*w], g.matmul_t(xt));
                    accumulate(&mut grads[*x], wt.t_matmul(&g));
                    let mut db = Tensor::zeros(g.rows(), 1);
                    for r in 0..g.rows() {
                        let mut s = 0.0;
                        for c in 0..g.cols() {
                            s += g.get(r, c);
                        }
                        db.set(r, 0, s);
                    }
                    accumulate(&mut grads[*b], db);
                }
                Op::Tanh { x } => {
                    let y = &self.nodes[id].value;
                    let mut dx = g.clone();
                    for (d, v) in dx.data_mut().iter_mut().zip(y.data()) {
                        *d *= 1.0 - v * v;
                    }
                    accumulate(&mut grads[*x], dx);
                }
                Op::Add { a, b } => {
                    accumulate(&mut grads[*a], g.clone());
                    accumulate(&mut grads[*b], g);
                }
                Op::Scale { x, c } => {
                    accumulate(&mut grads[*x], g.scaled(*c));
                }
                Op::ConcatRows { parts } => {
                    let mut row = 0;
                    for &p in parts {
                        let pr = self.nodes[p].value.rows();
                        let cols = g.cols();
                        let mut block = Tensor::zeros(pr, cols);
                        for r in 0..pr {
                            for c in 0..cols {
                                block.set(r, c, g.get(row + r, c));
                            }
                        }
                        accumulate(&mut grads[p], block);
                        row += pr;
                    }
                }
                Op::Reshape { x } => {
                    let src = &self.nodes[*x].value;
                    accumulate(
                        &mut grads[*x],
                        Tensor::from_vec(src.rows(), src.cols(), g.data().to_vec()),
                    );
                }
                Op::SumSquares { x } => {
                    let seed = g.get(0, 0);
                    accumulate(&mut grads[*x], self.nodes[*x].value.scaled(2.0 * seed));
                }
            }
        }

        Ok(grads
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                g.unwrap_or_else(|| {
                    let t = &self.nodes[i].value;
                    Tensor::zeros(t.rows(), t.cols())
                })
            })
            .collect())
    }
}

/// Max relative disagreement between an analytic gradient and central
/// finite differences of f, with per-coordinate step h·(1 + |θ|).
pub fn grad_check(
    mut f: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len());
    assert!(h > 0.0);
    let mut theta = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let step = h * (1.0 + theta[i].abs());
        let orig = theta[i];
        theta[i] = orig + step;
        let up = f(&theta);
        theta[i] = orig - step;
        let down = f(&theta);
        theta[i] = orig;
        let fd = (up - down) / (2.0 * step);
        let err = (analytic[i] - fd).abs() / fd.abs().max(1.0);
        worst = worst.max(err);
    }
    worst
}
