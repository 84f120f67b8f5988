use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::kernels::{add_into, matmul_nn, matmul_nt, matmul_tn_acc};
use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// `A * B`
    MatMul(Var, Var),
    /// `A * B^T`
    MatMulT(Var, Var),
    Add(Var, Var),
    /// `m x n` plus a `1 x n` (or length-`n`) row broadcast over rows.
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Transpose(Var),
    SoftmaxRows(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        normed: Vec<f64>,
        inv_std: Vec<f64>,
    },
    Embedding {
        table: Var,
        ids: Vec<usize>,
    },
    /// Summed label-smoothed cross-entropy; `probs` caches the softmax.
    CrossEntropy {
        logits: Var,
        targets: Vec<usize>,
        smoothing: f64,
        probs: Vec<f64>,
    },
    Sum(Var),
}

#[derive(Debug, Clone)]
struct Node {
    shape: Vec<usize>,
    value: Vec<f64>,
    op: Op,
    requires_grad: bool,
}

/// Append-only operation record. A graph is single-owner; build a fresh
/// one per forward pass.
#[derive(Debug, Default, Clone)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients produced by [`Graph::backward`], indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Gradient of `v`, zeros if nothing flowed into it.
    pub fn get_or_zeros(&self, v: Var, len: usize) -> Vec<f64> {
        self.get(v).map_or_else(|| vec![0.0; len], <[f64]>::to_vec)
    }
}

fn dims2(shape: &[usize]) -> Result<(usize, usize)> {
    match *shape {
        [r, c] => Ok((r, c)),
        _ => Err(Error::Dimension(format!(
            "expected a matrix, got shape {shape:?}"
        ))),
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops every node recorded after the first `len`. Vars created after
    /// that point become invalid.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<f64>, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            shape,
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records a leaf. Gradients flow into it iff `t.requires_grad()`.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        let rg = t.requires_grad();
        let shape = t.shape().to_vec();
        self.push(shape, t.into_data(), Op::Leaf, rg)
    }

    /// Records a trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.leaf(t.tracked())
    }

    /// Records a leaf that never receives gradients.
    pub fn constant(&mut self, shape: &[usize], data: Vec<f64>) -> Result<Var> {
        let t = Tensor::new(shape, data)?;
        Ok(self.leaf(t))
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn tensor(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(&n.shape, n.value.clone()).expect("node shape matches data")
    }

    pub fn dims(&self, v: Var) -> Result<(usize, usize)> {
        dims2(self.shape(v))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims(a)?;
        let (k2, n) = self.dims(b)?;
        if k != k2 {
            return Err(Error::Dimension(format!("matmul {m}x{k} by {k2}x{n}")));
        }
        let out = matmul_nn(self.value(a), self.value(b), m, k, n);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(vec![m, n], out, Op::MatMul(a, b), rg))
    }

    /// `A * B^T`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims(a)?;
        let (n, k2) = self.dims(b)?;
        if k != k2 {
            return Err(Error::Dimension(format!("matmul {m}x{k} by ({n}x{k2})^T")));
        }
        let out = matmul_nt(self.value(a), self.value(b), m, k, n);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(vec![m, n], out, Op::MatMulT(a, b), rg))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::Dimension(format!(
                "{what}: {:?} vs {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x + y)
            .collect();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(self.shape(a).to_vec(), out, Op::Add(a, b), rg))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (m, n) = self.dims(a)?;
        if self.value(row).len() != n {
            return Err(Error::Dimension(format!(
                "row of {} values added to {m}x{n}",
                self.value(row).len()
            )));
        }
        let r = self.value(row);
        let out = self
            .value(a)
            .chunks(n)
            .flat_map(|chunk| chunk.iter().zip(r).map(|(x, y)| x + y))
            .collect();
        let rg = self.rg(a) || self.rg(row);
        Ok(self.push(vec![m, n], out, Op::AddRow(a, row), rg))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(x, y)| x * y)
            .collect();
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(self.shape(a).to_vec(), out, Op::Mul(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let out = self.value(a).iter().map(|x| x * s).collect();
        let rg = self.rg(a);
        self.push(self.shape(a).to_vec(), out, Op::Scale(a, s), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self
            .value(a)
            .iter()
            .map(|&x| if x > 0.0 { x } else { 0.0 })
            .collect();
        let rg = self.rg(a);
        self.push(self.shape(a).to_vec(), out, Op::Relu(a), rg)
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.dims(a)?;
        let v = self.value(a);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = v[i * n + j];
            }
        }
        let rg = self.rg(a);
        Ok(self.push(vec![n, m], out, Op::Transpose(a), rg))
    }

    /// Normalizes every row to sum to one (max-subtracted for stability).
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.dims(a)?;
        let mut out = self.value(a).to_vec();
        if n > 0 {
            for row in out.chunks_mut(n).take(m) {
                softmax_in_place(row);
            }
        }
        let rg = self.rg(a);
        Ok(self.push(vec![m, n], out, Op::SoftmaxRows(a), rg))
    }

    /// Per-row layer normalization with learned gain and bias.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let (m, n) = self.dims(x)?;
        if self.value(gain).len() != n || self.value(bias).len() != n {
            return Err(Error::Dimension(format!("layer norm over {n} features")));
        }
        let xv = self.value(x);
        let (g, b) = (self.value(gain), self.value(bias));
        let mut normed = Vec::with_capacity(m * n);
        let mut inv_std = Vec::with_capacity(m);
        let mut out = Vec::with_capacity(m * n);
        for row in xv.chunks(n) {
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let inv = 1.0 / libm::sqrt(var + eps);
            inv_std.push(inv);
            for (k, v) in row.iter().enumerate() {
                let h = (v - mean) * inv;
                normed.push(h);
                out.push(h * g[k] + b[k]);
            }
        }
        let rg = self.rg(x) || self.rg(gain) || self.rg(bias);
        Ok(self.push(
            vec![m, n],
            out,
            Op::LayerNorm {
                x,
                gain,
                bias,
                normed,
                inv_std,
            },
            rg,
        ))
    }

    /// Gathers rows of `table` (`vocab x d`).
    pub fn embedding(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (v, d) = self.dims(table)?;
        if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
            return Err(Error::Dimension(format!(
                "token id {bad} outside vocabulary of {v}"
            )));
        }
        let tv = self.value(table);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            out.extend_from_slice(&tv[i * d..(i + 1) * d]);
        }
        let rg = self.rg(table);
        Ok(self.push(
            vec![ids.len(), d],
            out,
            Op::Embedding {
                table,
                ids: ids.to_vec(),
            },
            rg,
        ))
    }

    /// Sum over rows of the cross-entropy between `softmax(logits)` and the
    /// smoothed target `(1 - eps) * onehot + eps / vocab`.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize], smoothing: f64) -> Result<Var> {
        let (m, v) = self.dims(logits)?;
        if targets.len() != m {
            return Err(Error::Dimension(format!(
                "{} targets for {m} rows",
                targets.len()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= v) {
            return Err(Error::Dimension(format!(
                "target {bad} outside vocabulary of {v}"
            )));
        }
        let mut probs = self.value(logits).to_vec();
        let mut loss = 0.0;
        let off = smoothing / v as f64;
        for (row, &t) in probs.chunks_mut(v).zip(targets) {
            let logz = log_sum_exp(row);
            let raw = row.to_vec();
            for (k, p) in row.iter_mut().enumerate() {
                let logp = raw[k] - logz;
                let q = off + if k == t { 1.0 - smoothing } else { 0.0 };
                loss -= q * logp;
                *p = libm::exp(logp);
            }
        }
        let rg = self.rg(logits);
        Ok(self.push(
            Vec::new(),
            vec![loss],
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
                smoothing,
                probs,
            },
            rg,
        ))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        let rg = self.rg(a);
        self.push(Vec::new(), vec![s], Op::Sum(a), rg)
    }

    /// Reverse pass from a scalar `root`.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        if self.value(root).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar, got shape {:?}",
                self.shape(root)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(vec![1.0]);

        for idx in (0..=root.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(dy) = grads[idx].take() else {
                continue;
            };
            self.backprop_node(node, &dy, &mut grads);
            grads[idx] = Some(dy);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Vec<f64>>], v: Var, f: impl FnOnce(&mut [f64])) {
        if !self.rg(v) {
            return;
        }
        let len = self.nodes[v.0].value.len();
        let slot = grads[v.0].get_or_insert_with(|| vec![0.0; len]);
        f(slot);
    }

    fn backprop_node(&self, node: &Node, dy: &[f64], grads: &mut [Option<Vec<f64>>]) {
        match &node.op {
            Op::Leaf => {}
            &Op::MatMul(a, b) => {
                let (m, k) = dims2(self.shape(a)).unwrap();
                let n = node.shape[1];
                // dA += dY * B^T ; dB += A^T * dY
                self.accumulate(grads, a, |g| {
                    add_into(g, &matmul_nt(dy, self.value(b), m, n, k))
                });
                self.accumulate(grads, b, |g| matmul_tn_acc(self.value(a), dy, m, k, n, g));
            }
            &Op::MatMulT(a, b) => {
                let (m, k) = dims2(self.shape(a)).unwrap();
                let n = node.shape[1];
                // Y = A B^T: dA += dY * B ; dB += dY^T * A
                self.accumulate(grads, a, |g| {
                    add_into(g, &matmul_nn(dy, self.value(b), m, n, k))
                });
                self.accumulate(grads, b, |g| matmul_tn_acc(dy, self.value(a), m, n, k, g));
            }
            &Op::Add(a, b) => {
                self.accumulate(grads, a, |g| add_into(g, dy));
                self.accumulate(grads, b, |g| add_into(g, dy));
            }
            &Op::AddRow(a, row) => {
                let n = node.shape[1];
                self.accumulate(grads, a, |g| add_into(g, dy));
                self.accumulate(grads, row, |g| {
                    for chunk in dy.chunks(n) {
                        add_into(g, chunk);
                    }
                });
            }
            &Op::Mul(a, b) => {
                let (av, bv) = (self.value(a), self.value(b));
                self.accumulate(grads, a, |g| {
                    for ((g, d), y) in g.iter_mut().zip(dy).zip(bv) {
                        *g += d * y;
                    }
                });
                self.accumulate(grads, b, |g| {
                    for ((g, d), x) in g.iter_mut().zip(dy).zip(av) {
                        *g += d * x;
                    }
                });
            }
            &Op::Scale(a, s) => self.accumulate(grads, a, |g| {
                for (g, d) in g.iter_mut().zip(dy) {
                    *g += s * d;
                }
            }),
            &Op::Relu(a) => {
                let x = self.value(a);
                self.accumulate(grads, a, |g| {
                    for ((g, d), x) in g.iter_mut().zip(dy).zip(x) {
                        if *x > 0.0 {
                            *g += d;
                        }
                    }
                });
            }
            &Op::Transpose(a) => {
                let (m, n) = dims2(self.shape(a)).unwrap();
                self.accumulate(grads, a, |g| {
                    for i in 0..m {
                        for j in 0..n {
                            g[i * n + j] += dy[j * m + i];
                        }
                    }
                });
            }
            &Op::SoftmaxRows(a) => {
                let n = node.shape[1];
                let y = &node.value;
                self.accumulate(grads, a, |g| {
                    if n == 0 {
                        return;
                    }
                    for ((g, d), y) in g.chunks_mut(n).zip(dy.chunks(n)).zip(y.chunks(n)) {
                        let dot: f64 = d.iter().zip(y).map(|(a, b)| a * b).sum();
                        for k in 0..n {
                            g[k] += y[k] * (d[k] - dot);
                        }
                    }
                });
            }
            Op::LayerNorm {
                x,
                gain,
                bias,
                normed,
                inv_std,
            } => {
                let n = node.shape[1];
                let gv = self.value(*gain);
                self.accumulate(grads, *gain, |g| {
                    for (d, h) in dy.chunks(n).zip(normed.chunks(n)) {
                        for k in 0..n {
                            g[k] += d[k] * h[k];
                        }
                    }
                });
                self.accumulate(grads, *bias, |g| {
                    for d in dy.chunks(n) {
                        add_into(g, d);
                    }
                });
                self.accumulate(grads, *x, |g| {
                    let nf = n as f64;
                    for (r, ((g, d), h)) in g
                        .chunks_mut(n)
                        .zip(dy.chunks(n))
                        .zip(normed.chunks(n))
                        .enumerate()
                    {
                        let mut sum_dh = 0.0;
                        let mut sum_dh_h = 0.0;
                        for k in 0..n {
                            let dh = d[k] * gv[k];
                            sum_dh += dh;
                            sum_dh_h += dh * h[k];
                        }
                        for k in 0..n {
                            let dh = d[k] * gv[k];
                            g[k] += inv_std[r] * (dh - sum_dh / nf - h[k] * sum_dh_h / nf);
                        }
                    }
                });
            }
            Op::Embedding { table, ids } => {
                let d = node.shape[1];
                self.accumulate(grads, *table, |g| {
                    for (r, &i) in ids.iter().enumerate() {
                        add_into(&mut g[i * d..(i + 1) * d], &dy[r * d..(r + 1) * d]);
                    }
                });
            }
            Op::CrossEntropy {
                logits,
                targets,
                smoothing,
                probs,
            } => {
                let v = self.shape(*logits)[1];
                let off = smoothing / v as f64;
                let scale = dy[0];
                self.accumulate(grads, *logits, |g| {
                    for ((g, p), &t) in g.chunks_mut(v).zip(probs.chunks(v)).zip(targets) {
                        for k in 0..v {
                            let q = off + if k == t { 1.0 - smoothing } else { 0.0 };
                            g[k] += scale * (p[k] - q);
                        }
                    }
                });
            }
            &Op::Sum(a) => {
                let s = dy[0];
                self.accumulate(grads, a, |g| g.iter_mut().for_each(|g| *g += s));
            }
        }
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - max);
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

pub(crate) fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(row.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}
