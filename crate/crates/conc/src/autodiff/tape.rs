//! Define-by-run reverse-mode differentiation.
//!
//! A [`Tape`] borrows the [`ParamSet`] it reads from, records every primitive
//! applied during the forward pass, and on [`Tape::backward`] replays the
//! recording in reverse to accumulate vector-Jacobian products. One tape is
//! built per forward pass and may be differentiated exactly once.

use crate::autodiff::params::{Gradients, ParamId, ParamSet};
use crate::autodiff::tensor::{matmul_nn_acc, matmul_nt_acc, matmul_tn_acc, transpose};
use crate::{Error, Result, Tensor};

/// Handle to a value recorded on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum NodeValue {
    Owned(Tensor),
    Param(ParamId),
}

enum Op {
    Leaf,
    MatMul { a: Var, b: Var, m: usize, k: usize, n: usize },
    Transpose { x: Var, rows: usize, cols: usize },
    Add { a: Var, b: Var },
    Sub { a: Var, b: Var },
    Mul { a: Var, b: Var },
    Neg { x: Var },
    Scale { x: Var, c: f64 },
    AddConst { x: Var },
    Clamp { x: Var, lo: f64, hi: f64 },
    Relu { x: Var },
    Exp { x: Var },
    Sum { x: Var },
    Mean { x: Var, n: usize },
    SoftmaxVec { x: Var },
    LogSoftmaxVec { x: Var },
    SoftmaxRows { x: Var, rows: usize, cols: usize },
    AddRowVec { x: Var, b: Var, rows: usize, cols: usize },
    GatherRows { x: Var, perm: Vec<usize>, cols: usize },
    TakeRowsPadded { x: Var, kept: usize, cols: usize },
    Pick { x: Var, idx: usize },
    ConcatFlat { xs: Vec<Var> },
    Reshape { x: Var },
    Min2 { a: Var, b: Var },
}

struct Node {
    value: NodeValue,
    op: Op,
}

/// Operation recorder for one forward pass.
pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
    consumed: bool,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Tape { params, nodes: Vec::with_capacity(64), consumed: false }
    }

    /// Value of a recorded variable.
    pub fn value(&self, v: Var) -> &Tensor {
        match &self.nodes[v.0].value {
            NodeValue::Owned(t) => t,
            NodeValue::Param(id) => &self.params.get(*id).value,
        }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value: NodeValue::Owned(value), op });
        Var(self.nodes.len() - 1)
    }

    /// Constant leaf; gradients stop here.
    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> Var {
        self.input(Tensor::scalar(v))
    }

    /// Parameter leaf; backward accumulates into its gradient slot.
    pub fn param(&mut self, id: ParamId) -> Var {
        self.nodes.push(Node { value: NodeValue::Param(id), op: Op::Leaf });
        Var(self.nodes.len() - 1)
    }

    fn mat_dims(&self, v: Var) -> Result<(usize, usize)> {
        self.value(v).as_matrix()
    }

    /// Matrix product with tape recording.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.mat_dims(a)?;
        let (k2, n) = self.mat_dims(b)?;
        if k != k2 {
            return Err(Error::Shape(format!(
                "matmul inner dimensions differ: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let mut out = vec![0.0; m * n];
        matmul_nn_acc(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::MatMul { a, b, m, k, n }))
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let (r, c) = self.mat_dims(x)?;
        let out = transpose(self.value(x).data(), r, c);
        Ok(self.push(Tensor::new(vec![c, r], out)?, Op::Transpose { x, rows: r, cols: c }))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "{what} operands differ: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x + y)
            .collect();
        Ok(self.push(Tensor::new(self.value(a).shape().to_vec(), data)?, Op::Add { a, b }))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "sub")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x - y)
            .collect();
        Ok(self.push(Tensor::new(self.value(a).shape().to_vec(), data)?, Op::Sub { a, b }))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .collect();
        Ok(self.push(Tensor::new(self.value(a).shape().to_vec(), data)?, Op::Mul { a, b }))
    }

    pub fn neg(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let out = Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| -v).collect()).unwrap();
        self.push(out, Op::Neg { x })
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let t = self.value(x);
        let out =
            Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| c * v).collect()).unwrap();
        self.push(out, Op::Scale { x, c })
    }

    pub fn add_const(&mut self, x: Var, c: f64) -> Var {
        let t = self.value(x);
        let out =
            Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| v + c).collect()).unwrap();
        self.push(out, Op::AddConst { x })
    }

    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Var {
        let t = self.value(x);
        let out = Tensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|v| v.max(lo).min(hi)).collect(),
        )
        .unwrap();
        self.push(out, Op::Clamp { x, lo, hi })
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let out =
            Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| v.max(0.0)).collect())
                .unwrap();
        self.push(out, Op::Relu { x })
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let t = self.value(x);
        let out =
            Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| v.exp()).collect()).unwrap();
        self.push(out, Op::Exp { x })
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s: f64 = self.value(x).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum { x })
    }

    pub fn mean(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x).len();
        if n == 0 {
            return Err(Error::Numeric("mean of empty tensor".into()));
        }
        let s: f64 = self.value(x).data().iter().sum();
        Ok(self.push(Tensor::scalar(s / n as f64), Op::Mean { x, n }))
    }

    /// Stable softmax over all elements.
    pub fn softmax_vec(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        if t.is_empty() {
            return Err(Error::Numeric("softmax of empty input".into()));
        }
        let max = t.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut out: Vec<f64> = t.data().iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = out.iter().sum();
        for v in &mut out {
            *v /= sum;
        }
        Ok(self.push(Tensor::new(t.shape().to_vec(), out)?, Op::SoftmaxVec { x }))
    }

    /// Stable log-softmax over all elements.
    pub fn log_softmax_vec(&mut self, x: Var) -> Result<Var> {
        let t = self.value(x);
        if t.is_empty() {
            return Err(Error::Numeric("log-softmax of empty input".into()));
        }
        let max = t.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + t.data().iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let out: Vec<f64> = t.data().iter().map(|v| v - lse).collect();
        Ok(self.push(Tensor::new(t.shape().to_vec(), out)?, Op::LogSoftmaxVec { x }))
    }

    /// Row-wise stable softmax of a rank-2 tensor.
    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let (r, c) = self.mat_dims(x)?;
        if c == 0 {
            return Err(Error::Numeric("softmax over empty rows".into()));
        }
        let mut out = self.value(x).data().to_vec();
        for row in out.chunks_mut(c) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Ok(self.push(Tensor::new(vec![r, c], out)?, Op::SoftmaxRows { x, rows: r, cols: c }))
    }

    /// Broadcast-add a row vector to every row of a matrix.
    pub fn add_rowvec(&mut self, x: Var, b: Var) -> Result<Var> {
        let (r, c) = self.mat_dims(x)?;
        if self.value(b).len() != c {
            return Err(Error::Shape(format!(
                "row-vector length {} does not match matrix width {}",
                self.value(b).len(),
                c
            )));
        }
        let mut out = self.value(x).data().to_vec();
        let bias = self.value(b).data();
        for row in out.chunks_mut(c) {
            for (o, v) in row.iter_mut().zip(bias) {
                *o += v;
            }
        }
        Ok(self.push(Tensor::new(vec![r, c], out)?, Op::AddRowVec { x, b, rows: r, cols: c }))
    }

    /// Reorder (or select) rows of a rank-2 tensor by `perm`.
    pub fn gather_rows(&mut self, x: Var, perm: &[usize]) -> Result<Var> {
        let (r, c) = self.mat_dims(x)?;
        let mut out = Vec::with_capacity(perm.len() * c);
        for &src in perm {
            if src >= r {
                return Err(Error::Shape(format!("gather row {src} out of {r}")));
            }
            out.extend_from_slice(&self.value(x).data()[src * c..(src + 1) * c]);
        }
        Ok(self.push(
            Tensor::new(vec![perm.len(), c], out)?,
            Op::GatherRows { x, perm: perm.to_vec(), cols: c },
        ))
    }

    /// Keep the first `k` rows, zero-padding if fewer exist. Gradient flows
    /// only to the kept rows.
    pub fn take_rows_padded(&mut self, x: Var, k: usize, cols_if_empty: usize) -> Result<Var> {
        let t = self.value(x);
        let (r, c) = if t.is_empty() && t.shape().first() == Some(&0) {
            (0, cols_if_empty)
        } else {
            t.as_matrix()?
        };
        let kept = r.min(k);
        let mut out = vec![0.0; k * c];
        out[..kept * c].copy_from_slice(&t.data()[..kept * c]);
        Ok(self.push(Tensor::new(vec![k, c], out)?, Op::TakeRowsPadded { x, kept, cols: c }))
    }

    /// Select one element as a scalar.
    pub fn pick(&mut self, x: Var, idx: usize) -> Result<Var> {
        let t = self.value(x);
        if idx >= t.len() {
            return Err(Error::Shape(format!("pick index {idx} out of {}", t.len())));
        }
        let v = t.data()[idx];
        Ok(self.push(Tensor::scalar(v), Op::Pick { x, idx }))
    }

    /// Concatenate the flattened inputs into a single row vector.
    pub fn concat_flat(&mut self, xs: &[Var]) -> Var {
        let mut out = Vec::new();
        for &v in xs {
            out.extend_from_slice(self.value(v).data());
        }
        let n = out.len();
        self.push(Tensor::new(vec![1, n], out).unwrap(), Op::ConcatFlat { xs: xs.to_vec() })
    }

    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var> {
        let t = self.value(x);
        let n: usize = shape.iter().product();
        if n != t.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} into {:?}",
                t.shape(),
                shape
            )));
        }
        let data = t.data().to_vec();
        Ok(self.push(Tensor::new(shape, data)?, Op::Reshape { x }))
    }

    /// Element-wise minimum; the smaller operand receives the gradient.
    pub fn min2(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "min")?;
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x.min(*y))
            .collect();
        Ok(self.push(Tensor::new(self.value(a).shape().to_vec(), data)?, Op::Min2 { a, b }))
    }

    /// Affine + ReLU ladder; final layer affine only.
    pub fn mlp(&mut self, x: Var, mlp: &crate::autodiff::MlpParams) -> Result<Var> {
        let mut h = x;
        let last = mlp.layers.len() - 1;
        for (i, (w, b)) in mlp.layers.iter().enumerate() {
            let wv = self.param(*w);
            let bv = self.param(*b);
            let z = self.matmul(h, wv)?;
            let z = self.add_rowvec(z, bv)?;
            h = if i < last { self.relu(z) } else { z };
        }
        Ok(h)
    }

    /// Reverse replay, accumulating parameter gradients into `grads`.
    ///
    /// Every parameter of the set is represented in `grads`; parameters the
    /// loss never touched simply keep their zeros.
    pub fn backward_into(&mut self, loss: Var, grads: &mut Gradients) -> Result<()> {
        if self.consumed {
            return Err(Error::Tape("backward called twice on a consumed tape".into()));
        }
        self.consumed = true;
        if self.value(loss).len() != 1 {
            return Err(Error::Tape(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }

        let mut vgrads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        vgrads[loss.0] = Some(vec![1.0]);

        for i in (0..self.nodes.len()).rev() {
            let g = match vgrads[i].take() {
                Some(g) => g,
                None => continue,
            };
            // Accumulate into the parameter slot if this node is a param leaf.
            if let NodeValue::Param(pid) = &self.nodes[i].value {
                let dst = &mut grads.per_param[pid.0];
                for (d, s) in dst.iter_mut().zip(g.iter()) {
                    *d += s;
                }
                continue;
            }
            macro_rules! acc {
                ($var:expr, $iter:expr) => {{
                    let slot = vgrads[$var.0]
                        .get_or_insert_with(|| vec![0.0; self.value($var).len()]);
                    for (d, s) in slot.iter_mut().zip($iter) {
                        *d += s;
                    }
                }};
            }
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatMul { a, b, m, k, n } => {
                    let (a, b, m, k, n) = (*a, *b, *m, *k, *n);
                    let mut da = vec![0.0; m * k];
                    matmul_nt_acc(&g, self.value(b).data(), &mut da, m, n, k);
                    acc!(a, da.iter());
                    let mut db = vec![0.0; k * n];
                    matmul_tn_acc(self.value(a).data(), &g, &mut db, m, k, n);
                    acc!(b, db.iter());
                }
                Op::Transpose { x, rows, cols } => {
                    let gt = transpose(&g, *cols, *rows);
                    acc!(*x, gt.iter());
                }
                Op::Add { a, b } => {
                    acc!(*a, g.iter());
                    acc!(*b, g.iter());
                }
                Op::Sub { a, b } => {
                    acc!(*a, g.iter());
                    acc!(*b, g.iter().map(|v| -v));
                }
                Op::Mul { a, b } => {
                    let (a, b) = (*a, *b);
                    let da: Vec<f64> =
                        g.iter().zip(self.value(b).data()).map(|(g, v)| g * v).collect();
                    acc!(a, da.iter());
                    let db: Vec<f64> =
                        g.iter().zip(self.value(a).data()).map(|(g, v)| g * v).collect();
                    acc!(b, db.iter());
                }
                Op::Neg { x } => acc!(*x, g.iter().map(|v| -v)),
                Op::Scale { x, c } => acc!(*x, g.iter().map(|v| c * v)),
                Op::AddConst { x } => acc!(*x, g.iter()),
                Op::Clamp { x, lo, hi } => {
                    let xv = self.value(*x).data();
                    let dx: Vec<f64> = g
                        .iter()
                        .zip(xv)
                        .map(|(g, v)| if *v > *lo && *v < *hi { *g } else { 0.0 })
                        .collect();
                    acc!(*x, dx.iter());
                }
                Op::Relu { x } => {
                    let xv = self.value(*x).data();
                    let dx: Vec<f64> =
                        g.iter().zip(xv).map(|(g, v)| if *v > 0.0 { *g } else { 0.0 }).collect();
                    acc!(*x, dx.iter());
                }
                Op::Exp { x } => {
                    let out = self.nodes[i].owned_value().data();
                    let dx: Vec<f64> = g.iter().zip(out).map(|(g, o)| g * o).collect();
                    acc!(*x, dx.iter());
                }
                Op::Sum { x } => acc!(*x, std::iter::repeat(g[0]).take(self.value(*x).len())),
                Op::Mean { x, n } => {
                    let gv = g[0] / *n as f64;
                    acc!(*x, std::iter::repeat(gv).take(*n));
                }
                Op::SoftmaxVec { x } => {
                    let y = self.nodes[i].owned_value().data();
                    let dot: f64 = g.iter().zip(y).map(|(g, y)| g * y).sum();
                    let dx: Vec<f64> = g.iter().zip(y).map(|(g, y)| y * (g - dot)).collect();
                    acc!(*x, dx.iter());
                }
                Op::LogSoftmaxVec { x } => {
                    let y = self.nodes[i].owned_value().data();
                    let gsum: f64 = g.iter().sum();
                    let dx: Vec<f64> =
                        g.iter().zip(y).map(|(g, y)| g - y.exp() * gsum).collect();
                    acc!(*x, dx.iter());
                }
                Op::SoftmaxRows { x, rows, cols } => {
                    let y = self.nodes[i].owned_value().data();
                    let mut dx = vec![0.0; rows * cols];
                    for r in 0..*rows {
                        let gr = &g[r * cols..(r + 1) * cols];
                        let yr = &y[r * cols..(r + 1) * cols];
                        let dot: f64 = gr.iter().zip(yr).map(|(g, y)| g * y).sum();
                        for c in 0..*cols {
                            dx[r * cols + c] = yr[c] * (gr[c] - dot);
                        }
                    }
                    acc!(*x, dx.iter());
                }
                Op::AddRowVec { x, b, rows, cols } => {
                    acc!(*x, g.iter());
                    let mut db = vec![0.0; *cols];
                    for r in 0..*rows {
                        for c in 0..*cols {
                            db[c] += g[r * cols + c];
                        }
                    }
                    acc!(*b, db.iter());
                }
                Op::GatherRows { x, perm, cols } => {
                    let mut dx = vec![0.0; self.value(*x).len()];
                    for (r, &src) in perm.iter().enumerate() {
                        for c in 0..*cols {
                            dx[src * cols + c] += g[r * cols + c];
                        }
                    }
                    acc!(*x, dx.iter());
                }
                Op::TakeRowsPadded { x, kept, cols } => {
                    let n = self.value(*x).len();
                    let mut dx = vec![0.0; n];
                    dx[..kept * cols].copy_from_slice(&g[..kept * cols]);
                    acc!(*x, dx.iter());
                }
                Op::Pick { x, idx } => {
                    let mut dx = vec![0.0; self.value(*x).len()];
                    dx[*idx] = g[0];
                    acc!(*x, dx.iter());
                }
                Op::ConcatFlat { xs } => {
                    let xs = xs.clone();
                    let mut off = 0;
                    for v in xs {
                        let n = self.value(v).len();
                        acc!(v, g[off..off + n].iter());
                        off += n;
                    }
                }
                Op::Reshape { x } => acc!(*x, g.iter()),
                Op::Min2 { a, b } => {
                    let (a, b) = (*a, *b);
                    let av = self.value(a).data();
                    let bv = self.value(b).data();
                    let da: Vec<f64> = g
                        .iter()
                        .zip(av.iter().zip(bv))
                        .map(|(g, (x, y))| if x <= y { *g } else { 0.0 })
                        .collect();
                    acc!(a, da.iter());
                    let db: Vec<f64> = g
                        .iter()
                        .zip(av.iter().zip(bv))
                        .map(|(g, (x, y))| if x <= y { 0.0 } else { *g })
                        .collect();
                    acc!(b, db.iter());
                }
            }
        }
        Ok(())
    }

    /// Convenience wrapper allocating a fresh gradient buffer.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self.params);
        self.backward_into(loss, &mut grads)?;
        Ok(grads)
    }
}

impl Node {
    fn owned_value(&self) -> &Tensor {
        match &self.value {
            NodeValue::Owned(t) => t,
            NodeValue::Param(_) => unreachable!("op output is always owned"),
        }
    }
}

/// Run a taped forward pass and accumulate gradients straight into the
/// parameter set's `grad` slots.
pub fn backward(params: &mut ParamSet, build: impl FnOnce(&mut Tape) -> Result<Var>) -> Result<f64> {
    let (loss_value, grads) = {
        let mut tape = Tape::new(params);
        let loss = build(&mut tape)?;
        let loss_value = tape.value(loss).item();
        let grads = tape.backward(loss)?;
        (loss_value, grads)
    };
    params.accumulate(&grads);
    Ok(loss_value)
}
