use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{kernels, Tensor};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Train mode enables dropout; eval mode makes it the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRowBias(Var, Var),
    Relu(Var),
    ConcatCols(Vec<Var>),
    Reshape(Var),
    ScatterRows { src: Var, rows: Vec<usize> },
    Mask { src: Var, mask: Vec<f64> },
    Cosine { a: Var, b: Var, dot: f64, na: f64, nb: f64 },
    Scale(Var, f64),
    AddScalar(Var),
    Sum(Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Append-only record of a computation. Nodes are stored in creation order,
/// which is a topological order, so backward is a single reverse sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node of a tape.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of `shape` when `v` was not reached.
    pub fn get_or_zeros(&self, v: Var, shape: &[usize]) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(shape))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value, true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::Shape(format!(
                "{what}: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b))?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "sub")?;
        let mut out = self.value(a).clone();
        out.data_mut()
            .iter_mut()
            .zip(self.value(b).data())
            .for_each(|(x, y)| *x -= y);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    /// `x (m x n) + bias` broadcast over rows; `bias` holds `n` values.
    pub fn add_row_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let [_, n] = self.value(x).dims2()?;
        if self.value(bias).len() != n {
            return Err(Error::Shape(format!(
                "bias of {} values for {n} columns",
                self.value(bias).len()
            )));
        }
        let mut out = self.value(x).clone();
        let b = self.value(bias).data();
        for row in out.data_mut().chunks_mut(n.max(1)) {
            row.iter_mut().zip(b).for_each(|(o, bv)| *o += bv);
        }
        let rg = self.rg(x) || self.rg(bias);
        Ok(self.push(out, Op::AddRowBias(x, bias), rg))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let rg = self.rg(x);
        self.push(out, Op::Relu(x), rg)
    }

    /// Concatenate matrices with equal row counts along columns.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = match parts.first() {
            Some(&p) => self.value(p).dims2()?[0],
            None => return Err(Error::Shape("concat of zero tensors".into())),
        };
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let [r, c] = self.value(p).dims2()?;
            if r != rows {
                return Err(Error::Shape(format!("concat rows {r} vs {rows}")));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = Tensor::zeros(&[rows, total]);
        let dst = out.data_mut();
        let mut offset = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let src = self.nodes[p.0].value.data();
            for r in 0..rows {
                dst[r * total + offset..r * total + offset + w].copy_from_slice(&src[r * w..(r + 1) * w]);
            }
            offset += w;
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), rg))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let out = self.value(x).clone().reshape(shape)?;
        let rg = self.rg(x);
        Ok(self.push(out, Op::Reshape(x), rg))
    }

    /// Flatten to a `1 x len` row.
    pub fn flatten(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x).len();
        self.reshape(x, &[1, n])
    }

    /// Place the rows of `src` (`k x n`) at `rows` of an `m x n` zero matrix.
    pub fn scatter_rows(&mut self, src: Var, rows: &[usize], m: usize) -> Result<Var> {
        let [k, n] = self.value(src).dims2()?;
        if rows.len() != k {
            return Err(Error::Shape(format!("{} row indices for {k} rows", rows.len())));
        }
        let mut out = Tensor::zeros(&[m, n]);
        let s = self.value(src).data();
        let mut seen = vec![false; m];
        for (r, &dst) in rows.iter().enumerate() {
            if dst >= m || seen[dst] {
                return Err(Error::Shape(format!("bad scatter row {dst} for {m} rows")));
            }
            seen[dst] = true;
            out.data_mut()[dst * n..(dst + 1) * n].copy_from_slice(&s[r * n..(r + 1) * n]);
        }
        let rg = self.rg(src);
        Ok(self.push(
            out,
            Op::ScatterRows {
                src,
                rows: rows.to_vec(),
            },
            rg,
        ))
    }

    /// Inverted dropout. In train mode each entry is zeroed with probability
    /// `p` and survivors are scaled by `1 / (1 - p)`; the mask is a pure
    /// function of `seed`. Eval mode and `p = 0` return `x` unchanged.
    pub fn dropout(&mut self, x: Var, p: f64, mode: Mode, seed: u64) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Usage(format!("dropout probability must be in [0, 1), got {p}")));
        }
        if mode == Mode::Eval || p == 0.0 {
            return Ok(x);
        }
        let mut rng = rng_from_seed(seed);
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..self.value(x).len())
            .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
            .collect();
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
        let rg = self.rg(x);
        Ok(self.push(out, Op::Mask { src: x, mask }, rg))
    }

    /// Cosine similarity of two equal-length tensors (any shapes), as a scalar.
    pub fn cosine(&mut self, a: Var, b: Var) -> Result<Var> {
        let (va, vb) = (self.value(a).data(), self.value(b).data());
        if va.len() != vb.len() {
            return Err(Error::Shape(format!("cosine of lengths {} and {}", va.len(), vb.len())));
        }
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(Error::Domain("cosine of a zero-norm vector".into()));
        }
        let c = (dot / (na * nb)).clamp(-1.0, 1.0);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::scalar(c), Op::Cosine { a, b, dot, na, nb }, rg))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let out = self.value(x).scale(c);
        let rg = self.rg(x);
        self.push(out, Op::Scale(x, c), rg)
    }

    pub fn add_scalar(&mut self, x: Var, c: f64) -> Var {
        let mut out = self.value(x).clone();
        out.data_mut().iter_mut().for_each(|v| *v += c);
        let rg = self.rg(x);
        self.push(out, Op::AddScalar(x), rg)
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        let rg = self.rg(x);
        self.push(Tensor::scalar(s), Op::Sum(x), rg)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(Error::Usage(format!(
                "backward needs a scalar root, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::new(self.value(loss).shape(), vec![1.0])?);

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            match &node.op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let [m, k] = ta.dims2()?;
                    let [_, n] = tb.dims2()?;
                    if self.rg(*a) {
                        let mut da = Tensor::zeros(&[m, k]);
                        kernels::matmul_bt(g.data(), tb.data(), m, k, n, da.data_mut());
                        accumulate(&mut grads, *a, da)?;
                    }
                    if self.rg(*b) {
                        let mut db = Tensor::zeros(&[k, n]);
                        kernels::matmul_at(ta.data(), g.data(), m, k, n, db.data_mut());
                        accumulate(&mut grads, *b, db)?;
                    }
                }
                Op::Add(a, b) => {
                    if self.rg(*a) {
                        accumulate(&mut grads, *a, g.clone())?;
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads, *b, g.clone())?;
                    }
                }
                Op::Sub(a, b) => {
                    if self.rg(*a) {
                        accumulate(&mut grads, *a, g.clone())?;
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads, *b, g.scale(-1.0))?;
                    }
                }
                Op::AddRowBias(x, bias) => {
                    if self.rg(*bias) {
                        let n = self.value(*bias).len();
                        let mut db = vec![0.0; n];
                        for row in g.data().chunks(n.max(1)) {
                            db.iter_mut().zip(row).for_each(|(d, v)| *d += v);
                        }
                        accumulate(&mut grads, *bias, Tensor::new(self.value(*bias).shape(), db)?)?;
                    }
                    if self.rg(*x) {
                        accumulate(&mut grads, *x, g.clone())?;
                    }
                }
                Op::Relu(x) => {
                    let mut dx = g.clone();
                    dx.data_mut()
                        .iter_mut()
                        .zip(node.value.data())
                        .for_each(|(d, &out)| {
                            if out <= 0.0 {
                                *d = 0.0
                            }
                        });
                    accumulate(&mut grads, *x, dx)?;
                }
                Op::ConcatCols(parts) => {
                    let [rows, total] = g.dims2()?;
                    let mut offset = 0;
                    for &p in parts {
                        let [_, w] = self.value(p).dims2()?;
                        if self.rg(p) {
                            let mut dp = Tensor::zeros(&[rows, w]);
                            for r in 0..rows {
                                dp.data_mut()[r * w..(r + 1) * w]
                                    .copy_from_slice(&g.data()[r * total + offset..r * total + offset + w]);
                            }
                            accumulate(&mut grads, p, dp)?;
                        }
                        offset += w;
                    }
                }
                Op::Reshape(x) => {
                    let dx = g.clone().reshape(self.value(*x).shape())?;
                    accumulate(&mut grads, *x, dx)?;
                }
                Op::ScatterRows { src, rows } => {
                    let [k, n] = self.value(*src).dims2()?;
                    let mut ds = Tensor::zeros(&[k, n]);
                    for (r, &dst) in rows.iter().enumerate() {
                        ds.data_mut()[r * n..(r + 1) * n].copy_from_slice(&g.data()[dst * n..(dst + 1) * n]);
                    }
                    accumulate(&mut grads, *src, ds)?;
                }
                Op::Mask { src, mask } => {
                    let mut dx = g.clone();
                    dx.data_mut().iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
                    accumulate(&mut grads, *src, dx)?;
                }
                Op::Cosine { a, b, dot, na, nb } => {
                    let gs = g.item();
                    let c = dot / (na * nb);
                    let (va, vb) = (self.value(*a), self.value(*b));
                    if self.rg(*a) {
                        let da: Vec<f64> = va
                            .data()
                            .iter()
                            .zip(vb.data())
                            .map(|(x, y)| gs * (y / (na * nb) - c * x / (na * na)))
                            .collect();
                        accumulate(&mut grads, *a, Tensor::new(va.shape(), da)?)?;
                    }
                    if self.rg(*b) {
                        let db: Vec<f64> = vb
                            .data()
                            .iter()
                            .zip(va.data())
                            .map(|(y, x)| gs * (x / (na * nb) - c * y / (nb * nb)))
                            .collect();
                        accumulate(&mut grads, *b, Tensor::new(vb.shape(), db)?)?;
                    }
                }
                Op::Scale(x, c) => {
                    accumulate(&mut grads, *x, g.scale(*c))?;
                }
                Op::AddScalar(x) => {
                    accumulate(&mut grads, *x, g.clone())?;
                }
                Op::Sum(x) => {
                    let shape = self.value(*x).shape().to_vec();
                    let n = self.value(*x).len();
                    accumulate(&mut grads, *x, Tensor::new(&shape, vec![g.item(); n])?)?;
                }
            }
            // interior gradients are not kept once propagated
        }
        Ok(Gradients { grads })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) -> Result<()> {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => {
            *slot = Some(g);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_gives_ones() {
        let mut t = Tape::new();
        let w = t.param(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        let s = t.sum(w);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap().data(), &[1.0; 4]);
    }

    #[test]
    fn non_scalar_root_rejected() {
        let mut t = Tape::new();
        let w = t.param(Tensor::zeros(&[2, 2]));
        assert!(matches!(t.backward(w), Err(Error::Usage(_))));
    }

    #[test]
    fn unreached_param_has_no_gradient() {
        let mut t = Tape::new();
        let a = t.param(Tensor::row(vec![1.0, 2.0]));
        let b = t.param(Tensor::row(vec![3.0]));
        let s = t.sum(a);
        let g = t.backward(s).unwrap();
        assert!(g.get(b).is_none());
        assert_eq!(g.get_or_zeros(b, &[1, 1]).data(), &[0.0]);
    }

    #[test]
    fn relu_zeroes_negatives_and_is_idempotent() {
        let mut t = Tape::new();
        let x = t.constant(Tensor::row(vec![-1.0, -0.5, -3.0]));
        let r = t.relu(x);
        assert!(t.value(r).data().iter().all(|&v| v == 0.0));
        let x = t.constant(Tensor::row(vec![-1.0, 0.0, 2.0]));
        let r1 = t.relu(x);
        let r2 = t.relu(r1);
        assert_eq!(t.value(r1), t.value(r2));
    }

    #[test]
    fn relu_gradient_zero_at_kink() {
        let mut t = Tape::new();
        let x = t.param(Tensor::row(vec![0.0, 1.0, -1.0]));
        let r = t.relu(x);
        let s = t.sum(r);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn dropout_identity_cases() {
        let mut t = Tape::new();
        let x = t.constant(Tensor::row(vec![1.0, 2.0, 3.0]));
        assert_eq!(t.dropout(x, 0.0, Mode::Train, 1).unwrap(), x);
        assert_eq!(t.dropout(x, 0.5, Mode::Eval, 1).unwrap(), x);
        assert!(t.dropout(x, 1.0, Mode::Train, 1).is_err());
    }

    #[test]
    fn scatter_and_gather() {
        let mut t = Tape::new();
        let x = t.param(Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        let s = t.scatter_rows(x, &[3, 0], 4).unwrap();
        assert_eq!(t.value(s).data(), &[3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0]);
        let w = t.constant(Tensor::new(&[4, 2], (0..8).map(f64::from).collect()).unwrap());
        let prod = t.concat_cols(&[s, w]).unwrap();
        let total = t.sum(prod);
        let g = t.backward(total).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[1.0; 4]);
        assert!(t.scatter_rows(x, &[1, 1], 4).is_err());
    }

    #[test]
    fn repeated_backward_is_identical() {
        let mut t = Tape::new();
        let w = t.param(Tensor::from_rows(&[vec![0.3, -0.2], vec![1.1, 0.4]]).unwrap());
        let x = t.constant(Tensor::row(vec![0.5, -1.5]));
        let y = t.matmul(x, w).unwrap();
        let z = t.constant(Tensor::row(vec![1.0, 2.0]));
        let c = t.cosine(y, z).unwrap();
        let g1 = t.backward(c).unwrap();
        let g2 = t.backward(c).unwrap();
        assert_eq!(g1.get(w), g2.get(w));
    }
}
