use super::tensor::{Real, Tensor};
use crate::error::{contract, dim_err, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    /// Batched product; the flag marks a right operand stored as `[B, n, k]`.
    BatchMatMul(Var, Var, bool),
    Transpose(Var),
    Reshape(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Tanh(Var),
    Square(Var),
    Softmax(Var),
    Concat(Vec<Var>),
    Sum(Var),
    Mean(Var),
    Repeat(Var, usize),
    Gather(Var, Vec<usize>),
}

struct Node<T> {
    value: Tensor<T>,
    op: Op,
    needs_grad: bool,
}

/// Append-only record of primitive operations.
///
/// Inputs always refer to earlier nodes, so node order is a topological
/// order and `backward` is a single reverse sweep.
pub struct Tape<T: Real = f32> {
    nodes: Vec<Node<T>>,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
pub struct Gradients<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, var: Var) -> Option<&Tensor<T>> {
        self.grads.get(var.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, var: Var) -> Option<Tensor<T>> {
        self.grads.get_mut(var.0).and_then(|g| g.take())
    }
}

fn rows_of(shape: &[usize]) -> usize {
    shape[..shape.len() - 1].iter().product()
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, name: &'static str, value: Tensor<T>, op: Op, inputs: &[Var]) -> Result<Var> {
        let value = value.check_finite(name)?;
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        Ok(self.push(value, op, needs_grad))
    }

    /// Records a leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Records a leaf whose gradient `backward` will report.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, var: Var) -> &Tensor<T> {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> &[usize] {
        self.nodes[var.0].value.shape()
    }

    /// `a[..., m, k] · b[k, n]` with a shared right operand, or
    /// `a[B, m, k] · b[B, k, n]` batched when both are rank 3.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let sa = self.shape(a).to_vec();
        let sb = self.shape(b).to_vec();
        if sa.len() >= 2 && sb.len() == 2 {
            let k = sa[sa.len() - 1];
            if k != sb[0] {
                return dim_err("matmul", format!("{sa:?} x {sb:?}"));
            }
            let n = sb[1];
            let r = rows_of(&sa);
            let mut out = vec![T::zero(); r * n];
            T::gemm(r, k, n, self.value(a).data(), false, self.value(b).data(), false, &mut out, false);
            let mut shape = sa.clone();
            *shape.last_mut().unwrap() = n;
            self.record("matmul", Tensor::from_parts(shape, out), Op::MatMul(a, b), &[a, b])
        } else if sa.len() == 3 && sb.len() == 3 && sa[0] == sb[0] && sa[2] == sb[1] {
            self.batch_matmul(a, b, false)
        } else {
            dim_err("matmul", format!("{sa:?} x {sb:?}"))
        }
    }

    /// `a[B, m, k] · b[B, n, k]^T`, without materializing the transpose.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 3 || sb.len() != 3 || sa[0] != sb[0] || sa[2] != sb[2] {
            return dim_err("matmul_nt", format!("{sa:?} x {sb:?}^T"));
        }
        self.batch_matmul(a, b, true)
    }

    fn batch_matmul(&mut self, a: Var, b: Var, b_t: bool) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        let (bs, m, k) = (sa[0], sa[1], sa[2]);
        let n = if b_t { sb[1] } else { sb[2] };
        let mut out = vec![T::zero(); bs * m * n];
        let (da, db) = (self.value(a).data(), self.value(b).data());
        for i in 0..bs {
            small_gemm(
                m,
                k,
                n,
                &da[i * m * k..(i + 1) * m * k],
                false,
                &db[i * k * n..(i + 1) * k * n],
                b_t,
                &mut out[i * m * n..(i + 1) * m * n],
            );
        }
        self.record(
            "matmul",
            Tensor::from_parts(vec![bs, m, n], out),
            Op::BatchMatMul(a, b, b_t),
            &[a, b],
        )
    }

    /// Swaps the last two dimensions of a rank-2 or rank-3 tensor.
    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let s = self.shape(a).to_vec();
        let (bs, m, n) = match s.len() {
            2 => (1, s[0], s[1]),
            3 => (s[0], s[1], s[2]),
            _ => return dim_err("transpose", format!("{s:?}")),
        };
        let out = transpose_data(self.value(a).data(), bs, m, n);
        let mut shape = s.clone();
        let r = shape.len();
        shape.swap(r - 2, r - 1);
        self.record("transpose", Tensor::from_parts(shape, out), Op::Transpose(a), &[a])
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(a).clone().reshaped(shape)?;
        self.record("reshape", value, Op::Reshape(a), &[a])
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return dim_err(op, format!("{:?} vs {:?}", self.shape(a), self.shape(b)));
        }
        Ok(())
    }

    fn zip_with(&mut self, name: &'static str, a: Var, b: Var, op: Op, f: impl Fn(T, T) -> T) -> Result<Var> {
        self.same_shape(name, a, b)?;
        let out: Vec<T> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let shape = self.shape(a).to_vec();
        self.record(name, Tensor::from_parts(shape, out), op, &[a, b])
    }

    fn map(&mut self, name: &'static str, a: Var, op: Op, f: impl Fn(T) -> T) -> Result<Var> {
        let out: Vec<T> = self.value(a).data().iter().map(|&x| f(x)).collect();
        let shape = self.shape(a).to_vec();
        self.record(name, Tensor::from_parts(shape, out), op, &[a])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("add", a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("sub", a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("mul", a, b, Op::Mul(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        let cs = T::from_f64_lossy(c);
        self.map("scale", a, Op::Scale(a, c), |x| x * cs)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.map("relu", a, Op::Relu(a), |x| if x > T::zero() { x } else { T::zero() })
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.map("tanh", a, Op::Tanh(a), |x| x.tanh())
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        self.map("square", a, Op::Square(a), |x| x * x)
    }

    /// Softmax over the last dimension, normalized in f64.
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let s = self.shape(a).to_vec();
        let w = *s.last().unwrap();
        let src = self.value(a).data();
        let mut out = vec![T::zero(); src.len()];
        for (row, dst) in src.chunks_exact(w).zip(out.chunks_exact_mut(w)) {
            let max = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x.as_f64()));
            let exps: Vec<f64> = row.iter().map(|&x| (x.as_f64() - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for (d, e) in dst.iter_mut().zip(exps) {
                *d = T::from_f64_lossy(e / z);
            }
        }
        self.record("softmax", Tensor::from_parts(s, out), Op::Softmax(a), &[a])
    }

    /// Concatenates along the last dimension; leading dimensions must agree.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return contract("concat of zero tensors");
        }
        let lead = self.shape(parts[0]).to_vec();
        let lead = &lead[..lead.len() - 1];
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let s = self.shape(p);
            if &s[..s.len() - 1] != lead {
                let shapes: Vec<_> = parts.iter().map(|&v| self.shape(v).to_vec()).collect();
                return dim_err("concat", format!("{shapes:?}"));
            }
            widths.push(s[s.len() - 1]);
        }
        let total: usize = widths.iter().sum();
        let rows: usize = lead.iter().product();
        let mut out = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.value(p).data()[r * w..(r + 1) * w]);
            }
        }
        let mut shape = lead.to_vec();
        shape.push(total);
        self.record("concat", Tensor::from_parts(shape, out), Op::Concat(parts.to_vec()), parts)
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s: f64 = self.value(a).data().iter().map(|x| x.as_f64()).sum();
        self.record("sum", Tensor::scalar(T::from_f64_lossy(s)), Op::Sum(a), &[a])
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let v = self.value(a);
        let s: f64 = v.data().iter().map(|x| x.as_f64()).sum::<f64>() / v.numel() as f64;
        self.record("mean", Tensor::scalar(T::from_f64_lossy(s)), Op::Mean(a), &[a])
    }

    /// Stacks `times` copies of `a` along a new leading dimension.
    pub fn repeat(&mut self, a: Var, times: usize) -> Result<Var> {
        if times == 0 {
            return contract("repeat count must be positive");
        }
        let v = self.value(a);
        let mut out = Vec::with_capacity(v.numel() * times);
        for _ in 0..times {
            out.extend_from_slice(v.data());
        }
        let mut shape = vec![times];
        shape.extend_from_slice(v.shape());
        self.record("repeat", Tensor::from_parts(shape, out), Op::Repeat(a, times), &[a])
    }

    /// Selects entries along axis 1 of a `[B, N, ...]` tensor.
    pub fn gather(&mut self, a: Var, indices: &[usize]) -> Result<Var> {
        let s = self.shape(a).to_vec();
        if s.len() < 2 || indices.is_empty() || indices.iter().any(|&i| i >= s[1]) {
            return dim_err("gather", format!("{s:?} at {indices:?}"));
        }
        let inner: usize = s[2..].iter().product();
        let src = self.value(a).data();
        let mut out = Vec::with_capacity(s[0] * indices.len() * inner);
        for b in 0..s[0] {
            for &i in indices {
                let at = (b * s[1] + i) * inner;
                out.extend_from_slice(&src[at..at + inner]);
            }
        }
        let mut shape = s.clone();
        shape[1] = indices.len();
        self.record(
            "gather",
            Tensor::from_parts(shape, out),
            Op::Gather(a, indices.to_vec()),
            &[a],
        )
    }

    /// Reverse accumulation from a scalar-shaped `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).numel() != 1 {
            return contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            ));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::from_parts(self.shape(loss).to_vec(), vec![T::one()]));
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn propagate(&self, node: &Node<T>, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>]) -> Result<()> {
        let gd = g.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let k = vb.shape()[0];
                let n = vb.shape()[1];
                let r = va.numel() / k;
                if self.wants(*a) {
                    let mut da = vec![T::zero(); r * k];
                    T::gemm(r, n, k, gd, false, vb.data(), true, &mut da, false);
                    accumulate(grads, *a, va.shape(), da);
                }
                if self.wants(*b) {
                    let mut db = vec![T::zero(); k * n];
                    T::gemm(k, r, n, va.data(), true, gd, false, &mut db, false);
                    accumulate(grads, *b, vb.shape(), db);
                }
            }
            Op::BatchMatMul(a, b, b_t) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let (bs, m, k) = (va.shape()[0], va.shape()[1], va.shape()[2]);
                let n = g.shape()[2];
                let (sa, sb, sg) = (m * k, k * n, m * n);
                if self.wants(*a) {
                    let mut da = vec![T::zero(); bs * sa];
                    for i in 0..bs {
                        let (gi, bi) = (&gd[i * sg..(i + 1) * sg], &vb.data()[i * sb..(i + 1) * sb]);
                        // dA = G B^T, or G B when B is stored transposed
                        small_gemm(m, n, k, gi, false, bi, !*b_t, &mut da[i * sa..(i + 1) * sa]);
                    }
                    accumulate(grads, *a, va.shape(), da);
                }
                if self.wants(*b) {
                    let mut db = vec![T::zero(); bs * sb];
                    for i in 0..bs {
                        let (gi, ai) = (&gd[i * sg..(i + 1) * sg], &va.data()[i * sa..(i + 1) * sa]);
                        let dbi = &mut db[i * sb..(i + 1) * sb];
                        if *b_t {
                            small_gemm(n, m, k, gi, true, ai, false, dbi);
                        } else {
                            small_gemm(k, m, n, ai, true, gi, false, dbi);
                        }
                    }
                    accumulate(grads, *b, vb.shape(), db);
                }
            }
            Op::Transpose(a) => {
                let s = self.shape(*a);
                let (bs, m, n) = if s.len() == 2 { (1, s[0], s[1]) } else { (s[0], s[1], s[2]) };
                // g has shape [.., n, m]
                let da = transpose_data(gd, bs, n, m);
                accumulate(grads, *a, s, da);
            }
            Op::Reshape(a) => accumulate(grads, *a, self.shape(*a), gd.to_vec()),
            Op::Add(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, self.shape(*a), gd.to_vec());
                }
                if self.wants(*b) {
                    accumulate(grads, *b, self.shape(*b), gd.to_vec());
                }
            }
            Op::Sub(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, self.shape(*a), gd.to_vec());
                }
                if self.wants(*b) {
                    accumulate(grads, *b, self.shape(*b), gd.iter().map(|&x| -x).collect());
                }
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a).data(), self.value(*b).data());
                if self.wants(*a) {
                    let d = gd.iter().zip(vb).map(|(&g, &y)| g * y).collect();
                    accumulate(grads, *a, self.shape(*a), d);
                }
                if self.wants(*b) {
                    let d = gd.iter().zip(va).map(|(&g, &x)| g * x).collect();
                    accumulate(grads, *b, self.shape(*b), d);
                }
            }
            Op::Scale(a, c) => {
                let c = T::from_f64_lossy(*c);
                accumulate(grads, *a, self.shape(*a), gd.iter().map(|&x| x * c).collect());
            }
            Op::Relu(a) => {
                let x = self.value(*a).data();
                let d = gd
                    .iter()
                    .zip(x)
                    .map(|(&g, &x)| if x > T::zero() { g } else { T::zero() })
                    .collect();
                accumulate(grads, *a, self.shape(*a), d);
            }
            Op::Tanh(a) => {
                let y = node.value.data();
                let d = gd.iter().zip(y).map(|(&g, &y)| g * (T::one() - y * y)).collect();
                accumulate(grads, *a, self.shape(*a), d);
            }
            Op::Square(a) => {
                let x = self.value(*a).data();
                let two = T::one() + T::one();
                let d = gd.iter().zip(x).map(|(&g, &x)| g * two * x).collect();
                accumulate(grads, *a, self.shape(*a), d);
            }
            Op::Softmax(a) => {
                let y = node.value.data();
                let w = *node.value.shape().last().unwrap();
                let mut d = vec![T::zero(); y.len()];
                for ((yr, gr), dr) in y.chunks_exact(w).zip(gd.chunks_exact(w)).zip(d.chunks_exact_mut(w)) {
                    let dot: f64 = yr.iter().zip(gr).map(|(&y, &g)| y.as_f64() * g.as_f64()).sum();
                    for ((o, &y), &g) in dr.iter_mut().zip(yr).zip(gr) {
                        *o = T::from_f64_lossy(y.as_f64() * (g.as_f64() - dot));
                    }
                }
                accumulate(grads, *a, self.shape(*a), d);
            }
            Op::Concat(parts) => {
                let total = *node.value.shape().last().unwrap();
                let rows = node.value.numel() / total;
                let mut offset = 0;
                for &p in parts {
                    let w = *self.shape(p).last().unwrap();
                    if self.wants(p) {
                        let mut d = Vec::with_capacity(rows * w);
                        for r in 0..rows {
                            d.extend_from_slice(&gd[r * total + offset..r * total + offset + w]);
                        }
                        accumulate(grads, p, self.shape(p), d);
                    }
                    offset += w;
                }
            }
            Op::Sum(a) => {
                let n = self.value(*a).numel();
                accumulate(grads, *a, self.shape(*a), vec![gd[0]; n]);
            }
            Op::Mean(a) => {
                let n = self.value(*a).numel();
                let v = T::from_f64_lossy(gd[0].as_f64() / n as f64);
                accumulate(grads, *a, self.shape(*a), vec![v; n]);
            }
            Op::Repeat(a, times) => {
                let n = self.value(*a).numel();
                let mut d = vec![T::zero(); n];
                for t in 0..*times {
                    for (o, &g) in d.iter_mut().zip(&gd[t * n..(t + 1) * n]) {
                        *o = *o + g;
                    }
                }
                accumulate(grads, *a, self.shape(*a), d);
            }
            Op::Gather(a, idx) => {
                let s = self.shape(*a);
                let inner: usize = s[2..].iter().product();
                let mut d = vec![T::zero(); self.value(*a).numel()];
                let mut src = 0;
                for b in 0..s[0] {
                    for &i in idx {
                        let at = (b * s[1] + i) * inner;
                        for (o, &g) in d[at..at + inner].iter_mut().zip(&gd[src..src + inner]) {
                            *o = *o + g;
                        }
                        src += inner;
                    }
                }
                accumulate(grads, *a, s, d);
            }
        }
        Ok(())
    }
}

/// `c += op(a) · op(b)` for the small per-sample products of batched
/// matmul, where packing overhead would dominate a blocked kernel. With
/// `a_t`, `a` is stored `[k, m]`; with `b_t`, `b` is stored `[n, k]`.
#[allow(clippy::too_many_arguments)]
fn small_gemm<T: Real>(m: usize, k: usize, n: usize, a: &[T], a_t: bool, b: &[T], b_t: bool, c: &mut [T]) {
    for r in 0..m {
        let row = &mut c[r * n..(r + 1) * n];
        if b_t {
            for (col, out) in row.iter_mut().enumerate() {
                let bc = &b[col * k..(col + 1) * k];
                let mut acc = T::zero();
                for kk in 0..k {
                    let av = if a_t { a[kk * m + r] } else { a[r * k + kk] };
                    acc = acc + av * bc[kk];
                }
                *out = *out + acc;
            }
        } else {
            for kk in 0..k {
                let av = if a_t { a[kk * m + r] } else { a[r * k + kk] };
                for (out, &bv) in row.iter_mut().zip(&b[kk * n..(kk + 1) * n]) {
                    *out = *out + av * bv;
                }
            }
        }
    }
}

fn transpose_data<T: Copy>(src: &[T], bs: usize, m: usize, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(src.len());
    for b in 0..bs {
        let block = &src[b * m * n..(b + 1) * m * n];
        for j in 0..n {
            for i in 0..m {
                out.push(block[i * n + j]);
            }
        }
    }
    out
}

fn accumulate<T: Real>(grads: &mut [Option<Tensor<T>>], var: Var, shape: &[usize], delta: Vec<T>) {
    match &mut grads[var.0] {
        Some(existing) => {
            for (e, d) in existing.data_mut().iter_mut().zip(delta) {
                *e = *e + d;
            }
        }
        slot @ None => *slot = Some(Tensor::from_parts(shape.to_vec(), delta)),
    }
}
