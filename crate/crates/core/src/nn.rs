//! Minimal dense network: ReLU hidden layers, linear output, optional dueling
//! head, He-uniform initialization, exact reverse-mode gradients and Adam.
//! Everything is 64-bit and deterministic given a seed.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::error::{Result, SimError};

/// One affine layer; weights are `[out, in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Layer {
    fn he_uniform<R: Rng + ?Sized>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let w = Array2::from_shape_fn((out_dim, in_dim), |_| rng.random_range(-limit..limit));
        Layer { w, b: Array1::zeros(out_dim) }
    }

    fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    /// x: [B, in] -> [B, out]
    fn affine(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.w.t());
        z += &self.b;
        z
    }
}

/// Output stage: a single linear layer, or a dueling pair combined as
/// q_i = v + a_i − mean(a).
#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Plain(Layer),
    Dueling { value: Layer, advantage: Layer },
}

/// Dense Q-network.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    /// Hidden layers, each followed by ReLU.
    trunk: Vec<Layer>,
    head: Head,
    /// Seed recorded at initialization (stored in checkpoints).
    pub seed: u64,
}

/// Combine a state value with an advantage vector into Q-values:
/// q_i = v + a_i − mean(a).
pub fn dueling_combine(v: f64, adv: &[f64]) -> Vec<f64> {
    let mean = adv.iter().sum::<f64>() / adv.len() as f64;
    adv.iter().map(|a| v + a - mean).collect()
}

impl DenseNet {
    /// Plain network `dims[0] -> ... -> dims[n-1]` with ReLU between all but
    /// the final affine map. `dims` must have at least two entries.
    pub fn plain<R: Rng + ?Sized>(dims: &[usize], seed: u64, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need input and output dims");
        let mut trunk = Vec::new();
        for i in 0..dims.len() - 2 {
            trunk.push(Layer::he_uniform(dims[i + 1], dims[i], rng));
        }
        let head = Head::Plain(Layer::he_uniform(
            dims[dims.len() - 1],
            dims[dims.len() - 2],
            rng,
        ));
        DenseNet { trunk, head, seed }
    }

    /// Shared ReLU trunk with separate value (out=1) and advantage (out=n_actions)
    /// heads.
    pub fn dueling<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: &[usize],
        n_actions: usize,
        seed: u64,
        rng: &mut R,
    ) -> Self {
        assert!(!hidden.is_empty(), "dueling net needs a trunk");
        let mut trunk = Vec::new();
        let mut prev = in_dim;
        for &hsz in hidden {
            trunk.push(Layer::he_uniform(hsz, prev, rng));
            prev = hsz;
        }
        let head = Head::Dueling {
            value: Layer::he_uniform(1, prev, rng),
            advantage: Layer::he_uniform(n_actions, prev, rng),
        };
        DenseNet { trunk, head, seed }
    }

    pub fn is_dueling(&self) -> bool {
        matches!(self.head, Head::Dueling { .. })
    }

    pub fn in_dim(&self) -> usize {
        self.trunk
            .first()
            .map(Layer::in_dim)
            .unwrap_or_else(|| match &self.head {
                Head::Plain(l) => l.in_dim(),
                Head::Dueling { value, .. } => value.in_dim(),
            })
    }

    pub fn out_dim(&self) -> usize {
        match &self.head {
            Head::Plain(l) => l.out_dim(),
            Head::Dueling { advantage, .. } => advantage.out_dim(),
        }
    }

    /// Forward pass for a batch of rows.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    /// Forward pass for a single input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.in_dim(),
                got: x.len(),
            });
        }
        let xb = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
        Ok(self.forward_batch(&xb).row(0).to_vec())
    }

    /// Forward pass keeping the intermediate activations needed by
    /// [`DenseNet::backward`].
    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(x.ncols(), self.in_dim(), "input width");
        let mut pre = Vec::with_capacity(self.trunk.len());
        let mut post = Vec::with_capacity(self.trunk.len());
        let mut cur = x.clone();
        for layer in &self.trunk {
            let z = layer.affine(&cur);
            let a = z.mapv(|v| v.max(0.0));
            pre.push(z);
            cur = a.clone();
            post.push(a);
        }
        let out = match &self.head {
            Head::Plain(l) => l.affine(&cur),
            Head::Dueling { value, advantage } => {
                let v = value.affine(&cur); // [B, 1]
                let a = advantage.affine(&cur); // [B, A]
                let mean = a.mean_axis(Axis(1)).expect("nonempty");
                let mut q = a;
                for (mut row, (&vi, &mi)) in q.outer_iter_mut().zip(v.column(0).iter().zip(mean.iter()))
                {
                    row.mapv_inplace(|e| vi + e - mi);
                }
                q
            }
        };
        let cache = ForwardCache {
            input: x.clone(),
            trunk_pre: pre,
            trunk_post: post,
        };
        (out, cache)
    }

    /// Exact gradients of `sum_batch(output · grad_out)` w.r.t. every
    /// parameter. The ReLU subgradient at zero is zero.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> Gradients {
        let batch_last = cache
            .trunk_post
            .last()
            .unwrap_or(&cache.input);
        let (head_grads, mut dt) = match &self.head {
            Head::Plain(l) => {
                let dw = grad_out.t().dot(batch_last);
                let db = grad_out.sum_axis(Axis(0));
                (vec![(dw, db)], grad_out.dot(&l.w))
            }
            Head::Dueling { value, advantage } => {
                // q_i = v + a_i − mean(a):  dv = Σ_i dq_i,  da_j = dq_j − mean_i(dq_i)
                let dv = grad_out.sum_axis(Axis(1)).insert_axis(Axis(1)); // [B,1]
                let row_mean = grad_out.mean_axis(Axis(1)).expect("nonempty");
                let mut dadv = grad_out.clone();
                for (mut row, &m) in dadv.outer_iter_mut().zip(row_mean.iter()) {
                    row.mapv_inplace(|e| e - m);
                }
                let dw_v = dv.t().dot(batch_last);
                let db_v = dv.sum_axis(Axis(0));
                let dw_a = dadv.t().dot(batch_last);
                let db_a = dadv.sum_axis(Axis(0));
                let dt = dv.dot(&value.w) + dadv.dot(&advantage.w);
                (vec![(dw_v, db_v), (dw_a, db_a)], dt)
            }
        };

        let mut trunk_grads = vec![None; self.trunk.len()];
        for i in (0..self.trunk.len()).rev() {
            let z = &cache.trunk_pre[i];
            let mut dz = dt.clone();
            dz.zip_mut_with(z, |g, &zz| {
                if zz <= 0.0 {
                    *g = 0.0;
                }
            });
            let below = if i == 0 { &cache.input } else { &cache.trunk_post[i - 1] };
            let dw = dz.t().dot(below);
            let db = dz.sum_axis(Axis(0));
            trunk_grads[i] = Some((dw, db));
            dt = dz.dot(&self.trunk[i].w);
        }

        Gradients {
            layers: trunk_grads
                .into_iter()
                .map(Option::unwrap)
                .chain(head_grads)
                .collect(),
        }
    }

    /// Parameter tensors in a fixed order (trunk layers, then head layers).
    pub(crate) fn layers(&self) -> Vec<&Layer> {
        let mut out: Vec<&Layer> = self.trunk.iter().collect();
        match &self.head {
            Head::Plain(l) => out.push(l),
            Head::Dueling { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
        }
        out
    }

    pub(crate) fn layers_mut(&mut self) -> Vec<&mut Layer> {
        let mut out: Vec<&mut Layer> = self.trunk.iter_mut().collect();
        match &mut self.head {
            Head::Plain(l) => out.push(l),
            Head::Dueling { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Serialize to a small header plus a flat little-endian f64 array.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(b"QNET");
        buf.extend_from_slice(&1u32.to_le_bytes()); // version
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.push(u8::from(self.is_dueling()));
        let layers = self.layers();
        buf.extend_from_slice(&(layers.len() as u32).to_le_bytes());
        for l in &layers {
            buf.extend_from_slice(&(l.out_dim() as u32).to_le_bytes());
            buf.extend_from_slice(&(l.in_dim() as u32).to_le_bytes());
        }
        for l in &layers {
            for v in l.w.iter().chain(l.b.iter()) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(SimError::BadWeightFile("truncated".into()));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 4)? != b"QNET" {
            return Err(SimError::BadWeightFile("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != 1 {
            return Err(SimError::BadWeightFile(format!("unknown version {version}")));
        }
        let seed = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let dueling = take(&mut pos, 1)?[0] != 0;
        let n_layers = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let head_layers = if dueling { 2 } else { 1 };
        if n_layers < head_layers {
            return Err(SimError::BadWeightFile("too few layers".into()));
        }
        let mut shapes = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let o = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            let i = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
            shapes.push((o, i));
        }
        let read_layer = |pos: &mut usize, (o, i): (usize, usize)| -> Result<Layer> {
            let mut w = Array2::zeros((o, i));
            for v in w.iter_mut() {
                *v = f64::from_le_bytes(take(pos, 8)?.try_into().unwrap());
            }
            let mut b = Array1::zeros(o);
            for v in b.iter_mut() {
                *v = f64::from_le_bytes(take(pos, 8)?.try_into().unwrap());
            }
            Ok(Layer { w, b })
        };
        let n_trunk = n_layers - head_layers;
        let mut trunk = Vec::with_capacity(n_trunk);
        for &s in &shapes[..n_trunk] {
            trunk.push(read_layer(&mut pos, s)?);
        }
        let head = if dueling {
            let value = read_layer(&mut pos, shapes[n_trunk])?;
            let advantage = read_layer(&mut pos, shapes[n_trunk + 1])?;
            Head::Dueling { value, advantage }
        } else {
            Head::Plain(read_layer(&mut pos, shapes[n_trunk])?)
        };
        if pos != bytes.len() {
            return Err(SimError::BadWeightFile("trailing bytes".into()));
        }
        Ok(DenseNet { trunk, head, seed })
    }
}

/// Intermediate activations saved by [`DenseNet::forward_cached`].
pub struct ForwardCache {
    input: Array2<f64>,
    trunk_pre: Vec<Array2<f64>>,
    trunk_post: Vec<Array2<f64>>,
}

/// Per-layer parameter gradients, ordered like [`DenseNet::layers`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

/// Adam accumulators; shapes mirror the network parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lr: f64,
}

impl AdamState {
    pub fn new(net: &DenseNet, lr: f64) -> Self {
        let zeros: Vec<_> = net
            .layers()
            .iter()
            .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            lr,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(net: &mut DenseNet, grads: &Gradients, state: &mut AdamState) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.eps, state.lr);
    for ((layer, (gw, gb)), ((mw, mb), (vw, vb))) in net
        .layers_mut()
        .into_iter()
        .zip(grads.layers.iter())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        ndarray::Zip::from(&mut layer.w)
            .and(gw)
            .and(&mut *mw)
            .and(&mut *vw)
            .for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        ndarray::Zip::from(&mut layer.b)
            .and(gb)
            .and(&mut *mb)
            .and(&mut *vb)
            .for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
    }
}

/// Scalar probe used by the gradient checker: `forward(x) · g`.
pub fn probe_loss(net: &DenseNet, x: &[f64], g: &[f64]) -> f64 {
    let y = net.forward(x).expect("dims");
    y.iter().zip(g).map(|(a, b)| a * b).sum()
}

/// Max relative error between analytic gradients and central finite
/// differences of [`probe_loss`] over every parameter.
pub fn gradient_check(net: &mut DenseNet, x: &[f64], g: &[f64], h: f64) -> f64 {
    let xb = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
    let gb = Array2::from_shape_vec((1, g.len()), g.to_vec()).expect("shape");
    let (_, cache) = net.forward_cached(&xb);
    let analytic = net.backward(&cache, &gb);

    let mut worst = 0.0f64;
    let n_layers = net.layers().len();
    for li in 0..n_layers {
        let n_w = analytic.layers[li].0.len();
        let n_b = analytic.layers[li].1.len();
        for k in 0..n_w + n_b {
            let ana = if k < n_w {
                analytic.layers[li].0.as_slice().unwrap()[k]
            } else {
                analytic.layers[li].1[k - n_w]
            };
            let bump = |net: &mut DenseNet, delta: f64| {
                let mut layers = net.layers_mut();
                if k < n_w {
                    layers[li].w.as_slice_mut().unwrap()[k] += delta;
                } else {
                    layers[li].b[k - n_w] += delta;
                }
            };
            bump(net, h);
            let up = probe_loss(net, x, g);
            bump(net, -2.0 * h);
            let down = probe_loss(net, x, g);
            bump(net, h);
            let numeric = (up - down) / (2.0 * h);
            let rel = (ana - numeric).abs() / ana.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Independent reference forward pass: plain nested loops.
    fn reference_forward(net: &DenseNet, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for layer in &net.trunk {
            let mut next = vec![0.0; layer.out_dim()];
            for (o, nv) in next.iter_mut().enumerate() {
                let mut acc = layer.b[o];
                for (i, &xi) in cur.iter().enumerate() {
                    acc += layer.w[(o, i)] * xi;
                }
                *nv = acc.max(0.0);
            }
            cur = next;
        }
        let affine = |l: &Layer, inp: &[f64]| -> Vec<f64> {
            (0..l.out_dim())
                .map(|o| l.b[o] + inp.iter().enumerate().map(|(i, &v)| l.w[(o, i)] * v).sum::<f64>())
                .collect()
        };
        match &net.head {
            Head::Plain(l) => affine(l, &cur),
            Head::Dueling { value, advantage } => {
                let v = affine(value, &cur)[0];
                let a = affine(advantage, &cur);
                dueling_combine(v, &a)
            }
        }
    }

    #[test]
    fn zero_net_outputs_zero() {
        let mut r = rng(0);
        let mut net = DenseNet::plain(&[3, 4, 2], 0, &mut r);
        for l in net.layers_mut() {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_single_layer() {
        let mut r = rng(1);
        let mut net = DenseNet::plain(&[2, 2], 0, &mut r);
        if let Head::Plain(l) = &mut net.head {
            l.w.assign(&ndarray::array![[1.0, 0.0], [0.0, 1.0]]);
            l.b.fill(0.0);
        }
        assert_eq!(net.forward(&[0.5, -0.25]).unwrap(), vec![0.5, -0.25]);
    }

    #[test]
    fn forward_matches_reference() {
        let mut r = rng(2);
        for seed in 0..5u64 {
            let net = DenseNet::plain(&[4, 16, 16, 5], seed, &mut r);
            let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
            let got = net.forward(&x).unwrap();
            let want = reference_forward(&net, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "{g} vs {w}");
            }
        }
        let net = DenseNet::dueling(4, &[8, 8], 5, 9, &mut r);
        let x = [0.3, -0.7, 0.1, 0.9];
        let got = net.forward(&x).unwrap();
        let want = reference_forward(&net, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let mut r = rng(3);
        let net = DenseNet::plain(&[3, 8, 2], 0, &mut r);
        let x = Array2::from_shape_vec((1, 3), vec![0.1, 0.2, 0.3]).unwrap();
        let (_, cache) = net.forward_cached(&x);
        let grads = net.backward(&cache, &Array2::zeros((1, 2)));
        for (gw, gb) in &grads.layers {
            assert!(gw.iter().all(|&v| v == 0.0));
            assert!(gb.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_linear_neuron_gradient() {
        let mut r = rng(4);
        let mut net = DenseNet::plain(&[1, 1], 0, &mut r);
        if let Head::Plain(l) = &mut net.head {
            l.w[(0, 0)] = 0.7;
            l.b[0] = 0.0;
        }
        let x = Array2::from_shape_vec((1, 1), vec![2.5]).unwrap();
        let (_, cache) = net.forward_cached(&x);
        let grads = net.backward(&cache, &Array2::from_shape_vec((1, 1), vec![3.0]).unwrap());
        // d/dw (w·x · g) = x·g
        assert!((grads.layers[0].0[(0, 0)] - 2.5 * 3.0).abs() < 1e-15);
        assert!((grads.layers[0].1[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn finite_difference_agreement() {
        let mut r = rng(5);
        let mut net = DenseNet::plain(&[4, 16, 16, 5], 5, &mut r);
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let err = gradient_check(&mut net, &x, &g, 1e-5);
        assert!(err < 1e-6, "max rel err {err}");
    }

    #[test]
    fn finite_difference_agreement_dueling() {
        let mut r = rng(6);
        let mut net = DenseNet::dueling(4, &[12, 12], 5, 6, &mut r);
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let err = gradient_check(&mut net, &x, &g, 1e-5);
        assert!(err < 1e-6, "max rel err {err}");
    }

    #[test]
    fn dueling_combine_identities() {
        let q = dueling_combine(1.0, &[0.5, -0.5]);
        assert_eq!(q, vec![1.5, 0.5]);
        // constant advantage collapses to v
        let q = dueling_combine(2.0, &[3.0, 3.0, 3.0]);
        assert!(q.iter().all(|&x| (x - 2.0).abs() < 1e-15));
        // mean(q) = v
        let adv = [0.3, -1.2, 2.2, 0.0];
        let q = dueling_combine(-0.7, &adv);
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        assert!((mean - (-0.7)).abs() < 1e-12);
        // shifting all advantages leaves q unchanged
        let shifted: Vec<f64> = adv.iter().map(|a| a + 5.0).collect();
        let q2 = dueling_combine(-0.7, &shifted);
        for (a, b) in q.iter().zip(&q2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_zero_gradient_is_a_noop() {
        let mut r = rng(7);
        let mut net = DenseNet::plain(&[2, 4, 2], 0, &mut r);
        let before = net.clone();
        let grads = Gradients {
            layers: net
                .layers()
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect(),
        };
        let mut st = AdamState::new(&net, 0.01);
        adam_step(&mut net, &grads, &mut st);
        assert_eq!(net, before);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let mut r = rng(8);
        let mut net = DenseNet::plain(&[1, 1], 0, &mut r);
        let w0 = if let Head::Plain(l) = &net.head { l.w[(0, 0)] } else { unreachable!() };
        let grads = Gradients {
            layers: vec![(
                Array2::from_shape_vec((1, 1), vec![0.37]).unwrap(),
                Array1::from_vec(vec![-4.0]),
            )],
        };
        let mut st = AdamState::new(&net, 0.01);
        adam_step(&mut net, &grads, &mut st);
        if let Head::Plain(l) = &net.head {
            // after bias correction the first step is −lr·sign(g) up to ε
            assert!((l.w[(0, 0)] - (w0 - 0.01)).abs() < 1e-6);
            assert!((l.b[0] - 0.01).abs() < 1e-6);
        }
    }

    #[test]
    fn adam_minimizes_quadratic_bowl() {
        // f(θ) = θ² on a 1-parameter "network": drive w to zero.
        let mut r = rng(9);
        let mut net = DenseNet::plain(&[1, 1], 0, &mut r);
        if let Head::Plain(l) = &mut net.head {
            l.w[(0, 0)] = 1.0;
            l.b[0] = 0.0;
        }
        let mut st = AdamState::new(&net, 0.01);
        for _ in 0..500 {
            let w = if let Head::Plain(l) = &net.head { l.w[(0, 0)] } else { unreachable!() };
            let grads = Gradients {
                layers: vec![(
                    Array2::from_shape_vec((1, 1), vec![2.0 * w]).unwrap(),
                    Array1::zeros(1),
                )],
            };
            adam_step(&mut net, &grads, &mut st);
        }
        if let Head::Plain(l) = &net.head {
            assert!(l.w[(0, 0)].abs() < 1e-3, "w = {}", l.w[(0, 0)]);
        }
    }

    #[test]
    fn save_load_roundtrip_bit_exact() {
        let mut r = rng(10);
        let dir = std::env::temp_dir().join("aoisim_nn_test");
        std::fs::create_dir_all(&dir).unwrap();
        for dueling in [false, true] {
            let net = if dueling {
                DenseNet::dueling(4, &[8, 8], 5, 42, &mut r)
            } else {
                DenseNet::plain(&[4, 8, 8, 5], 42, &mut r)
            };
            let path = dir.join(format!("net_{dueling}.qnet"));
            net.save(&path).unwrap();
            let loaded = DenseNet::load(&path).unwrap();
            assert_eq!(net, loaded);
            let x = [0.1, 0.2, 0.3, 0.4];
            assert_eq!(net.forward(&x).unwrap(), loaded.forward(&x).unwrap());
        }
    }

    #[test]
    fn clone_forward_agrees_bit_exactly() {
        let mut r = rng(11);
        let net = DenseNet::dueling(4, &[64, 64], 5, 0, &mut r);
        let copy = net.clone();
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        assert_eq!(net.forward(&x).unwrap(), copy.forward(&x).unwrap());
    }
}
