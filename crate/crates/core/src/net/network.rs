use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::train::{Example, Minibatch};
use super::{DropoutPlacement, NetError, NetworkConfig};
use crate::seed;

/// Dense layer. Weights are stored input-major: the weight from input `i`
/// to unit `o` sits at `weights[i * n_out + o]`, so a sparse input touches
/// contiguous rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn init(n_in: usize, n_out: usize, cfg: &NetworkConfig, rng: &mut seed::Rng) -> Layer {
        Layer { n_in, n_out, weights: gaussian(n_in * n_out, cfg.init_std, rng), bias: vec![cfg.init_bias; n_out] }
    }

    /// Weight from input `i` to unit `o`.
    pub fn weight(&self, o: usize, i: usize) -> f64 {
        self.weights[i * self.n_out + o]
    }

    /// Weights as a row-major `(n_out, n_in)` matrix.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.weights.len()];
        for (i, row) in self.weights.chunks_exact(self.n_out).enumerate() {
            for (o, &w) in row.iter().enumerate() {
                out[o * self.n_in + i] = w;
            }
        }
        out
    }

    /// Builds a layer from a row-major `(n_out, n_in)` weight matrix.
    pub fn from_row_major(n_in: usize, n_out: usize, row_major: &[f64], bias: Vec<f64>) -> Layer {
        let mut weights = vec![0.0; n_in * n_out];
        for (o, row) in row_major.chunks_exact(n_in).enumerate() {
            for (i, &w) in row.iter().enumerate() {
                weights[i * n_out + o] = w;
            }
        }
        Layer { n_in, n_out, weights, bias }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n_out..(i + 1) * self.n_out]
    }

    /// `out += W x`, skipping zero inputs.
    fn accumulate(&self, x: &[f64], out: &mut [f64]) {
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                axpy(v, self.row(i), out);
            }
        }
    }
}

fn gaussian(n: usize, std: f64, rng: &mut seed::Rng) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, std).expect("std validated");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// A network input: either a dense vector or the indices of the 1-bits of a
/// binary vector.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Dense(&'a [f64]),
    Bits(&'a [u32]),
}

impl Input<'_> {
    fn check(&self, dim: usize) -> Result<(), NetError> {
        match self {
            Input::Dense(x) if x.len() != dim => Err(NetError::InputLength { got: x.len(), expected: dim }),
            Input::Bits(b) => match b.iter().find(|&&i| i as usize >= dim) {
                Some(&i) => Err(NetError::InputLength { got: i as usize + 1, expected: dim }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    fn to_dense(self, dim: usize) -> Vec<f64> {
        match self {
            Input::Dense(x) => x.to_vec(),
            Input::Bits(b) => {
                let mut x = vec![0.0; dim];
                for &i in b {
                    x[i as usize] = 1.0;
                }
                x
            }
        }
    }
}

/// Forward-pass mode. Training mode applies inverted dropout with masks
/// drawn from `(seed, step, position)`, so a given example sees the same
/// mask wherever its minibatch is sharded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eval,
    Train { step: u64 },
}

/// Gradient (or any parameter-shaped quantity) of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
    pub heads: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &MultitaskNetwork) -> Gradients {
        Gradients {
            layers: net.layers.iter().map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()])).collect(),
            heads: vec![0.0; net.heads.len()],
        }
    }

    fn same_shape(&self, other: &Gradients) -> bool {
        self.heads.len() == other.heads.len()
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| a.0.len() == b.0.len() && a.1.len() == b.1.len())
    }

    fn tensors(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.layers.iter().flat_map(|(w, b)| [w, b]).chain(std::iter::once(&self.heads))
    }

    fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|(w, b)| [w, b]).chain(std::iter::once(&mut self.heads))
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn head_slice(&self, task: usize, width: usize) -> &[f64] {
        &self.heads[task * 2 * width..(task + 1) * 2 * width]
    }
}

/// Count-weighted average of per-shard gradients. With each shard's
/// gradient normalized by its own example count, the result equals the
/// gradient of the concatenated batch.
pub fn aggregate_gradients(grads: &[Gradients], counts: &[usize]) -> Result<Gradients, NetError> {
    if grads.is_empty() || grads.len() != counts.len() {
        return Err(NetError::Shape(format!("{} gradients for {} counts", grads.len(), counts.len())));
    }
    if let Some(g) = grads.iter().find(|g| !g.same_shape(&grads[0])) {
        return Err(NetError::Shape(format!("{} vs {} head entries", g.heads.len(), grads[0].heads.len())));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(NetError::EmptyBatch);
    }
    let mut out = grads[0].clone();
    let mut first = true;
    for (g, &c) in grads.iter().zip(counts) {
        let share = c as f64 / total as f64;
        for (dst, src) in out.tensors_mut().zip(g.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = if first { share * s } else { *d + share * s };
            }
        }
        first = false;
    }
    Ok(out)
}

/// Shared hidden layers plus `n_tasks` two-class softmax heads without bias.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitaskNetwork {
    pub(crate) config: NetworkConfig,
    pub(crate) layers: Vec<Layer>,
    /// Head weights at `[(task * 2 + class) * width + j]`, class 1 = active.
    pub(crate) heads: Vec<f64>,
    pub(crate) step: u64,
}

/// Per-example activations kept for backpropagation.
struct Trace {
    /// Output of each hidden layer after ReLU and dropout.
    outputs: Vec<Vec<f64>>,
    /// d output / d pre-activation for each hidden unit (ReLU gate times
    /// dropout scale).
    gates: Vec<Vec<f64>>,
    /// Dense input, only kept when there are no hidden layers.
    dense_input: Option<Vec<f64>>,
}

impl MultitaskNetwork {
    /// Fresh network: weights from N(0, init_std²), biases `init_bias`.
    pub fn init(config: NetworkConfig) -> Result<Self, NetError> {
        config.validate()?;
        let mut rng = seed::rng_for(config.seed, "init/layers", 0);
        let mut layers = Vec::with_capacity(config.hidden_sizes.len());
        let mut n_in = config.input_dim;
        for &n_out in &config.hidden_sizes {
            layers.push(Layer::init(n_in, n_out, &config, &mut rng));
            n_in = n_out;
        }
        let width = config.top_width();
        let heads = (0..config.n_tasks).flat_map(|t| fresh_head(&config, width, t)).collect();
        Ok(MultitaskNetwork { config, layers, heads, step: 0 })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn heads(&self) -> &[f64] {
        &self.heads
    }

    pub fn heads_mut(&mut self) -> &mut [f64] {
        &mut self.heads
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn n_tasks(&self) -> usize {
        self.config.n_tasks
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum::<usize>() + self.heads.len()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
            && self.heads.iter().all(|v| v.is_finite())
    }

    /// Single-task network for `target`: hidden layers copied from `self`,
    /// head freshly initialized from the target's seed.
    pub fn transplant(&self, target: NetworkConfig) -> Result<MultitaskNetwork, NetError> {
        if target.input_dim != self.config.input_dim || target.hidden_sizes != self.config.hidden_sizes {
            return Err(NetError::Shape(format!(
                "source layers {}x{:?} do not match target {}x{:?}",
                self.config.input_dim, self.config.hidden_sizes, target.input_dim, target.hidden_sizes
            )));
        }
        let mut net = MultitaskNetwork::init(target)?;
        net.layers = self.layers.clone();
        Ok(net)
    }

    fn check_task(&self, task: usize) -> Result<(), NetError> {
        if task >= self.config.n_tasks {
            return Err(NetError::TaskOutOfRange { task, n_tasks: self.config.n_tasks });
        }
        Ok(())
    }

    fn dropout_rate(&self, layer: usize) -> f64 {
        match self.config.dropout {
            DropoutPlacement::AllHidden => self.config.dropout_rate,
            DropoutPlacement::FirstOnly if layer == 0 => self.config.dropout_rate,
            DropoutPlacement::FirstOnly => 0.0,
        }
    }

    fn trace(&self, input: Input, mode: Mode, position: u64) -> Trace {
        let mut rng = match mode {
            Mode::Train { step } if self.config.dropout_rate > 0.0 => {
                Some(seed::rng_for(seed::derive(self.config.seed, "dropout", step), "example", position))
            }
            _ => None,
        };
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut gates = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut pre = layer.bias.clone();
            if l == 0 {
                match input {
                    Input::Bits(bits) => {
                        for &i in bits {
                            axpy(1.0, layer.row(i as usize), &mut pre);
                        }
                    }
                    Input::Dense(x) => layer.accumulate(x, &mut pre),
                }
            } else {
                layer.accumulate(&outputs[l - 1], &mut pre);
            }
            let rate = self.dropout_rate(l);
            let scale = 1.0 / (1.0 - rate);
            let mut gate = vec![0.0; layer.n_out];
            for (p, g) in pre.iter_mut().zip(gate.iter_mut()) {
                let keep = match rng.as_mut() {
                    Some(r) if rate > 0.0 => r.gen::<f64>() >= rate,
                    _ => true,
                };
                if *p > 0.0 && keep {
                    *g = if rng.is_some() && rate > 0.0 { scale } else { 1.0 };
                    *p *= *g;
                } else {
                    *p = 0.0;
                }
            }
            outputs.push(pre);
            gates.push(gate);
        }
        let dense_input = self.layers.is_empty().then(|| input.to_dense(self.config.input_dim));
        Trace { outputs, gates, dense_input }
    }

    fn top<'a>(&self, t: &'a Trace) -> &'a [f64] {
        t.outputs.last().map(Vec::as_slice).or(t.dense_input.as_deref()).expect("trace has a top")
    }

    fn logits(&self, top: &[f64], task: usize) -> [f64; 2] {
        let w = top.len();
        let base = task * 2 * w;
        [dot(&self.heads[base..base + w], top), dot(&self.heads[base + w..base + 2 * w], top)]
    }

    /// Top-layer representation of an input in evaluation mode.
    pub fn representation(&self, input: Input) -> Result<Vec<f64>, NetError> {
        input.check(self.config.input_dim)?;
        let t = self.trace(input, Mode::Eval, 0);
        Ok(self.top(&t).to_vec())
    }

    /// Class probabilities `[P(inactive), P(active)]` for `task`.
    pub fn class_probabilities(&self, input: Input, task: usize, mode: Mode) -> Result<[f64; 2], NetError> {
        self.check_task(task)?;
        input.check(self.config.input_dim)?;
        let t = self.trace(input, mode, 0);
        Ok(softmax2(self.logits(self.top(&t), task)))
    }

    /// Probability that `input` is active for `task`.
    pub fn forward(&self, input: Input, task: usize, mode: Mode) -> Result<f64, NetError> {
        Ok(self.class_probabilities(input, task, mode)?[1])
    }

    /// Eval-mode active probabilities for a list of examples.
    pub fn predict(&self, bits: &[Vec<u32>], task: usize) -> Result<Vec<f64>, NetError> {
        bits.iter().map(|b| self.forward(Input::Bits(b), task, Mode::Eval)).collect()
    }

    /// Weighted mean cross-entropy `(1/n) Σ wᵢ·(−ln p(yᵢ))` of a minibatch
    /// and its gradient. Each example reaches only its own task's head.
    pub fn loss_and_gradient(&self, batch: &Minibatch, mode: Mode) -> Result<(f64, Gradients), NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let mut grad = Gradients::zeros_like(self);
        let n = batch.len() as f64;
        let width = self.config.top_width();
        let mut loss = 0.0;
        for (i, ex) in batch.examples.iter().enumerate() {
            self.check_task(ex.task)?;
            let input = Input::Bits(&ex.bits);
            input.check(self.config.input_dim)?;
            let t = self.trace(input, mode, (batch.offset + i) as u64);
            let top = self.top(&t);
            let z = self.logits(top, ex.task);
            let p = softmax2(z);
            let y = usize::from(ex.label);
            let c = ex.weight / n;
            loss += c * (log_sum_exp2(z) - z[y]);

            // d loss / d logit
            let dz = [c * (p[0] - (1 - y) as f64), c * (p[1] - y as f64)];
            let base = ex.task * 2 * width;
            for k in 0..2 {
                let gh = &mut grad.heads[base + k * width..base + (k + 1) * width];
                for (g, &a) in gh.iter_mut().zip(top) {
                    *g += dz[k] * a;
                }
            }
            if self.layers.is_empty() {
                continue;
            }
            let (w0, w1) = (&self.heads[base..base + width], &self.heads[base + width..base + 2 * width]);
            let mut g_out: Vec<f64> = w0.iter().zip(w1).map(|(a, b)| dz[0] * a + dz[1] * b).collect();
            self.backward(&t, input, &mut g_out, &mut grad);
        }
        if !loss.is_finite() {
            return Err(NetError::NonFinite("loss"));
        }
        Ok((loss, grad))
    }

    fn backward(&self, t: &Trace, input: Input, g_out: &mut Vec<f64>, grad: &mut Gradients) {
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            for (g, &gate) in g_out.iter_mut().zip(&t.gates[l]) {
                *g *= gate;
            }
            let (gw, gb) = &mut grad.layers[l];
            for (b, &g) in gb.iter_mut().zip(g_out.iter()) {
                *b += g;
            }
            let n_out = layer.n_out;
            let mut outer = |i: usize, x: f64| axpy(x, g_out, &mut gw[i * n_out..(i + 1) * n_out]);
            if l == 0 {
                match input {
                    Input::Bits(bits) => bits.iter().for_each(|&i| outer(i as usize, 1.0)),
                    Input::Dense(x) => x.iter().enumerate().filter(|(_, v)| **v != 0.0).for_each(|(i, &v)| outer(i, v)),
                }
                break;
            }
            let x_prev = &t.outputs[l - 1];
            for (i, &v) in x_prev.iter().enumerate() {
                if v != 0.0 {
                    outer(i, v);
                }
            }
            // units whose activation is zero have a zero gate below, so
            // their input gradient is never used
            let g_prev = (0..layer.n_in)
                .map(|i| if x_prev[i] != 0.0 { dot(layer.row(i), g_out) } else { 0.0 })
                .collect();
            *g_out = g_prev;
        }
    }

    /// `θ ← θ − lr·g`, then advances the step counter.
    pub fn apply_gradient(&mut self, grad: &Gradients, lr: f64) -> Result<(), NetError> {
        let shape_ok = grad.heads.len() == self.heads.len()
            && grad.layers.len() == self.layers.len()
            && grad.layers.iter().zip(&self.layers).all(|((w, b), l)| w.len() == l.weights.len() && b.len() == l.bias.len());
        if !shape_ok {
            return Err(NetError::Shape("gradient does not match network".into()));
        }
        if lr != 0.0 {
            for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grad.layers) {
                axpy(-lr, gw, &mut layer.weights);
                axpy(-lr, gb, &mut layer.bias);
            }
            axpy(-lr, &grad.heads, &mut self.heads);
        }
        self.step += 1;
        if !self.is_finite() {
            return Err(NetError::NonFinite("parameters"));
        }
        Ok(())
    }

    /// One SGD step on `batch` at the configured learning rate, with the
    /// batch split into `config.workers` shards whose gradients are
    /// aggregated. Returns the minibatch loss.
    pub fn sgd_step(&mut self, batch: &Minibatch) -> Result<f64, NetError> {
        use rayon::prelude::*;
        let mode = Mode::Train { step: self.step };
        let shards = batch.shards(self.config.workers);
        let (loss, grad) = if shards.len() == 1 {
            self.loss_and_gradient(batch, mode)?
        } else {
            let results: Vec<(f64, Gradients)> = shards
                .par_iter()
                .map(|s| self.loss_and_gradient(s, mode))
                .collect::<Result<_, _>>()?;
            let counts: Vec<usize> = shards.iter().map(Minibatch::len).collect();
            let total: usize = counts.iter().sum();
            let loss = results.iter().zip(&counts).map(|((l, _), &c)| l * c as f64 / total as f64).sum();
            let grads: Vec<Gradients> = results.into_iter().map(|(_, g)| g).collect();
            (loss, aggregate_gradients(&grads, &counts)?)
        };
        let lr = self.config.learning_rate_at(self.step);
        self.apply_gradient(&grad, lr)?;
        Ok(loss)
    }

    /// True when every top-layer unit is zero on every example in eval mode.
    pub fn top_layer_dead(&self, examples: &[&Example]) -> bool {
        if self.layers.is_empty() || examples.is_empty() {
            return false;
        }
        examples
            .iter()
            .all(|ex| self.trace(Input::Bits(&ex.bits), Mode::Eval, 0).outputs.last().unwrap().iter().all(|&v| v == 0.0))
    }
}

fn fresh_head(cfg: &NetworkConfig, width: usize, task: usize) -> Vec<f64> {
    let mut rng = seed::rng_for(cfg.seed, "init/head", task as u64);
    gaussian(2 * width, cfg.init_std, &mut rng)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn log_sum_exp2(z: [f64; 2]) -> f64 {
    let m = z[0].max(z[1]);
    m + ((z[0] - m).exp() + (z[1] - m).exp()).ln()
}

fn softmax2(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cfg(input: usize, hidden: Vec<usize>, tasks: usize) -> NetworkConfig {
        NetworkConfig {
            input_dim: input,
            hidden_sizes: hidden,
            n_tasks: tasks,
            dropout_rate: 0.0,
            seed: 3,
            ..Default::default()
        }
    }

    fn example(bits: Vec<u32>, task: usize, label: bool, weight: f64) -> Example {
        Example { bits, task, label, weight }
    }

    #[test]
    fn init_is_seeded() {
        let a = MultitaskNetwork::init(cfg(16, vec![8, 4], 2)).unwrap();
        let b = MultitaskNetwork::init(cfg(16, vec![8, 4], 2)).unwrap();
        assert_eq!(a, b);
        let z = MultitaskNetwork::init(NetworkConfig { init_std: 0.0, ..cfg(16, vec![8], 1) }).unwrap();
        assert!(z.layers[0].weights.iter().all(|&w| w == 0.0));
        assert!(z.layers[0].bias.iter().all(|&b| b == 0.5));
    }

    #[test]
    fn init_std_matches() {
        let net = MultitaskNetwork::init(cfg(1024, vec![2000], 1)).unwrap();
        let w = &net.layers[0].weights;
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        assert!((sd - 0.01).abs() < 0.0005, "{sd}");
    }

    #[test]
    fn zero_head_gives_half() {
        let mut net = MultitaskNetwork::init(cfg(8, vec![4], 2)).unwrap();
        net.heads.iter_mut().for_each(|w| *w = 0.0);
        assert_eq!(net.forward(Input::Bits(&[1, 3]), 1, Mode::Eval).unwrap(), 0.5);
        assert!(matches!(net.forward(Input::Bits(&[1]), 2, Mode::Eval), Err(NetError::TaskOutOfRange { .. })));
        assert!(matches!(net.forward(Input::Dense(&[0.0; 3]), 0, Mode::Eval), Err(NetError::InputLength { .. })));
    }

    #[test]
    fn hand_computed_2_2_1() {
        let mut net = MultitaskNetwork::init(cfg(2, vec![2], 1)).unwrap();
        net.layers[0] = Layer::from_row_major(2, 2, &[1.0, -2.0, 0.5, 1.5], vec![0.25, -3.0]);
        net.heads = vec![0.3, -0.7, -0.2, 1.1];
        let x = [2.0, 0.5];
        // h = relu([2 - 1 + 0.25, 1 + 0.75 - 3]) = [1.25, 0]
        let z0: f64 = 0.3 * 1.25;
        let z1: f64 = -0.2 * 1.25;
        let expect = z1.exp() / (z0.exp() + z1.exp());
        let p = net.forward(Input::Dense(&x), 0, Mode::Eval).unwrap();
        assert!((p - expect).abs() < 1e-12);
        let probs = net.class_probabilities(Input::Dense(&x), 0, Mode::Eval).unwrap();
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_example_loss_is_ln2() {
        let mut net = MultitaskNetwork::init(cfg(8, vec![4], 1)).unwrap();
        net.heads.iter_mut().for_each(|w| *w = 0.0);
        let ex = [example(vec![0, 2], 0, true, 1.0)];
        let (loss, _) = net.loss_and_gradient(&Minibatch::new(ex.iter().collect()), Mode::Eval).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn other_heads_get_no_gradient() {
        let net = MultitaskNetwork::init(cfg(8, vec![4], 2)).unwrap();
        let ex = [example(vec![0, 2], 0, true, 1.0), example(vec![5], 0, false, 2.0)];
        let (_, g) = net.loss_and_gradient(&Minibatch::new(ex.iter().collect()), Mode::Eval).unwrap();
        assert!(g.head_slice(1, 4).iter().all(|&v| v == 0.0));
        assert!(g.head_slice(0, 4).iter().any(|&v| v != 0.0));
    }

    fn param(net: &mut MultitaskNetwork, which: usize, j: usize) -> &mut f64 {
        let n_layers = net.layers.len();
        if which == 2 * n_layers {
            &mut net.heads[j]
        } else if which % 2 == 0 {
            &mut net.layers[which / 2].weights[j]
        } else {
            &mut net.layers[which / 2].bias[j]
        }
    }

    fn finite_difference_check(net: &mut MultitaskNetwork, batch: &Minibatch, rng: &mut seed::Rng, samples: usize) {
        let (_, g) = net.loss_and_gradient(batch, Mode::Eval).unwrap();
        let eps = 1e-4;
        let n_layers = net.layers.len();
        for _ in 0..samples {
            let which = rng.gen_range(0..2 * n_layers + 1);
            let analytic_tensor = match which {
                w if w == 2 * n_layers => &g.heads,
                w if w % 2 == 0 => &g.layers[w / 2].0,
                w => &g.layers[w / 2].1,
            };
            let j = rng.gen_range(0..analytic_tensor.len());
            let analytic = analytic_tensor[j];
            let orig = *param(net, which, j);
            *param(net, which, j) = orig + eps;
            let up = net.loss_and_gradient(batch, Mode::Eval).unwrap().0;
            *param(net, which, j) = orig - eps;
            let down = net.loss_and_gradient(batch, Mode::Eval).unwrap().0;
            *param(net, which, j) = orig;
            let numeric = (up - down) / (2.0 * eps);
            let scale = numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(
                (numeric - analytic).abs() / scale < 1e-5 || (numeric - analytic).abs() < 1e-10,
                "tensor {which}: numeric {numeric} analytic {analytic}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seed::rng(11);
        let mut net = MultitaskNetwork::init(NetworkConfig { init_std: 0.5, init_bias: 0.1, ..cfg(16, vec![8, 4], 3) }).unwrap();
        let examples: Vec<Example> = (0..12)
            .map(|i| {
                let bits = (0..16u32).filter(|_| rng.gen_bool(0.3)).collect();
                example(bits, i % 3, rng.gen_bool(0.4), rng.gen_range(0.5..3.0))
            })
            .collect();
        let batch = Minibatch::new(examples.iter().collect());
        finite_difference_check(&mut net, &batch, &mut rng, 200);
    }

    #[test]
    fn logistic_mode_gradient() {
        let mut rng = seed::rng(12);
        let mut net = MultitaskNetwork::init(NetworkConfig { init_std: 0.5, ..cfg(10, vec![], 2) }).unwrap();
        let examples: Vec<Example> =
            (0..6).map(|i| example(vec![(i % 10) as u32, 3], i % 2, i % 3 == 0, 1.0)).collect();
        finite_difference_check(&mut net, &Minibatch::new(examples.iter().collect()), &mut rng, 40);
    }

    #[test]
    fn dropout_expectation() {
        let net = MultitaskNetwork::init(NetworkConfig {
            dropout_rate: 0.25,
            init_std: 0.3,
            ..cfg(16, vec![12], 1)
        })
        .unwrap();
        let input = Input::Bits(&[0, 3, 7, 9]);
        let eval = net.trace(input, Mode::Eval, 0).outputs[0].clone();
        let trials = 20_000;
        let mut mean = vec![0.0; 12];
        for s in 0..trials {
            let t = net.trace(input, Mode::Train { step: s }, 0);
            for (m, v) in mean.iter_mut().zip(&t.outputs[0]) {
                *m += v / trials as f64;
            }
        }
        for (m, e) in mean.iter().zip(&eval) {
            // Bernoulli(0.75) scaled by 4/3 has sd e/sqrt(3) per draw
            let se = e / 3f64.sqrt() / (trials as f64).sqrt();
            assert!((m - e).abs() <= 5.0 * se + 1e-12, "{m} vs {e}");
        }
    }

    #[test]
    fn first_only_dropout() {
        let net = MultitaskNetwork::init(NetworkConfig {
            dropout_rate: 0.5,
            dropout: DropoutPlacement::FirstOnly,
            ..cfg(8, vec![6, 5], 1)
        })
        .unwrap();
        let t = net.trace(Input::Bits(&[1, 2]), Mode::Train { step: 0 }, 0);
        assert!(t.gates[1].iter().all(|&g| g == 0.0 || g == 1.0));
        assert!(t.gates[0].iter().all(|&g| g == 0.0 || g == 2.0));
    }

    #[test]
    fn aggregation() {
        let net = MultitaskNetwork::init(cfg(8, vec![4], 1)).unwrap();
        let ex = [example(vec![1], 0, true, 1.0)];
        let (_, g) = net.loss_and_gradient(&Minibatch::new(ex.iter().collect()), Mode::Eval).unwrap();
        assert_eq!(aggregate_gradients(&[g.clone()], &[5]).unwrap(), g);
        let two = aggregate_gradients(&[g.clone(), g.clone()], &[3, 7]).unwrap();
        for (a, b) in two.heads.iter().zip(&g.heads) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        let other = Gradients::zeros_like(&MultitaskNetwork::init(cfg(8, vec![3], 1)).unwrap());
        assert!(aggregate_gradients(&[g, other], &[1, 1]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let net = MultitaskNetwork::init(cfg(5, vec![3], 1)).unwrap();
        let l = &net.layers[0];
        let rm = l.to_row_major();
        assert_eq!(rm[2 * 5 + 4], l.weight(2, 4));
        assert_eq!(&Layer::from_row_major(5, 3, &rm, l.bias.clone()), l);
    }

    #[test]
    fn transplant_copies_hidden_layers() {
        let src = MultitaskNetwork::init(cfg(8, vec![6, 3], 4)).unwrap();
        let dst = src.transplant(NetworkConfig { seed: 99, ..cfg(8, vec![6, 3], 1) }).unwrap();
        assert_eq!(dst.layers, src.layers);
        assert_eq!(dst.heads.len(), 6);
        assert!(src.transplant(cfg(8, vec![6, 4], 1)).is_err());
    }
}
