use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{MultitaskNetwork, NetError};
use crate::data::Collection;
use crate::seed;

/// One training example routed to the head `task`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    /// Indices of the 1-bits of the input fingerprint.
    pub bits: Vec<u32>,
    pub task: usize,
    pub label: bool,
    pub weight: f64,
}

/// Examples of one SGD step. `offset` is the position of the first example
/// within the full minibatch; dropout masks are keyed by position.
#[derive(Debug, Clone)]
pub struct Minibatch<'a> {
    pub examples: Vec<&'a Example>,
    pub offset: usize,
}

impl<'a> Minibatch<'a> {
    pub fn new(examples: Vec<&'a Example>) -> Self {
        Minibatch { examples, offset: 0 }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Splits into at most `p` contiguous non-empty shards.
    pub fn shards(&self, p: usize) -> Vec<Minibatch<'a>> {
        let p = p.clamp(1, self.len().max(1));
        let base = self.len() / p;
        let extra = self.len() % p;
        let mut out = Vec::with_capacity(p);
        let mut start = 0;
        for k in 0..p {
            let size = base + usize::from(k < extra);
            out.push(Minibatch { examples: self.examples[start..start + size].to_vec(), offset: self.offset + start });
            start += size;
        }
        out
    }
}

/// Weight given to each active so a task's actives carry the same total
/// weight as its inactives.
pub fn active_weight(n_actives: usize, n_inactives: usize) -> f64 {
    if n_actives == 0 || n_inactives == 0 {
        1.0
    } else {
        n_inactives as f64 / n_actives as f64
    }
}

/// Step count for `epochs` passes over a pool plus a constant floor.
pub fn scaled_steps(pool: usize, batch_size: usize, epochs: f64, floor: u64) -> u64 {
    let per_epoch = pool.div_ceil(batch_size.max(1)) as f64;
    (epochs * per_epoch).ceil() as u64 + floor
}

/// Pooled, weighted training examples of several tasks.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub examples: Vec<Example>,
}

impl TrainingSet {
    /// Task `t` is dataset `selection[t].0` restricted to record indices
    /// `selection[t].1`. Actives are reweighted per task with
    /// [`active_weight`], on top of each record's own weight.
    pub fn from_selection(collection: &Collection, selection: &[(usize, Vec<usize>)]) -> TrainingSet {
        let mut examples = Vec::new();
        for (task, (d, rows)) in selection.iter().enumerate() {
            let ds = &collection.datasets[*d];
            let n_act = rows.iter().filter(|&&r| ds.records[r].label).count();
            let w_act = active_weight(n_act, rows.len() - n_act);
            for &r in rows {
                let rec = &ds.records[r];
                examples.push(Example {
                    bits: bits_of(&rec.fingerprint),
                    task,
                    label: rec.label,
                    weight: rec.weight * if rec.label { w_act } else { 1.0 },
                });
            }
        }
        TrainingSet { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

pub(crate) fn bits_of(fp: &crate::chem::Fingerprint) -> Vec<u32> {
    fp.ones().map(|i| i as u32).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: u64,
    /// Mean minibatch loss since the previous point.
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainReport {
    pub steps: u64,
    pub curve: Vec<CurvePoint>,
}

/// Runs `config.n_steps` SGD steps over epoch-wise permutations of the pool.
/// Checks for a dead top layer at every curve point.
pub fn train(net: &mut MultitaskNetwork, set: &TrainingSet) -> Result<TrainReport, NetError> {
    if set.is_empty() {
        return Err(NetError::EmptyPool);
    }
    if let Some(ex) = set.examples.iter().find(|e| e.task >= net.n_tasks()) {
        return Err(NetError::TaskOutOfRange { task: ex.task, n_tasks: net.n_tasks() });
    }
    let cfg = net.config().clone();
    let n = set.len();
    let mut order: Vec<usize> = (0..n).collect();
    let (mut epoch, mut cursor) = (0u64, n);
    let mut report = TrainReport::default();
    let (mut acc, mut acc_n) = (0.0, 0u64);
    for s in 0..cfg.n_steps {
        if cursor >= n {
            order.sort_unstable();
            order.shuffle(&mut seed::rng_for(cfg.seed, "epoch", epoch));
            epoch += 1;
            cursor = 0;
        }
        let end = (cursor + cfg.batch_size).min(n);
        let batch = Minibatch::new(order[cursor..end].iter().map(|&i| &set.examples[i]).collect());
        cursor = end;
        acc += net.sgd_step(&batch)?;
        acc_n += 1;
        if (s + 1) % cfg.log_every == 0 || s + 1 == cfg.n_steps {
            report.curve.push(CurvePoint { step: net.step(), loss: acc / acc_n as f64 });
            (acc, acc_n) = (0.0, 0);
            if net.top_layer_dead(&batch.examples) {
                return Err(NetError::DeadTopLayer { step: net.step() });
            }
        }
    }
    report.steps = cfg.n_steps;
    Ok(report)
}

pub fn write_learning_curve(report: &TrainReport, path: &Path) -> Result<(), NetError> {
    let io = |source| NetError::Io { path: path.to_path_buf(), source };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "step,loss").map_err(io)?;
    for p in &report.curve {
        writeln!(f, "{},{}", p.step, p.loss).map_err(io)?;
    }
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Input, Mode, NetworkConfig};
    use rand::Rng;

    fn toy_set(n: usize, tasks: usize, dim: u32, seed_: u64) -> TrainingSet {
        let mut rng = seed::rng(seed_);
        let examples = (0..n)
            .map(|i| {
                let task = i % tasks;
                let label = rng.gen_bool(0.3);
                let mut bits: Vec<u32> = (2..dim).filter(|_| rng.gen_bool(0.2)).collect();
                if label {
                    bits.insert(0, task as u32 % 2);
                }
                Example { bits, task, label, weight: if label { 2.0 } else { 1.0 } }
            })
            .collect();
        TrainingSet { examples }
    }

    fn cfg(tasks: usize) -> NetworkConfig {
        NetworkConfig {
            input_dim: 16,
            hidden_sizes: vec![8, 4],
            n_tasks: tasks,
            learning_rate: 0.05,
            batch_size: 16,
            n_steps: 100,
            log_every: 10,
            ..Default::default()
        }
    }

    #[test]
    fn weighting_rule() {
        assert_eq!(active_weight(100, 9900), 99.0);
        assert_eq!(active_weight(0, 10), 1.0);
        assert_eq!(scaled_steps(1000, 128, 2.0, 5), 16 + 5);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let set = toy_set(64, 2, 16, 1);
        let mut net = MultitaskNetwork::init(NetworkConfig { learning_rate: 0.0, ..cfg(2) }).unwrap();
        let before = net.clone();
        train(&mut net, &set).unwrap();
        assert_eq!(net.layers, before.layers);
        assert_eq!(net.heads, before.heads);
        assert_eq!(net.step(), 100);
    }

    #[test]
    fn descent_reduces_loss() {
        let set = toy_set(64, 1, 16, 2);
        let mut net = MultitaskNetwork::init(NetworkConfig { dropout_rate: 0.0, ..cfg(1) }).unwrap();
        let batch = Minibatch::new(set.examples.iter().collect());
        let (before, _) = net.loss_and_gradient(&batch, Mode::Eval).unwrap();
        net.sgd_step(&batch).unwrap();
        let (after, _) = net.loss_and_gradient(&batch, Mode::Eval).unwrap();
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let set = toy_set(400, 2, 16, 3);
        let run = || {
            let mut net = MultitaskNetwork::init(NetworkConfig { n_steps: 600, learning_rate: 0.5, ..cfg(2) }).unwrap();
            let r = train(&mut net, &set).unwrap();
            (net, r)
        };
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.curve.len(), 60);
        assert!(ra.curve.last().unwrap().loss < ra.curve[0].loss);
        let pos = a.forward(Input::Bits(&[0, 5]), 0, Mode::Eval).unwrap();
        let neg = a.forward(Input::Bits(&[5]), 0, Mode::Eval).unwrap();
        assert!(pos > neg);
    }

    #[test]
    fn task_isolation() {
        let set = TrainingSet { examples: toy_set(50, 1, 16, 4).examples };
        let mut net = MultitaskNetwork::init(cfg(3)).unwrap();
        let before = net.heads().to_vec();
        train(&mut net, &set).unwrap();
        let w = net.config().top_width();
        assert_eq!(&net.heads()[2 * w..], &before[2 * w..]);
        assert_ne!(&net.heads()[..2 * w], &before[..2 * w]);
    }

    #[test]
    fn replicas_match_large_batch() {
        let set = toy_set(256, 3, 16, 5);
        let base = NetworkConfig { batch_size: 64, n_steps: 100, ..cfg(3) };
        let mut single = MultitaskNetwork::init(base.clone()).unwrap();
        let mut replicas = MultitaskNetwork::init(NetworkConfig { workers: 4, ..base }).unwrap();
        train(&mut single, &set).unwrap();
        train(&mut replicas, &set).unwrap();
        let max_rel = single
            .layers()
            .iter()
            .zip(replicas.layers())
            .flat_map(|(a, b)| a.weights.iter().zip(&b.weights))
            .chain(single.heads().iter().zip(replicas.heads()))
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
            .fold(0.0, f64::max);
        assert!(max_rel < 1e-8, "{max_rel}");
    }

    #[test]
    fn shards_cover_batch() {
        let set = toy_set(10, 1, 16, 6);
        let b = Minibatch::new(set.examples.iter().collect());
        let s = b.shards(4);
        assert_eq!(s.iter().map(Minibatch::len).collect::<Vec<_>>(), vec![3, 3, 2, 2]);
        assert_eq!(s.iter().map(|m| m.offset).collect::<Vec<_>>(), vec![0, 3, 6, 8]);
        assert_eq!(b.shards(50).len(), 10);
    }

    #[test]
    fn dead_top_layer_is_reported() {
        let set = toy_set(64, 1, 16, 7);
        let mut net = MultitaskNetwork::init(cfg(1)).unwrap();
        for l in net.layers_mut() {
            l.bias.iter_mut().for_each(|b| *b = -100.0);
        }
        assert!(matches!(train(&mut net, &set), Err(NetError::DeadTopLayer { .. })));
    }

    #[test]
    fn empty_pool() {
        let mut net = MultitaskNetwork::init(cfg(1)).unwrap();
        assert!(matches!(train(&mut net, &TrainingSet::default()), Err(NetError::EmptyPool)));
    }

    #[test]
    fn curve_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("curve.csv");
        let r = TrainReport { steps: 2, curve: vec![CurvePoint { step: 1, loss: 0.5 }, CurvePoint { step: 2, loss: 0.25 }] };
        write_learning_curve(&r, &p).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "step,loss\n1,0.5\n2,0.25\n");
    }
}
