//! Seeded synthetic screening collections with controllable task relatedness.
//!
//! Each task draws `n_compounds` compounds from a common pool of
//! `pool_factor · n_compounds`. A compound is active for a task when its
//! fingerprint contains enough bits of the task's private motif, or of the
//! shared motif of the task's family. Tasks `t` with a positive sharing
//! fraction belong to family `t mod shared_motif_count`. Family carriers are
//! spread over the pool, so related tasks see different carriers of the
//! same motif, and a carrier drawn by several members is active in each of
//! them.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Collection, DataError, Dataset, Group, Identity, Record};
use crate::chem::Fingerprint;
use crate::seed;

/// Fraction of each task's actives that come from its family motif.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    /// Same fraction for every task.
    Uniform(f64),
    /// Family `k` of `F` uses `min + (max - min) * k / (F - 1)`.
    Graded { min: f64, max: f64 },
    /// Explicit fraction per task; zero removes the task from its family.
    PerTask(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_tasks: usize,
    pub n_compounds: usize,
    pub active_rate: f64,
    pub shared_motif_count: usize,
    pub seed: u64,
    pub nbits: usize,
    /// Probability that any background bit is set.
    pub background_density: f64,
    /// Bits per motif.
    pub motif_size: usize,
    /// Motif bits a compound needs for the motif to count as present.
    pub motif_threshold: usize,
    /// Upper bound on the motif bits planted in a carrier (default
    /// `motif_size`). Low caps make each carrier show a small part of its
    /// motif, so learning the motif takes many carriers.
    pub carrier_bits: Option<usize>,
    /// Pool size as a multiple of `n_compounds`; 1 gives every task the
    /// same compounds.
    pub pool_factor: f64,
    pub sharing: Sharing,
    /// Fraction of compounds given a near miss (`threshold - 1` bits) of a
    /// random motif. Near misses are inactive and make the rule sharper.
    pub decoy_rate: f64,
    /// Probability of flipping each label after the rule is applied.
    pub flip_rate: f64,
    /// The last `duplicate_tasks` tasks reuse the motifs of tasks
    /// `0..duplicate_tasks`, giving identical labels and targets.
    pub duplicate_tasks: usize,
    pub held_in: usize,
    /// The last `held_out` tasks are listed as held out.
    pub held_out: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_tasks: 20,
            n_compounds: 5000,
            active_rate: 0.02,
            shared_motif_count: 5,
            seed: seed::DEFAULT_SEED,
            nbits: 512,
            background_density: 0.05,
            motif_size: 16,
            motif_threshold: 3,
            carrier_bits: Some(4),
            pool_factor: 2.0,
            sharing: Sharing::Uniform(0.8),
            decoy_rate: 0.1,
            flip_rate: 0.0,
            duplicate_tasks: 0,
            held_in: 10,
            held_out: 0,
        }
    }
}

impl SynthConfig {
    fn sharing_of(&self, task: usize) -> f64 {
        if self.shared_motif_count == 0 {
            return 0.0;
        }
        match &self.sharing {
            Sharing::Uniform(f) => *f,
            Sharing::Graded { min, max } => {
                let fam = task % self.shared_motif_count;
                if self.shared_motif_count == 1 {
                    *max
                } else {
                    min + (max - min) * fam as f64 / (self.shared_motif_count - 1) as f64
                }
            }
            Sharing::PerTask(v) => v.get(task).copied().unwrap_or(0.0),
        }
    }

    fn pool_size(&self) -> usize {
        (self.n_compounds as f64 * self.pool_factor).round() as usize
    }

    fn check(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::Infeasible(m));
        if self.n_tasks == 0 || self.n_compounds == 0 {
            return bad("need at least one task and one compound".into());
        }
        if !(self.active_rate > 0.0 && self.active_rate <= 0.5) {
            return bad(format!("active_rate {} outside (0, 0.5]", self.active_rate));
        }
        if Fingerprint::new(self.nbits).is_err() {
            return bad(format!("nbits {} is not a power of two", self.nbits));
        }
        if self.motif_threshold == 0 || self.motif_threshold > self.motif_size {
            return bad("motif_threshold must be in 1..=motif_size".into());
        }
        if self.carrier_bits.is_some_and(|c| c < self.motif_threshold) {
            return bad("carrier_bits must be at least motif_threshold".into());
        }
        if !(self.pool_factor >= 1.0 && self.pool_factor <= 1000.0) {
            return bad(format!("pool_factor {} outside [1, 1000]", self.pool_factor));
        }
        let private = self.n_tasks - self.duplicate_tasks.min(self.n_tasks);
        let motif_bits = (private + self.shared_motif_count) * self.motif_size;
        if motif_bits > self.nbits {
            return bad(format!("{motif_bits} motif bits exceed the {} fingerprint bits", self.nbits));
        }
        if self.duplicate_tasks * 2 > self.n_tasks {
            return bad("duplicate_tasks may be at most half of n_tasks".into());
        }
        if self.held_in + self.held_out > self.n_tasks {
            return bad("held_in + held_out exceeds n_tasks".into());
        }
        if !(0.0..=1.0).contains(&self.background_density)
            || !(0.0..=1.0).contains(&self.decoy_rate)
            || !(0.0..0.5).contains(&self.flip_rate)
        {
            return bad("densities and rates must lie in [0, 1]".into());
        }
        for t in 0..self.n_tasks {
            let f = self.sharing_of(t);
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("sharing fraction {f} of task {t} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

struct TaskRule {
    private: usize,
    family: Option<usize>,
}

/// Generates a synthetic collection. The same configuration always yields
/// the same collection.
pub fn synth_collection(cfg: &SynthConfig) -> Result<Collection, DataError> {
    cfg.check()?;
    let mut rng = seed::rng_for(cfg.seed, "synth", 0);
    let n_unique = cfg.n_tasks - cfg.duplicate_tasks;

    // disjoint motifs: private motifs first, then family motifs
    let n_motifs = n_unique + cfg.shared_motif_count;
    let mut bits: Vec<usize> = (0..cfg.nbits).collect();
    bits.shuffle(&mut rng);
    let motifs: Vec<Vec<usize>> =
        (0..n_motifs).map(|m| bits[m * cfg.motif_size..(m + 1) * cfg.motif_size].to_vec()).collect();

    let rules: Vec<TaskRule> = (0..cfg.n_tasks)
        .map(|t| {
            let src = if t >= n_unique { t - n_unique } else { t };
            let family = (cfg.sharing_of(src) > 0.0).then(|| n_unique + src % cfg.shared_motif_count.max(1));
            TaskRule { private: src, family }
        })
        .collect();

    // background
    let pool = cfg.pool_size();
    let mut fps: Vec<Fingerprint> = (0..pool)
        .map(|_| {
            let mut fp = Fingerprint::new(cfg.nbits).expect("checked");
            for b in 0..cfg.nbits {
                if rng.gen::<f64>() < cfg.background_density {
                    fp.set(b);
                }
            }
            fp
        })
        .collect();

    // strip accidental motif hits from the background so labels come only
    // from planting
    for fp in fps.iter_mut() {
        for m in &motifs {
            let present: Vec<usize> = m.iter().copied().filter(|&b| fp.get(b)).collect();
            if present.len() >= cfg.motif_threshold {
                for &b in &present[cfg.motif_threshold - 1..] {
                    fp.clear(b);
                }
            }
        }
    }

    let plant = |fp: &mut Fingerprint, motif: &[usize], count: usize, rng: &mut seed::Rng| {
        for &j in index::sample(rng, motif.len(), count).iter().map(|j| &motif[j]).collect::<Vec<_>>() {
            fp.set(j);
        }
    };

    // decoys: near misses of a random motif
    if cfg.motif_threshold > 1 {
        for fp in fps.iter_mut() {
            if rng.gen::<f64>() < cfg.decoy_rate {
                let m = &motifs[rng.gen_range(0..n_motifs)];
                let present = m.iter().filter(|&&b| fp.get(b)).count();
                if present < cfg.motif_threshold - 1 {
                    plant(fp, m, cfg.motif_threshold - 1, &mut rng);
                    // planting may add to bits already present
                    let now: Vec<usize> = m.iter().copied().filter(|&b| fp.get(b)).collect();
                    for &b in now.iter().skip(cfg.motif_threshold - 1) {
                        fp.clear(b);
                    }
                }
            }
        }
    }

    // compounds of each unique task; duplicates reuse their source's
    let members: Vec<Vec<usize>> = (0..n_unique)
        .map(|_| {
            let mut m = index::sample(&mut rng, pool, cfg.n_compounds).into_vec();
            m.sort_unstable();
            m
        })
        .collect();

    let n_act = ((cfg.active_rate * cfg.n_compounds as f64).round() as usize).max(1);
    let carrier_count = |f: f64| ((f * n_act as f64).round() as usize).min(n_act);
    let max_bits = cfg.carrier_bits.unwrap_or(cfg.motif_size).min(cfg.motif_size);
    let plant_carriers = |motif: usize, among: &[usize], count: usize, rng: &mut seed::Rng, fps: &mut [Fingerprint]| {
        for c in index::sample(rng, among.len(), count.min(among.len())).iter() {
            let extra = rng.gen_range(cfg.motif_threshold..=max_bits);
            plant(&mut fps[among[c]], &motifs[motif], extra, rng);
        }
    };
    let everyone: Vec<usize> = (0..pool).collect();
    let scale = pool as f64 / cfg.n_compounds as f64;

    // family carriers: mean sharing fraction over the family's members
    for fam in 0..cfg.shared_motif_count {
        let motif = n_unique + fam;
        let fr: Vec<f64> = (0..n_unique)
            .filter(|&t| rules[t].family == Some(motif))
            .map(|t| cfg.sharing_of(t))
            .collect();
        if fr.is_empty() {
            continue;
        }
        let mean = fr.iter().sum::<f64>() / fr.len() as f64;
        let count = (carrier_count(mean) as f64 * scale).round() as usize;
        plant_carriers(motif, &everyone, count, &mut rng, &mut fps);
    }
    for t in 0..n_unique {
        let shared = match rules[t].family {
            Some(motif) => {
                let fr: Vec<f64> = (0..n_unique)
                    .filter(|&u| rules[u].family == Some(motif))
                    .map(|u| cfg.sharing_of(u))
                    .collect();
                carrier_count(fr.iter().sum::<f64>() / fr.len() as f64)
            }
            None => 0,
        };
        plant_carriers(rules[t].private, &members[t], n_act - shared, &mut rng, &mut fps);
    }

    let has = |fp: &Fingerprint, motif: usize| {
        motifs[motif].iter().filter(|&&b| fp.get(b)).count() >= cfg.motif_threshold
    };
    let n_families = cfg.shared_motif_count.max(1);
    let datasets: Vec<Dataset> = (0..cfg.n_tasks)
        .map(|t| {
            let rule = &rules[t];
            let src = rule.private;
            let mut flip_rng = seed::rng_for(cfg.seed, "synth/flip", t as u64);
            let records = members[src]
                .iter()
                .map(|&c| {
                    let fp = &fps[c];
                    let mut label = has(fp, rule.private) || rule.family.is_some_and(|m| has(fp, m));
                    if cfg.flip_rate > 0.0 && flip_rng.gen::<f64>() < cfg.flip_rate {
                        label = !label;
                    }
                    Record { compound_id: format!("c{c:06}"), fingerprint: fp.clone(), label, weight: 1.0 }
                })
                .collect();
            let dup = cfg.duplicate_tasks > 0 && (t >= n_unique || t < cfg.duplicate_tasks);
            Dataset {
                id: format!("synth-{t:03}"),
                group: Group::Synth,
                target_class: match rule.family {
                    Some(m) => format!("family-{}", m - n_unique),
                    None => format!("family-{}", src % n_families),
                },
                target: format!("target-{src:03}"),
                records,
                duplicate_target: dup,
            }
        })
        .collect();

    let ids: Vec<String> = datasets.iter().map(|d| d.id.clone()).collect();
    let collection = Collection {
        held_in: ids[..cfg.held_in].to_vec(),
        held_out: ids[cfg.n_tasks - cfg.held_out..].to_vec(),
        datasets,
        identity: Identity::CompoundId,
    };
    collection.validate()?;
    Ok(collection)
}
