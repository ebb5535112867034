//! Slot-level Monte Carlo of the access process.
//!
//! Every node transmits in a slot independently with its access probability.
//! Ages grow linearly through each slot and a node that transmits alone has
//! its age reset to the success slot length at the end of that slot, so the
//! run starts as if every node had just delivered an update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{AccessVector, SlotLengths};

pub const BATCHES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_slots: u64,
    pub seed: u64,
    /// Leading slots left out of every estimate.
    pub warmup_slots: u64,
}

impl SimConfig {
    /// Warmup defaults to one percent of the horizon.
    pub fn new(horizon_slots: u64, seed: u64) -> Result<Self> {
        Self::with_warmup(horizon_slots, seed, horizon_slots / 100)
    }

    pub fn with_warmup(horizon_slots: u64, seed: u64, warmup_slots: u64) -> Result<Self> {
        let c = SimConfig {
            horizon_slots,
            seed,
            warmup_slots,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_slots <= self.warmup_slots {
            return Err(invalid(
                "horizon",
                format!(
                    "must exceed the {} warmup slots, got {}",
                    self.warmup_slots, self.horizon_slots
                ),
            ));
        }
        Ok(())
    }

    pub fn measured_slots(&self) -> u64 {
        self.horizon_slots - self.warmup_slots
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// Distance to `target` in standard errors. Agreement to rounding error
    /// counts as zero, which matters when the standard error is zero.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            gap / self.std_err
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target) <= k
    }

    fn from_samples(sum: f64, sum_sq: f64, n: u64) -> Option<Self> {
        if n < 2 {
            return None;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        Some(Estimate {
            mean,
            std_err: (var / nf).sqrt(),
        })
    }

    /// Overall ratio with the spread of the batch ratios as its error.
    fn from_batches(total: f64, total_time: f64, batches: &[f64]) -> Self {
        let mean = total / total_time;
        let b = batches.len() as f64;
        let std_err = if batches.len() < 2 {
            0.0
        } else {
            let m = batches.iter().sum::<f64>() / b;
            let var = batches.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
            (var / b).sqrt()
        };
        Estimate { mean, std_err }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    /// Fraction of time spent in this node's successful slots.
    pub throughput: Estimate,
    /// Time-average age.
    pub age: Estimate,
    /// Inter-update time moments, absent with fewer than two samples.
    pub z_mean: Option<Estimate>,
    pub z_second: Option<Estimate>,
    pub updates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotCounts {
    pub idle: u64,
    pub success: u64,
    pub collision: u64,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        self.idle + self.success + self.collision
    }

    /// Empirical idle, success and collision frequencies.
    pub fn frequencies(&self) -> [Estimate; 3] {
        let n = self.total() as f64;
        [self.idle, self.success, self.collision].map(|k| {
            let p = k as f64 / n;
            Estimate {
                mean: p,
                std_err: (p * (1.0 - p) / n).sqrt(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub nodes: Vec<NodeStats>,
    pub slots: SlotCounts,
    /// Measured time, excluding warmup.
    pub elapsed: f64,
}

#[derive(Clone, Default)]
struct Node {
    age: f64,
    last_update: Option<f64>,
    area: f64,
    busy: f64,
    batch_area: f64,
    batch_busy: f64,
    z_sum: f64,
    z_sq: f64,
    z_quad: f64,
    z_n: u64,
    updates: u64,
    age_batches: Vec<f64>,
    thr_batches: Vec<f64>,
}

pub fn run_simulation(v: &AccessVector, s: &SlotLengths, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = v.len();
    let taus = v.taus();
    let mut nodes = vec![
        Node {
            age: s.sigma_success,
            last_update: Some(0.0),
            ..Node::default()
        };
        n
    ];
    let mut slots = SlotCounts {
        idle: 0,
        success: 0,
        collision: 0,
    };
    let measured = cfg.measured_slots();
    let batches = BATCHES.min(measured);
    let mut clock = 0.0;
    let mut elapsed = 0.0;
    let mut batch_time = 0.0;
    let mut batch_no = 0u64;
    let mut any_success = false;

    for slot in 0..cfg.horizon_slots {
        let mut senders = 0usize;
        let mut sender = 0usize;
        for (i, tau) in taus.iter().enumerate() {
            if rng.gen::<f64>() < *tau {
                senders += 1;
                sender = i;
            }
        }
        let len = match senders {
            0 => s.sigma_idle,
            1 => s.sigma_success,
            _ => s.sigma_collision,
        };
        let counted = slot >= cfg.warmup_slots;
        clock += len;

        for node in nodes.iter_mut() {
            if counted {
                node.batch_area += node.age * len + 0.5 * len * len;
            }
            node.age += len;
        }
        if senders == 1 {
            any_success = true;
            let node = &mut nodes[sender];
            node.age = s.sigma_success;
            if counted {
                node.batch_busy += len;
                node.updates += 1;
                if let Some(prev) = node.last_update {
                    let z = clock - prev;
                    node.z_sum += z;
                    node.z_sq += z * z;
                    node.z_quad += z * z * z * z;
                    node.z_n += 1;
                }
            }
            node.last_update = Some(clock);
        }
        if !counted {
            continue;
        }
        match senders {
            0 => slots.idle += 1,
            1 => slots.success += 1,
            _ => slots.collision += 1,
        }
        batch_time += len;

        // batch k ends after floor((k + 1) * measured / batches) slots
        let done = slot + 1 - cfg.warmup_slots;
        if done == (batch_no + 1) * measured / batches {
            for node in nodes.iter_mut() {
                node.age_batches.push(node.batch_area / batch_time);
                node.thr_batches.push(node.batch_busy / batch_time);
                node.area += node.batch_area;
                node.busy += node.batch_busy;
                node.batch_area = 0.0;
                node.batch_busy = 0.0;
            }
            elapsed += batch_time;
            batch_time = 0.0;
            batch_no += 1;
        }
    }

    if !any_success {
        return Err(Error::NoProgress {
            slots: cfg.horizon_slots,
        });
    }

    let nodes = nodes
        .into_iter()
        .map(|node| {
            let z_mean = Estimate::from_samples(node.z_sum, node.z_sq, node.z_n);
            let z_second = Estimate::from_samples(node.z_sq, node.z_quad, node.z_n);
            NodeStats {
                throughput: Estimate::from_batches(node.busy, elapsed, &node.thr_batches),
                age: Estimate::from_batches(node.area, elapsed, &node.age_batches),
                z_mean,
                z_second,
                updates: node.updates,
            }
        })
        .collect();

    Ok(SimResult {
        config: *cfg,
        nodes,
        slots,
        elapsed,
    })
}

/// Independent replications of one configuration, one per seed.
pub fn run_replications(
    v: &AccessVector,
    s: &SlotLengths,
    cfg: &SimConfig,
    seeds: &[u64],
) -> Result<Vec<SimResult>> {
    seeds
        .par_iter()
        .map(|seed| {
            run_simulation(
                v,
                s,
                &SimConfig {
                    seed: *seed,
                    ..*cfg
                },
            )
        })
        .collect()
}
