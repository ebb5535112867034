//! Strategic-form game: wastage cost, payoffs and the tabulated payoff
//! surfaces the equilibrium solvers search.
//!
//! The DSRC payoff is `-(a * age + b) - cost` where `age -> a * age + b` is an
//! increasing affine map that puts age on the same scale as throughput. By
//! default the map sends the age range over the whole strategy grid onto the
//! throughput range over the same grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::{aoi_closed_form, throughput_closed_form};
use crate::model::{AccessVector, NetworkConfig, Player, StrategyPair};

// grid values are rounded to 12 decimals so 0.46 prints and compares as 0.46
const GRID_SNAP: f64 = 1e12;

/// Evenly spaced access probabilities `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: 0.01,
            hi: 0.99,
            step: 0.01,
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = GridSpec { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < 1.0) {
            return Err(invalid(
                "grid-lo",
                format!("must lie in (0, 1), got {}", self.lo),
            ));
        }
        if !(self.hi >= self.lo && self.hi < 1.0) {
            return Err(invalid(
                "grid-hi",
                format!("must lie in [grid-lo, 1), got {}", self.hi),
            ));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid(
                "grid-step",
                format!("must be > 0, got {}", self.step),
            ));
        }
        let intervals = (self.hi - self.lo) / self.step;
        if (intervals - intervals.round()).abs() > 1e-9 {
            return Err(invalid(
                "grid-step",
                format!("(grid-hi - grid-lo) / grid-step = {intervals} is not an integer"),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        let x = self.lo + k as f64 * self.step;
        (x * GRID_SNAP).round() / GRID_SNAP
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    /// Index of the grid point equal to `x` up to 1e-9.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.lo) / self.step).round();
        if k < 0.0 || k as usize >= self.len() {
            return None;
        }
        let k = k as usize;
        ((self.value(k) - x).abs() <= 1e-9).then_some(k)
    }
}

/// `x -> scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    /// Sends `[from_lo, from_hi]` onto `[to_lo, to_hi]`. A degenerate source
    /// interval maps everything to `to_lo`.
    pub fn onto(from_lo: f64, from_hi: f64, to_lo: f64, to_hi: f64) -> AffineMap {
        if from_hi > from_lo {
            let scale = (to_hi - to_lo) / (from_hi - from_lo);
            AffineMap {
                scale,
                offset: to_lo - scale * from_lo,
            }
        } else {
            AffineMap {
                scale: 0.0,
                offset: to_lo,
            }
        }
    }
}

/// Cost charged to both networks for idle and collided slots.
pub fn wastage_cost(p: StrategyPair, c: &NetworkConfig) -> f64 {
    let nd = c.n_dsrc as i32;
    let nw = c.n_wifi as i32;
    let qd = (1.0 - p.tau_d).powi(nd);
    let qw = (1.0 - p.tau_w).powi(nw);
    let idle = qd * qw;
    let dsrc_alone = f64::from(c.n_dsrc) * p.tau_d * (1.0 - p.tau_d).powi(nd - 1) * qw;
    let wifi_alone = f64::from(c.n_wifi) * p.tau_w * (1.0 - p.tau_w).powi(nw - 1) * qd;
    c.w_idle * idle + c.w_col * (1.0 - idle - dsrc_alone - wifi_alone)
}

/// Wastage cost recomputed from the node-level kernels of any access vector.
pub fn wastage_cost_from_kernels(v: &AccessVector, c: &NetworkConfig) -> f64 {
    let idle = v.joint_idle_prob();
    let succ = v.success_prob_total();
    c.w_idle * idle + c.w_col * (1.0 - idle - succ)
}

/// `age + cost`: the DSRC loss before any age rescaling.
pub fn dsrc_loss_raw(p: StrategyPair, c: &NetworkConfig) -> Result<f64> {
    Ok(aoi_closed_form(p, c)? + wastage_cost(p, c))
}

/// `-throughput + cost`.
pub fn wifi_loss_raw(p: StrategyPair, c: &NetworkConfig) -> Result<f64> {
    Ok(wastage_cost(p, c) - throughput_closed_form(p, c)?)
}

/// The grid-range rescaling map for given age and throughput samples.
pub fn rescale_age(age: &[f64], throughput: &[f64]) -> AffineMap {
    let (a_lo, a_hi) = min_max(age);
    let (t_lo, t_hi) = min_max(throughput);
    AffineMap::onto(a_lo, a_hi, t_lo, t_hi)
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        })
}

/// Age, throughput, cost and rescaled age tabulated over a square strategy
/// grid. Row index is the DSRC strategy, column index the WiFi strategy.
#[derive(Debug, Clone)]
pub struct PayoffSurfaces {
    config: NetworkConfig,
    grid: GridSpec,
    points: Vec<f64>,
    age: Vec<f64>,
    throughput: Vec<f64>,
    cost: Vec<f64>,
    age_rescaled: Vec<f64>,
    map: AffineMap,
}

impl PayoffSurfaces {
    /// Tabulates the game with the grid-range age rescaling.
    pub fn build(config: NetworkConfig, grid: GridSpec) -> Result<Self> {
        Self::build_with(config, grid, rescale_age)
    }

    /// Tabulates the game with a fixed age map.
    pub fn build_with_map(config: NetworkConfig, grid: GridSpec, map: AffineMap) -> Result<Self> {
        if !(map.scale > 0.0) {
            return Err(invalid("map", "age rescaling must be strictly increasing"));
        }
        Self::build_with(config, grid, |_, _| map)
    }

    fn build_with(
        config: NetworkConfig,
        grid: GridSpec,
        choose_map: impl FnOnce(&[f64], &[f64]) -> AffineMap,
    ) -> Result<Self> {
        config.validate()?;
        grid.validate()?;
        if config.n_dsrc == 0 {
            return Err(invalid("nd", "the game needs at least one DSRC node"));
        }
        if config.n_wifi == 0 {
            return Err(invalid("nw", "the game needs at least one WiFi node"));
        }
        let points = grid.points();
        let n = points.len();

        let rows: Vec<Vec<(f64, f64, f64)>> = points
            .par_iter()
            .map(|&tau_d| {
                points
                    .iter()
                    .map(|&tau_w| {
                        let p = StrategyPair { tau_d, tau_w };
                        let age = aoi_closed_form(p, &config)?;
                        let thr = throughput_closed_form(p, &config)?;
                        if !age.is_finite() || !thr.is_finite() {
                            return Err(Error::NonFinite { tau_d, tau_w });
                        }
                        Ok((age, thr, wastage_cost(p, &config)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        let mut age = Vec::with_capacity(n * n);
        let mut throughput = Vec::with_capacity(n * n);
        let mut cost = Vec::with_capacity(n * n);
        for (a, t, c) in rows.into_iter().flatten() {
            age.push(a);
            throughput.push(t);
            cost.push(c);
        }
        let map = choose_map(&age, &throughput);
        let age_rescaled = age.iter().map(|a| map.apply(*a)).collect();
        Ok(PayoffSurfaces {
            config,
            grid,
            points,
            age,
            throughput,
            cost,
            age_rescaled,
            map,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of strategies per player.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn map(&self) -> AffineMap {
        self.map
    }

    #[inline]
    fn at(&self, i_d: usize, i_w: usize) -> usize {
        i_d * self.points.len() + i_w
    }

    pub fn pair(&self, i_d: usize, i_w: usize) -> StrategyPair {
        StrategyPair {
            tau_d: self.points[i_d],
            tau_w: self.points[i_w],
        }
    }

    pub fn age(&self, i_d: usize, i_w: usize) -> f64 {
        self.age[self.at(i_d, i_w)]
    }

    pub fn throughput(&self, i_d: usize, i_w: usize) -> f64 {
        self.throughput[self.at(i_d, i_w)]
    }

    pub fn cost(&self, i_d: usize, i_w: usize) -> f64 {
        self.cost[self.at(i_d, i_w)]
    }

    pub fn age_rescaled(&self, i_d: usize, i_w: usize) -> f64 {
        self.age_rescaled[self.at(i_d, i_w)]
    }

    pub fn dsrc_payoff_at(&self, i_d: usize, i_w: usize) -> f64 {
        let k = self.at(i_d, i_w);
        -self.age_rescaled[k] - self.cost[k]
    }

    pub fn wifi_payoff_at(&self, i_d: usize, i_w: usize) -> f64 {
        let k = self.at(i_d, i_w);
        self.throughput[k] - self.cost[k]
    }

    pub fn payoff_at(&self, player: Player, i_d: usize, i_w: usize) -> f64 {
        match player {
            Player::Dsrc => self.dsrc_payoff_at(i_d, i_w),
            Player::Wifi => self.wifi_payoff_at(i_d, i_w),
        }
    }

    /// Grid indices of a strategy pair.
    pub fn locate(&self, p: StrategyPair) -> Result<(usize, usize)> {
        match (self.grid.index_of(p.tau_d), self.grid.index_of(p.tau_w)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(Error::OffGrid {
                tau_d: p.tau_d,
                tau_w: p.tau_w,
            }),
        }
    }
}

pub fn dsrc_payoff(p: StrategyPair, surfaces: &PayoffSurfaces) -> Result<f64> {
    let (i, j) = surfaces.locate(p)?;
    Ok(surfaces.dsrc_payoff_at(i, j))
}

pub fn wifi_payoff(p: StrategyPair, surfaces: &PayoffSurfaces) -> Result<f64> {
    let (i, j) = surfaces.locate(p)?;
    Ok(surfaces.wifi_payoff_at(i, j))
}
