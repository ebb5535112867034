//! Throughput and age of information of a tagged node.
//!
//! The general path works on any [`AccessVector`]: the inter-update time of
//! node `i` is a geometric number of slots in which `i` fails, followed by
//! its own successful slot. The closed forms specialize that to two
//! homogeneous networks with idle slots of length `beta` and busy slots of
//! length `1 + beta`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{AccessVector, NetworkConfig, SlotLengths, StrategyPair};

/// First and second moments of the inter-update time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterUpdateMoments {
    pub first: f64,
    pub second: f64,
}

impl InterUpdateMoments {
    /// Time-average age implied by the moments.
    pub fn age(&self, sigma_success: f64) -> f64 {
        self.second / (2.0 * self.first) + sigma_success
    }
}

/// Distribution of the length of a slot in which the tagged node does not
/// deliver an update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSlotPmf {
    pub p_idle_given_no_success: f64,
    pub p_other_success_given_no_success: f64,
    pub p_collision_given_no_success: f64,
    pub slots: SlotLengths,
}

impl ResidualSlotPmf {
    pub fn total(&self) -> f64 {
        self.p_idle_given_no_success
            + self.p_other_success_given_no_success
            + self.p_collision_given_no_success
    }

    pub fn mean(&self) -> f64 {
        self.p_idle_given_no_success * self.slots.sigma_idle
            + self.p_other_success_given_no_success * self.slots.sigma_success
            + self.p_collision_given_no_success * self.slots.sigma_collision
    }

    pub fn second_moment(&self) -> f64 {
        self.p_idle_given_no_success * self.slots.sigma_idle.powi(2)
            + self.p_other_success_given_no_success * self.slots.sigma_success.powi(2)
            + self.p_collision_given_no_success * self.slots.sigma_collision.powi(2)
    }
}

/// The per-node probabilities every formula below is written in.
struct Kernels {
    p_idle: f64,
    p_idle_excl: f64,
    p_own: f64,
    p_other: f64,
}

impl Kernels {
    fn of(v: &AccessVector, i: usize) -> Result<Self> {
        Ok(Kernels {
            p_idle: v.joint_idle_prob(),
            p_idle_excl: v.idle_prob_excluding(i)?,
            p_own: v.success_prob_node(i)?,
            p_other: v.success_prob_excluding(i)?,
        })
    }

    fn p_collision_term(&self) -> f64 {
        (1.0 - self.p_idle_excl - self.p_other).max(0.0)
    }
}

/// Fraction of time occupied by successful transmissions of node `i`.
pub fn per_node_throughput(v: &AccessVector, s: &SlotLengths, i: usize) -> Result<f64> {
    let own = v.success_prob_node(i)?;
    Ok(own * s.sigma_success / v.expected_slot_length(s))
}

pub fn residual_slot_pmf(v: &AccessVector, s: &SlotLengths, i: usize) -> Result<ResidualSlotPmf> {
    let k = Kernels::of(v, i)?;
    let miss = 1.0 - k.p_own;
    if miss <= 0.0 {
        return Err(Error::DegenerateResidual(i));
    }
    Ok(ResidualSlotPmf {
        p_idle_given_no_success: k.p_idle / miss,
        p_other_success_given_no_success: k.p_other / miss,
        p_collision_given_no_success: k.p_collision_term() / miss,
        slots: *s,
    })
}

/// Moments of the inter-update time, composed from the geometric slot count
/// and the residual slot distribution.
pub fn inter_update_moments(
    v: &AccessVector,
    s: &SlotLengths,
    i: usize,
) -> Result<InterUpdateMoments> {
    let p = v.success_prob_node(i)?;
    if p <= 0.0 {
        return Err(Error::NoUpdates(i));
    }
    let x = s.sigma_success;
    if p >= 1.0 {
        return Ok(InterUpdateMoments {
            first: x,
            second: x * x,
        });
    }
    let y = residual_slot_pmf(v, s, i)?;
    let (ey, ey2) = (y.mean(), y.second_moment());
    let el = 1.0 / p;
    let el2 = (2.0 - p) / (p * p);
    let first = (el - 1.0) * ey + x;
    let second = (el - 1.0) * (ey2 + 2.0 * x * ey) + (el2 - 3.0 * el + 2.0) * ey * ey + x * x;
    Ok(InterUpdateMoments { first, second })
}

/// The same moments written directly in the slot probabilities.
pub fn lemma_moments(v: &AccessVector, s: &SlotLengths, i: usize) -> Result<InterUpdateMoments> {
    let k = Kernels::of(v, i)?;
    if k.p_own <= 0.0 {
        return Err(Error::NoUpdates(i));
    }
    let col = k.p_collision_term();
    let first = (s.sigma_idle * k.p_idle
        + s.sigma_success * (k.p_other + k.p_own)
        + s.sigma_collision * col)
        / k.p_own;
    let spread = (s.sigma_idle.powi(2) * k.p_idle
        + s.sigma_success.powi(2) * k.p_other
        + s.sigma_collision.powi(2) * col)
        / k.p_own;
    let second =
        2.0 * first * first + s.sigma_success.powi(2) - 2.0 * s.sigma_success * first + spread;
    Ok(InterUpdateMoments { first, second })
}

/// Time-average age of node `i`.
pub fn aoi_node(v: &AccessVector, s: &SlotLengths, i: usize) -> Result<f64> {
    let age = inter_update_moments(v, s, i)?.age(s.sigma_success);
    #[cfg(debug_assertions)]
    {
        let other = aoi_node_expanded(v, s, i)?;
        debug_assert!(
            (age - other).abs() <= 1e-9 * age.abs().max(1.0),
            "age forms disagree: {age} vs {other}"
        );
    }
    Ok(age)
}

/// Age as the mean inter-update time plus a ratio of slot-length moments.
pub fn aoi_node_expanded(v: &AccessVector, s: &SlotLengths, i: usize) -> Result<f64> {
    let k = Kernels::of(v, i)?;
    if k.p_own <= 0.0 {
        return Err(Error::NoUpdates(i));
    }
    let col = k.p_collision_term();
    let busy = k.p_other + k.p_own;
    let m1 = s.sigma_idle * k.p_idle + s.sigma_success * busy + s.sigma_collision * col;
    let m2 = s.sigma_idle.powi(2) * k.p_idle
        + s.sigma_success.powi(2) * busy
        + s.sigma_collision.powi(2) * col;
    Ok(m1 / k.p_own + m2 / (2.0 * m1))
}

/// Throughput of one WiFi node when both networks play `p`.
pub fn throughput_closed_form(p: StrategyPair, c: &NetworkConfig) -> Result<f64> {
    if c.n_wifi == 0 {
        return Err(invalid("nw", "throughput needs at least one WiFi node"));
    }
    let nd = c.n_dsrc as i32;
    let nw = c.n_wifi as i32;
    let b = c.beta;
    let idle = (1.0 - p.tau_w).powi(nw) * (1.0 - p.tau_d).powi(nd);
    Ok(
        p.tau_w * (1.0 - p.tau_w).powi(nw - 1) * (1.0 - p.tau_d).powi(nd) * (1.0 + b)
            / (1.0 - idle + b),
    )
}

/// Age of one DSRC node when both networks play `p`.
pub fn aoi_closed_form(p: StrategyPair, c: &NetworkConfig) -> Result<f64> {
    if c.n_dsrc == 0 {
        return Err(invalid("nd", "age needs at least one DSRC node"));
    }
    let nd = c.n_dsrc as i32;
    let nw = c.n_wifi as i32;
    let b = c.beta;
    let qw = (1.0 - p.tau_w).powi(nw);
    let idle = (1.0 - p.tau_d).powi(nd) * qw;
    let own = p.tau_d * (1.0 - p.tau_d).powi(nd - 1) * qw;
    Ok((1.0 - idle + b) / own + b / 2.0 + (1.0 + b) * (1.0 - idle) / (2.0 * (1.0 - idle + b)))
}
