//! Slotted CSMA probability kernels.
//!
//! Every node transmits in a slot independently with its own access
//! probability. A slot is idle when nobody transmits, a success when exactly
//! one node transmits and a collision otherwise. All quantities here are
//! products and sums over those independent Bernoulli draws.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One of the two networks sharing the medium. Doubles as the player tag of
/// the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Dsrc,
    Wifi,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Dsrc => Player::Wifi,
            Player::Wifi => Player::Dsrc,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Dsrc => "dsrc",
            Player::Wifi => "wifi",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Player {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dsrc" | "d" => Ok(Player::Dsrc),
            "wifi" | "w" => Ok(Player::Wifi),
            other => Err(invalid(
                "player",
                format!("expected dsrc or wifi, got `{other}`"),
            )),
        }
    }
}

/// Durations of the three slot types, in units of a successful payload time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotLengths {
    pub sigma_idle: f64,
    pub sigma_success: f64,
    pub sigma_collision: f64,
}

impl SlotLengths {
    pub fn new(sigma_idle: f64, sigma_success: f64, sigma_collision: f64) -> Result<Self> {
        for (field, v) in [
            ("sigma_idle", sigma_idle),
            ("sigma_success", sigma_success),
            ("sigma_collision", sigma_collision),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(SlotLengths {
            sigma_idle,
            sigma_success,
            sigma_collision,
        })
    }

    /// Idle slot of length `beta`, success and collision slots of `1 + beta`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(SlotLengths {
            sigma_idle: beta,
            sigma_success: 1.0 + beta,
            sigma_collision: 1.0 + beta,
        })
    }

    pub fn min(&self) -> f64 {
        self.sigma_idle
            .min(self.sigma_success)
            .min(self.sigma_collision)
    }

    pub fn max(&self) -> f64 {
        self.sigma_idle
            .max(self.sigma_success)
            .max(self.sigma_collision)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(invalid("beta", format!("must lie in (0, 1), got {beta}")))
    }
}

/// A game instance: node counts, idle-slot length and wastage weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub n_dsrc: u32,
    pub n_wifi: u32,
    pub beta: f64,
    pub w_idle: f64,
    pub w_col: f64,
}

impl NetworkConfig {
    pub fn new(n_dsrc: u32, n_wifi: u32, beta: f64, w_idle: f64, w_col: f64) -> Result<Self> {
        let c = NetworkConfig {
            n_dsrc,
            n_wifi,
            beta,
            w_idle,
            w_col,
        };
        c.validate()?;
        Ok(c)
    }

    /// Cost-free instance.
    pub fn without_cost(n_dsrc: u32, n_wifi: u32, beta: f64) -> Result<Self> {
        Self::new(n_dsrc, n_wifi, beta, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dsrc + self.n_wifi == 0 {
            return Err(invalid(
                "nd",
                "the two networks need at least one node between them",
            ));
        }
        check_beta(self.beta)?;
        if !(self.w_idle.is_finite() && self.w_idle >= 0.0) {
            return Err(invalid(
                "w-idle",
                format!("must be >= 0, got {}", self.w_idle),
            ));
        }
        if !(self.w_col.is_finite() && self.w_col >= 0.0) {
            return Err(invalid(
                "w-col",
                format!("must be >= 0, got {}", self.w_col),
            ));
        }
        Ok(())
    }

    pub fn slot_lengths(&self) -> SlotLengths {
        SlotLengths {
            sigma_idle: self.beta,
            sigma_success: 1.0 + self.beta,
            sigma_collision: 1.0 + self.beta,
        }
    }

    pub fn count(&self, player: Player) -> u32 {
        match player {
            Player::Dsrc => self.n_dsrc,
            Player::Wifi => self.n_wifi,
        }
    }

    pub fn total_nodes(&self) -> usize {
        (self.n_dsrc + self.n_wifi) as usize
    }
}

/// One access probability per network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyPair {
    pub tau_d: f64,
    pub tau_w: f64,
}

impl StrategyPair {
    pub fn new(tau_d: f64, tau_w: f64) -> Result<Self> {
        for (field, v) in [("tau_d", tau_d), ("tau_w", tau_w)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(field, format!("must lie in (0, 1), got {v}")));
            }
        }
        Ok(StrategyPair { tau_d, tau_w })
    }

    pub fn of(&self, player: Player) -> f64 {
        match player {
            Player::Dsrc => self.tau_d,
            Player::Wifi => self.tau_w,
        }
    }

    /// Builds the pair from one player's own strategy and the opponent's.
    pub fn from_roles(player: Player, own: f64, opponent: f64) -> StrategyPair {
        match player {
            Player::Dsrc => StrategyPair {
                tau_d: own,
                tau_w: opponent,
            },
            Player::Wifi => StrategyPair {
                tau_d: opponent,
                tau_w: own,
            },
        }
    }
}

/// Per-node access probabilities with the network each node belongs to.
///
/// Probabilities may be 0 (an absent or silent node) and may be 1 (a node
/// that transmits in every slot).
#[derive(Debug, Clone, PartialEq)]
pub struct AccessVector {
    taus: Vec<f64>,
    tags: Vec<Player>,
}

impl AccessVector {
    pub fn new(taus: Vec<f64>, tags: Vec<Player>) -> Result<Self> {
        if taus.is_empty() {
            return Err(invalid("taus", "at least one node is required"));
        }
        if taus.len() != tags.len() {
            return Err(invalid(
                "tags",
                format!(
                    "{} tags for {} access probabilities",
                    tags.len(),
                    taus.len()
                ),
            ));
        }
        if let Some(t) = taus.iter().find(|t| !(**t >= 0.0 && **t <= 1.0)) {
            return Err(invalid(
                "taus",
                format!("access probability {t} outside [0, 1]"),
            ));
        }
        Ok(AccessVector { taus, tags })
    }

    /// Every node tagged DSRC.
    pub fn untagged(taus: Vec<f64>) -> Result<Self> {
        let tags = vec![Player::Dsrc; taus.len()];
        Self::new(taus, tags)
    }

    /// DSRC nodes first, then WiFi nodes, each network sharing its strategy.
    pub fn homogeneous(pair: StrategyPair, config: &NetworkConfig) -> Result<Self> {
        Self::from_counts(pair.tau_d, config.n_dsrc, pair.tau_w, config.n_wifi)
    }

    /// Like [`AccessVector::homogeneous`] but admits boundary probabilities.
    pub fn from_counts(tau_d: f64, n_dsrc: u32, tau_w: f64, n_wifi: u32) -> Result<Self> {
        let mut taus = vec![tau_d; n_dsrc as usize];
        taus.extend(std::iter::repeat_n(tau_w, n_wifi as usize));
        let mut tags = vec![Player::Dsrc; n_dsrc as usize];
        tags.extend(std::iter::repeat_n(Player::Wifi, n_wifi as usize));
        Self::new(taus, tags)
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn tags(&self) -> &[Player] {
        &self.tags
    }

    pub fn tau(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.taus[i])
    }

    pub fn tag(&self, i: usize) -> Result<Player> {
        self.check(i)?;
        Ok(self.tags[i])
    }

    /// First node index belonging to `player`, if any.
    pub fn first_of(&self, player: Player) -> Option<usize> {
        self.tags.iter().position(|t| *t == player)
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.taus.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: i,
                len: self.taus.len(),
            })
        }
    }

    fn silent_except(&self, i: usize) -> f64 {
        self.taus
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, t)| 1.0 - t)
            .product()
    }

    /// Probability that no node transmits.
    pub fn joint_idle_prob(&self) -> f64 {
        self.taus.iter().map(|t| 1.0 - t).product()
    }

    /// Probability that no node other than `i` transmits.
    pub fn idle_prob_excluding(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.silent_except(i))
    }

    /// Probability that node `i` transmits alone.
    pub fn success_prob_node(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.taus[i] * self.silent_except(i))
    }

    /// Probability that some node transmits alone.
    pub fn success_prob_total(&self) -> f64 {
        (0..self.taus.len())
            .map(|i| self.taus[i] * self.silent_except(i))
            .sum()
    }

    /// Probability that a node other than `i` transmits alone.
    pub fn success_prob_excluding(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok((0..self.taus.len())
            .filter(|j| *j != i)
            .map(|j| self.taus[j] * self.silent_except(j))
            .sum())
    }

    /// Mean slot duration.
    pub fn expected_slot_length(&self, s: &SlotLengths) -> f64 {
        let p_idle = self.joint_idle_prob();
        let p_succ = self.success_prob_total();
        let p_col = (1.0 - p_idle - p_succ).max(0.0);
        s.sigma_idle * p_idle + s.sigma_success * p_succ + s.sigma_collision * p_col
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(taus: &[f64]) -> AccessVector {
        AccessVector::untagged(taus.to_vec()).unwrap()
    }

    /// Sums outcome probabilities over all 2^n transmit patterns.
    fn enumerate(taus: &[f64]) -> (f64, Vec<f64>) {
        let n = taus.len();
        let mut idle = 0.0;
        let mut alone = vec![0.0; n];
        for mask in 0u32..(1 << n) {
            let p: f64 = (0..n)
                .map(|k| {
                    if mask >> k & 1 == 1 {
                        taus[k]
                    } else {
                        1.0 - taus[k]
                    }
                })
                .product();
            match mask.count_ones() {
                0 => idle += p,
                1 => alone[mask.trailing_zeros() as usize] += p,
                _ => {}
            }
        }
        (idle, alone)
    }

    #[test]
    fn hand_values_three_nodes() {
        let a = v(&[0.2, 0.2, 0.2]);
        assert!((a.joint_idle_prob() - 0.512).abs() < 1e-15);
        assert!((a.idle_prob_excluding(0).unwrap() - 0.64).abs() < 1e-15);
        assert!((a.success_prob_node(0).unwrap() - 0.128).abs() < 1e-15);
        assert!((a.success_prob_total() - 0.384).abs() < 1e-15);
        let s = SlotLengths::from_beta(0.001).unwrap();
        assert!((a.expected_slot_length(&s) - 0.489).abs() < 1e-12);
    }

    #[test]
    fn silent_and_lone_nodes() {
        let a = v(&[0.0, 0.0]);
        assert_eq!(a.joint_idle_prob(), 1.0);
        assert_eq!(a.success_prob_total(), 0.0);
        assert_eq!(a.success_prob_node(1).unwrap(), 0.0);
        let s = SlotLengths::from_beta(0.3).unwrap();
        assert_eq!(a.expected_slot_length(&s), 0.3);

        let lone = v(&[0.7]);
        assert_eq!(lone.idle_prob_excluding(0).unwrap(), 1.0);
        assert!((lone.success_prob_node(0).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(v(&[1.0]).joint_idle_prob(), 0.0);
    }

    #[test]
    fn out_of_range_index() {
        let a = v(&[0.1, 0.2]);
        assert_eq!(
            a.success_prob_node(2),
            Err(Error::NodeOutOfRange { index: 2, len: 2 })
        );
        assert!(a.idle_prob_excluding(5).is_err());
        assert!(a.success_prob_excluding(2).is_err());
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert!(AccessVector::untagged(vec![]).is_err());
        assert!(AccessVector::untagged(vec![1.2]).is_err());
        assert!(AccessVector::new(vec![0.1, 0.2], vec![Player::Dsrc]).is_err());
        assert!(NetworkConfig::new(0, 0, 0.001, 0.0, 0.0).is_err());
        assert!(NetworkConfig::new(1, 0, 1.0, 0.0, 0.0).is_err());
        assert!(NetworkConfig::new(1, 1, 0.001, -1.0, 0.0).is_err());
        assert!(StrategyPair::new(0.0, 0.5).is_err());
        assert!(SlotLengths::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn homogeneous_layout() {
        let c = NetworkConfig::without_cost(2, 3, 0.001).unwrap();
        let a = AccessVector::homogeneous(StrategyPair::new(0.1, 0.4).unwrap(), &c).unwrap();
        assert_eq!(a.taus(), &[0.1, 0.1, 0.4, 0.4, 0.4]);
        assert_eq!(a.first_of(Player::Wifi), Some(2));
        assert_eq!(a.tag(4).unwrap(), Player::Wifi);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn taus() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.0..0.999f64, 1..=4)
        }

        proptest! {
            #[test]
            fn matches_outcome_enumeration(t in taus()) {
                let a = v(&t);
                let (idle, alone) = enumerate(&t);
                prop_assert!((a.joint_idle_prob() - idle).abs() < 1e-12);
                for (i, p) in alone.iter().enumerate() {
                    prop_assert!((a.success_prob_node(i).unwrap() - p).abs() < 1e-12);
                }
                prop_assert!((a.success_prob_total() - alone.iter().sum::<f64>()).abs() < 1e-12);
            }

            #[test]
            fn factorization_identities(t in taus(), beta in 0.001..0.999f64) {
                let a = v(&t);
                let p_i = a.joint_idle_prob();
                let p_s = a.success_prob_total();
                prop_assert!(p_i > 0.0 && p_i <= 1.0);
                prop_assert!((0.0..=1.0).contains(&p_s));
                prop_assert!(p_i + p_s <= 1.0 + 1e-15);
                for i in 0..a.len() {
                    let excl = a.idle_prob_excluding(i).unwrap();
                    prop_assert!((p_i - (1.0 - t[i]) * excl).abs() < 1e-14);
                    let own = a.success_prob_node(i).unwrap();
                    let rest = a.success_prob_excluding(i).unwrap();
                    prop_assert!((p_s - own - rest).abs() < 1e-14);
                }
                let s = SlotLengths::from_beta(beta).unwrap();
                let e = a.expected_slot_length(&s);
                prop_assert!(e >= s.min() - 1e-15 && e <= s.max() + 1e-15);
            }
        }
    }
}
