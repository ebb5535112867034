//! Best responses, pure Nash equilibria, pessimistic Stackelberg equilibria
//! and the single-network optima, all by exhaustive search over the payoff
//! grid.
//!
//! Two payoffs are tied when they differ by at most `eps_tie` relative to the
//! magnitude of the best payoff in the column. The rescaled DSRC payoff can be
//! many orders of magnitude smaller than one, so an absolute tolerance would
//! tie strategies whose raw ages differ by a large amount.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{GridSpec, PayoffSurfaces};
use crate::metrics::{aoi_closed_form, throughput_closed_form};
use crate::model::{NetworkConfig, Player, StrategyPair};

pub const DEFAULT_EPS_TIE: f64 = 1e-9;

#[inline]
fn tied(best: f64, u: f64, eps_tie: f64) -> bool {
    best - u <= eps_tie * best.abs()
}

/// For each opponent strategy, the responder strategies attaining the best
/// payoff. Indices refer to the grid of the surfaces the map was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseMap {
    responder: Player,
    points: Vec<f64>,
    responses: Vec<Vec<usize>>,
}

impl BestResponseMap {
    pub fn responder(&self) -> Player {
        self.responder
    }

    /// Responder indices answering opponent index `opp`, ascending.
    pub fn responses_to(&self, opp: usize) -> &[usize] {
        &self.responses[opp]
    }

    /// Responder strategies answering opponent index `opp`.
    pub fn values_to(&self, opp: usize) -> Vec<f64> {
        self.responses[opp]
            .iter()
            .map(|k| self.points[*k])
            .collect()
    }

    pub fn contains(&self, opp: usize, own: usize) -> bool {
        self.responses[opp].binary_search(&own).is_ok()
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

/// Best-response sets of `responder` against every opponent grid strategy.
pub fn best_response(
    responder: Player,
    surfaces: &PayoffSurfaces,
    eps_tie: f64,
) -> BestResponseMap {
    let n = surfaces.size();
    let payoff = |own: usize, opp: usize| match responder {
        Player::Dsrc => surfaces.dsrc_payoff_at(own, opp),
        Player::Wifi => surfaces.wifi_payoff_at(opp, own),
    };
    let responses = (0..n)
        .into_par_iter()
        .map(|opp| {
            let best = (0..n)
                .map(|own| payoff(own, opp))
                .fold(f64::NEG_INFINITY, f64::max);
            (0..n)
                .filter(|own| tied(best, payoff(*own, opp), eps_tie))
                .collect()
        })
        .collect();
    BestResponseMap {
        responder,
        points: surfaces.points().to_vec(),
        responses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashResult {
    pub pair: StrategyPair,
    pub age: f64,
    pub throughput: f64,
    pub dsrc_payoff: f64,
    pub wifi_payoff: f64,
}

/// All grid pairs that are mutual best responses, ordered by `(tau_d, tau_w)`.
/// An empty list means the grid game has no pure equilibrium.
pub fn enumerate_nash(surfaces: &PayoffSurfaces, eps_tie: f64) -> Vec<NashResult> {
    let br_d = best_response(Player::Dsrc, surfaces, eps_tie);
    let br_w = best_response(Player::Wifi, surfaces, eps_tie);
    let mut out = Vec::new();
    for i_d in 0..surfaces.size() {
        for &i_w in br_w.responses_to(i_d) {
            if br_d.contains(i_w, i_d) {
                out.push(NashResult {
                    pair: surfaces.pair(i_d, i_w),
                    age: surfaces.age(i_d, i_w),
                    throughput: surfaces.throughput(i_d, i_w),
                    dsrc_payoff: surfaces.dsrc_payoff_at(i_d, i_w),
                    wifi_payoff: surfaces.wifi_payoff_at(i_d, i_w),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackelbergResult {
    pub leader: Player,
    pub pair: StrategyPair,
    pub age: f64,
    pub throughput: f64,
    /// Worst leader payoff over the follower's optimal reactions.
    pub leader_guaranteed_payoff: f64,
    pub follower_payoff: f64,
}

/// Pessimistic Stackelberg equilibrium with `leader` moving first.
///
/// For each leader strategy the follower may answer with any member of its
/// tied best-response set; the leader assumes the worst one. Ties in the
/// leader's maximum go to the smallest leader strategy, ties in the worst
/// case go to the smallest follower strategy.
pub fn solve_stackelberg(
    leader: Player,
    surfaces: &PayoffSurfaces,
    eps_tie: f64,
) -> StackelbergResult {
    let follower = leader.other();
    let reactions = best_response(follower, surfaces, eps_tie);
    let indices = |own: usize, other: usize| match leader {
        Player::Dsrc => (own, other),
        Player::Wifi => (other, own),
    };

    let mut best: Option<(f64, usize, usize)> = None;
    for l in 0..surfaces.size() {
        let mut worst: Option<(f64, usize)> = None;
        for &f in reactions.responses_to(l) {
            let (i_d, i_w) = indices(l, f);
            let u = surfaces.payoff_at(leader, i_d, i_w);
            if worst.is_none_or(|(w, _)| u < w) {
                worst = Some((u, f));
            }
        }
        let (value, f) = worst.expect("best-response sets are never empty");
        if best.is_none_or(|(b, _, _)| value > b) {
            best = Some((value, l, f));
        }
    }

    let (value, l, f) = best.expect("grid has at least one point");
    let (i_d, i_w) = indices(l, f);
    StackelbergResult {
        leader,
        pair: surfaces.pair(i_d, i_w),
        age: surfaces.age(i_d, i_w),
        throughput: surfaces.throughput(i_d, i_w),
        leader_guaranteed_payoff: value,
        follower_payoff: surfaces.payoff_at(follower, i_d, i_w),
    }
}

/// Best access probability for a network that has the medium to itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleNetworkOptimum {
    pub kind: Player,
    pub n: u32,
    pub tau_star: f64,
    /// Minimum age for DSRC, maximum throughput for WiFi.
    pub value: f64,
}

/// Scans `grid`, then refines around the best grid point by golden-section
/// search until the bracket is narrower than `refine`.
pub fn single_network_optimum(
    kind: Player,
    n: u32,
    beta: f64,
    grid: GridSpec,
    refine: f64,
) -> Result<SingleNetworkOptimum> {
    if n == 0 {
        return Err(invalid("n", "a network needs at least one node"));
    }
    if !(refine > 0.0) {
        return Err(invalid("refine", format!("must be > 0, got {refine}")));
    }
    grid.validate()?;
    let config = match kind {
        Player::Dsrc => NetworkConfig::without_cost(n, 0, beta)?,
        Player::Wifi => NetworkConfig::without_cost(0, n, beta)?,
    };
    // the absent network's strategy never enters the formulas
    let loss = |tau: f64| -> f64 {
        let p = StrategyPair::from_roles(kind, tau, 0.5);
        match kind {
            Player::Dsrc => aoi_closed_form(p, &config).unwrap_or(f64::INFINITY),
            Player::Wifi => -throughput_closed_form(p, &config).unwrap_or(0.0),
        }
    };

    let points = grid.points();
    let k = (0..points.len())
        .min_by(|a, b| loss(points[*a]).total_cmp(&loss(points[*b])))
        .expect("grid has at least one point");
    let lo = points[k.saturating_sub(1)];
    let hi = points[(k + 1).min(points.len() - 1)];
    let refined = golden_section(&loss, lo, hi, refine);

    let tau_star = [refined, points[k], lo, hi]
        .into_iter()
        .min_by(|a, b| loss(*a).total_cmp(&loss(*b)))
        .expect("non-empty");
    let value = match kind {
        Player::Dsrc => loss(tau_star),
        Player::Wifi => -loss(tau_star),
    };
    Ok(SingleNetworkOptimum {
        kind,
        n,
        tau_star,
        value,
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
