//! Closed-form derivatives of the unrescaled losses `age + cost` and
//! `cost - throughput` with respect to a player's own access probability,
//! split into the terms the quasi-concavity argument reasons about, plus a
//! numerical sign-change scan of those derivatives.
//!
//! Rescaling the age by an increasing affine map does not move the sign
//! changes, so the scan on raw losses carries over to the game payoffs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::GridSpec;
use crate::model::{NetworkConfig, Player, StrategyPair};

/// Scan points closer than this to 0 or 1 are skipped.
pub const BOUNDARY_MARGIN: f64 = 1e-4;
/// Derivative values smaller than this in magnitude carry no sign.
pub const ZERO_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeDerivativeTerms {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha_col: f64,
    pub alpha_idle: f64,
    pub q_w: f64,
    pub q_w_prime: f64,
    /// `alpha1 + alpha2 + alpha_col - alpha_idle`
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrDerivativeTerms {
    pub alpha: f64,
    pub alpha_col: f64,
    pub alpha_idle: f64,
    pub q_d: f64,
    pub q_d_prime: f64,
    /// `alpha + alpha_col - alpha_idle`
    pub total: f64,
}

/// Derivative of `age + cost` in `tau_d`.
pub fn age_payoff_derivative_terms(p: StrategyPair, c: &NetworkConfig) -> AgeDerivativeTerms {
    let n = f64::from(c.n_dsrc);
    let nd = c.n_dsrc as i32;
    let nw = c.n_wifi as i32;
    let b = c.beta;
    let t = p.tau_d;
    let y = 1.0 - t;

    let q_w = (1.0 - p.tau_w).powi(nw);
    let q_w_prime = f64::from(c.n_wifi) * p.tau_w * (1.0 - p.tau_w).powi(nw - 1);

    let lead = q_w * n * y.powi(nd - 1);
    let alpha1 = b * (1.0 + b) / 2.0 * lead / (1.0 + b - y.powi(nd) * q_w).powi(2);
    let alpha2 = (1.0 + (1.0 + b) * (n * t - 1.0) / (q_w * y.powi(nd))) / (t * t);
    let alpha_col =
        c.w_col * (q_w * n * (n - 1.0) * t * y.powi(nd - 2) + q_w_prime * n * y.powi(nd - 1));
    let alpha_idle = c.w_idle * lead;

    AgeDerivativeTerms {
        alpha1,
        alpha2,
        alpha_col,
        alpha_idle,
        q_w,
        q_w_prime,
        total: alpha1 + alpha2 + alpha_col - alpha_idle,
    }
}

/// The first age term rewritten with the `1 + beta` factor pulled into the
/// squared denominator.
pub fn alpha1_rewritten(p: StrategyPair, c: &NetworkConfig) -> f64 {
    let nd = c.n_dsrc as i32;
    let b = c.beta;
    let y = 1.0 - p.tau_d;
    let q_w = (1.0 - p.tau_w).powi(c.n_wifi as i32);
    let inner = 1.0 - y.powi(nd) * q_w / (1.0 + b);
    q_w * f64::from(c.n_dsrc) * y.powi(nd - 1) / (2.0 * (1.0 + b) / b * inner * inner)
}

/// Derivative of `cost - throughput` in `tau_w`.
pub fn wifi_payoff_derivative_terms(p: StrategyPair, c: &NetworkConfig) -> ThrDerivativeTerms {
    let n = f64::from(c.n_wifi);
    let nd = c.n_dsrc as i32;
    let nw = c.n_wifi as i32;
    let b = c.beta;
    let t = p.tau_w;
    let x = 1.0 - t;

    let q_d = (1.0 - p.tau_d).powi(nd);
    let q_d_prime = f64::from(c.n_dsrc) * p.tau_d * (1.0 - p.tau_d).powi(nd - 1);

    let busy = 1.0 - q_d * x.powi(nw) + b;
    let alpha = q_d * (1.0 + b) * x.powi(nw - 2) * (q_d * x.powi(nw) + (1.0 + b) * (t * n - 1.0))
        / (busy * busy);
    let alpha_col =
        c.w_col * (q_d * n * (n - 1.0) * t * x.powi(nw - 2) + q_d_prime * n * x.powi(nw - 1));
    let alpha_idle = c.w_idle * q_d * n * x.powi(nw - 1);

    ThrDerivativeTerms {
        alpha,
        alpha_col,
        alpha_idle,
        q_d,
        q_d_prime,
        total: alpha + alpha_col - alpha_idle,
    }
}

/// Upper bound on the access probability below which the first age term
/// dominates, or `None` when no such probability exists.
pub fn tau_prime_upper_bound(beta: f64, n_d: u32) -> Option<f64> {
    if n_d == 0 || !(beta > 0.0) {
        return None;
    }
    let inner = (1.0 + beta) - (beta * (1.0 + beta) / 2.0).sqrt();
    if !(inner > 0.0 && inner < 1.0) {
        return None;
    }
    let bound = 1.0 - inner.powf(1.0 / f64::from(n_d));
    (bound > 0.0).then_some(bound)
}

/// Root of `1 - n_d * tau = q_w / (1 + beta) * (1 - tau)^n_d` in `(0, 1/n_d]`,
/// where the second age term changes sign.
pub fn alpha2_root(n_d: u32, beta: f64, q_w: f64) -> Result<f64> {
    if n_d == 0 {
        return Err(invalid("nd", "needs at least one DSRC node"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid("beta", format!("must lie in (0, 1), got {beta}")));
    }
    if !(q_w > 0.0 && q_w <= 1.0) {
        return Err(invalid("q_w", format!("must lie in (0, 1], got {q_w}")));
    }
    let n = f64::from(n_d);
    let g = |t: f64| 1.0 - n * t - q_w / (1.0 + beta) * (1.0 - t).powi(n_d as i32);
    // a single node never crosses before the right end
    if n_d == 1 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0 / n);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiConcavityReport {
    pub player: Player,
    pub n_dsrc: u32,
    pub n_wifi: u32,
    pub beta: f64,
    pub w_idle: f64,
    pub w_col: f64,
    pub fixed_opponent: f64,
    pub points_scanned: usize,
    pub sign_change_count: usize,
    /// At most one change, and a single change goes from negative to positive.
    pub sign_pattern_ok: bool,
    pub tau_prime_bound: Option<f64>,
    pub alpha2_root: Option<f64>,
}

/// Evaluates the own-strategy derivative of the player's loss along `scan`
/// with the opponent held at `fixed_opponent` and counts its sign changes.
pub fn verify_quasiconcavity(
    player: Player,
    c: &NetworkConfig,
    fixed_opponent: f64,
    scan: GridSpec,
) -> Result<QuasiConcavityReport> {
    c.validate()?;
    scan.validate()?;
    if c.count(player) == 0 {
        return Err(invalid(
            if player == Player::Dsrc { "nd" } else { "nw" },
            "the scanned network needs at least one node",
        ));
    }
    if !(fixed_opponent > 0.0 && fixed_opponent < 1.0) {
        return Err(invalid(
            "opp-tau",
            format!("must lie in (0, 1), got {fixed_opponent}"),
        ));
    }

    let derivative = |tau: f64| {
        let p = StrategyPair::from_roles(player, tau, fixed_opponent);
        match player {
            Player::Dsrc => age_payoff_derivative_terms(p, c).total,
            Player::Wifi => wifi_payoff_derivative_terms(p, c).total,
        }
    };
    let values: Vec<f64> = scan
        .points()
        .into_iter()
        .filter(|t| *t >= BOUNDARY_MARGIN && *t <= 1.0 - BOUNDARY_MARGIN)
        .map(derivative)
        .collect();
    let (sign_change_count, first_negative) = count_sign_changes(&values);

    let (tau_prime_bound, root) = match player {
        Player::Dsrc => {
            let q_w = (1.0 - fixed_opponent).powi(c.n_wifi as i32);
            (
                tau_prime_upper_bound(c.beta, c.n_dsrc),
                alpha2_root(c.n_dsrc, c.beta, q_w).ok(),
            )
        }
        Player::Wifi => (None, None),
    };

    Ok(QuasiConcavityReport {
        player,
        n_dsrc: c.n_dsrc,
        n_wifi: c.n_wifi,
        beta: c.beta,
        w_idle: c.w_idle,
        w_col: c.w_col,
        fixed_opponent,
        points_scanned: values.len(),
        sign_change_count,
        sign_pattern_ok: sign_change_count == 0 || (sign_change_count == 1 && first_negative),
        tau_prime_bound,
        alpha2_root: root,
    })
}

/// Runs [`verify_quasiconcavity`] for many cases in parallel, preserving order.
pub fn verify_many(
    cases: &[(Player, NetworkConfig, f64)],
    scan: GridSpec,
) -> Result<Vec<QuasiConcavityReport>> {
    cases
        .par_iter()
        .map(|(player, c, opp)| verify_quasiconcavity(*player, c, *opp, scan))
        .collect()
}

/// Number of strict sign changes, ignoring values inside the zero band, and
/// whether the first signed value is negative.
fn count_sign_changes(values: &[f64]) -> (usize, bool) {
    let mut signs = values
        .iter()
        .filter(|v| v.abs() >= ZERO_BAND)
        .map(|v| *v > 0.0);
    let Some(first) = signs.next() else {
        return (0, false);
    };
    let mut last = first;
    let mut changes = 0;
    for s in signs {
        if s != last {
            changes += 1;
            last = s;
        }
    }
    (changes, !first)
}
