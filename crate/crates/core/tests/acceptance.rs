//! Acceptance criteria 1 to 10. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails. Run with `--nocapture` to see the
//! lines when everything passes.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coexist::analysis::{
    age_payoff_derivative_terms, alpha2_root, tau_prime_upper_bound, verify_many,
    wifi_payoff_derivative_terms,
};
use coexist::equilibrium::{
    enumerate_nash, single_network_optimum, solve_stackelberg, NashResult, DEFAULT_EPS_TIE,
};
use coexist::game::{dsrc_loss_raw, wifi_loss_raw, AffineMap, GridSpec, PayoffSurfaces};
use coexist::metrics::{
    aoi_closed_form, aoi_node, inter_update_moments, per_node_throughput, throughput_closed_form,
};
use coexist::simulate::{run_simulation, SimConfig};
use coexist::{AccessVector, NetworkConfig, Player, SlotLengths, StrategyPair};

const BETA: f64 = 0.001;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_pct(x: f64, target: f64, pct: f64) -> bool {
    (x - target).abs() <= pct / 100.0 * target.abs()
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
        o.detail
            .push_str(&format!("; took {took:.1?}, limit {limit:?}"));
    } else {
        o.detail.push_str(&format!(" [{took:.1?}]"));
    }
    o
}

fn nash(nd: u32, nw: u32, wi: f64, wc: f64) -> Vec<NashResult> {
    let c = NetworkConfig::new(nd, nw, BETA, wi, wc).unwrap();
    let s = PayoffSurfaces::build(c, GridSpec::default()).unwrap();
    enumerate_nash(&s, DEFAULT_EPS_TIE)
}

/// Lone-network optima against the printed table, one unit in the fourth
/// decimal per entry.
fn criterion_1() -> Outcome {
    // (N, tau_d*, age, tau_w*, thr)
    let table = [
        (2, 0.0268, 2.5576, 0.0306, 0.4847),
        (4, 0.0119, 4.6505, 0.0126, 0.2407),
        (10, 0.0100, 11.0723, 0.0100, 0.0946),
    ];
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, td, age, tw, thr) in table {
        let d = single_network_optimum(Player::Dsrc, n, BETA, GridSpec::default(), 1e-5).unwrap();
        let w = single_network_optimum(Player::Wifi, n, BETA, GridSpec::default(), 1e-5).unwrap();
        for (name, got, want) in [
            ("tau_d*", d.tau_star, td),
            ("age", d.value, age),
            ("tau_w*", w.tau_star, tw),
            ("thr", w.value, thr),
        ] {
            let gap = (got - want).abs();
            worst = worst.max(gap);
            if gap > 1e-4 + 1e-12 {
                bad.push(format!("N={n} {name} {got:.6} vs {want}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("12 entries, max gap {worst:.2e} {}", bad.join(", ")),
    )
}

/// Cost-free Nash equilibria on the 0.01 grid.
fn criterion_2() -> Outcome {
    let table = [
        (1, 1, 0.99, 0.99, 101.6015, 0.0099),
        (2, 1, 0.50, 0.99, 399.8980, 0.2494),
        (2, 2, 0.46, 0.46, 12.9614, 0.0803),
        (2, 5, 0.44, 0.18, 9.9417, 0.0288),
        (5, 1, 0.20, 0.99, 1218.4, 0.3268),
        (5, 2, 0.18, 0.44, 35.2623, 0.1060),
        (5, 5, 0.17, 0.17, 26.8100, 0.0380),
    ];
    let mut bad = Vec::new();
    for (nd, nw, td, tw, age, thr) in table {
        let found = nash(nd, nw, 0.0, 0.0).into_iter().any(|ne| {
            (ne.pair.tau_d - td).abs() <= 0.01 + 1e-9
                && (ne.pair.tau_w - tw).abs() <= 0.01 + 1e-9
                && within_pct(ne.age, age, 5.0)
                && within_pct(ne.throughput, thr, 5.0)
        });
        if !found {
            bad.push(format!("({nd},{nw})"));
        }
    }
    outcome(bad.is_empty(), format!("7 rows, misses: {:?}", bad))
}

/// Cost-free Stackelberg equilibria. Solved on a 0.001 grid: the tabulated
/// values sit between 0.01 grid points.
fn criterion_3() -> Outcome {
    let table = [
        (Player::Dsrc, 1, 0.99, 0.99, 101.6015, 0.0099),
        (Player::Dsrc, 2, 0.32, 0.42, 12.2014, 0.1328),
        (Player::Dsrc, 5, 0.10, 0.15, 25.2029, 0.0615),
        (Player::Wifi, 1, 0.99, 0.99, 101.5607, 0.0099),
        (Player::Wifi, 2, 0.41, 0.30, 7.3323, 0.0857),
        (Player::Wifi, 5, 0.15, 0.10, 16.7464, 0.0405),
    ];
    let grid = GridSpec::new(0.01, 0.99, 0.001).unwrap();
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for n in [1, 2, 5] {
        let c = NetworkConfig::without_cost(n, n, BETA).unwrap();
        let s = PayoffSurfaces::build(c, grid).unwrap();
        for &(leader, tn, td, tw, age, thr) in table.iter().filter(|r| r.1 == n) {
            let se = solve_stackelberg(leader, &s, DEFAULT_EPS_TIE);
            let ok = (se.pair.tau_d - td).abs() <= 0.01 + 1e-9
                && (se.pair.tau_w - tw).abs() <= 0.01 + 1e-9
                && within_pct(se.age, age, 5.0)
                && within_pct(se.throughput, thr, 5.0);
            let line = format!(
                "{leader} N={tn} ({:.3},{:.3}) age {:.4} thr {:.4}",
                se.pair.tau_d, se.pair.tau_w, se.age, se.throughput
            );
            if !ok {
                bad.push(format!("{line} vs ({td},{tw}) {age} {thr}"));
            }
            seen.push(line);
        }
    }
    let detail = if bad.is_empty() {
        format!("6 rows: {}", seen.join("; "))
    } else {
        format!("misses: {}", bad.join("; "))
    };
    outcome(bad.is_empty(), detail)
}

/// Costed games: (a) equilibria less aggressive than the cost-free ones,
/// (b) several equilibria for one node per network.
fn criterion_4() -> Outcome {
    let w = (BETA, 1.0 + BETA);
    let mut notes = Vec::new();
    let mut a_ok = true;
    for (nd, nw) in [(1, 1), (2, 1), (2, 2), (2, 5), (5, 5)] {
        let free = nash(nd, nw, 0.0, 0.0);
        let costed = nash(nd, nw, w.0, w.1);
        if costed.is_empty() {
            notes.push(format!("({nd},{nw}) no costed grid NE"));
            continue;
        }
        for ne in &costed {
            let calmer = free.iter().all(|f| {
                ne.pair.tau_d <= f.pair.tau_d + 1e-9
                    && ne.pair.tau_w <= f.pair.tau_w + 1e-9
                    && ne.pair.tau_d + ne.pair.tau_w <= 0.75 * (f.pair.tau_d + f.pair.tau_w)
            });
            a_ok &= calmer && !free.is_empty();
            notes.push(format!(
                "({nd},{nw}) ({:.2},{:.2})",
                ne.pair.tau_d, ne.pair.tau_w
            ));
        }
    }
    let one_one = nash(1, 1, w.0, w.1).len();
    let b_ok = one_one >= 2;
    outcome(
        a_ok && b_ok,
        format!(
            "(a) {} [{}]; (b) {} NE for (1,1), need >= 2",
            if a_ok { "pass" } else { "fail" },
            notes.join(", "),
            one_one
        ),
    )
}

/// Closed forms against the node-level pipeline.
fn criterion_5() -> Outcome {
    let s = SlotLengths::from_beta(BETA).unwrap();
    let grid = GridSpec::default().points();
    let mut worst: f64 = 0.0;
    for nd in [1, 2, 5] {
        for nw in [1, 2, 5] {
            let c = NetworkConfig::without_cost(nd, nw, BETA).unwrap();
            for &td in &grid {
                for &tw in &grid {
                    let p = StrategyPair::new(td, tw).unwrap();
                    let v = AccessVector::homogeneous(p, &c).unwrap();
                    let age = aoi_node(&v, &s, v.first_of(Player::Dsrc).unwrap()).unwrap();
                    let thr =
                        per_node_throughput(&v, &s, v.first_of(Player::Wifi).unwrap()).unwrap();
                    let age_cf = aoi_closed_form(p, &c).unwrap();
                    let thr_cf = throughput_closed_form(p, &c).unwrap();
                    worst = worst.max((age - age_cf).abs() / age_cf.abs());
                    worst = worst.max((thr - thr_cf).abs() / thr_cf.abs());
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("max relative gap {worst:.2e}"))
}

/// Monte Carlo against the analytic age, throughput, inter-update moments
/// and slot frequencies of node 0. Seeds are fixed as 1000 + case index.
fn criterion_6() -> Outcome {
    let cases: Vec<(AccessVector, f64)> = vec![
        (AccessVector::untagged(vec![0.3]).unwrap(), 0.001),
        (AccessVector::from_counts(0.2, 1, 0.2, 1).unwrap(), 0.001),
        (AccessVector::from_counts(0.46, 2, 0.46, 2).unwrap(), 0.001),
        (AccessVector::from_counts(0.0268, 2, 0.0, 0).unwrap(), 0.001),
        (AccessVector::from_counts(0.17, 5, 0.17, 5).unwrap(), 0.001),
        (AccessVector::from_counts(0.44, 2, 0.18, 5).unwrap(), 0.001),
        (AccessVector::from_counts(0.1, 1, 0.05, 3).unwrap(), 0.01),
        (AccessVector::untagged(vec![0.1, 0.3, 0.05]).unwrap(), 0.001),
        (AccessVector::untagged(vec![0.5, 0.5]).unwrap(), 0.1),
        (
            AccessVector::untagged(vec![0.05, 0.15, 0.25, 0.35]).unwrap(),
            0.01,
        ),
        (
            AccessVector::untagged(vec![0.9, 0.02, 0.02]).unwrap(),
            0.001,
        ),
        (AccessVector::from_counts(0.02, 10, 0.0, 0).unwrap(), 0.1),
    ];
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, (v, beta)) in cases.iter().enumerate() {
        let s = SlotLengths::from_beta(*beta).unwrap();
        let cfg = SimConfig::new(1_000_000, 1000 + k as u64).unwrap();
        let sim = run_simulation(v, &s, &cfg).unwrap();
        let node = &sim.nodes[0];
        let m = inter_update_moments(v, &s, 0).unwrap();
        let p_idle = v.joint_idle_prob();
        let p_succ = v.success_prob_total();
        let [fi, fs, fc] = sim.slots.frequencies();
        let checks = [
            ("age", Some(node.age), aoi_node(v, &s, 0).unwrap()),
            (
                "thr",
                Some(node.throughput),
                per_node_throughput(v, &s, 0).unwrap(),
            ),
            ("E[Z]", node.z_mean, m.first),
            ("E[Z^2]", node.z_second, m.second),
            ("idle", Some(fi), p_idle),
            ("success", Some(fs), p_succ),
            ("collision", Some(fc), 1.0 - p_idle - p_succ),
        ];
        for (name, est, target) in checks {
            match est {
                Some(e) => {
                    let z = e.z_score(target);
                    worst = worst.max(z);
                    if z > 3.0 {
                        bad.push(format!(
                            "case {k} {name}: {:.6} vs {target:.6} ({z:.2} SE)",
                            e.mean
                        ));
                    }
                }
                None => bad.push(format!("case {k} {name}: no samples")),
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "12 cases x 7 checks, largest deviation {worst:.2} SE {}",
            bad.join("; ")
        ),
    )
}

/// Central differences with step 1e-6. The tolerance is the 1e-5 relative
/// bound plus the rounding noise of the difference quotient itself.
fn fd_agrees(analytic: f64, f: impl Fn(f64) -> f64, x: f64) -> (bool, f64) {
    let h = 1e-6;
    let (fp, fm) = (f(x + h), f(x - h));
    let numeric = (fp - fm) / (2.0 * h);
    let noise = 4.0 * f64::EPSILON * fp.abs().max(fm.abs()) / h;
    let scale = analytic.abs().max(numeric.abs());
    let gap = (analytic - numeric).abs();
    (
        gap <= 1e-5 * scale + noise,
        gap / scale.max(f64::MIN_POSITIVE),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let counts = [1u32, 2, 5];
    let mut fails = [0usize; 2];
    let mut typical = Vec::new();
    for player in 0..2 {
        for _ in 0..1000 {
            let nd = counts[rng.gen_range(0..3)];
            let nw = counts[rng.gen_range(0..3)];
            let beta = if rng.gen::<bool>() { 0.001 } else { 0.01 };
            let (wi, wc) = if rng.gen::<bool>() {
                (0.0, 0.0)
            } else {
                (beta, 1.0 + beta)
            };
            let c = NetworkConfig::new(nd, nw, beta, wi, wc).unwrap();
            let td = rng.gen_range(0.01..0.99);
            let tw = rng.gen_range(0.01..0.99);
            let p = StrategyPair::new(td, tw).unwrap();
            let (ok, rel) = if player == 0 {
                let a = age_payoff_derivative_terms(p, &c).total;
                fd_agrees(
                    a,
                    |t| {
                        dsrc_loss_raw(
                            StrategyPair {
                                tau_d: t,
                                tau_w: tw,
                            },
                            &c,
                        )
                        .unwrap()
                    },
                    td,
                )
            } else {
                let a = wifi_payoff_derivative_terms(p, &c).total;
                fd_agrees(
                    a,
                    |t| {
                        wifi_loss_raw(
                            StrategyPair {
                                tau_d: td,
                                tau_w: t,
                            },
                            &c,
                        )
                        .unwrap()
                    },
                    tw,
                )
            };
            typical.push(rel);
            if !ok {
                fails[player] += 1;
            }
        }
    }
    typical.sort_by(f64::total_cmp);
    let median = typical[typical.len() / 2];
    outcome(
        fails == [0, 0],
        format!(
            "2 x 1000 points, failures dsrc {} wifi {}, median relative gap {median:.1e}",
            fails[0], fails[1]
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut cases = Vec::new();
    for nd in [1, 2, 5] {
        for nw in [1, 2, 5] {
            for (wi, wc) in [(0.0, 0.0), (BETA, 1.0 + BETA)] {
                let c = NetworkConfig::new(nd, nw, BETA, wi, wc).unwrap();
                for k in 1..=9 {
                    for player in [Player::Dsrc, Player::Wifi] {
                        cases.push((player, c, f64::from(k) / 10.0));
                    }
                }
            }
        }
    }
    let reports = verify_many(&cases, GridSpec::new(0.001, 0.999, 0.001).unwrap()).unwrap();
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| r.sign_change_count > 1)
        .map(|r| {
            format!(
                "{} ({},{}) opp {}",
                r.player, r.n_dsrc, r.n_wifi, r.fixed_opponent
            )
        })
        .collect();
    let patterns = reports.iter().filter(|r| r.sign_pattern_ok).count();
    outcome(
        bad.is_empty(),
        format!(
            "{} scans, {} with <= 1 change, {patterns} with the expected pattern {}",
            reports.len(),
            reports.len() - bad.len(),
            bad.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for beta in [0.001, 0.01, 0.1] {
        for nd in 1..=10 {
            let root = alpha2_root(nd, beta, 1.0).unwrap();
            if let Some(bound) = tau_prime_upper_bound(beta, nd) {
                checked += 1;
                if root <= bound {
                    bad.push(format!("beta {beta} N_D {nd}: {root} <= {bound}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} bounds checked {}", bad.join(", ")),
    )
}

fn criterion_10() -> Outcome {
    let cells = [(1, 1), (2, 1), (2, 2), (2, 5), (5, 1), (5, 2), (5, 5)];
    let other = AffineMap {
        scale: 2.5e-4,
        offset: -3.0,
    };
    let mut bad = Vec::new();
    for (nd, nw) in cells {
        let c = NetworkConfig::without_cost(nd, nw, BETA).unwrap();
        let a = PayoffSurfaces::build(c, GridSpec::default()).unwrap();
        let b = PayoffSurfaces::build_with_map(c, GridSpec::default(), other).unwrap();
        let pa: Vec<_> = enumerate_nash(&a, 0.0)
            .into_iter()
            .map(|r| r.pair)
            .collect();
        let pb: Vec<_> = enumerate_nash(&b, 0.0)
            .into_iter()
            .map(|r| r.pair)
            .collect();
        if pa != pb || pa.is_empty() {
            bad.push(format!("({nd},{nw})"));
        }
    }
    outcome(bad.is_empty(), format!("7 cells, differing: {:?}", bad))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        ("1 lone-network optima table", timed(s(1), criterion_1)),
        ("2 cost-free Nash table", timed(s(10), criterion_2)),
        ("3 cost-free Stackelberg table", timed(s(30), criterion_3)),
        ("4 costed games qualitative", timed(s(60), criterion_4)),
        ("5 closed form vs pipeline", timed(s(5), criterion_5)),
        ("6 Monte Carlo agreement", timed(s(120), criterion_6)),
        ("7 derivative decompositions", timed(s(5), criterion_7)),
        ("8 sign-change sweep", timed(s(30), criterion_8)),
        ("9 alpha2 root above tau' bound", timed(s(1), criterion_9)),
        ("10 Nash set ignores age map", timed(s(10), criterion_10)),
    ];
    let mut failed = Vec::new();
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag}  {}", o.detail);
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
