//! Sign-change scan of both players' payoff derivatives over a sweep of node
//! counts, opponent strategies and wastage weights.

use coexist::analysis::{verify_many, QuasiConcavityReport};
use coexist::game::GridSpec;
use coexist::{NetworkConfig, Player};

pub fn run_example() -> coexist::Result<Vec<QuasiConcavityReport>> {
    let beta = 0.001;
    let mut cases = Vec::new();
    for nd in [1, 2, 5] {
        for nw in [1, 2, 5] {
            for (wi, wc) in [(0.0, 0.0), (beta, 1.0 + beta)] {
                let c = NetworkConfig::new(nd, nw, beta, wi, wc)?;
                for k in 1..=9 {
                    for player in [Player::Dsrc, Player::Wifi] {
                        cases.push((player, c, f64::from(k) / 10.0));
                    }
                }
            }
        }
    }
    verify_many(&cases, GridSpec::new(0.001, 0.999, 0.001)?)
}

fn main() -> coexist::Result<()> {
    let reports = run_example()?;
    let ok = reports.iter().filter(|r| r.sign_pattern_ok).count();
    let most = reports
        .iter()
        .map(|r| r.sign_change_count)
        .max()
        .unwrap_or(0);
    println!(
        "{ok} of {} scans unimodal, at most {most} sign change(s)",
        reports.len()
    );
    Ok(())
}
