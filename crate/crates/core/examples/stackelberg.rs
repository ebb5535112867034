//! Pessimistic Stackelberg equilibria with either network leading.

use coexist::equilibrium::{solve_stackelberg, StackelbergResult, DEFAULT_EPS_TIE};
use coexist::game::{GridSpec, PayoffSurfaces};
use coexist::{NetworkConfig, Player};

pub fn run_example() -> coexist::Result<Vec<(u32, StackelbergResult)>> {
    let mut out = Vec::new();
    for n in [1, 2, 5] {
        let c = NetworkConfig::without_cost(n, n, 0.001)?;
        let s = PayoffSurfaces::build(c, GridSpec::default())?;
        for leader in [Player::Dsrc, Player::Wifi] {
            out.push((n, solve_stackelberg(leader, &s, DEFAULT_EPS_TIE)));
        }
    }
    Ok(out)
}

fn main() -> coexist::Result<()> {
    for (n, se) in run_example()? {
        println!(
            "N = {n}  {} leads: ({:.2}, {:.2})  age {:.4}  thr {:.4}",
            se.leader, se.pair.tau_d, se.pair.tau_w, se.age, se.throughput
        );
    }
    Ok(())
}
