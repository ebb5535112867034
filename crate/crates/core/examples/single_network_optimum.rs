//! Best access probability of a network that has the medium to itself.

use coexist::equilibrium::{single_network_optimum, SingleNetworkOptimum};
use coexist::game::GridSpec;
use coexist::Player;

pub fn run_example() -> coexist::Result<Vec<(SingleNetworkOptimum, SingleNetworkOptimum)>> {
    [2, 4, 10]
        .iter()
        .map(|&n| {
            let d = single_network_optimum(Player::Dsrc, n, 0.001, GridSpec::default(), 1e-5)?;
            let w = single_network_optimum(Player::Wifi, n, 0.001, GridSpec::default(), 1e-5)?;
            Ok((d, w))
        })
        .collect()
}

fn main() -> coexist::Result<()> {
    println!(" N  tau_d*     age   tau_w*     thr");
    for (d, w) in run_example()? {
        println!(
            "{:>2}  {:.4}  {:.4}  {:.4}  {:.4}",
            d.n, d.tau_star, d.value, w.tau_star, w.value
        );
    }
    Ok(())
}
