//! Simulates a small heterogeneous medium and compares each node's age,
//! throughput and inter-update moments with the analytic values.

use coexist::metrics::{aoi_node, inter_update_moments, per_node_throughput};
use coexist::simulate::{run_simulation, SimConfig, SimResult};
use coexist::{AccessVector, Player, SlotLengths};

pub fn run_example() -> coexist::Result<(AccessVector, SlotLengths, SimResult)> {
    let v = AccessVector::new(
        vec![0.15, 0.3, 0.08],
        vec![Player::Dsrc, Player::Dsrc, Player::Wifi],
    )?;
    let s = SlotLengths::from_beta(0.001)?;
    let sim = run_simulation(&v, &s, &SimConfig::new(200_000, 2024)?)?;
    Ok((v, s, sim))
}

fn main() -> coexist::Result<()> {
    let (v, s, sim) = run_example()?;
    for (i, node) in sim.nodes.iter().enumerate() {
        let m = inter_update_moments(&v, &s, i)?;
        println!(
            "node {i}: age {:.4} +- {:.4} (analytic {:.4})  thr {:.4} (analytic {:.4})  E[Z] {:.3} (analytic {:.3})",
            node.age.mean,
            node.age.std_err,
            aoi_node(&v, &s, i)?,
            node.throughput.mean,
            per_node_throughput(&v, &s, i)?,
            node.z_mean.map_or(f64::NAN, |e| e.mean),
            m.first,
        );
    }
    let [idle, succ, col] = sim.slots.frequencies();
    println!(
        "slots: idle {:.4}  success {:.4}  collision {:.4}",
        idle.mean, succ.mean, col.mean
    );
    Ok(())
}
