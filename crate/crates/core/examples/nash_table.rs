//! Pure Nash equilibria of the cost-free game on the default 0.01 grid.

use coexist::equilibrium::{enumerate_nash, NashResult, DEFAULT_EPS_TIE};
use coexist::game::{GridSpec, PayoffSurfaces};
use coexist::NetworkConfig;

pub const CELLS: [(u32, u32); 7] = [(1, 1), (2, 1), (2, 2), (2, 5), (5, 1), (5, 2), (5, 5)];

pub type Row = ((u32, u32), Vec<NashResult>);

pub fn run_example() -> coexist::Result<Vec<Row>> {
    CELLS
        .iter()
        .map(|&(nd, nw)| {
            let c = NetworkConfig::without_cost(nd, nw, 0.001)?;
            let s = PayoffSurfaces::build(c, GridSpec::default())?;
            Ok(((nd, nw), enumerate_nash(&s, DEFAULT_EPS_TIE)))
        })
        .collect()
}

fn main() -> coexist::Result<()> {
    println!("N_D N_W  tau_d tau_w        age     thr");
    for ((nd, nw), list) in run_example()? {
        for ne in list {
            println!(
                "{nd:>3} {nw:>3}  {:.2}  {:.2}  {:>9.4}  {:.4}",
                ne.pair.tau_d, ne.pair.tau_w, ne.age, ne.throughput
            );
        }
    }
    Ok(())
}
