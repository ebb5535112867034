//! Equilibria once idle and collided slots are charged, including the
//! heavier collision weights that push both networks toward the lone-network
//! optimum.

use coexist::equilibrium::{enumerate_nash, NashResult, DEFAULT_EPS_TIE};
use coexist::game::{GridSpec, PayoffSurfaces};
use coexist::NetworkConfig;

pub struct Case {
    pub n_dsrc: u32,
    pub n_wifi: u32,
    pub w_idle: f64,
    pub w_col: f64,
    pub equilibria: Vec<NashResult>,
}

pub fn run_example() -> coexist::Result<Vec<Case>> {
    let beta = 0.001;
    let inputs = [
        (1, 1, beta, 1.0 + beta),
        (2, 2, beta, 1.0 + beta),
        (5, 5, beta, 1.0 + beta),
        (1, 1, 0.001, 150.0),
        (2, 2, 0.001, 400.0),
        (5, 5, 0.001, 400.0),
    ];
    inputs
        .iter()
        .map(|&(nd, nw, wi, wc)| {
            let c = NetworkConfig::new(nd, nw, beta, wi, wc)?;
            let s = PayoffSurfaces::build(c, GridSpec::default())?;
            Ok(Case {
                n_dsrc: nd,
                n_wifi: nw,
                w_idle: wi,
                w_col: wc,
                equilibria: enumerate_nash(&s, DEFAULT_EPS_TIE),
            })
        })
        .collect()
}

fn main() -> coexist::Result<()> {
    for case in run_example()? {
        print!(
            "({}, {}) w = ({}, {}):",
            case.n_dsrc, case.n_wifi, case.w_idle, case.w_col
        );
        if case.equilibria.is_empty() {
            print!(" no pure equilibrium on the grid");
        }
        for ne in &case.equilibria {
            print!(
                "  ({:.2}, {:.2}) age {:.4} thr {:.4}",
                ne.pair.tau_d, ne.pair.tau_w, ne.age, ne.throughput
            );
        }
        println!();
    }
    Ok(())
}
