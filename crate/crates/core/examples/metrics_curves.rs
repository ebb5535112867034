//! Age of a lone DSRC node against its access probability, for a few WiFi
//! network sizes with the WiFi nodes fixed at 0.2, and the matching WiFi
//! throughput curves.

use coexist::game::GridSpec;
use coexist::metrics::{aoi_closed_form, throughput_closed_form};
use coexist::{NetworkConfig, StrategyPair};

pub struct Curve {
    pub n_wifi: u32,
    pub tau: Vec<f64>,
    pub age: Vec<f64>,
    pub throughput: Vec<f64>,
}

pub fn run_example() -> coexist::Result<Vec<Curve>> {
    let grid = GridSpec::default();
    let mut curves = Vec::new();
    for n_wifi in [1, 2, 5] {
        let c = NetworkConfig::without_cost(1, n_wifi, 0.001)?;
        let mut curve = Curve {
            n_wifi,
            tau: grid.points(),
            age: Vec::new(),
            throughput: Vec::new(),
        };
        for &t in &curve.tau {
            curve
                .age
                .push(aoi_closed_form(StrategyPair::new(t, 0.2)?, &c)?);
            // same sweep for WiFi with the DSRC node at 0.2
            curve
                .throughput
                .push(throughput_closed_form(StrategyPair::new(0.2, t)?, &c)?);
        }
        curves.push(curve);
    }
    Ok(curves)
}

fn main() -> coexist::Result<()> {
    for c in run_example()? {
        println!("N_W = {}", c.n_wifi);
        for k in (0..c.tau.len()).step_by(14) {
            println!(
                "  tau {:.2}  age {:>10.4}  thr {:.4}",
                c.tau[k], c.age[k], c.throughput[k]
            );
        }
    }
    Ok(())
}
