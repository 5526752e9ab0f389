//! Rate against fidelity for multiplexed single-click entanglement generation.
use qmux::eg::{eg_rate_point, EgConfig};
use qmux::{BrightState, Efficiency};

fn main() -> qmux::Result<()> {
    let eta = Efficiency::new(0.1)?;
    for m in [1, 2, 5] {
        println!("M = {m}");
        for k in 0..8 {
            let x = 1e-4 * 10f64.powf(k as f64 * 0.4);
            let pt = eg_rate_point(&EgConfig::new(m, eta, eta, BrightState::new(x)?)?)?;
            println!("  xi_A^2 {x:>10.3e}  F {:.6}  rate {:.4e}", pt.fidelity, pt.rate);
        }
    }
    Ok(())
}
