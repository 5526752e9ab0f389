//! Gain of multiplexed EG over M independent links at a fixed fidelity.
use qmux::eg::eg_gain;
use qmux::Efficiency;

fn main() -> qmux::Result<()> {
    let f_min = 0.95;
    for eta in [0.1, 0.5, 0.9] {
        let e = Efficiency::new(eta)?;
        let gains: Vec<String> = [1, 2, 5, 10, 30]
            .iter()
            .map(|&m| eg_gain(m, e, e, f_min).map(|g| format!("{:.3}", g.gain)))
            .collect::<qmux::Result<_>>()?;
        println!("eta {eta}: M = 1, 2, 5, 10, 30 -> {}", gains.join(", "));
    }
    let g = eg_gain(1000, Efficiency::new(0.01)?, Efficiency::new(0.05)?, 1.0 - 1e-4)?;
    println!("asymmetric eta_A 0.01, eta_B 0.05, M 1000: {:.3}", g.gain);
    Ok(())
}
