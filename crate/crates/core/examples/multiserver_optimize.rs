//! Optimized hub rate against the single-server reference, reference hub hardware.
use qmux::multiserver::{baseline_rate, optimize_hub, HubGrids, HubPhysical, OptimizeRequest};

fn main() -> qmux::Result<()> {
    let n_rounds = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    println!("{:>2} {:>2} {:>5} {:>12} {:>12} {:>8} {:>6} {:>5}", "s", "M", "F_min", "rate", "reference", "gain", "M^s", "sat");
    for (s, m) in [(2, 2), (2, 3), (2, 4), (3, 3)] {
        for f_min in [0.8, 0.9, 0.95] {
            let req = OptimizeRequest {
                m,
                s,
                physical: HubPhysical::reference(),
                f_min,
                grids: HubGrids::default(),
                n_rounds,
                seed: 2024,
            };
            let hub = optimize_hub(&req)?;
            let base = baseline_rate(&req)?;
            println!(
                "{s:>2} {m:>2} {f_min:>5} {:>12.4e} {:>12.4e} {:>8.3} {:>6} {:>5}  (alpha2 {}, n_o {}; ref n_o {})",
                hub.result.rate,
                base.result.rate,
                hub.result.rate / base.result.rate,
                m.pow(s),
                hub.saturated,
                hub.params.alpha2,
                hub.params.n_o,
                base.params.n_o,
            );
        }
    }
    Ok(())
}
