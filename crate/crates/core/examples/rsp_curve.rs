//! Fidelity and rate of multiplexed remote state preparation against gamma.
use qmux::rsp::{rsp_rate_fidelity_sweep, DemandModel};
use qmux::Efficiency;

fn main() -> qmux::Result<()> {
    let (ec, es) = (Efficiency::new(1e-3)?, Efficiency::new(0.1)?);
    let gammas: Vec<f64> = (0..6).map(|k| 1e-7 * 10f64.powi(k)).filter(|&g| g <= 5e-4).collect();
    for m in [1, 5] {
        println!("M = {m}");
        for pt in rsp_rate_fidelity_sweep(m, ec, es, &gammas, DemandModel::SingleUserAllDevices)? {
            println!(
                "  gamma {:>9.1e}  F {:.6}  rate {:.4e}",
                pt.param("gamma").unwrap_or(f64::NAN),
                pt.fidelity,
                pt.rate
            );
        }
    }
    Ok(())
}
