//! RSP gain under each demand model, with its large-M limit.
use qmux::rsp::{rsp_gain, rsp_gain_limit, DemandModel};
use qmux::Efficiency;

fn main() -> qmux::Result<()> {
    let (ec, es) = (Efficiency::new(1e-3)?, Efficiency::new(0.9)?);
    let f_min = 0.99;
    println!("limit for eta_s = 0.9: {:.4}", rsp_gain_limit(es));
    for d in DemandModel::ALL {
        let gains: Vec<String> = [1, 2, 5, 10, 30]
            .iter()
            .map(|&m| rsp_gain(m, ec, es, f_min, d).map(|g| format!("{:.3}", g.gain)))
            .collect::<qmux::Result<_>>()?;
        println!("{d:?}: M = 1, 2, 5, 10, 30 -> {}", gains.join(", "));
    }
    Ok(())
}
