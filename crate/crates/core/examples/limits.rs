//! Classical bounds against the low-p temporal gain.
use qmux::scanstats::{classical_bound_s, temporal_gain_s_low_p_limit, BoundRegime};

fn main() {
    let w = 4;
    println!("{:>3} {:>3} {:>10} {:>12} {:>10}", "M", "s", "general", "large w", "low p");
    for m in 1..=6 {
        for s in 1..=3 {
            println!(
                "{m:>3} {s:>3} {:>10.3} {:>12.3} {:>10.3}",
                classical_bound_s(m, s, BoundRegime::General),
                classical_bound_s(m, s, BoundRegime::LargeWindow),
                temporal_gain_s_low_p_limit(w, m, s),
            );
        }
    }
}
