//! Expected attempts for s successes within a window of w, and the temporal gain.
use qmux::scanstats::{
    expected_attempts_exact, expected_attempts_low_p, temporal_gain_s, WindowLength, WindowSpec,
};

fn main() -> qmux::Result<()> {
    let (w, s, m) = (5, 2, 2);
    println!("{:>8} {:>14} {:>14} {:>8}", "p", "E[exact]", "E[low p]", "gain");
    for p in [1e-3, 1e-2, 0.1, 0.5, 0.9] {
        let spec = WindowSpec::finite(w, s, p)?;
        let exact = expected_attempts_exact(spec)?.expected_attempts;
        let low = expected_attempts_low_p(spec)?.expected_attempts;
        let g = temporal_gain_s(p, WindowLength::Finite(w), m, s)?;
        println!("{p:>8} {exact:>14.4} {low:>14.4} {:>8.4}", g.gain);
    }
    Ok(())
}
