//! Monte Carlo hub rate next to the two-qubit closed form.
use qmux::multiserver::{analytic_rate_s2, run_sampler, worst_case_fidelity, HubConfig, SamplerConfig, Strategy};

fn main() -> qmux::Result<()> {
    let hub = HubConfig::example();
    let cfg = SamplerConfig { hub, n_rounds: 100_000, seed: 1, f_min: 0.0 };
    let t = std::time::Instant::now();
    let r = run_sampler(&cfg)?;
    let exact = analytic_rate_s2(&hub, Strategy::Multiplex)?;
    println!("sampled  {:.5e} +- {:.1e} per attempt ({} rounds, {:?})", r.rate, r.stderr_rate, r.n_rounds, t.elapsed());
    println!("analytic {:.5e}", exact.rate);
    println!("z        {:+.2}", (r.rate - exact.rate) / r.stderr_rate);
    println!("F*       {:.6}", worst_case_fidelity(&hub)?);
    println!("p_succ   {:.4}, mean round {:.1} attempts", r.p_success, r.mean_attempts);
    Ok(())
}
