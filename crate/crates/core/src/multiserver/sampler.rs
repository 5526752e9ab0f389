//! Monte Carlo estimate of the `s`-qubit hub rate.
//!
//! Rounds are split into fixed batches. Batch `b` draws from ChaCha8 stream
//! `b` under the user seed, and the accumulators are integers, so results do
//! not depend on the thread count.
//!
//! A round ends at the first moment its outcome is known. On success that is
//! the last EG completion, `max_j (r'_j + n_j)`. On failure it is the
//! earliest cutoff: `r'_1 + n_o` when the `s`-th RSP is late, or
//! `r'_j + n_e` when the EG for qubit `j` runs out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{composed_fidelity, worst_case_fidelity, Exposure, HubConfig, StoredQubit};
use crate::error::{in_range, Error, Result};

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub hub: HubConfig,
    pub n_rounds: u64,
    pub seed: u64,
    pub f_min: f64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        self.hub.validate()?;
        if self.n_rounds < 2 {
            return Err(Error::InvalidParameter {
                field: "n_rounds",
                reason: "need at least two rounds for an error estimate".into(),
            });
        }
        in_range("f_min", self.f_min, 0.0, 1.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerResult {
    pub n_rounds: u64,
    pub n_success: u64,
    pub p_success: f64,
    /// Mean round duration in attempts.
    pub mean_attempts: f64,
    /// Successes per attempt.
    pub rate: f64,
    /// Delta-method standard error of `rate`.
    pub stderr_rate: f64,
    pub worst_case_fidelity: f64,
    /// False when `F* < F_min` and no rounds were run.
    pub feasible: bool,
}

struct Draws {
    sc: Geometric,
    ss: Geometric,
}

impl Draws {
    fn new(hub: &HubConfig) -> Result<Self> {
        let geo = |field, p| {
            Geometric::new(p).map_err(|e| Error::InvalidParameter {
                field,
                reason: e.to_string(),
            })
        };
        Ok(Self {
            sc: geo("p_sc", hub.p_sc)?,
            ss: geo("p_ss", hub.p_ss)?,
        })
    }
}

fn attempts<R: Rng + ?Sized>(g: &Geometric, rng: &mut R) -> u64 {
    g.sample(rng).saturating_add(1)
}

/// Sorts the `s` smallest entries of `r` into `r[..s]`.
///
/// The first `s` completions minimize the time `r'_s` at which `s` qubits
/// exist, over all size-`s` subsets. They do not minimize the spread.
pub fn select_first(r: &mut [u64], s: usize) {
    if s == 0 {
        return;
    }
    if s < r.len() {
        r.select_nth_unstable(s - 1);
    }
    r[..s].sort_unstable();
}

/// Completion times of one round. For `M = 1`, `r` holds the cumulative
/// times of `s` sequential RSPs and `n` is empty.
struct Round {
    r: Vec<u64>,
    n: Vec<u64>,
}

fn draw<R: Rng + ?Sized>(hub: &HubConfig, d: &Draws, rng: &mut R, round: &mut Round) {
    let s = hub.s as usize;
    round.r.clear();
    round.n.clear();
    if hub.m == 1 {
        let mut t = 0u64;
        for _ in 0..s {
            t = t.saturating_add(attempts(&d.sc, rng));
            round.r.push(t);
        }
        return;
    }
    for _ in 0..hub.m {
        round.r.push(attempts(&d.sc, rng));
    }
    for _ in 1..s {
        round.n.push(attempts(&d.ss, rng));
    }
    select_first(&mut round.r, s);
}

/// (success, duration in attempts)
fn judge(hub: &HubConfig, round: &Round) -> (bool, u64) {
    let s = hub.s as usize;
    let r = &round.r;
    if hub.m == 1 {
        let w = hub.baseline_window();
        return if r[s - 1] - r[0] <= w {
            (true, r[s - 1])
        } else {
            (false, r[0] + w)
        };
    }
    let spread = r[s - 1] - r[0];
    let mut ok = spread <= hub.n_o;
    let mut fail_at = if ok { u64::MAX } else { r[0] + hub.n_o };
    let mut done = r[0];
    for (j, &n) in round.n.iter().enumerate() {
        let rj = r[j + 1];
        if n > hub.n_e {
            ok = false;
            if rj - r[0] <= hub.n_o {
                fail_at = fail_at.min(rj + hub.n_e);
            }
        } else {
            done = done.max(rj + n);
        }
    }
    if ok {
        (true, done)
    } else {
        (false, fail_at)
    }
}

/// Measure of the union of `intervals` inside `[lo, hi)`.
fn covered(intervals: &[(u64, u64)], lo: u64, hi: u64) -> u64 {
    let mut clipped: Vec<(u64, u64)> = intervals
        .iter()
        .map(|&(a, b)| (a.max(lo), b.min(hi)))
        .filter(|&(a, b)| a < b)
        .collect();
    clipped.sort_unstable();
    let mut total = 0;
    let mut cur: Option<(u64, u64)> = None;
    for (a, b) in clipped {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total
}

fn stored_qubits(hub: &HubConfig, round: &Round, end: u64) -> Result<Vec<StoredQubit>> {
    let r = &round.r;
    let s = hub.s as usize;
    let local = hub.coherence_local();
    if hub.m == 1 {
        // the server keeps attempting RSP while it holds qubits
        return Ok(r[..s]
            .iter()
            .map(|&t| StoredQubit {
                exposure: Exposure::new((end - t) as f64, 0.0),
                coherence: local,
            })
            .collect());
    }
    let eg: Vec<(u64, u64)> = round
        .n
        .iter()
        .enumerate()
        .map(|(j, &n)| (r[j + 1], r[j + 1] + n))
        .collect();
    let host_active = covered(&eg, r[0], end);
    let mut out = vec![StoredQubit {
        exposure: Exposure::new(host_active as f64, (end - r[0] - host_active) as f64),
        coherence: local,
    }];
    let teleported = hub.coherence_teleported()?;
    for &(start, arrive) in &eg {
        let on_host = covered(&eg, arrive, end);
        out.push(StoredQubit {
            exposure: Exposure::new(
                (arrive - start + on_host) as f64,
                (end - arrive - on_host) as f64,
            ),
            coherence: teleported,
        });
    }
    Ok(out)
}

/// One simulated round with the per-qubit storage record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSample {
    pub success: bool,
    pub duration: u64,
    /// RSP completion times used by the round, ascending.
    pub rsp_times: Vec<u64>,
    /// EG attempts for qubits `2..=s`.
    pub eg_attempts: Vec<u64>,
    /// Present for accepted rounds.
    pub qubits: Option<Vec<StoredQubit>>,
    pub fidelity: Option<f64>,
}

/// Simulates a single round with `rng`.
pub fn sample_round<R: Rng + ?Sized>(hub: &HubConfig, rng: &mut R) -> Result<RoundSample> {
    hub.validate()?;
    let d = Draws::new(hub)?;
    let mut round = Round {
        r: Vec::with_capacity(hub.m as usize),
        n: Vec::with_capacity(hub.s as usize),
    };
    draw(hub, &d, rng, &mut round);
    let (success, duration) = judge(hub, &round);
    let (qubits, fidelity) = if success {
        let q = stored_qubits(hub, &round, duration)?;
        let f = composed_fidelity(&q, hub.kappa_e(), hub.kappa_o());
        (Some(q), Some(f))
    } else {
        (None, None)
    };
    round.r.truncate(hub.s as usize);
    Ok(RoundSample {
        success,
        duration,
        rsp_times: round.r,
        eg_attempts: round.n,
        qubits,
        fidelity,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    rounds: u64,
    succ: u64,
    sum_t: u128,
    sum_t2: u128,
    sum_succ_t: u128,
}

impl Acc {
    fn merge(self, o: Acc) -> Acc {
        Acc {
            rounds: self.rounds + o.rounds,
            succ: self.succ + o.succ,
            sum_t: self.sum_t + o.sum_t,
            sum_t2: self.sum_t2 + o.sum_t2,
            sum_succ_t: self.sum_succ_t + o.sum_succ_t,
        }
    }
}

fn run_batch(hub: &HubConfig, d: &Draws, seed: u64, batch: u64, rounds: u64) -> Acc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut round = Round {
        r: Vec::with_capacity(hub.m as usize),
        n: Vec::with_capacity(hub.s as usize),
    };
    let mut acc = Acc::default();
    for _ in 0..rounds {
        draw(hub, d, &mut rng, &mut round);
        let (ok, t) = judge(hub, &round);
        let t = t as u128;
        acc.rounds += 1;
        acc.sum_t += t;
        acc.sum_t2 += t * t;
        if ok {
            acc.succ += 1;
            acc.sum_succ_t += t;
        }
    }
    acc
}

/// Runs the sampler on the current rayon pool.
///
/// When `F* < F_min` no rounds are run and the result reports zero rate.
pub fn run_sampler(cfg: &SamplerConfig) -> Result<SamplerResult> {
    cfg.validate()?;
    let hub = &cfg.hub;
    let f_star = worst_case_fidelity(hub)?;
    if f_star < cfg.f_min {
        return Ok(SamplerResult {
            n_rounds: cfg.n_rounds,
            n_success: 0,
            p_success: 0.0,
            mean_attempts: f64::NAN,
            rate: 0.0,
            stderr_rate: 0.0,
            worst_case_fidelity: f_star,
            feasible: false,
        });
    }
    let d = Draws::new(hub)?;
    let batches = cfg.n_rounds.div_ceil(BATCH);
    let acc = (0..batches)
        .into_par_iter()
        .map(|b| {
            let rounds = BATCH.min(cfg.n_rounds - b * BATCH);
            run_batch(hub, &d, cfg.seed, b, rounds)
        })
        .reduce(Acc::default, Acc::merge);
    Ok(finish(acc, f_star))
}

/// Runs the sampler on a dedicated pool of `threads` workers.
pub fn run_sampler_in(cfg: &SamplerConfig, threads: usize) -> Result<SamplerResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter {
            field: "threads",
            reason: e.to_string(),
        })?;
    pool.install(|| run_sampler(cfg))
}

fn finish(acc: Acc, f_star: f64) -> SamplerResult {
    let n = acc.rounds as f64;
    let sum_t = acc.sum_t as f64;
    let succ = acc.succ as f64;
    let rate = succ / sum_t;
    let mean_t = sum_t / n;
    // residuals X - R T, with X the success indicator
    let ss = succ - 2.0 * rate * acc.sum_succ_t as f64 + rate * rate * acc.sum_t2 as f64;
    let var = (ss / (n - 1.0)).max(0.0);
    SamplerResult {
        n_rounds: acc.rounds,
        n_success: acc.succ,
        p_success: succ / n,
        mean_attempts: mean_t,
        rate,
        stderr_rate: (var / n).sqrt() / mean_t,
        worst_case_fidelity: f_star,
        feasible: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiserver::{analytic_rate_s2, Strategy};
    use proptest::prelude::*;

    fn cfg(hub: HubConfig, n: u64, seed: u64) -> SamplerConfig {
        SamplerConfig {
            hub,
            n_rounds: n,
            seed,
            f_min: 0.0,
        }
    }

    #[test]
    fn geometric_attempts_have_mean_one_over_p() {
        for p in [0.3, 1e-3] {
            let g = Geometric::new(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| attempts(&g, &mut rng) as f64).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let sd = (1.0 - p).sqrt() / p / (n as f64).sqrt();
            assert!((mean - 1.0 / p).abs() < 4.0 * sd, "p={p} mean={mean}");
            assert!(xs.iter().all(|&x| x >= 1.0));
        }
    }

    #[test]
    fn certain_links_give_exact_rates() {
        let hub = HubConfig {
            p_sc: 1.0,
            p_ss: 1.0,
            ..HubConfig::example()
        };
        let r = run_sampler(&cfg(hub, 1000, 1)).unwrap();
        assert_eq!(r.rate, 0.5);
        assert_eq!(r.stderr_rate, 0.0);
        for s in 1..=4 {
            let base = HubConfig { m: 1, s, ..hub };
            let r = run_sampler(&cfg(base, 1000, 1)).unwrap();
            assert_eq!(r.rate, 1.0 / s as f64);
        }
    }

    #[test]
    fn same_result_for_any_thread_count() {
        let hub = HubConfig { m: 4, s: 3, ..HubConfig::example() };
        let c = cfg(hub, 50_000, 42);
        let one = run_sampler_in(&c, 1).unwrap();
        for t in [2, 3, 8] {
            assert_eq!(run_sampler_in(&c, t).unwrap(), one);
        }
        assert_ne!(run_sampler(&cfg(hub, 50_000, 43)).unwrap(), one);
    }

    #[test]
    fn infeasible_floor_skips_sampling() {
        let c = SamplerConfig {
            f_min: 0.999_999,
            ..cfg(HubConfig::example(), 100, 0)
        };
        let r = run_sampler(&c).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn agrees_with_closed_forms() {
        let hub = HubConfig::example();
        let analytic = analytic_rate_s2(&hub, Strategy::Multiplex).unwrap().rate;
        let r = run_sampler(&cfg(hub, 100_000, 3)).unwrap();
        assert!((r.rate - analytic).abs() < 3.0 * r.stderr_rate, "{} vs {analytic} +- {}", r.rate, r.stderr_rate);
        let base = HubConfig { m: 1, n_o: hub.n_e, ..hub };
        let analytic = analytic_rate_s2(&base, Strategy::TryAndCommit).unwrap().rate;
        let r = run_sampler(&cfg(base, 100_000, 3)).unwrap();
        assert!((r.rate / analytic - 1.0).abs() < 0.02, "{} vs {analytic}", r.rate);
    }

    #[test]
    fn estimates_converge_in_n() {
        let hub = HubConfig { p_sc: 0.01, n_o: 20, p_ss: 0.2, n_e: 10, ..HubConfig::example() };
        let trials = 40;
        let mut close = 0;
        for t in 0..trials {
            let a = run_sampler(&cfg(hub, 4000, 100 + t)).unwrap();
            let b = run_sampler(&cfg(hub, 16_000, 1000 + t)).unwrap();
            if (a.rate - b.rate).abs() < 3.0 * a.stderr_rate {
                close += 1;
            }
        }
        assert!(close as f64 >= 0.95 * trials as f64, "{close}/{trials}");
    }

    #[test]
    fn accepted_rounds_meet_worst_case() {
        for (m, s) in [(2, 2), (3, 3), (5, 3), (1, 3)] {
            let hub = HubConfig {
                m,
                s,
                p_sc: 0.02,
                p_ss: 0.05,
                n_e: 60,
                n_o: 80,
                tau_ce: 300e-9 * 200.0,
                tau_co: 300e-9 * 2000.0,
                f0_sc: 0.98,
                f0_ss: 0.97,
                ..HubConfig::example()
            };
            let f_star = worst_case_fidelity(&hub).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut accepted = 0;
            for _ in 0..20_000 {
                let round = sample_round(&hub, &mut rng).unwrap();
                if let Some(f) = round.fidelity {
                    accepted += 1;
                    assert!(f >= f_star - 1e-12, "M={m} s={s}: {f} < {f_star}");
                    for q in round.qubits.unwrap() {
                        assert!(q.exposure.total() <= (hub.n_o + hub.n_e) as f64);
                    }
                }
            }
            assert!(accepted > 100);
        }
    }

    #[test]
    fn covered_merges_overlaps() {
        assert_eq!(covered(&[(0, 5), (3, 8), (10, 12)], 0, 100), 10);
        assert_eq!(covered(&[(0, 5), (3, 8)], 4, 6), 2);
        assert_eq!(covered(&[], 0, 10), 0);
    }

    proptest! {
        #[test]
        fn first_completions_finish_earliest(
            mut r in proptest::collection::vec(1u64..50, 1..7), s in 1usize..7
        ) {
            let s = s.min(r.len());
            let orig = r.clone();
            select_first(&mut r, s);
            let chosen = &r[..s];
            prop_assert!(chosen.windows(2).all(|w| w[0] <= w[1]));
            let mut sorted = orig.clone();
            sorted.sort_unstable();
            prop_assert_eq!(chosen, &sorted[..s]);
            let m = orig.len();
            let best = (0u32..1 << m)
                .filter(|mask| mask.count_ones() as usize == s)
                .map(|mask| {
                    let sub: Vec<u64> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| orig[i]).collect();
                    *sub.iter().max().unwrap()
                })
                .min()
                .unwrap();
            prop_assert_eq!(chosen[s - 1], best);
        }
    }
}
