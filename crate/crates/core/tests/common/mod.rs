//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

/// `E[tau]` for `s` successes inside `w` consecutive attempts, by pushing
/// probability mass over every surviving `(w-1)`-bit history until the
/// survivor mass drops below `tail`. Returns (expectation, leftover mass).
pub fn window_expectation_by_strings(w: u32, s: u32, p: f64, tail: f64) -> (f64, f64) {
    if s == 1 {
        return (1.0 / p, 0.0);
    }
    let bits = w - 1;
    let mask = (1u64 << bits) - 1;
    let mut mass = vec![0.0f64; 1 << bits];
    mass[0] = 1.0;
    let mut expectation = 0.0;
    let mut alive = 1.0;
    let mut n = 0u64;
    while alive > tail {
        // P(tau > n) = alive
        expectation += alive;
        let mut next = vec![0.0f64; 1 << bits];
        for (hist, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let hist = hist as u64;
            next[((hist << 1) & mask) as usize] += m * (1.0 - p);
            // a success completes the run if the last w-1 hold s-1 successes
            if hist.count_ones() + 1 < s {
                next[(((hist << 1) | 1) & mask) as usize] += m * p;
            }
        }
        mass = next;
        alive = mass.iter().sum();
        n += 1;
        assert!(n < 50_000_000, "oracle did not converge");
    }
    (expectation + alive, alive)
}

/// `P(tau > n)` by listing all `2^n` outcome strings.
pub fn survival_by_enumeration(w: u32, s: u32, p: f64, n: u32) -> f64 {
    let mut total = 0.0;
    for bits in 0u64..(1 << n) {
        let hit = (0..n).any(|end| {
            let lo = (end + 1).saturating_sub(w);
            (lo..=end).filter(|i| bits >> i & 1 == 1).count() as u32 >= s
        });
        if !hit {
            let k = bits.count_ones() as i32;
            total += p.powi(k) * (1.0 - p).powi(n as i32 - k);
        }
    }
    total
}

/// `P(tau > n)` from the forward recursion, for comparison with enumeration.
pub fn survival_by_strings(w: u32, s: u32, p: f64, n: u32) -> f64 {
    let bits = w.max(2) - 1;
    let mask = (1u64 << bits) - 1;
    let mut mass = vec![0.0f64; 1 << bits];
    mass[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0f64; 1 << bits];
        for (hist, &m) in mass.iter().enumerate() {
            let hist = hist as u64;
            let recent = if w == 1 { 0 } else { hist.count_ones() };
            next[((hist << 1) & mask) as usize] += m * (1.0 - p);
            if recent + 1 < s {
                next[(((hist << 1) | 1) & mask) as usize] += m * p;
            }
        }
        mass = next;
    }
    mass.iter().sum()
}
