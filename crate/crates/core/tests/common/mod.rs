//! Seeded random instance generators shared by the integration tests.
#![allow(dead_code)]

use adlab::auction::{Bidder, SlotCurve};
use adlab::capacity::ForkSpec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly decreasing CTRs: top in `[0.6, 1]`, each next one a random
/// fraction `[0.4, 0.9]` of the previous.
pub fn random_curve(rng: &mut ChaCha8Rng, slots: usize) -> SlotCurve {
    let mut g = Vec::with_capacity(slots);
    let mut x: f64 = rng.gen_range(0.6..=1.0);
    for _ in 0..slots {
        g.push(x);
        x *= rng.gen_range(0.4..0.9);
    }
    SlotCurve::new(g).expect("valid random curve")
}

/// `n` distinct values in `(lo, hi)`, sorted descending, at least `gap` apart.
pub fn distinct_desc(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if v.windows(2).all(|w| w[0] - w[1] >= gap) {
            return v;
        }
    }
}

/// Bidders with distinct scores; values in `(1, max_value)`, relevance in
/// `[0.5, 1]`, ids `1..=n` in a shuffled score order.
pub fn random_bidders(rng: &mut ChaCha8Rng, n: usize, max_value: f64) -> Vec<Bidder> {
    loop {
        let bidders: Vec<Bidder> = (0..n)
            .map(|i| {
                Bidder::new(
                    i as u32 + 1,
                    rng.gen_range(1.0..max_value),
                    rng.gen_range(0.5..=1.0),
                )
                .expect("valid bidder")
            })
            .collect();
        let mut scores: Vec<f64> = bidders.iter().map(Bidder::score).collect();
        scores.sort_by(f64::total_cmp);
        if scores.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return bidders;
        }
    }
}

/// A fork instance: curve, descending scores and a spec with a valid fitness.
pub fn random_fork(rng: &mut ChaCha8Rng) -> (SlotCurve, Vec<f64>, ForkSpec) {
    let k = rng.gen_range(2..=6);
    let curve = random_curve(rng, k);
    let extra = rng.gen_range(1..=k);
    let slot = rng.gen_range(1..=k);
    let n = rng.gen_range(k..=k + extra + 2);
    let scores = distinct_desc(rng, n, 0.5, 30.0, 1e-3);
    let f = rng.gen_range(0.02..0.98) / curve.gamma(1);
    (curve, scores, ForkSpec::new(slot, extra, f))
}

/// Scores with `(j−1) s_j > j s_{j+1}` for every `j ≥ 2`, all positive.
pub fn separated_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut s = vec![rng.gen_range(20.0..40.0)];
    s.push(s[0] * rng.gen_range(0.2..0.9));
    for j in 2..n {
        let prev = s[j - 1];
        let bound = (j - 1) as f64 * prev / j as f64;
        s.push(bound * rng.gen_range(0.5..0.95));
    }
    s
}

/// Curve whose top gap `γ_1 − γ_2` is at least every other gap, including
/// the last one `γ_K − 0`.
pub fn top_gap_curve(rng: &mut ChaCha8Rng, slots: usize) -> SlotCurve {
    loop {
        let top: f64 = rng.gen_range(0.6..=1.0);
        let second = top * rng.gen_range(0.3..0.6);
        let mut g = vec![top, second];
        while g.len() < slots {
            let last = *g.last().unwrap();
            g.push(last * rng.gen_range(0.3..0.9));
        }
        g.truncate(slots);
        let gap = top - g.get(1).copied().unwrap_or(0.0);
        let ok = (0..slots).all(|j| g[j] - g.get(j + 1).copied().unwrap_or(0.0) <= gap);
        if ok {
            return SlotCurve::new(g).expect("valid curve");
        }
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
