//! Generators for the two geometric-CTR fork instances: one where adding
//! capacity raises revenue and one with a closed-form efficiency threshold.

use serde::Serialize;

use super::{ForkError, ForkSpec};
use crate::auction::{score_at, SlotCurve};

/// A curve, bidder scores in allocation order, and the fork to apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForkInstance {
    pub curve: SlotCurve,
    pub scores: Vec<f64>,
    pub spec: ForkSpec,
}

fn check_common(slots: usize, ratio: f64, fitness: f64, extra: usize) -> Result<(), ForkError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ForkError::Premise(format!("ratio r = {ratio} must lie in (0, 1)")));
    }
    if slots < 1 {
        return Err(ForkError::Premise("need at least one slot".into()));
    }
    if !(fitness > 0.0 && fitness < 1.0) {
        return Err(ForkError::Premise(format!(
            "fitness f = {fitness} must lie in (0, 1) since γ_1 = 1"
        )));
    }
    if extra < 1 || extra > slots {
        return Err(ForkError::Premise(format!(
            "extra slots L = {extra} must lie in 1..={slots}"
        )));
    }
    Ok(())
}

/// Geometric CTRs `γ_j = r^{j−1}`, fork of the last slot, and scores with
/// `(K−1) s_K > K s_{K+1}` and `j s_{j+1} ≥ (j−1) s_j` for
/// `K+1 ≤ j ≤ K+L−1`.
///
/// Default scores are `s_j = 10 + 2(K − j)` up to `K`, then
/// `s_{K+1} = (K−1) s_K / (2K)` and the tail at equality
/// `s_{j+1} = (j−1) s_j / j`. `overrides` replaces the whole score vector
/// (at least `K + L` entries) and is checked against both premises.
pub fn make_example1(
    slots: usize,
    ratio: f64,
    fitness: f64,
    extra: usize,
    overrides: Option<Vec<f64>>,
) -> Result<ForkInstance, ForkError> {
    check_common(slots, ratio, fitness, extra)?;
    if slots < 2 {
        return Err(ForkError::Premise("(K−1) s_K > K s_{K+1} needs K ≥ 2".into()));
    }
    let k = slots;
    let scores = match overrides {
        Some(s) => {
            if s.len() < k + extra {
                return Err(ForkError::Premise(format!(
                    "need at least K + L = {} scores, got {}",
                    k + extra,
                    s.len()
                )));
            }
            super::conditions::check_scores(&s)?;
            s
        }
        None => {
            let mut s: Vec<f64> = (1..=k).map(|j| 10.0 + 2.0 * (k - j) as f64).collect();
            s.push((k - 1) as f64 * s[k - 1] / (2 * k) as f64);
            for j in k + 1..k + extra {
                s.push((j - 1) as f64 * s[j - 1] / j as f64);
            }
            s
        }
    };

    let s = |j: usize| score_at(&scores, j);
    if !((k - 1) as f64 * s(k) > k as f64 * s(k + 1)) {
        return Err(ForkError::Premise(format!(
            "(K−1) s_K > K s_(K+1) fails: {} ≤ {}",
            (k - 1) as f64 * s(k),
            k as f64 * s(k + 1)
        )));
    }
    for j in k + 1..k + extra {
        if (j as f64) * s(j + 1) < (j - 1) as f64 * s(j) {
            return Err(ForkError::Premise(format!(
                "j s_(j+1) ≥ (j−1) s_j fails at j = {j}"
            )));
        }
    }

    Ok(ForkInstance {
        curve: SlotCurve::geometric(k, 1.0, ratio).map_err(ForkError::Auction)?,
        scores,
        spec: ForkSpec::new(k, extra, fitness),
    })
}

/// Geometric CTRs, fork of the last slot, and scores `s_j = 100 α^{j−1}`
/// for `j = 1..=K+L`, so that `s_{K+j} = α^j s_K`.
pub fn make_example2(
    slots: usize,
    ratio: f64,
    fitness: f64,
    extra: usize,
    alpha: f64,
) -> Result<ForkInstance, ForkError> {
    check_common(slots, ratio, fitness, extra)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ForkError::Premise(format!("α = {alpha} must lie in (0, 1)")));
    }
    let scores = (0..slots + extra).map(|j| 100.0 * alpha.powi(j as i32)).collect();
    Ok(ForkInstance {
        curve: SlotCurve::geometric(slots, 1.0, ratio).map_err(ForkError::Auction)?,
        scores,
        spec: ForkSpec::new(slots, extra, fitness),
    })
}

/// Fitness above which the efficiency condition holds for the
/// geometric instance: `(1 − α r) / (1 − (α r)^L)`.
pub fn example2_threshold(ratio: f64, alpha: f64, extra: usize) -> f64 {
    let x = alpha * ratio;
    (1.0 - x) / (1.0 - x.powi(extra as i32))
}
