//! Revenue and efficiency of the combined auction and the sufficient
//! conditions for either to improve.

use serde::Serialize;

use super::{ForkError, MergedCurve};
use crate::auction::{efficiency_of, min_sne_revenue, score_at, SlotCurve};

pub(crate) fn check_scores(scores: &[f64]) -> Result<(), ForkError> {
    for (idx, &s) in scores.iter().enumerate() {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(ForkError::InvalidScores {
                position: idx + 1,
                reason: "score must be finite and non-negative",
            });
        }
    }
    if let Some(idx) = scores.windows(2).position(|w| w[0] < w[1]) {
        return Err(ForkError::InvalidScores {
            position: idx + 2,
            reason: "scores must be non-increasing",
        });
    }
    Ok(())
}

/// Minimum-equilibrium revenue of the combined auction.
pub fn revenue_after_fork(merged: &MergedCurve, scores: &[f64]) -> f64 {
    min_sne_revenue(merged.as_slice(), scores)
}

/// `Σ_j γ̃_j · s_j`
pub fn efficiency_after_fork(merged: &MergedCurve, scores: &[f64]) -> f64 {
    efficiency_of(merged.as_slice(), scores)
}

/// Relative revenue gain `(R − R_0) / R_0`.
pub fn value_of_capacity(revenue: f64, baseline: f64) -> Result<f64, ForkError> {
    if !(baseline > 0.0) {
        return Err(ForkError::NonPositiveBaseline(baseline));
    }
    Ok((revenue - baseline) / baseline)
}

/// `min_{l ≤ j ≤ K} (γ̃_j − γ̃_{j+1}) / (γ_j − γ_{j+1})`
pub fn eta(curve: &SlotCurve, merged: &MergedCurve) -> f64 {
    let k = curve.slots();
    (merged.spec().slot..=k)
        .map(|j| {
            let merged_gap = merged.gamma(j) - merged.gamma(j + 1);
            let gap = curve.gamma(j) - curve.gamma(j + 1);
            merged_gap / gap
        })
        .fold(f64::INFINITY, f64::min)
}

/// `min_{l ≤ j ≤ K} γ̃_j / γ_j`
pub fn beta(curve: &SlotCurve, merged: &MergedCurve) -> f64 {
    let k = curve.slots();
    (merged.spec().slot..=k)
        .map(|j| merged.gamma(j) / curve.gamma(j))
        .fold(f64::INFINITY, f64::min)
}

/// Result of testing one sufficient condition `ratio > rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    /// `η` for revenue, `β` for efficiency.
    pub ratio: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Sufficient condition for a positive value of capacity: `η > rhs` where
///
/// `rhs = 1 − [(γ_l − γ̃_l)(l−1)s_l + Σ_{j=K+1}^{K+L−1} (γ̃_j − γ̃_{j+1}) j s_{j+1}]
///           / Σ_{j=l}^{K} (γ_j − γ_{j+1}) j s_{j+1}`.
pub fn check_revenue_condition(
    curve: &SlotCurve,
    merged: &MergedCurve,
    scores: &[f64],
) -> Result<ConditionCheck, ForkError> {
    check_scores(scores)?;
    let k = curve.slots();
    let l = merged.spec().slot;
    let extra = merged.spec().extra_slots;
    let s = |j: usize| score_at(scores, j);

    let denominator: f64 = (l..=k)
        .map(|j| (curve.gamma(j) - curve.gamma(j + 1)) * j as f64 * s(j + 1))
        .sum();
    if denominator == 0.0 {
        return Err(ForkError::ZeroDenominator("Σ_{j=l..K} (γ_j − γ_{j+1}) j s_{j+1}"));
    }
    let forked_loss = (curve.gamma(l) - merged.gamma(l)) * (l - 1) as f64 * s(l);
    let new_slots: f64 = (k + 1..k + extra)
        .map(|j| (merged.gamma(j) - merged.gamma(j + 1)) * j as f64 * s(j + 1))
        .sum();
    let rhs = 1.0 - (forked_loss + new_slots) / denominator;
    let ratio = eta(curve, merged);
    Ok(ConditionCheck {
        ratio,
        rhs,
        holds: ratio > rhs,
    })
}

/// Sufficient condition for an efficiency gain: `β > 1 − Σ_{j=K+1}^{K+L−1}
/// γ̃_j s_j / Σ_{j=l}^{K} γ_j s_j`.
pub fn check_efficiency_condition(
    curve: &SlotCurve,
    merged: &MergedCurve,
    scores: &[f64],
) -> Result<ConditionCheck, ForkError> {
    check_scores(scores)?;
    let k = curve.slots();
    let l = merged.spec().slot;
    let extra = merged.spec().extra_slots;
    let s = |j: usize| score_at(scores, j);

    let denominator: f64 = (l..=k).map(|j| curve.gamma(j) * s(j)).sum();
    if denominator == 0.0 {
        return Err(ForkError::ZeroDenominator("Σ_{j=l..K} γ_j s_j"));
    }
    let new_slots: f64 = (k + 1..k + extra).map(|j| merged.gamma(j) * s(j)).sum();
    let rhs = 1.0 - new_slots / denominator;
    let ratio = beta(curve, merged);
    Ok(ConditionCheck {
        ratio,
        rhs,
        holds: ratio > rhs,
    })
}

/// Which inequality families of the two revenue-loss lemmas an instance
/// satisfies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    /// `l = 1`, the top gap is the largest, and the scores are well separated.
    pub l1_holds: bool,
    /// `l ≥ 2` and the scores are well separated.
    pub l2_holds: bool,
    /// Indices `j` where `γ_1 − γ_2 ≥ γ_j − γ_{j+1}` fails.
    pub gap_failures: Vec<usize>,
    /// Indices `j ≥ 2` where `(j−1) s_j ≥ j s_{j+1}` fails.
    pub score_failures: Vec<usize>,
}

pub fn check_lemma_preconditions(curve: &SlotCurve, scores: &[f64], slot: usize) -> LemmaCheck {
    let k = curve.slots();
    let top_gap = curve.gamma(1) - curve.gamma(2);
    let gap_failures: Vec<usize> = (1..=k)
        .filter(|&j| top_gap < curve.gamma(j) - curve.gamma(j + 1))
        .collect();
    let s = |j: usize| score_at(scores, j);
    let score_failures: Vec<usize> = (2..=scores.len())
        .filter(|&j| ((j - 1) as f64) * s(j) < j as f64 * s(j + 1))
        .collect();
    LemmaCheck {
        l1_holds: slot == 1 && gap_failures.is_empty() && score_failures.is_empty(),
        l2_holds: slot >= 2 && score_failures.is_empty(),
        gap_failures,
        score_failures,
    }
}
